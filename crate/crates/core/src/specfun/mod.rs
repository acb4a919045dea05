//! Special functions for the conditional scores.

mod ncx2;
mod normal;

pub use ncx2::{ln_gamma_pq, ncx2_pdf, ncx2_sf, q_ncx2, NcChi2};
pub use normal::{
    ln_1m_exp, ln_add_exp, ln_ndtr, ln_ndtr_diff, ln_ndtr_upper, ln_phi, ndtr, phi, q_gauss,
};

pub(crate) use ncx2::q_ncx2_unchecked;
pub(crate) use normal::q_gauss_unchecked;
