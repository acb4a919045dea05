//! Standard normal density/CDF in the log domain and the bin-probability
//! score ratio used by the sample quantization score.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// ln φ(x) for the standard normal.
#[inline]
pub fn ln_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// φ(x) for the standard normal.
#[inline]
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ(x) for the standard normal.
#[inline]
pub fn ndtr(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Mills ratio Φc(x)/φ(x) for x >= 5, by Lentz's continued fraction.
fn mills_ratio(x: f64) -> f64 {
    // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// ln Φ(x), accurate in both tails.
pub fn ln_ndtr(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if x < -5.0 {
        ln_phi(x) + mills_ratio(-x).ln()
    } else if x > 5.0 {
        (-ln_ndtr_upper(x).exp()).ln_1p()
    } else {
        ndtr(x).ln()
    }
}

/// ln Φc(x) = ln(1 - Φ(x)).
#[inline]
pub fn ln_ndtr_upper(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::NEG_INFINITY
    } else if x > 5.0 {
        ln_phi(x) + mills_ratio(x).ln()
    } else {
        ln_ndtr(-x)
    }
}

/// ln(1 - exp(d)) for d <= 0.
#[inline]
pub fn ln_1m_exp(d: f64) -> f64 {
    if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// ln(exp(a) + exp(b)).
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// ln(Φ(hi) - Φ(lo)) for lo < hi; either bound may be infinite.
pub fn ln_ndtr_diff(hi: f64, lo: f64) -> f64 {
    debug_assert!(lo < hi);
    if lo >= 0.0 {
        let upper_lo = ln_ndtr_upper(lo);
        upper_lo + ln_1m_exp(ln_ndtr_upper(hi) - upper_lo)
    } else if hi <= 0.0 {
        let lower_hi = ln_ndtr(hi);
        lower_hi + ln_1m_exp(ln_ndtr(lo) - lower_hi)
    } else {
        let outside = 0.5 * libm::erfc(hi * FRAC_1_SQRT_2) + 0.5 * libm::erfc(-lo * FRAC_1_SQRT_2);
        (-outside).ln_1p()
    }
}

/// Score of the log probability that `x ~ N(n, σ²)` falls in `[lo, hi]`,
/// differentiated with respect to the mean `n`:
///
/// `(φσ(n - lo) - φσ(n - hi)) / (Φσ(n - lo) - Φσ(n - hi))`.
pub fn q_gauss(n: f64, lo: f64, hi: f64, sigma: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty bin [{lo}, {hi}]")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive and finite, got {sigma}")));
    }
    Ok(q_gauss_unchecked(n, lo, hi, sigma))
}

/// Φc(x)/φ(x) for x >= 0 (zero at +inf).
#[inline]
fn upper_mills(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x < 5.0 {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2) / phi(x)
    } else {
        mills_ratio(x)
    }
}

/// `(φ(a) - φ(b)) / (Φ(a) - Φ(b))` for standardized `a > b >= 0`, written
/// relative to φ(b) so that no large logarithms are differenced.
#[inline]
fn standardized_ratio_above(a: f64, b: f64) -> f64 {
    // e = φ(a)/φ(b)
    let e = if a.is_finite() { (-0.5 * (a - b) * (a + b)).exp() } else { 0.0 };
    let mass = upper_mills(b) - e * upper_mills(a);
    (e - 1.0) / mass
}

#[inline]
pub(crate) fn q_gauss_unchecked(n: f64, lo: f64, hi: f64, sigma: f64) -> f64 {
    let a = (n - lo) / sigma;
    let b = (n - hi) / sigma;
    if b >= 0.0 {
        standardized_ratio_above(a, b) / sigma
    } else if a <= 0.0 {
        -standardized_ratio_above(-b, -a) / sigma
    } else {
        let upper = if a.is_finite() { phi(a) } else { 0.0 };
        let lower = if b.is_finite() { phi(b) } else { 0.0 };
        let mass = 0.5 * (libm::erf(a * FRAC_1_SQRT_2) - libm::erf(b * FRAC_1_SQRT_2));
        (upper - lower) / (mass * sigma)
    }
}
