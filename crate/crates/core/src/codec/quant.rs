//! Envelope and line quantizers.

use crate::error::{Error, Result};
use crate::transform::MdctSpectrum;

/// Envelope grid step in dB.
pub const ENV_STEP_DB: f64 = 3.0;
/// Envelopes below this level (-96 dB) are coded as silent.
pub const SILENT_FLOOR: f64 = 2.511_886_431_509_582e-10;
/// Reserved envelope index for silent bands, just below the lowest regular index.
pub const SILENT_INDEX: i32 = -33;
/// Finest allocation level.
pub const ALLOC_MIN: i32 = -20;
/// Coarsest allocation level.
pub const ALLOC_MAX: i32 = 20;
/// Allocation step in dB.
pub const ALLOC_STEP_DB: f64 = 1.5;

/// Per-band mean energy `e_b(m) = ‖u_b(m)‖² / K_b`, frame-major (`M × B`).
pub fn envelope(spectrum: &MdctSpectrum) -> Vec<f64> {
    let layout = spectrum.layout();
    let mut out = Vec::with_capacity(spectrum.frames() * layout.num_bands());
    for m in 0..spectrum.frames() {
        for b in 0..layout.num_bands() {
            out.push(band_energy(spectrum.band(m, b)));
        }
    }
    out
}

#[inline]
pub fn band_energy(lines: &[f64]) -> f64 {
    lines.iter().map(|u| u * u).sum::<f64>() / lines.len() as f64
}

/// Interval `[e_L, e_H)` of an envelope index. The silent index maps to
/// `[0, SILENT_FLOOR)`.
pub fn env_interval(index: i32) -> (f64, f64) {
    if index == SILENT_INDEX {
        (0.0, SILENT_FLOOR)
    } else {
        let centre = ENV_STEP_DB * index as f64;
        (db_to_power(centre - ENV_STEP_DB / 2.0), db_to_power(centre + ENV_STEP_DB / 2.0))
    }
}

/// Geometric midpoint of the envelope interval. Silent bands use the floor.
pub fn env_midpoint(index: i32) -> f64 {
    if index == SILENT_INDEX {
        SILENT_FLOOR
    } else {
        db_to_power(ENV_STEP_DB * index as f64)
    }
}

#[inline]
fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn quantize_envelope(e: f64) -> Result<i32> {
    if !(e >= 0.0) || !e.is_finite() {
        return Err(Error::invalid(format!("envelope must be finite and non-negative, got {e}")));
    }
    if e < SILENT_FLOOR {
        return Ok(SILENT_INDEX);
    }
    let mut index = (10.0 * e.log10() / ENV_STEP_DB).round() as i32;
    // settle rounding at the interval edges against the decoder's grid
    loop {
        let (lo, hi) = env_interval(index);
        if e < lo && index - 1 > SILENT_INDEX {
            index -= 1;
        } else if e >= hi {
            index += 1;
        } else {
            return Ok(index);
        }
    }
}

/// Stepsize constant `c(a) = 10^{-3/20} · 10^{1.5 a / 20}`.
#[inline]
pub fn step_constant(alloc: i32) -> f64 {
    10f64.powf((-3.0 + ALLOC_STEP_DB * alloc as f64) / 20.0)
}

/// Line stepsize `Δ = c(a) · ê^{1/4}` for an envelope index.
#[inline]
pub fn line_stepsize(alloc: i32, env_index: i32) -> f64 {
    step_constant(alloc) * env_midpoint(env_index).powf(0.25)
}

/// Bin index `round(u / Δ)`, consistent with [`bin_interval`].
#[inline]
pub fn quantize_line(u: f64, delta: f64) -> i32 {
    let mut k = (u / delta).round() as i32;
    loop {
        let (lo, hi) = bin_interval(k, delta);
        if u < lo {
            k -= 1;
        } else if u >= hi {
            k += 1;
        } else {
            return k;
        }
    }
}

pub fn quantize_lines(lines: &[f64], delta: f64) -> Result<Vec<i32>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("stepsize must be positive, got {delta}")));
    }
    Ok(lines.iter().map(|&u| quantize_line(u, delta)).collect())
}

/// Bin interval `[(k - ½)Δ, (k + ½)Δ)`.
#[inline]
pub fn bin_interval(k: i32, delta: f64) -> (f64, f64) {
    ((k as f64 - 0.5) * delta, (k as f64 + 0.5) * delta)
}
