use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::bitstream::Bitstream;
use super::measurement::Measurement;
use super::quant::{band_energy, SILENT_INDEX};
use crate::error::Result;
use crate::transform::{mdct_synthesize, AudioSignal, MdctSpectrum};

/// Number of coarsest allocation levels (counted down from the stream's
/// coarsest level in use) whose frames receive noise fill.
pub const NOISE_FILL_LEVELS: i32 = 3;

/// Frames eligible for noise fill: allocation level within the three
/// coarsest levels in use in this stream. Overflow frames are forced to the
/// coarsest level, so they are always eligible but do not set the reference.
pub fn noise_fill_frames(measurement: &Measurement) -> Vec<bool> {
    let levels = measurement.alloc_levels();
    let flags = measurement.overflow_flags();
    let top = levels
        .iter()
        .zip(flags)
        .filter(|(_, &f)| !f)
        .map(|(&a, _)| a)
        .max()
        .or_else(|| measurement.max_alloc())
        .unwrap_or(0);
    levels.iter().zip(flags).map(|(&a, &f)| f || a > top - NOISE_FILL_LEVELS).collect()
}

/// Bin-midpoint spectrum `û = kΔ`, optionally noise filled.
pub fn reconstruct_spectrum(measurement: &Measurement, noise_fill: bool, seed: u64) -> Result<MdctSpectrum> {
    let layout = measurement.layout().clone();
    let mut spectrum = MdctSpectrum::zeros(measurement.frames(), layout.clone());
    let fill = noise_fill_frames(measurement);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in 0..measurement.frames() {
        let bins = measurement.bin_row(m);
        let frame = spectrum.frame_mut(m);
        for b in 0..layout.num_bands() {
            let range = layout.range(b);
            let delta = measurement.stepsize(m, b);
            let band_bins = &bins[range.clone()];
            let silent = measurement.env_index(m, b) == SILENT_INDEX;
            if noise_fill && fill[m] && !silent && band_bins.iter().all(|&k| k == 0) {
                // white noise rescaled so the band energy is exactly ê_b
                let noise: Vec<f64> = range.clone().map(|_| StandardNormal.sample(&mut rng)).collect();
                let energy = band_energy(&noise);
                let scale = if energy > 0.0 { (measurement.env_midpoint(m, b) / energy).sqrt() } else { 0.0 };
                for (u, n) in frame[range].iter_mut().zip(&noise) {
                    *u = scale * n;
                }
            } else {
                for (u, &k) in frame[range].iter_mut().zip(band_bins) {
                    *u = k as f64 * delta;
                }
            }
        }
    }
    Ok(spectrum)
}

/// Legacy decoder: midpoint reconstruction with noise fill.
pub fn decode_legacy(stream: &Bitstream, noise_seed: u64) -> Result<AudioSignal> {
    decode_measurement(&stream.measurement, true, noise_seed)
}

/// Midpoint reconstruction; `noise_fill = false` gives the fully consistent
/// deterministic output.
pub fn decode_measurement(measurement: &Measurement, noise_fill: bool, noise_seed: u64) -> Result<AudioSignal> {
    mdct_synthesize(&reconstruct_spectrum(measurement, noise_fill, noise_seed)?)
}
