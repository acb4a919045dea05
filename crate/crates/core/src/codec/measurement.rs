use std::sync::Arc;

use super::quant::{bin_interval, env_interval, env_midpoint, line_stepsize, ALLOC_MAX, ALLOC_MIN, SILENT_INDEX};
use crate::error::{Error, Result};
use crate::transform::{BandLayout, STRIDE};

/// The discrete codec output: per-frame allocation levels, envelope indices
/// (`M × B`) and line bin indices (`M × L`), all frame-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    layout: Arc<BandLayout>,
    frames: usize,
    alloc: Vec<i32>,
    overflow: Vec<bool>,
    env: Vec<i32>,
    bins: Vec<i32>,
}

/// Largest envelope index accepted (about +600 dB).
pub const ENV_INDEX_MAX: i32 = 200;

impl Measurement {
    pub fn new(
        layout: Arc<BandLayout>,
        alloc: Vec<i32>,
        overflow: Vec<bool>,
        env: Vec<i32>,
        bins: Vec<i32>,
    ) -> Result<Self> {
        let frames = alloc.len();
        let bands = layout.num_bands();
        let lines = layout.num_lines();
        if overflow.len() != frames || env.len() != frames * bands || bins.len() != frames * lines {
            return Err(Error::invalid("measurement dimensions do not agree"));
        }
        if let Some(a) = alloc.iter().find(|a| !(ALLOC_MIN..=ALLOC_MAX).contains(*a)) {
            return Err(Error::invalid(format!("allocation level {a} out of range")));
        }
        if let Some(i) = env.iter().find(|i| !(SILENT_INDEX..=ENV_INDEX_MAX).contains(*i)) {
            return Err(Error::invalid(format!("envelope index {i} out of range")));
        }
        Ok(Self { layout, frames, alloc, overflow, env, bins })
    }

    pub fn layout(&self) -> &Arc<BandLayout> {
        &self.layout
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn num_bands(&self) -> usize {
        self.layout.num_bands()
    }

    pub fn num_lines(&self) -> usize {
        self.layout.num_lines()
    }

    /// Number of time samples covered, `M · L`.
    pub fn num_samples(&self) -> usize {
        self.frames * STRIDE
    }

    pub fn alloc_levels(&self) -> &[i32] {
        &self.alloc
    }

    pub fn overflow_flags(&self) -> &[bool] {
        &self.overflow
    }

    pub fn env_indices(&self) -> &[i32] {
        &self.env
    }

    pub fn bin_indices(&self) -> &[i32] {
        &self.bins
    }

    pub fn env_index(&self, m: usize, b: usize) -> i32 {
        self.env[m * self.num_bands() + b]
    }

    pub fn env_row(&self, m: usize) -> &[i32] {
        let nb = self.num_bands();
        &self.env[m * nb..(m + 1) * nb]
    }

    pub fn bin_row(&self, m: usize) -> &[i32] {
        let nl = self.num_lines();
        &self.bins[m * nl..(m + 1) * nl]
    }

    /// Bin indices of band `b` in frame `m`.
    pub fn band_bins(&self, m: usize, b: usize) -> &[i32] {
        let r = self.layout.range(b);
        &self.bin_row(m)[r]
    }

    /// Envelope interval `[e_L, e_H)`.
    pub fn env_interval(&self, m: usize, b: usize) -> (f64, f64) {
        env_interval(self.env_index(m, b))
    }

    /// Geometric midpoint `ê_b` of the envelope interval.
    pub fn env_midpoint(&self, m: usize, b: usize) -> f64 {
        env_midpoint(self.env_index(m, b))
    }

    pub fn stepsize(&self, m: usize, b: usize) -> f64 {
        line_stepsize(self.alloc[m], self.env_index(m, b))
    }

    /// Bin interval of line `k` of frame `m`.
    pub fn bin_interval(&self, m: usize, line: usize, band: usize) -> (f64, f64) {
        bin_interval(self.bin_row(m)[line], self.stepsize(m, band))
    }

    /// Largest allocation level used anywhere in the stream.
    pub fn max_alloc(&self) -> Option<i32> {
        self.alloc.iter().copied().max()
    }
}
