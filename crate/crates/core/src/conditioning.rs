//! Measurement scores `∇ log P(y | x̃; σ)` under the noisy mean model.

use std::fmt::Debug;
use std::str::FromStr;
use std::sync::Arc;

use crate::codec::Measurement;
use crate::error::{Error, Result};
use crate::prior::PriorScore;
use crate::specfun::{q_gauss_unchecked, q_ncx2_unchecked};
use crate::transform::{Mdct, STRIDE};

/// Where the band scores are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanModel {
    /// At `U(x̃)`.
    Noisy,
    /// At `U(m(x̃))`, `m(x̃) = x̃ + σ² · prior score`, mapped back through the
    /// prior's vector-Jacobian product.
    Tweedie,
}

/// Noise scale `r` used inside the band scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceModel {
    /// `r = σ`.
    Noisy,
    /// `r² = σ² / (1 + σ²)`.
    Pgdm,
}

impl FromStr for MeanModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noisy" => Ok(Self::Noisy),
            "tweedie" => Ok(Self::Tweedie),
            _ => Err(Error::invalid(format!("unknown mean model {s:?} (noisy | tweedie)"))),
        }
    }
}

impl FromStr for CovarianceModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noisy" => Ok(Self::Noisy),
            "pgdm" => Ok(Self::Pgdm),
            _ => Err(Error::invalid(format!("unknown covariance model {s:?} (noisy | pgdm)"))),
        }
    }
}

/// Default clamp factor: scores are limited to `5/σ` per coordinate.
pub const DEFAULT_CLAMP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningConfig {
    pub mean_model: MeanModel,
    pub covariance_model: CovarianceModel,
    /// Per-coordinate limit as a multiple of `1/σ`; `None` disables it.
    pub clamp: Option<f64>,
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        Self { mean_model: MeanModel::Noisy, covariance_model: CovarianceModel::Noisy, clamp: Some(DEFAULT_CLAMP) }
    }
}

impl ConditioningConfig {
    pub fn validate(&self) -> Result<()> {
        match self.clamp {
            Some(c) if !(c > 0.0) => Err(Error::invalid(format!("clamp must be positive, got {c}"))),
            _ => Ok(()),
        }
    }

    pub fn noise_scale(&self, sigma: f64) -> f64 {
        match self.covariance_model {
            CovarianceModel::Noisy => sigma,
            CovarianceModel::Pgdm => (sigma * sigma / (1.0 + sigma * sigma)).sqrt(),
        }
    }

    fn apply_clamp(&self, sigma: f64, v: &mut [f64]) {
        if let Some(c) = self.clamp {
            let limit = c / sigma;
            v.iter_mut().for_each(|s| *s = s.clamp(-limit, limit));
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("sigma must be positive and finite, got {sigma}")))
    }
}

/// Envelope-interval score `(2/σ²) q_{χ'²_K}(ξ_b; ξ_L, ξ_H) ũ_b`, written
/// into `out` (added, not overwritten).
fn add_envelope_score(u: &[f64], interval: (f64, f64), sigma: f64, out: &mut [f64]) {
    let (e_lo, e_hi) = interval;
    if e_lo == 0.0 && e_hi == f64::INFINITY {
        return;
    }
    let k = u.len();
    let s2 = sigma * sigma;
    let norm2: f64 = u.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return;
    }
    let lam = norm2 / s2;
    let xi_lo = k as f64 * e_lo / s2;
    let xi_hi = k as f64 * e_hi / s2;
    let q = q_ncx2_unchecked(lam, xi_lo, xi_hi, k as u32);
    let factor = 2.0 * q / s2;
    for (o, v) in out.iter_mut().zip(u) {
        *o += factor * v;
    }
}

pub fn envelope_score(u: &[f64], interval: (f64, f64), sigma: f64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    if u.is_empty() {
        return Err(Error::invalid("empty band"));
    }
    if !(interval.0 >= 0.0 && interval.0 < interval.1) {
        return Err(Error::invalid(format!("invalid envelope interval {interval:?}")));
    }
    let mut out = vec![0.0; u.len()];
    add_envelope_score(u, interval, sigma, &mut out);
    Ok(out)
}

pub fn sample_score(u: f64, bin: (f64, f64), sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(bin.0 < bin.1) {
        return Err(Error::invalid(format!("empty bin {bin:?}")));
    }
    Ok(q_gauss_unchecked(u, bin.0, bin.1, sigma))
}

/// Envelope score plus the per-line sample scores of one band.
pub fn band_score(u: &[f64], env: (f64, f64), bins: &[(f64, f64)], sigma: f64) -> Result<Vec<f64>> {
    if bins.len() != u.len() {
        return Err(Error::invalid("band and bin counts differ"));
    }
    let mut out = envelope_score(u, env, sigma)?;
    for ((o, &v), &bin) in out.iter_mut().zip(u).zip(bins) {
        *o += sample_score(v, bin, sigma)?;
    }
    Ok(out)
}

/// A measurement model that can score a time-domain iterate.
pub trait MeasurementScore: Send + Sync + Debug {
    fn name(&self) -> &str;

    /// Required signal length.
    fn len(&self) -> usize;

    fn config(&self) -> &ConditioningConfig;

    /// Score before the clamp, at noise level `sigma`.
    fn raw_score(&self, x: &[f64], sigma: f64, prior: &dyn PriorScore) -> Result<Vec<f64>>;

    /// Clamped score.
    fn score(&self, x: &[f64], sigma: f64, prior: &dyn PriorScore) -> Result<Vec<f64>> {
        check_sigma(sigma)?;
        if x.len() != self.len() {
            return Err(Error::invalid(format!("signal length {} does not match measurement length {}", x.len(), self.len())));
        }
        if self.config().mean_model == MeanModel::Tweedie && !prior.has_vjp() {
            return Err(Error::Capability(format!(
                "Tweedie mean requires a prior with a vector-Jacobian product; `{}` has none",
                prior.name()
            )));
        }
        let mut s = self.raw_score(x, sigma, prior)?;
        self.config().apply_clamp(sigma, &mut s);
        Ok(s)
    }
}

/// `x̃ + σ² · prior score`.
pub fn tweedie_mean(x: &[f64], sigma: f64, prior: &dyn PriorScore) -> Result<Vec<f64>> {
    let s = prior.score(x, sigma)?;
    Ok(x.iter().zip(&s).map(|(a, b)| a + sigma * sigma * b).collect())
}

/// Scores a codec [`Measurement`] through the MDCT.
#[derive(Debug, Clone)]
pub struct CodecConditioner {
    measurement: Arc<Measurement>,
    cfg: ConditioningConfig,
}

impl CodecConditioner {
    pub fn new(measurement: Arc<Measurement>, cfg: ConditioningConfig) -> Result<Self> {
        cfg.validate()?;
        if measurement.frames() < 2 {
            return Err(Error::invalid("measurement needs at least two frames"));
        }
        Ok(Self { measurement, cfg })
    }

    pub fn measurement(&self) -> &Measurement {
        &self.measurement
    }

    /// Stacked band scores at spectrum `u` with noise scale `r`.
    pub fn spectral_score(&self, u: &[f64], r: f64) -> Vec<f64> {
        let m = &*self.measurement;
        let layout = m.layout();
        let mut out = vec![0.0; u.len()];
        for f in 0..m.frames() {
            let frame = &u[f * STRIDE..(f + 1) * STRIDE];
            let dst = &mut out[f * STRIDE..(f + 1) * STRIDE];
            let bins = m.bin_row(f);
            for b in 0..layout.num_bands() {
                let range = layout.range(b);
                add_envelope_score(&frame[range.clone()], m.env_interval(f, b), r, &mut dst[range.clone()]);
                let delta = m.stepsize(f, b);
                for i in range {
                    let k = bins[i] as f64;
                    dst[i] += q_gauss_unchecked(frame[i], (k - 0.5) * delta, (k + 0.5) * delta, r);
                }
            }
        }
        out
    }
}

impl MeasurementScore for CodecConditioner {
    fn name(&self) -> &str {
        "codec"
    }

    fn len(&self) -> usize {
        self.measurement.num_samples()
    }

    fn config(&self) -> &ConditioningConfig {
        &self.cfg
    }

    fn raw_score(&self, x: &[f64], sigma: f64, prior: &dyn PriorScore) -> Result<Vec<f64>> {
        let mdct = Mdct::standard();
        let r = self.cfg.noise_scale(sigma);
        let point = match self.cfg.mean_model {
            MeanModel::Noisy => x.to_vec(),
            MeanModel::Tweedie => tweedie_mean(x, sigma, prior)?,
        };
        let mut u = vec![0.0; x.len()];
        mdct.forward(&point, &mut u);
        let g = self.spectral_score(&u, r);
        let mut t = vec![0.0; x.len()];
        mdct.inverse(&g, &mut t);
        match self.cfg.mean_model {
            MeanModel::Noisy => Ok(t),
            MeanModel::Tweedie => prior.vjp(x, sigma, &t),
        }
    }
}

/// Interval constraints on individual time-domain samples; with no
/// constraints it is the unconditional model.
#[derive(Debug, Clone)]
pub struct SampleBinConditioner {
    len: usize,
    bins: Vec<(usize, f64, f64)>,
    cfg: ConditioningConfig,
}

impl SampleBinConditioner {
    pub fn new(len: usize, bins: Vec<(usize, f64, f64)>, cfg: ConditioningConfig) -> Result<Self> {
        cfg.validate()?;
        for &(i, lo, hi) in &bins {
            if i >= len || !(lo < hi) {
                return Err(Error::invalid(format!("invalid bin constraint ({i}, {lo}, {hi})")));
            }
        }
        Ok(Self { len, bins, cfg })
    }

    pub fn unconditional(len: usize) -> Self {
        Self { len, bins: Vec::new(), cfg: ConditioningConfig::default() }
    }
}

impl MeasurementScore for SampleBinConditioner {
    fn name(&self) -> &str {
        "sample-bins"
    }

    fn len(&self) -> usize {
        self.len
    }

    fn config(&self) -> &ConditioningConfig {
        &self.cfg
    }

    fn raw_score(&self, x: &[f64], sigma: f64, prior: &dyn PriorScore) -> Result<Vec<f64>> {
        if self.bins.is_empty() {
            return Ok(vec![0.0; x.len()]);
        }
        let r = self.cfg.noise_scale(sigma);
        let point = match self.cfg.mean_model {
            MeanModel::Noisy => x.to_vec(),
            MeanModel::Tweedie => tweedie_mean(x, sigma, prior)?,
        };
        let mut g = vec![0.0; x.len()];
        for &(i, lo, hi) in &self.bins {
            g[i] += q_gauss_unchecked(point[i], lo, hi, r);
        }
        match self.cfg.mean_model {
            MeanModel::Noisy => Ok(g),
            MeanModel::Tweedie => prior.vjp(x, sigma, &g),
        }
    }
}
