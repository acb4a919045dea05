//! Conditional annealed Langevin sampling on a geometric noise schedule.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::codec::{band_energy, bin_interval, env_interval, Measurement};
use crate::conditioning::MeasurementScore;
use crate::error::{Error, Result};
use crate::prior::PriorScore;
use crate::transform::{Mdct, STRIDE};

/// Default schedule: 1500 steps from 0 dB to -90 dB with ε = 0.5.
pub const DEFAULT_STEPS: usize = 1500;
pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_SIGMA2_START_DB: f64 = 0.0;
pub const DEFAULT_SIGMA2_END_DB: f64 = -90.0;
/// Tweedie preset: 1250 steps ending at -75 dB.
pub const TWEEDIE_STEPS: usize = 1250;
pub const TWEEDIE_SIGMA2_END_DB: f64 = -75.0;

/// Geometric `σ_0 > … > σ_I` with step scale ε.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    sigmas: Vec<f64>,
    eps: f64,
}

impl NoiseSchedule {
    /// `σ_i² = 10^{dB_i/10}` with `dB_i` affine in `i`, both endpoints included.
    pub fn new(steps: usize, sigma2_start_db: f64, sigma2_end_db: f64, eps: f64) -> Result<Self> {
        if steps < 2 {
            return Err(Error::invalid(format!("schedule needs at least 2 steps, got {steps}")));
        }
        if !(sigma2_start_db > sigma2_end_db) || !sigma2_start_db.is_finite() || !sigma2_end_db.is_finite() {
            return Err(Error::invalid(format!(
                "schedule must decrease: start {sigma2_start_db} dB, end {sigma2_end_db} dB"
            )));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("step scale must be positive, got {eps}")));
        }
        let span = sigma2_end_db - sigma2_start_db;
        let sigmas = (0..=steps)
            .map(|i| 10f64.powf((sigma2_start_db + span * i as f64 / steps as f64) / 20.0))
            .collect();
        Ok(Self { sigmas, eps })
    }

    pub fn standard() -> Self {
        Self::new(DEFAULT_STEPS, DEFAULT_SIGMA2_START_DB, DEFAULT_SIGMA2_END_DB, DEFAULT_EPS).expect("valid defaults")
    }

    pub fn tweedie_preset() -> Self {
        Self::new(TWEEDIE_STEPS, DEFAULT_SIGMA2_START_DB, TWEEDIE_SIGMA2_END_DB, DEFAULT_EPS).expect("valid preset")
    }

    /// Number of update steps `I`.
    pub fn steps(&self) -> usize {
        self.sigmas.len() - 1
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.sigmas[i]
    }

    /// Step size `α_i = ε σ_i²`.
    pub fn alpha(&self, i: usize) -> f64 {
        self.eps * self.sigmas[i] * self.sigmas[i]
    }

    /// Noise variance `β_i² = 2 α_{i+1}` for `i < I`, zero at the final step.
    pub fn beta_sq(&self, i: usize) -> f64 {
        if i >= self.steps() {
            0.0
        } else {
            2.0 * self.alpha(i + 1)
        }
    }
}

pub fn make_schedule(steps: usize, sigma2_start_db: f64, sigma2_end_db: f64, eps: f64) -> Result<NoiseSchedule> {
    NoiseSchedule::new(steps, sigma2_start_db, sigma2_end_db, eps)
}

/// ChaCha8 stream that counts the 32-bit words drawn from it.
#[derive(Debug, Clone)]
pub struct CountingRng {
    inner: ChaCha8Rng,
    words: u64,
}

impl CountingRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), words: 0 }
    }

    pub fn words_drawn(&self) -> u64 {
        self.words
    }
}

impl RngCore for CountingRng {
    fn next_u32(&mut self) -> u32 {
        self.words += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.words += 2;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.words += dest.len().div_ceil(4) as u64;
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Snapshot passed to the progress callback.
#[derive(Debug)]
pub struct Progress<'a> {
    pub step: usize,
    pub sigma: f64,
    pub prior_norm: f64,
    pub measurement_norm: f64,
    pub iterate: &'a [f64],
    /// RNG words consumed so far.
    pub rng_words: u64,
}

pub struct SamplerOptions<'a> {
    /// Callback cadence in steps; the final step always reports.
    pub progress_every: usize,
    pub progress: Option<&'a mut dyn FnMut(&Progress<'_>)>,
}

impl Default for SamplerOptions<'_> {
    fn default() -> Self {
        Self { progress_every: 100, progress: None }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the sampler and returns `x̃_{t_I}`.
pub fn langevin_sample(
    cond: &dyn MeasurementScore,
    prior: &dyn PriorScore,
    schedule: &NoiseSchedule,
    seed: u64,
) -> Result<Vec<f64>> {
    langevin_sample_with(cond, prior, schedule, seed, SamplerOptions::default())
}

pub fn langevin_sample_with(
    cond: &dyn MeasurementScore,
    prior: &dyn PriorScore,
    schedule: &NoiseSchedule,
    seed: u64,
    mut opts: SamplerOptions<'_>,
) -> Result<Vec<f64>> {
    let n = cond.len();
    if cond.config().mean_model == crate::conditioning::MeanModel::Tweedie && !prior.has_vjp() {
        return Err(Error::Capability(format!(
            "Tweedie mean requires a prior with a vector-Jacobian product; `{}` has none",
            prior.name()
        )));
    }
    let mut rng = CountingRng::seed_from_u64(seed);
    let sigma0 = schedule.sigma(0);
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma0 * z
        })
        .collect();
    let steps = schedule.steps();
    for i in 1..=steps {
        let sigma = schedule.sigma(i);
        let alpha = schedule.alpha(i);
        let sp = prior.score(&x, sigma)?;
        let sm = cond.score(&x, sigma, prior)?;
        for ((xi, a), b) in x.iter_mut().zip(&sp).zip(&sm) {
            *xi += alpha * (a + b);
        }
        if i < steps {
            let beta = schedule.beta_sq(i).sqrt();
            for xi in x.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *xi += beta * z;
            }
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical { step: i, sigma, reason: format!("non-finite iterate at coordinate {j}") });
        }
        if let Some(cb) = opts.progress.as_mut() {
            if i % opts.progress_every.max(1) == 0 || i == steps {
                cb(&Progress {
                    step: i,
                    sigma,
                    prior_norm: norm(&sp),
                    measurement_norm: norm(&sm),
                    iterate: &x,
                    rng_words: rng.words_drawn(),
                });
            }
        }
    }
    Ok(x)
}

/// Independent runs for several seeds, in parallel when the prior allows it.
pub fn langevin_sample_seeds(
    cond: &dyn MeasurementScore,
    prior: &dyn PriorScore,
    schedule: &NoiseSchedule,
    seeds: &[u64],
) -> Vec<Result<Vec<f64>>> {
    if prior.is_concurrent() {
        seeds.par_iter().map(|&s| langevin_sample(cond, prior, schedule, s)).collect()
    } else {
        seeds.iter().map(|&s| langevin_sample(cond, prior, schedule, s)).collect()
    }
}

/// Fractions of envelope intervals and line bins of `y` matched by `x̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consistency {
    pub envelope: f64,
    pub bins: f64,
    /// Over all envelope intervals and line bins together.
    pub overall: f64,
}

pub fn consistency_rate(x: &[f64], y: &Measurement) -> Result<Consistency> {
    if x.len() != y.num_samples() {
        return Err(Error::invalid(format!(
            "signal has {} samples, measurement covers {}",
            x.len(),
            y.num_samples()
        )));
    }
    let mut u = vec![0.0; x.len()];
    Mdct::standard().forward(x, &mut u);
    let layout = y.layout();
    let (mut env_hits, mut bin_hits) = (0usize, 0usize);
    for m in 0..y.frames() {
        let frame = &u[m * STRIDE..(m + 1) * STRIDE];
        let bins = y.bin_row(m);
        for b in 0..layout.num_bands() {
            let range = layout.range(b);
            let (lo, hi) = env_interval(y.env_index(m, b));
            let e = band_energy(&frame[range.clone()]);
            env_hits += (lo <= e && e < hi) as usize;
            let delta = y.stepsize(m, b);
            for i in range {
                let (lo, hi) = bin_interval(bins[i], delta);
                bin_hits += (lo <= frame[i] && frame[i] < hi) as usize;
            }
        }
    }
    let n_env = y.frames() * layout.num_bands();
    let n_bins = y.frames() * layout.num_lines();
    Ok(Consistency {
        envelope: env_hits as f64 / n_env as f64,
        bins: bin_hits as f64 / n_bins as f64,
        overall: (env_hits + bin_hits) as f64 / (n_env + n_bins) as f64,
    })
}
