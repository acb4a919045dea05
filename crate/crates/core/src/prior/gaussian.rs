use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::PriorScore;
use crate::error::{Error, Result};

/// Largest signal length accepted by the Gaussian prior.
pub const MAX_LEN: usize = 1 << 16;
const CACHE_LIMIT: usize = 4096;

/// Zero-mean stationary AR(1) process, `Σ_ij = σ_x² ρ^{|i-j|}`.
///
/// `Σ⁻¹` is tridiagonal, so `(Σ + σ²I)⁻¹ x = (I + σ²Σ⁻¹)⁻¹ Σ⁻¹ x` costs one
/// tridiagonal solve. The elimination coefficients are cached per `(N, σ)`.
#[derive(Debug)]
pub struct GaussianProcessPrior {
    rho: f64,
    variance: f64,
    cache: Mutex<HashMap<(usize, u64), Arc<Tridiagonal>>>,
}

/// Forward-eliminated form of a symmetric tridiagonal system.
#[derive(Debug)]
struct Tridiagonal {
    off: f64,
    /// Modified upper coefficients `c'_i`.
    upper: Vec<f64>,
    /// Reciprocals of the eliminated pivots.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(diag: &[f64], off: f64) -> Self {
        let n = diag.len();
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { off * prev_upper } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            prev_upper = off * inv_pivot[i];
            upper[i] = prev_upper;
        }
        Self { off, upper, inv_pivot }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n {
            let carry = if i > 0 { self.off * rhs[i - 1] } else { 0.0 };
            rhs[i] = (rhs[i] - carry) * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

impl GaussianProcessPrior {
    pub fn new(rho: f64, variance: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::invalid(format!("AR(1) coefficient must lie in (-1, 1), got {rho}")));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::invalid(format!("marginal variance must be positive, got {variance}")));
        }
        Ok(Self { rho, variance, cache: Mutex::new(HashMap::new()) })
    }

    /// White prior `N(0, σ_x² I)`.
    pub fn white(variance: f64) -> Result<Self> {
        Self::new(0.0, variance)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `Σ⁻¹ x`.
    pub fn apply_precision(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let scale = 1.0 / (self.variance * (1.0 - self.rho * self.rho));
        let inner = 1.0 + self.rho * self.rho;
        (0..n)
            .map(|i| {
                let d = if i == 0 || i == n - 1 { 1.0 } else { inner };
                let mut v = d * x[i];
                if i > 0 {
                    v -= self.rho * x[i - 1];
                }
                if i + 1 < n {
                    v -= self.rho * x[i + 1];
                }
                scale * v
            })
            .collect()
    }

    /// `Σ x`, for tests and diagnostics (O(N²)).
    pub fn apply_covariance(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.variance * self.rho.powi((i as i32 - j as i32).abs()) * x[j]).sum())
            .collect()
    }

    fn system(&self, n: usize, sigma: f64) -> Arc<Tridiagonal> {
        let key = (n, sigma.to_bits());
        let mut cache = self.cache.lock().expect("factor cache poisoned");
        if let Some(f) = cache.get(&key) {
            return f.clone();
        }
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        // I + σ²Σ⁻¹
        let s2 = sigma * sigma;
        let scale = s2 / (self.variance * (1.0 - self.rho * self.rho));
        let inner = 1.0 + self.rho * self.rho;
        let diag: Vec<f64> =
            (0..n).map(|i| 1.0 + scale * if i == 0 || i == n - 1 { 1.0 } else { inner }).collect();
        let f = Arc::new(Tridiagonal::new(&diag, -scale * self.rho));
        cache.insert(key, f.clone());
        f
    }

    /// `(Σ + σ²I)⁻¹ x`.
    pub fn solve_shifted(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        let mut y = self.apply_precision(x);
        self.system(x.len(), sigma).solve(&mut y);
        y
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > MAX_LEN {
            Err(Error::invalid(format!("signal length {n} exceeds the Gaussian prior limit {MAX_LEN}")))
        } else {
            Ok(())
        }
    }
}

impl PriorScore for GaussianProcessPrior {
    fn name(&self) -> &str {
        if self.rho == 0.0 {
            "white"
        } else {
            "ar1"
        }
    }

    fn score(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(self.solve_shifted(x, sigma).into_iter().map(|v| -v).collect())
    }

    fn has_vjp(&self) -> bool {
        true
    }

    /// `v - σ²(Σ + σ²I)⁻¹ v`; the Jacobian is symmetric.
    fn vjp(&self, x: &[f64], sigma: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let s2 = sigma * sigma;
        let w = self.solve_shifted(v, sigma);
        Ok(v.iter().zip(&w).map(|(vi, wi)| vi - s2 * wi).collect())
    }
}
