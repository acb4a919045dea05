use super::PriorScore;
use crate::error::{Error, Result};
use crate::specfun::ln_add_exp;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmComponent {
    pub weight: f64,
    /// Mean vector; a single value is broadcast to every coordinate.
    pub mean: Vec<f64>,
    /// Isotropic variance.
    pub variance: f64,
}

/// Mixture of isotropic Gaussians. The σ-smoothed density replaces each
/// component variance `v_k` with `v_k + σ²`.
#[derive(Debug, Clone)]
pub struct GmmPrior {
    components: Vec<GmmComponent>,
}

impl GmmPrior {
    pub fn new(components: Vec<GmmComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        for c in &components {
            if !(c.weight > 0.0) || !(c.variance > 0.0) || c.mean.is_empty() {
                return Err(Error::invalid("mixture weights and variances must be positive, means non-empty"));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    fn mean_at(c: &GmmComponent, i: usize) -> f64 {
        if c.mean.len() == 1 {
            c.mean[0]
        } else {
            c.mean[i]
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        for c in &self.components {
            if c.mean.len() != 1 && c.mean.len() != n {
                return Err(Error::invalid(format!("mixture mean has length {}, signal has {n}", c.mean.len())));
            }
        }
        Ok(())
    }

    /// Per-component log joint `ln w_k + ln N(x; μ_k, (v_k + σ²) I)`.
    fn log_joint(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        let n = x.len() as f64;
        self.components
            .iter()
            .map(|c| {
                let v = c.variance + sigma * sigma;
                let d2: f64 = x.iter().enumerate().map(|(i, xi)| (xi - Self::mean_at(c, i)).powi(2)).sum();
                c.weight.ln() - 0.5 * d2 / v - 0.5 * n * (2.0 * std::f64::consts::PI * v).ln()
            })
            .collect()
    }

    /// `ln p(x; σ)` of the smoothed mixture.
    pub fn log_density(&self, x: &[f64], sigma: f64) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.log_joint(x, sigma).into_iter().fold(f64::NEG_INFINITY, ln_add_exp))
    }

    fn responsibilities(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        let lj = self.log_joint(x, sigma);
        let total = lj.iter().copied().fold(f64::NEG_INFINITY, ln_add_exp);
        lj.into_iter().map(|l| (l - total).exp()).collect()
    }

    /// Per-component scores `d_k = (μ_k - x) / (v_k + σ²)`.
    fn directions(&self, x: &[f64], sigma: f64) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| {
                let v = c.variance + sigma * sigma;
                x.iter().enumerate().map(|(i, xi)| (Self::mean_at(c, i) - xi) / v).collect()
            })
            .collect()
    }
}

impl PriorScore for GmmPrior {
    fn name(&self) -> &str {
        "gmm"
    }

    fn score(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let r = self.responsibilities(x, sigma);
        let d = self.directions(x, sigma);
        let mut out = vec![0.0; x.len()];
        for (rk, dk) in r.iter().zip(&d) {
            for (o, v) in out.iter_mut().zip(dk) {
                *o += rk * v;
            }
        }
        Ok(out)
    }

    fn has_vjp(&self) -> bool {
        true
    }

    /// `v + σ² H v` with the (symmetric) score Jacobian
    /// `H = Σ r_k (d_k d_kᵀ - I/(v_k+σ²)) - s sᵀ`.
    fn vjp(&self, x: &[f64], sigma: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let s2 = sigma * sigma;
        let r = self.responsibilities(x, sigma);
        let d = self.directions(x, sigma);
        let mut mean_dir = vec![0.0; x.len()];
        let mut hv = vec![0.0; x.len()];
        for ((rk, dk), c) in r.iter().zip(&d).zip(&self.components) {
            let dot: f64 = dk.iter().zip(v).map(|(a, b)| a * b).sum();
            let inv_var = 1.0 / (c.variance + s2);
            for i in 0..x.len() {
                hv[i] += rk * (dk[i] * dot - v[i] * inv_var);
                mean_dir[i] += rk * dk[i];
            }
        }
        let dot: f64 = mean_dir.iter().zip(v).map(|(a, b)| a * b).sum();
        Ok((0..x.len()).map(|i| v[i] + s2 * (hv[i] - mean_dir[i] * dot)).collect())
    }
}
