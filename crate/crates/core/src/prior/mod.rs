//! Unconditional score models.
//!
//! Priors are selected by `kind` from a key-value file:
//!
//! ```text
//! kind = ar1        # white | ar1 | gmm
//! rho = 0.9
//! variance = 0.01
//! # gmm only, repeated: weight, variance, mean...
//! component = 0.5, 0.2, -1.0
//! # any kind: hide the vector-Jacobian product
//! vjp = false
//! ```

mod gaussian;
mod gmm;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::Path;
use std::sync::{Arc, OnceLock};

pub use gaussian::{GaussianProcessPrior, MAX_LEN};
pub use gmm::{GmmComponent, GmmPrior};

use crate::config::KeyValues;
use crate::error::{Error, Result};

/// Score of the σ-smoothed prior `∇ log p(x̃; σ)`.
pub trait PriorScore: Send + Sync + Debug {
    fn name(&self) -> &str;

    fn score(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>>;

    /// Whether [`PriorScore::vjp`] is available.
    fn has_vjp(&self) -> bool {
        false
    }

    /// `vᵀ ∇(x̃ + σ² score(x̃, σ))`.
    fn vjp(&self, _x: &[f64], _sigma: f64, _v: &[f64]) -> Result<Vec<f64>> {
        Err(Error::Capability(format!("prior `{}` does not provide a vector-Jacobian product", self.name())))
    }

    /// False if calls must not overlap; the sampler then runs seeds serially.
    fn is_concurrent(&self) -> bool {
        true
    }
}

/// Wraps a prior and hides its vector-Jacobian product, standing in for
/// score models that only expose the score.
#[derive(Debug)]
pub struct ScoreOnly(pub Arc<dyn PriorScore>);

impl PriorScore for ScoreOnly {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn score(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.0.score(x, sigma)
    }

    fn is_concurrent(&self) -> bool {
        self.0.is_concurrent()
    }
}

pub type PriorFactory = fn(&KeyValues) -> Result<Arc<dyn PriorScore>>;

/// Name to constructor map for prior kinds.
#[derive(Debug, Clone, Default)]
pub struct PriorRegistry {
    factories: BTreeMap<String, PriorFactory>,
}

impl PriorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("white", build_white);
        r.register("ar1", build_ar1);
        r.register("gmm", build_gmm);
        r
    }

    /// Process-wide registry of the built-in kinds.
    pub fn global() -> &'static PriorRegistry {
        static REGISTRY: OnceLock<PriorRegistry> = OnceLock::new();
        REGISTRY.get_or_init(Self::with_builtin)
    }

    pub fn register(&mut self, kind: &str, factory: PriorFactory) {
        self.factories.insert(kind.to_string(), factory);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, cfg: &KeyValues) -> Result<Arc<dyn PriorScore>> {
        let kind = cfg.require("kind")?;
        let factory = self.factories.get(kind.value.as_str()).ok_or_else(|| {
            kind.error(format!(
                "unknown prior kind {:?} (known: {})",
                kind.value,
                self.kinds().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let prior = factory(cfg)?;
        match cfg.get("vjp") {
            Some(e) if !e.parse::<bool>()? => Ok(Arc::new(ScoreOnly(prior))),
            _ => Ok(prior),
        }
    }
}

pub fn parse_prior(text: &str) -> Result<Arc<dyn PriorScore>> {
    PriorRegistry::global().build(&KeyValues::parse(text)?)
}

pub fn load_prior(path: impl AsRef<Path>) -> Result<Arc<dyn PriorScore>> {
    PriorRegistry::global().build(&KeyValues::read(path)?)
}

fn positive(cfg: &KeyValues, key: &str) -> Result<f64> {
    let e = cfg.require(key)?;
    let v: f64 = e.parse()?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(e.error("must be positive"))
    }
}

fn build_white(cfg: &KeyValues) -> Result<Arc<dyn PriorScore>> {
    cfg.check_keys(&["kind", "variance", "vjp"])?;
    Ok(Arc::new(GaussianProcessPrior::white(positive(cfg, "variance")?)?))
}

fn build_ar1(cfg: &KeyValues) -> Result<Arc<dyn PriorScore>> {
    cfg.check_keys(&["kind", "rho", "variance", "vjp"])?;
    let rho_entry = cfg.require("rho")?;
    let rho: f64 = rho_entry.parse()?;
    GaussianProcessPrior::new(rho, positive(cfg, "variance")?)
        .map(|p| Arc::new(p) as Arc<dyn PriorScore>)
        .map_err(|e| rho_entry.error(e))
}

fn build_gmm(cfg: &KeyValues) -> Result<Arc<dyn PriorScore>> {
    cfg.check_keys(&["kind", "component", "vjp"])?;
    let mut components = Vec::new();
    let mut last = None;
    for e in cfg.all("component") {
        let v: Vec<f64> = e.list()?;
        if v.len() < 3 {
            return Err(e.error("expected `weight, variance, mean...`"));
        }
        components.push(GmmComponent { weight: v[0], variance: v[1], mean: v[2..].to_vec() });
        last = Some(e);
    }
    let Some(last) = last else {
        return Err(Error::Config { line: 0, reason: "gmm prior needs at least one `component`".into() });
    };
    Ok(Arc::new(GmmPrior::new(components).map_err(|e| last.error(e))?))
}
