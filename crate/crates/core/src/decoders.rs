//! Decoders selectable by name.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use crate::codec::{decode_measurement, Bitstream};
use crate::conditioning::{CodecConditioner, ConditioningConfig, SampleBinConditioner};
use crate::error::{Error, Result};
use crate::prior::PriorScore;
use crate::sampler::{langevin_sample, NoiseSchedule};
use crate::transform::AudioSignal;

pub trait Decoder: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn decode(&self, stream: &Bitstream, seed: u64) -> Result<AudioSignal>;
}

/// Shared inputs for constructing decoders.
#[derive(Debug, Clone)]
pub struct DecoderContext {
    pub prior: Option<Arc<dyn PriorScore>>,
    pub conditioning: ConditioningConfig,
    pub schedule: NoiseSchedule,
}

impl Default for DecoderContext {
    fn default() -> Self {
        Self { prior: None, conditioning: ConditioningConfig::default(), schedule: NoiseSchedule::standard() }
    }
}

impl DecoderContext {
    fn require_prior(&self, decoder: &str) -> Result<Arc<dyn PriorScore>> {
        self.prior.clone().ok_or_else(|| Error::invalid(format!("decoder `{decoder}` requires a prior")))
    }
}

/// Legacy midpoint decoder, with or without noise fill.
#[derive(Debug, Clone)]
pub struct LegacyDecoder {
    pub noise_fill: bool,
}

impl Decoder for LegacyDecoder {
    fn name(&self) -> &str {
        if self.noise_fill {
            "dec"
        } else {
            "dec-nofill"
        }
    }

    fn decode(&self, stream: &Bitstream, seed: u64) -> Result<AudioSignal> {
        decode_measurement(&stream.measurement, self.noise_fill, seed)
    }
}

/// Posterior sampling conditioned on the stream's measurement.
#[derive(Debug, Clone)]
pub struct InverseDecoder {
    pub prior: Arc<dyn PriorScore>,
    pub conditioning: ConditioningConfig,
    pub schedule: NoiseSchedule,
}

impl Decoder for InverseDecoder {
    fn name(&self) -> &str {
        "inv"
    }

    fn decode(&self, stream: &Bitstream, seed: u64) -> Result<AudioSignal> {
        let cond = CodecConditioner::new(Arc::new(stream.measurement.clone()), self.conditioning)?;
        AudioSignal::from_samples(langevin_sample(&cond, &*self.prior, &self.schedule, seed)?)
    }
}

/// Unconditional prior samples of the stream's length (baseline).
#[derive(Debug, Clone)]
pub struct PriorSampleDecoder {
    pub prior: Arc<dyn PriorScore>,
    pub schedule: NoiseSchedule,
}

impl Decoder for PriorSampleDecoder {
    fn name(&self) -> &str {
        "prior"
    }

    fn decode(&self, stream: &Bitstream, seed: u64) -> Result<AudioSignal> {
        let cond = SampleBinConditioner::unconditional(stream.measurement.num_samples());
        AudioSignal::from_samples(langevin_sample(&cond, &*self.prior, &self.schedule, seed)?)
    }
}

pub type DecoderFactory = fn(&DecoderContext) -> Result<Arc<dyn Decoder>>;

#[derive(Debug, Clone, Default)]
pub struct DecoderRegistry {
    factories: BTreeMap<String, DecoderFactory>,
}

impl DecoderRegistry {
    pub fn with_builtin() -> Self {
        let mut r = Self::default();
        r.register("dec", |_| Ok(Arc::new(LegacyDecoder { noise_fill: true })));
        r.register("dec-nofill", |_| Ok(Arc::new(LegacyDecoder { noise_fill: false })));
        r.register("inv", |ctx| {
            Ok(Arc::new(InverseDecoder {
                prior: ctx.require_prior("inv")?,
                conditioning: ctx.conditioning,
                schedule: ctx.schedule.clone(),
            }))
        });
        r.register("prior", |ctx| {
            Ok(Arc::new(PriorSampleDecoder { prior: ctx.require_prior("prior")?, schedule: ctx.schedule.clone() }))
        });
        r
    }

    pub fn global() -> &'static DecoderRegistry {
        static REGISTRY: OnceLock<DecoderRegistry> = OnceLock::new();
        REGISTRY.get_or_init(Self::with_builtin)
    }

    pub fn register(&mut self, name: &str, factory: DecoderFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, ctx: &DecoderContext) -> Result<Arc<dyn Decoder>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::invalid(format!(
                "unknown decoder {name:?} (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(ctx)
    }
}
