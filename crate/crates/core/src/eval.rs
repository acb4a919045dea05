//! Objective metrics and the bitrate × decoder experiment matrix.
//!
//! Matrix configs use the shared `key = value` format:
//!
//! ```text
//! bitrates = 8, 16
//! decoders = dec, dec-nofill, inv
//! seeds = 0..4                  # or an explicit list
//! clip = ar1 secs=0.25 rho=0.9 var=0.01 seed=1
//! clip = wav path=clips/a.wav   # relative to the config file
//! prior = ar1.prior             # or inline: prior.kind = ar1, prior.rho = ...
//! steps = 1500
//! eps = 0.5
//! sigma2_start = 0
//! sigma2_end = -90
//! mean = noisy                  # noisy | tweedie
//! cov = noisy                   # noisy | pgdm
//! clamp = 5                     # or `off`
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::codec::{encode, envelope, Encoded};
use crate::conditioning::{ConditioningConfig, CovarianceModel, MeanModel};
use crate::config::{Entry, KeyValues};
use crate::decoders::{Decoder, DecoderContext, DecoderRegistry};
use crate::error::{Error, Result};
use crate::prior::{PriorRegistry, PriorScore};
use crate::sampler::{consistency_rate, NoiseSchedule, DEFAULT_EPS, DEFAULT_SIGMA2_END_DB, DEFAULT_SIGMA2_START_DB, DEFAULT_STEPS};
use crate::synth;
use crate::transform::{mdct_analyze, AudioSignal};

/// Reported SNR when the test signal equals the reference.
pub const SNR_CAP_DB: f64 = 200.0;
/// Envelope floor applied on both sides of the log-spectral distance.
pub const LSD_FLOOR_DB: f64 = -96.0;

pub const CSV_HEADER: [&str; 5] = ["cell", "metric", "mean", "stderr", "seeds"];

fn check_lengths(reference: &[f64], test: &[f64]) -> Result<()> {
    if reference.len() != test.len() {
        return Err(Error::invalid(format!("length mismatch: reference {}, test {}", reference.len(), test.len())));
    }
    Ok(())
}

/// `10 log10(‖ref‖² / ‖ref − test‖²)`, capped at [`SNR_CAP_DB`].
pub fn snr(reference: &[f64], test: &[f64]) -> Result<f64> {
    check_lengths(reference, test)?;
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedMetric("SNR of an all-zero reference".into()));
    }
    let noise: f64 = reference.iter().zip(test).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

/// RMS over frames and bands of the envelope ratio in dB, both envelopes
/// floored at [`LSD_FLOOR_DB`].
pub fn band_lsd(reference: &[f64], test: &[f64]) -> Result<f64> {
    check_lengths(reference, test)?;
    let er = envelope(&mdct_analyze(&AudioSignal::from_samples(reference.to_vec())?)?);
    let et = envelope(&mdct_analyze(&AudioSignal::from_samples(test.to_vec())?)?);
    let floor = 10f64.powf(LSD_FLOOR_DB / 10.0);
    let sum: f64 = er
        .iter()
        .zip(&et)
        .map(|(a, b)| (10.0 * (a.max(floor) / b.max(floor)).log10()).powi(2))
        .sum();
    Ok((sum / er.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub snr_db: f64,
    pub band_lsd_db: f64,
    pub consistency: f64,
    pub bitrate_kbps: f64,
}

impl MetricReport {
    pub const NAMES: [&'static str; 4] = ["snr_db", "band_lsd_db", "consistency", "bitrate_kbps"];

    pub fn values(&self) -> [f64; 4] {
        [self.snr_db, self.band_lsd_db, self.consistency, self.bitrate_kbps]
    }
}

/// Metrics of `decoded` against the encoder input. The decoded signal may be
/// longer than the input (whole frames); SNR and LSD use the common prefix.
pub fn evaluate(reference: &AudioSignal, encoded: &Encoded, decoded: &AudioSignal) -> Result<MetricReport> {
    let n = reference.len();
    if decoded.len() < n {
        return Err(Error::invalid(format!("decoded signal has {} samples, input {n}", decoded.len())));
    }
    let head = &decoded.samples()[..n];
    Ok(MetricReport {
        snr_db: snr(reference.samples(), head)?,
        band_lsd_db: band_lsd(reference.samples(), head)?,
        consistency: consistency_rate(decoded.samples(), encoded.measurement())?.overall,
        bitrate_kbps: encoded.realized_kbps(),
    })
}

/// Source of one test clip.
#[derive(Debug, Clone, PartialEq)]
pub enum ClipSpec {
    Ar1 { secs: f64, rho: f64, var: f64, seed: u64 },
    Speech { secs: f64, seed: u64 },
    Noise { secs: f64, std: f64, seed: u64 },
    Sine { secs: f64, freq: f64, amp: f64 },
    Wav(PathBuf),
}

impl ClipSpec {
    /// Parses `kind key=value ...`; WAV paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> std::result::Result<Self, String> {
        let mut parts = text.split_whitespace();
        let kind = parts.next().ok_or("empty clip spec")?;
        let mut fields = Vec::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected `key=value`, got {p:?}"))?;
            fields.push((k, v));
        }
        let allowed: &[&str] = match kind {
            "ar1" => &["secs", "rho", "var", "seed"],
            "speech" => &["secs", "seed"],
            "noise" => &["secs", "std", "seed"],
            "sine" => &["secs", "freq", "amp"],
            "wav" => &["path"],
            _ => return Err(format!("unknown clip kind {kind:?} (ar1 | speech | noise | sine | wav)")),
        };
        if let Some((k, _)) = fields.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(format!("unknown clip field {k:?} for {kind}"));
        }
        let raw = |key: &str| fields.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str, default: Option<f64>| -> std::result::Result<f64, String> {
            match raw(key) {
                Some(v) => v.parse().map_err(|e| format!("{key}: {e}")),
                None => default.ok_or_else(|| format!("missing clip field `{key}`")),
            }
        };
        let seed = || -> std::result::Result<u64, String> {
            raw("seed").map_or(Ok(0), |v| v.parse().map_err(|e| format!("seed: {e}")))
        };
        let spec = match kind {
            "ar1" => ClipSpec::Ar1 { secs: num("secs", None)?, rho: num("rho", Some(0.9))?, var: num("var", Some(0.01))?, seed: seed()? },
            "speech" => ClipSpec::Speech { secs: num("secs", None)?, seed: seed()? },
            "noise" => ClipSpec::Noise { secs: num("secs", None)?, std: num("std", Some(0.1))?, seed: seed()? },
            "sine" => ClipSpec::Sine { secs: num("secs", None)?, freq: num("freq", Some(440.0))?, amp: num("amp", Some(0.3))? },
            _ => {
                let path = PathBuf::from(raw("path").ok_or("missing clip field `path`")?);
                ClipSpec::Wav(match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path,
                })
            }
        };
        match spec {
            ClipSpec::Ar1 { secs, .. } | ClipSpec::Speech { secs, .. } | ClipSpec::Noise { secs, .. } | ClipSpec::Sine { secs, .. }
                if !(secs > 0.0 && secs.is_finite()) =>
            {
                Err(format!("clip duration must be positive, got {secs}"))
            }
            ClipSpec::Ar1 { rho, var, .. } if !(rho.abs() < 1.0 && var > 0.0) => {
                Err("ar1 clip needs |rho| < 1 and var > 0".into())
            }
            s => Ok(s),
        }
    }

    pub fn load(&self) -> Result<AudioSignal> {
        Ok(match *self {
            ClipSpec::Ar1 { secs, rho, var, seed } => synth::ar1(synth::samples_for(secs), rho, var, seed),
            ClipSpec::Speech { secs, seed } => synth::speech_like(synth::samples_for(secs), seed),
            ClipSpec::Noise { secs, std, seed } => synth::white_noise(synth::samples_for(secs), std, seed),
            ClipSpec::Sine { secs, freq, amp } => synth::sine(freq, synth::samples_for(secs), amp),
            ClipSpec::Wav(ref path) => AudioSignal::read_wav(path)?,
        })
    }
}

/// A parsed and validated experiment matrix.
#[derive(Debug, Clone)]
pub struct MatrixConfig {
    pub bitrates: Vec<f64>,
    pub decoders: Vec<Arc<dyn Decoder>>,
    pub seeds: Vec<u64>,
    pub clips: Vec<ClipSpec>,
    pub context: DecoderContext,
}

const MATRIX_KEYS: [&str; 12] = [
    "bitrates", "decoders", "seeds", "clip", "prior", "steps", "eps", "sigma2_start", "sigma2_end", "mean", "cov", "clamp",
];

fn parse_seeds(e: &Entry) -> Result<Vec<u64>> {
    match e.value.split_once("..") {
        Some((a, b)) => {
            let lo: u64 = a.trim().parse().map_err(|err| e.error(format!("bad range start: {err}")))?;
            let hi: u64 = b.trim().parse().map_err(|err| e.error(format!("bad range end: {err}")))?;
            Ok((lo..hi).collect())
        }
        None => e.list(),
    }
}

impl MatrixConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Parses a matrix; relative paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        if let Some(e) = kv.entries().iter().find(|e| !MATRIX_KEYS.contains(&e.key.as_str()) && !e.key.starts_with("prior.")) {
            return Err(e.error("unknown key"));
        }
        let resolve = |p: &str| match base {
            Some(b) if Path::new(p).is_relative() => b.join(p),
            _ => PathBuf::from(p),
        };

        let bitrates: Vec<f64> = kv.get("bitrates").map_or(Ok(Vec::new()), |e| e.list())?;
        if let Some(e) = kv.get("bitrates") {
            if bitrates.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                return Err(e.error("bitrates must be positive"));
            }
        }
        let seeds = kv.get("seeds").map_or(Ok(Vec::new()), parse_seeds)?;
        let clips = kv
            .all("clip")
            .map(|e| ClipSpec::parse(&e.value, base).map_err(|m| e.error(m)))
            .collect::<Result<Vec<_>>>()?;

        let inline = kv.strip_prefix("prior.");
        let prior: Option<Arc<dyn PriorScore>> = match (kv.get("prior"), inline.is_empty()) {
            (Some(e), true) => {
                let sub = KeyValues::read(resolve(&e.value)).map_err(|err| e.error(format!("cannot load prior: {err}")))?;
                Some(PriorRegistry::global().build(&sub).map_err(|err| e.error(format!("in {}: {err}", e.value)))?)
            }
            (Some(e), false) => return Err(e.error("give either `prior` or inline `prior.*` keys, not both")),
            (None, false) => Some(PriorRegistry::global().build(&inline)?),
            (None, true) => None,
        };

        let num = |key: &str, default: f64| -> Result<f64> { kv.get(key).map_or(Ok(default), |e| e.parse()) };
        let steps: usize = kv.get("steps").map_or(Ok(DEFAULT_STEPS), |e| e.parse())?;
        let schedule = NoiseSchedule::new(
            steps,
            num("sigma2_start", DEFAULT_SIGMA2_START_DB)?,
            num("sigma2_end", DEFAULT_SIGMA2_END_DB)?,
            num("eps", DEFAULT_EPS)?,
        )
        .map_err(|err| {
            let line = ["steps", "sigma2_start", "sigma2_end", "eps"].iter().filter_map(|k| kv.get(k)).map(|e| e.line).max();
            Error::Config { line: line.unwrap_or(0), reason: format!("schedule: {err}") }
        })?;

        let mut conditioning = ConditioningConfig::default();
        if let Some(e) = kv.get("mean") {
            conditioning.mean_model = e.parse::<MeanModel>()?;
        }
        if let Some(e) = kv.get("cov") {
            conditioning.covariance_model = e.parse::<CovarianceModel>()?;
        }
        if let Some(e) = kv.get("clamp") {
            conditioning.clamp = if e.value == "off" { None } else { Some(e.parse()?) };
            conditioning.validate().map_err(|err| e.error(err))?;
        }

        let context = DecoderContext { prior, conditioning, schedule };
        let mut decoders = Vec::new();
        if let Some(e) = kv.get("decoders") {
            for name in e.list::<String>()? {
                decoders.push(DecoderRegistry::global().build(&name, &context).map_err(|err| e.error(err))?);
            }
        }
        Ok(Self { bitrates, decoders, seeds, clips, context })
    }

    fn concurrent(&self) -> bool {
        self.context.prior.as_ref().is_none_or(|p| p.is_concurrent())
    }
}

fn cell_id(decoder: &str, bitrate: f64) -> String {
    format!("{decoder}@{bitrate}")
}

/// Mean and standard error of one metric over the successful runs of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }
}

/// Runs of one `(decoder, bitrate)` cell over every clip and seed.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: String,
    pub decoder: String,
    pub bitrate: f64,
    pub runs: Vec<MetricReport>,
    /// `(clip index, seed, message)` for each failed run.
    pub failures: Vec<(usize, u64, String)>,
}

impl Cell {
    pub fn stat(&self, metric: usize) -> Stat {
        Stat::of(&self.runs.iter().map(|r| r.values()[metric]).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatrixReport {
    pub cells: Vec<Cell>,
}

impl MatrixReport {
    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn failure_count(&self) -> usize {
        self.cells.iter().map(|c| c.failures.len()).sum()
    }

    /// One row per cell and metric; cells with failed runs add a `failures` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for cell in &self.cells {
            for (i, name) in MetricReport::NAMES.iter().enumerate() {
                let s = cell.stat(i);
                w.write_record([cell.id.clone(), name.to_string(), s.mean.to_string(), s.stderr.to_string(), s.n.to_string()])
                    .map_err(csv_err)?;
            }
            if !cell.failures.is_empty() {
                let total = cell.failures.len() + cell.runs.len();
                w.write_record([cell.id.clone(), "failures".into(), cell.failures.len().to_string(), "0".into(), total.to_string()])
                    .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn maybe_par<T: Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Encodes every clip at every bitrate, decodes with every decoder and seed,
/// and aggregates the metrics per `(decoder, bitrate)` cell. Failed runs are
/// recorded in their cell; the remaining runs proceed.
pub fn run_matrix(cfg: &MatrixConfig) -> MatrixReport {
    if cfg.bitrates.is_empty() || cfg.decoders.is_empty() || cfg.seeds.is_empty() || cfg.clips.is_empty() {
        return MatrixReport::default();
    }
    let parallel = cfg.concurrent();
    let clips: Vec<std::result::Result<AudioSignal, String>> =
        cfg.clips.iter().map(|c| c.load().map_err(|e| e.to_string())).collect();
    let pairs: Vec<(usize, usize)> =
        (0..cfg.clips.len()).flat_map(|c| (0..cfg.bitrates.len()).map(move |b| (c, b))).collect();
    let encoded: Vec<std::result::Result<Encoded, String>> = maybe_par(&pairs, parallel, |&(c, b)| {
        let clip = clips[c].as_ref().map_err(Clone::clone)?;
        encode(clip, cfg.bitrates[b]).map_err(|e| e.to_string())
    });

    let jobs: Vec<(usize, usize, usize, u64)> = (0..cfg.bitrates.len())
        .flat_map(|b| {
            (0..cfg.decoders.len()).flat_map(move |d| {
                (0..cfg.clips.len()).flat_map(move |c| cfg.seeds.iter().map(move |&s| (b, d, c, s)))
            })
        })
        .collect();
    let results = maybe_par(&jobs, parallel, |&(b, d, c, seed)| {
        let enc = encoded[c * cfg.bitrates.len() + b].as_ref().map_err(Clone::clone)?;
        let clip = clips[c].as_ref().map_err(Clone::clone)?;
        let decoded = cfg.decoders[d].decode(&enc.stream, seed).map_err(|e| e.to_string())?;
        evaluate(clip, enc, &decoded).map_err(|e| e.to_string())
    });

    let mut cells: Vec<Cell> = Vec::new();
    for (&(b, d, c, seed), result) in jobs.iter().zip(results) {
        let name = cfg.decoders[d].name();
        let id = cell_id(name, cfg.bitrates[b]);
        if cells.last().is_none_or(|cell| cell.id != id) {
            cells.push(Cell { id, decoder: name.to_string(), bitrate: cfg.bitrates[b], runs: Vec::new(), failures: Vec::new() });
        }
        let cell = cells.last_mut().expect("cell pushed above");
        match result {
            Ok(r) => cell.runs.push(r),
            Err(msg) => {
                log::warn!("{} clip {c} seed {seed}: {msg}", cell.id);
                cell.failures.push((c, seed, msg));
            }
        }
    }
    MatrixReport { cells }
}
