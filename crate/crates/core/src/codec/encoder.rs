use std::sync::Arc;

use super::bitstream::{frame_bits, Bitstream, FrameContext, StreamHeader};
use super::measurement::Measurement;
use super::quant::{band_energy, line_stepsize, quantize_envelope, quantize_line, ALLOC_MAX, ALLOC_MIN};
use crate::error::{Error, Result};
use crate::transform::{default_band_layout, AudioSignal, BandLayout, Mdct, MdctSpectrum, SAMPLE_RATE, STRIDE};

/// Outcome of the allocation search for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateDecision {
    pub alloc: i32,
    pub overflow: bool,
    pub bins: Vec<i32>,
    /// Coded size of the frame in bits, alignment included.
    pub bits: usize,
}

/// Quantizes every line of a frame at allocation level `alloc`.
pub fn quantize_frame(frame: &[f64], layout: &BandLayout, env: &[i32], alloc: i32) -> Vec<i32> {
    let mut bins = Vec::with_capacity(frame.len());
    for b in 0..layout.num_bands() {
        let delta = line_stepsize(alloc, env[b]);
        bins.extend(frame[layout.range(b)].iter().map(|&u| quantize_line(u, delta)));
    }
    bins
}

/// Finest allocation level whose coded frame fits in `budget_bits`. Levels
/// are scanned exhaustively from `ALLOC_MIN`; if none fits, the coarsest level
/// is used and the overflow flag is raised.
pub fn rate_loop(
    frame: &[f64],
    layout: &BandLayout,
    env: &[i32],
    ctx: FrameContext,
    budget_bits: i64,
) -> RateDecision {
    for alloc in ALLOC_MIN..=ALLOC_MAX {
        let bins = quantize_frame(frame, layout, env, alloc);
        let bits = frame_bits(ctx, alloc, env, &bins);
        if bits as i64 <= budget_bits {
            return RateDecision { alloc, overflow: false, bins, bits };
        }
    }
    let bins = quantize_frame(frame, layout, env, ALLOC_MAX);
    let bits = frame_bits(ctx, ALLOC_MAX, env, &bins);
    RateDecision { alloc: ALLOC_MAX, overflow: true, bins, bits }
}

/// Encoder output: the stream, its serialization, and the analysed spectrum.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub stream: Bitstream,
    pub bytes: Vec<u8>,
    /// Spectrum of the padded input the measurement was taken from.
    pub spectrum: MdctSpectrum,
    pub input_samples: usize,
}

impl Encoded {
    pub fn measurement(&self) -> &Measurement {
        &self.stream.measurement
    }

    /// Stream size over the duration of the original input, in kb/s.
    pub fn realized_kbps(&self) -> f64 {
        let secs = self.input_samples as f64 / SAMPLE_RATE as f64;
        self.bytes.len() as f64 * 8.0 / secs / 1000.0
    }

    pub fn overflow_frames(&self) -> usize {
        self.stream.measurement.overflow_flags().iter().filter(|&&f| f).count()
    }
}

pub fn encode(signal: &AudioSignal, bitrate_kbps: f64) -> Result<Encoded> {
    encode_with_layout(signal, bitrate_kbps, default_band_layout())
}

/// Encodes with a bit reservoir: the allowance through frame `m` is the
/// pro-rata share `(m+1)/M` of the whole-stream budget minus the bits already
/// spent (header included).
pub fn encode_with_layout(signal: &AudioSignal, bitrate_kbps: f64, layout: Arc<BandLayout>) -> Result<Encoded> {
    if signal.sample_rate() != SAMPLE_RATE {
        return Err(Error::UnsupportedSampleRate(signal.sample_rate()));
    }
    if signal.is_empty() {
        return Err(Error::invalid("cannot encode an empty signal"));
    }
    if !(bitrate_kbps > 0.0) || bitrate_kbps * 10.0 > u16::MAX as f64 {
        return Err(Error::invalid(format!("unsupported bitrate {bitrate_kbps} kb/s")));
    }
    let padded = signal.padded(STRIDE, 1, 1);
    let mut coeffs = vec![0.0; padded.len()];
    Mdct::standard().forward(padded.samples(), &mut coeffs);
    let spectrum = MdctSpectrum::new(STRIDE, coeffs, layout.clone())?;
    let frames = spectrum.frames();
    let bands = layout.num_bands();

    let mut env = Vec::with_capacity(frames * bands);
    for m in 0..frames {
        for b in 0..bands {
            env.push(quantize_envelope(band_energy(spectrum.band(m, b)))?);
        }
    }

    let header = StreamHeader {
        sample_rate: SAMPLE_RATE,
        stride: STRIDE as u16,
        frames: frames as u32,
        layout_id: layout.id().to_string(),
        bitrate_tenths: (bitrate_kbps * 10.0).round() as u16,
    };
    let total_budget = (bitrate_kbps * 1000.0 * signal.len() as f64 / SAMPLE_RATE as f64).floor() as i64;
    let mut used = header.bit_len() as i64;
    let mut alloc = Vec::with_capacity(frames);
    let mut overflow = Vec::with_capacity(frames);
    let mut bins = Vec::with_capacity(frames * STRIDE);
    let mut ctx = FrameContext::default();
    for m in 0..frames {
        let allowance = total_budget * (m as i64 + 1) / frames as i64 - used;
        let env_row = &env[m * bands..(m + 1) * bands];
        let decision = rate_loop(spectrum.frame(m), &layout, env_row, ctx, allowance);
        used += decision.bits as i64;
        alloc.push(decision.alloc);
        overflow.push(decision.overflow);
        bins.extend_from_slice(&decision.bins);
        ctx = FrameContext { prev_alloc: decision.alloc, prev_env0: env_row[0] };
    }
    if overflow.iter().any(|&f| f) {
        log::debug!("{} of {frames} frames exceeded their bit allowance", overflow.iter().filter(|&&f| f).count());
    }
    let measurement = Measurement::new(layout, alloc, overflow, env, bins)?;
    let stream = Bitstream { header, measurement };
    let bytes = stream.to_bytes();
    debug_assert_eq!(bytes.len() as i64 * 8, used);
    Ok(Encoded { stream, bytes, spectrum, input_samples: signal.len() })
}
