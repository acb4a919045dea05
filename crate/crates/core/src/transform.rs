//! Orthonormal MDCT analysis/synthesis and the band layout used for envelopes.
//!
//! Frames are laid out circularly over a signal whose length is a multiple of
//! the stride `L`: frame `m` windows samples `[mL, mL + 2L)` modulo the signal
//! length. With a sine window and `sqrt(2/L)` scaling this makes the transform
//! a square orthogonal matrix, so synthesis is both the inverse and the adjoint
//! of analysis. The encoder appends one frame of zeros before analysis so that
//! the wrap-around frame only ever sees silence.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Stride (number of new samples and coefficients per frame).
pub const STRIDE: usize = 440;
/// The only sample rate the codec operates at.
pub const SAMPLE_RATE: u32 = 22050;

/// Mono audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// A 22050 Hz signal.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, SAMPLE_RATE)
    }

    pub fn zeros(len: usize) -> Self {
        Self { samples: vec![0.0; len], sample_rate: SAMPLE_RATE }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    /// Zero-pads to the next multiple of `stride`, with at least `min_frames`
    /// frames, and then appends `guard_frames` further frames of zeros.
    pub fn padded(&self, stride: usize, min_frames: usize, guard_frames: usize) -> AudioSignal {
        let frames = self.samples.len().div_ceil(stride).max(min_frames) + guard_frames;
        let mut samples = self.samples.clone();
        samples.resize(frames * stride, 0.0);
        AudioSignal { samples, sample_rate: self.sample_rate }
    }

    /// Reads a 16-bit PCM mono WAV file.
    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = hound::WavReader::open(path)?;
        let spec = reader.spec();
        if spec.channels != 1 {
            return Err(Error::invalid(format!("expected mono input, got {} channels", spec.channels)));
        }
        if spec.sample_rate != SAMPLE_RATE {
            return Err(Error::UnsupportedSampleRate(spec.sample_rate));
        }
        if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
            return Err(Error::invalid("expected 16-bit integer PCM"));
        }
        let samples = reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(samples, spec.sample_rate)
    }

    /// Writes 16-bit PCM mono; samples outside [-1, 1) are clipped.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(path, spec)?;
        for &s in &self.samples {
            let v = (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            writer.write_sample(v)?;
        }
        writer.finalize()?;
        Ok(())
    }
}

/// Non-uniform partition of the `L` lines of a frame into bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandLayout {
    id: String,
    edges: Vec<usize>,
}

/// Edges of the canonical 24-band layout, versioned as `ipsc-v1-b24`.
const EDGES_V1_B24: [usize; 25] = [
    0, 4, 8, 13, 19, 25, 32, 40, 49, 59, 70, 82, 96, 111, 128, 146, 167, 190, 215, 243, 274, 309,
    348, 392, 440,
];

pub const DEFAULT_LAYOUT_ID: &str = "ipsc-v1-b24";

impl BandLayout {
    pub fn new(id: impl Into<String>, edges: Vec<usize>) -> Result<Self> {
        if edges.len() < 2 || edges[0] != 0 {
            return Err(Error::invalid("band edges must start at 0 and define at least one band"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("band edges must be strictly increasing"));
        }
        Ok(Self { id: id.into(), edges })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn num_bands(&self) -> usize {
        self.edges.len() - 1
    }

    /// Number of lines covered, i.e. the stride this layout partitions.
    pub fn num_lines(&self) -> usize {
        *self.edges.last().unwrap()
    }

    pub fn width(&self, band: usize) -> usize {
        self.edges[band + 1] - self.edges[band]
    }

    pub fn widths(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    pub fn range(&self, band: usize) -> std::ops::Range<usize> {
        self.edges[band]..self.edges[band + 1]
    }

    /// Looks up a layout by its id.
    pub fn by_id(id: &str) -> Option<Arc<BandLayout>> {
        (id == DEFAULT_LAYOUT_ID).then(default_band_layout)
    }
}

/// The canonical B = 24 layout over L = 440 lines.
pub fn default_band_layout() -> Arc<BandLayout> {
    static LAYOUT: OnceLock<Arc<BandLayout>> = OnceLock::new();
    LAYOUT
        .get_or_init(|| {
            Arc::new(BandLayout::new(DEFAULT_LAYOUT_ID, EDGES_V1_B24.to_vec()).expect("valid table"))
        })
        .clone()
}

/// Frames × L matrix of MDCT coefficients, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct MdctSpectrum {
    stride: usize,
    coeffs: Vec<f64>,
    layout: Arc<BandLayout>,
}

impl MdctSpectrum {
    pub fn new(stride: usize, coeffs: Vec<f64>, layout: Arc<BandLayout>) -> Result<Self> {
        if stride == 0 || !coeffs.len().is_multiple_of(stride) {
            return Err(Error::invalid(format!(
                "coefficient count {} is not a multiple of the frame width {stride}",
                coeffs.len()
            )));
        }
        if layout.num_lines() != stride {
            return Err(Error::invalid(format!(
                "layout covers {} lines but frames have {stride}",
                layout.num_lines()
            )));
        }
        Ok(Self { stride, coeffs, layout })
    }

    pub fn zeros(frames: usize, layout: Arc<BandLayout>) -> Self {
        let stride = layout.num_lines();
        Self { stride, coeffs: vec![0.0; frames * stride], layout }
    }

    pub fn frames(&self) -> usize {
        self.coeffs.len() / self.stride
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn layout(&self) -> &Arc<BandLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn frame(&self, m: usize) -> &[f64] {
        &self.coeffs[m * self.stride..(m + 1) * self.stride]
    }

    pub fn frame_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.coeffs[m * self.stride..(m + 1) * self.stride]
    }

    pub fn band(&self, m: usize, b: usize) -> &[f64] {
        &self.frame(m)[self.layout.range(b)]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Orthonormal sine-window MDCT of stride `L` (`L` even), computed through a
/// DCT-IV on `L/2` point complex FFTs.
pub struct Mdct {
    stride: usize,
    window: Vec<f64>,
    pre_twiddle: Vec<Complex<f64>>,
    post_twiddle: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Mdct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mdct").field("stride", &self.stride).finish()
    }
}

impl Mdct {
    pub fn new(stride: usize) -> Result<Self> {
        if stride < 2 || !stride.is_multiple_of(2) {
            return Err(Error::invalid(format!("MDCT stride must be even and >= 2, got {stride}")));
        }
        let n = stride;
        let half = n / 2;
        let window = (0..2 * n).map(|t| (PI * (t as f64 + 0.5) / (2 * n) as f64).sin()).collect();
        let pre_twiddle =
            (0..half).map(|i| Complex::from_polar(1.0, -PI * (i as f64 + 0.25) / n as f64)).collect();
        let post_twiddle =
            (0..half).map(|k| Complex::from_polar(1.0, -PI * k as f64 / n as f64)).collect();
        let fft = FftPlanner::new().plan_fft_forward(half);
        Ok(Self { stride, window, pre_twiddle, post_twiddle, fft })
    }

    /// Shared engine for the codec stride.
    pub fn standard() -> &'static Mdct {
        static ENGINE: OnceLock<Mdct> = OnceLock::new();
        ENGINE.get_or_init(|| Mdct::new(STRIDE).expect("valid stride"))
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Unnormalised DCT-IV, `out[k] = sum_n x[n] cos(pi/L (n+1/2)(k+1/2))`.
    fn dct4(&self, x: &[f64], out: &mut [f64], buf: &mut [Complex<f64>]) {
        let n = self.stride;
        let half = n / 2;
        for i in 0..half {
            buf[i] = Complex::new(x[2 * i], x[n - 1 - 2 * i]) * self.pre_twiddle[i];
        }
        self.fft.process(&mut buf[..half]);
        for k in 0..half {
            let y = buf[k] * self.post_twiddle[k];
            out[2 * k] = y.re;
            out[n - 1 - 2 * k] = -y.im;
        }
    }

    /// Forward transform of `samples` (length a multiple of `L`, at least `2L`)
    /// into `coeffs` of the same length.
    pub fn forward(&self, samples: &[f64], coeffs: &mut [f64]) {
        let n = self.stride;
        let half = n / 2;
        let total = samples.len();
        assert!(total.is_multiple_of(n) && total >= 2 * n, "signal length must be a multiple of 2L");
        assert_eq!(coeffs.len(), total);
        let frames = total / n;
        let scale = (2.0 / n as f64).sqrt();
        let mut z = vec![0.0; 2 * n];
        let mut folded = vec![0.0; n];
        let mut buf = vec![Complex::new(0.0, 0.0); half];
        for m in 0..frames {
            let start = m * n;
            for (t, zt) in z.iter_mut().enumerate() {
                *zt = self.window[t] * samples[(start + t) % total];
            }
            // quarters a, b, c, d of the windowed block fold to (-c_r - d, a - b_r)
            for i in 0..half {
                folded[i] = -z[n + half - 1 - i] - z[n + half + i];
                folded[half + i] = z[i] - z[n - 1 - i];
            }
            let out = &mut coeffs[start..start + n];
            self.dct4(&folded, out, &mut buf);
            out.iter_mut().for_each(|c| *c *= scale);
        }
    }

    /// Inverse (and adjoint) of [`Mdct::forward`]: windowed overlap-add.
    pub fn inverse(&self, coeffs: &[f64], samples: &mut [f64]) {
        let n = self.stride;
        let half = n / 2;
        let total = coeffs.len();
        assert!(total.is_multiple_of(n) && total >= 2 * n, "coefficient count must be a multiple of 2L");
        assert_eq!(samples.len(), total);
        samples.iter_mut().for_each(|s| *s = 0.0);
        let frames = total / n;
        let scale = (2.0 / n as f64).sqrt();
        let mut v = vec![0.0; n];
        let mut buf = vec![Complex::new(0.0, 0.0); half];
        let mut z = vec![0.0; 2 * n];
        for m in 0..frames {
            let start = m * n;
            self.dct4(&coeffs[start..start + n], &mut v, &mut buf);
            // transpose of the fold
            for i in 0..half {
                z[n + half - 1 - i] = -v[i];
                z[n + half + i] = -v[i];
                z[i] = v[half + i];
                z[n - 1 - i] = -v[half + i];
            }
            for (t, zt) in z.iter().enumerate() {
                samples[(start + t) % total] += scale * self.window[t] * zt;
            }
        }
    }
}

/// Analyses `signal` with the codec stride and the default band layout,
/// zero-padding to a whole number of frames (at least two).
pub fn mdct_analyze(signal: &AudioSignal) -> Result<MdctSpectrum> {
    mdct_analyze_with(signal, Mdct::standard(), default_band_layout())
}

pub fn mdct_analyze_with(
    signal: &AudioSignal,
    mdct: &Mdct,
    layout: Arc<BandLayout>,
) -> Result<MdctSpectrum> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot analyse an empty signal"));
    }
    let stride = mdct.stride();
    let padded = signal.padded(stride, 2, 0);
    let mut coeffs = vec![0.0; padded.len()];
    mdct.forward(padded.samples(), &mut coeffs);
    MdctSpectrum::new(stride, coeffs, layout)
}

/// Overlap-add synthesis; returns `frames × L` samples at 22050 Hz.
pub fn mdct_synthesize(spectrum: &MdctSpectrum) -> Result<AudioSignal> {
    if spectrum.stride() != STRIDE {
        return Err(Error::invalid(format!(
            "frame width {} does not match the codec stride {STRIDE}",
            spectrum.stride()
        )));
    }
    mdct_synthesize_with(spectrum, Mdct::standard())
}

pub fn mdct_synthesize_with(spectrum: &MdctSpectrum, mdct: &Mdct) -> Result<AudioSignal> {
    if spectrum.stride() != mdct.stride() {
        return Err(Error::invalid(format!(
            "frame width {} does not match transform stride {}",
            spectrum.stride(),
            mdct.stride()
        )));
    }
    if spectrum.frames() < 2 {
        return Err(Error::invalid("synthesis needs at least two frames"));
    }
    let mut samples = vec![0.0; spectrum.coeffs().len()];
    mdct.inverse(spectrum.coeffs(), &mut samples);
    AudioSignal::new(samples, SAMPLE_RATE)
}
