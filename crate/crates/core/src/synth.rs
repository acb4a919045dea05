//! Synthetic test clips.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::transform::{AudioSignal, SAMPLE_RATE};

fn normals(n: usize, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(move |_| StandardNormal.sample(&mut rng))
}

fn signal(samples: Vec<f64>) -> AudioSignal {
    AudioSignal::from_samples(samples).expect("generated samples are finite")
}

pub fn samples_for(secs: f64) -> usize {
    (secs * SAMPLE_RATE as f64).round() as usize
}

pub fn white_noise(n: usize, std_dev: f64, seed: u64) -> AudioSignal {
    signal(normals(n, seed).map(|z| std_dev * z).collect())
}

/// Stationary AR(1) process with coefficient `rho` and marginal variance `var`.
pub fn ar1(n: usize, rho: f64, var: f64, seed: u64) -> AudioSignal {
    let innov = (var * (1.0 - rho * rho)).sqrt();
    let mut z = normals(n, seed);
    let mut x = Vec::with_capacity(n);
    let mut prev = var.sqrt() * z.next().unwrap_or(0.0);
    if n > 0 {
        x.push(prev);
    }
    for zi in z {
        prev = rho * prev + innov * zi;
        x.push(prev);
    }
    signal(x)
}

pub fn sine(freq_hz: f64, n: usize, amplitude: f64) -> AudioSignal {
    let w = 2.0 * PI * freq_hz / SAMPLE_RATE as f64;
    signal((0..n).map(|t| amplitude * (w * t as f64).sin()).collect())
}

/// Noise through a pair of formant-like resonators, amplitude modulated at a
/// syllabic rate of about 4 Hz.
pub fn speech_like(n: usize, seed: u64) -> AudioSignal {
    let sr = SAMPLE_RATE as f64;
    let resonator = |f: f64, r: f64| (2.0 * r * (2.0 * PI * f / sr).cos(), -r * r);
    let (a1, a2) = resonator(500.0, 0.97);
    let (b1, b2) = resonator(1500.0, 0.95);
    let (mut y1, mut y2, mut z1, mut z2) = (0.0, 0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for (t, e) in normals(n, seed).enumerate() {
        let y = e + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        let z = e + b1 * z1 + b2 * z2;
        z2 = z1;
        z1 = z;
        let envelope = 0.55 + 0.45 * (2.0 * PI * 4.0 * t as f64 / sr).sin();
        out.push(0.01 * envelope * (y + 0.5 * z + 2.0 * e));
    }
    signal(out)
}
