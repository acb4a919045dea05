#![allow(dead_code)]

pub mod ncx2_table;

use ipsc_core::codec::{band_energy, Bitstream, Measurement, StreamHeader, ALLOC_MAX, ALLOC_MIN, ENV_INDEX_MAX, SILENT_INDEX};
use ipsc_core::transform::{default_band_layout, SAMPLE_RATE, STRIDE};
use rand::Rng;

/// Random measurement with zero runs, large magnitudes and silent bands.
pub fn random_measurement<R: Rng>(rng: &mut R, max_frames: usize) -> Measurement {
    let layout = default_band_layout();
    let frames = rng.gen_range(1..=max_frames);
    let alloc = (0..frames).map(|_| rng.gen_range(ALLOC_MIN..=ALLOC_MAX)).collect();
    let overflow = (0..frames).map(|_| rng.gen_bool(0.2)).collect();
    let env = (0..frames * layout.num_bands())
        .map(|_| match rng.gen_range(0..4) {
            0 => SILENT_INDEX,
            1 => rng.gen_range(SILENT_INDEX..=ENV_INDEX_MAX),
            _ => rng.gen_range(-20..=5),
        })
        .collect();
    let mut bins = Vec::with_capacity(frames * STRIDE);
    while bins.len() < frames * STRIDE {
        let left = frames * STRIDE - bins.len();
        match rng.gen_range(0..5) {
            0 => bins.extend(std::iter::repeat(0).take(rng.gen_range(1..=left.min(60)))),
            1 => bins.push(rng.gen_range(-(1 << 30)..=(1 << 30))),
            _ => bins.push(rng.gen_range(-4..=4)),
        }
    }
    Measurement::new(layout, alloc, overflow, env, bins).expect("valid by construction")
}

pub fn stream_for(measurement: Measurement, bitrate_tenths: u16) -> Bitstream {
    let header = StreamHeader {
        sample_rate: SAMPLE_RATE,
        stride: STRIDE as u16,
        frames: measurement.frames() as u32,
        layout_id: measurement.layout().id().to_string(),
        bitrate_tenths,
    };
    Bitstream { header, measurement }
}

/// Every envelope value and line of `spectrum` lies inside its coded interval.
pub fn contained(measurement: &Measurement, spectrum: &ipsc_core::transform::MdctSpectrum) -> bool {
    let layout = measurement.layout();
    for m in 0..measurement.frames() {
        for b in 0..layout.num_bands() {
            let band = spectrum.band(m, b);
            let e = band_energy(band);
            let (lo, hi) = measurement.env_interval(m, b);
            if !(lo <= e && e < hi) {
                return false;
            }
            for (i, &u) in layout.range(b).zip(band) {
                let (lo, hi) = measurement.bin_interval(m, i, b);
                if !(lo <= u && u < hi) {
                    return false;
                }
            }
        }
    }
    true
}
