mod common;

use ipsc_core::codec::{
    bins_bits, decode_legacy, decode_measurement, encode, noise_fill_frames, quantize_frame, rate_loop, Bitstream,
    FrameContext, ALLOC_MAX, ALLOC_MIN, SILENT_INDEX,
};
use ipsc_core::eval::snr;
use ipsc_core::synth;
use ipsc_core::transform::{default_band_layout, mdct_analyze, AudioSignal, Mdct, STRIDE};
use ipsc_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fuzzed_measurements_round_trip(seed in any::<u64>(), rate in 1u16..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stream = common::stream_for(common::random_measurement(&mut rng, 6), rate);
        let bytes = stream.to_bytes();
        let back = Bitstream::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &stream);
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}

#[test]
fn encoder_output_contains_the_input() {
    for seed in 0..20u64 {
        let sig = match seed % 3 {
            0 => synth::white_noise(synth::samples_for(0.3), 0.05, seed),
            1 => synth::ar1(synth::samples_for(0.3), 0.95, 0.02, seed),
            _ => synth::speech_like(synth::samples_for(0.3), seed),
        };
        for kbps in [8.0, 48.0] {
            let enc = encode(&sig, kbps).unwrap();
            let decoded = Bitstream::from_bytes(&enc.bytes).unwrap();
            assert!(common::contained(&decoded.measurement, &enc.spectrum), "seed {seed} at {kbps}");
        }
    }
}

#[test]
fn silence_gives_a_minimal_stream_and_decodes_to_silence() {
    let sig = AudioSignal::zeros(synth::samples_for(1.0));
    let enc = encode(&sig, 16.0).unwrap();
    let m = enc.measurement();
    assert!(m.env_indices().iter().all(|&i| i == SILENT_INDEX));
    assert!(m.bin_indices().iter().all(|&k| k == 0));
    assert!(enc.realized_kbps() <= 16.5);
    let out = decode_legacy(&enc.stream, 3).unwrap();
    assert!(out.samples().iter().all(|&v| v == 0.0));
}

#[test]
fn rate_loop_endpoints() {
    let layout = default_band_layout();
    let sig = synth::white_noise(3 * STRIDE, 0.1, 4);
    let enc = encode(&sig, 16.0).unwrap();
    let frame = enc.spectrum.frame(1);
    let env = enc.measurement().env_row(1);
    let ctx = FrameContext::default();
    let d = rate_loop(frame, &layout, env, ctx, i64::MAX);
    assert_eq!((d.alloc, d.overflow), (ALLOC_MIN, false));
    let d = rate_loop(frame, &layout, env, ctx, 0);
    assert_eq!((d.alloc, d.overflow), (ALLOC_MAX, true));
}

#[test]
fn rate_loop_picks_the_finest_fitting_level() {
    let layout = default_band_layout();
    let sig = synth::white_noise(20 * STRIDE, 0.1, 5);
    let enc = encode(&sig, 16.0).unwrap();
    let budget = (16_000.0 * STRIDE as f64 / 22_050.0).floor() as i64;
    let ctx = FrameContext::default();
    for m in 1..enc.spectrum.frames() - 1 {
        let frame = enc.spectrum.frame(m);
        let env = enc.measurement().env_row(m);
        let d = rate_loop(frame, &layout, env, ctx, budget);
        let bits = |a: i32| ipsc_core::codec::frame_bits(ctx, a, env, &quantize_frame(frame, &layout, env, a)) as i64;
        assert!(!d.overflow);
        assert!(bits(d.alloc) <= budget);
        for a in ALLOC_MIN..d.alloc {
            assert!(bits(a) > budget, "frame {m}: level {a} also fits");
        }
    }
}

#[test]
fn larger_budget_never_gives_a_coarser_level() {
    let layout = default_band_layout();
    let sig = synth::speech_like(8 * STRIDE, 6);
    let enc = encode(&sig, 16.0).unwrap();
    for m in 0..enc.spectrum.frames() {
        let frame = enc.spectrum.frame(m);
        let env = enc.measurement().env_row(m);
        let mut last = ALLOC_MAX + 1;
        for budget in (0..3000).step_by(25) {
            let d = rate_loop(frame, &layout, env, FrameContext::default(), budget);
            assert!(d.alloc <= last);
            last = d.alloc;
        }
    }
}

#[test]
fn line_bits_do_not_grow_with_coarser_levels() {
    let layout = default_band_layout();
    for seed in 0..5 {
        let sig = synth::white_noise(4 * STRIDE, 0.1, seed);
        let enc = encode(&sig, 16.0).unwrap();
        let frame = enc.spectrum.frame(1);
        let env = enc.measurement().env_row(1);
        let bits: Vec<usize> = (ALLOC_MIN..=ALLOC_MAX).map(|a| bins_bits(&quantize_frame(frame, &layout, env, a))).collect();
        assert!(bits.windows(2).all(|w| w[1] <= w[0]), "{bits:?}");
    }
}

#[test]
fn speech_like_stream_size_at_16_kbps() {
    let sig = synth::speech_like(synth::samples_for(10.0), 1);
    let enc = encode(&sig, 16.0).unwrap();
    assert!((19_600..=20_400).contains(&enc.bytes.len()), "{} bytes", enc.bytes.len());
}

#[test]
fn legacy_decoder_on_a_high_rate_sine() {
    let sig = synth::sine(440.0, synth::samples_for(2.0), 0.3);
    let enc = encode(&sig, 48.0).unwrap();
    let out = decode_legacy(&enc.stream, 0).unwrap();
    assert!(snr(sig.samples(), &out.samples()[..sig.len()]).unwrap() >= 20.0);
}

#[test]
fn legacy_decoder_is_deterministic_given_the_seed() {
    let sig = synth::white_noise(synth::samples_for(0.5), 0.05, 9);
    let enc = encode(&sig, 8.0).unwrap();
    let a = decode_legacy(&enc.stream, 17).unwrap();
    let b = decode_legacy(&enc.stream, 17).unwrap();
    assert_eq!(a.samples(), b.samples());
}

#[test]
fn noise_filled_bands_carry_the_midpoint_energy() {
    let sig = synth::white_noise(synth::samples_for(1.0), 0.05, 2);
    let enc = encode(&sig, 8.0).unwrap();
    let m = enc.measurement();
    let fill = noise_fill_frames(m);
    let layout = m.layout();
    let mut checked = 0;
    let mut inside = 0;
    for seed in 0..50 {
        let out = decode_legacy(&enc.stream, seed).unwrap();
        let mut u = vec![0.0; out.len()];
        Mdct::standard().forward(out.samples(), &mut u);
        for f in (0..m.frames()).filter(|&f| fill[f]) {
            for b in 0..layout.num_bands() {
                let zero = m.band_bins(f, b).iter().all(|&k| k == 0);
                if !zero || m.env_index(f, b) == SILENT_INDEX || layout.width(b) < 8 {
                    continue;
                }
                let band = &u[f * STRIDE..(f + 1) * STRIDE][layout.range(b)];
                let ratio = band.iter().map(|v| v * v).sum::<f64>() / band.len() as f64 / m.env_midpoint(f, b);
                checked += 1;
                inside += (0.5..=2.0).contains(&ratio) as usize;
            }
        }
    }
    assert!(checked > 100, "only {checked} filled bands");
    assert!(inside as f64 >= 0.99 * checked as f64, "{inside}/{checked}");
}

#[test]
fn decoding_without_fill_matches_the_bins() {
    let sig = synth::ar1(synth::samples_for(0.5), 0.9, 0.01, 3);
    let enc = encode(&sig, 16.0).unwrap();
    let out = decode_measurement(enc.measurement(), false, 0).unwrap();
    let spec = mdct_analyze(&out).unwrap();
    let m = enc.measurement();
    for f in 0..m.frames() {
        for b in 0..m.num_bands() {
            for i in m.layout().range(b) {
                let (lo, hi) = m.bin_interval(f, i, b);
                let u = spec.frame(f)[i];
                assert!(lo <= u && u < hi);
            }
        }
    }
}

#[test]
fn corrupt_streams_report_a_byte_offset() {
    let sig = synth::white_noise(synth::samples_for(0.2), 0.05, 1);
    let bytes = encode(&sig, 16.0).unwrap().bytes;
    match Bitstream::from_bytes(&bytes[..bytes.len() - 3]) {
        Err(Error::Decode { offset, .. }) => assert!(offset > 0 && offset <= bytes.len()),
        other => panic!("{other:?}"),
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Bitstream::from_bytes(&bad), Err(Error::Decode { offset: 0, .. })));
    let mut extra = bytes;
    extra.push(0);
    assert!(matches!(Bitstream::from_bytes(&extra), Err(Error::Decode { .. })));
}

#[test]
fn layout_id_round_trips_through_the_header() {
    let enc = encode(&synth::white_noise(1000, 0.1, 0), 16.0).unwrap();
    let back = Bitstream::from_bytes(&enc.bytes).unwrap();
    assert_eq!(back.header.layout_id, "ipsc-v1-b24");
    assert_eq!(back.measurement.layout().id(), "ipsc-v1-b24");
}

#[test]
fn wrong_sample_rate_is_rejected() {
    let sig = AudioSignal::new(vec![0.0; 100], 44_100);
    assert!(matches!(sig.and_then(|s| encode(&s, 16.0)), Err(Error::UnsupportedSampleRate(44_100))));
}
