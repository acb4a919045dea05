//! Encoder, bitstream and legacy decoder.

mod bitstream;
mod decoder;
mod encoder;
mod measurement;
pub mod quant;

pub use bitstream::{
    bins_bits, env_bits, frame_bits, se_map, se_unmap, ue_len, write_frame, BitReader, BitWriter, Bitstream,
    FrameContext, StreamHeader, MAGIC, MIN_ZERO_RUN, VERSION,
};
pub use decoder::{decode_legacy, decode_measurement, noise_fill_frames, reconstruct_spectrum, NOISE_FILL_LEVELS};
pub use encoder::{encode, encode_with_layout, quantize_frame, rate_loop, Encoded, RateDecision};
pub use measurement::{Measurement, ENV_INDEX_MAX};
pub use quant::{
    band_energy, bin_interval, env_interval, env_midpoint, envelope, line_stepsize, quantize_envelope, quantize_lines,
    ALLOC_MAX, ALLOC_MIN, SILENT_INDEX,
};
