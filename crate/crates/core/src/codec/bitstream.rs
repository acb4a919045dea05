//! Bit-exact stream format.
//!
//! Header (big-endian): `"IPSC"`, version `u8 = 1`, sample rate `u32`, stride
//! `u16`, frame count `u32`, layout id (`u8` length + bytes), target bitrate
//! `u16` in tenths of kb/s. Each frame then carries, starting on a byte
//! boundary: overflow flag (1 bit), `se(a_m - a_{m-1})`, `se` envelope deltas
//! (band 0 against the previous frame, other bands against the previous
//! band), and the line symbols. Line symbols are `ue` codes: 0 is a single
//! zero, 1 is an escape followed by `ue(run - 8)` for a run of at least 8
//! zeros, and `k ≠ 0` maps to `2k` (k > 0) or `2|k| + 1` (k < 0).

use std::sync::Arc;

use super::measurement::Measurement;
use crate::error::{Error, Result};
use crate::transform::{BandLayout, SAMPLE_RATE, STRIDE};

pub const MAGIC: &[u8; 4] = b"IPSC";
pub const VERSION: u8 = 1;
/// Shortest zero run coded with the escape symbol.
pub const MIN_ZERO_RUN: usize = 8;

const ESCAPE: u64 = 1;
const MAX_CODE_PREFIX: u32 = 48;

/// Signed to unsigned mapping: 0, 1, -1, 2, -2, ... → 0, 1, 2, 3, 4, ...
#[inline]
pub fn se_map(v: i64) -> u64 {
    if v > 0 {
        (2 * v - 1) as u64
    } else {
        (-2 * v) as u64
    }
}

#[inline]
pub fn se_unmap(u: u64) -> i64 {
    if u % 2 == 1 {
        u.div_ceil(2) as i64
    } else {
        -((u / 2) as i64)
    }
}

/// Length in bits of the order-0 Exp-Golomb code of `n`.
#[inline]
pub fn ue_len(n: u64) -> usize {
    let bits = 64 - (n + 1).leading_zeros() as usize;
    2 * bits - 1
}

#[inline]
fn line_symbol(k: i32) -> u64 {
    let k = k as i64;
    if k > 0 {
        (2 * k) as u64
    } else {
        (2 * -k + 1) as u64
    }
}

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    used: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.used += 1;
        if self.used == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.used = 0;
        }
    }

    pub fn put_bits(&mut self, value: u64, count: usize) {
        for i in (0..count).rev() {
            self.put_bit((value >> i) & 1 == 1);
        }
    }

    pub fn put_ue(&mut self, n: u64) {
        let v = n + 1;
        let bits = 64 - v.leading_zeros() as usize;
        self.put_bits(0, bits - 1);
        self.put_bits(v, bits);
    }

    pub fn put_se(&mut self, v: i64) {
        self.put_ue(se_map(v));
    }

    pub fn put_bytes(&mut self, data: &[u8]) {
        debug_assert_eq!(self.used, 0);
        self.bytes.extend_from_slice(data);
    }

    /// Pads with zero bits to the next byte boundary.
    pub fn align(&mut self) {
        while self.used != 0 {
            self.put_bit(false);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + self.used as usize
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.align();
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn byte_offset(&self) -> usize {
        self.pos / 8
    }

    fn error(&self, reason: impl Into<String>) -> Error {
        Error::Decode { offset: self.byte_offset(), reason: reason.into() }
    }

    pub fn get_bit(&mut self) -> Result<bool> {
        let byte = self.data.get(self.pos / 8).ok_or_else(|| self.error("unexpected end of stream"))?;
        let bit = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn get_bits(&mut self, count: usize) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.get_bit()? as u64;
        }
        Ok(v)
    }

    pub fn get_ue(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.get_bit()? {
            zeros += 1;
            if zeros > MAX_CODE_PREFIX {
                return Err(self.error("Exp-Golomb prefix too long"));
            }
        }
        let rest = self.get_bits(zeros as usize)?;
        Ok(((1u64 << zeros) | rest) - 1)
    }

    pub fn get_se(&mut self) -> Result<i64> {
        Ok(se_unmap(self.get_ue()?))
    }

    pub fn get_bytes(&mut self, count: usize) -> Result<&'a [u8]> {
        debug_assert_eq!(self.pos % 8, 0);
        let start = self.pos / 8;
        let slice =
            self.data.get(start..start + count).ok_or_else(|| self.error("unexpected end of stream"))?;
        self.pos += 8 * count;
        Ok(slice)
    }

    pub fn align(&mut self) {
        self.pos = self.pos.div_ceil(8) * 8;
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.data.len() * 8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub sample_rate: u32,
    pub stride: u16,
    pub frames: u32,
    pub layout_id: String,
    /// Target bitrate in tenths of kb/s.
    pub bitrate_tenths: u16,
}

impl StreamHeader {
    pub fn bitrate_kbps(&self) -> f64 {
        self.bitrate_tenths as f64 / 10.0
    }

    /// Size of the serialized header in bits.
    pub fn bit_len(&self) -> usize {
        8 * (4 + 1 + 4 + 2 + 4 + 1 + self.layout_id.len() + 2)
    }

    fn write(&self, w: &mut BitWriter) {
        w.put_bytes(MAGIC);
        w.put_bytes(&[VERSION]);
        w.put_bytes(&self.sample_rate.to_be_bytes());
        w.put_bytes(&self.stride.to_be_bytes());
        w.put_bytes(&self.frames.to_be_bytes());
        w.put_bytes(&[self.layout_id.len() as u8]);
        w.put_bytes(self.layout_id.as_bytes());
        w.put_bytes(&self.bitrate_tenths.to_be_bytes());
    }

    fn read(r: &mut BitReader<'_>) -> Result<Self> {
        if r.get_bytes(4)? != MAGIC {
            return Err(Error::Decode { offset: 0, reason: "bad magic".into() });
        }
        let version = r.get_bytes(1)?[0];
        if version != VERSION {
            return Err(Error::Decode { offset: 4, reason: format!("unsupported version {version}") });
        }
        let sample_rate = u32::from_be_bytes(r.get_bytes(4)?.try_into().unwrap());
        let stride = u16::from_be_bytes(r.get_bytes(2)?.try_into().unwrap());
        let frames = u32::from_be_bytes(r.get_bytes(4)?.try_into().unwrap());
        let id_len = r.get_bytes(1)?[0] as usize;
        let id_offset = r.byte_offset();
        let layout_id = std::str::from_utf8(r.get_bytes(id_len)?)
            .map_err(|_| Error::Decode { offset: id_offset, reason: "layout id is not UTF-8".into() })?
            .to_string();
        let bitrate_tenths = u16::from_be_bytes(r.get_bytes(2)?.try_into().unwrap());
        Ok(Self { sample_rate, stride, frames, layout_id, bitrate_tenths })
    }
}

/// A header together with the measurement it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub header: StreamHeader,
    pub measurement: Measurement,
}

/// Per-stream differential-coding state carried from frame to frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameContext {
    pub prev_alloc: i32,
    pub prev_env0: i32,
}

/// Exact size in bits of the line symbols of one frame.
pub fn bins_bits(bins: &[i32]) -> usize {
    let mut bits = 0;
    let mut i = 0;
    while i < bins.len() {
        if bins[i] == 0 {
            let run = bins[i..].iter().take_while(|&&k| k == 0).count();
            bits += if run >= MIN_ZERO_RUN { ue_len(ESCAPE) + ue_len((run - MIN_ZERO_RUN) as u64) } else { run };
            i += run;
        } else {
            bits += ue_len(line_symbol(bins[i]));
            i += 1;
        }
    }
    bits
}

/// Exact size in bits of the envelope deltas of one frame.
pub fn env_bits(ctx: FrameContext, env: &[i32]) -> usize {
    let mut bits = ue_len(se_map(env[0] as i64 - ctx.prev_env0 as i64));
    for w in env.windows(2) {
        bits += ue_len(se_map(w[1] as i64 - w[0] as i64));
    }
    bits
}

/// Size of a whole frame in bits, including the alignment padding.
pub fn frame_bits(ctx: FrameContext, alloc: i32, env: &[i32], bins: &[i32]) -> usize {
    let raw = 1 + ue_len(se_map(alloc as i64 - ctx.prev_alloc as i64)) + env_bits(ctx, env) + bins_bits(bins);
    raw.div_ceil(8) * 8
}

pub fn write_frame(w: &mut BitWriter, ctx: FrameContext, alloc: i32, overflow: bool, env: &[i32], bins: &[i32]) {
    w.put_bit(overflow);
    w.put_se(alloc as i64 - ctx.prev_alloc as i64);
    w.put_se(env[0] as i64 - ctx.prev_env0 as i64);
    for pair in env.windows(2) {
        w.put_se(pair[1] as i64 - pair[0] as i64);
    }
    let mut i = 0;
    while i < bins.len() {
        if bins[i] == 0 {
            let run = bins[i..].iter().take_while(|&&k| k == 0).count();
            if run >= MIN_ZERO_RUN {
                w.put_ue(ESCAPE);
                w.put_ue((run - MIN_ZERO_RUN) as u64);
            } else {
                for _ in 0..run {
                    w.put_ue(0);
                }
            }
            i += run;
        } else {
            w.put_ue(line_symbol(bins[i]));
            i += 1;
        }
    }
    w.align();
}

fn to_i32(r: &BitReader<'_>, v: i64, what: &str) -> Result<i32> {
    i32::try_from(v).map_err(|_| Error::Decode { offset: r.byte_offset(), reason: format!("{what} out of range") })
}

impl Bitstream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = BitWriter::new();
        self.header.write(&mut w);
        let m = &self.measurement;
        let mut ctx = FrameContext::default();
        for f in 0..m.frames() {
            let alloc = m.alloc_levels()[f];
            let env = m.env_row(f);
            write_frame(&mut w, ctx, alloc, m.overflow_flags()[f], env, m.bin_row(f));
            ctx = FrameContext { prev_alloc: alloc, prev_env0: env[0] };
        }
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = BitReader::new(data);
        let header = StreamHeader::read(&mut r)?;
        if header.sample_rate != SAMPLE_RATE {
            return Err(Error::UnsupportedSampleRate(header.sample_rate));
        }
        if header.stride as usize != STRIDE {
            return Err(Error::Decode { offset: 9, reason: format!("unsupported stride {}", header.stride) });
        }
        let layout: Arc<BandLayout> = BandLayout::by_id(&header.layout_id).ok_or_else(|| Error::Decode {
            offset: 16,
            reason: format!("unknown band layout {:?}", header.layout_id),
        })?;
        let frames = header.frames as usize;
        // every frame takes at least one byte
        if frames > data.len() {
            return Err(Error::Decode { offset: r.byte_offset(), reason: "frame count exceeds stream size".into() });
        }
        let bands = layout.num_bands();
        let lines = layout.num_lines();
        let mut alloc = Vec::with_capacity(frames);
        let mut overflow = Vec::with_capacity(frames);
        let mut env = Vec::with_capacity(frames * bands);
        let mut bins = Vec::with_capacity(frames * lines);
        let mut ctx = FrameContext::default();
        for _ in 0..frames {
            overflow.push(r.get_bit()?);
            let a = r.get_se()? + ctx.prev_alloc as i64;
            let a = to_i32(&r, a, "allocation level")?;
            alloc.push(a);
            let mut prev = ctx.prev_env0 as i64;
            for b in 0..bands {
                let v = r.get_se()? + prev;
                let v = to_i32(&r, v, "envelope index")?;
                env.push(v);
                prev = v as i64;
                if b == 0 {
                    ctx.prev_env0 = v;
                }
            }
            ctx.prev_alloc = a;
            let mut filled = 0;
            while filled < lines {
                let sym = r.get_ue()?;
                match sym {
                    0 => {
                        bins.push(0);
                        filled += 1;
                    }
                    ESCAPE => {
                        let run = r.get_ue()? as usize + MIN_ZERO_RUN;
                        if filled + run > lines {
                            return Err(Error::Decode { offset: r.byte_offset(), reason: "zero run crosses frame end".into() });
                        }
                        bins.extend(std::iter::repeat_n(0, run));
                        filled += run;
                    }
                    s => {
                        let mag = (s / 2) as i64;
                        let k = if s % 2 == 0 { mag } else { -mag };
                        bins.push(to_i32(&r, k, "bin index")?);
                        filled += 1;
                    }
                }
            }
            r.align();
        }
        if !r.at_end() {
            return Err(Error::Decode { offset: r.byte_offset(), reason: "trailing data after last frame".into() });
        }
        let measurement = Measurement::new(layout, alloc, overflow, env, bins)
            .map_err(|e| Error::Decode { offset: r.byte_offset(), reason: e.to_string() })?;
        Ok(Self { header, measurement })
    }
}
