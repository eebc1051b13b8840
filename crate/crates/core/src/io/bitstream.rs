//! MSB-first bit packing.
//!
//! Bits are appended starting at bit 7 of each byte; a value written with
//! width `w` emits its bit `w-1` first. The final partial byte is padded with
//! zero bits. Container scalars are little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const CONTAINER_MAGIC: &[u8; 8] = b"HPBS0001";

/// A byte buffer with an explicit bit length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bitstream {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl Bitstream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() as u64 * 8;
        Bitstream { bytes, bit_len }
    }

    pub fn with_bit_len(bytes: Vec<u8>, bit_len: u64) -> Result<Self> {
        if bit_len > bytes.len() as u64 * 8 {
            return Err(Error::Decode(format!(
                "bit length {bit_len} exceeds {} payload bytes",
                bytes.len()
            )));
        }
        let mut s = Bitstream { bytes, bit_len };
        s.bytes.truncate(bit_len.div_ceil(8) as usize);
        Ok(s)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn bit(&self, pos: u64) -> bool {
        (self.bytes[(pos / 8) as usize] >> (7 - pos % 8)) & 1 == 1
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.bit_len).map(|i| self.bit(i)).collect()
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut w = BitWriter::new();
        for &b in bits {
            w.write_bit(b);
        }
        w.finish()
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader {
            stream: self,
            pos: 0,
        }
    }

    /// `HPBS0001`, 8-byte little-endian bit length, payload bytes.
    pub fn to_container(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.bytes.len());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.extend_from_slice(&self.bit_len.to_le_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn from_container(data: &[u8]) -> Result<Self> {
        if data.len() < 16 || &data[..8] != CONTAINER_MAGIC {
            return Err(Error::Decode("missing HPBS0001 header".into()));
        }
        let bit_len = u64::from_le_bytes(data[8..16].try_into().expect("8 bytes"));
        let payload = &data[16..];
        let need = bit_len.div_ceil(8);
        if (payload.len() as u64) < need {
            return Err(Error::Decode(format!(
                "payload has {} bytes, header declares {bit_len} bits",
                payload.len()
            )));
        }
        Bitstream::with_bit_len(payload[..need as usize].to_vec(), bit_len)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_container()).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_container(&data)
    }
}

#[derive(Debug, Default)]
pub struct BitWriter {
    stream: Bitstream,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> u64 {
        self.stream.bit_len
    }

    pub fn write_bit(&mut self, bit: bool) {
        let pos = self.stream.bit_len;
        if pos.is_multiple_of(8) {
            self.stream.bytes.push(0);
        }
        if bit {
            let last = self.stream.bytes.len() - 1;
            self.stream.bytes[last] |= 1 << (7 - pos % 8);
        }
        self.stream.bit_len += 1;
    }

    pub fn write_bits(&mut self, value: u64, width: u32) -> Result<()> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        if width < 64 && value >> width != 0 {
            return Err(Error::ValueTooWide { value, width });
        }
        for i in (0..width).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
        Ok(())
    }

    pub fn write_byte(&mut self, byte: u8) {
        if self.stream.bit_len.is_multiple_of(8) {
            self.stream.bytes.push(byte);
            self.stream.bit_len += 8;
        } else {
            for i in (0..8).rev() {
                self.write_bit((byte >> i) & 1 == 1);
            }
        }
    }

    pub fn finish(self) -> Bitstream {
        self.stream
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    stream: &'a Bitstream,
    pos: u64,
}

impl BitReader<'_> {
    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.stream.bit_len - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.stream.bit_len {
            return Err(Error::EndOfStream);
        }
        let b = self.stream.bit(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        if self.remaining() < width as u64 {
            return Err(Error::EndOfStream);
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}
