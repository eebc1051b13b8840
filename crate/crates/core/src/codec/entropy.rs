//! Adaptive binary arithmetic coder.
//!
//! Every byte is coded MSB first as eight binary decisions sharing one
//! adaptive model. Counts start at (1, 1), grow by one per coded bit and are
//! halved once their sum exceeds 2^16. The interval arithmetic is the classic
//! 32-bit integer scheme with deferred (pending) underflow bits.

use crate::error::{Error, Result};
use crate::io::{BitReader, BitWriter, Bitstream};

const TOP: u64 = 0xFFFF_FFFF;
const HALF: u64 = 0x8000_0000;
const QUARTER: u64 = 0x4000_0000;
const MAX_TOTAL: u32 = 1 << 16;
/// Zero bits the decoder may invent past the end before declaring corruption.
const MAX_OVERRUN: u32 = 64;

#[derive(Debug, Clone)]
struct BitModel {
    zeros: u32,
    ones: u32,
}

impl BitModel {
    fn new() -> Self {
        BitModel { zeros: 1, ones: 1 }
    }

    fn total(&self) -> u64 {
        (self.zeros + self.ones) as u64
    }

    fn update(&mut self, bit: bool) {
        if bit {
            self.ones += 1;
        } else {
            self.zeros += 1;
        }
        if self.zeros + self.ones > MAX_TOTAL {
            self.zeros = self.zeros.div_ceil(2);
            self.ones = self.ones.div_ceil(2);
        }
    }

    /// Upper end of the zero sub-interval within `[low, high]`.
    fn split(&self, low: u64, high: u64) -> u64 {
        let range = high - low + 1;
        low + range * self.zeros as u64 / self.total() - 1
    }
}

#[derive(Debug)]
pub struct EntropyEncoder {
    model: BitModel,
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for EntropyEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl EntropyEncoder {
    pub fn new() -> Self {
        EntropyEncoder {
            model: BitModel::new(),
            low: 0,
            high: TOP,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    fn emit(&mut self, bit: bool) {
        self.out.write_bit(bit);
        for _ in 0..self.pending {
            self.out.write_bit(!bit);
        }
        self.pending = 0;
    }

    pub fn encode_bit(&mut self, bit: bool) {
        let split = self.model.split(self.low, self.high);
        if bit {
            self.low = split + 1;
        } else {
            self.high = split;
        }
        self.model.update(bit);
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    pub fn encode_byte(&mut self, byte: u8) {
        for i in (0..8).rev() {
            self.encode_bit((byte >> i) & 1 == 1);
        }
    }

    pub fn finish(mut self) -> Bitstream {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        self.out.finish()
    }
}

#[derive(Debug)]
pub struct EntropyDecoder<'a> {
    model: BitModel,
    low: u64,
    high: u64,
    value: u64,
    input: BitReader<'a>,
    overrun: u32,
}

impl<'a> EntropyDecoder<'a> {
    pub fn new(stream: &'a Bitstream) -> Result<Self> {
        let mut d = EntropyDecoder {
            model: BitModel::new(),
            low: 0,
            high: TOP,
            value: 0,
            input: stream.reader(),
            overrun: 0,
        };
        for _ in 0..32 {
            d.value = (d.value << 1) | d.next_input()? as u64;
        }
        Ok(d)
    }

    fn next_input(&mut self) -> Result<bool> {
        match self.input.read_bit() {
            Ok(b) => Ok(b),
            Err(_) => {
                self.overrun += 1;
                if self.overrun > MAX_OVERRUN {
                    Err(Error::Decode(
                        "arithmetic code ran past end of stream".into(),
                    ))
                } else {
                    Ok(false)
                }
            }
        }
    }

    pub fn decode_bit(&mut self) -> Result<bool> {
        let split = self.model.split(self.low, self.high);
        let bit = self.value > split;
        if bit {
            self.low = split + 1;
        } else {
            self.high = split;
        }
        self.model.update(bit);
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.next_input()? as u64;
        }
        Ok(bit)
    }

    pub fn decode_byte(&mut self) -> Result<u8> {
        let mut b = 0u8;
        for _ in 0..8 {
            b = (b << 1) | self.decode_bit()? as u8;
        }
        Ok(b)
    }
}

pub fn entropy_encode(bytes: &[u8]) -> Result<Bitstream> {
    if bytes.is_empty() {
        return Err(Error::InvalidParameter("nothing to encode".into()));
    }
    let mut enc = EntropyEncoder::new();
    for &b in bytes {
        enc.encode_byte(b);
    }
    Ok(enc.finish())
}

pub fn entropy_decode(stream: &Bitstream, count: usize) -> Result<Vec<u8>> {
    let mut dec = EntropyDecoder::new(stream)?;
    (0..count).map(|_| dec.decode_byte()).collect()
}
