//! Terminated K=7 convolutional code (generators 171/133 octal) with optional
//! puncturing, decoded by a Viterbi search over the 64-state trellis.
//!
//! LLR convention: positive values favor bit 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const CONSTRAINT_LENGTH: usize = 7;
const MEMORY: usize = CONSTRAINT_LENGTH - 1;
const STATES: usize = 1 << MEMORY;
const G0: u32 = 0o171;
const G1: u32 = 0o133;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeRate {
    Half,
    TwoThirds,
    ThreeQuarters,
}

impl CodeRate {
    /// Keep-mask applied cyclically to the mother code output `a0 b0 a1 b1 ..`.
    pub fn puncture_pattern(self) -> &'static [bool] {
        match self {
            CodeRate::Half => &[true, true],
            CodeRate::TwoThirds => &[true, true, true, false],
            CodeRate::ThreeQuarters => &[true, true, true, false, false, true],
        }
    }

    pub fn value(self) -> f64 {
        match self {
            CodeRate::Half => 0.5,
            CodeRate::TwoThirds => 2.0 / 3.0,
            CodeRate::ThreeQuarters => 0.75,
        }
    }

    /// Coded length for `info_len` message bits, tail included.
    pub fn coded_len(self, info_len: usize) -> usize {
        let mother = 2 * (info_len + MEMORY);
        let pat = self.puncture_pattern();
        let kept = pat.iter().filter(|&&k| k).count();
        let full = mother / pat.len() * kept;
        full + pat[..mother % pat.len()].iter().filter(|&&k| k).count()
    }

    pub fn info_capacity(self, coded_len: usize) -> usize {
        // coded_len is monotone in info_len; search the largest fit
        let mut n = (coded_len as f64 * self.value()) as usize + 2;
        while n > 0 && self.coded_len(n) > coded_len {
            n -= 1;
        }
        n
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeRate::Half => "1/2",
            CodeRate::TwoThirds => "2/3",
            CodeRate::ThreeQuarters => "3/4",
        })
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" | "0.5" => Ok(CodeRate::Half),
            "2/3" => Ok(CodeRate::TwoThirds),
            "3/4" | "0.75" => Ok(CodeRate::ThreeQuarters),
            other => Err(Error::InvalidParameter(format!(
                "unknown code rate {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBits {
    pub info_len: usize,
    pub bits: Vec<bool>,
    pub rate: CodeRate,
}

impl CodedBits {
    pub fn constraint_length(&self) -> usize {
        CONSTRAINT_LENGTH
    }
}

fn outputs(state: usize, bit: bool) -> (bool, bool) {
    let reg = ((bit as u32) << MEMORY) | state as u32;
    (
        (reg & G0).count_ones() & 1 == 1,
        (reg & G1).count_ones() & 1 == 1,
    )
}

fn next_state(state: usize, bit: bool) -> usize {
    ((bit as usize) << (MEMORY - 1)) | (state >> 1)
}

pub fn fec_encode(bits: &[bool], rate: CodeRate) -> Result<CodedBits> {
    if bits.is_empty() {
        return Err(Error::Length("no bits to encode".into()));
    }
    let pat = rate.puncture_pattern();
    let mut out = Vec::with_capacity(rate.coded_len(bits.len()));
    let mut state = 0;
    let mut pos = 0;
    for &b in bits.iter().chain(std::iter::repeat_n(&false, MEMORY)) {
        let (a, c) = outputs(state, b);
        for v in [a, c] {
            if pat[pos % pat.len()] {
                out.push(v);
            }
            pos += 1;
        }
        state = next_state(state, b);
    }
    Ok(CodedBits {
        info_len: bits.len(),
        bits: out,
        rate,
    })
}

/// Hard-decision decoding: coded bits become unit-magnitude LLRs.
pub fn fec_decode_hard(coded: &CodedBits) -> Result<Vec<bool>> {
    let llrs: Vec<f64> = coded
        .bits
        .iter()
        .map(|&b| if b { -1.0 } else { 1.0 })
        .collect();
    fec_decode_soft(&llrs, coded.info_len, coded.rate)
}

/// Maximum-likelihood decoding of the terminated trellis from channel LLRs.
/// Punctured positions are treated as erasures.
pub fn fec_decode_soft(llrs: &[f64], info_len: usize, rate: CodeRate) -> Result<Vec<bool>> {
    if info_len == 0 {
        return Err(Error::Length("empty message".into()));
    }
    let expect = rate.coded_len(info_len);
    if llrs.len() != expect {
        return Err(Error::Decode(format!(
            "{} coded values, expected {expect} for {info_len} bits at rate {rate}",
            llrs.len()
        )));
    }
    let pat = rate.puncture_pattern();
    let steps = info_len + MEMORY;
    let mut mother = vec![0.0; 2 * steps];
    let mut it = llrs.iter();
    for (i, slot) in mother.iter_mut().enumerate() {
        if pat[i % pat.len()] {
            let v = *it.next().expect("length checked");
            *slot = if v.is_finite() { v } else { 0.0 };
        }
    }
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    let mut decisions: Vec<u64> = Vec::with_capacity(steps);
    let mut next = [0.0f64; STATES];
    for t in 0..steps {
        let (la, lb) = (mother[2 * t], mother[2 * t + 1]);
        let mut dec = 0u64;
        let input_allowed_one = t < info_len;
        for (ns, slot) in next.iter_mut().enumerate() {
            let bit = ns >> (MEMORY - 1) == 1;
            if bit && !input_allowed_one {
                *slot = f64::NEG_INFINITY;
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            let mut choice = 0;
            for x in 0..2 {
                let ps = ((ns << 1) & (STATES - 1)) | x;
                let (a, b) = outputs(ps, bit);
                let m = metric[ps] + if a { -la } else { la } + if b { -lb } else { lb };
                if m > best {
                    best = m;
                    choice = x;
                }
            }
            *slot = best;
            dec |= (choice as u64) << ns;
        }
        metric = next;
        decisions.push(dec);
    }
    let mut state = 0usize;
    let mut bits = vec![false; steps];
    for t in (0..steps).rev() {
        bits[t] = state >> (MEMORY - 1) == 1;
        let x = (decisions[t] >> state) & 1;
        state = ((state << 1) & (STATES - 1)) | x as usize;
    }
    bits.truncate(info_len);
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn random_bits(n: usize, seed: u64) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn zero_message_zero_codeword() {
        let c = fec_encode(&[false; 40], CodeRate::Half).unwrap();
        assert!(c.bits.iter().all(|&b| !b));
        assert_eq!(c.bits.len(), 2 * (40 + 6));
    }

    #[test]
    fn impulse_response_matches_generators() {
        let c = fec_encode(&[true], CodeRate::Half).unwrap();
        let a: Vec<bool> = c.bits.iter().step_by(2).copied().collect();
        let b: Vec<bool> = c.bits.iter().skip(1).step_by(2).copied().collect();
        let bits_of = |g: u32| (0..7).rev().map(|i| (g >> i) & 1 == 1).collect::<Vec<_>>();
        assert_eq!(a, bits_of(G0));
        assert_eq!(b, bits_of(G1));
        // free distance of the code
        assert_eq!(c.bits.iter().filter(|&&x| x).count(), 10);
    }

    #[test]
    fn noiseless_round_trip_all_rates() {
        let msg = random_bits(10_000, 1);
        for rate in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters] {
            let c = fec_encode(&msg, rate).unwrap();
            assert_eq!(c.bits.len(), rate.coded_len(msg.len()));
            assert_eq!(fec_decode_hard(&c).unwrap(), msg);
        }
    }

    #[test]
    fn coded_lengths() {
        assert_eq!(CodeRate::Half.coded_len(100), 212);
        assert_eq!(CodeRate::TwoThirds.coded_len(100), 159);
        assert_eq!(CodeRate::ThreeQuarters.coded_len(100), 142);
        for rate in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters] {
            for len in [64, 1000, 1001] {
                let n = rate.info_capacity(len);
                assert!(rate.coded_len(n) <= len);
                assert!(rate.coded_len(n + 1) > len);
            }
        }
    }

    #[test]
    fn every_single_error_corrected() {
        for seed in 0..3 {
            let msg = random_bits(100, seed);
            let c = fec_encode(&msg, CodeRate::Half).unwrap();
            for i in 0..c.bits.len() {
                let mut bad = c.clone();
                bad.bits[i] = !bad.bits[i];
                assert_eq!(fec_decode_hard(&bad).unwrap(), msg, "position {i}");
            }
        }
    }

    #[test]
    fn random_double_errors_corrected() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let msg = random_bits(100, 9);
        let c = fec_encode(&msg, CodeRate::Half).unwrap();
        for _ in 0..2000 {
            let i = rng.random_range(0..c.bits.len());
            let mut j = rng.random_range(0..c.bits.len());
            while j == i {
                j = rng.random_range(0..c.bits.len());
            }
            let mut bad = c.clone();
            bad.bits[i] = !bad.bits[i];
            bad.bits[j] = !bad.bits[j];
            assert_eq!(fec_decode_hard(&bad).unwrap(), msg, "{i},{j}");
        }
    }

    #[test]
    fn soft_decoding_beats_noise() {
        // BPSK-like LLRs at moderate noise
        let msg = random_bits(20_000, 4);
        let c = fec_encode(&msg, CodeRate::Half).unwrap();
        let sigma = 0.6;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let llrs: Vec<f64> = c
            .bits
            .iter()
            .map(|&b| {
                let y = if b { -1.0 } else { 1.0 } + noise.sample(&mut rng);
                2.0 * y / (sigma * sigma)
            })
            .collect();
        let raw_errors = llrs
            .iter()
            .zip(&c.bits)
            .filter(|(l, b)| (**l < 0.0) != **b)
            .count();
        let dec = fec_decode_soft(&llrs, msg.len(), CodeRate::Half).unwrap();
        let errs = dec.iter().zip(&msg).filter(|(a, b)| a != b).count();
        assert!(raw_errors > 1000);
        assert!(errs < 20, "{errs}");
    }

    #[test]
    fn length_mismatch_rejected() {
        let c = fec_encode(&[true, false], CodeRate::Half).unwrap();
        assert!(matches!(
            fec_decode_soft(&vec![1.0; c.bits.len() - 1], 2, CodeRate::Half),
            Err(Error::Decode(_))
        ));
        assert!(fec_encode(&[], CodeRate::Half).is_err());
    }

    #[test]
    fn rate_parsing() {
        assert_eq!("2/3".parse::<CodeRate>().unwrap(), CodeRate::TwoThirds);
        assert_eq!(CodeRate::ThreeQuarters.to_string(), "3/4");
        assert!("5/6".parse::<CodeRate>().is_err());
    }
}
