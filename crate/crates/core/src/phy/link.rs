use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    build_qam, channel_awgn, channel_rayleigh, demodulate_soft_per_symbol, equalize_csi, modulate,
    noise_variance, McsEntry,
};
use crate::codec::{fec_decode_soft, fec_encode};
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel {other:?}"
            ))),
        }
    }
}

/// Passes symbols through the channel and returns equalized symbols with
/// their per-symbol noise variances and erasure flags.
pub fn pass_channel(
    symbols: &[Complex64],
    kind: ChannelKind,
    snr_db: f64,
    seed: u64,
) -> Result<(Vec<Complex64>, Vec<f64>, Vec<bool>)> {
    let n0 = noise_variance(snr_db);
    match kind {
        ChannelKind::Awgn => Ok((
            channel_awgn(symbols, snr_db, seed),
            vec![n0; symbols.len()],
            vec![false; symbols.len()],
        )),
        ChannelKind::Rayleigh => {
            let (y, h) = channel_rayleigh(symbols, snr_db, seed);
            let eq = equalize_csi(&y, &h)?;
            let vars = eq.noise_variances(n0);
            Ok((eq.symbols, vars, eq.erased))
        }
    }
}

/// Symbols needed to carry `info_len` bits with `mcs`.
pub fn coded_symbols(info_len: usize, mcs: &McsEntry) -> usize {
    let bps = mcs.order.trailing_zeros() as usize;
    mcs.rate.coded_len(info_len).div_ceil(bps)
}

/// Largest message that fits in `symbols` symbols with `mcs`.
pub fn info_capacity(symbols: usize, mcs: &McsEntry) -> usize {
    let bps = mcs.order.trailing_zeros() as usize;
    mcs.rate.info_capacity(symbols * bps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutput {
    pub bits: Vec<bool>,
    pub symbols: usize,
}

/// Encode, modulate, transmit, equalize, demodulate and Viterbi-decode.
pub fn coded_link(
    info: &[bool],
    mcs: &McsEntry,
    kind: ChannelKind,
    snr_db: f64,
    seed: u64,
) -> Result<LinkOutput> {
    let qam = build_qam(mcs.order)?;
    let coded = fec_encode(info, mcs.rate)?;
    let bps = qam.bits_per_symbol();
    let mut padded = coded.bits.clone();
    padded.resize(coded.bits.len().div_ceil(bps) * bps, false);
    let tx = modulate(&padded, &qam)?;
    let (rx, vars, erased) = pass_channel(&tx.symbols, kind, snr_db, seed)?;
    let mut llrs = demodulate_soft_per_symbol(&rx, &qam, &vars, &erased)?;
    llrs.truncate(coded.bits.len());
    Ok(LinkOutput {
        bits: fec_decode_soft(&llrs, info.len(), mcs.rate)?,
        symbols: tx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::CodeRate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clean_link_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info: Vec<bool> = (0..5000).map(|_| rng.random()).collect();
        for order in [4, 16, 64, 256] {
            for rate in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters] {
                let mcs = McsEntry {
                    threshold_db: 0.0,
                    order,
                    rate,
                };
                for kind in [ChannelKind::Awgn, ChannelKind::Rayleigh] {
                    let out = coded_link(&info, &mcs, kind, 60.0, 2).unwrap();
                    assert_eq!(out.bits, info);
                    assert_eq!(out.symbols, coded_symbols(info.len(), &mcs));
                }
            }
        }
    }

    #[test]
    fn capacity_inverts_symbol_count() {
        let mcs = McsEntry {
            threshold_db: 0.0,
            order: 16,
            rate: CodeRate::TwoThirds,
        };
        for s in [10, 100, 1234] {
            let n = info_capacity(s, &mcs);
            assert!(coded_symbols(n, &mcs) <= s);
            assert!(coded_symbols(n + 1, &mcs) > s || n == 0);
        }
    }

    #[test]
    fn channel_names() {
        assert_eq!(
            "Rayleigh".parse::<ChannelKind>().unwrap(),
            ChannelKind::Rayleigh
        );
        assert_eq!(ChannelKind::Awgn.to_string(), "awgn");
        assert!("rician".parse::<ChannelKind>().is_err());
    }
}
