//! K=7 convolutional code at three rates over noisy soft bits.

use holosim::codec::{fec_decode_soft, fec_encode, CodeRate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> holosim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let info: Vec<bool> = (0..20_000).map(|_| rng.random()).collect();
    let noise = Normal::new(0.0, 0.55).expect("valid sigma");
    for rate in [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters] {
        let coded = fec_encode(&info, rate)?;
        // BPSK: bit 0 -> +1; the LLR sign convention is positive for 0
        let llrs: Vec<f64> = coded
            .bits
            .iter()
            .map(|&b| if b { -1.0 } else { 1.0 } + noise.sample(&mut rng))
            .collect();
        let raw = llrs
            .iter()
            .zip(&coded.bits)
            .filter(|(l, b)| (**l < 0.0) != **b)
            .count();
        let decoded = fec_decode_soft(&llrs, info.len(), rate)?;
        let errs = decoded.iter().zip(&info).filter(|(a, b)| a != b).count();
        println!(
            "rate {rate}: {} coded bits, {raw} channel errors, {errs} after Viterbi",
            coded.bits.len()
        );
    }
    Ok(())
}
