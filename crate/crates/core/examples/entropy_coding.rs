//! Adaptive binary arithmetic coding of skewed and uniform bytes.

use holosim::codec::{entropy_decode, entropy_encode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> holosim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let skewed: Vec<u8> = (0..10_000)
        .map(|_| {
            if rng.random::<f64>() < 0.9 {
                0
            } else {
                rng.random()
            }
        })
        .collect();
    let uniform: Vec<u8> = (0..10_000).map(|_| rng.random()).collect();
    for (name, data) in [("skewed", skewed), ("uniform", uniform)] {
        let coded = entropy_encode(&data)?;
        let back = entropy_decode(&coded, data.len())?;
        println!(
            "{name:8} {} -> {} bytes ({:.3} bits/byte), lossless {}",
            data.len(),
            coded.bytes().len(),
            coded.bit_len() as f64 / data.len() as f64,
            back == data
        );
    }
    Ok(())
}
