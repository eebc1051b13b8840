//! Gray-coded QAM over AWGN and Rayleigh fading, hard decisions.

use holosim::phy::{
    build_qam, channel_awgn, channel_rayleigh, demodulate_hard, equalize_csi, modulate,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> holosim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<bool> = (0..240_000).map(|_| rng.random()).collect();
    let ber = |rx: &[bool]| {
        rx.iter().zip(&bits).filter(|(a, b)| a != b).count() as f64 / bits.len() as f64
    };
    println!("order  snr   awgn BER   rayleigh BER");
    for order in [4, 16, 64] {
        let c = build_qam(order)?;
        let tx = modulate(&bits, &c)?;
        for snr in [5.0, 15.0, 25.0] {
            let awgn = demodulate_hard(&channel_awgn(&tx.symbols, snr, 1), &c);
            let (y, h) = channel_rayleigh(&tx.symbols, snr, 2);
            let fading = demodulate_hard(&equalize_csi(&y, &h)?.symbols, &c);
            println!(
                "{order:5} {snr:4.0}  {:.3e}  {:.3e}",
                ber(&awgn),
                ber(&fading)
            );
        }
    }
    Ok(())
}
