//! Features as constellation probabilities, and how the partition point
//! shrinks with SNR.

use holosim::phy::{
    apply_partition, build_qam, compute_partition, feature_to_probabilities,
    probabilistic_modulate, PartitionRule,
};

fn main() -> holosim::Result<()> {
    let c = build_qam(16)?;
    let features: Vec<f64> = (0..64).map(|i| (i as f64 * 0.4).sin()).collect();
    let rows = feature_to_probabilities(&features, &c, 0.1)?;
    let stream = probabilistic_modulate(&rows, &c, 7)?;
    println!("{} features -> {} symbols", features.len(), stream.len());

    let rule = PartitionRule::default();
    let scores = [0.3, 0.5, 0.4];
    for snr in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let p = compute_partition(&scores, stream.len(), &rule, Some(snr))?;
        let sent = apply_partition(&stream, p)?;
        println!(
            "snr {snr:4.1} dB: send {} of {}",
            sent.len(),
            sent.original_len
        );
    }
    Ok(())
}
