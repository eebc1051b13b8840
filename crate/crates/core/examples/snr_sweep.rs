//! Separated versus joint transmission over Rayleigh fading on a small corpus.

use holosim::harness::{run_snr_sweep, ExperimentConfig, ExperimentKind, TRANSMISSION_METHODS};

fn main() -> holosim::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SnrSweep);
    cfg.methods = TRANSMISSION_METHODS.map(String::from).to_vec();
    cfg.snr_db = vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0];
    cfg.seeds = vec![0, 1];
    cfg.corpus.clouds = 5;
    let r = run_snr_sweep(&cfg)?;
    println!("snr   separated D1 (fail)   joint D1");
    for &snr in &cfg.snr_db {
        let sep = r
            .mean_of("separated", snr, |row| row.report.d1_psnr_db)
            .unwrap_or(f64::NAN);
        let fail = r
            .mean_of("separated", snr, |row| row.failed)
            .unwrap_or(f64::NAN);
        let joint = r
            .mean_of("joint", snr, |row| row.report.d1_psnr_db)
            .unwrap_or(f64::NAN);
        println!(
            "{snr:4.0}  {sep:8.2} dB ({:3.0}%)   {joint:6.2} dB",
            fail * 100.0
        );
    }
    Ok(())
}
