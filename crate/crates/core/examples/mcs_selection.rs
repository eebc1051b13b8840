//! Bundled MCS tables and the entry chosen at each SNR.

use holosim::phy::{mcs_select, McsTable};

fn main() -> holosim::Result<()> {
    for (name, table) in [
        ("awgn", McsTable::awgn()),
        ("rayleigh", McsTable::rayleigh()),
    ] {
        println!("{name}:");
        for snr in (0..=40).step_by(5) {
            let e = mcs_select(snr as f64, &table)?;
            println!(
                "  {snr:2} dB -> {:3}-QAM rate {} ({:.2} bits/symbol)",
                e.order,
                e.rate,
                e.spectral_efficiency()
            );
        }
    }
    Ok(())
}
