//! Derives the bundled MCS tables.
//!
//! For every modulation order and code rate, the SNR is raised in 0.5 dB steps
//! until 10^6 information bits pass the coded link without a single error;
//! the threshold is that SNR plus a 0.5 dB margin. Entries that do not raise
//! throughput over a cheaper threshold are dropped.
//!
//! ```text
//! cargo run --release --example calibrate_mcs -- crates/core/data
//! ```

use std::path::PathBuf;

use holosim::codec::CodeRate;
use holosim::phy::{coded_link, ChannelKind, McsEntry, McsTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCK: usize = 10_000;
const BLOCKS: usize = 100;
const STEP_DB: f64 = 0.5;
const MARGIN_DB: f64 = 0.5;

fn error_free(mcs: &McsEntry, kind: ChannelKind, snr: f64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA11 ^ (snr * 10.0) as u64);
    for b in 0..BLOCKS {
        let info: Vec<bool> = (0..BLOCK).map(|_| rng.random()).collect();
        let out = coded_link(&info, mcs, kind, snr, 1000 + b as u64).expect("valid MCS");
        if out.bits != info {
            return false;
        }
    }
    true
}

fn threshold(order: usize, rate: CodeRate, kind: ChannelKind) -> f64 {
    let mcs = McsEntry {
        threshold_db: 0.0,
        order,
        rate,
    };
    let mut snr = -4.0;
    while !error_free(&mcs, kind, snr) {
        snr += STEP_DB;
    }
    snr + MARGIN_DB
}

fn table(kind: ChannelKind) -> McsTable {
    let combos: Vec<(usize, CodeRate)> = [4, 16, 64, 256]
        .into_iter()
        .flat_map(|o| {
            [CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters].map(|r| (o, r))
        })
        .collect();
    let mut entries: Vec<McsEntry> = combos
        .par_iter()
        .map(|&(order, rate)| McsEntry {
            threshold_db: threshold(order, rate, kind),
            order,
            rate,
        })
        .collect();
    entries.sort_by(|a, b| {
        a.threshold_db
            .total_cmp(&b.threshold_db)
            .then(b.spectral_efficiency().total_cmp(&a.spectral_efficiency()))
    });
    let mut kept: Vec<McsEntry> = Vec::new();
    for e in entries {
        if kept
            .last()
            .is_none_or(|k| e.spectral_efficiency() > k.spectral_efficiency())
        {
            kept.push(e);
        }
    }
    McsTable::new(kept).expect("non-empty")
}

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from);
    for kind in [ChannelKind::Awgn, ChannelKind::Rayleigh] {
        let text = format!(
            "# calibrated over {kind}: first 0.5 dB step with zero errors in 10^6 coded bits, plus 0.5 dB\n{}",
            table(kind).to_text()
        );
        match &dir {
            Some(d) => {
                let path = d.join(format!("mcs_{kind}.txt"));
                std::fs::write(&path, &text).expect("write table");
                println!("wrote {}", path.display());
            }
            None => print!("{text}"),
        }
    }
}
