//! Reduced sampling-ratio sweep over the synthetic corpus.

use holosim::harness::{
    csv_string, run_sampling_sweep, ExperimentConfig, ExperimentKind, SAMPLING_METHODS,
};

fn main() -> holosim::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SamplingSweep);
    cfg.methods = SAMPLING_METHODS.map(String::from).to_vec();
    cfg.ratios = vec![0.0625, 0.125, 0.25];
    cfg.seeds = vec![0, 1, 2];
    cfg.corpus.clouds = 5;
    let result = run_sampling_sweep(&cfg)?;
    print!("{}", csv_string(&result));
    Ok(())
}
