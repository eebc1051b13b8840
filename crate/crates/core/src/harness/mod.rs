//! Configuration-driven experiments: sampling and SNR sweeps, the
//! requirements check, and CSV/SVG output.

mod config;
pub mod corpus;
mod pipelines;
mod report;
mod requirements;
mod sweep;

pub use config::{
    CorpusConfig, ExperimentConfig, ExperimentKind, JointConfig, RequirementsInput,
    SAMPLING_METHODS, TRANSMISSION_METHODS,
};
pub use corpus::{synthetic_cloud, synthetic_corpus, Shape};
pub use pipelines::{
    joint_symbol_count, mix_seed, octree_payloads, transmit_joint, transmit_separated, JointModels,
    TrialOutcome, PEAK,
};
pub use report::{csv_string, emit_csv, render_svg, render_svg_plot, CSV_HEADER};
pub use requirements::{
    requirements_check, RequirementItem, RequirementsReport, AIR_LATENCY_MS, END_TO_END_LATENCY_MS,
    PER_TARGET, RATE_FLOOR_BPS, RATE_PEAK_BPS, RATE_TARGET_BPS,
};
pub use sweep::{load_dataset, run_sampling_sweep, run_snr_sweep, SweepResult, SweepRow};

/// Result of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Sweep(SweepResult),
    Requirements(RequirementsReport),
}

/// Runs whatever experiment `config.kind` names.
pub fn run_experiment(config: &ExperimentConfig) -> crate::Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::SamplingSweep => run_sampling_sweep(config).map(ExperimentOutput::Sweep),
        ExperimentKind::SnrSweep => run_snr_sweep(config).map(ExperimentOutput::Sweep),
        ExperimentKind::RequirementsCheck => {
            config.validate()?;
            requirements_check(&config.requirements).map(ExperimentOutput::Requirements)
        }
    }
}
