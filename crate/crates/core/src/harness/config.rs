use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{ChannelKind, PartitionRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SamplingSweep,
    SnrSweep,
    RequirementsCheck,
}

/// Synthetic dataset used when no PLY paths are given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub clouds: usize,
    pub points: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            clouds: 20,
            points: 2048,
            seed: 1,
        }
    }
}

/// Knobs of the joint pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JointConfig {
    /// Share of points kept by semantic sampling before feature extraction.
    pub sample_ratio: f64,
    pub centroids: usize,
    pub group_size: usize,
    pub order: usize,
    /// Quantization stages for centroid coordinates; each adds
    /// `sqrt(order)` levels per axis.
    pub stages: usize,
    pub temperature: f64,
    pub partition: PartitionRule,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            sample_ratio: 0.5,
            centroids: 256,
            group_size: 16,
            order: 16,
            stages: 2,
            temperature: 0.02,
            partition: PartitionRule::default(),
        }
    }
}

/// Inputs of the requirements check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementsInput {
    pub points_per_frame: f64,
    pub fps: f64,
    pub bits_per_point: f64,
    pub link_rate_bps: f64,
    pub latency_ms: f64,
    pub per: f64,
}

impl Default for RequirementsInput {
    fn default() -> Self {
        RequirementsInput {
            points_per_frame: 1e6,
            fps: 30.0,
            bits_per_point: 120.0,
            link_rate_bps: 1e11,
            latency_ms: 0.5,
            per: 1e-6,
        }
    }
}

/// Declarative description of one experiment. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// PLY files; the synthetic corpus is used when empty.
    #[serde(default)]
    pub datasets: Vec<PathBuf>,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub methods: Vec<String>,
    #[serde(default)]
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_depth")]
    pub octree_depth: u8,
    #[serde(default)]
    pub mcs_table: Option<PathBuf>,
    #[serde(default)]
    pub sampler_weights: Option<PathBuf>,
    #[serde(default)]
    pub jscc_weights: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Upsample sampled clouds back to full size before scoring.
    #[serde(default)]
    pub reconstruct: bool,
    #[serde(default = "default_channel")]
    pub channel: ChannelKind,
    /// Symbols per cloud available to either scheme.
    #[serde(default = "default_budget")]
    pub symbol_budget: usize,
    #[serde(default)]
    pub joint: JointConfig,
    #[serde(default)]
    pub requirements: RequirementsInput,
    #[serde(default)]
    pub record_timing: bool,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_depth() -> u8 {
    10
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_channel() -> ChannelKind {
    ChannelKind::Rayleigh
}

fn default_budget() -> usize {
    4096
}

pub const SAMPLING_METHODS: [&str; 4] = ["random", "fps", "poisson", "semantic"];
pub const TRANSMISSION_METHODS: [&str; 2] = ["separated", "joint"];

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            datasets: Vec::new(),
            corpus: CorpusConfig::default(),
            methods: Vec::new(),
            ratios: Vec::new(),
            snr_db: Vec::new(),
            seeds: default_seeds(),
            octree_depth: default_depth(),
            mcs_table: None,
            sampler_weights: None,
            jscc_weights: None,
            output_dir: default_output(),
            reconstruct: false,
            channel: default_channel(),
            symbol_budget: default_budget(),
            joint: JointConfig::default(),
            requirements: RequirementsInput::default(),
            record_timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a JSON config. Relative paths inside it, including
    /// the output directory, resolve against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.datasets.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
        for p in [
            &mut self.mcs_table,
            &mut self.sampler_weights,
            &mut self.jscc_weights,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let (grid, name, allowed): (&[f64], &str, &[&str]) = match self.kind {
            ExperimentKind::SamplingSweep => (&self.ratios, "ratios", &SAMPLING_METHODS),
            ExperimentKind::SnrSweep => (&self.snr_db, "snr_db", &TRANSMISSION_METHODS),
            ExperimentKind::RequirementsCheck => return self.validate_files(),
        };
        if grid.is_empty() {
            return bad(format!("{name} must not be empty"));
        }
        if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("{name} must be finite and strictly increasing"));
        }
        if self.kind == ExperimentKind::SamplingSweep
            && grid.iter().any(|&r| !(r > 0.0 && r <= 1.0))
        {
            return bad("ratios must lie in (0, 1]".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if let Some(m) = self.methods.iter().find(|m| !allowed.contains(&m.as_str())) {
            return bad(format!("unknown method {m:?}; expected one of {allowed:?}"));
        }
        if !(1..=crate::cloud::MAX_DEPTH).contains(&self.octree_depth) {
            return bad(format!("octree_depth {} outside 1..=16", self.octree_depth));
        }
        if self.symbol_budget == 0 {
            return bad("symbol_budget must be positive".into());
        }
        let j = &self.joint;
        if !(j.sample_ratio > 0.0 && j.sample_ratio <= 1.0) {
            return bad(format!("joint.sample_ratio {}", j.sample_ratio));
        }
        if j.centroids == 0 || j.group_size == 0 || j.stages == 0 {
            return bad("joint centroids, group_size and stages must be positive".into());
        }
        if !matches!(j.order, 4 | 16 | 64 | 256) {
            return bad(format!("joint.order {}", j.order));
        }
        if self.datasets.is_empty() && (self.corpus.clouds == 0 || self.corpus.points < 16) {
            return bad("corpus needs at least one cloud of 16 points".into());
        }
        self.validate_files()
    }

    fn validate_files(&self) -> Result<()> {
        let optional = [&self.mcs_table, &self.sampler_weights, &self.jscc_weights];
        for p in self.datasets.iter().chain(optional.into_iter().flatten()) {
            if !p.is_file() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }
}
