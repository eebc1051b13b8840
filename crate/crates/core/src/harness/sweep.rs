use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::corpus::synthetic_corpus;
use super::pipelines::{
    mix_seed, octree_payloads, transmit_joint, transmit_separated, JointModels, TrialOutcome, PEAK,
};
use crate::cloud::{normalize_unit_cube, PointCloud};
use crate::codec::JsccWeights;
use crate::error::{Error, Result};
use crate::io::read_ply;
use crate::metrics::{QualityReport, Symmetry};
use crate::phy::{ChannelKind, McsTable};
use crate::sampling::{
    reconstruct_upsample, sample_fps, sample_poisson_count, sample_random, sample_semantic,
    SamplerWeights, SemanticMap, DEFAULT_ITERATIONS, DEFAULT_PATCH_K,
};

/// One cell of a sweep: metrics averaged over the dataset, counts summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub param: f64,
    pub seed: u64,
    pub report: QualityReport,
    pub symbols: usize,
    pub bits: usize,
    /// Share of clouds that could not be decoded.
    pub failed: f64,
    pub wall_ms: f64,
    /// Reference points across the dataset.
    pub points: usize,
}

impl SweepRow {
    pub fn symbols_per_point(&self) -> f64 {
        self.symbols as f64 / self.points.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows of `method` at `param`, across seeds.
    pub fn cell(&self, method: &str, param: f64) -> impl Iterator<Item = &SweepRow> {
        let method = method.to_string();
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.param == param)
    }

    /// Mean of `f` over the seeds of one (method, param) cell.
    pub fn mean_of(&self, method: &str, param: f64, f: impl Fn(&SweepRow) -> f64) -> Option<f64> {
        let v: Vec<f64> = self.cell(method, param).map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Configured PLY files scaled into the unit cube, or the synthetic corpus.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Vec<PointCloud>> {
    if cfg.datasets.is_empty() {
        let c = &cfg.corpus;
        return Ok(synthetic_corpus(c.clouds, c.points, c.seed)?
            .into_iter()
            .map(|(_, cloud)| cloud)
            .collect());
    }
    cfg.datasets
        .iter()
        .map(|p| Ok(normalize_unit_cube(&read_ply(p)?)?.0))
        .collect()
}

fn sampler_weights(cfg: &ExperimentConfig) -> Result<SamplerWeights> {
    cfg.sampler_weights
        .as_ref()
        .map_or_else(|| Ok(SamplerWeights::default()), SamplerWeights::load)
}

fn jscc_weights(cfg: &ExperimentConfig) -> Result<JsccWeights> {
    cfg.jscc_weights
        .as_ref()
        .map_or_else(|| Ok(JsccWeights::default()), JsccWeights::load)
}

fn mcs_table(cfg: &ExperimentConfig) -> Result<McsTable> {
    match &cfg.mcs_table {
        Some(p) => McsTable::load(p),
        None => Ok(match cfg.channel {
            ChannelKind::Awgn => McsTable::awgn(),
            ChannelKind::Rayleigh => McsTable::rayleigh(),
        }),
    }
}

fn mean_report(reports: &[QualityReport]) -> QualityReport {
    let n = reports.len().max(1) as f64;
    let avg = |f: fn(&QualityReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    QualityReport {
        chamfer: avg(|r| r.chamfer),
        d1_mse: avg(|r| r.d1_mse),
        d1_psnr_db: avg(|r| r.d1_psnr_db),
        d2_mse: avg(|r| r.d2_mse),
        d2_psnr_db: avg(|r| r.d2_psnr_db),
        peak: PEAK,
    }
}

fn cells(cfg: &ExperimentConfig, grid: &[f64]) -> Vec<(String, f64, u64)> {
    let mut v = Vec::new();
    for m in &cfg.methods {
        for &p in grid {
            for &s in &cfg.seeds {
                v.push((m.clone(), p, s));
            }
        }
    }
    v
}

fn run_cells<F>(
    cfg: &ExperimentConfig,
    grid: &[f64],
    sizes: &[usize],
    trial: F,
) -> Result<SweepResult>
where
    F: Fn(&str, f64, u64, usize) -> Result<TrialOutcome> + Sync,
{
    let mut rows = cells(cfg, grid)
        .into_par_iter()
        .map(|(method, param, seed)| {
            let start = Instant::now();
            let clouds = sizes.len();
            let outcomes = (0..clouds)
                .map(|i| trial(&method, param, seed, i))
                .collect::<Result<Vec<_>>>()?;
            let reports: Vec<QualityReport> = outcomes.iter().map(|o| o.report).collect();
            let failed = outcomes.iter().filter(|o| o.failed).count() as f64 / clouds.max(1) as f64;
            let row = SweepRow {
                report: mean_report(&reports),
                symbols: outcomes.iter().map(|o| o.symbols).sum(),
                bits: outcomes.iter().map(|o| o.bits).sum(),
                failed,
                wall_ms: if cfg.record_timing {
                    start.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                },
                points: sizes.iter().sum(),
                method,
                param,
                seed,
            };
            log::debug!(
                "{} @ {} seed {}: {} symbols, {} bits, D1 {:.2} dB",
                row.method,
                row.param,
                row.seed,
                row.symbols,
                row.bits,
                row.report.d1_psnr_db
            );
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.param.total_cmp(&b.param))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(SweepResult { rows })
}

fn require_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "expected a {kind:?} config, got {:?}",
            cfg.kind
        )));
    }
    Ok(())
}

/// Samples every cloud with each method at each ratio and scores the sample
/// (or its upsampled reconstruction) against the full cloud.
pub fn run_sampling_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    require_kind(cfg, ExperimentKind::SamplingSweep)?;
    let clouds = load_dataset(cfg)?;
    let weights = sampler_weights(cfg)?;
    let sizes: Vec<usize> = clouds.iter().map(PointCloud::len).collect();
    run_cells(cfg, &cfg.ratios, &sizes, |method, ratio, seed, i| {
        let cloud = &clouds[i];
        let n = cloud.len();
        let m = ((ratio * n as f64).round() as usize).clamp(1, n);
        let s = mix_seed(seed, i as u64);
        let (indices, map) = match method {
            "semantic" => {
                let out = sample_semantic(
                    cloud,
                    m as f64 / n as f64,
                    &weights,
                    DEFAULT_PATCH_K,
                    DEFAULT_ITERATIONS,
                )?;
                (out.indices, Some(out.map))
            }
            "fps" => (sample_fps(cloud, m, (s % n as u64) as usize)?, None),
            "random" => (sample_random(cloud, m, s)?, None),
            "poisson" => (sample_poisson_count(cloud, m, s)?, None),
            other => return Err(Error::Config(format!("unknown sampling method {other:?}"))),
        };
        let mut sampled = cloud.select(&indices);
        if cfg.reconstruct {
            let map = map.unwrap_or_else(|| SemanticMap::uniform(&indices));
            sampled = reconstruct_upsample(&sampled, &map, n, s)?;
        }
        Ok(TrialOutcome {
            report: QualityReport::compute(cloud, &sampled, Some(PEAK), Symmetry::Max)?,
            symbols: 0,
            bits: indices.len() * 96,
            failed: false,
        })
    })
}

/// Runs the separated and joint chains over the configured channel at each
/// SNR with a common symbol budget per cloud.
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    require_kind(cfg, ExperimentKind::SnrSweep)?;
    let clouds = load_dataset(cfg)?;
    let table = mcs_table(cfg)?;
    let models = JointModels {
        sampler: sampler_weights(cfg)?,
        codec: jscc_weights(cfg)?,
    };
    let payloads: Vec<Vec<Vec<u8>>> = if cfg.methods.iter().any(|m| m == "separated") {
        clouds
            .par_iter()
            .map(|c| octree_payloads(c, cfg.octree_depth))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let sizes: Vec<usize> = clouds.iter().map(PointCloud::len).collect();
    run_cells(cfg, &cfg.snr_db, &sizes, |method, snr, seed, i| {
        // same channel realization for both schemes
        let s = mix_seed(mix_seed(seed, i as u64), snr.to_bits());
        match method {
            "separated" => transmit_separated(
                &clouds[i],
                &payloads[i],
                &table,
                cfg.symbol_budget,
                cfg.channel,
                snr,
                s,
            ),
            "joint" => transmit_joint(
                &clouds[i],
                &models,
                &cfg.joint,
                cfg.symbol_budget,
                cfg.channel,
                snr,
                s,
            ),
            other => Err(Error::Config(format!(
                "unknown transmission method {other:?}"
            ))),
        }
    })
}
