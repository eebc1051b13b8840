//! Per-cloud transmission chains compared by the SNR sweep.

use num_complex::Complex64;

use super::config::JointConfig;
use crate::cloud::{voxel_centers, voxelize, Point3, PointCloud};
use crate::codec::{
    jscc_decode, jscc_encode, octree_decode, octree_encode, FeatureCode, JsccWeights,
};
use crate::error::Result;
use crate::io::Bitstream;
use crate::metrics::{QualityReport, Symmetry};
use crate::phy::{
    apply_partition, build_qam, coded_link, compute_partition, feature_to_probabilities,
    info_capacity, mcs_select, pass_channel, probabilistic_modulate, ChannelKind, Constellation,
    McsTable,
};
use crate::sampling::layers::FeatureMatrix;
use crate::sampling::{
    sample_semantic, semantic_scores, SamplerWeights, DEFAULT_ITERATIONS, DEFAULT_PATCH_K,
};

/// Clouds are scored in unit-cube coordinates.
pub const PEAK: f64 = 1.0;
const CRC_BITS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub report: QualityReport,
    pub symbols: usize,
    pub bits: usize,
    pub failed: bool,
}

impl TrialOutcome {
    fn failure(symbols: usize, bits: usize) -> Self {
        TrialOutcome {
            report: QualityReport::failure(PEAK),
            symbols,
            bits,
            failed: true,
        }
    }
}

/// Mixes a seed with a stream tag.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Octree payloads for depths `1..=max_depth` (index `depth - 1`).
pub fn octree_payloads(cloud: &PointCloud, max_depth: u8) -> Result<Vec<Vec<u8>>> {
    (1..=max_depth)
        .map(|d| Ok(octree_encode(&voxelize(cloud, d)?.voxels, d)?.into_bytes()))
        .collect()
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    Bitstream::from_bytes(bytes.to_vec()).to_bits()
}

fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    Bitstream::from_bits(bits).into_bytes()
}

/// Octree + arithmetic coding + convolutional code + QAM.
///
/// The deepest octree whose payload and CRC-32 fit in `budget` symbols at the
/// MCS selected for `snr_db` is sent. A CRC mismatch or an undecodable
/// payload counts as a failure.
#[allow(clippy::too_many_arguments)]
pub fn transmit_separated(
    cloud: &PointCloud,
    payloads: &[Vec<u8>],
    table: &McsTable,
    budget: usize,
    kind: ChannelKind,
    snr_db: f64,
    seed: u64,
) -> Result<TrialOutcome> {
    let mcs = mcs_select(snr_db, table)?;
    let capacity = info_capacity(budget, &mcs);
    let Some(payload) = payloads
        .iter()
        .rev()
        .find(|p| p.len() * 8 + CRC_BITS <= capacity)
    else {
        return Ok(TrialOutcome::failure(0, 0));
    };
    let mut info = bytes_to_bits(payload);
    info.extend(bytes_to_bits(&crc32fast::hash(payload).to_be_bytes()));
    let out = coded_link(&info, &mcs, kind, snr_db, seed)?;
    let bits = out.symbols * mcs.order.trailing_zeros() as usize;
    let split = info.len() - CRC_BITS;
    let received = bits_to_bytes(&out.bits[..split]);
    let crc = bits_to_bytes(&out.bits[split..]);
    if crc != crc32fast::hash(&received).to_be_bytes() {
        return Ok(TrialOutcome::failure(out.symbols, bits));
    }
    let stream = Bitstream::from_bytes(received);
    let decoded = match octree_decode(&stream) {
        Ok(v) if !v.is_empty() => v,
        _ => return Ok(TrialOutcome::failure(out.symbols, bits)),
    };
    let depth = stream.bytes()[8];
    let rebuilt = PointCloud::new(voxel_centers(&decoded, depth))?;
    Ok(TrialOutcome {
        report: QualityReport::compute(cloud, &rebuilt, Some(PEAK), Symmetry::Max)?,
        symbols: out.symbols,
        bits,
        failed: false,
    })
}

/// Weights used by the joint chain.
#[derive(Debug, Clone)]
#[derive(Default)]
pub struct JointModels {
    pub sampler: SamplerWeights,
    pub codec: JsccWeights,
}


/// Axis amplitudes in increasing order.
fn axis_levels(c: &Constellation) -> Vec<f64> {
    let mut v: Vec<f64> = c.points().iter().map(|p| p.re).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn nearest_level(levels: &[f64], x: f64) -> usize {
    (0..levels.len())
        .min_by(|&a, &b| (levels[a] - x).abs().total_cmp(&(levels[b] - x).abs()))
        .expect("levels")
}

/// Digits of `x` in `[0, 1]` in base `base`, most significant first.
fn stage_digits(x: f64, base: usize, stages: usize) -> Vec<usize> {
    let cells = (base as f64).powi(stages as i32);
    let mut q = ((x * cells).floor().max(0.0) as u64).min(cells as u64 - 1);
    let mut d = vec![0; stages];
    for slot in d.iter_mut().rev() {
        *slot = (q % base as u64) as usize;
        q /= base as u64;
    }
    d
}

/// Center of the cell named by the received leading digits.
fn from_digits(digits: &[usize], base: usize) -> f64 {
    let mut lo = 0.0;
    let mut width = 1.0;
    for &d in digits {
        width /= base as f64;
        lo += d as f64 * width;
    }
    lo + 0.5 * width
}

/// Symbol layout: centroid coordinate digits stage by stage (coarsest
/// first), then coarse features, then fine features. Each segment is
/// padded to an even number of values so no symbol straddles two segments.
struct Layout {
    stage_len: usize,
    stages: usize,
    coarse_len: usize,
    fine_len: usize,
}

impl Layout {
    fn symbols(len: usize) -> usize {
        len.div_ceil(2)
    }

    fn segment_starts(&self) -> (Vec<usize>, usize, usize, usize) {
        let s = Self::symbols(self.stage_len);
        let stage_starts: Vec<usize> = (0..self.stages).map(|i| i * s).collect();
        let coarse = self.stages * s;
        let fine = coarse + Self::symbols(self.coarse_len);
        (
            stage_starts,
            coarse,
            fine,
            fine + Self::symbols(self.fine_len),
        )
    }
}

fn push_segment(values: &mut Vec<f64>, segment: &[f64]) {
    values.extend_from_slice(segment);
    if segment.len() % 2 == 1 {
        values.push(0.0);
    }
}

fn value_at(received: &[Option<Complex64>], start: usize, k: usize) -> Option<f64> {
    received
        .get(start + k / 2)
        .copied()
        .flatten()
        .map(|z| if k.is_multiple_of(2) { z.re } else { z.im })
}

/// Semantic sampling + learned feature codec + probabilistic shaping with an
/// SNR-adaptive partition point.
///
/// At most `budget` symbols are sent. Lost refinement digits fall back to
/// the cell midpoint and lost features to zero.
#[allow(clippy::too_many_arguments)]
pub fn transmit_joint(
    cloud: &PointCloud,
    models: &JointModels,
    cfg: &JointConfig,
    budget: usize,
    kind: ChannelKind,
    snr_db: f64,
    seed: u64,
) -> Result<TrialOutcome> {
    let n = cloud.len();
    let sample = sample_semantic(
        cloud,
        cfg.sample_ratio,
        &models.sampler,
        DEFAULT_PATCH_K,
        DEFAULT_ITERATIONS,
    )?;
    let m = cfg.centroids.min(sample.cloud.len());
    let code = jscc_encode(&sample.cloud, &models.codec, m, cfg.group_size, 0)?;

    let qam = build_qam(cfg.order)?;
    let levels = axis_levels(&qam);
    let base = levels.len();
    let amp = levels[base - 1];
    let peak_feature = code
        .coarse
        .as_slice()
        .iter()
        .chain(code.fine.as_slice())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    // shared with the receiver as side information
    let scale = if peak_feature > 0.0 {
        peak_feature / amp
    } else {
        1.0
    };

    let layout = Layout {
        stage_len: 3 * m,
        stages: cfg.stages,
        coarse_len: code.coarse.as_slice().len(),
        fine_len: code.fine.as_slice().len(),
    };
    let digits: Vec<Vec<usize>> = code
        .centroids
        .iter()
        .flat_map(|c| c.iter().map(|&x| stage_digits(x, base, cfg.stages)))
        .collect();
    let mut values = Vec::new();
    for s in 0..cfg.stages {
        let seg: Vec<f64> = digits.iter().map(|d| levels[d[s]]).collect();
        push_segment(&mut values, &seg);
    }
    let scaled = |f: &FeatureMatrix| f.as_slice().iter().map(|v| v / scale).collect::<Vec<f64>>();
    push_segment(&mut values, &scaled(&code.coarse));
    push_segment(&mut values, &scaled(&code.fine));

    let rows = feature_to_probabilities(&values, &qam, cfg.temperature)?;
    let count = rows.len();
    let scores = semantic_scores(&code.coarse)?;
    let p = compute_partition(&scores, count, &cfg.partition, Some(snr_db))?.min(budget);
    let stream = apply_partition(&probabilistic_modulate(&rows, &qam, mix_seed(seed, 1))?, p)?;

    let (eq, _, erased) = pass_channel(&stream.symbols, kind, snr_db, mix_seed(seed, 2))?;
    let received: Vec<Option<Complex64>> = eq
        .iter()
        .zip(&erased)
        .map(|(&y, &e)| (!e).then(|| qam.point(qam.nearest_label(y))))
        .collect();

    let (stage_starts, coarse_start, fine_start, _) = layout.segment_starts();
    let centroids: Vec<Point3> = (0..m)
        .map(|i| {
            std::array::from_fn(|a| {
                let k = 3 * i + a;
                let known: Vec<usize> = stage_starts
                    .iter()
                    .map_while(|&st| value_at(&received, st, k).map(|v| nearest_level(&levels, v)))
                    .collect();
                from_digits(&known, base)
            })
        })
        .collect();
    let features = |start: usize, rows: usize, dim: usize| {
        let data = (0..rows * dim)
            .map(|k| value_at(&received, start, k).map_or(0.0, |v| v * scale))
            .collect();
        FeatureMatrix::from_flat(rows, dim, data)
    };
    let rx = FeatureCode {
        centroids,
        coarse: features(coarse_start, m, code.coarse.dim())?,
        fine: features(fine_start, m, code.fine.dim())?,
    };
    let decoded = jscc_decode(&rx, &models.codec, n.max(m))?;
    Ok(TrialOutcome {
        report: QualityReport::compute(cloud, &decoded, Some(PEAK), Symmetry::Max)?,
        symbols: p,
        bits: p * qam.bits_per_symbol(),
        failed: false,
    })
}

/// Symbols the joint chain would need before partitioning.
pub fn joint_symbol_count(cfg: &JointConfig, centroids: usize, codec: &JsccWeights) -> usize {
    let layout = Layout {
        stage_len: 3 * centroids,
        stages: cfg.stages,
        coarse_len: centroids * codec.coarse_dim(),
        fine_len: centroids * codec.fine_dim(),
    };
    layout.segment_starts().3
}
