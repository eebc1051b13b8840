//! Score-driven down-sampling, the classical baselines, and map-guided
//! upsampling at the receiver.

mod baselines;
pub mod layers;
mod reconstruct;
mod weights;

pub use baselines::{sample_fps, sample_poisson, sample_poisson_count, sample_random};
pub use layers::{
    build_patches, local_attention, max_pool, AttentionBlock, Dense, FeatureMatrix, Mlp, Patch,
};
pub use reconstruct::reconstruct_upsample;
pub(crate) use weights::{read_layers, write_layers};
pub use weights::{SamplerWeights, DEFAULT_EMBED_DIM, DEFAULT_WEIGHTS_SEED, WEIGHTS_MAGIC};

use crate::cloud::{BoundingBox, Point3, PointCloud};
use crate::error::{Error, Result};

/// Default patch size of the semantic sampler.
pub const DEFAULT_PATCH_K: usize = 4;
/// Default number of down-sampling rounds.
pub const DEFAULT_ITERATIONS: usize = 4;

/// Scores and selections of one down-sampling round. Indices refer to the
/// original cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct MapIteration {
    pub input: Vec<usize>,
    pub scores: Vec<f64>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    pub iterations: Vec<MapIteration>,
}

impl SemanticMap {
    /// A flat map for samplers that produce no scores: every kept point
    /// weighs the same.
    pub fn uniform(indices: &[usize]) -> Self {
        SemanticMap {
            iterations: vec![MapIteration {
                input: indices.to_vec(),
                scores: vec![1.0; indices.len()],
                selected: indices.to_vec(),
            }],
        }
    }

    /// Original indices of the final selection, ascending.
    pub fn selected(&self) -> &[usize] {
        self.iterations.last().map_or(&[], |it| &it.selected)
    }

    /// Last-round score of each finally selected point, aligned with
    /// [`SemanticMap::selected`].
    pub fn final_scores(&self) -> Vec<f64> {
        let Some(last) = self.iterations.last() else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(last.selected.len());
        let mut j = 0;
        for &s in &last.selected {
            while last.input[j] != s {
                j += 1;
            }
            out.push(last.scores[j]);
        }
        out
    }

    /// Size of the side information shared with the receiver: a 32-bit index
    /// and a 32-bit score per kept point.
    pub fn side_info_bits(&self) -> u64 {
        self.selected().len() as u64 * 64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSample {
    pub cloud: PointCloud,
    pub indices: Vec<usize>,
    pub map: SemanticMap,
}

pub fn embed_points(cloud: &PointCloud, weights: &SamplerWeights) -> Result<FeatureMatrix> {
    embed_positions(cloud.positions(), weights)
}

fn embed_positions(points: &[Point3], weights: &SamplerWeights) -> Result<FeatureMatrix> {
    let x = FeatureMatrix::from_flat(points.len(), 3, points.iter().flatten().copied().collect())?;
    weights.embedding.forward_matrix(&x)
}

/// Channel standard deviation of each row divided by the largest one.
pub fn semantic_scores(features: &FeatureMatrix) -> Result<Vec<f64>> {
    let d = features.dim();
    if d < 2 {
        return Err(Error::FeatureDimTooSmall(d));
    }
    let raw: Vec<f64> = (0..features.rows())
        .map(|i| {
            let row = features.row(i);
            let mean = row.iter().sum::<f64>() / d as f64;
            (row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64).sqrt()
        })
        .collect();
    let max = raw.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        Ok(raw.iter().map(|s| s / max).collect())
    } else {
        Ok(vec![0.0; raw.len()])
    }
}

/// The `m` highest scores, equal scores going to the lower index; returned
/// ascending.
pub fn top_m_select(scores: &[f64], m: usize) -> Result<Vec<usize>> {
    if m > scores.len() {
        return Err(Error::InsufficientPoints {
            needed: m,
            available: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(m);
    order.sort_unstable();
    Ok(order)
}

/// Iterative semantic down-sampling to `round(ratio * N)` points.
///
/// Each round embeds the surviving points, refines the embeddings with patch
/// attention, scores them and keeps the top share `ratio^(1/iterations)`; the
/// last round lands exactly on the target. Coordinates are mapped into the
/// unit cube before embedding so the result does not depend on cloud scale.
pub fn sample_semantic(
    cloud: &PointCloud,
    ratio: f64,
    weights: &SamplerWeights,
    k: usize,
    iterations: usize,
) -> Result<SemanticSample> {
    let n = cloud.len();
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    if k == 0 || iterations == 0 {
        return Err(Error::InvalidParameter(
            "patch size and iteration count must be positive".into(),
        ));
    }
    let target = (ratio * n as f64).round() as usize;
    if target == 0 {
        return Err(Error::InvalidRatio(ratio));
    }
    let scaled = unit_scaled(cloud);
    let keep = ratio.powf(1.0 / iterations as f64);
    let mut current: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(iterations);
    for it in 0..iterations {
        let m = if it + 1 == iterations {
            target
        } else {
            target.max((current.len() as f64 * keep).round() as usize)
        };
        let pts: Vec<Point3> = current.iter().map(|&i| scaled[i]).collect();
        let features = embed_positions(&pts, weights)?;
        let patches = build_patches(&pts, k.min(pts.len()))?;
        let (refined, _) = local_attention(&features, &patches, &weights.attention)?;
        let scores = semantic_scores(&refined)?;
        let chosen: Vec<usize> = top_m_select(&scores, m)?
            .into_iter()
            .map(|j| current[j])
            .collect();
        rounds.push(MapIteration {
            input: current,
            scores,
            selected: chosen.clone(),
        });
        current = chosen;
    }
    Ok(SemanticSample {
        cloud: cloud.select(&current),
        indices: current,
        map: SemanticMap { iterations: rounds },
    })
}

fn unit_scaled(cloud: &PointCloud) -> Vec<Point3> {
    let Ok(bb) = BoundingBox::of(cloud.positions()) else {
        return cloud.positions().to_vec();
    };
    let peak = bb.peak();
    if !(peak > 0.0) {
        return cloud.positions().to_vec();
    }
    cloud
        .positions()
        .iter()
        .map(|p| std::array::from_fn(|a| (p[a] - bb.min[a]) / peak))
        .collect()
}
