use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SemanticMap;

use crate::cloud::{
    estimate_normals_with_index, NeighborIndex, Point3, PointCloud, DEFAULT_NORMAL,
};
use crate::error::{Error, Result};

const NORMAL_K: usize = 8;

/// Grows the sampled cloud back to `target_n` points.
///
/// Each kept point receives a share of the missing points proportional to its
/// final score and scatters them uniformly over a disc in its tangent plane,
/// with radius half the distance to its nearest kept neighbor. The kept
/// points come first in the output.
pub fn reconstruct_upsample(
    sampled: &PointCloud,
    map: &SemanticMap,
    target_n: usize,
    seed: u64,
) -> Result<PointCloud> {
    let m = sampled.len();
    if target_n < m {
        return Err(Error::TargetTooSmall {
            target: target_n,
            sampled: m,
        });
    }
    let scores = map.final_scores();
    if scores.len() != m {
        return Err(Error::InvalidParameter(format!(
            "semantic map covers {} points, sampled cloud has {m}",
            scores.len()
        )));
    }
    if target_n == m {
        return Ok(sampled.clone());
    }
    sampled.require_nonempty()?;
    let budget = apportion(&scores, target_n - m);
    let index = NeighborIndex::build(sampled)?;
    let normals = if m >= 3 {
        estimate_normals_with_index(&index, NORMAL_K.min(m))?.vectors
    } else {
        vec![DEFAULT_NORMAL; m]
    };
    let pts = sampled.positions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = pts.to_vec();
    out.reserve(target_n - m);
    for (i, p) in pts.iter().enumerate() {
        if budget[i] == 0 {
            continue;
        }
        let radius = if m > 1 {
            0.5 * index.knn(p, 2)?[1].dist2.sqrt()
        } else {
            0.0
        };
        let (u, v) = tangent_basis(&normals[i]);
        for _ in 0..budget[i] {
            let rho = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let (s, c) = theta.sin_cos();
            out.push(std::array::from_fn(|a| p[a] + rho * (c * u[a] + s * v[a])));
        }
    }
    PointCloud::new(out)
}

/// Largest-remainder split of `total` by `weights`; equal remainders go to the
/// lower index. All-zero weights split evenly.
pub(crate) fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let w: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|x| x / sum).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    };
    let quotas: Vec<f64> = w.iter().map(|x| x * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn tangent_basis(n: &Point3) -> (Point3, Point3) {
    // axis least aligned with the normal
    let mut axis = 0;
    for a in 1..3 {
        if n[a].abs() < n[axis].abs() {
            axis = a;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let u = normalize(cross(n, &e));
    let v = cross(n, &u);
    (u, v)
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
