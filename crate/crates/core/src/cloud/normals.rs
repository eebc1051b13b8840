use nalgebra::{Matrix3, SymmetricEigen};

use super::{NeighborIndex, Point3, PointCloud};
use crate::error::{Error, Result};

/// Normal assigned to points whose neighborhood has collapsed to one position.
pub const DEFAULT_NORMAL: Point3 = [0.0, 0.0, 1.0];

/// Unit normals plus a flag for neighborhoods that were degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct Normals {
    pub vectors: Vec<Point3>,
    pub degenerate: Vec<bool>,
}

/// PCA normals: smallest-eigenvalue eigenvector of each point's k-neighborhood
/// covariance (the point itself included), oriented so the largest-magnitude
/// component is non-negative.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<Normals> {
    if k < 3 || cloud.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k.max(3),
            available: cloud.len(),
        });
    }
    let index = NeighborIndex::build(cloud)?;
    estimate_normals_with_index(&index, k)
}

pub fn estimate_normals_with_index(index: &NeighborIndex, k: usize) -> Result<Normals> {
    if k < 3 || index.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k.max(3),
            available: index.len(),
        });
    }
    let points = index.points();
    let mut vectors = Vec::with_capacity(points.len());
    let mut degenerate = Vec::with_capacity(points.len());
    for p in points {
        let hood = index.knn(p, k)?;
        let mut mean = [0.0; 3];
        for n in &hood {
            for a in 0..3 {
                mean[a] += points[n.index][a];
            }
        }
        for m in &mut mean {
            *m /= k as f64;
        }
        let mut cov = Matrix3::<f64>::zeros();
        let mut spread = 0.0f64;
        for n in &hood {
            let q = points[n.index];
            let d = [q[0] - mean[0], q[1] - mean[1], q[2] - mean[2]];
            for r in 0..3 {
                spread = spread.max(d[r].abs());
                for c in 0..3 {
                    cov[(r, c)] += d[r] * d[c];
                }
            }
        }
        if spread == 0.0 {
            vectors.push(DEFAULT_NORMAL);
            degenerate.push(true);
            continue;
        }
        cov /= k as f64;
        vectors.push(smallest_eigenvector(cov));
        degenerate.push(false);
    }
    Ok(Normals {
        vectors,
        degenerate,
    })
}

fn smallest_eigenvector(cov: Matrix3<f64>) -> Point3 {
    let eig = SymmetricEigen::new(cov);
    let mut best = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best);
    let norm = v.norm();
    let mut n = [v[0] / norm, v[1] / norm, v[2] / norm];
    let mut major = 0;
    for a in 1..3 {
        if n[a].abs() > n[major].abs() {
            major = a;
        }
    }
    if n[major] < 0.0 {
        for c in &mut n {
            *c = -*c;
        }
    }
    n
}
