//! Geometry quality (Chamfer, point-to-point D1, point-to-plane D2) and
//! bit/packet error rates.

use serde::{Deserialize, Serialize};

use crate::cloud::{estimate_normals_with_index, NeighborIndex, Point3, PointCloud};
use crate::error::{Error, Result};

/// Reported in place of an infinite PSNR.
pub const PSNR_CAP_DB: f64 = 999.0;
/// Neighborhood size for normals estimated inside the metrics.
pub const NORMAL_K: usize = 16;

/// How the two directional errors combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    Max,
    Mean,
}

impl Symmetry {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Symmetry::Max => a.max(b),
            Symmetry::Mean => 0.5 * (a + b),
        }
    }
}

pub fn psnr_db(mse: f64, peak: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (3.0 * peak * peak / mse).log10()).min(PSNR_CAP_DB)
    }
}

fn check_peak(peak: f64) -> Result<()> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidPeak(peak));
    }
    Ok(())
}

fn nonempty(a: &PointCloud, b: &PointCloud) -> Result<()> {
    a.require_nonempty()?;
    b.require_nonempty()
}

/// Mean squared distance from each point of `from` to its nearest point in `to`.
fn directional(from: &[Point3], to: &NeighborIndex) -> f64 {
    from.iter().map(|p| to.nearest(p).dist2).sum::<f64>() / from.len() as f64
}

pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    nonempty(a, b)?;
    let ia = NeighborIndex::build(a)?;
    let ib = NeighborIndex::build(b)?;
    Ok(0.5 * (directional(a.positions(), &ib) + directional(b.positions(), &ia)))
}

/// Point-to-point error and its PSNR.
pub fn d1(
    reference: &PointCloud,
    degraded: &PointCloud,
    peak: f64,
    mode: Symmetry,
) -> Result<(f64, f64)> {
    nonempty(reference, degraded)?;
    check_peak(peak)?;
    let ir = NeighborIndex::build(reference)?;
    let id = NeighborIndex::build(degraded)?;
    let mse = mode.combine(
        directional(degraded.positions(), &ir),
        directional(reference.positions(), &id),
    );
    Ok((mse, psnr_db(mse, peak)))
}

/// Per-point errors from `from` into `to`, projected on `to`'s normals. Each
/// term is clamped to its point-to-point value so rounding cannot push it
/// above.
fn plane_errors(from: &[Point3], to: &NeighborIndex, normals: Option<&[Point3]>) -> f64 {
    let pts = to.points();
    let sum: f64 = from
        .iter()
        .map(|p| {
            let nb = to.nearest(p);
            match normals {
                Some(ns) => {
                    let q = pts[nb.index];
                    let n = ns[nb.index];
                    let proj = (p[0] - q[0]) * n[0] + (p[1] - q[1]) * n[1] + (p[2] - q[2]) * n[2];
                    (proj * proj).min(nb.dist2)
                }
                None => nb.dist2,
            }
        })
        .sum();
    sum / from.len() as f64
}

fn unit_normals(normals: &[Point3], expected: usize) -> Result<Vec<Point3>> {
    if normals.len() != expected {
        return Err(Error::NormalsRequired);
    }
    normals
        .iter()
        .map(|n| {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::NormalsRequired);
            }
            Ok([n[0] / len, n[1] / len, n[2] / len])
        })
        .collect()
}

fn estimated_normals(index: &NeighborIndex) -> Result<Option<Vec<Point3>>> {
    if index.len() < 3 {
        return Ok(None);
    }
    Ok(Some(
        estimate_normals_with_index(index, NORMAL_K.min(index.len()))?.vectors,
    ))
}

/// Point-to-plane error and its PSNR. The degraded-to-reference direction
/// uses `reference_normals`; the reverse direction estimates normals on the
/// degraded cloud (falling back to point-to-point below three points).
pub fn d2(
    reference: &PointCloud,
    reference_normals: Option<&[Point3]>,
    degraded: &PointCloud,
    peak: f64,
    mode: Symmetry,
) -> Result<(f64, f64)> {
    let ref_normals = unit_normals(
        reference_normals.ok_or(Error::NormalsRequired)?,
        reference.len(),
    )?;
    nonempty(reference, degraded)?;
    check_peak(peak)?;
    let ir = NeighborIndex::build(reference)?;
    let id = NeighborIndex::build(degraded)?;
    let deg_normals = estimated_normals(&id)?;
    let mse = mode.combine(
        plane_errors(degraded.positions(), &ir, Some(&ref_normals)),
        plane_errors(reference.positions(), &id, deg_normals.as_deref()),
    );
    Ok((mse, psnr_db(mse, peak)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub chamfer: f64,
    pub d1_mse: f64,
    pub d1_psnr_db: f64,
    pub d2_mse: f64,
    pub d2_psnr_db: f64,
    pub peak: f64,
}

impl QualityReport {
    /// All metrics, with reference normals estimated from the reference.
    /// `peak` defaults to the reference's largest bounding-box extent.
    pub fn compute(
        reference: &PointCloud,
        degraded: &PointCloud,
        peak: Option<f64>,
        mode: Symmetry,
    ) -> Result<Self> {
        nonempty(reference, degraded)?;
        let peak = match peak {
            Some(p) => p,
            None => reference.bounding_box()?.peak(),
        };
        check_peak(peak)?;
        let ir = NeighborIndex::build(reference)?;
        let id = NeighborIndex::build(degraded)?;
        let to_ref = directional(degraded.positions(), &ir);
        let to_deg = directional(reference.positions(), &id);
        let d1_mse = mode.combine(to_ref, to_deg);
        let ref_normals = estimated_normals(&ir)?;
        let deg_normals = estimated_normals(&id)?;
        let d2_mse = mode.combine(
            plane_errors(degraded.positions(), &ir, ref_normals.as_deref()),
            plane_errors(reference.positions(), &id, deg_normals.as_deref()),
        );
        Ok(QualityReport {
            chamfer: 0.5 * (to_ref + to_deg),
            d1_mse,
            d1_psnr_db: psnr_db(d1_mse, peak),
            d2_mse,
            d2_psnr_db: psnr_db(d2_mse, peak),
            peak,
        })
    }

    /// Stand-in for a cloud that could not be decoded: every error at `3 p^2`,
    /// so both PSNRs read 0 dB.
    pub fn failure(peak: f64) -> Self {
        let e = 3.0 * peak * peak;
        QualityReport {
            chamfer: e,
            d1_mse: e,
            d1_psnr_db: 0.0,
            d2_mse: e,
            d2_psnr_db: 0.0,
            peak,
        }
    }

    pub const CSV_HEADER: &'static str = "chamfer,d1_mse,d1_psnr,d2_mse,d2_psnr,peak";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.chamfer, self.d1_mse, self.d1_psnr_db, self.d2_mse, self.d2_psnr_db, self.peak
        )
    }
}

fn same_len<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Length(format!("{} vs {} items", a.len(), b.len())));
    }
    Ok(())
}

pub fn ber(sent: &[bool], received: &[bool]) -> Result<f64> {
    same_len(sent, received)?;
    if sent.is_empty() {
        return Ok(0.0);
    }
    Ok(sent.iter().zip(received).filter(|(a, b)| a != b).count() as f64 / sent.len() as f64)
}

pub fn per(sent: &[Vec<bool>], received: &[Vec<bool>]) -> Result<f64> {
    same_len(sent, received)?;
    let mut bad = 0;
    for (s, r) in sent.iter().zip(received) {
        same_len(s, r)?;
        if s != r {
            bad += 1;
        }
    }
    Ok(if sent.is_empty() {
        0.0
    } else {
        bad as f64 / sent.len() as f64
    })
}
