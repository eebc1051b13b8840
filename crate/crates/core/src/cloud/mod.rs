//! Point-cloud container and the geometric primitives every other stage uses:
//! exact neighbor search, PCA normals, unit-cube normalization and voxelization.

mod kdtree;
mod normals;

pub use kdtree::{Neighbor, NeighborIndex};
pub use normals::{estimate_normals, estimate_normals_with_index, Normals, DEFAULT_NORMAL};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];
pub type Rgb = [u8; 3];

#[inline]
pub fn dist2(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// A set of 3D positions with optional per-point RGB colors.
///
/// Coordinates are always finite; `colors`, when present, has one entry per
/// position.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    positions: Vec<Point3>,
    colors: Option<Vec<Rgb>>,
}

impl PointCloud {
    pub fn new(positions: Vec<Point3>) -> Result<Self> {
        if let Some(index) = positions
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(PointCloud {
            positions,
            colors: None,
        })
    }

    pub fn with_colors(positions: Vec<Point3>, colors: Vec<Rgb>) -> Result<Self> {
        if colors.len() != positions.len() {
            return Err(Error::InvalidCloud(format!(
                "{} colors for {} positions",
                colors.len(),
                positions.len()
            )));
        }
        let mut cloud = PointCloud::new(positions)?;
        cloud.colors = Some(colors);
        Ok(cloud)
    }

    pub fn empty() -> Self {
        PointCloud::default()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn into_positions(self) -> Vec<Point3> {
        self.positions
    }

    /// Sub-cloud made of the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    pub fn bounding_box(&self) -> Result<BoundingBox> {
        BoundingBox::of(&self.positions)
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }
}

/// Axis-aligned bounds of a cloud. `peak()` is the largest side length and
/// serves as the PSNR peak value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point3,
    pub max: Point3,
}

impl BoundingBox {
    pub fn of(points: &[Point3]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let mut min = *first;
        let mut max = *first;
        for p in &points[1..] {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        Ok(BoundingBox { min, max })
    }

    pub fn peak(&self) -> f64 {
        (0..3)
            .map(|a| self.max[a] - self.min[a])
            .fold(0.0, f64::max)
    }

    /// Maps a point into the unit cube used by `normalize_unit_cube`.
    pub fn normalize_point(&self, p: &Point3) -> Point3 {
        let s = self.peak();
        [
            (p[0] - self.min[0]) / s,
            (p[1] - self.min[1]) / s,
            (p[2] - self.min[2]) / s,
        ]
    }

    pub fn denormalize_point(&self, u: &Point3) -> Point3 {
        let s = self.peak();
        [
            self.min[0] + u[0] * s,
            self.min[1] + u[1] * s,
            self.min[2] + u[2] * s,
        ]
    }

    pub fn denormalize(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud {
            positions: cloud
                .positions
                .iter()
                .map(|u| self.denormalize_point(u))
                .collect(),
            colors: cloud.colors.clone(),
        }
    }
}

/// Translates by the minimum corner and scales uniformly by `1 / peak` so the
/// cloud fits in `[0,1]^3` with its aspect ratio kept. Returns the original
/// bounding box for the inverse mapping.
pub fn normalize_unit_cube(cloud: &PointCloud) -> Result<(PointCloud, BoundingBox)> {
    let bbox = cloud.bounding_box()?;
    if bbox.peak() <= 0.0 {
        return Err(Error::DegenerateExtent);
    }
    let positions = cloud
        .positions
        .iter()
        .map(|p| {
            let mut u = bbox.normalize_point(p);
            // guard against 1 + ulp from the division
            for c in &mut u {
                *c = c.clamp(0.0, 1.0);
            }
            u
        })
        .collect();
    Ok((
        PointCloud {
            positions,
            colors: cloud.colors.clone(),
        },
        bbox,
    ))
}

pub type Voxel = [u32; 3];

/// Unique occupied voxels (sorted lexicographically) and the voxel each input
/// point fell into.
#[derive(Debug, Clone, PartialEq)]
pub struct Voxelization {
    pub depth: u8,
    pub voxels: Vec<Voxel>,
    pub point_to_voxel: Vec<usize>,
}

pub const MAX_DEPTH: u8 = 16;

/// Quantizes a normalized cloud onto the `2^depth` grid. Coordinates equal to
/// 1.0 are clamped into the last cell.
pub fn voxelize(cloud: &PointCloud, depth: u8) -> Result<Voxelization> {
    cloud.require_nonempty()?;
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!(
            "voxel depth {depth} outside 1..={MAX_DEPTH}"
        )));
    }
    let side = (1u64 << depth) as f64;
    let last = (1u32 << depth) - 1;
    let mut cells = Vec::with_capacity(cloud.len());
    for p in &cloud.positions {
        let mut v = [0u32; 3];
        for a in 0..3 {
            let c = p[a];
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::NotNormalized { value: c });
            }
            v[a] = ((c * side).floor() as u64).min(last as u64) as u32;
        }
        cells.push(v);
    }
    let mut voxels = cells.clone();
    voxels.sort_unstable();
    voxels.dedup();
    let point_to_voxel = cells
        .iter()
        .map(|v| voxels.binary_search(v).expect("voxel present"))
        .collect();
    Ok(Voxelization {
        depth,
        voxels,
        point_to_voxel,
    })
}

/// Centers of the given voxels in unit-cube coordinates.
pub fn voxel_centers(voxels: &[Voxel], depth: u8) -> Vec<Point3> {
    let side = (1u64 << depth) as f64;
    voxels
        .iter()
        .map(|v| {
            [
                (v[0] as f64 + 0.5) / side,
                (v[1] as f64 + 0.5) / side,
                (v[2] as f64 + 0.5) / side,
            ]
        })
        .collect()
}
