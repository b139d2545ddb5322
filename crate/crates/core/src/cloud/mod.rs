//! Point cloud container, rigid transforms and the spatial operators the
//! rest of the pipeline is built on.

mod index;
mod normals;
mod transform;
mod voxel;

pub use index::SpatialIndex;
pub use normals::{estimate_normals, estimate_normals_toward, smooth_normals, NormalEstimate};
pub use transform::RigidTransform;
pub use voxel::voxel_downsample;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of stored normals.
pub const NORMAL_UNIT_TOL: f64 = 1e-6;

/// An ordered list of 3D points with optional per-point unit normals.
///
/// The container itself may be empty; operations that need points validate
/// that at their own entry. Normals, when present, always match the point
/// count and are unit length within [`NORMAL_UNIT_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self {
            points,
            normals: None,
        }
    }

    pub fn with_normals(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if normals.len() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} normals for {} points",
                normals.len(),
                points.len()
            )));
        }
        for (i, n) in normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > NORMAL_UNIT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "normal {i} has norm {}, expected 1",
                    n.norm()
                )));
            }
        }
        Ok(Self {
            points,
            normals: Some(normals),
        })
    }

    pub fn from_coords(coords: &[[f64; 3]]) -> Self {
        Self::new(
            coords
                .iter()
                .map(|c| Point3::new(c[0], c[1], c[2]))
                .collect(),
        )
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box diagonal; 0 for clouds of fewer than 2 points.
    pub fn bbox_diagonal(&self) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (hi - lo).norm()
    }

    /// Sub-cloud at the given indices, preserving order. Panics on
    /// out-of-range indices.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| indices.iter().map(|&i| ns[i]).collect()),
        }
    }
}

/// Maps points `p ↦ R·p + t` and normals `n ↦ R·n`.
pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| t.transform_point(p)).collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| t.rotation() * n).collect()),
    }
}
