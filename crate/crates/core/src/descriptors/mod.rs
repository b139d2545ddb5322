//! Local geometric descriptors: the raw point-pair feature quadruple and
//! multi-radius FPFH histograms that provide the multi-level feature stack.

mod fpfh;

pub use fpfh::{fpfh, multiscale_fpfh, DEFAULT_FPFH_BINS, DEFAULT_RADIUS_MULTIPLIERS};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four-component point-pair feature: two point-to-normal angles, the
/// normal-to-normal angle (all in `[0, π]`) and the pair distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpfQuadruple {
    /// ∠(p_j − p_i, n_i)
    pub angle_d_n1: f64,
    /// ∠(p_j − p_i, n_j)
    pub angle_d_n2: f64,
    /// ∠(n_i, n_j)
    pub angle_n1_n2: f64,
    /// ‖p_i − p_j‖
    pub distance: f64,
}

/// Angle between two vectors via a clamped arccos; total on all inputs.
fn angle_between(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (u.dot(v) / denom).clamp(-1.0, 1.0).acos()
}

/// Computes the PPF quadruple for an oriented point pair.
///
/// Coincident points are the documented degenerate case: distance 0 and all
/// angles 0.
pub fn ppf(
    p_i: &Point3<f64>,
    n_i: &Vector3<f64>,
    p_j: &Point3<f64>,
    n_j: &Vector3<f64>,
) -> PpfQuadruple {
    let d = p_j - p_i;
    let distance = d.norm();
    if distance == 0.0 {
        return PpfQuadruple {
            angle_d_n1: 0.0,
            angle_d_n2: 0.0,
            angle_n1_n2: 0.0,
            distance: 0.0,
        };
    }
    PpfQuadruple {
        angle_d_n1: angle_between(&d, n_i),
        angle_d_n2: angle_between(&d, n_j),
        angle_n1_n2: angle_between(n_i, n_j),
        distance,
    }
}

/// One descriptor per cloud point at a single scale level.
///
/// Vectors are stored row-major in a flat buffer. `level` is 1-based with
/// level 1 the largest radius. Empty-neighborhood points keep an all-zero
/// row so descriptor rows stay aligned with cloud indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    level: usize,
    radius: f64,
    dimension: usize,
    data: Vec<f64>,
}

impl DescriptorSet {
    pub fn from_rows(
        level: usize,
        radius: f64,
        dimension: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter(
                "descriptor dimension must be positive".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * dimension);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dimension {
                return Err(Error::DimensionMismatch(format!(
                    "descriptor row {i} has length {}, expected {dimension}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            level,
            radius,
            dimension,
            data,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dimension)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    /// Indices whose descriptor is all-zero — the empty-neighborhood
    /// diagnostic marker.
    pub fn zero_rows(&self) -> Vec<usize> {
        self.rows()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|&v| v == 0.0))
            .map(|(i, _)| i)
            .collect()
    }

    /// Row subset in the given order; panics on out-of-range indices.
    pub fn select(&self, indices: &[usize]) -> DescriptorSet {
        let mut data = Vec::with_capacity(indices.len() * self.dimension);
        for &i in indices {
            data.extend_from_slice(self.vector(i));
        }
        Self {
            level: self.level,
            radius: self.radius,
            dimension: self.dimension,
            data,
        }
    }
}

/// The per-level descriptor stack, level 1 (largest radius) first.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleDescriptors {
    levels: Vec<DescriptorSet>,
}

impl MultiScaleDescriptors {
    pub fn new(levels: Vec<DescriptorSet>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one descriptor level required".into(),
            ));
        }
        let n = levels[0].len();
        for set in &levels {
            if set.len() != n {
                return Err(Error::DimensionMismatch(
                    "all descriptor levels must cover the same point count".into(),
                ));
            }
        }
        for w in levels.windows(2) {
            if !(w[1].radius() < w[0].radius()) {
                return Err(Error::InvalidParameter(
                    "descriptor level radii must be strictly decreasing".into(),
                ));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[DescriptorSet] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn point_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn select(&self, indices: &[usize]) -> MultiScaleDescriptors {
        Self {
            levels: self.levels.iter().map(|s| s.select(indices)).collect(),
        }
    }
}
