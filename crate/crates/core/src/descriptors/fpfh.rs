use std::f64::consts::PI;

use rayon::prelude::*;

use crate::cloud::{PointCloud, SpatialIndex};
use crate::descriptors::{ppf, DescriptorSet, MultiScaleDescriptors};
use crate::error::{Error, Result};

/// 11 bins per angular feature, 33-dimensional descriptors.
pub const DEFAULT_FPFH_BINS: usize = 11;

/// Level radii as multiples of the voxel size, largest (level 1) first.
pub const DEFAULT_RADIUS_MULTIPLIERS: [f64; 3] = [15.0, 10.0, 5.0];

/// Fast Point Feature Histogram at a single radius.
///
/// Two passes. First the simplified histogram SPFH(p): for every neighbor
/// within `radius` (strict, zero-distance duplicates excluded) the three
/// PPF angles are binned over `[0, π]` into `bins` bins each. Then the
/// weighted aggregation
///
///   FPFH(p) = SPFH(p) + (1/k) · Σ_k (1/‖p − p_k‖) · SPFH(p_k)
///
/// and each of the three sub-histograms is normalized to sum 100.
/// Points with no neighbors keep a zero descriptor (see
/// [`DescriptorSet::zero_rows`]) so rows stay aligned with the cloud.
pub fn fpfh(cloud: &PointCloud, radius: f64, bins: usize) -> Result<DescriptorSet> {
    let index = SpatialIndex::build(cloud)?;
    fpfh_with_index(cloud, &index, 1, radius, bins)
}

pub(crate) fn fpfh_with_index(
    cloud: &PointCloud,
    index: &SpatialIndex,
    level: usize,
    radius: f64,
    bins: usize,
) -> Result<DescriptorSet> {
    let normals = cloud
        .normals()
        .ok_or_else(|| Error::InvalidParameter("FPFH requires a cloud with normals".to_string()))?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "FPFH radius must be positive, got {radius}"
        )));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "FPFH needs at least 2 bins per feature, got {bins}"
        )));
    }

    let points = cloud.points();
    let dim = 3 * bins;

    // Neighborhoods once; reused by both passes.
    let neighborhoods: Vec<Vec<usize>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            index
                .radius_neighbors(&points[i], radius)
                .expect("radius > 0")
                .into_iter()
                .filter(|&j| j != i && (points[j] - points[i]).norm_squared() > 0.0)
                .collect()
        })
        .collect();

    let spfh: Vec<Vec<f64>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut hist = vec![0.0f64; dim];
            for &j in &neighborhoods[i] {
                let q = ppf(&points[i], &normals[i], &points[j], &normals[j]);
                hist[bin_of(q.angle_d_n1, bins)] += 1.0;
                hist[bins + bin_of(q.angle_d_n2, bins)] += 1.0;
                hist[2 * bins + bin_of(q.angle_n1_n2, bins)] += 1.0;
            }
            hist
        })
        .collect();

    let rows: Vec<Vec<f64>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let nbrs = &neighborhoods[i];
            if nbrs.is_empty() {
                return vec![0.0; dim];
            }
            let mut out = spfh[i].clone();
            let inv_k = 1.0 / nbrs.len() as f64;
            for &j in nbrs {
                let w = inv_k / (points[j] - points[i]).norm();
                for (o, s) in out.iter_mut().zip(&spfh[j]) {
                    *o += w * s;
                }
            }
            for block in out.chunks_exact_mut(bins) {
                let sum: f64 = block.iter().sum();
                if sum > 0.0 {
                    let scale = 100.0 / sum;
                    for v in block {
                        *v *= scale;
                    }
                }
            }
            out
        })
        .collect();

    DescriptorSet::from_rows(level, radius, dim, rows)
}

/// One FPFH level per radius multiplier, level order following the
/// multiplier order (strictly decreasing, default 15/10/5 × voxel).
pub fn multiscale_fpfh(
    cloud: &PointCloud,
    voxel_size: f64,
    multipliers: &[f64],
) -> Result<MultiScaleDescriptors> {
    if !(voxel_size > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "voxel_size must be positive, got {voxel_size}"
        )));
    }
    if multipliers.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one radius multiplier required".to_string(),
        ));
    }
    for m in multipliers {
        if !(*m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius multipliers must be positive, got {m}"
            )));
        }
    }
    for w in multipliers.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter(format!(
                "radius multipliers must be strictly decreasing, got {multipliers:?}"
            )));
        }
    }

    let index = SpatialIndex::build(cloud)?;
    let levels = multipliers
        .iter()
        .enumerate()
        .map(|(l, m)| fpfh_with_index(cloud, &index, l + 1, m * voxel_size, DEFAULT_FPFH_BINS))
        .collect::<Result<Vec<_>>>()?;
    MultiScaleDescriptors::new(levels)
}

#[inline]
fn bin_of(angle: f64, bins: usize) -> usize {
    ((angle / PI * bins as f64) as usize).min(bins - 1)
}
