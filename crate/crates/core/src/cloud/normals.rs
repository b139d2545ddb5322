use nalgebra::{Matrix3, Point3, Vector3};
use rayon::prelude::*;

use crate::cloud::{PointCloud, SpatialIndex};
use crate::error::{Error, Result};

/// Eigenvalue ratio below which a neighborhood covariance is treated as
/// rank-deficient (collinear or coincident points).
const RANK_TOL: f64 = 1e-12;

/// Estimated normals plus the indices whose neighborhoods were degenerate
/// and fell back to the (0,0,1) placeholder.
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub cloud: PointCloud,
    pub degenerate: Vec<usize>,
}

/// PCA normals oriented toward the origin. See [`estimate_normals_toward`].
pub fn estimate_normals(cloud: &PointCloud, neighbors: usize) -> Result<NormalEstimate> {
    estimate_normals_toward(cloud, neighbors, &Point3::origin())
}

/// Per-point normals as the smallest-eigenvalue eigenvector of the
/// `neighbors`-nearest-neighborhood covariance, sign-flipped to point
/// toward `viewpoint`.
///
/// Rank-deficient neighborhoods get the fallback normal (0,0,1) and are
/// reported in [`NormalEstimate::degenerate`] instead of failing — scans
/// with degenerate patches must still register.
pub fn estimate_normals_toward(
    cloud: &PointCloud,
    neighbors: usize,
    viewpoint: &Point3<f64>,
) -> Result<NormalEstimate> {
    if neighbors < 3 {
        return Err(Error::InvalidParameter(format!(
            "normal estimation needs >= 3 neighbors, got {neighbors}"
        )));
    }
    if cloud.len() < neighbors {
        return Err(Error::InvalidParameter(format!(
            "cloud has {} points, fewer than the {neighbors} requested neighbors",
            cloud.len()
        )));
    }
    let index = SpatialIndex::build(cloud)?;

    let per_point: Vec<(Vector3<f64>, bool)> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let p = &cloud.points()[i];
            let nbrs = index.k_nearest(p, neighbors);
            normal_from_neighborhood(cloud.points(), &nbrs, p, viewpoint)
        })
        .collect();

    let mut normals = Vec::with_capacity(cloud.len());
    let mut degenerate = Vec::new();
    for (i, (n, ok)) in per_point.into_iter().enumerate() {
        normals.push(n);
        if !ok {
            degenerate.push(i);
        }
    }
    Ok(NormalEstimate {
        cloud: PointCloud::with_normals(cloud.points().to_vec(), normals)?,
        degenerate,
    })
}

fn normal_from_neighborhood(
    points: &[Point3<f64>],
    nbrs: &[usize],
    p: &Point3<f64>,
    viewpoint: &Point3<f64>,
) -> (Vector3<f64>, bool) {
    let mut centroid = Vector3::zeros();
    for &j in nbrs {
        centroid += points[j].coords;
    }
    centroid /= nbrs.len() as f64;

    let mut cov = Matrix3::zeros();
    for &j in nbrs {
        let d = points[j].coords - centroid;
        cov += d * d.transpose();
    }

    let eig = cov.symmetric_eigen();
    // Order eigenvalues descending to test rank and pick the smallest.
    let mut order = [0usize, 1, 2];
    order.sort_unstable_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let l1 = eig.eigenvalues[order[0]].max(0.0);
    let l2 = eig.eigenvalues[order[1]].max(0.0);
    if l1 <= 0.0 || l2 <= RANK_TOL * l1 {
        return (Vector3::z(), false);
    }

    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[2]).into();
    normal = normal.normalize();

    let toward = viewpoint - p;
    let dot = normal.dot(&toward);
    if dot < 0.0 {
        normal = -normal;
    } else if dot == 0.0 {
        // Viewpoint in the tangent plane: canonicalize the sign so the
        // output is deterministic.
        let k = normal.iamax();
        if normal[k] < 0.0 {
            normal = -normal;
        }
    }
    (normal, true)
}

/// Assigns each superpoint the normalized mean of the source normals within
/// `radius` of it. A superpoint with an empty (or exactly cancelling)
/// neighborhood takes the normal of its nearest source point.
pub fn smooth_normals(
    superpoints: &PointCloud,
    source: &PointCloud,
    radius: f64,
) -> Result<PointCloud> {
    let source_normals = source.normals().ok_or_else(|| {
        Error::InvalidParameter("smooth_normals requires a source cloud with normals".to_string())
    })?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing radius must be positive, got {radius}"
        )));
    }
    let index = SpatialIndex::build(source)?;

    let normals: Vec<Vector3<f64>> = superpoints
        .points()
        .par_iter()
        .map(|p| {
            let nbrs = index.radius_neighbors(p, radius).expect("radius >= 0");
            let mut sum = Vector3::zeros();
            for &j in &nbrs {
                sum += source_normals[j];
            }
            let norm = sum.norm();
            if nbrs.is_empty() || norm <= 1e-12 {
                let (j, _) = index.nearest(p);
                source_normals[j]
            } else {
                sum / norm
            }
        })
        .collect();

    PointCloud::with_normals(superpoints.points().to_vec(), normals)
}
