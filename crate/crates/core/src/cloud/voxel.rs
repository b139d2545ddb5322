use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Downsamples to one point per occupied voxel, placed at the centroid of
/// the voxel's members. Output order is the first-visit order of voxels,
/// so the result is deterministic for a fixed input.
///
/// When the input carries normals the centroid gets the normalized mean of
/// the member normals ((0,0,1) if they cancel exactly).
pub fn voxel_downsample(cloud: &PointCloud, voxel_size: f64) -> Result<PointCloud> {
    if !(voxel_size > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "voxel_size must be positive, got {voxel_size}"
        )));
    }

    struct Accum {
        sum: Vector3<f64>,
        normal_sum: Vector3<f64>,
        count: usize,
    }

    let mut slots: Vec<Accum> = Vec::new();
    let mut voxels: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let normals = cloud.normals();

    for (i, p) in cloud.points().iter().enumerate() {
        let key = (
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        );
        let slot = *voxels.entry(key).or_insert_with(|| {
            slots.push(Accum {
                sum: Vector3::zeros(),
                normal_sum: Vector3::zeros(),
                count: 0,
            });
            slots.len() - 1
        });
        let acc = &mut slots[slot];
        acc.sum += p.coords;
        acc.count += 1;
        if let Some(ns) = normals {
            acc.normal_sum += ns[i];
        }
    }

    let points: Vec<Point3<f64>> = slots
        .iter()
        .map(|a| Point3::from(a.sum / a.count as f64))
        .collect();

    if normals.is_some() {
        let out_normals = slots
            .iter()
            .map(|a| {
                let norm = a.normal_sum.norm();
                if norm > 1e-12 {
                    a.normal_sum / norm
                } else {
                    Vector3::z()
                }
            })
            .collect();
        PointCloud::with_normals(points, out_normals)
    } else {
        Ok(PointCloud::new(points))
    }
}
