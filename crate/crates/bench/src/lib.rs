//! Shared fixture builders for the benchmark targets.

use gcreg_core::cloud::PointCloud;
use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform random cloud in a cube of the given half-extent.
pub fn random_cloud(n: usize, scale: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new(
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                )
            })
            .collect(),
    )
}

/// Random cloud with random unit normals attached.
pub fn random_oriented_cloud(n: usize, scale: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
        .collect();
    let normals = (0..n)
        .map(|_| {
            Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0f64),
            )
            .normalize()
        })
        .collect();
    PointCloud::with_normals(points, normals).expect("unit normals")
}
