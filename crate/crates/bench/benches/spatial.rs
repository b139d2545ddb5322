use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gcreg_bench::{random_cloud, random_oriented_cloud};
use gcreg_core::cloud::{estimate_normals, voxel_downsample, SpatialIndex};
use gcreg_core::descriptors::fpfh;
use nalgebra::Point3;

fn bench_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("spatial_index");
    for n in [1_000usize, 10_000, 50_000] {
        let cloud = random_cloud(n, 1.0, 7);
        group.bench_with_input(BenchmarkId::new("build", n), &cloud, |b, cloud| {
            b.iter(|| SpatialIndex::build(black_box(cloud)).unwrap());
        });
        let index = SpatialIndex::build(&cloud).unwrap();
        let queries = random_cloud(1_000, 1.1, 8);
        group.bench_with_input(BenchmarkId::new("nearest_1k", n), &index, |b, index| {
            b.iter(|| {
                for q in queries.points() {
                    black_box(index.nearest(q));
                }
            });
        });
        group.bench_with_input(BenchmarkId::new("radius_1k", n), &index, |b, index| {
            b.iter(|| {
                for q in queries.points() {
                    black_box(index.radius_neighbors(q, 0.1).unwrap());
                }
            });
        });
    }
    group.finish();
}

fn bench_brute_force_baseline(c: &mut Criterion) {
    let cloud = random_cloud(10_000, 1.0, 7);
    let queries = random_cloud(1_000, 1.1, 8);
    c.bench_function("brute_force_nearest_1k_of_10k", |b| {
        b.iter(|| {
            for q in queries.points() {
                let mut best = (f64::INFINITY, usize::MAX);
                for (i, p) in cloud.points().iter().enumerate() {
                    let d2 = (p - q).norm_squared();
                    if d2 < best.0 {
                        best = (d2, i);
                    }
                }
                black_box(best);
            }
        });
    });
}

fn bench_preprocessing(c: &mut Criterion) {
    let cloud = random_cloud(50_000, 1.0, 9);
    c.bench_function("voxel_downsample_50k", |b| {
        b.iter(|| voxel_downsample(black_box(&cloud), 0.05).unwrap());
    });

    let down = voxel_downsample(&cloud, 0.05).unwrap();
    c.bench_function("estimate_normals", |b| {
        b.iter(|| estimate_normals(black_box(&down), 33).unwrap());
    });

    let oriented = random_oriented_cloud(2_000, 1.0, 10);
    c.bench_function("fpfh_2k_r0.375", |b| {
        b.iter(|| fpfh(black_box(&oriented), 0.375, 11).unwrap());
    });

    let q = Point3::new(0.0, 0.0, 0.0);
    let index = SpatialIndex::build(&oriented).unwrap();
    c.bench_function("k_nearest_33", |b| {
        b.iter(|| black_box(index.k_nearest(&q, 33)));
    });
}

criterion_group!(
    benches,
    bench_index,
    bench_brute_force_baseline,
    bench_preprocessing
);
criterion_main!(benches);
