//! Hot-path benchmarks: rendering, surface reconstruction, mesh
//! simplification, nearest-neighbor queries and texture baking.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use scirender::knn::KnnIndex;
use scirender::meshify::{ball_pivot, simplify_mesh};
use scirender::{render, meshify_pc, tessellate, MeshifyConfig, PrimitiveSpec, Vec3};
use scirender_bench::{fibonacci_sphere, small_scene};

fn bench_render(c: &mut Criterion) {
    let (scene, settings) = small_scene(64, 4);
    let mut group = c.benchmark_group("render");
    group.sample_size(10);
    group.bench_function("sphere_plane_64px_4spp", |b| {
        b.iter(|| render(black_box(&scene), black_box(&settings)).unwrap())
    });
    group.finish();
}

fn bench_ball_pivot(c: &mut Criterion) {
    let mut points = Vec::new();
    for i in 0..21 {
        for j in 0..21 {
            points.push(Vec3::new(i as f64 * 0.05, j as f64 * 0.05, 0.0));
        }
    }
    let normals = vec![Vec3::Z; points.len()];
    c.bench_function("ball_pivot_grid_441", |b| {
        b.iter(|| ball_pivot(black_box(&points), black_box(&normals), &[0.05]).unwrap())
    });
}

fn bench_simplify(c: &mut Criterion) {
    let sphere = tessellate(&PrimitiveSpec::Sphere { radius: 1.0, subdivisions: 3 }).unwrap();
    c.bench_function("simplify_icosphere_1280_to_320", |b| {
        b.iter(|| simplify_mesh(black_box(&sphere), 320).unwrap())
    });
}

fn bench_knn(c: &mut Criterion) {
    let points = fibonacci_sphere(10_000);
    let index = KnnIndex::build(&points).unwrap();
    let queries = fibonacci_sphere(1_000);
    c.bench_function("knn_10k_points_1k_queries_k8", |b| {
        b.iter(|| {
            for q in &queries {
                black_box(index.nearest(*q, 8));
            }
        })
    });
}

fn bench_meshify(c: &mut Criterion) {
    let points = fibonacci_sphere(1_000);
    let colors: Vec<[f64; 3]> = points.iter().map(|p| [0.5 + 0.3 * p.z, 0.4, 0.6]).collect();
    let normals = points.clone();
    let mut config = MeshifyConfig::new(vec![0.12, 0.18, 0.26], 800);
    config.texture_resolution = 256;
    let mut group = c.benchmark_group("meshify");
    group.sample_size(10);
    group.bench_function("sphere_cloud_1k_textured", |b| {
        b.iter(|| {
            meshify_pc(black_box(&points), black_box(&colors), Some(&normals), &config).unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_render,
    bench_ball_pivot,
    bench_simplify,
    bench_knn,
    bench_meshify
);
criterion_main!(benches);
