use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use srdem::body::{axis_angle, MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use srdem::contact::{broadphase_pairs, Wall};
use srdem::integrate::{Engine, EngineOptions};
use srdem::scenarios::TabletGeometry;
use srdem::shape::build_profile;
use srdem::Vec3;

/// A loose 4 x 4 x `layers` stack of standard tablets on a floor, stepped
/// until most of them touch.
fn stack(layers: usize, parallel: bool) -> Engine {
    let mat = MaterialParams::new(5e7, 0.3, 1191.3)
        .with_restitution(0.6, 0.6)
        .with_friction(0.38, 0.22);
    let options = TemplateOptions {
        n_nodes: 1000,
        ..Default::default()
    };
    let template = ShapeTemplate::build(
        &build_profile(&TabletGeometry::STANDARD.spec(0.0)).unwrap(),
        mat.density,
        &options,
    )
    .unwrap();
    let pitch = 11.6e-3;
    let mut particles = Vec::new();
    for k in 0..16 * layers {
        let (i, j, l) = (k % 4, (k / 4) % 4, k / 16);
        let mut p = Particle::new(k, template.clone(), mat);
        p.orientation = axis_angle(Vec3::new(1.0, k as f64, 0.0), 0.05 * k as f64);
        p.position = Vec3::new(
            i as f64 * pitch,
            j as f64 * pitch,
            3.3e-3 + l as f64 * 6.5e-3,
        );
        particles.push(p);
    }
    let floor = Wall::plane(0, Vec3::zeros(), Vec3::z(), mat).unwrap();
    let options = EngineOptions {
        dt: 2e-7,
        parallel,
        ..Default::default()
    };
    let mut e = Engine::new(particles, vec![floor], options).unwrap();
    for _ in 0..200 {
        e.step().unwrap();
    }
    e
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    for layers in [1, 4] {
        for (name, parallel) in [("sequential", false), ("parallel", true)] {
            let mut e = stack(layers, parallel);
            group.bench_with_input(BenchmarkId::new(name, 16 * layers), &layers, |b, _| {
                b.iter(|| e.step().unwrap())
            });
        }
    }
    group.finish();
}

fn bench_forces(c: &mut Criterion) {
    let mut group = c.benchmark_group("forces");
    group.sample_size(20);
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        let mut e = stack(4, parallel);
        group.bench_function(name, |b| b.iter(|| e.compute_forces()));
    }
    group.finish();
}

fn bench_broadphase(c: &mut Criterion) {
    let e = stack(4, false);
    c.bench_function("broadphase/64", |b| {
        b.iter(|| broadphase_pairs(black_box(&e.particles)))
    });
}

criterion_group!(benches, bench_step, bench_forces, bench_broadphase);
criterion_main!(benches);
