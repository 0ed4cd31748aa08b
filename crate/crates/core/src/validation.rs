//! Fast self-checks behind the `validate` command: mass properties, SDF
//! geometry, wall and pair impacts, conservation and the integrator.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::{to_meridian, MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use crate::contact::ContactPointRule;
use crate::force::{CurvatureModel, DampingMass};
use crate::geom::closest_on_triangle;
use crate::integrate::{Engine, EngineOptions};
use crate::scenarios::impact::{
    analytic_wall_impact, impact_angles, run_pair_impact_with, run_wall_impact_with,
    PairImpactConfig, TabletGeometry, WallImpactConfig,
};
use crate::scenarios::random_orientation;
use crate::sdf2d::exact_distance;
use crate::shape::{
    build_profile, revolve_mesh, revolve_properties, voxel_properties, ShapeSpec, TriMesh,
};
use crate::{Result, Vec2, Vec3};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

fn check(id: u32, name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Shapes used by the geometric checks.
pub fn builtin_shapes() -> Vec<(&'static str, ShapeSpec)> {
    vec![
        ("sphere", ShapeSpec::Sphere { radius: 5e-3 }),
        (
            "spheroid",
            ShapeSpec::Spheroid {
                equatorial_radius: 2.5e-3,
                polar_radius: 5e-3,
            },
        ),
        ("tablet", TabletGeometry::STANDARD.spec(0.0)),
        (
            "cylinder",
            ShapeSpec::Cylinder {
                radius: 3e-3,
                height: 8e-3,
            },
        ),
        (
            "peanut",
            ShapeSpec::CassiniPeanut {
                focal: 3e-3,
                b: 3.3e-3,
            },
        ),
    ]
}

/// Check 1: standard tablet mass and principal moments.
pub fn mass_properties() -> Check {
    check(
        1,
        "mass properties",
        (|| {
            let profile = build_profile(&TabletGeometry::STANDARD.spec(0.0))?;
            let density = 1191.3;
            let r = revolve_properties(&profile, density)?;
            let v = voxel_properties(&revolve_mesh(&profile, 128), 160, density)?;
            let errs = [
                rel(r.mass, 6.328e-4),
                rel(r.ix, 6.231e-9),
                rel(r.iy, 6.231e-9),
                rel(r.iz, 9.396e-9),
            ];
            let voxel = [rel(v.mass, r.mass), rel(v.ix, r.ix), rel(v.iz, r.iz)]
                .into_iter()
                .fold(0.0, f64::max);
            let passed = errs[0] <= 5e-3 && errs[1..].iter().all(|&e| e <= 1e-2) && voxel <= 2e-2;
            Ok((
                passed,
                format!(
                    "M = {:.4e} kg, Ix = Iy = {:.4e}, Iz = {:.4e} kg m^2, voxel deviation {:.2}%",
                    r.mass,
                    r.ix,
                    r.iz,
                    100.0 * voxel
                ),
            ))
        })(),
    )
}

fn random_meridian(rng: &mut ChaCha8Rng, template: &ShapeTemplate) -> Vec2 {
    let (lo, hi) = template.sdf.extent();
    Vec2::new(
        rng.random_range(0.0..hi.x.min(-lo.x)),
        rng.random_range(lo.y..hi.y),
    )
}

/// Unsigned distance from `x` to a triangle mesh, by exhaustive search with
/// bounding-sphere culling.
pub struct MeshDistance {
    triangles: Vec<[Vec3; 3]>,
    spheres: Vec<(Vec3, f64)>,
}

impl MeshDistance {
    pub fn new(mesh: &TriMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = mesh
            .faces
            .iter()
            .map(|f| {
                [
                    mesh.vertices[f[0]],
                    mesh.vertices[f[1]],
                    mesh.vertices[f[2]],
                ]
            })
            .collect();
        let spheres = triangles
            .iter()
            .map(|t| {
                let c = (t[0] + t[1] + t[2]) / 3.0;
                let r = t.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
                (c, r)
            })
            .collect();
        Self { triangles, spheres }
    }

    pub fn distance(&self, x: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        for (t, (c, r)) in self.triangles.iter().zip(&self.spheres) {
            if (x - c).norm() - r >= best {
                continue;
            }
            best = best.min((closest_on_triangle(x, t[0], t[1], t[2]) - x).norm());
        }
        best
    }
}

/// Check 2: the SDF of the cross-section, queried through the particle
/// pose and the meridian reduction, against 3D distance to a dense mesh.
pub fn meridian_reduction(samples_per_shape: usize, seed: u64) -> Check {
    check(
        2,
        "meridian reduction",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = MaterialParams::new(1e9, 0.3, 1000.0);
            let options = TemplateOptions {
                n_nodes: 200,
                ..Default::default()
            };
            let poses = 10;
            let mut worst: f64 = 0.0;
            let mut report = Vec::new();
            for (name, spec) in builtin_shapes() {
                let template = ShapeTemplate::build(&build_profile(&spec)?, mat.density, &options)?;
                let l = template.major_axis_length();
                let mesh = revolve_mesh(&template.profile, 360);
                let mut shape_worst: f64 = 0.0;
                for _ in 0..poses {
                    let mut p = Particle::new(0, template.clone(), mat);
                    p.orientation = random_orientation(&mut rng);
                    p.position = Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ) * l;
                    let rot = p.rotation();
                    let posed = TriMesh {
                        vertices: mesh.vertices.iter().map(|v| rot * v + p.position).collect(),
                        faces: mesh.faces.clone(),
                    };
                    let brute = MeshDistance::new(&posed);
                    for _ in 0..samples_per_shape / poses {
                        let m = random_meridian(&mut rng, &template);
                        let phi_az = rng.random_range(0.0..2.0 * PI);
                        let body = Vec3::new(m.x * phi_az.cos(), m.x * phi_az.sin(), m.y);
                        let world = p.body_to_world(body);
                        let Some(s) = template.sdf.sample(to_meridian(p.world_to_body(world)))
                        else {
                            continue;
                        };
                        let err = (s.phi.abs() - brute.distance(world)).abs() / l;
                        shape_worst = shape_worst.max(err);
                    }
                }
                worst = worst.max(shape_worst);
                report.push(format!("{name} {shape_worst:.1e}"));
            }
            Ok((
                worst <= 1e-3,
                format!("max error / l: {} (limit 1e-3)", report.join(", ")),
            ))
        })(),
    )
}

/// Check 3: bilinear SDF samples against the exact polyline distance
/// at the default grid.
pub fn sdf_fidelity(samples_per_shape: usize, seed: u64) -> Check {
    check(
        3,
        "SDF fidelity",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let options = TemplateOptions {
                n_nodes: 200,
                ..Default::default()
            };
            let mut worst: f64 = 0.0;
            let mut report = Vec::new();
            for (name, spec) in builtin_shapes() {
                let template = ShapeTemplate::build(&build_profile(&spec)?, 1000.0, &options)?;
                let l = template.major_axis_length();
                let (lo, hi) = template.sdf.extent();
                let mut shape_worst: f64 = 0.0;
                for _ in 0..samples_per_shape {
                    let q = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
                    let Some(s) = template.sdf.sample(q) else {
                        continue;
                    };
                    let exact = exact_distance(&template.profile, Vec2::new(q.x.abs(), q.y));
                    shape_worst = shape_worst.max((s.phi - exact.phi).abs() / l);
                }
                worst = worst.max(shape_worst);
                report.push(format!("{name} {shape_worst:.1e}"));
            }
            Ok((
                worst <= 1e-3,
                format!("max error / l: {} (limit 1e-3)", report.join(", ")),
            ))
        })(),
    )
}

/// Worst deviation of simulated from analytic impact ratios over all angles,
/// plus the ratios at 0°.
fn impact_sweep(config: &WallImpactConfig) -> Result<(f64, f64, f64)> {
    let template = config.template()?;
    let (m, iy) = (template.mass.mass, template.mass.iy);
    let rb = config.geometry.band_radius;
    let mut worst: f64 = 0.0;
    let mut at_zero = (f64::NAN, f64::NAN);
    for theta in impact_angles() {
        let sim = run_wall_impact_with(config, template.clone(), theta)?;
        let exact = analytic_wall_impact(
            theta,
            &config.geometry,
            config.restitution,
            m,
            iy,
            sim.v_before,
        )?;
        worst = worst
            .max((sim.velocity_ratio() - exact.velocity_ratio()).abs())
            .max((sim.omega_ratio(rb) - exact.omega_ratio(rb)).abs());
        if theta == 0.0 {
            at_zero = (sim.velocity_ratio(), sim.omega_ratio(rb));
        }
    }
    Ok((worst, at_zero.0, at_zero.1))
}

/// Check 4: 20-angle tablet-wall sweep against the analytic impulse
/// solution, graded on `config`. With `variant` the sweep is repeated with
/// contact-point damping mass and overlap-centroid contact points, and the
/// result is reported alongside.
pub fn wall_impact(config: &WallImpactConfig, variant: bool) -> Check {
    check(
        4,
        "wall impact",
        (|| {
            let (worst, v0, w0) = impact_sweep(config)?;
            let passed = worst <= 0.02 && (v0 + 0.6).abs() <= 0.01 && w0.abs() <= 0.01;
            let mut detail = format!(
                "max deviation {worst:.4} (limit 0.02); at 0 deg V+/V- = {v0:.4}, wR/V- = {w0:.4}"
            );
            if variant {
                let mut alt = config.clone();
                alt.model.force.damping_mass = DampingMass::ContactPoint;
                alt.model.narrow.contact_point = ContactPointRule::OverlapCentroid;
                let (w, _, _) = impact_sweep(&alt)?;
                detail.push_str(&format!(
                    "; contact-point damping with overlap centroid: {w:.4}"
                ));
            }
            Ok((passed, detail))
        })(),
    )
}

/// Effective radius at the equator of two identical spheroids in side-on
/// contact, from the mean of the principal curvatures.
pub fn equator_effective_radius(equatorial: f64, polar: f64) -> f64 {
    1.0 / (1.0 / equatorial + equatorial / (polar * polar))
}

/// Check 5: elastic normal force of the head-on pair impact against the
/// Hertz law with the analytic effective radius.
pub fn hertz_law(config: &PairImpactConfig) -> Check {
    check(
        5,
        "Hertz law",
        (|| {
            let r = run_pair_impact_with(config, config.template()?, 0.0, CurvatureModel::Mean)?;
            let r_star = equator_effective_radius(config.equatorial_radius, config.polar_radius);
            let nu = config.poisson_ratio;
            let y_star = config.youngs_modulus / (2.0 * (1.0 - nu * nu));
            let mut worst: f64 = 0.0;
            let mut n = 0;
            for t in r
                .trace
                .iter()
                .filter(|t| t.overlap > 0.0 && t.overlap <= 5e-6)
            {
                let hertz = 4.0 / 3.0 * y_star * r_star.sqrt() * t.overlap.powf(1.5);
                worst = worst.max(rel(t.elastic_force, hertz));
                n += 1;
            }
            Ok((
                n > 0 && worst <= 1e-2,
                format!("{n} samples up to 5 um, max relative error {worst:.2e} (limit 1e-2)"),
            ))
        })(),
    )
}

/// Check 6: mean versus equivalent curvature radius in the 0° and 45°
/// pair impacts.
pub fn curvature_convergence(config: &PairImpactConfig) -> Check {
    check(
        6,
        "curvature model convergence",
        (|| {
            let template = config.template()?;
            let mut passed = true;
            let mut parts = Vec::new();
            for angle in [0.0, 45.0] {
                let mean =
                    run_pair_impact_with(config, template.clone(), angle, CurvatureModel::Mean)?;
                let eq = run_pair_impact_with(
                    config,
                    template.clone(),
                    angle,
                    CurvatureModel::Equivalent,
                )?;
                let peak = |r: &crate::scenarios::impact::PairImpactResult| {
                    r.trace
                        .iter()
                        .max_by(|a, b| a.overlap.total_cmp(&b.overlap))
                        .map_or(f64::NAN, |t| t.r_star)
                };
                let diff = rel(mean.rebound_speed(), eq.rebound_speed());
                let (smaller, larger) = if peak(&mean) < peak(&eq) {
                    (&mean, &eq)
                } else {
                    (&eq, &mean)
                };
                let longer = smaller.contact_duration > larger.contact_duration;
                passed &= diff < 2e-2 && longer;
                parts.push(format!(
                    "{angle} deg: rebound diff {:.2}%, R* {:.4e}/{:.4e}, duration {:.3e}/{:.3e} s",
                    100.0 * diff,
                    peak(&mean),
                    peak(&eq),
                    mean.contact_duration,
                    eq.contact_duration
                ));
            }
            Ok((passed, parts.join("; ")))
        })(),
    )
}

fn free_pair(material: MaterialParams, template: Arc<ShapeTemplate>) -> Vec<Particle> {
    let mut a = Particle::new(0, template.clone(), material);
    a.orientation = crate::body::axis_angle(Vec3::new(1.0, 2.0, 0.5), 0.7);
    a.set_angular_velocity(Vec3::new(3.0, -1.0, 2.0));
    let mut b = Particle::new(1, template, material);
    b.orientation = crate::body::axis_angle(Vec3::new(-0.3, 1.0, 1.0), 1.9);
    b.set_angular_velocity(Vec3::new(-2.0, 0.5, 1.0));
    b.position = Vec3::new(1.0e-3, 0.5e-3, 0.0);
    let gap = a.extent(Vec3::z()) + b.extent(-Vec3::z()) + 2e-6;
    b.position.z = gap;
    a.velocity = Vec3::new(0.1, 0.0, 0.5);
    b.velocity = Vec3::new(-0.1, 0.05, -0.5);
    vec![a, b]
}

/// Run a free two-body impact until the contact releases, returning the
/// engine before the first step and after release.
pub fn isolated_pair_impact(material: MaterialParams, max_steps: u64) -> Result<(Engine, Engine)> {
    let profile = build_profile(&ShapeSpec::Spheroid {
        equatorial_radius: 2.5e-3,
        polar_radius: 5e-3,
    })?;
    let template = ShapeTemplate::build(&profile, material.density, &TemplateOptions::default())?;
    let options = EngineOptions {
        dt: 1e-7,
        gravity: Vec3::zeros(),
        ..Default::default()
    };
    let start = Engine::new(free_pair(material, template), Vec::new(), options)?;
    let mut engine = start.clone();
    let mut touched = false;
    for _ in 0..max_steps {
        engine.step()?;
        if engine.contact_count() > 0 {
            touched = true;
        } else if touched {
            return Ok((start, engine));
        }
    }
    Err(crate::Error::ContactNotReleased(max_steps))
}

/// Check 7: momentum in a frictional, damped free pair impact and energy
/// in an elastic, frictionless one.
pub fn conservation() -> Check {
    check(
        7,
        "conservation",
        (|| {
            let base = MaterialParams::new(10e9, 0.3, 2500.0);
            let (a, b) = isolated_pair_impact(
                base.with_restitution(0.6, 0.6).with_friction(0.3, 0.3),
                100_000,
            )?;
            let dp =
                (b.linear_momentum() - a.linear_momentum()).norm() / a.linear_momentum().norm();
            let dl =
                (b.angular_momentum() - a.angular_momentum()).norm() / a.angular_momentum().norm();
            let (c, d) = isolated_pair_impact(base, 100_000)?;
            let de = rel(d.kinetic_energy(), c.kinetic_energy());
            Ok((
            dp <= 1e-6 && dl <= 1e-6 && de <= 1e-2,
            format!("momentum drift {dp:.1e}, angular momentum drift {dl:.1e}, elastic energy drift {de:.1e}"),
        ))
        })(),
    )
}

/// Check 8: free fall against the closed form, torque-free angular
/// momentum over 1e5 steps and bit-identical replay.
pub fn integrator() -> Check {
    check(
        8,
        "integrator",
        (|| {
            let mat = MaterialParams::new(1e9, 0.3, 1191.3);
            let template = ShapeTemplate::build(
                &build_profile(&TabletGeometry::STANDARD.spec(0.0))?,
                mat.density,
                &TemplateOptions {
                    n_nodes: 500,
                    ..Default::default()
                },
            )?;

            let dt = 1e-4;
            let mut p = Particle::new(0, template.clone(), mat);
            p.position = Vec3::new(0.0, 0.0, 1.0);
            p.velocity = Vec3::new(0.2, 0.0, 1.5);
            let mut e = Engine::new(
                vec![p],
                Vec::new(),
                EngineOptions {
                    dt,
                    ..Default::default()
                },
            )?;
            let g = e.options.gravity;
            let steps = 1000;
            for _ in 0..steps {
                e.step()?;
            }
            let t = steps as f64 * dt;
            let z = 1.0 + 1.5 * t + 0.5 * g.z * t * t;
            let vz = 1.5 + g.z * t;
            let q = &e.particles[0];
            let fall =
                ((q.position.z - z).abs() / z.abs()).max((q.velocity.z - vz).abs() / vz.abs());

            let mut p = Particle::new(0, template.clone(), mat);
            p.set_angular_velocity(Vec3::new(40.0, -15.0, 25.0));
            let options = EngineOptions {
                dt: 1e-5,
                gravity: Vec3::zeros(),
                ..Default::default()
            };
            let mut e = Engine::new(vec![p], Vec::new(), options)?;
            let l0 = e.particles[0]
                .angular_velocity_body()
                .component_mul(&e.particles[0].inertia());
            let mut drift: f64 = 0.0;
            for _ in 0..100_000 {
                e.step()?;
                let p = &e.particles[0];
                let l = p.angular_velocity_body().component_mul(&p.inertia());
                drift = drift.max(rel(l.norm(), l0.norm()));
            }

            let replay = |parallel: bool| -> Result<Vec<u64>> {
                let material = mat.with_restitution(0.6, 0.6).with_friction(0.3, 0.3);
                let mut e = Engine::new(
                    free_pair(material, template.clone()),
                    Vec::new(),
                    EngineOptions {
                        dt: 1e-7,
                        gravity: Vec3::zeros(),
                        parallel,
                        ..Default::default()
                    },
                )?;
                e.run(3000, 0)?;
                Ok(e.particles
                    .iter()
                    .flat_map(|p| {
                        p.position
                            .iter()
                            .chain(p.velocity.iter())
                            .chain(p.angular_momentum.iter())
                            .chain(p.orientation.coords.iter())
                            .map(|v| v.to_bits())
                            .collect::<Vec<_>>()
                    })
                    .collect())
            };
            let first = replay(true)?;
            let identical = first == replay(true)? && first == replay(false)?;
            Ok((
                fall <= 1e-12 && drift <= 1e-6 && identical,
                format!(
                    "free-fall error {fall:.1e}, |L| drift {drift:.1e}, replay {}",
                    if identical { "identical" } else { "differs" }
                ),
            ))
        })(),
    )
}

/// Settings of the fast suite.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    pub wall: WallImpactConfig,
    pub pair: PairImpactConfig,
    /// Also sweep the wall impact with the contact-point variant.
    pub variant: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            samples: 2500,
            seed: 7,
            wall: WallImpactConfig::default(),
            pair: PairImpactConfig::default(),
            variant: true,
        }
    }
}

/// Run checks 1-8 in order, handing each result to `observer` as it lands.
pub fn run_fast_suite(options: &SuiteOptions, mut observer: impl FnMut(&Check)) -> Vec<Check> {
    let jobs: Vec<Box<dyn Fn() -> Check + '_>> = vec![
        Box::new(mass_properties),
        Box::new(|| meridian_reduction(options.samples, options.seed)),
        Box::new(|| sdf_fidelity(options.samples * 4, options.seed + 1)),
        Box::new(|| wall_impact(&options.wall, options.variant)),
        Box::new(|| hertz_law(&options.pair)),
        Box::new(|| curvature_convergence(&options.pair)),
        Box::new(conservation),
        Box::new(integrator),
    ];
    jobs.into_iter()
        .map(|job| {
            let c = job();
            observer(&c);
            c
        })
        .collect()
}
