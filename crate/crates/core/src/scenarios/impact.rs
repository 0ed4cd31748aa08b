//! Tablet-on-wall and ellipsoid-on-ellipsoid impact drivers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::body::{axis_angle, MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use crate::contact::Wall;

use super::ModelOptions;
use crate::force::CurvatureModel;
use crate::integrate::{Engine, EngineOptions};
use crate::shape::{build_profile, tablet_cap_radius, NodeStrategy, ShapeSpec};
use crate::{Error, Result, Vec3};

/// Bi-convex tablet dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabletGeometry {
    pub band_radius: f64,
    pub band_height: f64,
    pub cap_height: f64,
}

impl TabletGeometry {
    /// The reference tablet of the impact, packing and drum studies.
    pub const STANDARD: TabletGeometry = TabletGeometry {
        band_radius: 5.675e-3,
        band_height: 4.0e-3,
        cap_height: 1.23e-3,
    };

    pub fn cap_radius(&self) -> f64 {
        tablet_cap_radius(self.band_radius, self.cap_height)
    }

    /// Tilt above which the band edge, not the cap, touches the wall first.
    pub fn critical_angle(&self) -> f64 {
        (self.band_radius / self.cap_radius()).asin()
    }

    /// Distance from the tablet centre to the centre of the cap sphere.
    pub fn cap_offset(&self) -> f64 {
        self.cap_radius() - (self.cap_height + 0.5 * self.band_height)
    }

    /// Distance from the centre to the band edge.
    pub fn edge_distance(&self) -> f64 {
        self.band_radius.hypot(0.5 * self.band_height)
    }

    pub fn edge_angle(&self) -> f64 {
        (0.5 * self.band_height / self.band_radius).atan()
    }

    /// Signed horizontal offset of the first contact point from the centre of
    /// mass for a tilt of `theta` radians about +y. At exactly 90° the whole
    /// band touches and the offset is zero.
    pub fn lever_arm(&self, theta: f64) -> f64 {
        if theta < self.critical_angle() {
            self.cap_offset() * theta.sin()
        } else if (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12 {
            0.0
        } else {
            self.edge_distance() * (theta + self.edge_angle()).cos()
        }
    }

    pub fn spec(&self, edge_radius: f64) -> ShapeSpec {
        ShapeSpec::Tablet {
            band_radius: self.band_radius,
            band_height: self.band_height,
            cap_height: self.cap_height,
            edge_radius,
        }
    }
}

/// Post-impact state of a single impact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImpactResult {
    pub theta_deg: f64,
    /// Normal velocity before impact (negative: towards the wall).
    pub v_before: f64,
    pub v_after: f64,
    pub omega_after: f64,
}

impl ImpactResult {
    pub fn velocity_ratio(&self) -> f64 {
        self.v_after / self.v_before
    }

    pub fn omega_ratio(&self, band_radius: f64) -> f64 {
        self.omega_after * band_radius / self.v_before
    }
}

/// Frictionless rigid-body impact of a tilted tablet on a wall.
pub fn analytic_wall_impact(
    theta_deg: f64,
    geometry: &TabletGeometry,
    e: f64,
    mass: f64,
    iy: f64,
    v_before: f64,
) -> Result<ImpactResult> {
    if !(0.0..=90.0).contains(&theta_deg) {
        return Err(Error::ImpactAngle(theta_deg));
    }
    let rx = geometry.lever_arm(theta_deg.to_radians());
    let omega = mass * v_before * (1.0 + e) * rx / (iy + mass * rx * rx);
    let v_after = omega * rx - e * v_before;
    Ok(ImpactResult {
        theta_deg,
        v_before,
        v_after,
        omega_after: omega,
    })
}

/// The impact angles of the tablet study.
pub fn impact_angles() -> Vec<f64> {
    let mut a: Vec<f64> = (0..=18).map(|k| 5.0 * k as f64).collect();
    a.push(87.5);
    a
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WallImpactConfig {
    pub geometry: TabletGeometry,
    /// Edge rounding radius; zero for the sharp tablet.
    pub edge_radius: f64,
    pub shear_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub restitution: f64,
    pub dt: f64,
    pub speed: f64,
    pub template: TemplateOptions,
    /// Initial clearance between the lowest node and the wall.
    pub gap: f64,
    pub max_steps: u64,
    pub model: ModelOptions,
}

impl Default for WallImpactConfig {
    fn default() -> Self {
        Self {
            geometry: TabletGeometry::STANDARD,
            edge_radius: 0.0,
            shear_modulus: 1.15e9,
            poisson_ratio: 0.3,
            density: 1191.3,
            restitution: 0.6,
            dt: 1e-7,
            speed: 1.0,
            template: TemplateOptions {
                n_nodes: 5090,
                node_strategy: NodeStrategy::Adaptive,
                ..Default::default()
            },
            gap: 2e-7,
            max_steps: 200_000,
            model: ModelOptions::default(),
        }
    }
}

impl WallImpactConfig {
    pub fn material(&self) -> MaterialParams {
        MaterialParams::from_shear(self.shear_modulus, self.poisson_ratio, self.density)
            .with_restitution(self.restitution, self.restitution)
    }

    pub fn template(&self) -> Result<Arc<ShapeTemplate>> {
        let profile = build_profile(&self.geometry.spec(self.edge_radius))?;
        ShapeTemplate::build(&profile, self.density, &self.template)
    }
}

/// Drop `particle` onto the plane `z = 0` until the contact releases.
fn release_from_wall(mut engine: Engine, max_steps: u64) -> Result<Engine> {
    let mut touched = false;
    for _ in 0..max_steps {
        engine.step()?;
        if engine.contact_count() > 0 {
            touched = true;
        } else if touched {
            return Ok(engine);
        }
    }
    Err(Error::ContactNotReleased(max_steps))
}

/// Lowest world height of a particle's surface nodes.
fn lowest_node(p: &Particle) -> f64 {
    let r = p.rotation();
    p.template
        .nodes
        .nodes
        .iter()
        .map(|n| (r * n).z)
        .fold(f64::INFINITY, f64::min)
        + p.position.z
}

/// Simulated frictionless, gravity-free impact of the tablet tilted by
/// `theta_deg` about +y on the wall `z = 0`.
pub fn run_wall_impact_with(
    config: &WallImpactConfig,
    template: Arc<ShapeTemplate>,
    theta_deg: f64,
) -> Result<ImpactResult> {
    if !(0.0..=90.0).contains(&theta_deg) {
        return Err(Error::ImpactAngle(theta_deg));
    }
    let mat = config.material();
    let mut p = Particle::new(0, template, mat);
    p.orientation = axis_angle(Vec3::y(), theta_deg.to_radians());
    p.velocity = Vec3::new(0.0, 0.0, -config.speed);
    p.position.z = config.gap - lowest_node(&p);
    let wall = Wall::plane(0, Vec3::zeros(), Vec3::z(), mat)?;
    let options = EngineOptions {
        gravity: Vec3::zeros(),
        ..config.model.engine_options(config.dt)
    };
    let engine = release_from_wall(Engine::new(vec![p], vec![wall], options)?, config.max_steps)?;
    let p = &engine.particles[0];
    Ok(ImpactResult {
        theta_deg,
        v_before: -config.speed,
        v_after: p.velocity.z,
        omega_after: p.angular_velocity().y,
    })
}

pub fn run_wall_impact(config: &WallImpactConfig, theta_deg: f64) -> Result<ImpactResult> {
    run_wall_impact_with(config, config.template()?, theta_deg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairImpactConfig {
    pub equatorial_radius: f64,
    pub polar_radius: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub restitution: f64,
    pub dt: f64,
    pub speed: f64,
    pub template: TemplateOptions,
    pub gap: f64,
    pub max_steps: u64,
    pub model: ModelOptions,
}

impl Default for PairImpactConfig {
    fn default() -> Self {
        Self {
            equatorial_radius: 2.5e-3,
            polar_radius: 5.0e-3,
            youngs_modulus: 10e9,
            poisson_ratio: 0.3,
            density: 2500.0,
            restitution: 0.6,
            dt: 1e-7,
            speed: 1.0,
            template: TemplateOptions::default(),
            gap: 2e-7,
            max_steps: 200_000,
            model: ModelOptions::default(),
        }
    }
}

impl PairImpactConfig {
    pub fn material(&self) -> MaterialParams {
        MaterialParams::new(self.youngs_modulus, self.poisson_ratio, self.density)
            .with_restitution(self.restitution, self.restitution)
    }

    pub fn template(&self) -> Result<Arc<ShapeTemplate>> {
        let spec = ShapeSpec::Spheroid {
            equatorial_radius: self.equatorial_radius,
            polar_radius: self.polar_radius,
        };
        ShapeTemplate::build(&build_profile(&spec)?, self.density, &self.template)
    }
}

/// One sample of a pair-impact trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairTracePoint {
    pub time: f64,
    /// Largest node overlap.
    pub overlap: f64,
    /// Normal force magnitude and its elastic part `k_n δ`.
    pub normal_force: f64,
    pub elastic_force: f64,
    pub r_star: f64,
    pub velocity_z: f64,
    pub omega_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairImpactResult {
    pub orientation_deg: f64,
    pub curvature: CurvatureModel,
    pub trace: Vec<PairTracePoint>,
    pub contact_duration: f64,
    pub rebound_velocity: Vec3,
    pub rebound_omega: Vec3,
}

impl PairImpactResult {
    pub fn rebound_speed(&self) -> f64 {
        self.rebound_velocity.norm()
    }
}

/// Two identical spheroids with horizontal axes; the lower one is fixed, the
/// upper one is turned by `orientation_deg` about +y and falls onto it.
pub fn run_pair_impact_with(
    config: &PairImpactConfig,
    template: Arc<ShapeTemplate>,
    orientation_deg: f64,
    curvature: CurvatureModel,
) -> Result<PairImpactResult> {
    let mat = config.material();
    let lying = axis_angle(Vec3::y(), std::f64::consts::FRAC_PI_2);
    let mut lower = Particle::new(0, template.clone(), mat);
    lower.orientation = lying;
    lower.fixed = true;
    let mut upper = Particle::new(1, template, mat);
    upper.orientation = axis_angle(Vec3::y(), orientation_deg.to_radians()) * lying;
    upper.velocity = Vec3::new(0.0, 0.0, -config.speed);
    upper.position.z = lower.extent(Vec3::z()) + upper.extent(-Vec3::z()) + config.gap;
    let options = EngineOptions {
        gravity: Vec3::zeros(),
        curvature,
        diagnostics: true,
        ..config.model.engine_options(config.dt)
    };
    let mut engine = Engine::new(vec![lower, upper], Vec::new(), options)?;
    let mut trace = Vec::new();
    let mut touched = false;
    let mut steps_in_contact = 0u64;
    for _ in 0..config.max_steps {
        engine.step()?;
        let d = engine.diagnostics();
        if d.is_empty() {
            if touched {
                let p = &engine.particles[1];
                return Ok(PairImpactResult {
                    orientation_deg,
                    curvature,
                    trace,
                    contact_duration: steps_in_contact as f64 * config.dt,
                    rebound_velocity: p.velocity,
                    rebound_omega: p.angular_velocity(),
                });
            }
            continue;
        }
        touched = true;
        steps_in_contact += 1;
        let deepest = d
            .iter()
            .max_by(|x, y| x.overlap.total_cmp(&y.overlap))
            .unwrap();
        let p = &engine.particles[1];
        trace.push(PairTracePoint {
            time: engine.time,
            overlap: deepest.overlap,
            normal_force: d.iter().map(|x| x.normal).sum(),
            elastic_force: d.iter().map(|x| x.elastic).sum(),
            r_star: deepest.r_star,
            velocity_z: p.velocity.z,
            omega_y: p.angular_velocity().y,
        });
    }
    Err(Error::ContactNotReleased(config.max_steps))
}

pub fn run_pair_impact(
    config: &PairImpactConfig,
    orientation_deg: f64,
    curvature: CurvatureModel,
) -> Result<PairImpactResult> {
    run_pair_impact_with(config, config.template()?, orientation_deg, curvature)
}
