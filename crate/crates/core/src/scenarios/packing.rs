//! Batch-wise gravity packing in a vertical cylinder.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::body::{MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use crate::contact::{Wall, WallShape};
use crate::integrate::Engine;
use crate::shape::{build_profile, ShapeSpec};
use crate::{Error, Result, Vec3};

use super::analysis::{fill_height, FillHeight, FILL_HEIGHT_BINS};
use super::presets::BedParticle;
use super::{random_orientation, ModelOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackingConfig {
    pub shape: ShapeSpec,
    pub material: MaterialParams,
    pub template: TemplateOptions,
    pub model: ModelOptions,
    pub count: usize,
    pub container_diameter: f64,
    pub container_height: f64,
    /// Centre height of new particles; defaults to one bounding radius below the rim.
    pub drop_height: Option<f64>,
    pub batch_min: usize,
    pub batch_max: usize,
    pub dt: f64,
    /// A batch has settled once the largest speed stayed below
    /// `settle_speed` for `settle_time`.
    pub settle_speed: f64,
    pub settle_time: f64,
    /// Simulated time budget.
    pub max_time: f64,
    pub seed: u64,
    pub fill_bins: usize,
    /// Drop particles in random orientations; otherwise body axes stay
    /// aligned with the world axes.
    pub random_orientations: bool,
}

impl Default for PackingConfig {
    fn default() -> Self {
        Self::preset(BedParticle::Tablet)
    }
}

impl PackingConfig {
    pub fn preset(kind: BedParticle) -> Self {
        let (d, h) = kind.container();
        Self {
            shape: kind.shape(),
            material: kind.material(),
            template: TemplateOptions::default(),
            model: ModelOptions::default(),
            count: kind.packing_count(),
            container_diameter: d,
            container_height: h,
            drop_height: None,
            batch_min: 3,
            batch_max: 5,
            dt: kind.dt(),
            settle_speed: 1e-3,
            settle_time: 0.05,
            max_time: 600.0,
            seed: 0,
            fill_bins: FILL_HEIGHT_BINS,
            random_orientations: true,
        }
    }

    pub fn template(&self) -> Result<Arc<ShapeTemplate>> {
        ShapeTemplate::build(
            &build_profile(&self.shape)?,
            self.material.density,
            &self.template,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 || self.batch_min == 0 || self.batch_min > self.batch_max {
            return Err(Error::Config(
                "packing needs count > 0 and 0 < batch_min <= batch_max".into(),
            ));
        }
        if !(self.container_diameter > 0.0 && self.container_height > 0.0) {
            return Err(Error::Config(
                "container dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PackingResult {
    pub fill: FillHeight,
    pub particles: Vec<Particle>,
    pub time: f64,
    pub steps: u64,
    pub batches: usize,
    pub seed: u64,
}

/// Floor and side wall of the container; the floor is `z = 0`.
pub fn container_walls(diameter: f64, height: f64, material: MaterialParams) -> Result<Vec<Wall>> {
    Ok(vec![
        Wall::plane(0, Vec3::zeros(), Vec3::z(), material)?,
        Wall::new(
            1,
            WallShape::Cylinder {
                radius: 0.5 * diameter,
                p1: Vec3::zeros(),
                p2: Vec3::new(0.0, 0.0, height),
                inward: true,
            },
            material,
        )?,
    ])
}

/// Lateral positions for a batch, clear of each other and of the particles
/// already present near the drop height.
fn batch_positions(
    rng: &mut ChaCha8Rng,
    k: usize,
    existing: &[Particle],
    radius: f64,
    r_b: f64,
    z: f64,
) -> Vec<Vec3> {
    let reach = radius - 1.05 * r_b;
    let mut out: Vec<Vec3> = Vec::with_capacity(k);
    for _ in 0..1000 * k {
        if out.len() == k {
            break;
        }
        let (r, a) = (
            reach.max(0.0) * rng.random::<f64>().sqrt(),
            std::f64::consts::TAU * rng.random::<f64>(),
        );
        let c = Vec3::new(r * a.cos(), r * a.sin(), z);
        let clear = |q: &Vec3, rq: f64| (c - q).norm() > 1.05 * (r_b + rq);
        if out.iter().all(|q| clear(q, r_b))
            && existing
                .iter()
                .all(|p| clear(&p.position, p.bounding_radius()))
        {
            out.push(c);
        }
    }
    out
}

fn check_contained(engine: &Engine, radius: f64, height: f64) -> Result<()> {
    for p in &engine.particles {
        let r = p.bounding_radius();
        let x = p.position;
        if x.z < -r
            || x.xy().norm() > radius + r
            || x.z > 2.0 * height + r
            || !x.iter().all(|v| v.is_finite())
        {
            return Err(Error::Escaped(p.id));
        }
    }
    Ok(())
}

pub fn run_packing(config: &PackingConfig) -> Result<PackingResult> {
    run_packing_observed(config, |_, _| {})
}

/// As [`run_packing`], calling `observer(engine, batch)` after each settled batch.
pub fn run_packing_observed(
    config: &PackingConfig,
    mut observer: impl FnMut(&Engine, usize),
) -> Result<PackingResult> {
    config.validate()?;
    let template = config.template()?;
    let radius = 0.5 * config.container_diameter;
    let r_b = template.bounding_radius;
    let z_drop = config.drop_height.unwrap_or(config.container_height - r_b);
    let walls = container_walls(
        config.container_diameter,
        config.container_height,
        config.material,
    )?;
    let mut engine = Engine::new(Vec::new(), walls, config.model.engine_options(config.dt))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let settle_steps = (config.settle_time / config.dt).ceil() as u64;
    let mut batches = 0;
    while engine.particles.len() < config.count {
        let left = config.count - engine.particles.len();
        let k = rng
            .random_range(config.batch_min..=config.batch_max)
            .min(left);
        let spots = batch_positions(&mut rng, k, &engine.particles, radius, r_b, z_drop);
        if spots.is_empty() {
            return Err(Error::Config("no room to drop the next batch".into()));
        }
        for c in spots {
            let mut p = Particle::new(0, template.clone(), config.material);
            p.position = c;
            if config.random_orientations {
                p.orientation = random_orientation(&mut rng);
            }
            engine.add_particle(p)?;
        }
        batches += 1;
        let mut calm = 0;
        while calm < settle_steps {
            engine.step()?;
            calm = if engine.max_speed() < config.settle_speed {
                calm + 1
            } else {
                0
            };
            if engine.step_count % 1000 == 0 {
                check_contained(&engine, radius, config.container_height)?;
            }
            if engine.time > config.max_time {
                return Err(Error::NotSettled(engine.time));
            }
        }
        check_contained(&engine, radius, config.container_height)?;
        observer(&engine, batches);
    }
    let fill = fill_height(&engine.particles, radius, 0.0, config.fill_bins)?;
    Ok(PackingResult {
        fill,
        time: engine.time,
        steps: engine.step_count,
        batches,
        seed: config.seed,
        particles: engine.particles,
    })
}
