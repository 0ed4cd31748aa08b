//! Rotating drum with horizontal axis along y.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::body::{MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use crate::contact::{Wall, WallShape};
use crate::integrate::Engine;
use crate::shape::{build_profile, ShapeSpec};
use crate::{Error, Result, Vec2, Vec3};

use super::analysis::{free_surface_profile, lls_angle_of_repose};
use super::presets::BedParticle;
use super::{random_orientation, ModelOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrumConfig {
    pub shape: ShapeSpec,
    pub material: MaterialParams,
    pub template: TemplateOptions,
    pub model: ModelOptions,
    pub count: usize,
    pub diameter: f64,
    pub length: f64,
    pub rpm: f64,
    pub dt: f64,
    pub seed: u64,
    /// Free-surface columns.
    pub bins: usize,
    /// Interval between angle samples while waiting for steady flow.
    pub sample_interval: f64,
    /// Flow is steady once the angle samples of the last `steady_window`
    /// seconds have a standard deviation below `steady_std` degrees.
    pub steady_window: f64,
    pub steady_std: f64,
    pub snapshots: usize,
    pub snapshot_interval: f64,
    pub max_time: f64,
}

impl Default for DrumConfig {
    fn default() -> Self {
        Self::preset(BedParticle::Tablet)
    }
}

impl DrumConfig {
    pub fn preset(kind: BedParticle) -> Self {
        Self {
            shape: kind.shape(),
            material: kind.material(),
            template: TemplateOptions::default(),
            model: ModelOptions::default(),
            count: kind.drum_count(),
            diameter: 0.1,
            length: 0.056,
            rpm: 25.0,
            dt: kind.dt(),
            seed: 0,
            bins: 75,
            sample_interval: 0.1,
            steady_window: 2.0,
            steady_std: 1.5,
            snapshots: 10,
            snapshot_interval: 1.0,
            max_time: 60.0,
        }
    }

    pub fn template(&self) -> Result<Arc<ShapeTemplate>> {
        ShapeTemplate::build(
            &build_profile(&self.shape)?,
            self.material.density,
            &self.template,
        )
    }

    pub fn angular_velocity(&self) -> Vec3 {
        Vec3::new(0.0, self.rpm * std::f64::consts::TAU / 60.0, 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct DrumResult {
    /// Dynamic angle of repose of each measurement snapshot, degrees.
    pub angles: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub profiles: Vec<Vec<Vec2>>,
    /// Time at which the flow was detected as steady.
    pub steady_time: f64,
    pub seed: u64,
}

/// Drum shell and the two end plates, all turning with the drum.
pub fn drum_walls(config: &DrumConfig) -> Result<Vec<Wall>> {
    let (r, h) = (0.5 * config.diameter, 0.5 * config.length);
    let w = config.angular_velocity();
    let m = config.material;
    let shell = WallShape::Cylinder {
        radius: r,
        p1: Vec3::new(0.0, -h, 0.0),
        p2: Vec3::new(0.0, h, 0.0),
        inward: true,
    };
    Ok(vec![
        Wall::new(0, shell, m)?.with_rotation(w, Vec3::zeros()),
        Wall::plane(1, Vec3::new(0.0, -h, 0.0), Vec3::y(), m)?.with_rotation(w, Vec3::zeros()),
        Wall::plane(2, Vec3::new(0.0, h, 0.0), -Vec3::y(), m)?.with_rotation(w, Vec3::zeros()),
    ])
}

/// Randomly chosen sites of a cubic lattice inside the drum.
fn initial_sites(config: &DrumConfig, r_b: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec3>> {
    let spacing = 2.1 * r_b;
    let (r, h) = (0.5 * config.diameter, 0.5 * config.length);
    let reach = r - 1.05 * r_b;
    let n = (r / spacing).ceil() as i64;
    let ny = ((h - r_b) / spacing).floor() as i64;
    let mut sites = Vec::new();
    for i in -n..=n {
        for k in -n..=n {
            let (x, z) = (i as f64 * spacing, k as f64 * spacing);
            if x.hypot(z) > reach {
                continue;
            }
            for j in -ny..=ny {
                sites.push(Vec3::new(x, j as f64 * spacing, z));
            }
        }
    }
    if sites.len() < config.count {
        return Err(Error::Config(format!(
            "drum holds {} initial sites, {} particles requested",
            sites.len(),
            config.count
        )));
    }
    sites.shuffle(rng);
    sites.truncate(config.count);
    Ok(sites)
}

fn angle(engine: &Engine, config: &DrumConfig) -> Result<(f64, Vec<Vec2>)> {
    let points = free_surface_profile(
        &engine.particles,
        Vec3::zeros(),
        0.5 * config.diameter,
        config.bins,
    );
    Ok((lls_angle_of_repose(&points)?, points))
}

fn std_dev(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn advance(engine: &mut Engine, duration: f64, radius: f64) -> Result<()> {
    let until = engine.time + duration;
    while engine.time < until - 0.5 * engine.options.dt {
        engine.step()?;
        if engine.step_count.is_multiple_of(1000) {
            if let Some(p) = engine
                .particles
                .iter()
                .find(|p| p.position.xz().norm() > radius + p.bounding_radius())
            {
                return Err(Error::Escaped(p.id));
            }
        }
    }
    Ok(())
}

pub fn run_drum(config: &DrumConfig) -> Result<DrumResult> {
    run_drum_observed(config, |_, _| {})
}

/// As [`run_drum`], calling `observer(engine, k)` at each measurement snapshot.
pub fn run_drum_observed(
    config: &DrumConfig,
    mut observer: impl FnMut(&Engine, usize),
) -> Result<DrumResult> {
    if config.count == 0 || config.bins < 2 || config.snapshots == 0 {
        return Err(Error::Config(
            "drum needs particles, at least two bins and one snapshot".into(),
        ));
    }
    let template = config.template()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let particles = initial_sites(config, template.bounding_radius, &mut rng)?
        .into_iter()
        .map(|c| {
            let mut p = Particle::new(0, template.clone(), config.material);
            p.position = c;
            p.orientation = random_orientation(&mut rng);
            p
        })
        .collect();
    let radius = 0.5 * config.diameter;
    let mut engine = Engine::new(
        particles,
        drum_walls(config)?,
        config.model.engine_options(config.dt),
    )?;

    let window = (config.steady_window / config.sample_interval)
        .round()
        .max(2.0) as usize;
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(window + 1);
    let steady_time = loop {
        advance(&mut engine, config.sample_interval, radius)?;
        if let Ok((a, _)) = angle(&engine, config) {
            recent.push_back(a);
            if recent.len() > window {
                recent.pop_front();
            }
        }
        if recent.len() == window && std_dev(recent.iter().copied()).1 < config.steady_std {
            break engine.time;
        }
        if engine.time > config.max_time {
            return Err(Error::NotSteady);
        }
    };

    let mut angles = Vec::with_capacity(config.snapshots);
    let mut profiles = Vec::with_capacity(config.snapshots);
    for k in 0..config.snapshots {
        if k > 0 {
            advance(&mut engine, config.snapshot_interval, radius)?;
        }
        let (a, points) = angle(&engine, config)?;
        observer(&engine, k);
        angles.push(a);
        profiles.push(points);
    }
    let (mean, std) = std_dev(angles.iter().copied());
    Ok(DrumResult {
        angles,
        mean,
        std,
        profiles,
        steady_time,
        seed: config.seed,
    })
}
