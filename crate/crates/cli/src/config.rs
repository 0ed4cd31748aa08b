//! TOML simulation configuration.
//!
//! A file has five tables: `[shape]` (tagged by `family`), `[material]`,
//! `[model]` (optional), `[run]` and `[geometry]` (tagged by `kind`). Units
//! are SI throughout. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use srdem::body::{MaterialParams, ShapeTemplate, TemplateOptions};
use srdem::contact::NarrowPhaseOptions;
use srdem::force::{CurvatureModel, ForceOptions};
use srdem::integrate::{critical_timestep, ConvexityMode, DEFAULT_SAFETY_FACTOR};
use srdem::scenarios::{
    impact_angles, DrumConfig, ModelOptions, PackingConfig, PairImpactConfig, TabletGeometry,
    WallImpactConfig, FILL_HEIGHT_BINS,
};
use srdem::sdf2d::SdfOptions;
use srdem::shape::{build_profile, NodeStrategy, ShapeSpec};

/// Smallest Young's or shear modulus accepted, Pa.
pub const MIN_MODULUS: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub shape: ShapeSpec,
    pub material: MaterialBlock,
    #[serde(default)]
    pub model: ModelBlock,
    pub run: RunBlock,
    pub geometry: Geometry,
}

/// Give one of `youngs_modulus` and `shear_modulus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub youngs_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear_modulus: Option<f64>,
    pub poisson_ratio: f64,
    pub density: f64,
    #[serde(default = "one")]
    pub restitution_pp: f64,
    #[serde(default = "one")]
    pub restitution_pw: f64,
    #[serde(default)]
    pub friction_pp: f64,
    #[serde(default)]
    pub friction_pw: f64,
}

fn one() -> f64 {
    1.0
}

impl MaterialBlock {
    pub fn params(&self) -> MaterialParams {
        let m = match (self.youngs_modulus, self.shear_modulus) {
            (_, Some(g)) => MaterialParams::from_shear(g, self.poisson_ratio, self.density),
            (y, None) => {
                MaterialParams::new(y.unwrap_or(f64::NAN), self.poisson_ratio, self.density)
            }
        };
        m.with_restitution(self.restitution_pp, self.restitution_pw)
            .with_friction(self.friction_pp, self.friction_pw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelBlock {
    pub curvature: CurvatureModel,
    pub convexity: ConvexityMode,
    pub n_nodes: usize,
    pub node_strategy: NodeStrategy,
    pub sdf: SdfOptions,
    pub force: ForceOptions,
    pub narrow: NarrowPhaseOptions,
}

impl Default for ModelBlock {
    fn default() -> Self {
        let t = TemplateOptions::default();
        Self {
            curvature: CurvatureModel::default(),
            convexity: ConvexityMode::default(),
            n_nodes: t.n_nodes,
            node_strategy: t.node_strategy,
            sdf: t.sdf,
            force: ForceOptions::default(),
            narrow: NarrowPhaseOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub dt: f64,
    /// Simulated time budget; caps impact steps and packing or drum runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Spacing of the drum measurement snapshots, s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Divisor applied to the critical step when checking `dt`.
    #[serde(default = "default_safety")]
    pub n_safety: f64,
    #[serde(default = "yes")]
    pub deterministic: bool,
}

fn default_safety() -> f64 {
    DEFAULT_SAFETY_FACTOR
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    WallImpact(WallImpactGeometry),
    PairImpact(PairImpactGeometry),
    Packing(PackingGeometry),
    Drum(DrumGeometry),
}

impl Geometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::WallImpact(_) => "wall_impact",
            Geometry::PairImpact(_) => "pair_impact",
            Geometry::Packing(_) => "packing",
            Geometry::Drum(_) => "drum",
        }
    }
}

/// Tablet or other particle dropped on the plane `z = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallImpactGeometry {
    #[serde(default = "unit_speed")]
    pub speed: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Tilt angles in degrees.
    #[serde(default = "impact_angles")]
    pub angles: Vec<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairImpactGeometry {
    #[serde(default = "unit_speed")]
    pub speed: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
    #[serde(default = "default_orientations")]
    pub orientations: Vec<f64>,
    #[serde(default = "default_curvatures")]
    pub curvature_models: Vec<CurvatureModel>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackingGeometry {
    pub diameter: f64,
    pub height: f64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_height: Option<f64>,
    #[serde(default = "default_batch_min")]
    pub batch_min: usize,
    #[serde(default = "default_batch_max")]
    pub batch_max: usize,
    #[serde(default = "default_settle_speed")]
    pub settle_speed: f64,
    #[serde(default = "default_settle_time")]
    pub settle_time: f64,
    #[serde(default = "default_fill_bins")]
    pub fill_bins: usize,
    #[serde(default = "yes")]
    pub random_orientations: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrumGeometry {
    pub diameter: f64,
    pub length: f64,
    pub rpm: f64,
    pub count: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default = "default_steady_window")]
    pub steady_window: f64,
    #[serde(default = "default_steady_std")]
    pub steady_std: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

fn unit_speed() -> f64 {
    1.0
}
fn default_gap() -> f64 {
    2e-7
}
fn default_max_steps() -> u64 {
    200_000
}
fn default_orientations() -> Vec<f64> {
    vec![0.0, 45.0]
}
fn default_curvatures() -> Vec<CurvatureModel> {
    vec![CurvatureModel::Mean, CurvatureModel::Equivalent]
}
fn default_batch_min() -> usize {
    3
}
fn default_batch_max() -> usize {
    5
}
fn default_settle_speed() -> f64 {
    1e-3
}
fn default_settle_time() -> f64 {
    0.05
}
fn default_fill_bins() -> usize {
    FILL_HEIGHT_BINS
}
fn default_bins() -> usize {
    75
}
fn default_sample_interval() -> f64 {
    0.1
}
fn default_steady_window() -> f64 {
    2.0
}
fn default_steady_std() -> f64 {
    1.5
}
fn default_snapshots() -> usize {
    10
}

/// Keys without defaults, as dotted paths. Geometry keys depend on the kind.
fn missing_keys(table: &toml::Table) -> Vec<String> {
    let get = |path: &str| -> Option<&toml::Value> {
        let mut parts = path.split('.');
        let mut v = table.get(parts.next()?)?;
        for p in parts {
            v = v.as_table()?.get(p)?;
        }
        Some(v)
    };
    let mut missing = Vec::new();
    let mut need = |path: &str| {
        if get(path).is_none() {
            missing.push(path.to_string());
        }
    };
    need("shape.family");
    need("material.poisson_ratio");
    need("material.density");
    need("run.dt");
    need("geometry.kind");
    if get("material.youngs_modulus").is_none() && get("material.shear_modulus").is_none() {
        missing.insert(
            1,
            "material.youngs_modulus (or material.shear_modulus)".into(),
        );
    }
    let kind_keys: &[&str] = match get("geometry.kind").and_then(|v| v.as_str()) {
        Some("packing") => &["diameter", "height", "count"],
        Some("drum") => &["diameter", "length", "rpm", "count"],
        _ => &[],
    };
    for k in kind_keys {
        if get(&format!("geometry.{k}")).is_none() {
            missing.push(format!("geometry.{k}"));
        }
    }
    missing
}

impl SimConfig {
    /// Parse and validate configuration text. Relative profile paths are
    /// resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).context("malformed TOML")?;
        let missing = missing_keys(&table);
        if !missing.is_empty() {
            bail!("missing required keys: {}", missing.join(", "));
        }
        let mut config: SimConfig = toml::from_str(text).context("invalid configuration")?;
        if let (ShapeSpec::File { path }, Some(base)) = (&mut config.shape, base) {
            let p = PathBuf::from(&*path);
            if p.is_relative() {
                *path = base.join(p).to_string_lossy().into_owned();
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.material;
        if m.youngs_modulus.is_some() && m.shear_modulus.is_some() {
            bail!("give only one of material.youngs_modulus and material.shear_modulus");
        }
        for (name, value) in [
            ("material.youngs_modulus", m.youngs_modulus),
            ("material.shear_modulus", m.shear_modulus),
        ] {
            if let Some(v) = value {
                if !(v >= MIN_MODULUS) {
                    bail!("{name} = {v} Pa is below {MIN_MODULUS} Pa; moduli are in Pa");
                }
            }
        }
        self.material.params().validate()?;
        if !(self.run.dt > 0.0) {
            bail!("run.dt must be positive");
        }
        if !(self.run.n_safety > 0.0) {
            bail!("run.n_safety must be positive");
        }
        Ok(())
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn template_options(&self) -> TemplateOptions {
        TemplateOptions {
            n_nodes: self.model.n_nodes,
            node_strategy: self.model.node_strategy,
            sdf: self.model.sdf,
        }
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            curvature: self.model.curvature,
            convexity: self.model.convexity,
            force: self.model.force,
            narrow: self.model.narrow,
            ..Default::default()
        }
    }

    pub fn template(&self) -> Result<Arc<ShapeTemplate>> {
        let profile = build_profile(&self.shape)?;
        Ok(ShapeTemplate::build(
            &profile,
            self.material.density,
            &self.template_options(),
        )?)
    }

    /// Tablet dimensions when the shape is a tablet.
    pub fn tablet(&self) -> Option<(TabletGeometry, f64)> {
        match self.shape {
            ShapeSpec::Tablet {
                band_radius,
                band_height,
                cap_height,
                edge_radius,
            } => Some((
                TabletGeometry {
                    band_radius,
                    band_height,
                    cap_height,
                },
                edge_radius,
            )),
            _ => None,
        }
    }

    fn steps(&self, max_steps: u64) -> u64 {
        self.run
            .duration
            .map_or(max_steps, |d| (d / self.run.dt).ceil() as u64)
    }

    pub fn wall_impact(&self) -> Result<(WallImpactConfig, Vec<f64>)> {
        let Geometry::WallImpact(g) = &self.geometry else {
            bail!(
                "geometry.kind is {}, expected wall_impact",
                self.geometry.kind()
            );
        };
        let m = self.material.params();
        let (geometry, edge_radius) = self.tablet().unwrap_or((TabletGeometry::STANDARD, 0.0));
        let config = WallImpactConfig {
            geometry,
            edge_radius,
            shear_modulus: m.shear_modulus,
            poisson_ratio: m.poisson_ratio,
            density: m.density,
            restitution: m.restitution_pw,
            dt: self.run.dt,
            speed: g.speed,
            template: self.template_options(),
            gap: g.gap,
            max_steps: self.steps(g.max_steps),
            model: self.model_options(),
        };
        Ok((config, g.angles.clone()))
    }

    pub fn pair_impact(&self) -> Result<(PairImpactConfig, &PairImpactGeometry)> {
        let Geometry::PairImpact(g) = &self.geometry else {
            bail!(
                "geometry.kind is {}, expected pair_impact",
                self.geometry.kind()
            );
        };
        let m = self.material.params();
        let defaults = PairImpactConfig::default();
        let (equatorial_radius, polar_radius) = match self.shape {
            ShapeSpec::Spheroid {
                equatorial_radius,
                polar_radius,
            } => (equatorial_radius, polar_radius),
            ShapeSpec::Sphere { radius } => (radius, radius),
            _ => (defaults.equatorial_radius, defaults.polar_radius),
        };
        let config = PairImpactConfig {
            equatorial_radius,
            polar_radius,
            youngs_modulus: m.youngs_modulus,
            poisson_ratio: m.poisson_ratio,
            density: m.density,
            restitution: m.restitution_pp,
            dt: self.run.dt,
            speed: g.speed,
            template: self.template_options(),
            gap: g.gap,
            max_steps: self.steps(g.max_steps),
            model: self.model_options(),
        };
        Ok((config, g))
    }

    pub fn packing(&self) -> Result<PackingConfig> {
        let Geometry::Packing(g) = &self.geometry else {
            bail!(
                "geometry.kind is {}, expected packing",
                self.geometry.kind()
            );
        };
        Ok(PackingConfig {
            shape: self.shape.clone(),
            material: self.material.params(),
            template: self.template_options(),
            model: self.model_options(),
            count: g.count,
            container_diameter: g.diameter,
            container_height: g.height,
            drop_height: g.drop_height,
            batch_min: g.batch_min,
            batch_max: g.batch_max,
            dt: self.run.dt,
            settle_speed: g.settle_speed,
            settle_time: g.settle_time,
            max_time: self
                .run
                .duration
                .unwrap_or(PackingConfig::default().max_time),
            seed: self.run.seed,
            fill_bins: g.fill_bins,
            random_orientations: g.random_orientations,
        })
    }

    pub fn drum(&self) -> Result<DrumConfig> {
        let Geometry::Drum(g) = &self.geometry else {
            bail!("geometry.kind is {}, expected drum", self.geometry.kind());
        };
        let defaults = DrumConfig::default();
        Ok(DrumConfig {
            shape: self.shape.clone(),
            material: self.material.params(),
            template: self.template_options(),
            model: self.model_options(),
            count: g.count,
            diameter: g.diameter,
            length: g.length,
            rpm: g.rpm,
            dt: self.run.dt,
            seed: self.run.seed,
            bins: g.bins,
            sample_interval: g.sample_interval,
            steady_window: g.steady_window,
            steady_std: g.steady_std,
            snapshots: g.snapshots,
            snapshot_interval: self
                .run
                .snapshot_interval
                .unwrap_or(defaults.snapshot_interval),
            max_time: self.run.duration.unwrap_or(defaults.max_time),
        })
    }

    /// Largest impact or drop speed the run is expected to see.
    fn expected_speed(&self) -> f64 {
        match &self.geometry {
            Geometry::WallImpact(g) => g.speed,
            Geometry::PairImpact(g) => g.speed,
            Geometry::Packing(g) => (2.0 * 9.81 * g.height).sqrt(),
            Geometry::Drum(g) => (2.0 * 9.81 * g.diameter).sqrt(),
        }
    }

    /// Critical step divided by `n_safety`, for the configured particle.
    pub fn recommended_dt(&self, template: &ShapeTemplate) -> f64 {
        let (z0, z1) = template.profile.z_range();
        let r_min = template.profile.x_max().min(0.5 * (z1 - z0));
        critical_timestep(
            &self.material.params(),
            r_min,
            self.expected_speed(),
            template.mass.mass,
        ) / self.run.n_safety
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SimConfig::from_toml(&text, path.parent()).with_context(|| format!("in {}", path.display()))
}
