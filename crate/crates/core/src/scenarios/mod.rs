//! Validation and application scenarios.

pub mod analysis;
pub mod drum;
pub mod impact;
pub mod packing;
pub mod presets;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contact::NarrowPhaseOptions;
use crate::force::{CurvatureModel, ForceOptions};
use crate::integrate::{ConvexityMode, EngineOptions};
use crate::{par, Quat};

pub use analysis::{
    fill_height, free_surface_profile, lls_angle_of_repose, FillHeight, FILL_HEIGHT_BINS,
};
pub use drum::{run_drum, run_drum_observed, DrumConfig, DrumResult};
pub use impact::{
    analytic_wall_impact, impact_angles, run_pair_impact, run_pair_impact_with, run_wall_impact,
    run_wall_impact_with, ImpactResult, PairImpactConfig, PairImpactResult, PairTracePoint,
    TabletGeometry, WallImpactConfig,
};
pub use packing::{run_packing, run_packing_observed, PackingConfig, PackingResult};
pub use presets::BedParticle;

/// Contact-model switches shared by the multi-particle scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub curvature: CurvatureModel,
    pub convexity: ConvexityMode,
    pub force: ForceOptions,
    pub narrow: NarrowPhaseOptions,
    pub parallel: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            curvature: CurvatureModel::default(),
            convexity: ConvexityMode::default(),
            force: ForceOptions::default(),
            narrow: NarrowPhaseOptions::default(),
            parallel: par::available(),
        }
    }
}

impl ModelOptions {
    pub fn engine_options(&self, dt: f64) -> EngineOptions {
        EngineOptions {
            dt,
            curvature: self.curvature,
            convexity: self.convexity,
            force: self.force,
            narrow: self.narrow,
            parallel: self.parallel,
            ..Default::default()
        }
    }
}

/// Uniformly distributed random unit quaternion.
pub fn random_orientation(rng: &mut impl Rng) -> Quat {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Quat::new(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    )
}
