//! Particle and container presets of the packing and drum studies.

use serde::{Deserialize, Serialize};

use crate::body::MaterialParams;
use crate::shape::ShapeSpec;

use super::impact::TabletGeometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BedParticle {
    Tablet,
    Candy,
}

impl BedParticle {
    pub fn shape(self) -> ShapeSpec {
        match self {
            Self::Tablet => TabletGeometry::STANDARD.spec(0.0),
            Self::Candy => ShapeSpec::Spheroid {
                equatorial_radius: 6.585e-3,
                polar_radius: 3.395e-3,
            },
        }
    }

    pub fn material(self) -> MaterialParams {
        match self {
            Self::Tablet => MaterialParams::new(5.0e7, 0.3, 1191.3)
                .with_restitution(0.6, 0.6)
                .with_friction(0.38, 0.22),
            Self::Candy => MaterialParams::new(5.0e7, 0.29, 1377.0)
                .with_restitution(0.5, 0.5)
                .with_friction(0.3, 0.3),
        }
    }

    pub fn dt(self) -> f64 {
        match self {
            Self::Tablet => 2.0e-7,
            Self::Candy => 5.0e-7,
        }
    }

    /// Packing container as (diameter, height).
    pub fn container(self) -> (f64, f64) {
        match self {
            Self::Tablet => (50.6e-3, 130.0e-3),
            Self::Candy => (50.8e-3, 203.2e-3),
        }
    }

    pub fn packing_count(self) -> usize {
        match self {
            Self::Tablet => 150,
            Self::Candy => 250,
        }
    }

    pub fn drum_count(self) -> usize {
        match self {
            Self::Tablet => 150,
            Self::Candy => 130,
        }
    }
}
