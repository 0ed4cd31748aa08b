//! Discrete element engine for rigid particles whose surfaces are closed
//! surfaces of revolution.
//!
//! Contact detection works in 2D: the master particle contributes surface
//! nodes, the slave contributes a quadtree-refined signed distance field of
//! its meridian cross-section. Forces follow the Hertz-Mindlin model and
//! bodies advance with a quaternion Velocity-Verlet integrator.
//!
//! Module map:
//! - [`shape`]: profiles, mass properties, surface nodes, curvature tables
//! - [`sdf2d`]: cross-section signed distance fields
//! - [`body`]: particle state, quaternions, materials, shared templates
//! - [`contact`]: broad/narrow phase and wall contacts
//! - [`force`]: Hertz-Mindlin forces and torques
//! - [`integrate`]: time stepping and the simulation engine
//! - [`scenarios`]: validation drivers and their post-processing
//! - [`validation`]: the fast self-check suite

pub mod body;
pub mod contact;
mod error;
pub mod force;
pub mod geom;
pub mod integrate;
pub mod par;
pub mod scenarios;
pub mod sdf2d;
pub mod shape;
pub mod validation;

pub use error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Quat = nalgebra::Quaternion<f64>;
