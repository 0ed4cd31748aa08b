//! Rigid-body state, frames and materials.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sdf2d::{build_sdf, SdfGrid, SdfOptions};
use crate::shape::{
    curvature_table, generate_nodes, revolve_properties, CurvatureTable, MassProperties,
    NodeStrategy, Profile, SurfaceNodeSet, CURVATURE_SAMPLES,
};
use crate::{Error, Mat3, Quat, Result, Vec2, Vec3};

pub const GRAVITY: Vec3 = Vec3::new(0.0, 0.0, -9.81);

/// Elastic and contact parameters of a particle material. Restitution and
/// friction are given separately for particle-particle (`pp`) and
/// particle-wall (`pw`) contacts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub youngs_modulus: f64,
    pub shear_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub restitution_pp: f64,
    pub restitution_pw: f64,
    pub friction_pp: f64,
    pub friction_pw: f64,
}

impl MaterialParams {
    /// Frictionless material with unit restitution and `G = Y / (2 (1 + ν))`.
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, density: f64) -> Self {
        Self {
            youngs_modulus,
            shear_modulus: youngs_modulus / (2.0 * (1.0 + poisson_ratio)),
            poisson_ratio,
            density,
            restitution_pp: 1.0,
            restitution_pw: 1.0,
            friction_pp: 0.0,
            friction_pw: 0.0,
        }
    }

    /// Material specified by shear modulus, with `Y = 2 G (1 + ν)`.
    pub fn from_shear(shear_modulus: f64, poisson_ratio: f64, density: f64) -> Self {
        Self {
            shear_modulus,
            ..Self::new(
                2.0 * shear_modulus * (1.0 + poisson_ratio),
                poisson_ratio,
                density,
            )
        }
    }

    pub fn with_restitution(mut self, pp: f64, pw: f64) -> Self {
        self.restitution_pp = pp;
        self.restitution_pw = pw;
        self
    }

    pub fn with_friction(mut self, pp: f64, pw: f64) -> Self {
        self.friction_pp = pp;
        self.friction_pw = pw;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidMaterial(what.to_string()));
        if !(self.youngs_modulus > 0.0 && self.shear_modulus > 0.0 && self.density > 0.0) {
            return bad("moduli and density must be positive");
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return bad("Poisson's ratio must lie in (0, 0.5)");
        }
        for e in [self.restitution_pp, self.restitution_pw] {
            if !(e > 0.0 && e <= 1.0) {
                return bad("restitution must lie in (0, 1]");
            }
        }
        if !(self.friction_pp >= 0.0 && self.friction_pw >= 0.0) {
            return bad("friction must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateOptions {
    pub n_nodes: usize,
    pub node_strategy: NodeStrategy,
    pub sdf: SdfOptions,
}

impl Default for TemplateOptions {
    fn default() -> Self {
        Self {
            n_nodes: 2000,
            node_strategy: NodeStrategy::Uniform,
            sdf: SdfOptions::default(),
        }
    }
}

/// Everything shared by particles of one shape. The profile is shifted so the
/// centre of mass sits at the body origin.
#[derive(Debug)]
pub struct ShapeTemplate {
    pub profile: Profile,
    pub sdf: SdfGrid,
    pub nodes: SurfaceNodeSet,
    pub curvature: CurvatureTable,
    pub mass: MassProperties,
    pub convex: bool,
    pub equatorial_symmetry: bool,
    /// Largest distance from the centre of mass to the surface.
    pub bounding_radius: f64,
}

impl ShapeTemplate {
    pub fn build(profile: &Profile, density: f64, options: &TemplateOptions) -> Result<Arc<Self>> {
        let mass0 = revolve_properties(profile, density)?;
        let profile = profile.shifted(-mass0.center_of_mass_z);
        let mass = MassProperties {
            center_of_mass_z: 0.0,
            ..mass0
        };
        let sdf = build_sdf(&profile, &options.sdf)?;
        let nodes = generate_nodes(&profile, options.n_nodes, options.node_strategy)?;
        let curvature = curvature_table(&profile, CURVATURE_SAMPLES);
        let bounding_radius = profile
            .points()
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        Ok(Arc::new(Self {
            convex: profile.is_convex(),
            equatorial_symmetry: profile.is_equatorially_symmetric(),
            profile,
            sdf,
            nodes,
            curvature,
            mass,
            bounding_radius,
        }))
    }

    pub fn major_axis_length(&self) -> f64 {
        self.profile.major_axis_length()
    }

    /// Support function of the body-frame shape: the largest `u · p` over
    /// surface points `p`.
    pub fn support(&self, u: Vec3) -> f64 {
        let radial = u.xy().norm();
        self.profile
            .points()
            .iter()
            .map(|p| p.x * radial + p.y * u.z)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Rotation matrix of a unit quaternion; its columns are the body axes in the
/// world frame.
pub fn rotation_matrix(q: &Quat) -> Result<Mat3> {
    let n = q.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitQuaternion(n));
    }
    Ok(rotation_matrix_unchecked(q))
}

pub(crate) fn rotation_matrix_unchecked(q: &Quat) -> Mat3 {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Unit quaternion for a rotation of `angle` radians about `axis`.
pub fn axis_angle(axis: Vec3, angle: f64) -> Quat {
    let e = axis.normalize() * (0.5 * angle).sin();
    Quat::new((0.5 * angle).cos(), e.x, e.y, e.z)
}

/// Meridian half-plane coordinates `(sqrt(x² + y²), z)` of a body-frame point.
pub fn to_meridian(p: Vec3) -> Vec2 {
    Vec2::new(p.x.hypot(p.y), p.z)
}

#[derive(Clone, Debug)]
pub struct Particle {
    pub id: usize,
    pub template: Arc<ShapeTemplate>,
    pub material: MaterialParams,
    /// Centre of mass, world frame.
    pub position: Vec3,
    pub orientation: Quat,
    pub velocity: Vec3,
    /// Angular momentum, world frame.
    pub angular_momentum: Vec3,
    /// Fixed particles take part in contacts but never move.
    pub fixed: bool,
}

impl Particle {
    pub fn new(id: usize, template: Arc<ShapeTemplate>, material: MaterialParams) -> Self {
        Self {
            id,
            template,
            material,
            position: Vec3::zeros(),
            orientation: Quat::identity(),
            velocity: Vec3::zeros(),
            angular_momentum: Vec3::zeros(),
            fixed: false,
        }
    }

    pub fn mass(&self) -> f64 {
        self.template.mass.mass
    }

    /// Principal moments about the body axes.
    pub fn inertia(&self) -> Vec3 {
        self.template.mass.inertia()
    }

    pub fn rotation(&self) -> Mat3 {
        rotation_matrix_unchecked(&self.orientation)
    }

    pub fn world_to_body(&self, p: Vec3) -> Vec3 {
        self.rotation().transpose() * (p - self.position)
    }

    pub fn body_to_world(&self, p: Vec3) -> Vec3 {
        self.rotation() * p + self.position
    }

    pub fn angular_velocity_body(&self) -> Vec3 {
        let lb = self.rotation().transpose() * self.angular_momentum;
        lb.component_div(&self.inertia())
    }

    pub fn angular_velocity(&self) -> Vec3 {
        self.rotation() * self.angular_velocity_body()
    }

    /// Set the angular momentum that produces the world-frame angular velocity `w`.
    pub fn set_angular_velocity(&mut self, w: Vec3) {
        let r = self.rotation();
        let wb = r.transpose() * w;
        self.angular_momentum = r * wb.component_mul(&self.inertia());
    }

    /// Inverse of the mass felt by a unit impulse along `n` applied at `point`.
    /// Zero for fixed particles.
    pub fn inverse_mass_along(&self, point: Vec3, n: Vec3) -> f64 {
        if self.fixed {
            return 0.0;
        }
        let r = self.rotation();
        let arm = r.transpose() * (point - self.position).cross(&n);
        1.0 / self.mass() + arm.component_div(&self.inertia()).dot(&arm)
    }

    /// Largest world coordinate of the surface along the unit vector `dir`.
    pub fn extent(&self, dir: Vec3) -> f64 {
        self.template.support(self.rotation().transpose() * dir) + self.position.dot(&dir)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let wb = self.angular_velocity_body();
        0.5 * self.mass() * self.velocity.norm_squared()
            + 0.5 * wb.dot(&wb.component_mul(&self.inertia()))
    }

    pub fn bounding_radius(&self) -> f64 {
        self.template.bounding_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_and_quarter_turn() {
        let m = rotation_matrix(&Quat::identity()).unwrap();
        assert_eq!(m, Mat3::identity());
        let q = axis_angle(Vec3::z(), FRAC_PI_2);
        let v = rotation_matrix(&q).unwrap() * Vec3::x();
        assert!((v - Vec3::y()).norm() < 1e-15);
        assert!(rotation_matrix(&Quat::new(1.1, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn meridian_reduction() {
        assert_eq!(to_meridian(Vec3::new(3.0, 4.0, 1.0)), Vec2::new(5.0, 1.0));
        assert_eq!(to_meridian(Vec3::new(0.0, 0.0, -2.0)), Vec2::new(0.0, -2.0));
    }

    #[test]
    fn shear_and_young_are_consistent() {
        let m = MaterialParams::from_shear(1.15e9, 0.3, 1191.3);
        assert!((m.youngs_modulus - 2.99e9).abs() < 1.0);
        let n = MaterialParams::new(10e9, 0.3, 2500.0);
        assert!((n.shear_modulus - 3.846153846e9).abs() < 1.0);
        assert!(n.validate().is_ok());
        assert!(n.with_restitution(0.0, 0.5).validate().is_err());
    }
}
