//! Hertz-Mindlin contact forces.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::body::MaterialParams;
use crate::Vec3;

/// Smallest restitution used in the damping ratio; `e = 0` is singular.
pub const MIN_RESTITUTION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureModel {
    /// Interpolated surface mean curvature at the contact point.
    #[default]
    Mean,
    /// Constant curvature of the sphere of equal volume.
    Equivalent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    ParticleParticle,
    ParticleWall,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCoefficients {
    pub youngs: f64,
    pub shear: f64,
    pub mass: f64,
    pub beta: f64,
    pub friction: f64,
    pub restitution: f64,
}

pub fn damping_ratio(e: f64) -> f64 {
    let ln = e.max(MIN_RESTITUTION).ln();
    ln / (PI * PI + ln * ln).sqrt()
}

/// Effective pair coefficients. Pass `f64::INFINITY` as `mass_j` for walls
/// and fixed partners. Particle-particle restitution and friction are the
/// means of the two materials; particle-wall values come from the particle.
pub fn pair_coefficients(
    mi: &MaterialParams,
    mj: &MaterialParams,
    mass_i: f64,
    mass_j: f64,
    class: PairClass,
) -> PairCoefficients {
    let youngs = 1.0
        / ((1.0 - mi.poisson_ratio.powi(2)) / mi.youngs_modulus
            + (1.0 - mj.poisson_ratio.powi(2)) / mj.youngs_modulus);
    let shear = 1.0
        / ((2.0 - mi.poisson_ratio) / mi.shear_modulus
            + (2.0 - mj.poisson_ratio) / mj.shear_modulus);
    let mass = 1.0 / (1.0 / mass_i + 1.0 / mass_j);
    let (restitution, friction) = match class {
        PairClass::ParticleParticle => (
            0.5 * (mi.restitution_pp + mj.restitution_pp),
            0.5 * (mi.friction_pp + mj.friction_pp),
        ),
        PairClass::ParticleWall => (mi.restitution_pw, mi.friction_pw),
    };
    PairCoefficients {
        youngs,
        shear,
        mass,
        beta: damping_ratio(restitution),
        friction,
        restitution,
    }
}

/// `R* = 1 / (H_i + H_j)`, capped at `r_max` (also for non-positive sums).
pub fn effective_radius(h_i: f64, h_j: f64, r_max: f64) -> f64 {
    let sum = h_i + h_j;
    if sum <= 0.0 {
        return r_max;
    }
    (1.0 / sum).min(r_max)
}

/// Rigid motion of a contact partner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    pub center: Vec3,
}

impl Kinematics {
    pub const REST: Kinematics = Kinematics {
        velocity: Vec3::new(0.0, 0.0, 0.0),
        angular_velocity: Vec3::new(0.0, 0.0, 0.0),
        center: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn point_velocity(&self, a: Vec3) -> Vec3 {
        self.velocity + self.angular_velocity.cross(&(a - self.center))
    }
}

/// Velocity of the master relative to the slave at contact point `a`.
pub fn relative_velocity_at(a: Vec3, master: &Kinematics, slave: &Kinematics) -> Vec3 {
    master.point_velocity(a) - slave.point_velocity(a)
}

/// Mass entering the normal damping coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingMass {
    /// Reduced translational mass of the pair.
    #[default]
    Reduced,
    /// Effective mass along the normal at the contact point, including the
    /// rotational inertia of both bodies.
    ContactPoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForceOptions {
    /// Zero the normal force whenever it turns attractive during unloading.
    /// Off by default: dropping the tensile tail raises the rebound above the
    /// prescribed restitution.
    pub clamp_tensile: bool,
    pub damping_mass: DampingMass,
}

/// Force at one contact node, acting on the master.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactForce {
    pub normal: Vec3,
    pub tangential: Vec3,
    pub kn: f64,
    /// Updated tangential displacement.
    pub delta_t: Vec3,
}

impl ContactForce {
    pub fn total(&self) -> Vec3 {
        self.normal + self.tangential
    }
}

/// Carry the tangential displacement into the current tangent plane and add
/// this step's increment `−V_t Δt`; the projected vector keeps the
/// magnitude it had before projection.
pub fn update_tangential_history(delta_t: Vec3, vt: Vec3, dt: f64, normal: Vec3) -> Vec3 {
    let raw = delta_t - vt * dt;
    let projected = raw - normal * raw.dot(&normal);
    let p = projected.norm();
    if p == 0.0 {
        return Vec3::zeros();
    }
    projected * (raw.norm() / p)
}

/// Hertz-Mindlin force on the master for overlap vector `dn` (pointing away
/// from the slave), relative velocity `v` and the tangential displacement
/// `delta_t` already advanced to this step. The returned displacement is
/// shortened to the Coulomb limit when sliding.
pub fn hertz_mindlin(
    dn: Vec3,
    v: Vec3,
    coeffs: &PairCoefficients,
    r_star: f64,
    delta_t: Vec3,
    options: &ForceOptions,
) -> ContactForce {
    let overlap = dn.norm();
    let n = dn / overlap;
    let kn = 4.0 / 3.0 * coeffs.youngs * (r_star * overlap).sqrt();
    let gn = 5f64.sqrt() * coeffs.beta.abs() * (coeffs.mass * kn).sqrt();
    let vn = n * v.dot(&n);
    let vt = v - vn;
    let mut normal = dn * kn - vn * gn;
    if options.clamp_tensile && normal.dot(&n) < 0.0 {
        normal = Vec3::zeros();
    }

    let kt = 2.0 / 7.0 * kn;
    let gt = 0.5 * gn;
    let limit = coeffs.friction * normal.norm();
    if limit == 0.0 {
        return ContactForce {
            normal,
            tangential: Vec3::zeros(),
            kn,
            delta_t: Vec3::zeros(),
        };
    }
    let mut delta = delta_t;
    let mut tangential = delta * kt - vt * gt;
    let ft = tangential.norm();
    if ft > limit {
        tangential *= limit / ft;
        delta = cap_displacement(delta, limit / kt);
    }
    ContactForce {
        normal,
        tangential,
        kn,
        delta_t: delta,
    }
}

/// Tangential part of `v` with respect to the unit normal `n`.
pub fn tangential_velocity(v: Vec3, n: Vec3) -> Vec3 {
    v - n * v.dot(&n)
}

/// Shorten `delta` to at most `max` in length.
pub fn cap_displacement(delta: Vec3, max: f64) -> Vec3 {
    let d = delta.norm();
    if d > max {
        delta * (max / d)
    } else {
        delta
    }
}

/// Net force and torques of a set of contact forces acting at points `a_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ForceResult {
    pub force: Vec3,
    pub torque_master: Vec3,
    pub torque_slave: Vec3,
}

impl ForceResult {
    /// Force on the slave (third law).
    pub fn slave_force(&self) -> Vec3 {
        -self.force
    }
}

pub fn accumulate<'a>(
    contributions: impl IntoIterator<Item = (Vec3, &'a ContactForce)>,
    center_master: Vec3,
    center_slave: Vec3,
) -> ForceResult {
    let mut out = ForceResult::default();
    for (a, f) in contributions {
        let total = f.total();
        out.force += total;
        out.torque_master += (a - center_master).cross(&total);
        out.torque_slave += (a - center_slave).cross(&(-total));
    }
    out
}

/// Per-contact diagnostic line: `step pair node overlap |F_n| |F_t|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactDiagnostic {
    pub step: u64,
    pub master: usize,
    pub partner: String,
    pub node: usize,
    pub overlap: f64,
    pub normal: f64,
    /// Elastic part `k_n δ` of the normal force.
    pub elastic: f64,
    pub tangential: f64,
    pub r_star: f64,
}

pub fn format_diagnostics(rows: &[ContactDiagnostic]) -> String {
    let mut out = String::from("step,master,partner,node,overlap,fn,fn_elastic,ft,r_star\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            r.step,
            r.master,
            r.partner,
            r.node,
            r.overlap,
            r.normal,
            r.elastic,
            r.tangential,
            r.r_star
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_values() {
        assert_eq!(damping_ratio(1.0), 0.0);
        assert!((damping_ratio(0.6) + 0.160493).abs() < 1e-6);
        assert!(damping_ratio(0.0).is_finite());
    }

    #[test]
    fn identical_materials() {
        let m = MaterialParams::new(1e9, 0.3, 1000.0);
        let c = pair_coefficients(&m, &m, 2.0, 2.0, PairClass::ParticleParticle);
        assert!((c.youngs - 1e9 / (2.0 * (1.0 - 0.09))).abs() < 1e-3);
        assert_eq!(c.mass, 1.0);
        let w = pair_coefficients(&m, &m, 2.0, f64::INFINITY, PairClass::ParticleWall);
        assert_eq!(w.mass, 2.0);
    }

    #[test]
    fn radii() {
        assert_eq!(effective_radius(0.5, 0.5, f64::INFINITY), 1.0);
        assert_eq!(effective_radius(0.5, 0.0, f64::INFINITY), 2.0);
        assert_eq!(effective_radius(0.0, 0.0, 3.0), 3.0);
    }

    #[test]
    fn spinning_master_velocity() {
        let m = Kinematics {
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::new(0.0, 0.0, 10.0),
            center: Vec3::zeros(),
        };
        let v = relative_velocity_at(Vec3::new(0.1, 0.0, 0.0), &m, &Kinematics::REST);
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    fn coeffs(mu: f64) -> PairCoefficients {
        let m = MaterialParams::new(1e9, 0.3, 1000.0)
            .with_friction(mu, mu)
            .with_restitution(0.6, 0.6);
        pair_coefficients(&m, &m, 1e-3, 1e-3, PairClass::ParticleParticle)
    }

    #[test]
    fn static_hertz_power_law() {
        let c = coeffs(0.0);
        let dn = Vec3::new(0.0, 0.0, 2e-6);
        let f = hertz_mindlin(
            dn,
            Vec3::zeros(),
            &c,
            1e-3,
            Vec3::zeros(),
            &ForceOptions::default(),
        );
        let exact = 4.0 / 3.0 * c.youngs * 1e-3f64.sqrt() * 2e-6f64.powf(1.5);
        assert!((f.normal.z - exact).abs() < 1e-12 * exact);
        assert_eq!(f.tangential, Vec3::zeros());
    }

    #[test]
    fn coulomb_cap_holds() {
        let c = coeffs(0.3);
        let dn = Vec3::new(0.0, 0.0, 1e-6);
        let mut dt_hist = Vec3::zeros();
        for _ in 0..2000 {
            let v = Vec3::new(0.5, 0.0, 0.0);
            let d = update_tangential_history(
                dt_hist,
                tangential_velocity(v, Vec3::z()),
                1e-7,
                Vec3::z(),
            );
            let f = hertz_mindlin(dn, v, &c, 1e-3, d, &ForceOptions::default());
            assert!(f.tangential.norm() <= 0.3 * f.normal.norm() * (1.0 + 1e-12));
            dt_hist = f.delta_t;
        }
    }

    #[test]
    fn history_accumulates_and_rotates() {
        let n = Vec3::z();
        let mut d = Vec3::zeros();
        for _ in 0..10 {
            d = update_tangential_history(d, Vec3::new(1.0, 0.0, 0.0), 1e-3, n);
        }
        assert!((d.norm() - 1e-2).abs() < 1e-15);
        let tilted = Vec3::new(1.0, 1.0, 0.0).normalize();
        let rotated = update_tangential_history(d, Vec3::zeros(), 0.0, tilted);
        assert!(rotated.dot(&tilted).abs() < 1e-16);
        assert!((rotated.norm() - d.norm()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_has_no_torque() {
        let f = ContactForce {
            normal: Vec3::new(0.0, 0.0, -1.0),
            tangential: Vec3::zeros(),
            kn: 0.0,
            delta_t: Vec3::zeros(),
        };
        let r = accumulate(
            [(Vec3::new(0.1, 0.0, 0.0), &f)],
            Vec3::zeros(),
            Vec3::new(0.0, 0.0, -1.0),
        );
        assert!((r.torque_master - Vec3::new(0.0, 0.1, 0.0)).norm() < 1e-15);
        let r = accumulate(
            [
                (Vec3::new(0.1, 0.0, 0.0), &f),
                (Vec3::new(-0.1, 0.0, 0.0), &f),
            ],
            Vec3::zeros(),
            Vec3::zeros(),
        );
        assert_eq!(r.force, Vec3::new(0.0, 0.0, -2.0));
        assert!(r.torque_master.norm() < 1e-15);
    }
}
