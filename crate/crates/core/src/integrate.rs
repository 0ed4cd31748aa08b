//! Velocity-Verlet time stepping and the simulation engine.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::body::{rotation_matrix_unchecked, MaterialParams, Particle, GRAVITY};
use crate::contact::{
    broadphase_pairs, particle_contacts, resolve_contact_with, wall_contact, ContactKey,
    ContactRecord, NarrowPhaseOptions, Partner, Wall,
};
use crate::force::{
    accumulate, cap_displacement, effective_radius, hertz_mindlin, pair_coefficients,
    relative_velocity_at, tangential_velocity, update_tangential_history, ContactDiagnostic,
    ContactForce, CurvatureModel, DampingMass, ForceOptions, Kinematics, PairClass,
    PairCoefficients,
};
use crate::{par, Error, Quat, Result, Vec3};

pub const DEFAULT_SAFETY_FACTOR: f64 = 20.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityMode {
    /// Use the deepest-point method when both shapes are convex.
    #[default]
    Auto,
    Convex,
    NonConvex,
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub dt: f64,
    pub gravity: Vec3,
    /// Run the narrow phase and integration through rayon when available.
    pub parallel: bool,
    pub deterministic: bool,
    pub convexity: ConvexityMode,
    pub curvature: CurvatureModel,
    /// Upper bound for the effective radius; defaults to the larger bounding
    /// radius of the pair.
    pub r_star_max: Option<f64>,
    pub narrow: NarrowPhaseOptions,
    pub force: ForceOptions,
    /// Keep per-contact diagnostics of the latest force evaluation.
    pub diagnostics: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            dt: 1e-7,
            gravity: GRAVITY,
            parallel: par::available(),
            deterministic: true,
            convexity: ConvexityMode::Auto,
            curvature: CurvatureModel::Mean,
            r_star_max: None,
            narrow: NarrowPhaseOptions::default(),
            force: ForceOptions::default(),
            diagnostics: false,
        }
    }
}

/// Rayleigh time `π R / K sqrt(ρ / G)` with `K = 0.8766 + 0.1631 ν`.
pub fn rayleigh_time(material: &MaterialParams, r_min: f64) -> f64 {
    let k = 0.8766 + 0.1631 * material.poisson_ratio;
    PI * r_min / k * (material.density / material.shear_modulus).sqrt()
}

/// Hertz contact time `2.8683 (m*² / (R* Y*² V))^0.2`; infinite at rest.
pub fn hertz_time(m_star: f64, r_star: f64, y_star: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return f64::INFINITY;
    }
    2.8683 * (m_star * m_star / (r_star * y_star * y_star * v)).powf(0.2)
}

/// Critical time step for identical particles of `mass` and smallest
/// radius `r_min` moving at up to `v_max`.
pub fn critical_timestep(material: &MaterialParams, r_min: f64, v_max: f64, mass: f64) -> f64 {
    let y_star = material.youngs_modulus / (2.0 * (1.0 - material.poisson_ratio.powi(2)));
    rayleigh_time(material, r_min).min(hertz_time(0.5 * mass, 0.5 * r_min, y_star, v_max))
}

/// Kinematic state of one particle at a snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState {
    pub id: usize,
    pub position: Vec3,
    pub orientation: Quat,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub step: u64,
    pub particles: Vec<ParticleState>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: u64,
    pub wall_time: Duration,
    /// Force-bearing contacts after the last step.
    pub contacts: usize,
    pub max_contacts: usize,
}

#[derive(Default)]
struct Interaction {
    master: usize,
    slave: Option<usize>,
    force: Vec3,
    torque_master: Vec3,
    torque_slave: Vec3,
    history: Vec<(ContactKey, Vec3)>,
    diagnostics: Vec<ContactDiagnostic>,
    contacts: usize,
}

#[derive(Clone)]
pub struct Engine {
    pub particles: Vec<Particle>,
    pub walls: Vec<Wall>,
    pub options: EngineOptions,
    pub time: f64,
    pub step_count: u64,
    forces: Vec<Vec3>,
    torques: Vec<Vec3>,
    history: HashMap<ContactKey, Vec3>,
    forces_valid: bool,
    contacts: usize,
    diagnostics: Vec<ContactDiagnostic>,
}

impl Engine {
    /// Particle and wall ids are reassigned to their indices.
    pub fn new(
        mut particles: Vec<Particle>,
        mut walls: Vec<Wall>,
        options: EngineOptions,
    ) -> Result<Self> {
        if !(options.dt > 0.0) {
            return Err(Error::Config("time step must be positive".into()));
        }
        for (i, p) in particles.iter_mut().enumerate() {
            p.id = i;
            p.material.validate()?;
            let n = p.orientation.norm();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::NonUnitQuaternion(n));
            }
            p.orientation /= n;
        }
        for (i, w) in walls.iter_mut().enumerate() {
            w.id = i;
        }
        let n = particles.len();
        Ok(Self {
            particles,
            walls,
            options,
            time: 0.0,
            step_count: 0,
            forces: vec![Vec3::zeros(); n],
            torques: vec![Vec3::zeros(); n],
            history: HashMap::new(),
            forces_valid: false,
            contacts: 0,
            diagnostics: Vec::new(),
        })
    }

    /// Append a particle; its id becomes its index.
    pub fn add_particle(&mut self, mut p: Particle) -> Result<usize> {
        p.material.validate()?;
        let n = p.orientation.norm();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::NonUnitQuaternion(n));
        }
        p.orientation /= n;
        p.id = self.particles.len();
        self.particles.push(p);
        self.forces.push(Vec3::zeros());
        self.torques.push(Vec3::zeros());
        self.forces_valid = false;
        Ok(self.particles.len() - 1)
    }

    /// Force-bearing contacts found by the latest force evaluation.
    pub fn contact_count(&self) -> usize {
        self.contacts
    }

    pub fn diagnostics(&self) -> &[ContactDiagnostic] {
        &self.diagnostics
    }

    /// Contact force and torque on each particle from the latest evaluation.
    pub fn loads(&self) -> (&[Vec3], &[Vec3]) {
        (&self.forces, &self.torques)
    }

    /// Drop cached forces, e.g. after editing particle states by hand.
    pub fn invalidate(&mut self) {
        self.forces_valid = false;
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles.iter().map(Particle::kinetic_energy).sum()
    }

    pub fn linear_momentum(&self) -> Vec3 {
        self.particles
            .iter()
            .filter(|p| !p.fixed)
            .map(|p| p.velocity * p.mass())
            .sum()
    }

    /// Total angular momentum about the world origin.
    pub fn angular_momentum(&self) -> Vec3 {
        self.particles
            .iter()
            .filter(|p| !p.fixed)
            .map(|p| p.position.cross(&(p.velocity * p.mass())) + p.angular_momentum)
            .sum()
    }

    pub fn max_speed(&self) -> f64 {
        self.particles
            .iter()
            .filter(|p| !p.fixed)
            .map(|p| p.velocity.norm())
            .fold(0.0, f64::max)
    }

    /// Critical step of the current particle set at its current maximum speed.
    pub fn critical_timestep(&self) -> f64 {
        let v = self.max_speed();
        self.particles
            .iter()
            .map(|p| {
                let prof = &p.template.profile;
                let (z0, z1) = prof.z_range();
                let r_min = prof.x_max().min(0.5 * (z1 - z0));
                critical_timestep(&p.material, r_min, v, p.mass())
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.time,
            step: self.step_count,
            particles: self
                .particles
                .iter()
                .map(|p| ParticleState {
                    id: p.id,
                    position: p.position,
                    orientation: p.orientation,
                    velocity: p.velocity,
                    angular_velocity: p.angular_velocity(),
                })
                .collect(),
        }
    }

    fn kinematics(p: &Particle) -> Kinematics {
        if p.fixed {
            return Kinematics {
                center: p.position,
                ..Kinematics::REST
            };
        }
        Kinematics {
            velocity: p.velocity,
            angular_velocity: p.angular_velocity(),
            center: p.position,
        }
    }

    fn convex(&self, a: bool, b: bool) -> bool {
        match self.options.convexity {
            ConvexityMode::Auto => a && b,
            ConvexityMode::Convex => true,
            ConvexityMode::NonConvex => false,
        }
    }

    /// Forces of one resolved contact set on `master`; `slave_h(point)` is the
    /// partner's mean curvature at a contact point.
    #[allow(clippy::too_many_arguments)]
    fn contact_forces(
        &self,
        master: &Particle,
        partner: &Kinematics,
        records: &[ContactRecord],
        convex: bool,
        coeffs: &PairCoefficients,
        slave_h: impl Fn(Vec3) -> f64,
        slave: Option<&Particle>,
        r_max: f64,
        out: &mut Interaction,
    ) -> Vec<(Vec3, ContactForce)> {
        let dt = self.options.dt;
        let kin = Self::kinematics(master);
        let resolved = resolve_contact_with(records, convex, self.options.narrow.contact_point);
        let mut forces = Vec::with_capacity(resolved.len());
        for rec in &resolved {
            let h_master = match self.options.curvature {
                CurvatureModel::Mean => master
                    .template
                    .curvature
                    .at_arc(master.template.nodes.arc[rec.key.node]),
                CurvatureModel::Equivalent => 1.0 / master.template.mass.equivalent_radius(),
            };
            let r_star = effective_radius(h_master, slave_h(rec.point), r_max);
            let n = rec.dn / rec.overlap();
            let v = relative_velocity_at(rec.point, &kin, partner);
            let prev = self.history.get(&rec.key).copied().unwrap_or_default();
            let delta = update_tangential_history(prev, tangential_velocity(v, n), dt, n);
            let f = match self.options.force.damping_mass {
                DampingMass::Reduced => {
                    hertz_mindlin(rec.dn, v, coeffs, r_star, delta, &self.options.force)
                }
                DampingMass::ContactPoint => {
                    let inv = master.inverse_mass_along(rec.point, n)
                        + slave.map_or(0.0, |s| s.inverse_mass_along(rec.point, n));
                    let local = PairCoefficients {
                        mass: 1.0 / inv,
                        ..*coeffs
                    };
                    hertz_mindlin(rec.dn, v, &local, r_star, delta, &self.options.force)
                }
            };
            out.history.push((rec.key, f.delta_t));
            if self.options.diagnostics {
                out.diagnostics.push(ContactDiagnostic {
                    step: self.step_count,
                    master: master.id,
                    partner: match rec.key.partner {
                        Partner::Particle(j) => format!("p{j}"),
                        Partner::Wall(j) => format!("w{j}"),
                    },
                    node: rec.key.node,
                    overlap: rec.overlap(),
                    normal: f.normal.norm(),
                    elastic: f.kn * rec.overlap(),
                    tangential: f.tangential.norm(),
                    r_star,
                });
            }
            forces.push((rec.point, f));
        }
        // Under the deepest-point rule the other penetrating nodes keep their
        // own slip history so it is available if one of them becomes deepest.
        if convex && records.len() > 1 && coeffs.friction > 0.0 {
            let f = &forces[0].1;
            let n = resolved[0].dn / resolved[0].overlap();
            let max = coeffs.friction * f.normal.norm() / (2.0 / 7.0 * f.kn);
            for rec in records.iter().filter(|r| r.key != resolved[0].key) {
                let v = relative_velocity_at(rec.point, &kin, partner);
                let prev = self.history.get(&rec.key).copied().unwrap_or_default();
                let delta = update_tangential_history(prev, tangential_velocity(v, n), dt, n);
                out.history.push((rec.key, cap_displacement(delta, max)));
            }
        }
        out.contacts += forces.len();
        forces
    }

    fn pair_interaction(&self, i: usize, j: usize) -> Option<Interaction> {
        let master = &self.particles[i];
        let slave = &self.particles[j];
        let records = particle_contacts(master, slave, self.options.narrow);
        if records.is_empty() {
            return None;
        }
        let mass = |p: &Particle| if p.fixed { f64::INFINITY } else { p.mass() };
        let coeffs = pair_coefficients(
            &master.material,
            &slave.material,
            mass(master),
            mass(slave),
            PairClass::ParticleParticle,
        );
        let r_max = self
            .options
            .r_star_max
            .unwrap_or(master.bounding_radius().max(slave.bounding_radius()));
        let convex = self.convex(master.template.convex, slave.template.convex);
        let slave_h = |a: Vec3| match self.options.curvature {
            CurvatureModel::Mean => {
                slave
                    .template
                    .curvature
                    .mean_curvature_at(&slave.template.profile, slave.world_to_body(a))
                    .mean_curvature
            }
            CurvatureModel::Equivalent => 1.0 / slave.template.mass.equivalent_radius(),
        };
        let mut out = Interaction {
            master: i,
            slave: Some(j),
            ..Default::default()
        };
        let forces = self.contact_forces(
            master,
            &Self::kinematics(slave),
            &records,
            convex,
            &coeffs,
            slave_h,
            Some(slave),
            r_max,
            &mut out,
        );
        let r = accumulate(
            forces.iter().map(|(a, f)| (*a, f)),
            master.position,
            slave.position,
        );
        out.force = r.force;
        out.torque_master = r.torque_master;
        out.torque_slave = r.torque_slave;
        Some(out)
    }

    fn wall_interactions(&self, i: usize) -> Interaction {
        let p = &self.particles[i];
        let mut out = Interaction {
            master: i,
            slave: None,
            ..Default::default()
        };
        if p.fixed {
            return out;
        }
        for wall in &self.walls {
            let records = wall_contact(p, wall);
            if records.is_empty() {
                continue;
            }
            let coeffs = pair_coefficients(
                &p.material,
                &wall.material,
                p.mass(),
                f64::INFINITY,
                PairClass::ParticleWall,
            );
            let r_max = self.options.r_star_max.unwrap_or(p.bounding_radius());
            let partner = Kinematics {
                velocity: wall.velocity,
                angular_velocity: wall.angular_velocity,
                center: wall.pivot,
            };
            let convex = self.convex(p.template.convex, true);
            let h = wall.mean_curvature();
            let forces = self.contact_forces(
                p,
                &partner,
                &records,
                convex,
                &coeffs,
                |_| h,
                None,
                r_max,
                &mut out,
            );
            let r = accumulate(forces.iter().map(|(a, f)| (*a, f)), p.position, wall.pivot);
            out.force += r.force;
            out.torque_master += r.torque_master;
        }
        out
    }

    /// Evaluate contact forces and torques for the current state.
    pub fn compute_forces(&mut self) {
        let pairs: Vec<(usize, usize)> = broadphase_pairs(&self.particles)
            .into_iter()
            .filter(|&(i, j)| !(self.particles[i].fixed && self.particles[j].fixed))
            .collect();
        let parallel = self.options.parallel;
        let pair_out: Vec<Option<Interaction>> =
            par::map(&pairs, parallel, |&(i, j)| self.pair_interaction(i, j));
        let wall_out: Vec<Interaction> = if self.walls.is_empty() {
            Vec::new()
        } else {
            par::map_range(self.particles.len(), parallel, |i| {
                self.wall_interactions(i)
            })
        };

        self.forces.iter_mut().for_each(|f| *f = Vec3::zeros());
        self.torques.iter_mut().for_each(|t| *t = Vec3::zeros());
        let mut history = HashMap::with_capacity(self.history.len());
        let mut contacts = 0;
        self.diagnostics.clear();
        for it in pair_out.into_iter().flatten().chain(wall_out) {
            self.forces[it.master] += it.force;
            self.torques[it.master] += it.torque_master;
            if let Some(j) = it.slave {
                self.forces[j] -= it.force;
                self.torques[j] += it.torque_slave;
            }
            contacts += it.contacts;
            history.extend(it.history);
            self.diagnostics.extend(it.diagnostics);
        }
        self.history = history;
        self.contacts = contacts;
        self.forces_valid = true;
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<()> {
        if !self.forces_valid {
            self.compute_forces();
        }
        let dt = self.options.dt;
        let g = self.options.gravity;
        let parallel = self.options.parallel;
        let loads: Vec<(Vec3, Vec3)> = self
            .forces
            .iter()
            .copied()
            .zip(self.torques.iter().copied())
            .collect();

        par::zip_for_each_mut(&mut self.particles, &loads, parallel, |p, &(f, t)| {
            if p.fixed {
                return;
            }
            let a = f / p.mass() + g;
            p.velocity += 0.5 * dt * a;
            p.position += p.velocity * dt;
            p.angular_momentum += 0.5 * dt * t;
            let r = rotation_matrix_unchecked(&p.orientation);
            let wb = (r.transpose() * p.angular_momentum).component_div(&p.inertia());
            let q = p.orientation;
            let dq = q * Quat::new(0.0, wb.x, wb.y, wb.z) * (0.5 * dt);
            p.orientation = (q + dq).normalize();
        });

        self.compute_forces();

        let loads: Vec<(Vec3, Vec3)> = self
            .forces
            .iter()
            .copied()
            .zip(self.torques.iter().copied())
            .collect();
        par::zip_for_each_mut(&mut self.particles, &loads, parallel, |p, &(f, t)| {
            if p.fixed {
                return;
            }
            p.velocity += 0.5 * dt * (f / p.mass() + g);
            p.angular_momentum += 0.5 * dt * t;
        });
        self.time += dt;
        self.step_count += 1;

        for p in &self.particles {
            let ok = p.position.iter().all(|v| v.is_finite())
                && p.velocity.iter().all(|v| v.is_finite())
                && p.angular_momentum.iter().all(|v| v.is_finite())
                && p.orientation.coords.iter().all(|v| v.is_finite());
            if !ok {
                return Err(Error::NonFinite {
                    step: self.step_count,
                    particle: p.id,
                });
            }
        }
        Ok(())
    }

    /// Run `steps` steps, taking a snapshot at the start and every `cadence` steps.
    pub fn run(&mut self, steps: u64, cadence: u64) -> Result<(Vec<Snapshot>, RunStats)> {
        let start = Instant::now();
        let mut snaps = vec![self.snapshot()];
        let mut stats = RunStats::default();
        for k in 1..=steps {
            self.step()?;
            stats.max_contacts = stats.max_contacts.max(self.contacts);
            if cadence > 0 && k % cadence == 0 {
                snaps.push(self.snapshot());
            }
        }
        stats.steps = steps;
        stats.contacts = self.contacts;
        stats.wall_time = start.elapsed();
        Ok((snaps, stats))
    }

    /// Run for `duration` seconds of simulated time.
    pub fn run_for(&mut self, duration: f64, cadence: u64) -> Result<(Vec<Snapshot>, RunStats)> {
        let steps = (duration / self.options.dt).round().max(0.0) as u64;
        self.run(steps, cadence)
    }
}
