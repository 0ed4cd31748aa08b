//! Broad phase, node-to-cross-section narrow phase and contact resolution.

mod wall;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use wall::{wall_contact, Wall, WallShape};

use crate::body::{to_meridian, Particle};
use crate::sdf2d::outward_direction;
use crate::{Mat3, Vec3};

/// Broad-phase skin as a fraction of the smallest bounding radius.
pub const SKIN_FRACTION: f64 = 0.1;
/// Up to this many particles the broad phase tests all pairs directly.
const DIRECT_PAIRS_MAX: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partner {
    Particle(usize),
    Wall(usize),
}

/// Identifies a contact node across steps for the tangential history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContactKey {
    pub master: usize,
    pub partner: Partner,
    pub node: usize,
}

/// One penetrating master node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactRecord {
    pub key: ContactKey,
    /// Overlap vector, world frame: from the node to the nearest point of the
    /// slave surface.
    pub dn: Vec3,
    /// Contact point (the master node), world frame.
    pub point: Vec3,
}

impl ContactRecord {
    pub fn overlap(&self) -> f64 {
        self.dn.norm()
    }
}

/// Master and slave of a particle pair: the lower index is the master.
pub fn assign_roles(i: usize, j: usize) -> (usize, usize) {
    debug_assert_ne!(i, j);
    (i.min(j), i.max(j))
}

fn skin(particles: &[Particle]) -> f64 {
    let r_min = particles
        .iter()
        .map(Particle::bounding_radius)
        .fold(f64::INFINITY, f64::min);
    SKIN_FRACTION * r_min
}

/// Candidate pairs `(i, j)`, `i < j`, whose bounding spheres inflated by the
/// skin overlap, sorted. Uses a uniform spatial hash.
pub fn broadphase_pairs(particles: &[Particle]) -> Vec<(usize, usize)> {
    if particles.len() < 2 {
        return Vec::new();
    }
    let skin = skin(particles);
    let near = |p: &Particle, q: &Particle| {
        let reach = p.bounding_radius() + q.bounding_radius() + skin;
        (p.position - q.position).norm_squared() <= reach * reach
    };
    if particles.len() <= DIRECT_PAIRS_MAX {
        let mut pairs = Vec::new();
        for (i, p) in particles.iter().enumerate() {
            for (j, q) in particles.iter().enumerate().skip(i + 1) {
                if near(p, q) {
                    pairs.push((i, j));
                }
            }
        }
        return pairs;
    }
    let r_max = particles
        .iter()
        .map(Particle::bounding_radius)
        .fold(0.0, f64::max);
    let cell = 2.0 * r_max + skin;
    let key = |p: &Vec3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in particles.iter().enumerate() {
        grid.entry(key(&p.position)).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for (i, p) in particles.iter().enumerate() {
        let (cx, cy, cz) = key(&p.position);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i {
                            continue;
                        }
                        if near(p, &particles[j]) {
                            pairs.push((i, j));
                        }
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Rotation and translation taking master body coordinates to slave body coordinates.
fn relative_frame(master: &Particle, slave: &Particle) -> (Mat3, Vec3) {
    let rs_t = slave.rotation().transpose();
    (
        rs_t * master.rotation(),
        rs_t * (master.position - slave.position),
    )
}

/// Master nodes whose meridian image lies in the slave profile's bounding rectangle.
pub fn node_broadphase(master: &Particle, slave: &Particle) -> Vec<usize> {
    let (rot, shift) = relative_frame(master, slave);
    let profile = &slave.template.profile;
    let (z_min, z_max) = profile.z_range();
    let x_max = profile.x_max();
    let reach = slave.bounding_radius();
    master
        .template
        .nodes
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(k, n)| {
            let b = rot * n + shift;
            if b.norm_squared() > reach * reach {
                return None;
            }
            let m = to_meridian(b);
            (m.x <= x_max && m.y >= z_min && m.y <= z_max).then_some(k)
        })
        .collect()
}

/// Point of application of the single force of a convex contact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactPointRule {
    /// The deepest node.
    #[default]
    DeepestNode,
    /// Overlap-weighted mean of all penetrating nodes.
    OverlapCentroid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NarrowPhaseOptions {
    /// Answer queries in corner-refined cells with the exact distance.
    pub exact_corners: bool,
    pub contact_point: ContactPointRule,
}

/// Contact records for the given master nodes against the slave's SDF.
pub fn node_narrowphase(
    master: &Particle,
    slave: &Particle,
    nodes: &[usize],
    options: NarrowPhaseOptions,
) -> Vec<ContactRecord> {
    let (rot, shift) = relative_frame(master, slave);
    let rs = slave.rotation();
    let rm = master.rotation();
    let tpl = &slave.template;
    let mut out = Vec::new();
    for &k in nodes {
        let n = master.template.nodes.nodes[k];
        let b = rot * n + shift;
        let m = to_meridian(b);
        let Some(s) = tpl.sdf.sample_with(&tpl.profile, m, options.exact_corners) else {
            continue;
        };
        if s.phi >= 0.0 {
            continue;
        }
        let dir = outward_direction(&tpl.profile, m, &s) * (-s.phi);
        // Rotate the meridian vector into the vertical plane through the node.
        let (ex, ey) = if m.x > 1e-12 * tpl.major_axis_length() {
            (b.x / m.x, b.y / m.x)
        } else {
            (1.0, 0.0)
        };
        let d_body = Vec3::new(dir.x * ex, dir.x * ey, dir.y);
        out.push(ContactRecord {
            key: ContactKey {
                master: master.id,
                partner: Partner::Particle(slave.id),
                node: k,
            },
            dn: rs * d_body,
            point: rm * n + master.position,
        });
    }
    out
}

/// All contact records between two particles (lower index is the master).
pub fn particle_contacts(
    a: &Particle,
    b: &Particle,
    options: NarrowPhaseOptions,
) -> Vec<ContactRecord> {
    let (master, slave) = if a.id < b.id { (a, b) } else { (b, a) };
    let nodes = node_broadphase(master, slave);
    if nodes.is_empty() {
        return Vec::new();
    }
    node_narrowphase(master, slave, &nodes, options)
}

/// Reduce contact records to the force-bearing set. For convex pairs only the
/// deepest node survives, with its normal replaced by the mean overlap
/// direction; otherwise all records are kept.
pub fn resolve_contact(records: &[ContactRecord], convex: bool) -> Vec<ContactRecord> {
    resolve_contact_with(records, convex, ContactPointRule::DeepestNode)
}

/// As [`resolve_contact`], with a choice of where the convex force acts.
pub fn resolve_contact_with(
    records: &[ContactRecord],
    convex: bool,
    rule: ContactPointRule,
) -> Vec<ContactRecord> {
    if !convex || records.len() <= 1 {
        return records.to_vec();
    }
    let mut deepest = records[0];
    for r in &records[1..] {
        let (d, best) = (r.overlap(), deepest.overlap());
        if d > best || (d == best && r.key.node < deepest.key.node) {
            deepest = *r;
        }
    }
    let sum: Vec3 = records.iter().map(|r| r.dn).sum();
    let norm = sum.norm();
    if norm > 0.0 {
        deepest.dn = sum * (deepest.overlap() / norm);
    }
    if rule == ContactPointRule::OverlapCentroid {
        let total: f64 = records.iter().map(ContactRecord::overlap).sum();
        deepest.point = records.iter().map(|r| r.point * r.overlap()).sum::<Vec3>() / total;
    }
    vec![deepest]
}
