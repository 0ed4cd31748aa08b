use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Profile;
use crate::{Error, Result, Vec3};

pub const MIN_NODES: usize = 50;

/// Spacing reduction at a sharp corner for the adaptive strategy.
const CORNER_SPACING_FACTOR: f64 = 1.0 / 3.0;
/// Arc-length half-width of the refined band around a corner, as a fraction of `l`.
const CORNER_BAND: f64 = 1.0 / 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NodeStrategy {
    #[default]
    Uniform,
    /// Denser rings near sharp profile corners.
    Adaptive,
}

/// Body-frame surface nodes of a master particle.
#[derive(Clone, Debug)]
pub struct SurfaceNodeSet {
    pub nodes: Vec<Vec3>,
    /// Arc length along the profile of the station each node sits on.
    pub arc: Vec<f64>,
    pub strategy: NodeStrategy,
}

impl SurfaceNodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

struct Sweep<'a> {
    profile: &'a Profile,
    strategy: NodeStrategy,
    /// Arc positions of the poles and corners, sorted.
    features: Vec<f64>,
    corner_arcs: Vec<f64>,
}

impl Sweep<'_> {
    fn spacing_factor(&self, s: f64) -> f64 {
        if self.strategy == NodeStrategy::Uniform || self.corner_arcs.is_empty() {
            return 1.0;
        }
        let band = CORNER_BAND * self.profile.major_axis_length();
        let d = self
            .corner_arcs
            .iter()
            .map(|c| (s - c).abs())
            .fold(f64::INFINITY, f64::min);
        let w = (1.0 - d / band).max(0.0);
        1.0 - (1.0 - CORNER_SPACING_FACTOR) * w
    }

    /// Station arc positions for base spacing `h`, feature points included.
    fn stations(&self, h: f64) -> Vec<(f64, bool)> {
        let mut out = vec![(self.features[0], true)];
        for w in self.features.windows(2) {
            let (a, b) = (w[0], w[1]);
            // Cumulative integral of 1/spacing on a fine sub-grid.
            let m = 400;
            let ds = (b - a) / m as f64;
            let mut cum = vec![0.0];
            for k in 0..m {
                let mid = a + (k as f64 + 0.5) * ds;
                let last = *cum.last().unwrap();
                cum.push(last + ds / (h * self.spacing_factor(mid)));
            }
            let total = cum[m];
            let count = (total.round() as usize).max(1);
            for j in 1..count {
                let target = total * j as f64 / count as f64;
                let k = cum.partition_point(|&c| c < target).clamp(1, m);
                let f = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
                out.push((a + ds * (k as f64 - 1.0 + f), false));
            }
            out.push((b, true));
        }
        out
    }

    fn build(&self, h: f64) -> SurfaceNodeSet {
        let mut nodes = Vec::new();
        let mut arc = Vec::new();
        for (k, (s, feature)) in self.stations(h).into_iter().enumerate() {
            let p = self.profile.point_at_arc(s);
            if p.x <= 0.0 {
                nodes.push(Vec3::new(0.0, 0.0, p.y));
                arc.push(s);
                continue;
            }
            let local = h * self.spacing_factor(s);
            let ring = ((2.0 * PI * p.x / local).round() as usize).max(1);
            let step = 2.0 * PI / ring as f64;
            let offset = if feature || k % 2 == 0 {
                0.0
            } else {
                0.5 * step
            };
            for j in 0..ring {
                let a = offset + step * j as f64;
                nodes.push(Vec3::new(p.x * a.cos(), p.x * a.sin(), p.y));
                arc.push(s);
            }
        }
        SurfaceNodeSet {
            nodes,
            arc,
            strategy: self.strategy,
        }
    }
}

/// Surface nodes by sweeping profile stations around the axis. Ring sizes are
/// proportional to the station radius; the base spacing is tuned until the
/// node count is within 5% of `n_nodes`.
pub fn generate_nodes(
    profile: &Profile,
    n_nodes: usize,
    strategy: NodeStrategy,
) -> Result<SurfaceNodeSet> {
    if n_nodes < MIN_NODES {
        return Err(Error::TooFewNodes {
            min: MIN_NODES,
            got: n_nodes,
        });
    }
    let total = profile.arc_length();
    let corner_arcs: Vec<f64> = profile
        .corners()
        .iter()
        .map(|&i| profile.arc_at(i))
        .filter(|&s| s > 0.0 && s < total)
        .collect();
    let mut features = vec![0.0];
    features.extend(&corner_arcs);
    features.push(total);
    let sweep = Sweep {
        profile,
        strategy,
        features,
        corner_arcs,
    };

    // Lateral area estimate for the first guess.
    let area: f64 = profile
        .points()
        .windows(2)
        .map(|w| PI * (w[0].x + w[1].x) * (w[1] - w[0]).norm())
        .sum();
    let mut h = (area / n_nodes as f64).sqrt();
    let target = n_nodes as f64;
    let mut best = sweep.build(h);
    for _ in 0..40 {
        let got = best.len() as f64;
        if (got - target).abs() <= 0.02 * target {
            break;
        }
        h *= (got / target).sqrt();
        let next = sweep.build(h);
        if (next.len() as f64 - target).abs() < (best.len() as f64 - target).abs() {
            best = next;
        }
    }
    Ok(best)
}
