use super::Profile;
use crate::geom::cross2;
use crate::{Vec2, Vec3};

pub const CURVATURE_SAMPLES: usize = 81;

/// Corner rounding radius as a fraction of the major axis; mean curvature is
/// capped at its inverse.
pub const CORNER_RADIUS_FRACTION: f64 = 1.0 / 800.0;

/// Distance from the profile, relative to `l`, above which a curvature query
/// is flagged as off-surface.
const OFF_SURFACE_TOL: f64 = 0.01;

/// Mean curvature sampled along the profile arc length. Equatorially
/// symmetric profiles store only the upper half and reflect queries.
#[derive(Clone, Debug)]
pub struct CurvatureTable {
    arc: Vec<f64>,
    mean: Vec<f64>,
    total_arc: f64,
    reflected: bool,
    cap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureQuery {
    pub mean_curvature: f64,
    /// The query point was farther than the tolerance from the surface.
    pub off_surface: bool,
}

impl CurvatureTable {
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.arc.iter().copied().zip(self.mean.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.arc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arc.is_empty()
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Linear interpolation at arc length `s` from the top pole.
    pub fn at_arc(&self, s: f64) -> f64 {
        let mut s = s.clamp(0.0, self.total_arc);
        if self.reflected && s > 0.5 * self.total_arc {
            s = self.total_arc - s;
        }
        let k = self.arc.partition_point(|&a| a < s);
        if k == 0 {
            return self.mean[0];
        }
        if k >= self.arc.len() {
            return *self.mean.last().unwrap();
        }
        let (a0, a1) = (self.arc[k - 1], self.arc[k]);
        let t = (s - a0) / (a1 - a0);
        self.mean[k - 1] + t * (self.mean[k] - self.mean[k - 1])
    }

    /// Mean curvature at the surface point nearest to a body-frame point.
    pub fn mean_curvature_at(&self, profile: &Profile, body_point: Vec3) -> CurvatureQuery {
        let m = Vec2::new(body_point.xy().norm(), body_point.z);
        let foot = profile.closest(m);
        CurvatureQuery {
            mean_curvature: self.at_arc(foot.arc),
            off_surface: foot.distance > OFF_SURFACE_TOL * profile.major_axis_length(),
        }
    }
}

/// Signed curvature of the circle through three points; positive for the
/// clockwise (convex) turn of a top-to-bottom profile.
fn menger(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let denom = (b - a).norm() * (c - b).norm() * (c - a).norm();
    if denom == 0.0 {
        return 0.0;
    }
    -2.0 * cross2(b - a, c - b) / denom
}

/// Mean curvature of the surface of revolution at every profile vertex.
fn vertex_curvatures(profile: &Profile, cap: f64) -> Vec<f64> {
    let pts = profile.points();
    let n = pts.len();
    let mirror = |p: Vec2| Vec2::new(-p.x, p.y);
    let is_corner = |i: usize| profile.corners().contains(&i);
    let point = |i: isize| -> Vec2 {
        if i < 0 {
            mirror(pts[(-i) as usize])
        } else if i as usize >= n {
            mirror(pts[2 * (n - 1) - i as usize])
        } else {
            pts[i as usize]
        }
    };
    let mut h: Vec<f64> = (0..n)
        .map(|i| {
            if is_corner(i) {
                return cap;
            }
            let ii = i as isize;
            let prev_corner = i > 0 && is_corner(i - 1);
            let next_corner = i + 1 < n && is_corner(i + 1);
            let k_meridian = match (prev_corner, next_corner) {
                (true, true) => 0.0,
                (true, false) => menger(point(ii), point(ii + 1), point(ii + 2)),
                (false, true) => menger(point(ii - 2), point(ii - 1), point(ii)),
                (false, false) => menger(point(ii - 1), point(ii), point(ii + 1)),
            };
            let p = pts[i];
            let k_parallel = if p.x > 0.0 {
                let na = profile.segment_normal(i - 1);
                let nb = profile.segment_normal(i);
                let normal = (na + nb).normalize();
                normal.x / p.x
            } else {
                k_meridian
            };
            (0.5 * (k_meridian + k_parallel)).clamp(-cap, cap)
        })
        .collect();
    // A corner takes the flatter of its two one-sided limits.
    for &i in profile.corners() {
        let side = |j: Option<usize>| j.filter(|&j| j < n && !is_corner(j)).map_or(cap, |j| h[j]);
        let (a, b) = (side(i.checked_sub(1)), side(Some(i + 1)));
        h[i] = if a.abs() <= b.abs() { a } else { b };
    }
    h
}

/// Mean curvature table with `n_samples` adaptively placed samples; sample
/// density follows `1 + |dH/ds| / mean |dH/ds|`, with the ends and corners
/// always sampled.
pub fn curvature_table(profile: &Profile, n_samples: usize) -> CurvatureTable {
    let l = profile.major_axis_length();
    let cap = 1.0 / (CORNER_RADIUS_FRACTION * l);
    let raw_h = vertex_curvatures(profile, cap);
    let total = profile.arc_length();
    let reflected = profile.is_equatorially_symmetric();
    let domain = if reflected { 0.5 * total } else { total };

    let raw_s: Vec<f64> = (0..profile.points().len())
        .map(|i| profile.arc_at(i))
        .collect();
    let raw_at = |s: f64| -> f64 {
        let k = raw_s.partition_point(|&a| a < s).clamp(1, raw_s.len() - 1);
        let (a0, a1) = (raw_s[k - 1], raw_s[k]);
        let t = if a1 > a0 {
            ((s - a0) / (a1 - a0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        raw_h[k - 1] + t * (raw_h[k] - raw_h[k - 1])
    };

    // Monitor function per raw interval inside the domain.
    let mut knots = vec![0.0];
    knots.extend(raw_s.iter().copied().filter(|&s| s > 0.0 && s < domain));
    knots.push(domain);
    let slopes: Vec<f64> = knots
        .windows(2)
        .map(|w| ((raw_at(w[1]) - raw_at(w[0])) / (w[1] - w[0])).abs())
        .collect();
    let variation: f64 = knots
        .windows(2)
        .zip(&slopes)
        .map(|(w, s)| s * (w[1] - w[0]))
        .sum();
    let mean_slope = variation / domain;
    let weight = |k: usize| {
        if mean_slope > 0.0 {
            1.0 + slopes[k] / mean_slope
        } else {
            1.0
        }
    };
    let mut cum = vec![0.0];
    for (k, w) in knots.windows(2).enumerate() {
        let last = *cum.last().unwrap();
        cum.push(last + weight(k) * (w[1] - w[0]));
    }
    let cum_total = *cum.last().unwrap();

    let mut arc: Vec<f64> = vec![0.0, domain];
    arc.extend(
        profile
            .corners()
            .iter()
            .map(|&i| profile.arc_at(i))
            .filter(|&s| s > 0.0 && s < domain),
    );
    let free = n_samples.saturating_sub(arc.len());
    for j in 1..=free {
        let target = cum_total * j as f64 / (free + 1) as f64;
        let k = cum
            .partition_point(|&c| c < target)
            .clamp(1, knots.len() - 1);
        let t = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
        arc.push(knots[k - 1] + t * (knots[k] - knots[k - 1]));
    }
    arc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    arc.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * total);
    let mean = arc.iter().map(|&s| raw_at(s)).collect();
    CurvatureTable {
        arc,
        mean,
        total_arc: total,
        reflected,
        cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{build_profile, ShapeSpec};

    #[test]
    fn sphere_is_constant() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 2.0 }).unwrap();
        let t = curvature_table(&p, CURVATURE_SAMPLES);
        assert_eq!(t.len(), CURVATURE_SAMPLES);
        for (_, h) in t.samples() {
            assert!((h - 0.5).abs() < 0.5e-6, "{h}");
        }
        let q = t.mean_curvature_at(&p, Vec3::new(1.2, -0.9, 1.1));
        assert!((q.mean_curvature - 0.5).abs() < 0.5e-6);
    }

    #[test]
    fn cylinder_side_and_flat_top() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 2.0,
        })
        .unwrap();
        let t = curvature_table(&p, CURVATURE_SAMPLES);
        let side = t.mean_curvature_at(&p, Vec3::new(1.0, 0.0, 0.3));
        assert!((side.mean_curvature - 0.5).abs() < 1e-9);
        let top = t.mean_curvature_at(&p, Vec3::new(0.2, 0.1, 1.0));
        assert!(top.mean_curvature.abs() < 1e-9);
        assert!(
            t.mean_curvature_at(&p, Vec3::new(0.0, 0.0, 0.0))
                .off_surface
        );
    }

    #[test]
    fn corners_take_the_flatter_side() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 2.0,
        })
        .unwrap();
        let t = curvature_table(&p, CURVATURE_SAMPLES);
        assert!((t.cap() - 400.0).abs() < 1e-9);
        let h = t
            .mean_curvature_at(&p, Vec3::new(1.0, 0.0, 1.0))
            .mean_curvature;
        assert!(h.abs() < 1e-9, "{h}");

        let (rb, hc) = (5.675e-3, 1.23e-3);
        let spec = ShapeSpec::Tablet {
            band_radius: rb,
            band_height: 4.0e-3,
            cap_height: hc,
            edge_radius: 0.0,
        };
        let p = build_profile(&spec).unwrap();
        let t = curvature_table(&p, CURVATURE_SAMPLES);
        let rim = t
            .mean_curvature_at(&p, Vec3::new(rb, 0.0, 2.0e-3))
            .mean_curvature;
        let rc = crate::shape::tablet_cap_radius(rb, hc);
        assert!((rim * rc - 1.0).abs() < 1e-2, "{}", rim * rc);
    }
}
