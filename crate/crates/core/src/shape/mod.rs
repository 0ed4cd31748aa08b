//! Surface-of-revolution shapes.
//!
//! A shape is defined by its [`Profile`]: the half cross-section polyline in
//! the body-frame XZ-plane, running from the top axis point to the bottom
//! axis point with `x >= 0`. Everything else (mass properties, surface nodes,
//! curvature, the SDF) is derived from it.

mod curvature;
mod mass;
mod nodes;

pub use curvature::{curvature_table, CurvatureQuery, CurvatureTable, CURVATURE_SAMPLES};
pub use mass::{revolve_mesh, revolve_properties, voxel_properties, MassProperties, TriMesh};
pub use nodes::{generate_nodes, NodeStrategy, SurfaceNodeSet, MIN_NODES};

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::{closest_on_segment, cross2, polygon_contains, segments_intersect};
use crate::{Error, Result, Vec2};

/// Default number of segments for built-in families.
pub const DEFAULT_SEGMENTS: usize = 160;
/// Default sharp-corner threshold on the vertex angle, degrees.
pub const DEFAULT_CORNER_THRESHOLD_DEG: f64 = 170.0;

/// Parametric shape families, plus raw point import.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Sphere {
        radius: f64,
    },
    /// Spheroid with `equatorial_radius` in the XY-plane and `polar_radius` along Z.
    Spheroid {
        equatorial_radius: f64,
        polar_radius: f64,
    },
    Cylinder {
        radius: f64,
        height: f64,
    },
    Frustum {
        bottom_radius: f64,
        top_radius: f64,
        height: f64,
    },
    /// Bi-convex tablet: cylindrical band plus two spherical caps. A positive
    /// `edge_radius` rounds the band/cap junctions.
    Tablet {
        band_radius: f64,
        band_height: f64,
        cap_height: f64,
        #[serde(default)]
        edge_radius: f64,
    },
    /// Cylinder of `length` capped by two hemispheres.
    SpheroCylinder {
        radius: f64,
        length: f64,
    },
    /// Solid of revolution of a single-loop Cassini oval with foci at `z = ±focal`
    /// and product constant `b^2`; requires `b > focal`.
    CassiniPeanut {
        focal: f64,
        b: f64,
    },
    /// Raw `(x, z)` polyline; end points are projected onto the axis if needed.
    Points {
        points: Vec<[f64; 2]>,
    },
    /// Raw profile read from a two-column text file.
    File {
        path: String,
    },
}

impl ShapeSpec {
    pub fn is_parametric(&self) -> bool {
        !matches!(self, ShapeSpec::Points { .. } | ShapeSpec::File { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProfileOptions {
    pub segments: usize,
    pub corner_threshold_deg: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            segments: DEFAULT_SEGMENTS,
            corner_threshold_deg: DEFAULT_CORNER_THRESHOLD_DEG,
        }
    }
}

/// Half cross-section of a surface of revolution.
#[derive(Clone, Debug)]
pub struct Profile {
    points: Vec<Vec2>,
    corners: Vec<usize>,
    /// Cumulative arc length at each vertex.
    arc: Vec<f64>,
    major_axis: f64,
    x_max: f64,
    z_min: f64,
    z_max: f64,
    convex: bool,
    equatorial_symmetry: bool,
}

/// Nearest point on a profile.
#[derive(Clone, Copy, Debug)]
pub struct ProfileFoot {
    pub point: Vec2,
    pub distance: f64,
    pub segment: usize,
    /// Arc length from the top pole to the foot point.
    pub arc: f64,
}

impl Profile {
    /// Build a profile from an ordered point list, closing it onto the axis.
    pub fn from_points(points: Vec<Vec2>, corner_threshold_deg: f64) -> Result<Self> {
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len() + 2);
        for p in points {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidProfile("non-finite coordinate".into()));
            }
            if pts.last().is_some_and(|q: &Vec2| (q - p).norm() == 0.0) {
                continue;
            }
            pts.push(p);
        }
        if pts.len() < 2 {
            return Err(Error::InvalidProfile(
                "fewer than two distinct points".into(),
            ));
        }
        if pts[0].y < pts[pts.len() - 1].y {
            pts.reverse();
        }
        let scale = pts
            .iter()
            .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        if pts.iter().any(|p| p.x < -tol) {
            return Err(Error::InvalidProfile("points with x < 0".into()));
        }
        for p in pts.iter_mut() {
            p.x = p.x.max(0.0);
        }
        // Project dangling end points onto the axis.
        if pts[0].x > tol {
            pts.insert(0, Vec2::new(0.0, pts[0].y));
        } else {
            pts[0].x = 0.0;
        }
        let n = pts.len();
        if pts[n - 1].x > tol {
            pts.push(Vec2::new(0.0, pts[n - 1].y));
        } else {
            pts[n - 1].x = 0.0;
        }
        let n = pts.len();
        if pts[0].x != 0.0 || pts[n - 1].x != 0.0 || pts[0].y <= pts[n - 1].y {
            return Err(Error::InvalidProfile(
                "end points off axis after closure".into(),
            ));
        }
        if pts.iter().all(|p| p.x == 0.0) {
            return Err(Error::DegenerateProfile);
        }
        check_simple(&pts)?;

        let mut arc = Vec::with_capacity(n);
        arc.push(0.0);
        for w in pts.windows(2) {
            let last = *arc.last().unwrap();
            arc.push(last + (w[1] - w[0]).norm());
        }
        let x_max = pts.iter().fold(0.0f64, |m, p| m.max(p.x));
        let z_max = pts.iter().fold(f64::MIN, |m, p| m.max(p.y));
        let z_min = pts.iter().fold(f64::MAX, |m, p| m.min(p.y));
        let major_axis = (2.0 * x_max).max(z_max - z_min);
        let corners = detect_corners(&pts, corner_threshold_deg);
        let convex = is_convex(&pts);
        let equatorial_symmetry = is_equatorially_symmetric(&pts, 1e-9 * major_axis);
        Ok(Self {
            points: pts,
            corners,
            arc,
            major_axis,
            x_max,
            z_min,
            z_max,
            convex,
            equatorial_symmetry,
        })
    }

    /// Parse the plain-text import format: two whitespace-separated columns
    /// `x z` in metres, `#` starts a comment.
    pub fn from_text(text: &str, corner_threshold_deg: f64) -> Result<Self> {
        let mut pts = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 2 columns, found {}", cols.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            };
            pts.push(Vec2::new(parse(cols[0])?, parse(cols[1])?));
        }
        Self::from_points(pts, corner_threshold_deg)
    }

    pub fn read(path: impl AsRef<Path>, corner_threshold_deg: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, corner_threshold_deg)
    }

    /// Serialise in the import format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# x_m z_m\n");
        for p in &self.points {
            s.push_str(&format!("{:.17e} {:.17e}\n", p.x, p.y));
        }
        s
    }

    /// The same profile translated by `dz` along the axis.
    pub fn shifted(&self, dz: f64) -> Profile {
        let mut out = self.clone();
        for p in &mut out.points {
            p.y += dz;
        }
        out.z_min += dz;
        out.z_max += dz;
        out
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn corners(&self) -> &[usize] {
        &self.corners
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Longest edge of the full cross-section's bounding rectangle.
    pub fn major_axis_length(&self) -> f64 {
        self.major_axis
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z_min, self.z_max)
    }

    pub fn arc_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Cumulative arc length at vertex `i`.
    pub fn arc_at(&self, i: usize) -> f64 {
        self.arc[i]
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Mirror-symmetric about the plane halfway between the poles.
    pub fn is_equatorially_symmetric(&self) -> bool {
        self.equatorial_symmetry
    }

    /// The point at arc length `s` from the top pole.
    pub fn point_at_arc(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.arc_length());
        let i = match self.arc.binary_search_by(|a| a.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.points[i],
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let len = self.arc[i + 1] - self.arc[i];
        let t = if len > 0.0 {
            (s - self.arc[i]) / len
        } else {
            0.0
        };
        self.points[i] + (self.points[i + 1] - self.points[i]) * t
    }

    /// Unit tangent of segment `i` (pointing away from the top pole).
    pub fn segment_tangent(&self, i: usize) -> Vec2 {
        (self.points[i + 1] - self.points[i]).normalize()
    }

    /// Outward unit normal of segment `i`.
    pub fn segment_normal(&self, i: usize) -> Vec2 {
        let t = self.segment_tangent(i);
        Vec2::new(-t.y, t.x)
    }

    /// Whether `p` (meridian half-plane, `x` taken as `|x|`) lies inside.
    pub fn contains(&self, p: Vec2) -> bool {
        if p.x == 0.0 {
            // The axis closure is interior to the solid of revolution.
            let (bottom, top) = (self.points[self.points.len() - 1].y, self.points[0].y);
            return p.y > bottom && p.y < top;
        }
        polygon_contains(&self.points, Vec2::new(p.x.abs(), p.y))
    }

    /// Nearest point on the profile polyline (the axis closure is not part of
    /// the surface). `p.x` is folded to `|p.x|`.
    pub fn closest(&self, p: Vec2) -> ProfileFoot {
        let q = Vec2::new(p.x.abs(), p.y);
        let mut best = ProfileFoot {
            point: self.points[0],
            distance: f64::INFINITY,
            segment: 0,
            arc: 0.0,
        };
        let mut best_d2 = f64::INFINITY;
        for i in 0..self.points.len() - 1 {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let (foot, t) = closest_on_segment(q, a, b);
            let d2 = (foot - q).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = ProfileFoot {
                    point: foot,
                    distance: 0.0,
                    segment: i,
                    arc: self.arc[i] + t * (self.arc[i + 1] - self.arc[i]),
                };
            }
        }
        best.distance = best_d2.sqrt();
        best
    }
}

fn check_simple(pts: &[Vec2]) -> Result<()> {
    // Closed polygon: profile segments plus the axis segment back to the top.
    let n = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidProfile(format!(
                    "self-intersection between segments {i} and {j}"
                )));
            }
        }
    }
    // Interior points must stay off the axis.
    if pts[1..n - 1].iter().any(|p| p.x == 0.0) {
        return Err(Error::InvalidProfile(
            "interior point touches the axis".into(),
        ));
    }
    Ok(())
}

fn vertex_angle_deg(prev: Vec2, p: Vec2, next: Vec2) -> f64 {
    let a = prev - p;
    let b = next - p;
    let c = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

fn detect_corners(pts: &[Vec2], threshold: f64) -> Vec<usize> {
    let n = pts.len();
    let mirror = |p: Vec2| Vec2::new(-p.x, p.y);
    (0..n)
        .filter(|&i| {
            let (prev, next) = match i {
                0 => (mirror(pts[1]), pts[1]),
                i if i == n - 1 => (pts[n - 2], mirror(pts[n - 2])),
                i => (pts[i - 1], pts[i + 1]),
            };
            vertex_angle_deg(prev, pts[i], next) < threshold
        })
        .collect()
}

fn is_convex(pts: &[Vec2]) -> bool {
    let n = pts.len();
    let eps = 1e-12;
    // Clockwise traversal: every turn must be non-positive.
    for i in 1..n - 1 {
        let a = pts[i] - pts[i - 1];
        let b = pts[i + 1] - pts[i];
        if cross2(a, b) > eps * a.norm() * b.norm() {
            return false;
        }
    }
    // Mirror condition at the poles: the profile must leave/arrive without climbing.
    pts[1].y <= pts[0].y && pts[n - 2].y >= pts[n - 1].y
}

fn is_equatorially_symmetric(pts: &[Vec2], tol: f64) -> bool {
    let n = pts.len();
    let zc = 0.5 * (pts[0].y + pts[n - 1].y);
    (0..n).all(|i| {
        let m = pts[n - 1 - i];
        (pts[i].x - m.x).abs() <= tol && (pts[i].y - (2.0 * zc - m.y)).abs() <= tol
    })
}

/// A smooth piece of a family outline, sampled uniformly in its parameter.
enum Piece {
    Line(Vec2, Vec2),
    Arc {
        center: Vec2,
        radius: f64,
        from: f64,
        to: f64,
    },
}

impl Piece {
    fn at(&self, t: f64) -> Vec2 {
        match self {
            Piece::Line(a, b) => a + (b - a) * t,
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let ang = from + (to - from) * t;
                center + Vec2::new(ang.cos(), ang.sin()) * *radius
            }
        }
    }

    fn length(&self) -> f64 {
        match self {
            Piece::Line(a, b) => (b - a).norm(),
            Piece::Arc {
                radius, from, to, ..
            } => radius * (to - from).abs(),
        }
    }
}

fn sample_pieces(pieces: &[Piece], segments: usize) -> Vec<Vec2> {
    let lens: Vec<f64> = pieces.iter().map(Piece::length).collect();
    let total: f64 = lens.iter().sum();
    let mut pts = vec![pieces[0].at(0.0)];
    for (piece, len) in pieces.iter().zip(&lens) {
        if *len == 0.0 {
            continue;
        }
        let mut k = ((segments as f64 * len / total).round() as usize).max(2);
        if let Piece::Arc { from, to, .. } = piece {
            // Keep every turn well below the sharp-corner threshold.
            k = k.max(((to - from).abs() / 6f64.to_radians()).ceil() as usize);
        }
        for j in 1..=k {
            pts.push(piece.at(j as f64 / k as f64));
        }
    }
    pts
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveDimension { name, value })
    }
}

/// Build the half cross-section polyline for a shape family.
pub fn build_profile(spec: &ShapeSpec) -> Result<Profile> {
    build_profile_with(spec, ProfileOptions::default())
}

pub fn build_profile_with(spec: &ShapeSpec, opts: ProfileOptions) -> Result<Profile> {
    let n = opts.segments;
    let pts = match *spec {
        ShapeSpec::Sphere { radius } => {
            let r = positive("radius", radius)?;
            sample_pieces(
                &[Piece::Arc {
                    center: Vec2::zeros(),
                    radius: r,
                    from: FRAC_PI_2,
                    to: -FRAC_PI_2,
                }],
                n,
            )
        }
        ShapeSpec::Spheroid {
            equatorial_radius,
            polar_radius,
        } => {
            let a = positive("equatorial_radius", equatorial_radius)?;
            let c = positive("polar_radius", polar_radius)?;
            // Uniform in the polar angle keeps the equator a vertex for even counts.
            let k = n + n % 2;
            (0..=k)
                .map(|j| {
                    let th = PI * j as f64 / k as f64;
                    Vec2::new(a * th.sin(), c * th.cos())
                })
                .collect()
        }
        ShapeSpec::Cylinder { radius, height } => {
            let r = positive("radius", radius)?;
            let h = positive("height", height)?;
            frustum_points(r, r, h, n)
        }
        ShapeSpec::Frustum {
            bottom_radius,
            top_radius,
            height,
        } => {
            let h = positive("height", height)?;
            if !(bottom_radius >= 0.0 && top_radius >= 0.0) || bottom_radius + top_radius == 0.0 {
                return Err(Error::NonPositiveDimension {
                    name: "frustum radius",
                    value: bottom_radius.min(top_radius),
                });
            }
            frustum_points(bottom_radius, top_radius, h, n)
        }
        ShapeSpec::Tablet {
            band_radius,
            band_height,
            cap_height,
            edge_radius,
        } => tablet_points(band_radius, band_height, cap_height, edge_radius, n)?,
        ShapeSpec::SpheroCylinder { radius, length } => {
            let r = positive("radius", radius)?;
            let l = positive("length", length)?;
            let top = Vec2::new(0.0, l / 2.0);
            let bot = Vec2::new(0.0, -l / 2.0);
            sample_pieces(
                &[
                    Piece::Arc {
                        center: top,
                        radius: r,
                        from: FRAC_PI_2,
                        to: 0.0,
                    },
                    Piece::Line(Vec2::new(r, l / 2.0), Vec2::new(r, -l / 2.0)),
                    Piece::Arc {
                        center: bot,
                        radius: r,
                        from: 0.0,
                        to: -FRAC_PI_2,
                    },
                ],
                n,
            )
        }
        ShapeSpec::CassiniPeanut { focal, b } => {
            let a = positive("focal", focal)?;
            let b = positive("b", b)?;
            if b <= a {
                return Err(Error::InvalidProfile(
                    "Cassini oval needs b > focal for a single closed loop".into(),
                ));
            }
            let k = n + n % 2;
            (0..=k)
                .map(|j| {
                    // Polar angle from +Z; r^2 = a^2 cos 2t + sqrt(b^4 - a^4 sin^2 2t).
                    let t = PI * j as f64 / k as f64;
                    let s2 = (2.0 * t).sin();
                    let r2 = a * a * (2.0 * t).cos() + (b.powi(4) - a.powi(4) * s2 * s2).sqrt();
                    let r = r2.max(0.0).sqrt();
                    Vec2::new(r * t.sin(), r * t.cos())
                })
                .collect()
        }
        ShapeSpec::Points { ref points } => points.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
        ShapeSpec::File { ref path } => {
            return Profile::read(path, opts.corner_threshold_deg);
        }
    };
    Profile::from_points(pts, opts.corner_threshold_deg)
}

fn frustum_points(r_bot: f64, r_top: f64, h: f64, n: usize) -> Vec<Vec2> {
    let top = Vec2::new(0.0, h / 2.0);
    let rim_top = Vec2::new(r_top, h / 2.0);
    let rim_bot = Vec2::new(r_bot, -h / 2.0);
    let bot = Vec2::new(0.0, -h / 2.0);
    let mut pieces = Vec::new();
    if r_top > 0.0 {
        pieces.push(Piece::Line(top, rim_top));
    }
    pieces.push(Piece::Line(
        if r_top > 0.0 { rim_top } else { top },
        if r_bot > 0.0 { rim_bot } else { bot },
    ));
    if r_bot > 0.0 {
        pieces.push(Piece::Line(rim_bot, bot));
    }
    sample_pieces(&pieces, n)
}

/// Cap sphere radius of a bi-convex tablet.
pub fn tablet_cap_radius(band_radius: f64, cap_height: f64) -> f64 {
    0.5 * (band_radius * band_radius + cap_height * cap_height) / cap_height
}

fn tablet_points(rb: f64, hb: f64, hc: f64, re: f64, n: usize) -> Result<Vec<Vec2>> {
    let rb = positive("band_radius", rb)?;
    let hb = positive("band_height", hb)?;
    let hc = positive("cap_height", hc)?;
    if re < 0.0 {
        return Err(Error::NonPositiveDimension {
            name: "edge_radius",
            value: re,
        });
    }
    if hc >= rb {
        return Err(Error::InvalidProfile(
            "cap height must be below band radius".into(),
        ));
    }
    let rc = tablet_cap_radius(rb, hc);
    // Centre of the sphere forming the top cap (below the tablet centre).
    let top_center = Vec2::new(0.0, hb / 2.0 + hc - rc);
    let bot_center = Vec2::new(0.0, -top_center.y);
    let pieces = if re == 0.0 {
        let junction = ((hb / 2.0) - top_center.y).atan2(rb);
        vec![
            Piece::Arc {
                center: top_center,
                radius: rc,
                from: FRAC_PI_2,
                to: junction,
            },
            Piece::Line(Vec2::new(rb, hb / 2.0), Vec2::new(rb, -hb / 2.0)),
            Piece::Arc {
                center: bot_center,
                radius: rc,
                from: -junction,
                to: -FRAC_PI_2,
            },
        ]
    } else {
        // Fillet tangent to the band line and internally tangent to the cap sphere.
        let cx = rb - re;
        let dz = ((rc - re).powi(2) - cx * cx).sqrt();
        let fz = top_center.y + dz;
        if !(fz > 0.0 && fz < hb / 2.0 + hc) || re >= hb / 2.0 {
            return Err(Error::InvalidProfile(
                "edge radius too large for tablet".into(),
            ));
        }
        let fc = Vec2::new(cx, fz);
        let dir = (fc - top_center).normalize();
        let cap_end = dir.y.atan2(dir.x);
        vec![
            Piece::Arc {
                center: top_center,
                radius: rc,
                from: FRAC_PI_2,
                to: cap_end,
            },
            Piece::Arc {
                center: fc,
                radius: re,
                from: cap_end,
                to: 0.0,
            },
            Piece::Line(Vec2::new(rb, fz), Vec2::new(rb, -fz)),
            Piece::Arc {
                center: Vec2::new(cx, -fz),
                radius: re,
                from: 0.0,
                to: -cap_end,
            },
            Piece::Arc {
                center: bot_center,
                radius: rc,
                from: -cap_end,
                to: -FRAC_PI_2,
            },
        ]
    };
    Ok(sample_pieces(&pieces, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tablet() -> ShapeSpec {
        ShapeSpec::Tablet {
            band_radius: 5.675e-3,
            band_height: 4.0e-3,
            cap_height: 1.23e-3,
            edge_radius: 0.0,
        }
    }

    #[test]
    fn sphere_is_smooth_semicircle() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        assert!(p.corners().is_empty());
        assert_eq!(p.points()[0], Vec2::new(0.0, 1.0));
        for q in p.points() {
            assert!((q.norm() - 1.0).abs() < 1e-12);
        }
        assert!(p.is_convex());
        assert!(p.is_equatorially_symmetric());
        assert!((100..=200).contains(&p.segment_count()));
    }

    #[test]
    fn tablet_cap_radius_and_corners() {
        let rc = tablet_cap_radius(5.675e-3, 1.23e-3);
        let expect = 0.5 * (5.675e-3f64.powi(2) + 1.23e-3f64.powi(2)) / 1.23e-3;
        assert!((rc - expect).abs() < 1e-15);
        assert!((rc - 1.3707e-2).abs() < 1e-6);
        let p = build_profile(&tablet()).unwrap();
        assert_eq!(p.corners().len(), 2);
        for &c in p.corners() {
            let q = p.points()[c];
            assert!((q.x - 5.675e-3).abs() < 1e-12);
            assert!((q.y.abs() - 2.0e-3).abs() < 1e-12);
        }
        assert!((p.major_axis_length() - 11.35e-3).abs() < 1e-12);
        assert!((100..=200).contains(&p.segment_count()));
    }

    #[test]
    fn cylinder_rectangle_with_two_rim_corners() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 2.0,
        })
        .unwrap();
        assert_eq!(p.corners().len(), 2);
        let rims: Vec<Vec2> = p.corners().iter().map(|&i| p.points()[i]).collect();
        assert!(rims.contains(&Vec2::new(1.0, 1.0)));
        assert!(rims.contains(&Vec2::new(1.0, -1.0)));
    }

    #[test]
    fn cone_apex_is_a_corner() {
        let p = build_profile(&ShapeSpec::Frustum {
            bottom_radius: 1.0,
            top_radius: 0.0,
            height: 1.0,
        })
        .unwrap();
        assert!(p.corners().contains(&0));
    }

    #[test]
    fn rounded_tablet_has_no_sharp_corner() {
        let spec = ShapeSpec::Tablet {
            band_radius: 5.675e-3,
            band_height: 4.0e-3,
            cap_height: 1.23e-3,
            edge_radius: 5.675e-3 / 30.0,
        };
        let p = build_profile_with(
            &spec,
            ProfileOptions {
                segments: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(p.corners().is_empty(), "{:?}", p.corners());
    }

    #[test]
    fn peanut_is_not_convex() {
        let p = build_profile(&ShapeSpec::CassiniPeanut { focal: 1.0, b: 1.2 }).unwrap();
        assert!(!p.is_convex());
        assert!(p.corners().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_profile(&ShapeSpec::Sphere { radius: -1.0 }),
            Err(Error::NonPositiveDimension { .. })
        ));
        let bowtie = ShapeSpec::Points {
            points: vec![[0.0, 1.0], [1.0, -1.0], [1.0, 1.0], [0.0, -1.0]],
        };
        assert!(matches!(
            build_profile(&bowtie),
            Err(Error::InvalidProfile(_))
        ));
        let flat = ShapeSpec::Points {
            points: vec![[0.0, 1.0], [0.0, -1.0]],
        };
        assert!(build_profile(&flat).is_err());
    }

    #[test]
    fn raw_import_closes_onto_axis() {
        let text = "# square\n0.5 0.5\n0.5 -0.5\n";
        let p = Profile::from_text(text, 170.0).unwrap();
        assert_eq!(p.points().len(), 4);
        assert_eq!(p.points()[0], Vec2::new(0.0, 0.5));
        assert_eq!(p.points()[3], Vec2::new(0.0, -0.5));
        assert_eq!(p.corners().len(), 2);
        let back = Profile::from_text(&p.to_text(), 170.0).unwrap();
        assert_eq!(back.points(), p.points());
        assert!(matches!(
            Profile::from_text("1 2 3\n", 170.0),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn closest_point_is_on_profile() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let f = p.closest(Vec2::new(0.3, 0.0));
        assert!((f.distance - 0.7).abs() < 1e-3);
        assert!((f.arc - p.arc_length() / 2.0).abs() < 1e-2);
        assert!((p.point_at_arc(f.arc) - f.point).norm() < 1e-12);
    }
}
