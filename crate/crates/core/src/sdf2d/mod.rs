//! Quadtree-refined signed distance field of a meridian cross-section.
//!
//! The field covers the profile mirrored about the axis, so the axis is an
//! interior grid line and queries with `x < 0` are valid. Leaf cells carry
//! exact φ and distance vectors at their four corners; queries descend the
//! quadtree and interpolate bilinearly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::shape::Profile;
use crate::{Error, Result, Vec2};

pub const MAX_LEVEL: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdfOptions {
    /// Base cells per major axis length.
    pub base_res: usize,
    pub interface_level: usize,
    pub corner_level: usize,
    /// Refine further (up to [`MAX_LEVEL`]) wherever the bilinear field
    /// deviates from the exact one by more than this fraction of `l`.
    /// Zero disables it.
    pub error_tolerance: f64,
}

impl Default for SdfOptions {
    fn default() -> Self {
        Self {
            base_res: 50,
            interface_level: 2,
            corner_level: 4,
            error_tolerance: 2.5e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Base,
    Interface,
    Corner,
}

/// Signed distance φ and the vector from the query point to the nearest
/// profile point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdfSample {
    pub phi: f64,
    pub dvec: Vec2,
}

/// Leaf cell address: base cell plus child indices (`ix + 2 iz`) from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellRef {
    pub base: (usize, usize),
    pub path: Vec<u8>,
}

impl CellRef {
    pub fn depth(&self) -> usize {
        self.path.len()
    }
}

#[derive(Clone, Debug)]
struct Cell {
    origin: Vec2,
    size: f64,
    /// Corner values, counter-clockwise from bottom-left: P0 BL, P1 BR, P2 TR, P3 TL.
    phi: [f64; 4],
    dvec: [Vec2; 4],
    /// Index of the first of four consecutive children, 0 for a leaf.
    child: u32,
    depth: u8,
    kind: CellKind,
}

#[derive(Clone, Debug)]
pub struct SdfGrid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    nz: usize,
    cells: Vec<Cell>,
    options: SdfOptions,
}

/// Exact signed distance to the profile polyline. `p.x < 0` is mirrored.
pub fn exact_distance(profile: &Profile, p: Vec2) -> SdfSample {
    let foot = profile.closest(p);
    let q = Vec2::new(p.x.abs(), p.y);
    let mut dvec = foot.point - q;
    if p.x < 0.0 {
        dvec.x = -dvec.x;
    }
    let phi = if profile.contains(q) {
        -foot.distance
    } else {
        foot.distance
    };
    SdfSample { phi, dvec }
}

const CORNER_OFFSETS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

/// Interpolate along x on the bottom and top edges, then along z.
fn bilinear<T>(v: &[T; 4], tx: f64, tz: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let bottom = v[0] * (1.0 - tx) + v[1] * tx;
    let top = v[3] * (1.0 - tx) + v[2] * tx;
    bottom * (1.0 - tz) + top * tz
}

/// Lower-index cell on ties: a coordinate exactly on a shared edge belongs
/// to the cell below it.
fn tie_index(t: f64, n: usize) -> usize {
    ((t.ceil() as isize) - 1).clamp(0, n as isize - 1) as usize
}

impl Cell {
    fn new(profile: &Profile, origin: Vec2, size: f64, depth: u8, kind: CellKind) -> Self {
        let mut phi = [0.0; 4];
        let mut dvec = [Vec2::zeros(); 4];
        for (k, (ox, oz)) in CORNER_OFFSETS.iter().enumerate() {
            let s = exact_distance(profile, origin + Vec2::new(ox * size, oz * size));
            phi[k] = s.phi;
            dvec[k] = s.dvec;
        }
        Self {
            origin,
            size,
            phi,
            dvec,
            child: 0,
            depth,
            kind,
        }
    }

    fn interpolate(&self, p: Vec2) -> SdfSample {
        let tx = ((p.x - self.origin.x) / self.size).clamp(0.0, 1.0);
        let tz = ((p.y - self.origin.y) / self.size).clamp(0.0, 1.0);
        SdfSample {
            phi: bilinear(&self.phi, tx, tz),
            dvec: bilinear(&self.dvec, tx, tz),
        }
    }

    fn contains_corner(&self, corners: &[Vec2]) -> bool {
        let lo = self.origin - Vec2::repeat(self.size);
        let hi = self.origin + Vec2::repeat(2.0 * self.size);
        corners
            .iter()
            .any(|c| c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y)
    }

    fn max_error(&self, profile: &Profile) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let p = self.origin
                    + Vec2::new((a as f64 + 0.5) * 0.25, (b as f64 + 0.5) * 0.25) * self.size;
                let e = (self.interpolate(p).phi - exact_distance(profile, p).phi).abs();
                worst = worst.max(e);
            }
        }
        worst
    }
}

/// Build the field of `profile`. Cells whose corners come within one cell
/// diagonal of the boundary are refined to `interface_level`, cells within one
/// cell of a profile corner to `corner_level`.
pub fn build_sdf(profile: &Profile, options: &SdfOptions) -> Result<SdfGrid> {
    for level in [options.interface_level, options.corner_level] {
        if level > MAX_LEVEL {
            return Err(Error::RefinementLevel(level));
        }
    }
    if options.base_res == 0 {
        return Err(Error::NonPositiveDimension {
            name: "base_res",
            value: 0.0,
        });
    }
    let l = profile.major_axis_length();
    let cell = l / options.base_res as f64;
    let (z_min, z_max) = profile.z_range();
    let half = ((profile.x_max() / cell).ceil() as usize) + 1;
    let nx = 2 * half;
    let nz = (((z_max - z_min) / cell).ceil() as usize) + 2;
    let origin = Vec2::new(
        -(half as f64) * cell,
        0.5 * (z_min + z_max) - 0.5 * nz as f64 * cell,
    );

    let mut corners: Vec<Vec2> = profile
        .corners()
        .iter()
        .map(|&i| profile.points()[i])
        .collect();
    corners.extend(corners.clone().into_iter().map(|c| Vec2::new(-c.x, c.y)));
    let tolerance = options.error_tolerance * l;

    let mut cells = Vec::with_capacity(nx * nz * 2);
    for j in 0..nz {
        for i in 0..nx {
            let o = origin + Vec2::new(i as f64 * cell, j as f64 * cell);
            cells.push(Cell::new(profile, o, cell, 0, CellKind::Base));
        }
    }

    let mut stack: Vec<usize> = (0..cells.len()).rev().collect();
    while let Some(idx) = stack.pop() {
        let c = &cells[idx];
        let depth = c.depth as usize;
        let diag = c.size * std::f64::consts::SQRT_2;
        let near = c.phi.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min) <= diag;
        let relevant = c.phi.iter().copied().fold(f64::INFINITY, f64::min) <= diag;
        let kind = if depth < options.corner_level && c.contains_corner(&corners) {
            Some(CellKind::Corner)
        } else if depth < options.interface_level && near {
            Some(if c.kind == CellKind::Corner {
                CellKind::Corner
            } else {
                CellKind::Interface
            })
        } else if tolerance > 0.0
            && depth < MAX_LEVEL
            && relevant
            && c.max_error(profile) > tolerance
        {
            Some(if c.kind == CellKind::Base {
                CellKind::Interface
            } else {
                c.kind
            })
        } else {
            None
        };
        let Some(kind) = kind else { continue };
        let child = cells.len();
        let (o, h) = (c.origin, 0.5 * c.size);
        for k in 0..4 {
            let off = Vec2::new((k % 2) as f64 * h, (k / 2) as f64 * h);
            cells.push(Cell::new(profile, o + off, h, depth as u8 + 1, kind));
        }
        cells[idx].child = child as u32;
        stack.extend((child..child + 4).rev());
    }

    Ok(SdfGrid {
        origin,
        cell,
        nx,
        nz,
        cells,
        options: *options,
    })
}

impl SdfGrid {
    pub fn options(&self) -> &SdfOptions {
        &self.options
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn base_cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    pub fn extent(&self) -> (Vec2, Vec2) {
        let span = Vec2::new(self.nx as f64 * self.cell, self.nz as f64 * self.cell);
        (self.origin, self.origin + span)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.cells.iter().filter(|c| c.child == 0).count()
    }

    fn leaf(&self, p: Vec2) -> Option<(usize, CellRef)> {
        let (lo, hi) = self.extent();
        if !(p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y) {
            return None;
        }
        let i = tie_index((p.x - self.origin.x) / self.cell, self.nx);
        let j = tie_index((p.y - self.origin.y) / self.cell, self.nz);
        let mut idx = j * self.nx + i;
        let mut path = Vec::new();
        while self.cells[idx].child != 0 {
            let c = &self.cells[idx];
            let mid = c.origin + Vec2::repeat(0.5 * c.size);
            let k = usize::from(p.x > mid.x) + 2 * usize::from(p.y > mid.y);
            path.push(k as u8);
            idx = c.child as usize + k;
        }
        Some((idx, CellRef { base: (i, j), path }))
    }

    /// Leaf cell containing `p`, or `None` outside the grid extent.
    pub fn locate_cell(&self, p: Vec2) -> Option<CellRef> {
        self.leaf(p).map(|(_, r)| r)
    }

    /// Kind and edge length of the leaf containing `p`.
    pub fn leaf_info(&self, p: Vec2) -> Option<(CellKind, f64)> {
        self.leaf(p)
            .map(|(idx, _)| (self.cells[idx].kind, self.cells[idx].size))
    }

    /// Bilinear φ and distance vector at `p`; `None` outside the extent.
    pub fn sample(&self, p: Vec2) -> Option<SdfSample> {
        let (lo, hi) = self.extent();
        if !(p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y) {
            return None;
        }
        let i = tie_index((p.x - self.origin.x) / self.cell, self.nx);
        let j = tie_index((p.y - self.origin.y) / self.cell, self.nz);
        let mut c = &self.cells[j * self.nx + i];
        while c.child != 0 {
            let mid = c.origin + Vec2::repeat(0.5 * c.size);
            let k = usize::from(p.x > mid.x) + 2 * usize::from(p.y > mid.y);
            c = &self.cells[c.child as usize + k];
        }
        Some(c.interpolate(p))
    }

    /// Like [`sample`](Self::sample), but corner-refined leaves are answered
    /// with the exact distance when `exact_corners` is set.
    pub fn sample_with(
        &self,
        profile: &Profile,
        p: Vec2,
        exact_corners: bool,
    ) -> Option<SdfSample> {
        if exact_corners {
            let (idx, _) = self.leaf(p)?;
            if self.cells[idx].kind == CellKind::Corner {
                return Some(exact_distance(profile, p));
            }
            return Some(self.cells[idx].interpolate(p));
        }
        self.sample(p)
    }

    /// Text table `x z phi dx dz`, one line per distinct leaf corner point.
    pub fn dump(&self) -> String {
        let mut seen = std::collections::HashSet::new();
        let mut out = String::from("# x z phi dx dz\n");
        for c in self.cells.iter().filter(|c| c.child == 0) {
            for (k, (ox, oz)) in CORNER_OFFSETS.iter().enumerate() {
                let p = c.origin + Vec2::new(ox * c.size, oz * c.size);
                if seen.insert((p.x.to_bits(), p.y.to_bits())) {
                    let _ = writeln!(
                        out,
                        "{:e} {:e} {:e} {:e} {:e}",
                        p.x, p.y, c.phi[k], c.dvec[k].x, c.dvec[k].y
                    );
                }
            }
        }
        out
    }
}

/// Unit direction of increasing φ implied by a sample, falling back to the
/// outward profile normal when the distance vector vanishes.
pub fn outward_direction(profile: &Profile, p: Vec2, s: &SdfSample) -> Vec2 {
    let n = s.dvec.norm();
    if n > 0.0 {
        return if s.phi <= 0.0 {
            s.dvec / n
        } else {
            -s.dvec / n
        };
    }
    let foot = profile.closest(p);
    let mut normal = profile.segment_normal(foot.segment);
    if p.x < 0.0 {
        normal.x = -normal.x;
    }
    normal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{build_profile, ShapeSpec};

    #[test]
    fn square_centre_and_corner_vector() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 2.0,
        })
        .unwrap();
        let s = exact_distance(&p, Vec2::new(0.0, 0.0));
        assert!((s.phi + 1.0).abs() < 1e-12);
        let s = exact_distance(&p, Vec2::new(1.2, 1.3));
        assert!(s.phi > 0.0);
        assert!((s.dvec - Vec2::new(-0.2, -0.3)).norm() < 1e-12);
    }

    #[test]
    fn grid_points_are_exact() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let g = build_sdf(&p, &SdfOptions::default()).unwrap();
        let o = g.origin() + Vec2::new(3.0, 7.0) * g.base_cell_size();
        let e = exact_distance(&p, o);
        assert_eq!(g.sample(o).unwrap().phi, e.phi);
    }

    #[test]
    fn origin_and_ties() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let g = build_sdf(&p, &SdfOptions::default()).unwrap();
        let r = g.locate_cell(g.origin()).unwrap();
        assert_eq!(r.base, (0, 0));
        assert!(r.path.is_empty());
        let edge = g.origin() + Vec2::new(2.0, 0.5) * g.base_cell_size();
        assert_eq!(g.locate_cell(edge).unwrap().base, (1, 0));
        let (lo, _) = g.extent();
        assert!(g.sample(lo - Vec2::repeat(1e-9)).is_none());
    }

    #[test]
    fn refinement_levels_are_checked() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let opts = SdfOptions {
            corner_level: 9,
            ..SdfOptions::default()
        };
        assert!(matches!(
            build_sdf(&p, &opts),
            Err(Error::RefinementLevel(9))
        ));
    }

    #[test]
    fn dump_has_header_and_rows() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let opts = SdfOptions {
            base_res: 10,
            interface_level: 1,
            corner_level: 1,
            error_tolerance: 0.0,
        };
        let g = build_sdf(&p, &opts).unwrap();
        let text = g.dump();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert!(rows.len() > g.leaf_count());
        assert_eq!(rows[0].split_whitespace().count(), 5);
    }
}
