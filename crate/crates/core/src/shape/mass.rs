use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::Profile;
use crate::{Error, Result, Vec3};

/// Mass, centre of mass and principal moments of a homogeneous solid of
/// revolution. Moments are about the centre of mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassProperties {
    pub mass: f64,
    /// Height of the centre of mass on the body Z-axis, in profile coordinates.
    pub center_of_mass_z: f64,
    pub ix: f64,
    pub iy: f64,
    pub iz: f64,
    pub volume: f64,
    pub density: f64,
}

impl MassProperties {
    pub fn inertia(&self) -> Vec3 {
        Vec3::new(self.ix, self.iy, self.iz)
    }

    /// Radius of the sphere with the same volume.
    pub fn equivalent_radius(&self) -> f64 {
        (3.0 * self.volume / (4.0 * PI)).cbrt()
    }
}

const SIMPSON_SUBDIVISIONS: usize = 8;

/// Line integral `sum_seg int g(x, z) (-dz)` along the profile, which equals
/// `int_{z_D}^{z_A} g(f(z), z) dz` for monotone profiles and the signed
/// disk-stack integral otherwise.
fn profile_integral(profile: &Profile, g: impl Fn(f64, f64) -> f64) -> f64 {
    let n = SIMPSON_SUBDIVISIONS;
    let h = 1.0 / n as f64;
    profile
        .points()
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let dz = b.y - a.y;
            if dz == 0.0 {
                return 0.0;
            }
            let f = |t: f64| {
                let p = a + (b - a) * t;
                g(p.x, p.y)
            };
            let mut s = f(0.0) + f(1.0);
            for k in 1..n {
                s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            -dz * s * h / 3.0
        })
        .sum()
}

/// Mass properties by quadrature of the disk-stack integrals over the profile.
pub fn revolve_properties(profile: &Profile, density: f64) -> Result<MassProperties> {
    if !(density > 0.0) {
        return Err(Error::NonPositiveDimension {
            name: "density",
            value: density,
        });
    }
    let i2 = profile_integral(profile, |x, _| x * x);
    let scale = profile.major_axis_length();
    if !(i2 > 1e-14 * scale.powi(3)) {
        return Err(Error::DegenerateProfile);
    }
    let volume = PI * i2;
    let mass = density * volume;
    let cz = profile_integral(profile, |x, z| z * x * x) / i2;
    let iz = 0.5 * PI * density * profile_integral(profile, |x, _| x.powi(4));
    let ix_origin = 0.5 * iz + PI * density * profile_integral(profile, |x, z| z * z * x * x);
    let ix = ix_origin - mass * cz * cz;
    Ok(MassProperties {
        mass,
        center_of_mass_z: cz,
        ix,
        iy: ix,
        iz,
        volume,
        density,
    })
}

/// Indexed triangle mesh.
#[derive(Clone, Debug, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Number of edges not shared by exactly two faces.
    pub fn open_edges(&self) -> usize {
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().filter(|&&c| c != 2).count()
    }

    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let (a, b, c) = (
                    self.vertices[f[0]],
                    self.vertices[f[1]],
                    self.vertices[f[2]],
                );
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Parse `v x y z` and `f i j k` lines (1-based indices, `#` comments).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut mesh = TriMesh::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut cols = line.split_whitespace();
            let tag = cols.next().unwrap();
            let rest: Vec<&str> = cols.collect();
            if rest.len() != 3 {
                return Err(err(format!("expected 3 values, found {}", rest.len())));
            }
            match tag {
                "v" => {
                    let mut v = [0.0; 3];
                    for (k, s) in rest.iter().enumerate() {
                        v[k] = s
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
                    }
                    mesh.vertices.push(Vec3::new(v[0], v[1], v[2]));
                }
                "f" => {
                    let mut f = [0usize; 3];
                    for (k, s) in rest.iter().enumerate() {
                        let idx: usize = s
                            .parse()
                            .map_err(|e: std::num::ParseIntError| err(e.to_string()))?;
                        if idx == 0 {
                            return Err(err("face indices are 1-based".into()));
                        }
                        f[k] = idx - 1;
                    }
                    mesh.faces.push(f);
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        if let Some(bad) = mesh
            .faces
            .iter()
            .flatten()
            .find(|&&k| k >= mesh.vertices.len())
        {
            return Err(Error::Parse {
                line: 0,
                msg: format!("face index {} out of range", bad + 1),
            });
        }
        Ok(mesh)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!("v {:e} {:e} {:e}\n", v.x, v.y, v.z));
        }
        for f in &self.faces {
            s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
        s
    }
}

/// Closed triangle mesh obtained by sweeping the profile around the Z-axis.
pub fn revolve_mesh(profile: &Profile, around: usize) -> TriMesh {
    let around = around.max(3);
    let pts = profile.points();
    let n = pts.len();
    let mut mesh = TriMesh::default();
    mesh.vertices.push(Vec3::new(0.0, 0.0, pts[0].y));
    let ring_start = |k: usize| 1 + (k - 1) * around;
    for p in &pts[1..n - 1] {
        for j in 0..around {
            let a = 2.0 * PI * j as f64 / around as f64;
            mesh.vertices
                .push(Vec3::new(p.x * a.cos(), p.x * a.sin(), p.y));
        }
    }
    let bottom = mesh.vertices.len();
    mesh.vertices.push(Vec3::new(0.0, 0.0, pts[n - 1].y));
    for j in 0..around {
        let j1 = (j + 1) % around;
        let r = ring_start(1);
        mesh.faces.push([0, r + j1, r + j]);
    }
    for k in 1..n - 2 {
        let (r0, r1) = (ring_start(k), ring_start(k + 1));
        for j in 0..around {
            let j1 = (j + 1) % around;
            mesh.faces.push([r0 + j, r0 + j1, r1 + j1]);
            mesh.faces.push([r0 + j, r1 + j1, r1 + j]);
        }
    }
    let r = ring_start(n - 2);
    for j in 0..around {
        let j1 = (j + 1) % around;
        mesh.faces.push([bottom, r + j, r + j1]);
    }
    if mesh.signed_volume() < 0.0 {
        for f in mesh.faces.iter_mut() {
            f.swap(1, 2);
        }
    }
    mesh
}

/// Mass properties by voxelising the mesh AABB at cell size `l / n` and
/// summing the cells whose centres fall inside as point masses.
pub fn voxel_properties(mesh: &TriMesh, n: usize, density: f64) -> Result<MassProperties> {
    if n < 10 {
        return Err(Error::TooFewDivisions(n));
    }
    if !(density > 0.0) {
        return Err(Error::NonPositiveDimension {
            name: "density",
            value: density,
        });
    }
    let open = mesh.open_edges();
    if open > 0 || mesh.faces.is_empty() {
        return Err(Error::OpenMesh(open));
    }
    let (lo, hi) = mesh.aabb();
    let ext = hi - lo;
    let l = ext.max();
    let h = l / n as f64;
    let dims: Vec<usize> = (0..3)
        .map(|k| ((ext[k] / h).ceil() as usize).max(1))
        .collect();
    let origin: Vec3 = Vec3::from_fn(|k, _| lo[k] - 0.5 * (dims[k] as f64 * h - ext[k]));
    let (nx, ny, nz) = (dims[0], dims[1], dims[2]);

    // Column centres are nudged off any lattice the mesh vertices might share.
    let jitter = (1.234_567e-6 * h, 2.345_671e-6 * h);
    let col_x = |i: usize| origin.x + (i as f64 + 0.5) * h + jitter.0;
    let col_y = |j: usize| origin.y + (j as f64 + 0.5) * h + jitter.1;

    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); nx * ny];
    for f in &mesh.faces {
        let (a, b, c) = (
            mesh.vertices[f[0]],
            mesh.vertices[f[1]],
            mesh.vertices[f[2]],
        );
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        if det == 0.0 {
            continue;
        }
        let xmin = a.x.min(b.x).min(c.x);
        let xmax = a.x.max(b.x).max(c.x);
        let ymin = a.y.min(b.y).min(c.y);
        let ymax = a.y.max(b.y).max(c.y);
        let i0 = (((xmin - origin.x) / h - 0.5).floor().max(0.0)) as usize;
        let i1 = ((((xmax - origin.x) / h - 0.5).ceil()) as usize).min(nx - 1);
        let j0 = (((ymin - origin.y) / h - 0.5).floor().max(0.0)) as usize;
        let j1 = ((((ymax - origin.y) / h - 0.5).ceil()) as usize).min(ny - 1);
        for i in i0..=i1 {
            let px = col_x(i);
            for j in j0..=j1 {
                let py = col_y(j);
                let u = ((b.x - px) * (c.y - py) - (c.x - px) * (b.y - py)) / det;
                let v = ((c.x - px) * (a.y - py) - (a.x - px) * (c.y - py)) / det;
                let w = 1.0 - u - v;
                if u >= 0.0 && v >= 0.0 && w >= 0.0 {
                    crossings[i * ny + j].push(u * a.z + v * b.z + w * c.z);
                }
            }
        }
    }

    let mut count = 0u64;
    let mut s1 = Vec3::zeros();
    let mut s2 = Vec3::zeros();
    for i in 0..nx {
        let x = col_x(i);
        for j in 0..ny {
            let y = col_y(j);
            let zs = &mut crossings[i * ny + j];
            zs.sort_by(|p, q| p.partial_cmp(q).unwrap());
            for pair in zs.chunks_exact(2) {
                let k0 = ((pair[0] - origin.z) / h - 0.5).ceil().max(0.0) as usize;
                let k1 = (((pair[1] - origin.z) / h - 0.5).floor()).min(nz as f64 - 1.0);
                if k1 < 0.0 {
                    continue;
                }
                for k in k0..=k1 as usize {
                    let z = origin.z + (k as f64 + 0.5) * h;
                    count += 1;
                    s1 += Vec3::new(x, y, z);
                    s2 += Vec3::new(x * x, y * y, z * z);
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::DegenerateProfile);
    }
    let cell_mass = density * h * h * h;
    let nf = count as f64;
    let c = s1 / nf;
    let var = s2 / nf - c.component_mul(&c);
    let mass = nf * cell_mass;
    let ix = mass * (var.y + var.z);
    let iy = mass * (var.x + var.z);
    let iz = mass * (var.x + var.y);
    Ok(MassProperties {
        mass,
        center_of_mass_z: c.z,
        ix: 0.5 * (ix + iy),
        iy: 0.5 * (ix + iy),
        iz,
        volume: nf * h * h * h,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{build_profile, ShapeSpec};

    #[test]
    fn analytic_sphere() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let m = revolve_properties(&p, 1.0).unwrap();
        let exact = 4.0 * PI / 3.0;
        assert!((m.mass - exact).abs() / exact < 1e-3, "{}", m.mass);
        assert!((m.iz - 0.4 * exact).abs() / (0.4 * exact) < 2e-3);
        assert!((m.ix - m.iz).abs() / m.iz < 1e-3);
        assert!(m.center_of_mass_z.abs() < 1e-12);
    }

    #[test]
    fn analytic_cylinder_is_exact() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 2.0,
        })
        .unwrap();
        let m = revolve_properties(&p, 1.0).unwrap();
        assert!((m.mass - 2.0 * PI).abs() < 1e-12);
        assert!((m.iz - PI).abs() < 1e-12);
        // I_x = M (3R^2 + H^2) / 12
        assert!((m.ix - 2.0 * PI * 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn off_centre_profile_reports_com() {
        let pts = vec![[0.0, 3.0], [1.0, 3.0], [1.0, 1.0], [0.0, 1.0]];
        let p = build_profile(&ShapeSpec::Points { points: pts }).unwrap();
        let m = revolve_properties(&p, 2.0).unwrap();
        assert!((m.center_of_mass_z - 2.0).abs() < 1e-12);
        assert!((m.ix - m.mass * 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn revolved_mesh_is_closed_and_outward() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let mesh = revolve_mesh(&p, 64);
        assert_eq!(mesh.open_edges(), 0);
        assert!(mesh.signed_volume() > 4.0);
        let text = mesh.to_text();
        let back = TriMesh::from_text(&text).unwrap();
        assert_eq!(back.faces, mesh.faces);
    }

    #[test]
    fn voxel_errors() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let mut mesh = revolve_mesh(&p, 32);
        assert!(matches!(
            voxel_properties(&mesh, 9, 1.0),
            Err(Error::TooFewDivisions(9))
        ));
        mesh.faces.pop();
        assert!(matches!(
            voxel_properties(&mesh, 50, 1.0),
            Err(Error::OpenMesh(_))
        ));
    }

    #[test]
    fn voxel_sphere_within_one_percent() {
        let p = build_profile(&ShapeSpec::Sphere { radius: 1.0 }).unwrap();
        let mesh = revolve_mesh(&p, 128);
        let m = voxel_properties(&mesh, 150, 1.0).unwrap();
        let exact = 4.0 * PI / 3.0;
        assert!((m.mass - exact).abs() / exact < 0.01, "{}", m.mass);
        assert!((m.iz - 0.4 * exact).abs() / (0.4 * exact) < 0.02);
    }

    #[test]
    fn thin_disk_ratio_approaches_two() {
        let p = build_profile(&ShapeSpec::Cylinder {
            radius: 1.0,
            height: 0.1,
        })
        .unwrap();
        let mesh = revolve_mesh(&p, 128);
        let m = voxel_properties(&mesh, 150, 1.0).unwrap();
        let ratio = m.iz / m.ix;
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }
}
