use super::{ContactKey, ContactRecord, Partner};
use crate::body::{MaterialParams, Particle};
use crate::geom::closest_on_triangle;
use crate::shape::TriMesh;
use crate::{Error, Result, Vec3};

#[derive(Clone, Debug)]
pub enum WallShape {
    /// Half-space boundary; `normal` points to the side particles occupy.
    Plane { point: Vec3, normal: Vec3 },
    /// Finite cylinder between `p1` and `p2`. With `inward` the particles are
    /// inside it.
    Cylinder {
        radius: f64,
        p1: Vec3,
        p2: Vec3,
        inward: bool,
    },
    /// Triangle mesh; face winding gives the normal of the particle side.
    Mesh { mesh: TriMesh },
}

/// A kinematic boundary. Its surface velocity is `velocity + ω × (x − pivot)`.
#[derive(Clone, Debug)]
pub struct Wall {
    pub id: usize,
    pub shape: WallShape,
    pub material: MaterialParams,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    pub pivot: Vec3,
}

impl Wall {
    pub fn new(id: usize, shape: WallShape, material: MaterialParams) -> Result<Self> {
        let shape = match shape {
            WallShape::Plane { point, normal } => {
                let n = normal.norm();
                if !(n > 0.0) {
                    return Err(Error::Config("wall normal must be non-zero".into()));
                }
                WallShape::Plane {
                    point,
                    normal: normal / n,
                }
            }
            WallShape::Cylinder {
                radius,
                p1,
                p2,
                inward,
            } => {
                if !(radius > 0.0) || (p2 - p1).norm() == 0.0 {
                    return Err(Error::Config(
                        "cylinder wall needs a positive radius and distinct axis points".into(),
                    ));
                }
                WallShape::Cylinder {
                    radius,
                    p1,
                    p2,
                    inward,
                }
            }
            mesh @ WallShape::Mesh { .. } => mesh,
        };
        Ok(Self {
            id,
            shape,
            material,
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            pivot: Vec3::zeros(),
        })
    }

    pub fn plane(id: usize, point: Vec3, normal: Vec3, material: MaterialParams) -> Result<Self> {
        Self::new(id, WallShape::Plane { point, normal }, material)
    }

    pub fn with_rotation(mut self, angular_velocity: Vec3, pivot: Vec3) -> Self {
        self.angular_velocity = angular_velocity;
        self.pivot = pivot;
        self
    }

    pub fn velocity_at(&self, x: Vec3) -> Vec3 {
        self.velocity + self.angular_velocity.cross(&(x - self.pivot))
    }

    /// Mean curvature seen from the particle side: concave surfaces are negative.
    pub fn mean_curvature(&self) -> f64 {
        match &self.shape {
            WallShape::Cylinder { radius, inward, .. } => {
                if *inward {
                    -0.5 / radius
                } else {
                    0.5 / radius
                }
            }
            _ => 0.0,
        }
    }

    /// Overlap vector from `x` to the wall surface if `x` is inside the wall,
    /// i.e. on the far side of it from the particles.
    pub fn penetration(&self, x: Vec3) -> Option<Vec3> {
        match &self.shape {
            WallShape::Plane { point, normal } => {
                let d = (x - point).dot(normal);
                (d < 0.0).then(|| -d * normal)
            }
            WallShape::Cylinder {
                radius,
                p1,
                p2,
                inward,
            } => {
                let axis = p2 - p1;
                let len = axis.norm();
                let u = axis / len;
                let t = (x - p1).dot(&u);
                if t < 0.0 || t > len {
                    return None;
                }
                let radial = (x - p1) - t * u;
                let rho = radial.norm();
                if rho == 0.0 {
                    return None;
                }
                let gap = if *inward { radius - rho } else { rho - radius };
                (gap < 0.0).then(|| radial * ((radius - rho) / rho))
            }
            WallShape::Mesh { mesh } => {
                let mut best: Option<(f64, Vec3, Vec3)> = None;
                for f in &mesh.faces {
                    let (a, b, c) = (
                        mesh.vertices[f[0]],
                        mesh.vertices[f[1]],
                        mesh.vertices[f[2]],
                    );
                    let foot = closest_on_triangle(x, a, b, c);
                    let d2 = (foot - x).norm_squared();
                    if best.is_none_or(|(bd, _, _)| d2 < bd) {
                        best = Some((d2, foot, (b - a).cross(&(c - a))));
                    }
                }
                let (_, foot, n) = best?;
                ((x - foot).dot(&n) < 0.0).then(|| foot - x)
            }
        }
    }

    /// Signed distance from `x` to the wall, positive on the particle side.
    /// Meshes report the unsigned distance.
    pub fn distance(&self, x: Vec3) -> f64 {
        match &self.shape {
            WallShape::Plane { point, normal } => (x - point).dot(normal),
            WallShape::Cylinder {
                radius,
                p1,
                p2,
                inward,
            } => {
                let u = (p2 - p1).normalize();
                let rho = ((x - p1) - (x - p1).dot(&u) * u).norm();
                if *inward {
                    radius - rho
                } else {
                    rho - radius
                }
            }
            WallShape::Mesh { mesh } => mesh
                .faces
                .iter()
                .map(|f| {
                    (closest_on_triangle(
                        x,
                        mesh.vertices[f[0]],
                        mesh.vertices[f[1]],
                        mesh.vertices[f[2]],
                    ) - x)
                        .norm()
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Contact records of a particle's nodes against a wall; the particle is the master.
pub fn wall_contact(particle: &Particle, wall: &Wall) -> Vec<ContactRecord> {
    let r = particle.bounding_radius();
    let clear = match &wall.shape {
        WallShape::Plane { point, normal } => -particle.extent(-normal) > point.dot(normal),
        WallShape::Cylinder { .. } => wall.distance(particle.position) > r,
        WallShape::Mesh { .. } => false,
    };
    if clear {
        return Vec::new();
    }
    let rot = particle.rotation();
    particle
        .template
        .nodes
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(k, n)| {
            let x = rot * n + particle.position;
            wall.penetration(x).map(|dn| ContactRecord {
                key: ContactKey {
                    master: particle.id,
                    partner: Partner::Wall(wall.id),
                    node: k,
                },
                dn,
                point: x,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat() -> MaterialParams {
        MaterialParams::new(1e9, 0.3, 1000.0)
    }

    #[test]
    fn plane_penetration_points_out_of_the_wall() {
        let w = Wall::plane(0, Vec3::zeros(), Vec3::new(0.0, 0.0, 2.0), mat()).unwrap();
        assert_eq!(w.penetration(Vec3::new(0.3, 0.0, 0.1)), None);
        let d = w.penetration(Vec3::new(0.3, 0.0, -0.1)).unwrap();
        assert!((d - Vec3::new(0.0, 0.0, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn cylinder_inside_and_outside() {
        let shape = WallShape::Cylinder {
            radius: 1.0,
            p1: Vec3::zeros(),
            p2: Vec3::z(),
            inward: true,
        };
        let w = Wall::new(0, shape, mat()).unwrap();
        assert_eq!(w.penetration(Vec3::new(0.5, 0.0, 0.5)), None);
        let d = w.penetration(Vec3::new(1.1, 0.0, 0.5)).unwrap();
        assert!((d - Vec3::new(-0.1, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(w.penetration(Vec3::new(1.1, 0.0, 1.5)), None);
        assert!(w.mean_curvature() < 0.0);
    }

    #[test]
    fn drum_surface_velocity() {
        let shape = WallShape::Cylinder {
            radius: 1.0,
            p1: Vec3::zeros(),
            p2: Vec3::y(),
            inward: true,
        };
        let w = Wall::new(0, shape, mat())
            .unwrap()
            .with_rotation(Vec3::new(0.0, 2.0, 0.0), Vec3::zeros());
        let v = w.velocity_at(Vec3::new(0.0, 0.5, -1.0));
        assert!((v - Vec3::new(-2.0, 0.0, 0.0)).norm() < 1e-15);
    }
}
