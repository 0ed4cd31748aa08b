//! Property tests over randomly drawn inputs.

use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

use proptest::prelude::*;

use srdem::body::{
    axis_angle, rotation_matrix, MaterialParams, Particle, ShapeTemplate, TemplateOptions,
};
use srdem::contact::{broadphase_pairs, particle_contacts, NarrowPhaseOptions};
use srdem::force::{
    damping_ratio, hertz_mindlin, pair_coefficients, update_tangential_history, ForceOptions,
    PairClass,
};
use srdem::par;
use srdem::scenarios::{fill_height, lls_angle_of_repose};
use srdem::shape::{build_profile, ShapeSpec};
use srdem::{Quat, Vec2, Vec3};

fn tablet() -> Arc<ShapeTemplate> {
    static T: OnceLock<Arc<ShapeTemplate>> = OnceLock::new();
    T.get_or_init(|| {
        let spec = ShapeSpec::Tablet {
            band_radius: 5e-3,
            band_height: 2e-3,
            cap_height: 1e-3,
            edge_radius: 0.0,
        };
        let options = TemplateOptions {
            n_nodes: 1500,
            ..Default::default()
        };
        ShapeTemplate::build(&build_profile(&spec).unwrap(), 1200.0, &options).unwrap()
    })
    .clone()
}

fn sphere(r: f64) -> Arc<ShapeTemplate> {
    type Cache = Mutex<Vec<(u64, Arc<ShapeTemplate>)>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    if let Some((_, t)) = cache.iter().find(|(bits, _)| *bits == r.to_bits()) {
        return t.clone();
    }
    let options = TemplateOptions {
        n_nodes: 200,
        ..Default::default()
    };
    let t = ShapeTemplate::build(
        &build_profile(&ShapeSpec::Sphere { radius: r }).unwrap(),
        1000.0,
        &options,
    )
    .unwrap();
    cache.push((r.to_bits(), t.clone()));
    t
}

fn material() -> MaterialParams {
    MaterialParams::new(1e8, 0.3, 1200.0)
}

fn unit_quat() -> impl Strategy<Value = Quat> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(w, x, y, z)| {
            w * w + x * x + y * y + z * z > 1e-2
        })
        .prop_map(|(w, x, y, z)| Quat::new(w, x, y, z).normalize())
}

fn unit_vec() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalize())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_is_orthonormal(q in unit_quat()) {
        let r = rotation_matrix(&q).unwrap();
        let e = r.transpose() * r - srdem::Mat3::identity();
        prop_assert!(e.abs().max() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_angle_matches_a_direct_rotation(axis in unit_vec(), angle in -6.0..6.0f64, v in unit_vec()) {
        let r = rotation_matrix(&axis_angle(axis, angle)).unwrap();
        // Rodrigues
        let direct = v * angle.cos() + axis.cross(&v) * angle.sin()
            + axis * axis.dot(&v) * (1.0 - angle.cos());
        prop_assert!((r * v - direct).norm() < 1e-12);
    }

    #[test]
    fn sdf_sign_agrees_with_containment(u in 0.0..1.0f64, w in 0.0..1.0f64) {
        let t = tablet();
        let (lo, hi) = t.sdf.extent();
        let p = Vec2::new(lo.x.max(0.0) + u * (hi.x - lo.x.max(0.0)), lo.y + w * (hi.y - lo.y));
        let sample = t.sdf.sample(p).unwrap();
        let exact = srdem::sdf2d::exact_distance(&t.profile, p);
        prop_assume!(exact.phi.abs() > 2e-3 * t.major_axis_length());
        prop_assert_eq!(sample.phi < 0.0, t.profile.contains(p));
    }

    #[test]
    fn broadphase_matches_all_pairs(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0..4usize), 2..90)
    ) {
        let mat = material();
        let particles: Vec<Particle> = raw
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z, k))| {
                let mut p = Particle::new(i, sphere([0.5e-3, 0.8e-3, 1.2e-3, 2e-3][k]), mat);
                p.position = Vec3::new(x, y, z) * 1.5e-2;
                p
            })
            .collect();
        let skin = 0.1 * particles.iter().map(|p| p.bounding_radius()).fold(f64::INFINITY, f64::min);
        let mut expected = Vec::new();
        for i in 0..particles.len() {
            for j in i + 1..particles.len() {
                let reach = particles[i].bounding_radius() + particles[j].bounding_radius() + skin;
                if (particles[i].position - particles[j].position).norm() <= reach {
                    expected.push((i, j));
                }
            }
        }
        prop_assert_eq!(broadphase_pairs(&particles), expected);
    }

    #[test]
    fn parallel_map_equals_sequential(v in prop::collection::vec(-1e3..1e3f64, 0..200)) {
        let f = |x: &f64| (x * 1.1).sin() * x.abs().sqrt();
        let a = par::map(&v, true, f);
        let b = par::map(&v, false, f);
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        let mut c = v.clone();
        let mut d = v.clone();
        par::for_each_mut(&mut c, true, |x| *x = x.mul_add(2.0, 1.0));
        par::for_each_mut(&mut d, false, |x| *x = x.mul_add(2.0, 1.0));
        prop_assert_eq!(c, d);
    }

    #[test]
    fn contacts_ignore_slave_spin_about_its_axis(
        qm in unit_quat(), qs in unit_quat(), dir in unit_vec(), gap in 0.99..1.05f64, spin in 0.0..TAU
    ) {
        let t = tablet();
        let mat = material();
        let mut master = Particle::new(0, t.clone(), mat);
        master.orientation = qm;
        let mut slave = Particle::new(1, t.clone(), mat);
        slave.orientation = qs;
        // place the slave so its support along -dir just meets the master's along dir
        let reach = master.extent(dir) + slave.extent(-dir);
        slave.position = dir * reach * gap;
        let options = NarrowPhaseOptions::default();
        let before = particle_contacts(&master, &slave, options);
        slave.orientation = qs * axis_angle(Vec3::z(), spin);
        let after = particle_contacts(&master, &slave, options);
        let tol = 1e-3 * t.major_axis_length() / 50.0;
        for r in before.iter().filter(|r| r.overlap() > tol) {
            let s = after.iter().find(|s| s.key.node == r.key.node);
            prop_assert!(s.is_some(), "node {} lost", r.key.node);
            prop_assert!((r.overlap() - s.unwrap().overlap()).abs() < tol);
        }
    }

    #[test]
    fn hertz_force_grows_with_overlap(d1 in 1e-8..1e-5f64, f in 1.01..3.0f64, r_star in 1e-4..1e-2f64) {
        let mat = material();
        let c = pair_coefficients(&mat, &mat, 1e-3, 1e-3, PairClass::ParticleParticle);
        let options = ForceOptions::default();
        let n = Vec3::z();
        let force = |d: f64| hertz_mindlin(n * d, Vec3::zeros(), &c, r_star, Vec3::zeros(), &options).normal.norm();
        let (a, b) = (force(d1), force(d1 * f));
        prop_assert!(b > a);
        prop_assert!((b / a - f.powf(1.5)).abs() < 1e-9 * f.powf(1.5));
    }

    #[test]
    fn history_update_keeps_length_and_stays_tangent(
        d in unit_vec(), v in unit_vec(), n in unit_vec(), s in 1e-9..1e-5f64, dt in 1e-8..1e-5f64
    ) {
        let out = update_tangential_history(d * s, v * 1e-2, dt, n);
        let raw = d * s - v * 1e-2 * dt;
        prop_assert!(out.dot(&n).abs() <= 1e-9 * raw.norm());
        if (raw - n * raw.dot(&n)).norm() > 1e-6 * raw.norm() {
            prop_assert!((out.norm() - raw.norm()).abs() <= 1e-9 * raw.norm());
        }
    }

    #[test]
    fn damping_ratio_is_monotonic(e1 in 0.01..1.0f64, e2 in 0.01..1.0f64) {
        let (b1, b2) = (damping_ratio(e1), damping_ratio(e2));
        prop_assert!(b1 <= 0.0 && b1 > -1.0);
        if e1 < e2 {
            prop_assert!(b1 <= b2);
        }
    }

    #[test]
    fn fill_height_ignores_vertical_shift(
        zs in prop::collection::vec((0.0..1.0f64, 0.0..TAU, 1.0..8.0f64), 2..40), shift in -0.5..0.5f64
    ) {
        let t = sphere(1e-3);
        let mat = material();
        let make = |dz: f64| -> Vec<Particle> {
            zs.iter()
                .enumerate()
                .map(|(i, &(r, a, z))| {
                    let mut p = Particle::new(i, t.clone(), mat);
                    let rho = 9e-3 * r.sqrt();
                    p.position = Vec3::new(rho * a.cos(), rho * a.sin(), z * 1e-3 + dz);
                    p
                })
                .collect()
        };
        let h0 = fill_height(&make(0.0), 1e-2, 0.0, 8).unwrap();
        let h1 = fill_height(&make(shift), 1e-2, shift, 8).unwrap();
        prop_assert!((h0.height - h1.height).abs() < 1e-12);
        prop_assert_eq!(h0.bins_used, h1.bins_used);
    }

    #[test]
    fn repose_angle_ignores_shift_and_scale(
        pts in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..50),
        dx in -5.0..5.0f64, dz in -5.0..5.0f64, k in 0.1..10.0f64
    ) {
        let base: Vec<Vec2> = pts.iter().map(|&(x, z)| Vec2::new(x, 0.5 * x + 0.3 * z)).collect();
        let moved: Vec<Vec2> = base.iter().map(|p| (p + Vec2::new(dx, dz)) * k).collect();
        match (lls_angle_of_repose(&base), lls_angle_of_repose(&moved)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-7),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "fits disagree"),
        }
    }
}
