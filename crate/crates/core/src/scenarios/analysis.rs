//! Bed measurements: fill height, free-surface profile, angle of repose.

use crate::body::Particle;
use crate::{Error, Result, Vec2, Vec3};

/// Default number of equal-area radial bins for [`fill_height`].
pub const FILL_HEIGHT_BINS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FillHeight {
    /// Mean of the per-bin top heights above the floor.
    pub height: f64,
    /// Highest particle top, outlier included.
    pub raw_max: f64,
    pub bins_used: usize,
}

/// Height of a settled bed in a vertical cylinder of the given radius centred
/// on the z axis. Particles are binned by the radial position of their centre
/// into equal-area annuli; each bin contributes its highest particle top. The
/// single highest particle is left out when there is more than one.
pub fn fill_height(
    particles: &[Particle],
    radius: f64,
    floor_z: f64,
    n_bins: usize,
) -> Result<FillHeight> {
    if particles.is_empty() || n_bins == 0 {
        return Err(Error::EmptyBed);
    }
    let tops: Vec<(f64, f64)> = particles
        .iter()
        .map(|p| {
            (
                p.position.xy().norm_squared(),
                p.extent(Vec3::z()) - floor_z,
            )
        })
        .collect();
    let raw_max = tops.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let skip = if tops.len() > 1 {
        tops.iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
    } else {
        None
    };
    let mut bins = vec![f64::NEG_INFINITY; n_bins];
    for (i, &(r2, top)) in tops.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let b = ((r2 / (radius * radius) * n_bins as f64) as usize).min(n_bins - 1);
        bins[b] = bins[b].max(top);
    }
    let used: Vec<f64> = bins.into_iter().filter(|b| b.is_finite()).collect();
    Ok(FillHeight {
        height: used.iter().sum::<f64>() / used.len() as f64,
        raw_max,
        bins_used: used.len(),
    })
}

/// Free surface of a drum with horizontal axis along y, seen along the axis:
/// the highest surface node in each of `n_bins` equal columns across the
/// drum, as `((x − c_x)/R, (z − c_z)/R)`. Empty columns are skipped.
pub fn free_surface_profile(
    particles: &[Particle],
    center: Vec3,
    radius: f64,
    n_bins: usize,
) -> Vec<Vec2> {
    let width = 2.0 * radius / n_bins as f64;
    let mut top = vec![f64::NEG_INFINITY; n_bins];
    for p in particles {
        let r = p.rotation();
        for n in &p.template.nodes.nodes {
            let w = r * n + p.position - center;
            let b = ((w.x + radius) / width).floor();
            if b < 0.0 || b >= n_bins as f64 {
                continue;
            }
            let b = b as usize;
            top[b] = top[b].max(w.z);
        }
    }
    top.iter()
        .enumerate()
        .filter(|(_, z)| z.is_finite())
        .map(|(b, z)| Vec2::new((-radius + (b as f64 + 0.5) * width) / radius, z / radius))
        .collect()
}

/// Angle in degrees of the least-squares line through `points`.
pub fn lls_angle_of_repose(points: &[Vec2]) -> Result<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::VerticalFit);
    }
    let mean = points.iter().sum::<Vec2>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in points {
        let d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
    }
    if sxx <= 1e-300 {
        return Err(Error::VerticalFit);
    }
    Ok((sxy / sxx).abs().atan().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lls_lines() {
        let diag: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, i as f64)).collect();
        assert!((lls_angle_of_repose(&diag).unwrap() - 45.0).abs() < 1e-12);
        let flat: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, 2.0)).collect();
        assert_eq!(lls_angle_of_repose(&flat).unwrap(), 0.0);
        let vertical: Vec<Vec2> = (0..10).map(|i| Vec2::new(1.0, i as f64)).collect();
        assert!(matches!(
            lls_angle_of_repose(&vertical),
            Err(Error::VerticalFit)
        ));
    }
}
