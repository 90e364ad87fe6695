use super::grow::ManifoldArc;
use crate::cover::{CoverPoint, LiftedMap};
use crate::error::{Error, Result};
use crate::rotation::{rotation_interval, RotationInterval};

/// Polyline vertices closest to `count` arclength-uniform positions.
pub fn arclength_samples(arc: &ManifoldArc, count: usize) -> Vec<CoverPoint> {
    let cum = arc.cumulative_arclength();
    let total = *cum.last().unwrap_or(&0.0);
    (0..count)
        .map(|k| {
            let target = if count > 1 { total * k as f64 / (count - 1) as f64 } else { 0.0 };
            let idx = cum.partition_point(|&c| c < target).min(cum.len() - 1);
            let idx = if idx > 0 && target - cum[idx - 1] < cum[idx] - target { idx - 1 } else { idx };
            arc.polyline[idx]
        })
        .collect()
}

/// Translation numbers of points spread along an arc.
pub fn lambda_rotation_interval(
    m: &dyn LiftedMap,
    arc: &ManifoldArc,
    sample_count: usize,
    n: usize,
    tol: f64,
) -> Result<RotationInterval> {
    if sample_count < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    if arc.polyline.is_empty() {
        return Err(Error::InvalidInput("arc has no points".into()));
    }
    rotation_interval(m, &arclength_samples(arc, sample_count), n, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Stability;
    use crate::orbits::PeriodicOrbit;
    use crate::systems::{standard_map, StandardMapParams};

    #[test]
    fn arc_on_a_fixed_point() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        let p = CoverPoint { x: 0.0, y: 0.0 };
        let o = PeriodicOrbit::from_point(&m, p, 0, 1).unwrap();
        let arc = ManifoldArc::from_polyline(o, Stability::Unstable, vec![p, p]);
        let iv = lambda_rotation_interval(&m, &arc, 2, 1000, 1e-9).unwrap();
        assert_eq!((iv.lo, iv.hi), (0.0, 0.0));
    }

    #[test]
    fn samples_are_spread_by_arclength() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap();
        let pts = (0..=100).map(|i| CoverPoint { x: (i as f64 / 100.0).powi(2), y: 0.0 }).collect();
        let arc = ManifoldArc::from_polyline(o, Stability::Unstable, pts);
        let s = arclength_samples(&arc, 5);
        for (k, w) in s.iter().enumerate() {
            assert!((w.x - k as f64 / 4.0).abs() < 0.02);
        }
    }
}
