use serde::Serialize;

use crate::cover::{orbit_jacobian, LiftedMap};
use crate::error::{Error, Result};
use crate::linalg::{eigenvector, real_eigenvalues};
use crate::orbits::{classify, OrbitKind, PeriodicOrbit};

/// Eigen-decomposition of `D(F^q)` at the first orbit point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenData {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub v_u: [f64; 2],
    pub v_s: [f64; 2],
    pub trace: f64,
}

impl EigenData {
    pub fn product(&self) -> f64 {
        self.lambda_u * self.lambda_s
    }
}

pub fn linearize(m: &dyn LiftedMap, orbit: &PeriodicOrbit) -> Result<EigenData> {
    let (_, jac) = orbit_jacobian(m, orbit.points[0], orbit.q)?;
    let trace = jac.trace();
    if classify(trace) != OrbitKind::Hyperbolic {
        return Err(Error::NotHyperbolic { trace });
    }
    let (big, small) = real_eigenvalues(&jac).ok_or(Error::NotHyperbolic { trace })?;
    Ok(EigenData { lambda_u: big, lambda_s: small, v_u: eigenvector(&jac, big), v_s: eigenvector(&jac, small), trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverPoint;
    use crate::linalg::Mat2;
    use crate::systems::{standard_map, StandardMapParams};
    use std::f64::consts::TAU;

    #[test]
    fn saddle_of_the_standard_map() {
        let k = 0.15;
        let m = standard_map(StandardMapParams::new(k).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap();
        let e = linearize(&m, &o).unwrap();
        // Oracle: quadratic formula on the analytic trace.
        let t: f64 = 2.0 + TAU * k;
        let root = (t * t - 4.0).sqrt();
        assert!((e.lambda_u - (t + root) / 2.0).abs() < 1e-12);
        assert!((e.lambda_s - (t - root) / 2.0).abs() < 1e-12);
        assert!((e.lambda_u - 2.5504).abs() < 1e-4 && (e.lambda_s - 0.3921).abs() < 1e-4);
        assert!((e.product() - 1.0).abs() <= 1e-10);
        let j = Mat2::new(1.0 + TAU * k, 1.0, TAU * k, 1.0);
        let jv = j.apply(e.v_u);
        assert!((jv[0] - e.lambda_u * e.v_u[0]).abs() < 1e-12);
        assert!((jv[1] - e.lambda_u * e.v_u[1]).abs() < 1e-12);
    }

    #[test]
    fn centre_is_rejected() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.5, y: 0.0 }, 0, 1).unwrap();
        assert!(matches!(linearize(&m, &o), Err(Error::NotHyperbolic { .. })));
    }
}
