use std::f64::consts::TAU;

use crate::cover::{CoverPoint, JacobianKind, LiftedMap, PhaseSpace};
use crate::error::{Error, Result};
use crate::linalg::Mat2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardMapParams {
    k: f64,
}

impl StandardMapParams {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidInput(format!("standard map needs finite k >= 0, got {k}")));
        }
        Ok(StandardMapParams { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// `(x, y) ↦ (x + y + k sin 2πx, y + k sin 2πx)` on the cylinder `𝕋¹ × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardMap {
    k: f64,
}

pub fn standard_map(params: StandardMapParams) -> StandardMap {
    StandardMap { k: params.k }
}

// sin/cos of 2πx evaluated on the fractional part so that x and x + 1 agree
// bit-for-bit whenever their fractional parts do.
fn kick_phase(x: f64) -> f64 {
    TAU * (x - x.floor())
}

impl StandardMap {
    pub fn k(&self) -> f64 {
        self.k
    }
}

impl LiftedMap for StandardMap {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        let y = w.y + self.k * kick_phase(w.x).sin();
        Ok(CoverPoint { x: w.x + y, y })
    }

    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        let x = w.x - w.y;
        Ok(CoverPoint { x, y: w.y - self.k * kick_phase(x).sin() })
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn jacobian(&self, w: CoverPoint) -> Result<Mat2> {
        let c = TAU * self.k * kick_phase(w.x).cos();
        Ok(Mat2::new(1.0 + c, 1.0, c, 1.0))
    }

    fn jacobian_kind(&self) -> JacobianKind {
        JacobianKind::Analytic
    }

    fn phase_space(&self) -> PhaseSpace {
        PhaseSpace::Cylinder
    }

    fn name(&self) -> String {
        "standard_map".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![("k".into(), self.k)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::finite_difference_jacobian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integrable_case_is_a_shear() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let w = m.forward(CoverPoint { x: 0.3, y: 0.45 }).unwrap();
        assert_eq!(w, CoverPoint { x: 0.75, y: 0.45 });
    }

    #[test]
    fn origin_is_fixed() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        assert_eq!(m.forward(CoverPoint { x: 0.0, y: 0.0 }).unwrap(), CoverPoint { x: 0.0, y: 0.0 });
    }

    #[test]
    fn rejects_bad_k() {
        assert!(StandardMapParams::new(-0.1).is_err());
        assert!(StandardMapParams::new(f64::NAN).is_err());
    }

    #[test]
    fn inverse_jacobian_and_determinant() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w = CoverPoint { x: rng.gen_range(-3.0..3.0), y: rng.gen_range(-1.0..1.0) };
            let back = m.inverse(m.forward(w).unwrap()).unwrap();
            assert!(back.dist_inf(&w) <= 1e-12);
            let exact = m.jacobian(w).unwrap();
            assert!((exact.det() - 1.0).abs() <= 1e-14);
            let fd = finite_difference_jacobian(&m, w).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((exact.0[i][j] - fd.0[i][j]).abs() <= 1e-5);
                }
            }
        }
    }
}
