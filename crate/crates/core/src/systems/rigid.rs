use crate::cover::{CoverPoint, JacobianKind, LiftedMap};
use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// `(x, y) ↦ (x + α, y)`: the circle rotation, with a trivial fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation {
    alpha: f64,
}

impl RigidRotation {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("rotation angle {alpha} is not finite")));
        }
        Ok(RigidRotation { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl LiftedMap for RigidRotation {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        Ok(w.shifted(self.alpha))
    }

    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        Ok(w.shifted(-self.alpha))
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn jacobian(&self, _w: CoverPoint) -> Result<Mat2> {
        Ok(Mat2::IDENTITY)
    }

    fn jacobian_kind(&self) -> JacobianKind {
        JacobianKind::Analytic
    }

    fn name(&self) -> String {
        "rigid_rotation".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![("alpha".into(), self.alpha)]
    }
}
