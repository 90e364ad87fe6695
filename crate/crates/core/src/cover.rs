//! Universal-cover bookkeeping for the circle and annulus.
//!
//! Points on the cover `ℝ × [0,1]` carry an unbounded horizontal lift
//! coordinate. Every dynamical system in this crate is a [`LiftedMap`]: a map
//! on the cover that commutes with the deck translation `(x, y) ↦ (x + 1, y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverPoint {
    pub x: f64,
    pub y: f64,
}

impl CoverPoint {
    /// Checked constructor: both coordinates must be finite.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite cover point ({x}, {y})")));
        }
        Ok(CoverPoint { x, y })
    }

    /// Checked constructor for annulus points, `y ∈ [0,1]`.
    pub fn on_annulus(x: f64, y: f64) -> Result<Self> {
        let w = Self::new(x, y)?;
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidInput(format!("fiber coordinate {y} outside [0,1]")));
        }
        Ok(w)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn shifted(&self, dx: f64) -> Self {
        CoverPoint { x: self.x + dx, y: self.y }
    }

    pub fn dist_inf(&self, other: &CoverPoint) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn dist(&self, other: &CoverPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderPoint {
    pub x_mod1: f64,
    pub y: f64,
}

impl CylinderPoint {
    pub fn new(x_mod1: f64, y: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x_mod1) || !y.is_finite() {
            return Err(Error::InvalidInput(format!("invalid cylinder point ({x_mod1}, {y})")));
        }
        Ok(CylinderPoint { x_mod1, y })
    }
}

/// Whether the fiber coordinate lives in `[0,1]` or on the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpace {
    Annulus,
    Cylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianKind {
    Analytic,
    FiniteDifference,
    Unavailable,
}

/// A map on the universal cover obeying `F(x + 1, y) = F(x, y) + (1, 0)`.
///
/// Implementations must be pure: evaluation never mutates shared state, so
/// one instance can be used from many worker threads at once.
pub trait LiftedMap: Send + Sync {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint>;

    fn inverse(&self, _w: CoverPoint) -> Result<CoverPoint> {
        Err(Error::MissingInverse)
    }

    fn has_inverse(&self) -> bool {
        false
    }

    fn jacobian(&self, w: CoverPoint) -> Result<Mat2> {
        finite_difference_jacobian(self, w)
    }

    fn jacobian_kind(&self) -> JacobianKind {
        JacobianKind::FiniteDifference
    }

    fn phase_space(&self) -> PhaseSpace {
        PhaseSpace::Annulus
    }

    fn name(&self) -> String;

    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn smooth(&self) -> bool {
        true
    }
}

/// Central differences with step `1e-6 · max(1, |coordinate|)`; one-sided in
/// `y` where a central stencil would leave the annulus.
pub fn finite_difference_jacobian<M: LiftedMap + ?Sized>(m: &M, w: CoverPoint) -> Result<Mat2> {
    let hx = 1e-6 * w.x.abs().max(1.0);
    let hy = 1e-6 * w.y.abs().max(1.0);
    let fxp = m.forward(CoverPoint { x: w.x + hx, y: w.y })?;
    let fxm = m.forward(CoverPoint { x: w.x - hx, y: w.y })?;
    let dx = [(fxp.x - fxm.x) / (2.0 * hx), (fxp.y - fxm.y) / (2.0 * hx)];

    let annulus = m.phase_space() == PhaseSpace::Annulus;
    let dy = if annulus && w.y - hy < 0.0 {
        let f0 = m.forward(w)?;
        let fp = m.forward(CoverPoint { x: w.x, y: w.y + hy })?;
        [(fp.x - f0.x) / hy, (fp.y - f0.y) / hy]
    } else if annulus && w.y + hy > 1.0 {
        let f0 = m.forward(w)?;
        let fm = m.forward(CoverPoint { x: w.x, y: w.y - hy })?;
        [(f0.x - fm.x) / hy, (f0.y - fm.y) / hy]
    } else {
        let fyp = m.forward(CoverPoint { x: w.x, y: w.y + hy })?;
        let fym = m.forward(CoverPoint { x: w.x, y: w.y - hy })?;
        [(fyp.x - fym.x) / (2.0 * hy), (fyp.y - fym.y) / (2.0 * hy)]
    };
    Ok(Mat2::new(dx[0], dy[0], dx[1], dy[1]))
}

pub fn project(w: CoverPoint) -> CylinderPoint {
    let mut x = w.x.rem_euclid(1.0);
    if x >= 1.0 {
        x = 0.0;
    }
    CylinderPoint { x_mod1: x, y: w.y }
}

/// The lift of `z` whose horizontal coordinate is nearest `reference.x`;
/// a tie at distance exactly 1/2 goes to the smaller `x`.
pub fn lift_near(z: CylinderPoint, reference: CoverPoint) -> CoverPoint {
    let base = reference.x.floor();
    let mut best = base - 1.0 + z.x_mod1;
    for candidate in [base + z.x_mod1, base + 1.0 + z.x_mod1] {
        if (candidate - reference.x).abs() < (best - reference.x).abs() {
            best = candidate;
        }
    }
    CoverPoint { x: best, y: z.y }
}

fn step(m: &dyn LiftedMap, w: CoverPoint, backward: bool, index: usize) -> Result<CoverPoint> {
    let next = if backward { m.inverse(w)? } else { m.forward(w)? };
    if !next.is_finite() {
        return Err(Error::NumericalBlowup { step: index + 1 });
    }
    Ok(next)
}

/// Orbit segment `[w0, F(w0), …, F^n(w0)]`, or backwards through the inverse
/// for negative `n`.
pub fn iterate(m: &dyn LiftedMap, w0: CoverPoint, n: i64) -> Result<Vec<CoverPoint>> {
    let backward = n < 0;
    if backward && !m.has_inverse() {
        return Err(Error::MissingInverse);
    }
    let count = n.unsigned_abs() as usize;
    let mut out = Vec::with_capacity(count + 1);
    out.push(w0);
    let mut w = w0;
    for i in 0..count {
        w = step(m, w, backward, i)?;
        out.push(w);
    }
    Ok(out)
}

/// `F^n(w0)` without storing the trajectory.
pub fn advance(m: &dyn LiftedMap, w0: CoverPoint, n: i64) -> Result<CoverPoint> {
    let backward = n < 0;
    if backward && !m.has_inverse() {
        return Err(Error::MissingInverse);
    }
    let mut w = w0;
    for i in 0..n.unsigned_abs() as usize {
        w = step(m, w, backward, i)?;
    }
    Ok(w)
}

/// Largest `‖F(x+1, y) − F(x, y) − (1, 0)‖∞` over seeded random samples.
pub fn check_equivariance(m: &dyn LiftedMap, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (y_lo, y_hi) = match m.phase_space() {
        PhaseSpace::Annulus => (0.0, 1.0),
        PhaseSpace::Cylinder => (-1.0, 1.0),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = rng.gen_range(-8.0..8.0);
        let y = rng.gen_range(y_lo..=y_hi);
        let w = CoverPoint { x, y };
        let a = m.forward(w)?;
        let b = m.forward(w.shifted(1.0))?;
        let dev = (b.x - a.x - 1.0).abs().max((b.y - a.y).abs());
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// `F^q` as a map in its own right; Jacobian by the chain rule.
pub struct Iterated<'a> {
    pub map: &'a dyn LiftedMap,
    pub q: usize,
}

impl LiftedMap for Iterated<'_> {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        advance(self.map, w, self.q as i64)
    }

    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        advance(self.map, w, -(self.q as i64))
    }

    fn has_inverse(&self) -> bool {
        self.map.has_inverse()
    }

    fn jacobian(&self, w: CoverPoint) -> Result<Mat2> {
        Ok(orbit_jacobian(self.map, w, self.q)?.1)
    }

    fn jacobian_kind(&self) -> JacobianKind {
        self.map.jacobian_kind()
    }

    fn phase_space(&self) -> PhaseSpace {
        self.map.phase_space()
    }

    fn name(&self) -> String {
        format!("{}^{}", self.map.name(), self.q)
    }

    fn params(&self) -> Vec<(String, f64)> {
        self.map.params()
    }
}

/// `F^q(w)` together with `D(F^q)(w)`.
pub fn orbit_jacobian(m: &dyn LiftedMap, w: CoverPoint, q: usize) -> Result<(CoverPoint, Mat2)> {
    if m.jacobian_kind() == JacobianKind::Unavailable {
        return Err(Error::JacobianUnavailable);
    }
    let mut acc = Mat2::IDENTITY;
    let mut cur = w;
    for i in 0..q {
        let j = m.jacobian(cur)?;
        acc = j.mul(&acc);
        cur = step(m, cur, false, i)?;
    }
    Ok((cur, acc))
}

/// The lift `F + (shift, 0)`.
pub struct DeckShifted<'a> {
    pub map: &'a dyn LiftedMap,
    pub shift: i64,
}

impl LiftedMap for DeckShifted<'_> {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        Ok(self.map.forward(w)?.shifted(self.shift as f64))
    }

    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        self.map.inverse(w.shifted(-(self.shift as f64)))
    }

    fn has_inverse(&self) -> bool {
        self.map.has_inverse()
    }

    fn jacobian(&self, w: CoverPoint) -> Result<Mat2> {
        self.map.jacobian(w)
    }

    fn jacobian_kind(&self) -> JacobianKind {
        self.map.jacobian_kind()
    }

    fn phase_space(&self) -> PhaseSpace {
        self.map.phase_space()
    }

    fn name(&self) -> String {
        format!("{}{:+}", self.map.name(), self.shift)
    }

    fn params(&self) -> Vec<(String, f64)> {
        self.map.params()
    }
}

/// `F⁻¹` as a forward map. Requires `map.has_inverse()`.
pub struct Inverted<'a> {
    pub map: &'a dyn LiftedMap,
}

impl LiftedMap for Inverted<'_> {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        self.map.inverse(w)
    }

    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        self.map.forward(w)
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn jacobian(&self, w: CoverPoint) -> Result<Mat2> {
        let pre = self.map.inverse(w)?;
        self.map.jacobian(pre)?.inverse().ok_or_else(|| Error::InvalidInput("singular Jacobian while inverting".into()))
    }

    fn jacobian_kind(&self) -> JacobianKind {
        self.map.jacobian_kind()
    }

    fn phase_space(&self) -> PhaseSpace {
        self.map.phase_space()
    }

    fn name(&self) -> String {
        format!("{}^-1", self.map.name())
    }

    fn params(&self) -> Vec<(String, f64)> {
        self.map.params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{standard_map, RigidRotation, StandardMapParams};
    use proptest::prelude::*;

    fn cp(x: f64, y: f64) -> CoverPoint {
        CoverPoint::new(x, y).unwrap()
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(cp(0.0, 0.5)), CylinderPoint { x_mod1: 0.0, y: 0.5 });
        assert_eq!(project(cp(2.25, 1.0)), CylinderPoint { x_mod1: 0.25, y: 1.0 });
        let p = project(cp(-0.3, 0.0));
        assert!((p.x_mod1 - 0.7).abs() < 1e-15 && p.y == 0.0);
        // -1e-17 would round to 1.0 under a naive rem_euclid.
        assert_eq!(project(cp(-1e-17, 0.0)).x_mod1, 0.0);
    }

    #[test]
    fn lift_near_examples() {
        let z = CylinderPoint::new(0.9, 0.5).unwrap();
        let w = lift_near(z, cp(0.0, 0.5));
        assert!((w.x + 0.1).abs() < 1e-15);
        let w = lift_near(CylinderPoint::new(0.0, 0.0).unwrap(), cp(3.2, 0.0));
        assert_eq!(w, cp(3.0, 0.0));
        let w = lift_near(CylinderPoint::new(0.5, 1.0).unwrap(), cp(0.0, 1.0));
        assert_eq!(w, cp(-0.5, 1.0));
    }

    #[test]
    fn iterate_examples() {
        let rot = RigidRotation::new(0.25).unwrap();
        let traj = iterate(&rot, cp(0.0, 0.5), 4).unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(*traj.last().unwrap(), cp(1.0, 0.5));
        let sm = standard_map(StandardMapParams::new(0.0).unwrap());
        let traj = iterate(&sm, cp(0.0, 0.5), 2).unwrap();
        assert_eq!(*traj.last().unwrap(), cp(1.0, 0.5));
        assert_eq!(iterate(&sm, cp(0.3, 0.1), 0).unwrap(), vec![cp(0.3, 0.1)]);
    }

    struct NoInverse;
    impl LiftedMap for NoInverse {
        fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
            Ok(w.shifted(0.1))
        }
        fn name(&self) -> String {
            "no-inverse".into()
        }
    }

    struct Exploding;
    impl LiftedMap for Exploding {
        fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
            Ok(CoverPoint { x: w.x * 1e300, y: w.y })
        }
        fn name(&self) -> String {
            "exploding".into()
        }
    }

    #[test]
    fn iterate_errors() {
        assert_eq!(iterate(&NoInverse, cp(0.0, 0.5), -1), Err(Error::MissingInverse));
        let err = iterate(&Exploding, cp(2.0, 0.5), 5).unwrap_err();
        assert_eq!(err, Error::NumericalBlowup { step: 2 });
    }

    struct BrokenDeck;
    impl LiftedMap for BrokenDeck {
        fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
            // Uses x² where the deck rule needs x-periodic terms.
            Ok(CoverPoint { x: w.x + w.x * w.x * w.y + w.y * w.y, y: w.y })
        }
        fn name(&self) -> String {
            "broken".into()
        }
    }

    #[test]
    fn equivariance_examples() {
        let sm = standard_map(StandardMapParams::new(0.15).unwrap());
        assert!(check_equivariance(&sm, 1000, 7).unwrap() <= 1e-12);
        let rot = RigidRotation::new(0.3).unwrap();
        assert!(check_equivariance(&rot, 100, 7).unwrap() <= 1e-14);
        assert!(check_equivariance(&BrokenDeck, 1000, 7).unwrap() >= 1.0);
        assert_eq!(check_equivariance(&rot, 5, 3), check_equivariance(&rot, 5, 3));
        assert!(check_equivariance(&rot, 0, 3).is_err());
    }

    #[test]
    fn adapters() {
        let sm = standard_map(StandardMapParams::new(0.15).unwrap());
        let w = cp(0.2, 0.1);
        let f3 = Iterated { map: &sm, q: 3 };
        assert_eq!(f3.forward(w).unwrap(), advance(&sm, w, 3).unwrap());
        let shifted = DeckShifted { map: &sm, shift: 2 };
        let back = shifted.inverse(shifted.forward(w).unwrap()).unwrap();
        assert!(back.dist_inf(&w) < 1e-12);
        let inv = Inverted { map: &sm };
        let j = inv.jacobian(w).unwrap();
        assert!((j.det() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn project_after_lift_near_is_identity(
            z in 0.0f64..1.0, y in 0.0f64..=1.0, rx in -50.0f64..50.0
        ) {
            let zc = CylinderPoint::new(z, y).unwrap();
            let w = lift_near(zc, CoverPoint { x: rx, y });
            prop_assert!((w.x - rx).abs() <= 0.5 + 1e-12);
            let back = project(w);
            let d = (back.x_mod1 - z).abs();
            prop_assert!(d < 1e-12 || (1.0 - d) < 1e-12);
        }

        #[test]
        fn iterate_composes(a in -20i64..=20, b in -20i64..=20, x in -1.0f64..1.0, y in -0.5f64..0.5) {
            let sm = standard_map(StandardMapParams::new(0.05).unwrap());
            let w = CoverPoint { x, y };
            let direct = advance(&sm, w, a + b).unwrap();
            let split = advance(&sm, advance(&sm, w, a).unwrap(), b).unwrap();
            // Forward/backward legs cancel up to the map's rounding amplification.
            prop_assert!(direct.dist_inf(&split) < 1e-6);
        }
    }
}
