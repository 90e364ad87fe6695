//! Translation and rotation numbers on the cover.

use serde::Serialize;

use crate::cover::{CoverPoint, CylinderPoint, LiftedMap};
use crate::error::{Error, Result};
use crate::exec;

/// Finite-`n` estimate of `τ(w, F) = lim (p₁(Fⁿ(w)) − p₁(w)) / n`.
///
/// `error_bound` is the spread of the running estimate over the final tenth
/// of the orbit: a Cauchy-style heuristic, not a rigorous bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub value: f64,
    pub iterations: usize,
    pub error_bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub point: CoverPoint,
    pub estimate: RotationEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_witness: Witness,
    pub hi_witness: Witness,
    pub converged: usize,
    pub not_converged: usize,
    pub failed: usize,
}

impl RotationInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// Horizontal positions along an orbit, kept as an integer deck count plus
/// a fractional representative so rounding never scales with `|x|`.
struct DeckOrbit<'a> {
    map: &'a dyn LiftedMap,
    turns: f64,
    rep: CoverPoint,
    start: f64,
    step: usize,
}

impl<'a> DeckOrbit<'a> {
    fn new(map: &'a dyn LiftedMap, w: CoverPoint) -> Self {
        let turns = w.x.floor();
        let rep = CoverPoint { x: w.x - turns, y: w.y };
        DeckOrbit { map, turns, rep, start: rep.x, step: 0 }
    }

    /// Advance one step and return the horizontal displacement from the start.
    fn advance(&mut self) -> Result<f64> {
        let next = self.map.forward(self.rep)?;
        self.step += 1;
        if !next.is_finite() {
            return Err(Error::NumericalBlowup { step: self.step });
        }
        let shift = next.x.floor();
        self.turns += shift;
        self.rep = CoverPoint { x: next.x - shift, y: next.y };
        Ok(self.turns + (self.rep.x - self.start))
    }
}

pub fn translation_number(m: &dyn LiftedMap, w: CoverPoint, n: usize, tol: f64) -> Result<RotationEstimate> {
    if n < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 iterations, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let tail = n.div_ceil(10);
    let mut orbit = DeckOrbit::new(m, w);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut value = 0.0;
    for j in 1..=n {
        let disp = orbit.advance()?;
        if j > n - tail {
            let est = disp / j as f64;
            lo = lo.min(est);
            hi = hi.max(est);
            value = est;
        }
    }
    let spread = hi - lo;
    Ok(RotationEstimate { value, iterations: n, error_bound: spread, converged: spread <= tol })
}

/// `τ mod 1`, defined only for converged estimates.
pub fn rotation_number(est: &RotationEstimate) -> Result<f64> {
    if !est.converged {
        return Err(Error::NotConverged { spread: est.error_bound });
    }
    let r = est.value.rem_euclid(1.0);
    Ok(if r >= 1.0 { 0.0 } else { r })
}

/// `φ(z) = p₁(F(w) − w)` for the lift `w` of `z` in `[0, 1) × I`.
pub fn displacement(m: &dyn LiftedMap, z: CylinderPoint) -> Result<f64> {
    let w = CoverPoint { x: z.x_mod1, y: z.y };
    Ok(m.forward(w)?.x - w.x)
}

/// Uniform midpoint-rule grid over `[0, 1) × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub nx: usize,
    pub ny: usize,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl QuadratureGrid {
    pub fn annulus(nx: usize, ny: usize) -> Self {
        QuadratureGrid { nx, ny, y_lo: 0.0, y_hi: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 16 || self.ny < 16 {
            return Err(Error::InvalidInput("quadrature needs at least 16 nodes per axis".into()));
        }
        if !(self.y_hi > self.y_lo) || !self.y_lo.is_finite() || !self.y_hi.is_finite() {
            return Err(Error::InvalidInput("empty quadrature y-range".into()));
        }
        Ok(())
    }

    fn nodes(&self) -> Vec<CylinderPoint> {
        let hy = (self.y_hi - self.y_lo) / self.ny as f64;
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = self.y_lo + (j as f64 + 0.5) * hy;
            for i in 0..self.nx {
                out.push(CylinderPoint { x_mod1: (i as f64 + 0.5) / self.nx as f64, y });
            }
        }
        out
    }

    fn cell_area(&self) -> f64 {
        (self.y_hi - self.y_lo) / (self.nx * self.ny) as f64
    }

    /// Mass of `density` under this quadrature, for normalising smooth
    /// densities to the discrete rule.
    pub fn mass<D: Fn(CylinderPoint) -> f64>(&self, density: D) -> f64 {
        self.nodes().into_iter().map(density).sum::<f64>() * self.cell_area()
    }
}

const DENSITY_MASS_TOL: f64 = 1e-6;

/// `τ_μ(F) = ∫ φ dμ` for the measure with the given density.
pub fn mean_translation<D>(m: &dyn LiftedMap, grid: QuadratureGrid, density: D) -> Result<f64>
where
    D: Fn(CylinderPoint) -> f64 + Sync + Send,
{
    grid.validate()?;
    let nodes = grid.nodes();
    let area = grid.cell_area();
    let weights: Vec<f64> = nodes.iter().map(|&z| density(z)).collect();
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::NotAProbabilityDensity { mass: f64::NAN });
    }
    let mass: f64 = weights.iter().sum::<f64>() * area;
    if (mass - 1.0).abs() > DENSITY_MASS_TOL {
        return Err(Error::NotAProbabilityDensity { mass });
    }
    let phis = exec::map_collect(&nodes, |&z| displacement(m, z));
    let mut acc = 0.0;
    for (phi, w) in phis.into_iter().zip(weights) {
        acc += phi? * w;
    }
    Ok(acc * area)
}

/// Range of converged translation numbers over `seeds`.
pub fn rotation_interval(m: &dyn LiftedMap, seeds: &[CoverPoint], n: usize, tol: f64) -> Result<RotationInterval> {
    if seeds.len() < 2 {
        return Err(Error::InvalidInput("rotation interval needs at least two seeds".into()));
    }
    let estimates = exec::map_collect(seeds, |&w| translation_number(m, w, n, tol));
    interval_from_estimates(seeds, estimates)
}

pub(crate) fn interval_from_estimates(
    seeds: &[CoverPoint],
    estimates: Vec<Result<RotationEstimate>>,
) -> Result<RotationInterval> {
    let mut lo: Option<Witness> = None;
    let mut hi: Option<Witness> = None;
    let (mut converged, mut not_converged, mut failed) = (0, 0, 0);
    for (point, est) in seeds.iter().zip(estimates) {
        match est {
            Err(Error::InvalidInput(msg)) => return Err(Error::InvalidInput(msg)),
            Err(_) => failed += 1,
            Ok(e) if !e.converged => not_converged += 1,
            Ok(estimate) => {
                converged += 1;
                let w = Witness { point: *point, estimate };
                if lo.is_none_or(|l| estimate.value < l.estimate.value) {
                    lo = Some(w);
                }
                if hi.is_none_or(|h| estimate.value > h.estimate.value) {
                    hi = Some(w);
                }
            }
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => Ok(RotationInterval {
            lo: l.estimate.value,
            hi: h.estimate.value,
            lo_witness: l,
            hi_witness: h,
            converged,
            not_converged,
            failed,
        }),
        _ => Err(Error::NoConvergedSeeds { attempted: seeds.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{DeckShifted, Iterated};
    use crate::systems::{billiard_map, shipped_tables, standard_map, RigidRotation, StandardMapParams};

    fn cp(x: f64, y: f64) -> CoverPoint {
        CoverPoint { x, y }
    }

    #[test]
    fn rigid_rotation_exact() {
        let rot = RigidRotation::new(0.375).unwrap();
        let est = translation_number(&rot, cp(0.3, 0.2), 1000, 1e-12).unwrap();
        assert!((est.value - 0.375).abs() < 1e-14);
        assert!(est.converged);
    }

    #[test]
    fn integrable_standard_map() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let est = translation_number(&m, cp(0.1, 0.3), 100_000, 1e-9).unwrap();
        assert!((est.value - 0.3).abs() <= 1e-5);
        assert!(est.converged);
    }

    #[test]
    fn billiard_boundary_circles() {
        let circle = billiard_map(shipped_tables().remove(0).1);
        let bottom = translation_number(&circle, cp(0.2, 0.0), 100, 1e-12).unwrap();
        let top = translation_number(&circle, cp(0.2, 1.0), 100, 1e-12).unwrap();
        assert_eq!(bottom.value, 0.0);
        assert_eq!(top.value, 1.0);
    }

    #[test]
    fn precondition_errors() {
        let rot = RigidRotation::new(0.1).unwrap();
        assert!(translation_number(&rot, cp(0.0, 0.0), 9, 1e-3).is_err());
        assert!(translation_number(&rot, cp(0.0, 0.0), 100, 0.0).is_err());
    }

    #[test]
    fn rotation_number_reduces_mod_one() {
        let mk = |value| RotationEstimate { value, iterations: 10, error_bound: 0.0, converged: true };
        assert!((rotation_number(&mk(1.2)).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(rotation_number(&mk(-0.25)).unwrap(), 0.75);
        assert_eq!(rotation_number(&mk(0.375)).unwrap(), 0.375);
        let bad = RotationEstimate { converged: false, error_bound: 0.5, ..mk(0.1) };
        assert_eq!(rotation_number(&bad), Err(Error::NotConverged { spread: 0.5 }));
    }

    #[test]
    fn displacement_examples() {
        let rot = RigidRotation::new(0.3).unwrap();
        assert!((displacement(&rot, CylinderPoint::new(0.7, 0.2).unwrap()).unwrap() - 0.3).abs() < 1e-15);
        let flat = standard_map(StandardMapParams::new(0.0).unwrap());
        assert_eq!(displacement(&flat, CylinderPoint::new(0.4, 0.25).unwrap()).unwrap(), 0.25);
        let kicked = standard_map(StandardMapParams::new(0.15).unwrap());
        let phi = displacement(&kicked, CylinderPoint::new(0.25, 0.0).unwrap()).unwrap();
        assert!((phi - 0.15).abs() < 1e-15);
    }

    #[test]
    fn mean_translation_examples() {
        let rot = RigidRotation::new(0.3).unwrap();
        let grid = QuadratureGrid::annulus(16, 16);
        assert!((mean_translation(&rot, grid, |_| 1.0).unwrap() - 0.3).abs() < 1e-12);
        let flat = standard_map(StandardMapParams::new(0.0).unwrap());
        let tau = mean_translation(&flat, QuadratureGrid::annulus(32, 64), |_| 1.0).unwrap();
        assert!((tau - 0.5).abs() < 1e-12);
        let err = mean_translation(&rot, grid, |_| 2.0).unwrap_err();
        assert!(matches!(err, Error::NotAProbabilityDensity { .. }));
        assert!(mean_translation(&rot, QuadratureGrid::annulus(8, 16), |_| 1.0).is_err());
    }

    #[test]
    fn mean_translation_independent_of_invariant_density() {
        // Any density in y alone is invariant for a rigid rotation.
        let rot = RigidRotation::new(0.41).unwrap();
        let grid = QuadratureGrid::annulus(32, 32);
        let a = mean_translation(&rot, grid, |_| 1.0).unwrap();
        let b = mean_translation(&rot, grid, |z| 2.0 * z.y).unwrap();
        assert!((a - b).abs() <= 1e-4);
    }

    #[test]
    fn interval_examples() {
        let rot = RigidRotation::new(0.2).unwrap();
        let seeds = [cp(0.0, 0.1), cp(0.5, 0.9)];
        let iv = rotation_interval(&rot, &seeds, 200, 1e-9).unwrap();
        assert!((iv.lo - 0.2).abs() < 1e-12 && (iv.hi - 0.2).abs() < 1e-12);

        let flat = standard_map(StandardMapParams::new(0.0).unwrap());
        let seeds = [cp(0.1, 0.2), cp(0.3, 0.7)];
        let iv = rotation_interval(&flat, &seeds, 1000, 1e-6).unwrap();
        assert!((iv.lo - 0.2).abs() < 1e-6 && (iv.hi - 0.7).abs() < 1e-6);
        assert_eq!(iv.lo_witness.point, seeds[0]);

        let circle = billiard_map(shipped_tables().remove(0).1);
        let seeds = [cp(0.1, 0.0), cp(0.4, 1.0), cp(0.2, 0.5)];
        let iv = rotation_interval(&circle, &seeds, 100, 1e-9).unwrap();
        assert_eq!((iv.lo, iv.hi), (0.0, 1.0));

        assert!(rotation_interval(&rot, &seeds[..1], 100, 1e-9).is_err());
    }

    #[test]
    fn no_converged_seeds() {
        // Diffusing chaotic orbits at large k do not settle at this tolerance.
        let m = standard_map(StandardMapParams::new(0.5).unwrap());
        let seeds = [cp(0.1, 0.13), cp(0.37, 0.21)];
        let err = rotation_interval(&m, &seeds, 100, 1e-12).unwrap_err();
        assert_eq!(err, Error::NoConvergedSeeds { attempted: 2 });
    }

    #[test]
    fn power_and_deck_laws() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let w = cp(0.2, 0.31);
        let base = translation_number(&m, w, 2000, 1e-6).unwrap();
        for q in [2, 3, 5] {
            let it = Iterated { map: &m, q };
            let est = translation_number(&it, w, 2000, 1e-6).unwrap();
            assert!((est.value - q as f64 * base.value).abs() <= est.error_bound + q as f64 * base.error_bound + 1e-12);
        }
        let shifted = DeckShifted { map: &m, shift: 1 };
        let est = translation_number(&shifted, w, 2000, 1e-6).unwrap();
        assert!((est.value - base.value - 1.0).abs() < 1e-12);
    }
}
