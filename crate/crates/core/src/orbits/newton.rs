//! Damped Newton iteration on `G(w) = F^q(w) − w − (p, 0)` from a seed grid.

use serde::Serialize;

use super::{dedupe_orbits, PeriodicOrbit, DEGENERACY_COND, VERIFY_TOL};
use crate::cover::{orbit_jacobian, CoverPoint, JacobianKind, LiftedMap, PhaseSpace};
use crate::error::{Error, Result};
use crate::exec;

const MAX_ITERATIONS: usize = 80;
const MAX_HALVINGS: usize = 30;
const TARGET_RESIDUAL: f64 = 1e-14;
const PSEUDO_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonSettings {
    pub nx: usize,
    pub ny: usize,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl NewtonSettings {
    pub fn new(nx: usize, ny: usize, y_lo: f64, y_hi: f64) -> Self {
        NewtonSettings { nx, ny, y_lo, y_hi }
    }

    pub fn seeds(&self) -> Vec<CoverPoint> {
        let hy = (self.y_hi - self.y_lo) / self.ny as f64;
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(CoverPoint { x: (i as f64 + 0.5) / self.nx as f64, y: self.y_lo + (j as f64 + 0.5) * hy });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NewtonDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    /// Newton steps taken through the pseudo-inverse of a singular matrix.
    pub singular_steps: usize,
    /// Converged roots whose `D(F^q) − I` is numerically singular.
    pub degenerate_roots: usize,
    pub outside_domain: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonReport {
    /// Isolated verified orbits, deduplicated.
    pub orbits: Vec<PeriodicOrbit>,
    /// Verified orbits lying on a continuum of periodic points, deduplicated.
    pub degenerate: Vec<PeriodicOrbit>,
    pub diagnostics: NewtonDiagnostics,
}

impl NewtonReport {
    /// Whether any seed hit a degenerate continuum.
    pub fn degeneracy_flagged(&self) -> bool {
        self.diagnostics.degenerate_roots > 0
    }
}

enum SeedOutcome {
    Root(CoverPoint, usize),
    Outside(usize),
    Failed(usize),
}

fn residual(m: &dyn LiftedMap, w: CoverPoint, p: i64, q: usize) -> Result<([f64; 2], f64)> {
    let img = crate::cover::advance(m, w, q as i64)?;
    let g = [img.x - w.x - p as f64, img.y - w.y];
    Ok((g, g[0].abs().max(g[1].abs())))
}

/// Newton from one seed; returns the root (if any) and the number of
/// pseudo-inverse steps taken.
pub(crate) fn newton_from(m: &dyn LiftedMap, seed: CoverPoint, p: i64, q: usize) -> (Option<CoverPoint>, usize) {
    let annulus = m.phase_space() == PhaseSpace::Annulus;
    let clamp = |w: CoverPoint| if annulus { CoverPoint { x: w.x, y: w.y.clamp(0.0, 1.0) } } else { w };
    let mut w = clamp(seed);
    let mut singular = 0;
    let Ok((mut g, mut norm)) = residual(m, w, p, q) else {
        return (None, 0);
    };
    for _ in 0..MAX_ITERATIONS {
        if norm <= TARGET_RESIDUAL {
            break;
        }
        let Ok((_, jac)) = orbit_jacobian(m, w, q) else {
            return (None, singular);
        };
        let a = jac.sub_identity();
        let rhs = [-g[0], -g[1]];
        let step = if a.condition_number() > DEGENERACY_COND {
            singular += 1;
            a.pseudo_solve(rhs, PSEUDO_RCOND)
        } else {
            match a.inverse() {
                Some(inv) => inv.apply(rhs),
                None => {
                    singular += 1;
                    a.pseudo_solve(rhs, PSEUDO_RCOND)
                }
            }
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = clamp(CoverPoint { x: w.x + lambda * step[0], y: w.y + lambda * step[1] });
            if let Ok((gt, nt)) = residual(m, trial, p, q) {
                if nt < norm {
                    w = trial;
                    g = gt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= VERIFY_TOL {
        (Some(w), singular)
    } else {
        (None, singular)
    }
}

/// Newton from a single seed, returning the verified orbit through the root.
pub fn refine_periodic_point(m: &dyn LiftedMap, seed: CoverPoint, p: i64, q: usize) -> Result<PeriodicOrbit> {
    if q == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    match newton_from(m, seed, p, q) {
        (Some(w), _) => PeriodicOrbit::from_point(m, w, p, q),
        (None, _) => {
            let (_, r) = residual(m, seed, p, q)?;
            Err(Error::NewtonFailed { residual: r })
        }
    }
}

/// Search for `(p, q)` orbits from every node of the seed grid.
pub fn find_periodic_newton(m: &dyn LiftedMap, p: i64, q: usize, settings: &NewtonSettings) -> Result<NewtonReport> {
    if q == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    if settings.nx == 0 || settings.ny == 0 || !(settings.y_hi > settings.y_lo) {
        return Err(Error::InvalidInput("empty Newton seed grid".into()));
    }
    if m.jacobian_kind() == JacobianKind::Unavailable {
        return Err(Error::JacobianUnavailable);
    }
    let seeds = settings.seeds();
    find_from_seeds(m, p, q, &seeds, settings.y_lo, settings.y_hi)
}

pub(crate) fn find_from_seeds(
    m: &dyn LiftedMap,
    p: i64,
    q: usize,
    seeds: &[CoverPoint],
    y_lo: f64,
    y_hi: f64,
) -> Result<NewtonReport> {
    let outcomes = exec::map_collect(seeds, |&seed| {
        let (root, singular) = newton_from(m, seed, p, q);
        match root {
            Some(w) if w.y >= y_lo && w.y <= y_hi => SeedOutcome::Root(w, singular),
            Some(_) => SeedOutcome::Outside(singular),
            None => SeedOutcome::Failed(singular),
        }
    });

    let mut diagnostics = NewtonDiagnostics { seeds: seeds.len(), ..Default::default() };
    let mut roots = Vec::new();
    for outcome in outcomes {
        match outcome {
            SeedOutcome::Root(w, s) => {
                diagnostics.converged += 1;
                diagnostics.singular_steps += s;
                roots.push(w);
            }
            SeedOutcome::Outside(s) => {
                diagnostics.outside_domain += 1;
                diagnostics.singular_steps += s;
            }
            SeedOutcome::Failed(s) => {
                diagnostics.failed += 1;
                diagnostics.singular_steps += s;
            }
        }
    }

    let built = exec::map_collect(&roots, |&w| PeriodicOrbit::from_point(m, w, p, q));
    let mut isolated = Vec::new();
    let mut degenerate = Vec::new();
    for orbit in built {
        let orbit = orbit?;
        if !orbit.verified() {
            continue;
        }
        if orbit.degenerate {
            diagnostics.degenerate_roots += 1;
            degenerate.push(orbit);
        } else {
            isolated.push(orbit);
        }
    }
    Ok(NewtonReport { orbits: dedupe_orbits(&isolated)?, degenerate: dedupe_orbits(&degenerate)?, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::OrbitKind;
    use crate::systems::{billiard_map, shipped_tables, standard_map, RigidRotation, StandardMapParams};
    use std::f64::consts::TAU;

    #[test]
    fn standard_map_fixed_points() {
        let k = 0.15;
        let m = standard_map(StandardMapParams::new(k).unwrap());
        let report = find_periodic_newton(&m, 0, 1, &NewtonSettings::new(64, 64, -0.5, 0.5)).unwrap();
        assert_eq!(report.orbits.len(), 2);
        let saddle = &report.orbits[0];
        let centre = &report.orbits[1];
        assert!(saddle.points[0].x.abs() < 1e-12 && saddle.points[0].y.abs() < 1e-12);
        assert!((centre.points[0].x - 0.5).abs() < 1e-12 && centre.points[0].y.abs() < 1e-12);
        assert_eq!(saddle.kind, OrbitKind::Hyperbolic);
        assert_eq!(centre.kind, OrbitKind::Elliptic);
        assert!((saddle.trace - (2.0 + TAU * k)).abs() < 1e-8);
        assert!((centre.trace - (2.0 - TAU * k)).abs() < 1e-8);
    }

    #[test]
    fn single_seed_refinement() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        let o = refine_periodic_point(&m, CoverPoint { x: 0.02, y: -0.01 }, 0, 1).unwrap();
        assert!(o.verified() && o.points[0].x.abs() < 1e-12);
        let rot = RigidRotation::new(0.3).unwrap();
        assert!(matches!(
            refine_periodic_point(&rot, CoverPoint { x: 0.0, y: 0.5 }, 0, 1),
            Err(Error::NewtonFailed { .. })
        ));
    }

    #[test]
    fn rigid_rotation_is_a_continuum() {
        let rot = RigidRotation::new(1.0 / 3.0).unwrap();
        let report = find_periodic_newton(&rot, 1, 3, &NewtonSettings::new(4, 4, 0.0, 1.0)).unwrap();
        assert!(report.orbits.is_empty());
        assert!(report.degeneracy_flagged());
    }

    #[test]
    fn integrable_standard_map_circle_is_degenerate() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let report = find_periodic_newton(&m, 1, 3, &NewtonSettings::new(8, 8, 0.0, 1.0)).unwrap();
        assert!(report.orbits.is_empty());
        assert!(report.degeneracy_flagged());
        assert!(report.diagnostics.singular_steps > 0);
        for o in &report.degenerate {
            assert!((o.points[0].y - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_billiard_diameters() {
        let m = billiard_map(shipped_tables().remove(0).1);
        let report = find_periodic_newton(&m, 1, 2, &NewtonSettings::new(32, 16, 0.0, 1.0)).unwrap();
        assert!(!report.degenerate.is_empty());
        for o in report.degenerate.iter().chain(&report.orbits) {
            assert!(o.residual <= 1e-9);
            for w in &o.points {
                assert!((w.y - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bad_inputs() {
        let m = standard_map(StandardMapParams::new(0.1).unwrap());
        assert!(find_periodic_newton(&m, 0, 0, &NewtonSettings::new(4, 4, 0.0, 1.0)).is_err());
        assert!(find_periodic_newton(&m, 0, 1, &NewtonSettings::new(0, 4, 0.0, 1.0)).is_err());
    }
}
