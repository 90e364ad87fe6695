//! `(p, q)` periodic orbits: search, classification and deduplication.

mod audit;
mod dedupe;
mod newton;
mod variational;

pub use audit::{poincare_birkhoff_audit, reduced_rationals, AuditEntry, AuditReport, AuditSettings};
pub use dedupe::{dedupe_orbits, orbits_equivalent, DEDUPE_TOL};
pub use newton::{find_periodic_newton, refine_periodic_point, NewtonDiagnostics, NewtonReport, NewtonSettings};
pub use variational::{birkhoff_orbit_billiard, chord_length, BirkhoffOrbit};

use serde::Serialize;

use crate::cover::{orbit_jacobian, CoverPoint, JacobianKind, LiftedMap};
use crate::error::{Error, Result};

/// Residual below which an orbit counts as verified.
pub const VERIFY_TOL: f64 = 1e-9;
/// Half-width of the indeterminate band around `|trace| = 2`.
pub const CLASSIFY_TOL: f64 = 1e-6;
/// Condition number of `D(F^q) − I` above which a root lies on a continuum.
pub const DEGENERACY_COND: f64 = 1e10;
/// Same threshold for finite-difference Jacobians, whose entries carry ~1e-8 error.
pub const DEGENERACY_COND_FD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Elliptic,
    Hyperbolic,
    Indeterminate,
}

pub fn classify(trace: f64) -> OrbitKind {
    if trace.abs() < 2.0 - CLASSIFY_TOL {
        OrbitKind::Elliptic
    } else if trace.abs() > 2.0 + CLASSIFY_TOL {
        OrbitKind::Hyperbolic
    } else {
        OrbitKind::Indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    /// `q` consecutive lifted images; the successor of the last is `points[0] + (p, 0)`.
    pub points: Vec<CoverPoint>,
    pub p: i64,
    pub q: usize,
    pub residual: f64,
    pub trace: f64,
    pub det: f64,
    pub kind: OrbitKind,
    /// Repetition of a lower-period orbit (only possible when gcd(p, q) > 1).
    pub iterated: bool,
    /// Part of a continuum of periodic points rather than isolated.
    pub degenerate: bool,
}

impl PeriodicOrbit {
    /// Assemble and verify the orbit through `start`.
    pub fn from_point(m: &dyn LiftedMap, start: CoverPoint, p: i64, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("period must be at least 1".into()));
        }
        let mut points = Vec::with_capacity(q);
        points.push(start);
        let mut residual: f64 = 0.0;
        let mut cur = start;
        for i in 0..q {
            let next = m.forward(cur)?;
            if !next.is_finite() {
                return Err(Error::NumericalBlowup { step: i + 1 });
            }
            if i + 1 < q {
                points.push(next);
            } else {
                residual = residual.max(next.dist_inf(&start.shifted(p as f64)));
            }
            cur = next;
        }
        let (_, jac) = orbit_jacobian(m, start, q)?;
        let trace = jac.trace();
        let cond_limit = match m.jacobian_kind() {
            JacobianKind::FiniteDifference => DEGENERACY_COND_FD,
            _ => DEGENERACY_COND,
        };
        let degenerate = jac.sub_identity().condition_number() > cond_limit;
        let iterated = is_iterated(m, start, p, q)?;
        Ok(PeriodicOrbit {
            points,
            p,
            q,
            residual,
            trace,
            det: jac.det(),
            // The trace of a continuum member is parabolic up to noise.
            kind: if degenerate { OrbitKind::Indeterminate } else { classify(trace) },
            iterated,
            degenerate,
        })
    }

    pub fn verified(&self) -> bool {
        self.residual <= VERIFY_TOL
    }

    pub fn rotation(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Same orbit relabelled from the point with the smallest fractional `x`
    /// and deck-shifted so that `points[0].x ∈ [0, 1)`.
    pub fn normalized(&self) -> Self {
        let q = self.q;
        let frac = |x: f64| x - x.floor();
        let start = (0..q).min_by(|&a, &b| frac(self.points[a].x).total_cmp(&frac(self.points[b].x))).unwrap_or(0);
        let shift = -self.points[start].x.floor();
        let points = (0..q)
            .map(|i| {
                let j = start + i;
                let base = if j < q { self.points[j] } else { self.points[j - q].shifted(self.p as f64) };
                base.shifted(shift)
            })
            .collect();
        PeriodicOrbit { points, ..self.clone() }
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_iterated(m: &dyn LiftedMap, start: CoverPoint, p: i64, q: usize) -> Result<bool> {
    let g = gcd(p, q as i64) as usize;
    if g <= 1 {
        return Ok(false);
    }
    let mut cur = start;
    for d in 1..q {
        cur = m.forward(cur)?;
        if q.is_multiple_of(d) && (p * d as i64) % q as i64 == 0 {
            let shift = (p * d as i64 / q as i64) as f64;
            if cur.dist_inf(&start.shifted(shift)) <= 1e-7 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{standard_map, StandardMapParams};

    #[test]
    fn classification_bands() {
        assert_eq!(classify(1.0575), OrbitKind::Elliptic);
        assert_eq!(classify(-1.5), OrbitKind::Elliptic);
        assert_eq!(classify(2.9425), OrbitKind::Hyperbolic);
        assert_eq!(classify(-2.5), OrbitKind::Hyperbolic);
        assert_eq!(classify(2.0 + 1e-7), OrbitKind::Indeterminate);
    }

    #[test]
    fn fixed_point_flagged_as_iterated_at_period_two() {
        let m = standard_map(StandardMapParams::new(0.15).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 2).unwrap();
        assert!(o.verified() && o.iterated);
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap();
        assert!(!o.iterated && o.kind == OrbitKind::Hyperbolic);
    }

    #[test]
    fn normalisation_rotates_and_shifts() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 3.7, y: 0.5 }, 1, 2).unwrap();
        let n = o.normalized();
        assert!((n.points[0].x - 0.2).abs() < 1e-12);
        assert!((n.points[1].x - 0.7).abs() < 1e-12);
    }
}
