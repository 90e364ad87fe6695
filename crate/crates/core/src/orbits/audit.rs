//! Empirical check that every rational in a rotation interval is realised by
//! at least two distinct periodic orbits.

use serde::Serialize;

use super::newton::find_from_seeds;
use super::variational::birkhoff_candidates;
use super::{dedupe_orbits, gcd, NewtonSettings, OrbitKind, PeriodicOrbit};
use crate::cover::{CoverPoint, LiftedMap};
use crate::error::{Error, Result};
use crate::systems::BilliardMap;

const RATIONAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSettings {
    pub newton: NewtonSettings,
    /// Variational restarts per rational (billiards only).
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub p: i64,
    pub q: usize,
    pub distinct: usize,
    pub isolated: usize,
    pub degenerate: usize,
    pub elliptic: usize,
    pub hyperbolic: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub orbits: Vec<PeriodicOrbit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub lo: f64,
    pub hi: f64,
    pub q_max: usize,
    pub entries: Vec<AuditEntry>,
    /// Rationals realised by fewer than two distinct orbits.
    pub failures: Vec<(i64, usize)>,
    pub passed: bool,
}

/// Reduced `p/q ∈ [lo, hi]` with `1 ≤ q ≤ q_max`, ordered by `q` then `p`.
pub fn reduced_rationals(lo: f64, hi: f64, q_max: usize) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        let qf = q as f64;
        let p_lo = ((lo - RATIONAL_SLACK) * qf).ceil() as i64;
        let p_hi = ((hi + RATIONAL_SLACK) * qf).floor() as i64;
        for p in p_lo..=p_hi {
            if gcd(p, q as i64) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Seeds interleaving a maximising configuration, where the minimax partner
/// orbit sits.
fn minimax_seeds(orbit: &PeriodicOrbit) -> Vec<CoverPoint> {
    let mut fracs: Vec<(f64, f64)> = orbit.points.iter().map(|w| (w.x - w.x.floor(), w.y)).collect();
    fracs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = fracs.len();
    (0..n)
        .map(|i| {
            let next = if i + 1 == n { fracs[0].0 + 1.0 } else { fracs[i + 1].0 };
            CoverPoint { x: 0.5 * (fracs[i].0 + next), y: fracs[i].1 }
        })
        .collect()
}

pub fn poincare_birkhoff_audit(
    m: &dyn LiftedMap,
    billiard: Option<&BilliardMap>,
    bounds: (f64, f64),
    q_max: usize,
    settings: &AuditSettings,
) -> Result<AuditReport> {
    let (lo, hi) = bounds;
    if q_max == 0 || !(lo <= hi) {
        return Err(Error::InvalidInput("audit needs q_max >= 1 and lo <= hi".into()));
    }
    let mut entries = Vec::new();
    for (p, q) in reduced_rationals(lo, hi, q_max) {
        let seeds = settings.newton.seeds();
        let newton = find_from_seeds(m, p, q, &seeds, settings.newton.y_lo, settings.newton.y_hi)?;
        let mut found: Vec<PeriodicOrbit> = newton.orbits.into_iter().chain(newton.degenerate).collect();

        if let Some(b) = billiard {
            if p > 0 && (p as usize) < q {
                match birkhoff_candidates(b, p, q, settings.restarts.max(1), settings.seed) {
                    Ok(cands) => {
                        if let Some(best) = cands.iter().max_by(|a, b| a.length.total_cmp(&b.length)) {
                            let extra = find_from_seeds(m, p, q, &minimax_seeds(&best.orbit), 0.0, 1.0)?;
                            found.extend(extra.orbits);
                            found.extend(extra.degenerate);
                        }
                        found.extend(cands.into_iter().map(|c| c.orbit));
                    }
                    Err(Error::AscentStalled { .. }) | Err(Error::OrderViolation) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let distinct = dedupe_orbits(&found)?;
        let count = |kind| distinct.iter().filter(|o| o.kind == kind).count();
        let entry = AuditEntry {
            p,
            q,
            distinct: distinct.len(),
            isolated: distinct.iter().filter(|o| !o.degenerate).count(),
            degenerate: distinct.iter().filter(|o| o.degenerate).count(),
            elliptic: count(OrbitKind::Elliptic),
            hyperbolic: count(OrbitKind::Hyperbolic),
            max_residual: distinct.iter().map(|o| o.residual).fold(0.0, f64::max),
            passed: distinct.len() >= 2,
            orbits: distinct,
        };
        entries.push(entry);
    }
    let failures: Vec<(i64, usize)> = entries.iter().filter(|e| !e.passed).map(|e| (e.p, e.q)).collect();
    Ok(AuditReport { lo, hi, q_max, passed: failures.is_empty(), failures, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{standard_map, StandardMapParams};

    #[test]
    fn rationals_in_unit_interval() {
        let r = reduced_rationals(0.0, 1.0, 5);
        assert_eq!(r.len(), 11);
        assert!(r.contains(&(0, 1)) && r.contains(&(1, 1)) && r.contains(&(4, 5)));
        assert!(!r.contains(&(2, 4)));
    }

    #[test]
    fn irrational_point_interval_is_vacuous() {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let a = std::f64::consts::SQRT_2 - 1.0;
        let settings = AuditSettings { newton: NewtonSettings::new(4, 4, 0.0, 1.0), restarts: 1, seed: 0 };
        let report = poincare_birkhoff_audit(&m, None, (a, a), 5, &settings).unwrap();
        assert!(report.entries.is_empty());
        assert!(report.passed);
    }
}
