use super::PeriodicOrbit;
use crate::error::{Error, Result};

pub const DEDUPE_TOL: f64 = 1e-7;

/// True when some cyclic relabelling plus an integer deck translation maps
/// `a` onto `b` pointwise within `tol`.
pub fn orbits_equivalent(a: &PeriodicOrbit, b: &PeriodicOrbit, tol: f64) -> bool {
    if a.p != b.p || a.q != b.q || a.points.len() != b.points.len() {
        return false;
    }
    let q = a.q;
    let at = |k: usize| {
        if k < q {
            a.points[k]
        } else {
            a.points[k - q].shifted(a.p as f64)
        }
    };
    (0..q).any(|k| {
        let deck = (b.points[0].x - at(k).x).round();
        (0..q).all(|i| at(k + i).shifted(deck).dist_inf(&b.points[i]) <= tol)
    })
}

/// One normalised representative per equivalence class, sorted by the
/// first point.
pub fn dedupe_orbits(orbits: &[PeriodicOrbit]) -> Result<Vec<PeriodicOrbit>> {
    if let Some(first) = orbits.first() {
        if orbits.iter().any(|o| o.p != first.p || o.q != first.q) {
            return Err(Error::InvalidInput("dedupe requires a common (p, q)".into()));
        }
    }
    let mut classes: Vec<PeriodicOrbit> = Vec::new();
    for orbit in orbits {
        let norm = orbit.normalized();
        match classes.iter_mut().find(|c| orbits_equivalent(c, &norm, DEDUPE_TOL)) {
            Some(rep) => {
                if norm.points[0].x < rep.points[0].x {
                    *rep = norm;
                }
            }
            None => classes.push(norm),
        }
    }
    classes.sort_by(|a, b| a.points[0].x.total_cmp(&b.points[0].x).then(a.points[0].y.total_cmp(&b.points[0].y)));
    Ok(classes)
}
