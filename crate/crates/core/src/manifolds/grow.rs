//! Growth of one branch of a stable or unstable manifold by iterating a
//! fundamental domain.
//!
//! Points are addressed by a parameter `u = n + σ`, `σ ∈ [0, 1)`: the point
//! is `F^{n·steps}(anchor + δ₀ λ^σ v)`. New points are only ever produced by
//! evaluating this parametrisation, never by interpolating the polyline.

use serde::Serialize;

use super::linearize::linearize;
use crate::cover::{CoverPoint, LiftedMap};
use crate::error::{Error, Result};
use crate::exec;
use crate::orbits::PeriodicOrbit;

/// Largest turning angle (radians) between consecutive segments.
pub const TURN_LIMIT: f64 = 0.2;
const PRIMARY_OFFSET: f64 = 1e-7;
const MIN_PARAM_GAP: f64 = 1e-12;
/// Turn-driven splits stop below this fraction of the gap tolerance.
const MIN_SEGMENT_FRACTION: f64 = 1e-4;
const MAX_DOMAINS: usize = 400;
const MAX_POINTS: usize = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Parametrisation of a manifold branch by its first fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcGenerator {
    pub anchor: CoverPoint,
    pub direction: [f64; 2],
    pub delta0: f64,
    /// Expansion per domain (|λ| or λ² for a flip saddle).
    pub factor: f64,
    /// Map applications per domain.
    pub steps: usize,
    /// Iterate with the inverse (stable manifolds).
    pub backward: bool,
}

impl ArcGenerator {
    pub fn advance(&self, m: &dyn LiftedMap, w: CoverPoint, count: usize) -> Result<CoverPoint> {
        let mut cur = w;
        for i in 0..count {
            cur = if self.backward { m.inverse(cur)? } else { m.forward(cur)? };
            if !cur.is_finite() {
                return Err(Error::NumericalBlowup { step: i + 1 });
            }
        }
        Ok(cur)
    }

    pub fn point_at(&self, m: &dyn LiftedMap, u: f64) -> Result<CoverPoint> {
        let n = u.floor();
        let t = self.delta0 * self.factor.powf(u - n);
        let seed = CoverPoint { x: self.anchor.x + t * self.direction[0], y: self.anchor.y + t * self.direction[1] };
        self.advance(m, seed, n as usize * self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldArc {
    pub anchor: PeriodicOrbit,
    pub stability: Stability,
    pub branch: Branch,
    pub polyline: Vec<CoverPoint>,
    /// Generator parameter of each polyline point (empty for hand-built arcs).
    pub params: Vec<f64>,
    pub arclength: f64,
    pub refinement_tol: f64,
    pub generator: Option<ArcGenerator>,
    /// Segments left violating the gap/turn bounds at the parameter floor.
    pub unresolved: usize,
    pub budget_reached: bool,
}

impl ManifoldArc {
    /// An arc from explicit points, without a generator.
    pub fn from_polyline(anchor: PeriodicOrbit, stability: Stability, polyline: Vec<CoverPoint>) -> Self {
        let arclength = polyline.windows(2).map(|w| w[0].dist(&w[1])).sum();
        ManifoldArc {
            anchor,
            stability,
            branch: Branch::Plus,
            polyline,
            params: Vec::new(),
            arclength,
            refinement_tol: f64::INFINITY,
            generator: None,
            unresolved: 0,
            budget_reached: true,
        }
    }

    /// Arclength of the polyline up to each vertex.
    pub fn cumulative_arclength(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.polyline.len());
        out.push(0.0);
        for w in self.polyline.windows(2) {
            acc += w[0].dist(&w[1]);
            out.push(acc);
        }
        out
    }
}

fn direction(a: CoverPoint, b: CoverPoint) -> Option<[f64; 2]> {
    let d = [b.x - a.x, b.y - a.y];
    let n = d[0].hypot(d[1]);
    (n > 0.0).then(|| [d[0] / n, d[1] / n])
}

pub(crate) fn turning_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).abs().atan2(a[0] * b[0] + a[1] * b[1])
}

fn violations(pts: &[CoverPoint], incoming: Option<[f64; 2]>, tol: f64, floor: f64) -> Vec<bool> {
    let segs = pts.len().saturating_sub(1);
    let mut marks = vec![false; segs];
    let dirs: Vec<Option<[f64; 2]>> = pts.windows(2).map(|w| direction(w[0], w[1])).collect();
    let lens: Vec<f64> = pts.windows(2).map(|w| w[0].dist(&w[1])).collect();
    for i in 0..segs {
        if lens[i] > tol {
            marks[i] = true;
        }
    }
    for i in 1..segs {
        if let (Some(a), Some(b)) = (dirs[i - 1], dirs[i]) {
            if turning_angle(a, b) > TURN_LIMIT {
                marks[i - 1] |= lens[i - 1] > floor;
                marks[i] |= lens[i] > floor;
            }
        }
    }
    if let (Some(a), Some(Some(b))) = (incoming, dirs.first()) {
        if turning_angle(a, *b) > TURN_LIMIT && lens[0] > floor {
            marks[0] = true;
        }
    }
    marks
}

/// Insert generator points until every segment respects the bounds or has
/// reached the parameter or length floor. Returns the number left unresolved.
fn refine(
    gen: &ArcGenerator,
    m: &dyn LiftedMap,
    params: &mut Vec<f64>,
    pts: &mut Vec<CoverPoint>,
    incoming: Option<[f64; 2]>,
    tol: f64,
) -> Result<usize> {
    loop {
        let marks = violations(pts, incoming, tol, MIN_SEGMENT_FRACTION * tol);
        let split: Vec<usize> =
            (0..marks.len()).filter(|&i| marks[i] && params[i + 1] - params[i] > MIN_PARAM_GAP).collect();
        if split.is_empty() {
            let strict = violations(pts, incoming, tol, 0.0);
            return Ok(strict.iter().filter(|&&b| b).count());
        }
        let mids: Vec<f64> = split.iter().map(|&i| 0.5 * (params[i] + params[i + 1])).collect();
        let new_pts = exec::map_collect(&mids, |&u| gen.point_at(m, u));
        let mut out_params = Vec::with_capacity(params.len() + mids.len());
        let mut out_pts = Vec::with_capacity(pts.len() + mids.len());
        let mut next = 0;
        for i in 0..pts.len() {
            out_params.push(params[i]);
            out_pts.push(pts[i]);
            if next < split.len() && split[next] == i {
                out_params.push(mids[next]);
                out_pts.push(new_pts[next].clone()?);
                next += 1;
            }
        }
        *params = out_params;
        *pts = out_pts;
        if pts.len() > MAX_POINTS {
            return Err(Error::InvalidInput("manifold refinement exceeded the point limit".into()));
        }
    }
}

/// Grow one branch of `W^u` or `W^s` of a hyperbolic orbit until the
/// polyline reaches `budget` in arclength.
pub fn grow_manifold(
    m: &dyn LiftedMap,
    orbit: &PeriodicOrbit,
    stability: Stability,
    branch: Branch,
    budget: f64,
    refinement_tol: f64,
) -> Result<ManifoldArc> {
    grow_manifold_with_offset(m, orbit, stability, branch, budget, refinement_tol, None)
}

/// As [`grow_manifold`], with an explicit primary-segment offset `δ₀`.
pub fn grow_manifold_with_offset(
    m: &dyn LiftedMap,
    orbit: &PeriodicOrbit,
    stability: Stability,
    branch: Branch,
    budget: f64,
    refinement_tol: f64,
    delta0: Option<f64>,
) -> Result<ManifoldArc> {
    if stability == Stability::Stable && !m.has_inverse() {
        return Err(Error::MissingInverse);
    }
    if !(refinement_tol > 0.0) {
        return Err(Error::InvalidInput("refinement tolerance must be positive".into()));
    }
    let eigen = linearize(m, orbit)?;
    let delta0 = delta0.unwrap_or(PRIMARY_OFFSET * eigen.lambda_u.abs().max(1.0));
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidInput("primary offset must be positive".into()));
    }
    if !(budget >= 10.0 * delta0) {
        return Err(Error::BudgetTooSmall { budget, minimum: 10.0 * delta0 });
    }
    let (lambda, v) = match stability {
        Stability::Unstable => (eigen.lambda_u, eigen.v_u),
        Stability::Stable => (1.0 / eigen.lambda_s, eigen.v_s),
    };
    let (factor, steps) = if lambda < 0.0 { (lambda * lambda, 2 * orbit.q) } else { (lambda, orbit.q) };
    let sign = if branch == Branch::Plus { 1.0 } else { -1.0 };
    let gen = ArcGenerator {
        anchor: orbit.points[0],
        direction: [sign * v[0], sign * v[1]],
        delta0,
        factor,
        steps,
        backward: stability == Stability::Stable,
    };
    grow_from_generator(m, orbit, stability, branch, gen, budget, refinement_tol)
}

pub(crate) fn grow_from_generator(
    m: &dyn LiftedMap,
    orbit: &PeriodicOrbit,
    stability: Stability,
    branch: Branch,
    gen: ArcGenerator,
    budget: f64,
    tol: f64,
) -> Result<ManifoldArc> {
    let mut dom_params = vec![0.0, 1.0];
    let mut dom_pts = vec![gen.point_at(m, 0.0)?, gen.point_at(m, 1.0)?];
    let mut unresolved = refine(&gen, m, &mut dom_params, &mut dom_pts, None, tol)?;
    let mut polyline = dom_pts.clone();
    let mut params = dom_params.clone();
    let mut arclength: f64 = polyline.windows(2).map(|w| w[0].dist(&w[1])).sum();

    let mut domains = 1;
    while arclength < budget && domains < MAX_DOMAINS {
        let images = exec::map_collect(&dom_pts, |&w| gen.advance(m, w, gen.steps));
        dom_pts = images.into_iter().collect::<Result<Vec<_>>>()?;
        dom_params.iter_mut().for_each(|u| *u += 1.0);
        let n = polyline.len();
        let incoming = direction(polyline[n - 2], polyline[n - 1]);
        unresolved += refine(&gen, m, &mut dom_params, &mut dom_pts, incoming, tol)?;
        // The first point of the new domain repeats the last emitted one.
        for (u, w) in dom_params.iter().zip(&dom_pts).skip(1) {
            arclength += polyline.last().map_or(0.0, |last| last.dist(w));
            polyline.push(*w);
            params.push(*u);
            if arclength >= budget {
                break;
            }
        }
        domains += 1;
        if polyline.len() > MAX_POINTS {
            break;
        }
    }
    Ok(ManifoldArc {
        anchor: orbit.clone(),
        stability,
        branch,
        polyline,
        params,
        arclength,
        refinement_tol: tol,
        generator: Some(gen),
        unresolved,
        budget_reached: arclength >= budget,
    })
}
