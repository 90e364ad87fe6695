//! Transverse crossings between two manifold arcs, including crossings with
//! deck translates of the second arc.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::grow::ManifoldArc;
use crate::cover::{CoverPoint, LiftedMap};
use crate::exec;

const REFINE_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionPoint {
    /// Crossing in the coordinates of the first arc.
    pub location: CoverPoint,
    /// Segment index in the first and second arc.
    pub segments: (usize, usize),
    /// Generator parameters of the crossing, when the arcs carry them.
    pub params: Option<(f64, f64)>,
    /// Acute angle between the crossing directions, radians.
    pub angle: f64,
    /// The second arc was translated by this many deck units in `x`.
    pub deck_shift: i64,
}

fn orient(a: CoverPoint, b: CoverPoint, c: CoverPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Parameters `(s, t)` of a proper crossing of `[a0, a1]` and `[b0, b1]`.
fn proper_crossing(a0: CoverPoint, a1: CoverPoint, b0: CoverPoint, b1: CoverPoint) -> Option<(f64, f64)> {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        Some((d1 / (d1 - d2), d3 / (d3 - d4)))
    } else {
        None
    }
}

fn lerp(a: CoverPoint, b: CoverPoint, t: f64) -> CoverPoint {
    CoverPoint { x: a.x + t * (b.x - a.x), y: a.y + t * (b.y - a.y) }
}

fn acute_angle(a0: CoverPoint, a1: CoverPoint, b0: CoverPoint, b1: CoverPoint) -> f64 {
    let (ux, uy) = (a1.x - a0.x, a1.y - a0.y);
    let (vx, vy) = (b1.x - b0.x, b1.y - b0.y);
    (ux * vy - uy * vx).abs().atan2((ux * vx + uy * vy).abs())
}

struct Piece {
    u: (f64, f64),
    p: (CoverPoint, CoverPoint),
}

impl Piece {
    fn len(&self) -> f64 {
        self.p.0.dist(&self.p.1)
    }
}

/// Shrink both pieces around the crossing by bisecting generator parameters
/// and keeping the halves whose chords still cross.
fn refine_on_curves(
    m: &dyn LiftedMap,
    a: &ManifoldArc,
    b: &ManifoldArc,
    shift: f64,
    mut pa: Piece,
    mut pb: Piece,
) -> Option<(Piece, Piece)> {
    let (ga, gb) = (a.generator.as_ref()?, b.generator.as_ref()?);
    for _ in 0..MAX_BISECTIONS {
        if pa.len() <= REFINE_TOL && pb.len() <= REFINE_TOL {
            break;
        }
        let split_a = pa.len() >= pb.len();
        let (piece, gen, dx) = if split_a { (&pa, ga, 0.0) } else { (&pb, gb, shift) };
        let um = 0.5 * (piece.u.0 + piece.u.1);
        if !(um > piece.u.0 && um < piece.u.1) {
            break;
        }
        let mid = gen.point_at(m, um).ok()?.shifted(dx);
        let halves =
            [Piece { u: (piece.u.0, um), p: (piece.p.0, mid) }, Piece { u: (um, piece.u.1), p: (mid, piece.p.1) }];
        let other = if split_a { &pb } else { &pa };
        let keep = halves.into_iter().find(|h| proper_crossing(h.p.0, h.p.1, other.p.0, other.p.1).is_some());
        match keep {
            Some(h) if split_a => pa = h,
            Some(h) => pb = h,
            None => break,
        }
    }
    Some((pa, pb))
}

/// All proper crossings between segments of `a` and deck translates of
/// segments of `b`. With a map, crossings are refined on the true curves.
pub fn detect_intersections(a: &ManifoldArc, b: &ManifoldArc, m: Option<&dyn LiftedMap>) -> Vec<IntersectionPoint> {
    if a.polyline.len() < 2 || b.polyline.len() < 2 {
        return Vec::new();
    }
    let longest = a
        .polyline
        .windows(2)
        .chain(b.polyline.windows(2))
        .map(|s| (s[0].x - s[1].x).abs().max((s[0].y - s[1].y).abs()))
        .fold(0.0, f64::max);
    let cells_x = ((1.0 / longest.max(1e-6)).floor() as i64).clamp(1, 4096);
    let h = 1.0 / cells_x as f64;
    let key_x = |x: f64| ((x.rem_euclid(1.0) / h).floor() as i64).min(cells_x - 1);
    let bbox_keys = |p: CoverPoint, q: CoverPoint| {
        let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
        let (y0, y1) = ((p.y.min(q.y) / h).floor() as i64, (p.y.max(q.y) / h).floor() as i64);
        let i0 = key_x(x0);
        let span = ((x1 - x0) / h).ceil() as i64 + 1;
        let mut keys = Vec::new();
        for di in 0..=span.min(cells_x) {
            for j in y0..=y1 {
                keys.push(((i0 + di).rem_euclid(cells_x), j));
            }
        }
        keys
    };
    let mut hash: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (j, s) in b.polyline.windows(2).enumerate() {
        for k in bbox_keys(s[0], s[1]) {
            hash.entry(k).or_default().push(j);
        }
    }
    let seg_idx: Vec<usize> = (0..a.polyline.len() - 1).collect();
    let found = exec::map_collect(&seg_idx, |&i| {
        let (a0, a1) = (a.polyline[i], a.polyline[i + 1]);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for key in bbox_keys(a0, a1) {
            let Some(cands) = hash.get(&key) else { continue };
            for &j in cands {
                if !seen.insert(j) {
                    continue;
                }
                let k = (a0.x - b.polyline[j].x).round();
                let (b0, b1) = (b.polyline[j].shifted(k), b.polyline[j + 1].shifted(k));
                let Some((s, t)) = proper_crossing(a0, a1, b0, b1) else { continue };
                out.push(crossing(a, b, m, i, j, k, s, t));
            }
        }
        out
    });
    let mut all: Vec<IntersectionPoint> = found.into_iter().flatten().collect();
    all.sort_by(|p, q| p.segments.cmp(&q.segments).then(p.deck_shift.cmp(&q.deck_shift)));
    all
}

#[allow(clippy::too_many_arguments)]
fn crossing(
    a: &ManifoldArc,
    b: &ManifoldArc,
    m: Option<&dyn LiftedMap>,
    i: usize,
    j: usize,
    k: f64,
    s: f64,
    t: f64,
) -> IntersectionPoint {
    let (a0, a1) = (a.polyline[i], a.polyline[i + 1]);
    let (b0, b1) = (b.polyline[j].shifted(k), b.polyline[j + 1].shifted(k));
    let mut result = IntersectionPoint {
        location: lerp(a0, a1, s),
        segments: (i, j),
        params: None,
        angle: acute_angle(a0, a1, b0, b1),
        deck_shift: k as i64,
    };
    let have_params = a.params.len() == a.polyline.len() && b.params.len() == b.polyline.len();
    if let (Some(m), true) = (m, have_params) {
        let pa = Piece { u: (a.params[i], a.params[i + 1]), p: (a0, a1) };
        let pb = Piece { u: (b.params[j], b.params[j + 1]), p: (b0, b1) };
        if let Some((pa, pb)) = refine_on_curves(m, a, b, k, pa, pb) {
            if let Some((s, t)) = proper_crossing(pa.p.0, pa.p.1, pb.p.0, pb.p.1) {
                result.location = lerp(pa.p.0, pa.p.1, s);
                result.params = Some((pa.u.0 + s * (pa.u.1 - pa.u.0), pb.u.0 + t * (pb.u.1 - pb.u.0)));
            }
        }
    } else {
        result.params = have_params.then(|| {
            (a.params[i] + s * (a.params[i + 1] - a.params[i]), b.params[j] + t * (b.params[j + 1] - b.params[j]))
        });
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Stability;
    use crate::orbits::PeriodicOrbit;
    use crate::systems::{standard_map, StandardMapParams};

    fn arc(points: &[(f64, f64)]) -> ManifoldArc {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap();
        let pts = points.iter().map(|&(x, y)| CoverPoint { x, y }).collect();
        ManifoldArc::from_polyline(o, Stability::Unstable, pts)
    }

    #[test]
    fn crossing_lines() {
        let a = arc(&[(0.1, 0.1), (0.3, 0.3), (0.5, 0.5)]);
        let b = arc(&[(0.1, 0.5), (0.3, 0.3 + 1e-3), (0.5, 0.1)]);
        let hits = detect_intersections(&a, &b, None);
        assert_eq!(hits.len(), 1);
        let p = hits[0].location;
        assert!((p.x - p.y).abs() < 1e-12);
        assert!(hits[0].angle > 1.0);
        assert_eq!(hits[0].deck_shift, 0);
    }

    #[test]
    fn parallel_lines() {
        let a = arc(&[(0.1, 0.1), (0.9, 0.1)]);
        let b = arc(&[(0.1, 0.2), (0.9, 0.2)]);
        assert!(detect_intersections(&a, &b, None).is_empty());
    }

    #[test]
    fn crossing_with_a_deck_translate() {
        let a = arc(&[(3.4, 0.0), (3.6, 0.2)]);
        let b = arc(&[(0.4, 0.2), (0.6, 0.0)]);
        let hits = detect_intersections(&a, &b, None);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].deck_shift, 3);
        assert!((hits[0].location.x - 3.5).abs() < 1e-12);
    }
}
