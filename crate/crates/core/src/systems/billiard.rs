//! One bounce of a billiard ball in a convex table, lifted to `ℝ × [0,1]`.
//!
//! State `(s, y)`: normalised arclength position and `y = θ/π`, where `θ` is
//! the angle between the counter-clockwise tangent and the outgoing ray. The
//! lift sends `s` into `(s, s + 1)`, so the boundary circles satisfy
//! `F(s, 0) = (s, 0)` and `F(s, 1) = (s + 1, 1)`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::table::ConvexTable;
use crate::cover::{CoverPoint, JacobianKind, LiftedMap};
use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-8;
const NEWTON_POLISH_STEPS: usize = 6;
const GLANCING_CHORD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilliardState {
    pub s: f64,
    pub y: f64,
}

impl BilliardState {
    pub fn new(s: f64, y: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) || !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidInput(format!("billiard state ({s}, {y}) out of range")));
        }
        Ok(BilliardState { s, y })
    }

    pub fn lift(&self) -> CoverPoint {
        CoverPoint { x: self.s, y: self.y }
    }
}

#[derive(Debug, Clone)]
pub struct BilliardMap {
    table: ConvexTable,
}

pub fn billiard_map(table: ConvexTable) -> BilliardMap {
    BilliardMap { table }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl BilliardMap {
    pub fn table(&self) -> &ConvexTable {
        &self.table
    }

    /// Angle at which boundary(u) is seen from `origin` relative to `tangent`;
    /// increases monotonically from 0 to π as u runs over (s, s + 1).
    fn sight_angle(origin: [f64; 2], tangent: [f64; 2], target: [f64; 2]) -> f64 {
        let v = [target[0] - origin[0], target[1] - origin[1]];
        cross(tangent, v).atan2(dot(tangent, v))
    }

    /// Lifted polar angle of the endpoint of the chord leaving lifted angle
    /// `psi_s` at angle `theta`.
    fn chord_end(&self, psi_s: f64, theta: f64, origin: [f64; 2], tangent: [f64; 2]) -> Result<f64> {
        let angles = self.table.scan_angles();
        let n = angles.len();
        let fail = || Error::ChordFailure { s: self.table.arclength_at_angle(psi_s), y: theta / PI };
        // Scan nodes on the lift starting just past psi_s; sight angle is monotone along them.
        let turn = (psi_s / TAU).floor();
        let start = angles.partition_point(|&a| a + TAU * turn <= psi_s);
        let node = |j: usize| angles[j % n] + TAU * (turn + (j / n) as f64);
        let (mut a, mut b) = (start, start + n);
        while b > a && node(b - 1) >= psi_s + TAU {
            b -= 1;
        }
        let mut lo = psi_s;
        let mut hi = psi_s + TAU;
        while a < b {
            let j = a + (b - a) / 2;
            let psi = node(j);
            if Self::sight_angle(origin, tangent, self.table.point_at_angle(psi)) >= theta {
                hi = psi;
                b = j;
            } else {
                lo = psi;
                a = j + 1;
            }
        }

        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let angle = Self::sight_angle(origin, tangent, self.table.point_at_angle(mid));
            if !angle.is_finite() {
                return Err(fail());
            }
            if angle >= theta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut psi = 0.5 * (lo + hi);
        for _ in 0..NEWTON_POLISH_STEPS {
            let (p, dp) = self.table.point_and_velocity(psi);
            let v = [p[0] - origin[0], p[1] - origin[1]];
            let c = cross(tangent, v);
            let d = dot(tangent, v);
            let dc = cross(tangent, dp);
            let dd = dot(tangent, dp);
            let denom = c * c + d * d;
            if denom == 0.0 {
                break;
            }
            let slope = (d * dc - c * dd) / denom;
            let g = c.atan2(d) - theta;
            if slope <= 0.0 || !slope.is_finite() {
                break;
            }
            let next = psi - g / slope;
            // Stay inside the bracket established by bisection.
            if next < lo - BISECTION_TOL || next > hi + BISECTION_TOL {
                break;
            }
            let moved = (next - psi).abs();
            psi = next;
            if moved < 1e-15 {
                break;
            }
        }
        if !psi.is_finite() {
            return Err(fail());
        }
        // Glancing chords may polish onto the bracket edge; the caller treats them as fixed.
        Ok(psi.clamp(lo, hi))
    }
}

impl LiftedMap for BilliardMap {
    fn forward(&self, w: CoverPoint) -> Result<CoverPoint> {
        if !(0.0..=1.0).contains(&w.y) || !w.x.is_finite() {
            return Err(Error::InvalidInput(format!("billiard state ({}, {}) off the annulus", w.x, w.y)));
        }
        if w.y == 0.0 {
            return Ok(w);
        }
        if w.y == 1.0 {
            return Ok(w.shifted(1.0));
        }
        let theta = PI * w.y;
        let psi_s = self.table.lifted_angle(w.x);
        let (origin, tangent) = self.table.frame_at_angle(psi_s);
        let normal = [-tangent[1], tangent[0]];
        let (sin, cos) = theta.sin_cos();
        let dir = [cos * tangent[0] + sin * normal[0], cos * tangent[1] + sin * normal[1]];

        let psi = self.chord_end(psi_s, theta, origin, tangent)?;
        let (end, end_tangent) = self.table.frame_at_angle(psi);
        let u = self.table.arclength_at_angle(psi).clamp(w.x.next_up(), (w.x + 1.0).next_down());
        let chord = (end[0] - origin[0]).hypot(end[1] - origin[1]);
        if chord < GLANCING_CHORD * self.table.perimeter() {
            let x = if w.y < 0.5 { w.x } else { w.x + 1.0 };
            return Ok(CoverPoint { x, y: w.y });
        }
        let end_normal = [-end_tangent[1], end_tangent[0]];
        let theta_out = (-dot(dir, end_normal)).atan2(dot(dir, end_tangent));
        Ok(CoverPoint { x: u, y: (theta_out / PI).clamp(0.0, 1.0) })
    }

    /// Time reversal: reverse the chord by reflecting the angle.
    fn inverse(&self, w: CoverPoint) -> Result<CoverPoint> {
        let f = self.forward(CoverPoint { x: w.x, y: 1.0 - w.y })?;
        Ok(CoverPoint { x: f.x - 1.0, y: 1.0 - f.y })
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn jacobian_kind(&self) -> JacobianKind {
        JacobianKind::FiniteDifference
    }

    fn name(&self) -> String {
        "billiard".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        let mut out = vec![("a0".into(), self.table.a0())];
        for (j, t) in self.table.terms().iter().enumerate() {
            out.push((format!("a{}", j + 1), t.amplitude));
            out.push((format!("phi{}", j + 1), t.phase));
        }
        out
    }
}

/// Largest `|det DF · sin θ′ / sin θ − 1|` over seeded interior states; zero
/// for exact preservation of `sin θ ds dθ`.
pub fn billiard_measure_check(map: &BilliardMap, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<CoverPoint> =
        (0..samples).map(|_| CoverPoint { x: rng.gen_range(0.0..1.0), y: rng.gen_range(0.01..0.99) }).collect();
    let deviations = crate::exec::map_collect(&states, |&w| measure_deviation(map, w));
    deviations.into_iter().try_fold(0.0f64, |acc, d| Ok(acc.max(d?)))
}

pub(crate) fn measure_deviation(map: &BilliardMap, w: CoverPoint) -> Result<f64> {
    let image = map.forward(w)?;
    let det = map.jacobian(w)?.det();
    let ratio = (PI * image.y).sin() / (PI * w.y).sin();
    Ok((det * ratio - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{shipped_tables, table_from_cosine_series, CosineTerm};

    fn circle() -> BilliardMap {
        billiard_map(table_from_cosine_series(1.0, &[]).unwrap())
    }

    /// Brute-force oracle: intersect the ray with the unit circle directly.
    fn ray_circle(s: f64, y: f64) -> (f64, f64) {
        let psi = 2.0 * PI * s;
        let p = [psi.cos(), psi.sin()];
        let t = [-psi.sin(), psi.cos()];
        let n = [-t[1], t[0]];
        let th = PI * y;
        let d = [th.cos() * t[0] + th.sin() * n[0], th.cos() * t[1] + th.sin() * n[1]];
        // |p + λ d| = 1 → λ = -2 p·d.
        let lam = -2.0 * dot(p, d);
        let q = [p[0] + lam * d[0], p[1] + lam * d[1]];
        let mut s2 = q[1].atan2(q[0]) / (2.0 * PI);
        while s2 <= s {
            s2 += 1.0;
        }
        let t2 = [-q[1], q[0]];
        let n2 = [-t2[1], t2[0]];
        let th2 = (-dot(d, n2)).atan2(dot(d, t2));
        (s2, th2 / PI)
    }

    #[test]
    fn circle_third_of_perimeter() {
        let m = circle();
        let w = m.forward(CoverPoint { x: 0.0, y: 1.0 / 3.0 }).unwrap();
        let (s2, y2) = ray_circle(0.0, 1.0 / 3.0);
        assert!((w.x - 1.0 / 3.0).abs() < 1e-12 && (w.x - s2).abs() < 1e-12);
        assert!((w.y - 1.0 / 3.0).abs() < 1e-12 && (w.y - y2).abs() < 1e-12);
    }

    #[test]
    fn circle_diameter() {
        let m = circle();
        let w = m.forward(CoverPoint { x: 0.25, y: 0.5 }).unwrap();
        assert!((w.x - 0.75).abs() < 1e-12 && (w.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_circles_are_fixed() {
        for (_, table) in shipped_tables() {
            let m = billiard_map(table);
            assert_eq!(m.forward(CoverPoint { x: 0.3, y: 0.0 }).unwrap(), CoverPoint { x: 0.3, y: 0.0 });
            assert_eq!(m.forward(CoverPoint { x: 0.3, y: 1.0 }).unwrap(), CoverPoint { x: 1.3, y: 1.0 });
        }
    }

    #[test]
    fn circle_matches_ray_oracle_and_preserves_angle() {
        let m = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let s = rng.gen_range(0.0..1.0);
            let y = rng.gen_range(1e-3..1.0 - 1e-3);
            let w = m.forward(CoverPoint { x: s, y }).unwrap();
            let (s2, y2) = ray_circle(s, y);
            assert!((w.x - s2).abs() < 1e-11, "s={s} y={y}: {} vs {}", w.x, s2);
            assert!((w.y - y2).abs() < 1e-10);
            assert!((w.y - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn time_reversal_on_shipped_tables() {
        for (_, table) in shipped_tables() {
            let m = billiard_map(table);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..200 {
                let w = CoverPoint { x: rng.gen_range(0.0..1.0), y: rng.gen_range(0.01..0.99) };
                let f = m.forward(w).unwrap();
                let back = m.forward(CoverPoint { x: f.x, y: 1.0 - f.y }).unwrap();
                // Returns to w, one turn further along the lift.
                assert!((back.x - 1.0 - w.x).abs() <= 1e-8);
                assert!((back.y - (1.0 - w.y)).abs() <= 1e-8);
                let inv = m.inverse(f).unwrap();
                assert!(inv.dist_inf(&w) <= 1e-8);
            }
        }
    }

    #[test]
    fn measure_is_preserved() {
        let tables = shipped_tables();
        let circle = billiard_map(tables[0].1.clone());
        assert!(billiard_measure_check(&circle, 100, 1).unwrap() <= 1e-6);
        let oval = billiard_map(tables[1].1.clone());
        assert!(billiard_measure_check(&oval, 100, 1).unwrap() <= 1e-5);
        let mid = measure_deviation(&circle, CoverPoint { x: 0.2, y: 0.5 }).unwrap();
        assert!(mid <= 1e-8);
    }

    #[test]
    fn glancing_rays_stay_close() {
        let m = billiard_map(table_from_cosine_series(1.0, &[CosineTerm { amplitude: 0.05, phase: 0.3 }]).unwrap());
        let w = m.forward(CoverPoint { x: 0.4, y: 1e-7 }).unwrap();
        assert!(w.x > 0.4 && w.x - 0.4 < 1e-5);
        let w = m.forward(CoverPoint { x: 0.4, y: 1.0 - 1e-7 }).unwrap();
        assert!(w.x < 1.4 && 1.4 - w.x < 1e-5);
    }

    #[test]
    fn rejects_states_off_the_annulus() {
        let m = circle();
        assert!(m.forward(CoverPoint { x: 0.0, y: 1.5 }).is_err());
        assert!(BilliardState::new(1.0, 0.5).is_err());
    }
}
