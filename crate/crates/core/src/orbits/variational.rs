//! Birkhoff orbits of billiards as maximisers of total chord length.
//!
//! A configuration is `x₀ < x₁ < … < x_{q−1} < x₀ + p` on the lifted boundary
//! parameter, closed up by `x_q = x₀ + p`. At a critical point of the total
//! length the reflection law holds at every bounce, so the chords form a
//! `(p, q)` billiard orbit.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{gcd, PeriodicOrbit};
use crate::cover::CoverPoint;
use crate::error::{Error, Result};
use crate::exec;
use crate::systems::{BilliardMap, ConvexTable};

const STATIONARITY_TOL: f64 = 1e-11;
const MAX_SWEEPS: usize = 4000;
const GOLDEN_TOL: f64 = 1e-9;
/// Gradient below which coordinate ascent hands over to Newton.
const NEWTON_SWITCH: f64 = 1e-3;
const NEWTON_STEPS: usize = 30;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffOrbit {
    pub orbit: PeriodicOrbit,
    /// Total chord length of the closed configuration.
    pub length: f64,
    /// Largest `|∂L/∂x_i|` at the returned configuration.
    pub stationarity: f64,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn chord_length(table: &ConvexTable, a: f64, b: f64) -> f64 {
    dist(table.point(a), table.point(b))
}

struct Configuration<'a> {
    table: &'a ConvexTable,
    xs: Vec<f64>,
    p: f64,
}

impl Configuration<'_> {
    fn q(&self) -> usize {
        self.xs.len()
    }

    fn prev(&self, i: usize) -> f64 {
        if i == 0 {
            self.xs[self.q() - 1] - self.p
        } else {
            self.xs[i - 1]
        }
    }

    fn next(&self, i: usize) -> f64 {
        if i + 1 == self.q() {
            self.xs[0] + self.p
        } else {
            self.xs[i + 1]
        }
    }

    fn local(&self, x: f64, prev: [f64; 2], next: [f64; 2]) -> f64 {
        let b = self.table.point(x);
        dist(b, prev) + dist(next, b)
    }

    /// ∂/∂x of the two chords meeting at x.
    fn local_slope(&self, x: f64, prev: [f64; 2], next: [f64; 2]) -> f64 {
        let (b, t) = self.table.frame(x);
        let l = self.table.perimeter();
        let d1 = dist(b, prev);
        let d2 = dist(next, b);
        let g1 = (t[0] * (b[0] - prev[0]) + t[1] * (b[1] - prev[1])) / d1;
        let g2 = (t[0] * (next[0] - b[0]) + t[1] * (next[1] - b[1])) / d2;
        l * (g1 - g2)
    }

    fn gradient_norm(&self) -> f64 {
        (0..self.q())
            .map(|i| {
                let prev = self.table.point(self.prev(i));
                let next = self.table.point(self.next(i));
                self.local_slope(self.xs[i], prev, next).abs()
            })
            .fold(0.0, f64::max)
    }

    fn total_length(&self) -> f64 {
        (0..self.q()).map(|i| chord_length(self.table, self.xs[i], self.next(i))).sum()
    }

    fn ordered(&self) -> bool {
        (0..self.q()).all(|i| self.prev(i) < self.xs[i] && self.xs[i] < self.next(i))
            && (0..self.q()).all(|i| self.next(i) - self.xs[i] < 1.0)
    }

    /// Maximise the two-chord length at coordinate `i` with its neighbours fixed.
    fn update(&mut self, i: usize) {
        let prev = self.table.point(self.prev(i));
        let next = self.table.point(self.next(i));
        // Both adjacent gaps stay inside (0, 1).
        let lo = self.prev(i).max(self.next(i) - 1.0);
        let hi = self.next(i).min(self.prev(i) + 1.0);
        let margin = 1e-9 * (hi - lo);
        let (mut a, mut b) = (lo + margin, hi - margin);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.local(c, prev, next);
        let mut fd = self.local(d, prev, next);
        while b - a > GOLDEN_TOL {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.local(c, prev, next);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.local(d, prev, next);
            }
        }
        let mut x = 0.5 * (a + b);
        // Newton polish on the slope; curvature of the slope by central difference.
        for _ in 0..2 {
            let g = self.local_slope(x, prev, next);
            let h = 1e-6 * (hi - lo);
            let curv = (self.local_slope(x + h, prev, next) - self.local_slope(x - h, prev, next)) / (2.0 * h);
            if !(curv < 0.0) {
                break;
            }
            let nx = x - g / curv;
            if nx <= lo || nx >= hi {
                break;
            }
            x = nx;
        }
        self.xs[i] = x;
    }

    fn slopes(&self) -> Vec<f64> {
        (0..self.q())
            .map(|i| {
                let prev = self.table.point(self.prev(i));
                let next = self.table.point(self.next(i));
                self.local_slope(self.xs[i], prev, next)
            })
            .collect()
    }

    /// Newton on the gradient with a cyclic tridiagonal Hessian by central
    /// differences. Returns whether the configuration reached `STATIONARITY_TOL`.
    fn newton_polish(&mut self) -> bool {
        let q = self.q();
        let mut g = self.slopes();
        let mut norm = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for _ in 0..NEWTON_STEPS {
            if norm <= STATIONARITY_TOL {
                return true;
            }
            let h = 1e-6;
            let mut hess = vec![0.0; q * q];
            for j in 0..q {
                let saved = self.xs[j];
                self.xs[j] = saved + h;
                let up = self.slopes();
                self.xs[j] = saved - h;
                let down = self.slopes();
                self.xs[j] = saved;
                for i in 0..q {
                    hess[i * q + j] = (up[i] - down[i]) / (2.0 * h);
                }
            }
            let Some(step) = crate::linalg::solve_dense(hess, g.iter().map(|v| -v).collect()) else {
                return false;
            };
            let saved = self.xs.clone();
            let mut accepted = false;
            let mut scale = 1.0;
            for _ in 0..20 {
                for i in 0..q {
                    self.xs[i] = saved[i] + scale * step[i];
                }
                if self.ordered() {
                    let trial = self.slopes();
                    let trial_norm = trial.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    if trial_norm < norm {
                        g = trial;
                        norm = trial_norm;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                self.xs = saved;
                return norm <= STATIONARITY_TOL;
            }
        }
        norm <= STATIONARITY_TOL
    }

    /// Sort back into the ordered cone, keeping the winding.
    fn repair(&mut self) {
        let p = self.p;
        let x0 = self.xs[0];
        for x in self.xs.iter_mut() {
            *x = x0 + (*x - x0).rem_euclid(p.max(1.0));
        }
        self.xs.sort_by(f64::total_cmp);
    }
}

fn random_start(rng: &mut ChaCha8Rng, p: i64, q: usize) -> Vec<f64> {
    let mean = p as f64 / q as f64;
    let amp = 0.3 * mean.min(1.0 - mean);
    let mut gaps: Vec<f64> = (0..q).map(|_| mean + rng.gen_range(-amp..=amp)).collect();
    let excess = (gaps.iter().sum::<f64>() - p as f64) / q as f64;
    gaps.iter_mut().for_each(|g| *g -= excess);
    let mut xs = Vec::with_capacity(q);
    let mut x = rng.gen_range(0.0..1.0);
    for g in gaps.iter().take(q) {
        xs.push(x);
        x += g;
    }
    xs
}

struct Ascent {
    xs: Vec<f64>,
    length: f64,
    stationarity: f64,
}

fn ascend(table: &ConvexTable, p: i64, q: usize, seed: u64) -> std::result::Result<Ascent, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = Configuration { table, xs: random_start(&mut rng, p, q), p: p as f64 };
    let mut repairs = 0;
    for _ in 0..MAX_SWEEPS {
        for i in 0..q {
            cfg.update(i);
        }
        if !cfg.ordered() {
            repairs += 1;
            if repairs > 3 {
                return Err(Error::OrderViolation);
            }
            cfg.repair();
            continue;
        }
        let mut grad = cfg.gradient_norm();
        if grad > STATIONARITY_TOL && grad < NEWTON_SWITCH {
            let saved = cfg.xs.clone();
            if cfg.newton_polish() {
                grad = cfg.gradient_norm();
            } else {
                cfg.xs = saved;
            }
        }
        if grad <= STATIONARITY_TOL {
            return Ok(Ascent { length: cfg.total_length(), stationarity: grad, xs: cfg.xs });
        }
    }
    Err(Error::AscentStalled { gradient: cfg.gradient_norm(), restarts: 1 })
}

/// Bounce angles recovered from the chord directions.
fn configuration_to_points(table: &ConvexTable, xs: &[f64], p: i64) -> Vec<CoverPoint> {
    let q = xs.len();
    (0..q)
        .map(|i| {
            let next = if i + 1 == q { xs[0] + p as f64 } else { xs[i + 1] };
            let (b, t) = table.frame(xs[i]);
            let e = table.point(next);
            let v = [e[0] - b[0], e[1] - b[1]];
            let cross = t[0] * v[1] - t[1] * v[0];
            let dot = t[0] * v[0] + t[1] * v[1];
            CoverPoint { x: xs[i], y: (cross.atan2(dot) / PI).clamp(0.0, 1.0) }
        })
        .collect()
}

/// The `(p, q)` Birkhoff orbit of maximal total length over `restarts`
/// seeded starts.
pub fn birkhoff_orbit_billiard(
    map: &BilliardMap,
    p: i64,
    q: usize,
    restarts: usize,
    seed: u64,
) -> Result<BirkhoffOrbit> {
    let all = birkhoff_candidates(map, p, q, restarts, seed)?;
    all.into_iter()
        .max_by(|a, b| a.length.total_cmp(&b.length))
        .ok_or(Error::AscentStalled { gradient: f64::NAN, restarts })
}

/// Every verified restart result, in restart order.
pub(crate) fn birkhoff_candidates(
    map: &BilliardMap,
    p: i64,
    q: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<BirkhoffOrbit>> {
    if !(p > 0 && (p as usize) < q && gcd(p, q as i64) == 1) {
        return Err(Error::InvalidInput(format!("need 0 < p < q with gcd 1, got ({p}, {q})")));
    }
    if restarts == 0 {
        return Err(Error::InvalidInput("at least one restart required".into()));
    }
    let table = map.table();
    let ids: Vec<u64> = (0..restarts as u64).collect();
    let results = exec::map_collect(&ids, |&r| {
        let ascent = ascend(table, p, q, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r))?;
        let points = configuration_to_points(table, &ascent.xs, p);
        let orbit = PeriodicOrbit::from_point(map, points[0], p, q)?;
        // Residual over every bounce, using the variational points themselves.
        let mut residual = orbit.residual;
        for i in 0..q {
            let img = crate::cover::LiftedMap::forward(map, points[i])?;
            let target = if i + 1 == q { points[0].shifted(p as f64) } else { points[i + 1] };
            residual = residual.max(img.dist_inf(&target));
        }
        Ok::<_, Error>(BirkhoffOrbit {
            orbit: PeriodicOrbit { points, residual, ..orbit },
            length: ascent.length,
            stationarity: ascent.stationarity,
        })
    });
    let mut out = Vec::new();
    let mut last_err = None;
    let mut best_grad = f64::INFINITY;
    for r in results {
        match r {
            Ok(b) if b.orbit.verified() => out.push(b),
            Ok(b) => best_grad = best_grad.min(b.stationarity),
            Err(Error::AscentStalled { gradient, .. }) => {
                best_grad = best_grad.min(gradient);
            }
            Err(e) => last_err = Some(e),
        }
    }
    if out.is_empty() {
        if best_grad.is_finite() || last_err.is_none() {
            return Err(Error::AscentStalled { gradient: best_grad, restarts });
        }
        return Err(last_err.unwrap_or(Error::OrderViolation));
    }
    Ok(out)
}
