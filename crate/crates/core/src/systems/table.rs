//! Smooth strictly convex billiard tables given by a radial cosine series,
//! reparametrised by normalised arclength `s ∈ [0, 1)`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};

const ARCLENGTH_NODES: usize = 4096;
const CONVEXITY_GRID: usize = 2048;
const SCAN_NODES: usize = 256;

// 8-point Gauss–Legendre on [-1, 1].
const GL_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_W: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub phase: f64,
}

/// Boundary `r(ψ) = a₀ + Σ a_j cos(jψ + φ_j)` traversed counter-clockwise.
#[derive(Debug, Clone)]
pub struct ConvexTable {
    a0: f64,
    terms: Vec<CosineTerm>,
    perimeter: f64,
    /// Cumulative arclength at ψ = 2π i / ARCLENGTH_NODES.
    cumulative: Vec<f64>,
    /// Polar angles at s = j / SCAN_NODES.
    scan: Vec<f64>,
}

pub fn table_from_cosine_series(a0: f64, terms: &[CosineTerm]) -> Result<ConvexTable> {
    if !a0.is_finite() || a0 <= 0.0 {
        return Err(Error::InvalidInput(format!("a0 must be positive, got {a0}")));
    }
    if terms.iter().any(|t| !t.amplitude.is_finite() || !t.phase.is_finite()) {
        return Err(Error::InvalidInput("non-finite cosine term".into()));
    }
    let mut table = ConvexTable { a0, terms: terms.to_vec(), perimeter: 0.0, cumulative: Vec::new(), scan: Vec::new() };
    // Radius must stay positive before arclength makes sense.
    for i in 0..CONVEXITY_GRID {
        let psi = TAU * i as f64 / CONVEXITY_GRID as f64;
        let (r, _, _) = table.radial(psi);
        if r <= 0.0 {
            return Err(Error::NotStrictlyConvex { s: i as f64 / CONVEXITY_GRID as f64, curvature: f64::NAN });
        }
    }
    let mut cumulative = Vec::with_capacity(ARCLENGTH_NODES + 1);
    cumulative.push(0.0);
    let h = TAU / ARCLENGTH_NODES as f64;
    for i in 0..ARCLENGTH_NODES {
        let a = h * i as f64;
        let prev = cumulative[i];
        cumulative.push(prev + table.speed_integral(a, a + h));
    }
    table.perimeter = cumulative[ARCLENGTH_NODES];
    table.cumulative = cumulative;

    for i in 0..CONVEXITY_GRID {
        let s = i as f64 / CONVEXITY_GRID as f64;
        let kappa = table.curvature(s);
        if !(kappa > 0.0) {
            return Err(Error::NotStrictlyConvex { s, curvature: kappa });
        }
    }
    table.scan = (0..SCAN_NODES).map(|j| table.polar_angle(j as f64 / SCAN_NODES as f64)).collect();
    Ok(table)
}

impl ConvexTable {
    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn terms(&self) -> &[CosineTerm] {
        &self.terms
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn is_circle(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    /// r, r', r'' at polar angle ψ.
    fn radial(&self, psi: f64) -> (f64, f64, f64) {
        let mut r = self.a0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for (j, t) in self.terms.iter().enumerate() {
            let n = (j + 1) as f64;
            let (sin, cos) = (n * psi + t.phase).sin_cos();
            r += t.amplitude * cos;
            dr -= t.amplitude * n * sin;
            ddr -= t.amplitude * n * n * cos;
        }
        (r, dr, ddr)
    }

    fn speed(&self, psi: f64) -> f64 {
        let (r, dr, _) = self.radial(psi);
        r.hypot(dr)
    }

    fn speed_integral(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for k in 0..4 {
            acc += GL_W[k] * (self.speed(mid - half * GL_X[k]) + self.speed(mid + half * GL_X[k]));
        }
        acc * half
    }

    /// Polar angle ψ ∈ [0, 2π) of the boundary point at normalised arclength `s`.
    pub fn polar_angle(&self, s: f64) -> f64 {
        let frac = s - s.floor();
        if self.terms.is_empty() {
            return TAU * frac;
        }
        let target = frac * self.perimeter;
        let idx = match self.cumulative.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
            Ok(i) => return TAU * i as f64 / ARCLENGTH_NODES as f64,
            Err(i) => i.saturating_sub(1).min(ARCLENGTH_NODES - 1),
        };
        let h = TAU / ARCLENGTH_NODES as f64;
        let lo = h * idx as f64;
        let base = self.cumulative[idx];
        let span = self.cumulative[idx + 1] - base;
        let mut psi = lo + h * (target - base) / span;
        for _ in 0..4 {
            let f = base + self.speed_integral(lo, psi) - target;
            let step = f / self.speed(psi);
            psi -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        psi
    }

    /// Boundary point at normalised arclength `s` (any real; period 1).
    pub fn point(&self, s: f64) -> [f64; 2] {
        let psi = self.polar_angle(s);
        let (r, _, _) = self.radial(psi);
        let (sin, cos) = psi.sin_cos();
        [r * cos, r * sin]
    }

    fn tangent_at_angle(&self, psi: f64) -> [f64; 2] {
        let (r, dr, _) = self.radial(psi);
        let (sin, cos) = psi.sin_cos();
        let v = [dr * cos - r * sin, dr * sin + r * cos];
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    }

    /// Unit tangent (counter-clockwise) at `s`.
    pub fn tangent(&self, s: f64) -> [f64; 2] {
        self.tangent_at_angle(self.polar_angle(s))
    }

    /// Point and unit tangent at `s` with a single arclength inversion.
    pub fn frame(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let psi = self.polar_angle(s);
        let (r, _, _) = self.radial(psi);
        let (sin, cos) = psi.sin_cos();
        ([r * cos, r * sin], self.tangent_at_angle(psi))
    }

    /// Signed curvature at `s`; positive everywhere on a valid table.
    pub fn curvature(&self, s: f64) -> f64 {
        let psi = self.polar_angle(s);
        let (r, dr, ddr) = self.radial(psi);
        (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
    }

    /// Polar angles of the fixed scan nodes `s = j / 256`.
    pub(crate) fn scan_angles(&self) -> &[f64] {
        &self.scan
    }

    /// Polar angle on the lift: increasing, with `lifted_angle(s + 1) = lifted_angle(s) + 2π`.
    pub(crate) fn lifted_angle(&self, s: f64) -> f64 {
        self.polar_angle(s) + TAU * s.floor()
    }

    /// Inverse of [`Self::lifted_angle`].
    pub(crate) fn arclength_at_angle(&self, psi: f64) -> f64 {
        let turns = (psi / TAU).floor();
        let frac = psi - TAU * turns;
        if self.terms.is_empty() {
            return turns + frac / TAU;
        }
        let h = TAU / ARCLENGTH_NODES as f64;
        let idx = ((frac / h).floor() as usize).min(ARCLENGTH_NODES - 1);
        let lo = h * idx as f64;
        turns + (self.cumulative[idx] + self.speed_integral(lo, frac)) / self.perimeter
    }

    pub(crate) fn point_at_angle(&self, psi: f64) -> [f64; 2] {
        let (r, _, _) = self.radial(psi);
        let (sin, cos) = psi.sin_cos();
        [r * cos, r * sin]
    }

    /// Point and d/dψ of the point.
    pub(crate) fn point_and_velocity(&self, psi: f64) -> ([f64; 2], [f64; 2]) {
        let (r, dr, _) = self.radial(psi);
        let (sin, cos) = psi.sin_cos();
        ([r * cos, r * sin], [dr * cos - r * sin, dr * sin + r * cos])
    }

    pub(crate) fn frame_at_angle(&self, psi: f64) -> ([f64; 2], [f64; 2]) {
        (self.point_at_angle(psi), self.tangent_at_angle(psi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oval() -> ConvexTable {
        table_from_cosine_series(1.0, &[CosineTerm { amplitude: 0.05, phase: 0.0 }]).unwrap()
    }

    #[test]
    fn unit_circle() {
        let t = table_from_cosine_series(1.0, &[]).unwrap();
        assert!((t.perimeter() - TAU).abs() <= 1e-9);
        for s in [0.0, 0.1, 0.37, 0.99] {
            assert!((t.curvature(s) - 1.0).abs() < 1e-12);
            let p = t.point(s);
            assert!((p[0] - (TAU * s).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn oval_is_convex_and_arclength_parametrised() {
        let t = oval();
        for i in 0..64 {
            assert!(t.curvature(i as f64 / 64.0) > 0.0);
        }
        // Equal steps in s give equal arclength: |B(s+h) - B(s)| ≈ L h.
        let h = 1e-5;
        for s in [0.0, 0.13, 0.5, 0.77] {
            let a = t.point(s);
            let b = t.point(s + h);
            let chord = (b[0] - a[0]).hypot(b[1] - a[1]);
            assert!((chord / (t.perimeter() * h) - 1.0).abs() < 1e-6);
        }
        // Tangent agrees with the finite-difference derivative.
        for s in [0.05, 0.4, 0.9] {
            let tan = t.tangent(s);
            let a = t.point(s - h);
            let b = t.point(s + h);
            let n = (b[0] - a[0]).hypot(b[1] - a[1]);
            assert!(((b[0] - a[0]) / n - tan[0]).abs() < 1e-6);
            assert!(((b[1] - a[1]) / n - tan[1]).abs() < 1e-6);
        }
        // Closed curve.
        let p0 = t.point(0.0);
        let p1 = t.point(1.0 - 1e-12);
        assert!((p0[0] - p1[0]).abs() < 1e-10 && (p0[1] - p1[1]).abs() < 1e-10);
    }

    #[test]
    fn polar_curvature_formula_matches_turning_rate() {
        // dT/ds = κ L N: compare against differences of the tangent angle.
        let t = oval();
        let h = 1e-5;
        for s in [0.0, 0.25, 0.6] {
            let a = t.tangent(s - h);
            let b = t.tangent(s + h);
            let dtheta = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            let kappa_fd = dtheta / (2.0 * h * t.perimeter());
            assert!((kappa_fd - t.curvature(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn large_perturbation_is_rejected() {
        let err = table_from_cosine_series(1.0, &[CosineTerm { amplitude: 0.9, phase: 0.0 }]).unwrap_err();
        assert!(matches!(err, Error::NotStrictlyConvex { .. }));
    }

    #[test]
    fn bad_radius_rejected() {
        assert!(table_from_cosine_series(0.0, &[]).is_err());
        assert!(table_from_cosine_series(-1.0, &[]).is_err());
    }
}
