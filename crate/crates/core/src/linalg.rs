//! 2×2 matrices: enough linear algebra for planar maps.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn sub_identity(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]))
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> (f64, f64) {
        let m = &self.0;
        let a = m[0][0];
        let b = m[0][1];
        let c = m[1][0];
        let d = m[1][1];
        let s1 = a * a + b * b + c * c + d * d;
        let det = (a * d - b * c).abs();
        let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
        let big = ((s1 + disc) / 2.0).sqrt();
        let small = if big > 0.0 { det / big } else { 0.0 };
        (big, small)
    }

    /// 2-norm condition number; infinite for a singular matrix.
    pub fn condition_number(&self) -> f64 {
        let (big, small) = self.singular_values();
        if small == 0.0 {
            f64::INFINITY
        } else {
            big / small
        }
    }

    /// Minimum-norm least-squares solution of `self · x = rhs`, treating
    /// singular values below `rcond · σ_max` as zero.
    pub fn pseudo_solve(&self, rhs: [f64; 2], rcond: f64) -> [f64; 2] {
        let m = &self.0;
        // Eigen-decomposition of the symmetric MᵀM gives V and σ².
        let ata = Mat2([
            [m[0][0] * m[0][0] + m[1][0] * m[1][0], m[0][0] * m[0][1] + m[1][0] * m[1][1]],
            [m[0][1] * m[0][0] + m[1][1] * m[1][0], m[0][1] * m[0][1] + m[1][1] * m[1][1]],
        ]);
        let (vals, vecs) = symmetric_eigen(&ata);
        let smax = vals[0].max(0.0).sqrt();
        let mut x = [0.0, 0.0];
        for k in 0..2 {
            let sigma = vals[k].max(0.0).sqrt();
            if sigma <= rcond * smax || sigma == 0.0 {
                continue;
            }
            let v = vecs[k];
            let mv = self.apply(v);
            // u = M v / σ ; contribution (uᵀ rhs / σ) v
            let coef = (mv[0] * rhs[0] + mv[1] * rhs[1]) / (sigma * sigma);
            x[0] += coef * v[0];
            x[1] += coef * v[1];
        }
        x
    }
}

/// Eigenvalues (descending) and unit eigenvectors of a symmetric 2×2 matrix.
fn symmetric_eigen(s: &Mat2) -> ([f64; 2], [[f64; 2]; 2]) {
    let a = s.0[0][0];
    let b = s.0[0][1];
    let d = s.0[1][1];
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let l1 = mean + r;
    let l2 = mean - r;
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let v1 = [theta.cos(), theta.sin()];
    let v2 = [-theta.sin(), theta.cos()];
    ([l1, l2], [v1, v2])
}

/// Real eigenvalues of a 2×2 matrix when the discriminant is non-negative.
pub fn real_eigenvalues(m: &Mat2) -> Option<(f64, f64)> {
    let t = m.trace();
    let d = m.det();
    let disc = t * t - 4.0 * d;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    // Stable form avoiding cancellation in the small root.
    let big = 0.5 * (t + t.signum() * root);
    if big == 0.0 {
        return Some((0.0, 0.0));
    }
    let small = d / big;
    Some((big, small))
}

/// Unit eigenvector for a real eigenvalue, sign-normalised so that its
/// largest-magnitude component is positive.
pub fn eigenvector(m: &Mat2, lambda: f64) -> [f64; 2] {
    let a = m.0[0][0] - lambda;
    let b = m.0[0][1];
    let c = m.0[1][0];
    let d = m.0[1][1] - lambda;
    // Null vector of [[a, b], [c, d]]; use the better-conditioned row.
    let v = if a.abs() + b.abs() >= c.abs() + d.abs() { [-b, a] } else { [-d, c] };
    let v = if v[0] == 0.0 && v[1] == 0.0 { [1.0, 0.0] } else { v };
    let n = v[0].hypot(v[1]);
    let mut u = [v[0] / n, v[1] / n];
    let lead = if u[0].abs() >= u[1].abs() { u[0] } else { u[1] };
    if lead < 0.0 {
        u = [-u[0], -u[1]];
    }
    u
}

/// Solve `a·x = b` by Gaussian elimination with partial pivoting; `a` is
/// row-major `n × n`. `None` when a pivot falls below `1e-300`.
pub(crate) fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_matches_product() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let x = solve_dense(a.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        for r in 0..3 {
            let v: f64 = (0..3).map(|k| a[r * 3 + k] * x[k]).sum();
            assert!((v - [1.0, 2.0, 3.0][r]).abs() < 1e-14);
        }
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn pseudo_solve_matches_inverse_when_regular() {
        let m = Mat2::new(2.0, 1.0, 1.0, 3.0);
        let x = m.pseudo_solve([1.0, 2.0], 1e-12);
        let inv = m.inverse().unwrap().apply([1.0, 2.0]);
        assert!((x[0] - inv[0]).abs() < 1e-12 && (x[1] - inv[1]).abs() < 1e-12);
    }

    #[test]
    fn pseudo_solve_rank_one() {
        // [[0, 2], [0, 0]] x = (1, 0) has minimum-norm solution (0, 0.5).
        let m = Mat2::new(0.0, 2.0, 0.0, 0.0);
        let x = m.pseudo_solve([1.0, 0.0], 1e-10);
        assert!(x[0].abs() < 1e-14 && (x[1] - 0.5).abs() < 1e-14);
        assert!(m.condition_number().is_infinite());
    }

    #[test]
    fn eigen_of_standard_map_saddle() {
        let t = 2.0 * std::f64::consts::PI * 0.15;
        let m = Mat2::new(1.0 + t, 1.0, t, 1.0);
        let (l1, l2) = real_eigenvalues(&m).unwrap();
        assert!((l1 * l2 - 1.0).abs() < 1e-14);
        let v = eigenvector(&m, l1);
        let mv = m.apply(v);
        assert!((mv[0] - l1 * v[0]).abs() < 1e-13 && (mv[1] - l1 * v[1]).abs() < 1e-13);
    }
}
