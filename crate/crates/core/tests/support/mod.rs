//! Independent reference implementations for tests: a proximal-gradient
//! graphical-lasso solver and dense helpers built on nalgebra, sharing no
//! numerical code with the library.
#![allow(dead_code)]

use glasso_core::SymMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(m: &SymMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.n(), m.n(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> SymMatrix {
    let n = m.nrows();
    SymMatrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub fn eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = to_na(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `−log det A + Tr(S·A)`, or `None` when `A` is not positive definite.
pub fn smooth_objective(a: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<f64> {
    let chol = a.clone().cholesky()?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Some(-logdet + s.component_mul(a).sum())
}

pub fn l1(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn objective(a: &DMatrix<f64>, s: &DMatrix<f64>, alpha: f64) -> Option<f64> {
    smooth_objective(a, s).map(|f| f + alpha * l1(a))
}

fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// ℓ1 norm of the minimum-norm subgradient of the full objective.
pub fn min_subgradient_l1(a: &DMatrix<f64>, g: &DMatrix<f64>, alpha: f64) -> f64 {
    a.iter()
        .zip(g.iter())
        .map(|(&a, &g)| {
            if a > 0.0 {
                (g + alpha).abs()
            } else if a < 0.0 {
                (g - alpha).abs()
            } else {
                (g.abs() - alpha).max(0.0)
            }
        })
        .sum()
}

pub struct OracleResult {
    pub estimate: DMatrix<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Proximal gradient with descent-lemma backtracking, started from
/// `diag(1/(S_ii + α))`, stopped when the minimum subgradient ℓ1 norm falls
/// below `stop_rel·‖A‖₁`. The step never grows back, since near the optimum
/// the descent test cannot see an overshoot through rounding.
pub fn oracle_solve(s: &SymMatrix, alpha: f64, stop_rel: f64, max_iter: usize) -> OracleResult {
    let s = to_na(s);
    let n = s.nrows();
    let mut a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (s[(i, i)] + alpha) } else { 0.0 });
    let mut t: f64 = 1.0;
    for k in 0..max_iter {
        let w = a.clone().cholesky().expect("iterate stays PD").inverse();
        let g = &s - &w;
        if min_subgradient_l1(&a, &g, alpha) < stop_rel * l1(&a) {
            let f = objective(&a, &s, alpha).unwrap();
            return OracleResult {
                estimate: a,
                f,
                iterations: k,
                converged: true,
            };
        }
        let f0 = smooth_objective(&a, &s).unwrap();
        loop {
            let next = (&a - &g * t).map(|x| shrink(x, t * alpha));
            let next = (&next + next.transpose()) * 0.5;
            if let Some(f1) = smooth_objective(&next, &s) {
                let d = &next - &a;
                let model = f0 + g.component_mul(&d).sum() + d.norm_squared() / (2.0 * t);
                if f1 <= model + 1e-13 * f0.abs().max(1.0) {
                    a = next;
                    break;
                }
            }
            t *= 0.5;
            assert!(t > 1e-20, "oracle linesearch failed");
        }
    }
    let f = objective(&a, &s, alpha).unwrap();
    OracleResult {
        estimate: a,
        f,
        iterations: max_iter,
        converged: false,
    }
}

/// Random SPD matrix `QᵀQ/n + shift·I`, `Q` uniform on `[−1, 1)`.
pub fn random_spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    let q = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let m = q.transpose() * &q / n as f64 + DMatrix::identity(n, n) * shift;
    from_na(&m)
}

/// Empirical covariance (1/m normalization) of `m` uniform samples.
pub fn random_covariance(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let y = DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mean = y.row_mean();
    let c = DMatrix::from_fn(m, n, |k, j| y[(k, j)] - mean[j]);
    from_na(&(c.transpose() * &c / m as f64))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circumcircle emptiness of every triangle against every input point.
pub fn delaunay_violations(points: &[[f64; 2]], triangles: &[[usize; 3]], tol: f64) -> usize {
    let mut bad = 0;
    for t in triangles {
        let [a, b, c] = t.map(|k| points[k]);
        // circumcenter by explicit formula
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let sq = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
        let ux = (sq(a) * (b[1] - c[1]) + sq(b) * (c[1] - a[1]) + sq(c) * (a[1] - b[1])) / d;
        let uy = (sq(a) * (c[0] - b[0]) + sq(b) * (a[0] - c[0]) + sq(c) * (b[0] - a[0])) / d;
        let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
        for (k, p) in points.iter().enumerate() {
            if t.contains(&k) {
                continue;
            }
            let d2 = (p[0] - ux).powi(2) + (p[1] - uy).powi(2);
            if d2 < r2 * (1.0 - tol) {
                bad += 1;
            }
        }
    }
    bad
}
