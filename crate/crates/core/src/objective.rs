//! The GLASSO objective `F(A) = −log det A + Tr(SA) + α‖A‖₁` and the
//! entrywise vocabulary both solvers share.

use crate::linalg::SymMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("penalty weight must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("covariance diagonal entry {index} is negative ({value})")]
    NegativeDiagonal { index: usize, value: f64 },
    #[error("ground truth is {found}x{found}, covariance is {expected}x{expected}")]
    TruthDimension { expected: usize, found: usize },
}

/// One GLASSO instance: empirical covariance `S`, penalty weight `α` and,
/// for synthetic problems, the ground-truth precision used in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    s: SymMatrix,
    alpha: f64,
    truth: Option<SymMatrix>,
}

impl Problem {
    pub fn new(s: SymMatrix, alpha: f64) -> Result<Self, ProblemError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ProblemError::InvalidAlpha(alpha));
        }
        if let Some((index, value)) = s.diag().into_iter().enumerate().find(|(_, d)| !(*d >= 0.0)) {
            return Err(ProblemError::NegativeDiagonal { index, value });
        }
        Ok(Self {
            s,
            alpha,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: SymMatrix) -> Result<Self, ProblemError> {
        if truth.n() != self.s.n() {
            return Err(ProblemError::TruthDimension {
                expected: self.s.n(),
                found: truth.n(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    #[inline]
    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truth(&self) -> Option<&SymMatrix> {
        self.truth.as_ref()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.s.n()
    }
}

/// Symmetric boolean pattern over index pairs.
#[derive(Clone, PartialEq, Eq)]
pub struct Mask {
    n: usize,
    active: Vec<bool>,
}

impl Mask {
    pub fn full(n: usize) -> Self {
        Self {
            n,
            active: vec![true; n * n],
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            active: vec![false; n * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.active[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.active
    }

    pub fn count(&self) -> usize {
        self.active.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.active.iter().any(|&b| b)
    }

    /// `M ⊙ X`: entries outside the mask become exactly zero.
    pub fn apply(&self, x: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, x.n(), "dimension mismatch");
        let data = x
            .as_slice()
            .iter()
            .zip(&self.active)
            .map(|(&v, &on)| if on { v } else { 0.0 })
            .collect();
        SymMatrix::from_row_major(self.n, data).expect("masking preserves symmetry")
    }
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mask {}x{} [", self.n, self.n)?;
        for row in self.active.chunks(self.n) {
            let s: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "  {s}")?;
        }
        write!(f, "]")
    }
}

/// `f(A) = −log det A + Tr(SA)`, with `log det A` supplied by the caller's
/// factorization.
pub fn f_smooth(a: &SymMatrix, prob: &Problem, logdet: f64) -> f64 {
    -logdet + prob.s.dot(a)
}

/// `F(A) = f(A) + α·Σᵢⱼ |A[i][j]|`; the diagonal is penalized.
pub fn f_total(a: &SymMatrix, prob: &Problem, logdet: f64) -> f64 {
    f_smooth(a, prob, logdet) + prob.alpha * l1_norm(a)
}

/// `∇f(A) = S − A⁻¹` given `w = A⁻¹`.
pub fn gradient(w: &SymMatrix, prob: &Problem) -> SymMatrix {
    prob.s.zip_map(w, |s, w| s - w)
}

/// `sign(x)·max(|x| − τ, 0)`.
#[inline]
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Free set `{A ≠ 0} ∪ {|∇f| > α}`. Zero tests are exact: soft-thresholding
/// produces exact zeros and support changes must be seen as such.
pub fn free_set(a: &SymMatrix, g: &SymMatrix, alpha: f64) -> Mask {
    assert_eq!(a.n(), g.n(), "dimension mismatch");
    Mask {
        n: a.n(),
        active: a
            .as_slice()
            .iter()
            .zip(g.as_slice())
            .map(|(&a, &g)| a != 0.0 || g.abs() > alpha)
            .collect(),
    }
}

/// Entrywise minimum-magnitude element of the subdifferential `∂F(A)`.
pub fn min_subgradient(a: &SymMatrix, g: &SymMatrix, alpha: f64) -> SymMatrix {
    a.zip_map(g, |a, g| {
        if a != 0.0 {
            g + alpha * a.signum()
        } else {
            soft_threshold(g, alpha)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    pub l1: f64,
    pub fro: f64,
    pub nnz: usize,
}

/// Entrywise ℓ1, Frobenius, and exact-nonzero count.
pub fn norms(m: &SymMatrix) -> MatrixNorms {
    let mut l1 = 0.0;
    let mut sq = 0.0;
    let mut nnz = 0;
    for &v in m.as_slice() {
        l1 += v.abs();
        sq += v * v;
        if v != 0.0 {
            nnz += 1;
        }
    }
    MatrixNorms {
        l1,
        fro: sq.sqrt(),
        nnz,
    }
}

pub fn l1_norm(m: &SymMatrix) -> f64 {
    m.as_slice().iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky;

    fn worked_s() -> SymMatrix {
        SymMatrix::from_rows(&[vec![1.0, 0.9], vec![0.9, 1.0]]).unwrap()
    }

    fn eval_f(a: &SymMatrix, prob: &Problem) -> (f64, f64) {
        let ld = cholesky(a).unwrap().log_det();
        (f_smooth(a, prob, ld), f_total(a, prob, ld))
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            Problem::new(SymMatrix::identity(2), 0.0),
            Err(ProblemError::InvalidAlpha(_))
        ));
        assert!(matches!(
            Problem::new(SymMatrix::identity(2), f64::NAN),
            Err(ProblemError::InvalidAlpha(_))
        ));
        assert!(matches!(
            Problem::new(SymMatrix::from_diag(&[1.0, -0.1]), 0.5),
            Err(ProblemError::NegativeDiagonal { index: 1, .. })
        ));
        let p = Problem::new(SymMatrix::identity(2), 0.5).unwrap();
        assert!(p.clone().with_truth(SymMatrix::identity(3)).is_err());
        assert!(p.with_truth(SymMatrix::identity(2)).unwrap().truth().is_some());
    }

    #[test]
    fn smooth_objective_examples() {
        let p = Problem::new(SymMatrix::identity(2), 0.5).unwrap();
        assert_eq!(eval_f(&SymMatrix::identity(2), &p).0, 2.0);
        let (f, _) = eval_f(&SymMatrix::from_diag(&[2.0, 2.0]), &p);
        assert!((f - (4.0 - 4f64.ln())).abs() < 1e-14);

        // 4/3 − 2·log(2/3)
        let p = Problem::new(worked_s(), 0.5).unwrap();
        let (f, total) = eval_f(&SymMatrix::from_diag(&[2.0 / 3.0, 2.0 / 3.0]), &p);
        assert!((f - 2.1442635495).abs() < 1e-9, "{f}");
        // + 0.5·(4/3)
        assert!((total - 2.8109302162).abs() < 1e-9, "{total}");
    }

    #[test]
    fn total_objective_examples() {
        let p = Problem::new(SymMatrix::identity(2), 0.5).unwrap();
        assert_eq!(eval_f(&SymMatrix::identity(2), &p).1, 3.0);
        let p = Problem::new(SymMatrix::zeros(2), 1.0).unwrap();
        assert_eq!(eval_f(&SymMatrix::identity(2), &p).1, 2.0);
    }

    #[test]
    fn gradient_examples() {
        let p = Problem::new(SymMatrix::identity(2), 0.5).unwrap();
        assert_eq!(gradient(&SymMatrix::identity(2), &p), SymMatrix::zeros(2));
        let w = cholesky(&SymMatrix::from_diag(&[2.0, 2.0])).unwrap().inverse();
        assert!(gradient(&w, &p).max_abs_diff(&SymMatrix::from_diag(&[0.5, 0.5])) < 1e-15);

        let p = Problem::new(worked_s(), 0.5).unwrap();
        let w = cholesky(&SymMatrix::from_diag(&[2.0 / 3.0, 2.0 / 3.0])).unwrap().inverse();
        let g = gradient(&w, &p);
        let expected = SymMatrix::from_rows(&[vec![-0.5, 0.9], vec![0.9, -0.5]]).unwrap();
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(0.0, 0.3), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    }

    #[test]
    fn free_set_examples() {
        let g = SymMatrix::from_rows(&[vec![0.5, 0.9], vec![0.9, 0.5]]).unwrap();
        let m = free_set(&SymMatrix::identity(2), &g, 0.8);
        assert_eq!(m, Mask::full(2));

        let m = free_set(&SymMatrix::identity(2), &SymMatrix::zeros(2), 0.8);
        assert_eq!(m.as_slice(), &[true, false, false, true]);

        let m = free_set(&SymMatrix::zeros(2), &g, 1.0);
        assert!(m.is_empty());
    }

    #[test]
    fn min_subgradient_examples() {
        let pick = |a: f64, g: f64| {
            min_subgradient(&SymMatrix::from_diag(&[a]), &SymMatrix::from_diag(&[g]), 0.8).get(0, 0)
        };
        assert!((pick(0.0, 0.9) - 0.1).abs() < 1e-15);
        assert_eq!(pick(0.0, 0.5), 0.0);
        assert!((pick(2.0, 0.3) - 1.1).abs() < 1e-15);
        assert!((pick(-2.0, 0.3) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn norms_examples() {
        let r = norms(&SymMatrix::identity(3));
        assert_eq!((r.l1, r.nnz), (3.0, 3));
        assert!((r.fro - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            norms(&SymMatrix::zeros(4)),
            MatrixNorms {
                l1: 0.0,
                fro: 0.0,
                nnz: 0
            }
        );
        let r = norms(&SymMatrix::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).unwrap());
        assert_eq!((r.l1, r.nnz), (6.0, 4));
        assert!((r.fro - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mask_apply_zeroes_outside() {
        let g = SymMatrix::from_rows(&[vec![0.5, 0.9], vec![0.9, 0.5]]).unwrap();
        let m = free_set(&SymMatrix::identity(2), &SymMatrix::zeros(2), 0.8);
        assert_eq!(m.apply(&g), SymMatrix::from_diag(&[0.5, 0.5]));
    }
}
