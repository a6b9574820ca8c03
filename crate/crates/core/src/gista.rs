//! Proximal-gradient baseline: `A⁺ = SoftThreshold(A − t·∇f(A), t·α)`.
//!
//! Uses the same backtracking linesearch, stopping rule and trace schema as
//! pISTA so iteration counts are directly comparable. Step lengths come from
//! plain backtracking; there is no Barzilai–Borwein initialization.

use crate::linalg::SymMatrix;
use crate::objective::{soft_threshold, Mask, Problem};
use crate::pista::{run_solver, Observer, SolveError, SolveResult, SolverConfig, StepPlan};

fn gista_plan<'a>(a: &'a SymMatrix, g: &'a SymMatrix, alpha: f64) -> StepPlan<'a> {
    StepPlan {
        mask: Mask::full(a.n()),
        sign_estimate: None,
        candidate: Box::new(move |t| a.zip_map(g, |a, g| soft_threshold(a - t * g, t * alpha))),
    }
}

pub fn solve_gista(
    prob: &Problem,
    a0: Option<&SymMatrix>,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    run_solver(prob, a0, cfg, gista_plan, None)
}

pub fn solve_gista_observed(
    prob: &Problem,
    a0: Option<&SymMatrix>,
    cfg: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveResult, SolveError> {
    run_solver(prob, a0, cfg, gista_plan, Some(observer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pista::{solve_pista, Termination};

    #[test]
    fn one_dimensional_problem_converges_immediately() {
        let p = Problem::new(SymMatrix::from_diag(&[1.5]), 0.25).unwrap();
        let r = solve_gista(&p, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.estimate.get(0, 0), 1.0 / 1.75);
    }

    #[test]
    fn diagonal_problem_reaches_coordinatewise_minimizer() {
        // start away from the optimum so the solver has to move
        let s = SymMatrix::from_diag(&[0.5, 2.0, 1.0]);
        let p = Problem::new(s, 0.3).unwrap();
        let a0 = SymMatrix::identity(3);
        let cfg = SolverConfig {
            stop_rel: 1e-6,
            ..SolverConfig::default()
        };
        let r = solve_gista(&p, Some(&a0), &cfg).unwrap();
        assert_eq!(r.termination, Termination::Criterion);
        for (i, &sii) in [0.5, 2.0, 1.0].iter().enumerate() {
            assert!((r.estimate.get(i, i) - 1.0 / (sii + 0.3)).abs() < 1e-5);
        }
        assert_eq!(r.last.nnz, 3);
    }

    #[test]
    fn agrees_with_pista_on_worked_instance() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.9], vec![0.9, 1.0]]).unwrap();
        let p = Problem::new(s, 0.5).unwrap();
        let cfg = SolverConfig {
            stop_rel: 1e-8,
            ..SolverConfig::default()
        };
        let a = solve_gista(&p, None, &cfg).unwrap();
        let b = solve_pista(&p, None, &cfg).unwrap();
        assert!(a.converged && b.converged);
        assert!(a.estimate.max_abs_diff(&b.estimate) < 1e-6);
    }
}
