//! Preconditioned iterative soft-thresholding (pISTA).
//!
//! Each iteration restricts the update to the free set, guesses the ℓ1
//! subgradient pattern `𝒢` from the signs of the iterate and the gradient,
//! assembles the t-independent matrices `C` and `B`, and then backtracks
//! over `t` with the closed-form direction
//!
//! ```text
//! D = −A + SoftThreshold(A − t·B, t·C)
//! ```
//!
//! accepting the first `t` for which `A + M ⊙ D` is positive definite and
//! strictly lowers `F`.
//!
//! The iteration loop, linesearch, trace and result types here are shared
//! with the proximal-gradient baseline in [`crate::gista`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, condition_estimate, sym_triple_product, CholeskyFactor, SymMatrix};
use crate::objective::{
    f_total, free_set, gradient, l1_norm, min_subgradient, norms, soft_threshold, Mask, Problem,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("S[{index}][{index}] + alpha = {value} is not positive")]
    NonPositiveDiagonal { index: usize, value: f64 },
    #[error("initial iterate is not positive definite")]
    InitialNotPositiveDefinite,
    #[error("initial iterate is {found}x{found}, problem is {expected}x{expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop once `‖min ∂F(A)‖₁ < stop_rel·‖A‖₁`.
    pub stop_rel: f64,
    pub t_init: f64,
    /// Backtracking factor in `(0, 1)`.
    pub backtrack: f64,
    /// Below this `t` the linesearch switches to the conditioning fallback.
    pub t_floor: f64,
    /// Fallback step is `(fallback_safety / cond(A))²`.
    pub fallback_safety: f64,
    /// Keep one [`IterTrace`] per iterate.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            stop_rel: 1e-2,
            t_init: 1.0,
            backtrack: 0.5,
            t_floor: 1e-4,
            fallback_safety: 0.9,
            trace: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::InvalidConfig(msg.to_string()));
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.t_floor > 0.0) {
            return bad("t_floor must be positive");
        }
        if !(self.stop_rel > 0.0) {
            return bad("stop_rel must be positive");
        }
        if !(self.t_init > 0.0 && self.t_init.is_finite()) {
            return bad("t_init must be positive");
        }
        if !(self.fallback_safety > 0.0) {
            return bad("fallback_safety must be positive");
        }
        Ok(())
    }
}

/// Per-iterate record. Record `k` describes iterate `A⁽ᵏ⁾`; `step_t` and
/// `linesearch_trials` describe the step that produced it (zero for `k = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterTrace {
    pub iter: usize,
    pub f_total: f64,
    pub min_subgrad_l1: f64,
    pub min_subgrad_fro: f64,
    pub nnz: usize,
    pub step_t: f64,
    pub linesearch_trials: usize,
    /// Milliseconds since the solve started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Criterion,
    MaxIter,
    LinesearchStall,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Criterion => "criterion",
            Termination::MaxIter => "max_iter",
            Termination::LinesearchStall => "linesearch_stall",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub estimate: SymMatrix,
    /// Empty unless [`SolverConfig::trace`] is set.
    pub traces: Vec<IterTrace>,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
    /// Record of the final iterate, kept regardless of `trace`.
    pub last: IterTrace,
}

/// One accepted step, handed to solve observers.
pub struct StepEvent<'a> {
    pub iter: usize,
    pub current: &'a SymMatrix,
    pub gradient: &'a SymMatrix,
    pub mask: &'a Mask,
    /// pISTA's `𝒢` guess; `None` for the baseline.
    pub sign_estimate: Option<&'a SymMatrix>,
    pub next: &'a SymMatrix,
    pub step_t: f64,
    pub f_before: f64,
    pub f_after: f64,
}

pub type Observer<'o> = &'o mut dyn FnMut(&StepEvent<'_>);

/// `A⁰ = diag(1 / (S[i][i] + α))`.
pub fn init_diagonal(prob: &Problem) -> Result<SymMatrix, SolveError> {
    let diag = prob
        .s()
        .diag()
        .into_iter()
        .enumerate()
        .map(|(index, s)| {
            let value = s + prob.alpha();
            if value > 0.0 {
                Ok(1.0 / value)
            } else {
                Err(SolveError::NonPositiveDiagonal { index, value })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SymMatrix::from_diag(&diag))
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Predicted subgradient of `‖A + D‖₁`: the sign of nonzero entries, and the
/// opposite sign of the gradient where the iterate vanishes.
pub fn g_sign_approx(a: &SymMatrix, g: &SymMatrix) -> SymMatrix {
    a.zip_map(g, |a, g| if a != 0.0 { sign(a) } else { -sign(g) })
}

/// Diagonal of `α·(A ⊗ A)` as seen by entry `(i, j)`.
pub fn c_matrix(a: &SymMatrix, alpha: f64) -> SymMatrix {
    let d = a.diag();
    SymMatrix::from_fn(a.n(), |i, j| {
        if i == j {
            alpha * d[i] * d[i]
        } else {
            let aij = a.get(i, j);
            alpha * (d[i] * d[j] + aij * aij)
        }
    })
}

/// `B = A(g⊙M)A + α·A(𝒢⊙M)A − C⊙(𝒢⊙M)`.
///
/// The two triple products share their outer factors and are evaluated as
/// the single product `A((g + α𝒢)⊙M)A`.
pub fn b_matrix(
    a: &SymMatrix,
    g: &SymMatrix,
    gsign: &SymMatrix,
    mask: &Mask,
    c: &SymMatrix,
    alpha: f64,
) -> SymMatrix {
    let inner = mask.apply(&g.zip_map(gsign, |g, s| g + alpha * s));
    let outer = sym_triple_product(a, &inner);
    let masked_sign = mask.apply(gsign);
    let correction = c.zip_map(&masked_sign, |c, s| c * s);
    outer.zip_map(&correction, |x, y| x - y)
}

/// `D = −A + SoftThreshold(A − t·B, t·C)`, entrywise.
pub fn direction(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix, t: f64) -> SymMatrix {
    let n = a.n();
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .zip(c.as_slice())
        .map(|((&a, &b), &c)| -a + soft_threshold(a - t * b, t * c))
        .collect();
    SymMatrix::from_row_major(n, data).expect("entrywise map of symmetric inputs")
}

/// Solves the scalar inclusion `0 ∈ x + b + c·𝒯(x + a)`, `c > 0`, where
/// `𝒯` is the set-valued sign map (`𝒯(0) = [−1, 1]`).
pub fn scalar_sign_solve(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    -a + soft_threshold(a - b, c)
}

#[derive(Debug, Clone)]
pub struct LinesearchStep {
    pub t: f64,
    pub next: SymMatrix,
    pub factor: CholeskyFactor,
    pub f_next: f64,
    pub trials: usize,
    /// Accepted at the conditioning fallback step.
    pub fallback: bool,
}

/// No step length passed both acceptance conditions.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("linesearch stalled after {trials} trials")]
pub struct Stall {
    pub trials: usize,
}

/// Backtracking over `t` from `t_init` by `backtrack` until `t < t_floor`,
/// then one try at `(fallback_safety / cond(A))²`.
///
/// `candidate(t)` must return the full next iterate for step length `t`; it
/// is re-evaluated per trial because the direction depends on `t` through
/// the threshold. A trial is accepted iff the candidate factorizes and
/// `F(candidate) < f_curr`.
pub fn linesearch(
    a: &SymMatrix,
    prob: &Problem,
    f_curr: f64,
    cfg: &SolverConfig,
    candidate: impl Fn(f64) -> SymMatrix,
) -> Result<LinesearchStep, Stall> {
    let mut trials = 0;
    let try_step = |t: f64| -> Option<(SymMatrix, CholeskyFactor, f64)> {
        let next = candidate(t);
        let factor = cholesky(&next).ok()?;
        let f_next = f_total(&next, prob, factor.log_det());
        (f_next < f_curr).then_some((next, factor, f_next))
    };

    let mut t = cfg.t_init;
    while t >= cfg.t_floor {
        trials += 1;
        if let Some((next, factor, f_next)) = try_step(t) {
            return Ok(LinesearchStep {
                t,
                next,
                factor,
                f_next,
                trials,
                fallback: false,
            });
        }
        t *= cfg.backtrack;
    }

    let cond = condition_estimate(a).map_err(|_| Stall { trials })?;
    let t_fb = (cfg.fallback_safety / cond).powi(2);
    trials += 1;
    match try_step(t_fb) {
        Some((next, factor, f_next)) => Ok(LinesearchStep {
            t: t_fb,
            next,
            factor,
            f_next,
            trials,
            fallback: true,
        }),
        None => Err(Stall { trials }),
    }
}

/// The t-independent part of one iteration.
pub(crate) struct StepPlan<'a> {
    pub mask: Mask,
    pub sign_estimate: Option<SymMatrix>,
    pub candidate: Box<dyn Fn(f64) -> SymMatrix + 'a>,
}

/// Shared iteration loop: evaluate the iterate, record, test stopping, plan
/// a step, linesearch, repeat.
pub(crate) fn run_solver<'p>(
    prob: &'p Problem,
    a0: Option<&SymMatrix>,
    cfg: &SolverConfig,
    plan: impl for<'a> Fn(&'a SymMatrix, &'a SymMatrix, f64) -> StepPlan<'a>,
    mut observer: Option<Observer<'_>>,
) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    let start = Instant::now();
    let alpha = prob.alpha();

    let mut a = match a0 {
        Some(a0) => {
            if a0.n() != prob.n() {
                return Err(SolveError::DimensionMismatch {
                    expected: prob.n(),
                    found: a0.n(),
                });
            }
            a0.clone()
        }
        None => init_diagonal(prob)?,
    };
    let mut factor = cholesky(&a).map_err(|_| SolveError::InitialNotPositiveDefinite)?;
    let mut f_curr = f_total(&a, prob, factor.log_det());

    let mut traces = Vec::new();
    let mut iter = 0;
    let (mut last_t, mut last_trials) = (0.0, 0);

    let (termination, last) = loop {
        let w = factor.inverse();
        let g = gradient(&w, prob);
        let sub = norms(&min_subgradient(&a, &g, alpha));
        let record = IterTrace {
            iter,
            f_total: f_curr,
            min_subgrad_l1: sub.l1,
            min_subgrad_fro: sub.fro,
            nnz: norms(&a).nnz,
            step_t: last_t,
            linesearch_trials: last_trials,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        if cfg.trace {
            traces.push(record.clone());
        }

        if sub.l1 == 0.0 || sub.l1 < cfg.stop_rel * l1_norm(&a) {
            break (Termination::Criterion, record);
        }
        if iter >= cfg.max_iter {
            break (Termination::MaxIter, record);
        }

        let step_plan = plan(&a, &g, alpha);
        if step_plan.mask.is_empty() {
            break (Termination::Criterion, record);
        }
        let step = match linesearch(&a, prob, f_curr, cfg, &*step_plan.candidate) {
            Ok(step) => step,
            Err(_) => break (Termination::LinesearchStall, record),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&StepEvent {
                iter,
                current: &a,
                gradient: &g,
                mask: &step_plan.mask,
                sign_estimate: step_plan.sign_estimate.as_ref(),
                next: &step.next,
                step_t: step.t,
                f_before: f_curr,
                f_after: step.f_next,
            });
        }
        drop(step_plan);

        a = step.next;
        factor = step.factor;
        f_curr = step.f_next;
        last_t = step.t;
        last_trials = step.trials;
        iter += 1;
    };

    Ok(SolveResult {
        estimate: a,
        traces,
        converged: termination == Termination::Criterion,
        iterations: iter,
        termination,
        last,
    })
}

fn pista_plan<'a>(a: &'a SymMatrix, g: &'a SymMatrix, alpha: f64) -> StepPlan<'a> {
    let mask = free_set(a, g, alpha);
    let gsign = g_sign_approx(a, g);
    let c = c_matrix(a, alpha);
    let b = b_matrix(a, g, &gsign, &mask, &c, alpha);
    let cand_mask = mask.clone();
    StepPlan {
        mask,
        sign_estimate: Some(gsign),
        candidate: Box::new(move |t| {
            let d = cand_mask.apply(&direction(a, &b, &c, t));
            a.zip_map(&d, |x, y| x + y)
        }),
    }
}

/// Runs pISTA from `a0` (default [`init_diagonal`]).
pub fn solve_pista(
    prob: &Problem,
    a0: Option<&SymMatrix>,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    run_solver(prob, a0, cfg, pista_plan, None)
}

/// [`solve_pista`] with a callback on every accepted step.
pub fn solve_pista_observed(
    prob: &Problem,
    a0: Option<&SymMatrix>,
    cfg: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveResult, SolveError> {
    run_solver(prob, a0, cfg, pista_plan, Some(observer))
}
