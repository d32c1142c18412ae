//! Depth-m Anderson acceleration of the vector Newton iteration, with the
//! dense least-squares solve for the mixing coefficients.
//!
//! Depth 0 is the unaccelerated iteration. At depth m the next iterate is
//! `x_{k+1} = x_k + w_{k+1} - (E_k + F_k) gamma_k`, where the columns of
//! `E_k` hold recent iterate differences, the columns of `F_k` hold recent
//! update-step differences, and `gamma_k` minimises
//! `||w_{k+1} - F_k gamma||_2`.

pub mod linalg;

pub use linalg::{lu_solve, qr_least_squares, Matrix, SingularMatrix};

use crate::expr::pow_int;
use crate::solvers::newton_anderson_step;
use std::collections::VecDeque;

/// A vector residual with an analytic Jacobian.
pub trait VectorProblem {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, x: &[f64]) -> Matrix;
}

/// The monomial test family `f_i(x) = ((A x - b)_i)^{p_i}`: the system is
/// solved by `x = A^{-1} b`, where the root of component i has multiplicity
/// `p_i`.
#[derive(Debug, Clone)]
pub struct MonomialSystem {
    a: Matrix,
    b: Vec<f64>,
    exponents: Vec<i64>,
}

impl MonomialSystem {
    pub fn new(a: Matrix, b: Vec<f64>, exponents: Vec<i64>) -> Self {
        assert_eq!(a.rows, a.cols, "A must be square");
        assert_eq!(a.rows, b.len());
        assert_eq!(a.rows, exponents.len());
        assert!(exponents.iter().all(|&p| p >= 1), "exponents must be >= 1");
        MonomialSystem { a, b, exponents }
    }

    fn linear_residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.b.len();
        let mut u = vec![0.0; n];
        for (i, ui) in u.iter_mut().enumerate() {
            let mut s = -self.b[i];
            for (j, xj) in x.iter().enumerate() {
                s += self.a[(i, j)] * xj;
            }
            *ui = s;
        }
        u
    }
}

impl VectorProblem for MonomialSystem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let u = self.linear_residual(x);
        for i in 0..u.len() {
            out[i] = pow_int(u[i], self.exponents[i]);
        }
    }

    fn jacobian(&self, x: &[f64]) -> Matrix {
        let n = self.dim();
        let u = self.linear_residual(x);
        let mut j = Matrix::zeros(n, n);
        for i in 0..n {
            let p = self.exponents[i];
            let factor = p as f64 * pow_int(u[i], p - 1);
            for col in 0..n {
                j[(i, col)] = factor * self.a[(i, col)];
            }
        }
        j
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AndersonConfig {
    /// History depth m >= 0; 0 is plain Newton.
    pub depth: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AndersonConfig {
    fn default() -> Self {
        AndersonConfig {
            depth: 1,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorStatus {
    Converged,
    MaxIterReached,
    SingularJacobian,
    DivergedNonfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorEvent {
    /// Rank-deficient history: trailing columns dropped from the solve.
    RankDeficient { k: usize, used: usize, of: usize },
    /// Scalar fast path denominator vanished; plain Newton step taken.
    NewtonFallback { k: usize },
}

#[derive(Debug, Clone)]
pub struct VectorTrace {
    pub iterates: Vec<Vec<f64>>,
    pub status: VectorStatus,
    pub iterations_to_converge: Option<usize>,
    pub events: Vec<VectorEvent>,
}

/// Rolling Anderson state: the current iterate plus the last m+1 iterates and
/// update steps; `E_k`/`F_k` are assembled on demand with `min(k, m)` columns.
#[derive(Debug, Clone)]
pub struct AndersonState {
    pub m: usize,
    x_history: VecDeque<Vec<f64>>,
    w_history: VecDeque<Vec<f64>>,
}

impl AndersonState {
    pub fn new(m: usize) -> Self {
        AndersonState {
            m,
            x_history: VecDeque::new(),
            w_history: VecDeque::new(),
        }
    }

    pub fn push_x(&mut self, x: Vec<f64>) {
        self.x_history.push_front(x);
        self.x_history.truncate(self.m + 1);
    }

    pub fn push_w(&mut self, w: Vec<f64>) {
        self.w_history.push_front(w);
        self.w_history.truncate(self.m + 1);
    }

    /// Effective depth available right now.
    pub fn effective_depth(&self) -> usize {
        self.m
            .min(self.x_history.len().saturating_sub(1))
            .min(self.w_history.len().saturating_sub(1))
    }

    /// Difference columns, newest first: column j of F is
    /// `w_{k+1-j} - w_{k-j}`, column j of E is `x_{k-j} - x_{k-1-j}`.
    fn difference_columns(&self, n: usize, mk: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut e_cols = Vec::with_capacity(mk);
        let mut f_cols = Vec::with_capacity(mk);
        for j in 0..mk {
            let mut fc = vec![0.0; n];
            let mut ec = vec![0.0; n];
            for i in 0..n {
                fc[i] = self.w_history[j][i] - self.w_history[j + 1][i];
                ec[i] = self.x_history[j][i] - self.x_history[j + 1][i];
            }
            f_cols.push(fc);
            e_cols.push(ec);
        }
        (e_cols, f_cols)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// The Newton update `w = -J^{-1} f`, stationary at an exact root.
fn vector_newton_update<P: VectorProblem>(
    problem: &P,
    x: &[f64],
    r: &[f64],
) -> Result<Vec<f64>, VectorStatus> {
    if r.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; x.len()]);
    }
    let j = problem.jacobian(x);
    let neg_r: Vec<f64> = r.iter().map(|&v| -v).collect();
    lu_solve(&j, &neg_r).map_err(|_| VectorStatus::SingularJacobian)
}

/// Mixing coefficients: `argmin ||w_next - F gamma||_2` over gamma, via QR
/// with trailing-column truncation on rank deficiency.
pub fn least_squares_gamma(w_next: &[f64], f_cols: &[Vec<f64>]) -> (Vec<f64>, usize) {
    let f = Matrix::from_cols(w_next.len(), f_cols);
    qr_least_squares(&f, w_next)
}

/// Run depth-m Anderson acceleration of the Newton iteration from `x0`.
pub fn anderson_iterate<P: VectorProblem>(
    problem: &P,
    x0: &[f64],
    config: AndersonConfig,
) -> VectorTrace {
    let n = problem.dim();
    assert_eq!(x0.len(), n);
    let mut trace = VectorTrace {
        iterates: vec![x0.to_vec()],
        status: VectorStatus::MaxIterReached,
        iterations_to_converge: None,
        events: Vec::new(),
    };
    let mut state = AndersonState::new(config.depth);
    state.push_x(x0.to_vec());

    let mut r = vec![0.0; n];
    problem.residual(x0, &mut r);

    // first update is plain Newton
    let w1 = match vector_newton_update(problem, x0, &r) {
        Ok(w) => w,
        Err(status) => {
            trace.status = status;
            return trace;
        }
    };
    let x1: Vec<f64> = x0.iter().zip(&w1).map(|(a, b)| a + b).collect();
    state.push_w(w1.clone());
    match record_and_test(problem, &mut trace, x0, x1, config.tol, 1, &mut r) {
        StepOutcome::Stop => return trace,
        StepOutcome::Continue => {}
    }
    state.push_x(trace.iterates.last().unwrap().clone());

    for k in 2..=config.max_iter {
        let x = trace.iterates.last().unwrap().clone();
        let w = match vector_newton_update(problem, &x, &r) {
            Ok(w) => w,
            Err(status) => {
                trace.status = status;
                return trace;
            }
        };
        state.push_w(w.clone());
        let mk = state.effective_depth();
        let x_new: Vec<f64> = if mk == 0 {
            x.iter().zip(&w).map(|(a, b)| a + b).collect()
        } else if n == 1 && mk == 1 {
            // scalar reduction: the optimisation collapses to the same
            // update as the scalar Newton-Anderson kernel
            let x_prev = state.x_history[1][0];
            let w_prev = state.w_history[1][0];
            match newton_anderson_step(x[0], x_prev, w[0], w_prev) {
                Ok((xn, _p)) => vec![xn],
                Err(_) => {
                    trace.events.push(VectorEvent::NewtonFallback { k });
                    vec![x[0] + w[0]]
                }
            }
        } else {
            let (e_cols, f_cols) = state.difference_columns(n, mk);
            let (gamma, used) = least_squares_gamma(&w, &f_cols);
            if used < mk {
                trace
                    .events
                    .push(VectorEvent::RankDeficient { k, used, of: mk });
            }
            let mut xn = vec![0.0; n];
            for i in 0..n {
                let mut corr = 0.0;
                for j in 0..mk {
                    corr += (e_cols[j][i] + f_cols[j][i]) * gamma[j];
                }
                xn[i] = x[i] + w[i] - corr;
            }
            xn
        };
        match record_and_test(problem, &mut trace, &x, x_new, config.tol, k, &mut r) {
            StepOutcome::Stop => return trace,
            StepOutcome::Continue => {}
        }
        state.push_x(trace.iterates.last().unwrap().clone());
    }
    trace
}

enum StepOutcome {
    Continue,
    Stop,
}

fn record_and_test<P: VectorProblem>(
    problem: &P,
    trace: &mut VectorTrace,
    x_old: &[f64],
    x_new: Vec<f64>,
    tol: f64,
    k: usize,
    r: &mut [f64],
) -> StepOutcome {
    if x_new.iter().any(|v| !v.is_finite()) {
        trace.iterates.push(x_new);
        trace.status = VectorStatus::DivergedNonfinite;
        return StepOutcome::Stop;
    }
    let step: Vec<f64> = x_new.iter().zip(x_old).map(|(a, b)| a - b).collect();
    trace.iterates.push(x_new.clone());
    if norm2(&step) < tol {
        trace.status = VectorStatus::Converged;
        trace.iterations_to_converge = Some(k);
        return StepOutcome::Stop;
    }
    problem.residual(&x_new, r);
    if r.iter().any(|v| !v.is_finite()) {
        trace.status = VectorStatus::DivergedNonfinite;
        return StepOutcome::Stop;
    }
    // exact residual zero at a nonsingular Jacobian certifies the answer
    if r.iter().all(|&v| v == 0.0) {
        let j = problem.jacobian(&x_new);
        if lu_solve(&j, &vec![0.0; x_new.len()]).is_ok() {
            trace.status = VectorStatus::Converged;
            trace.iterations_to_converge = Some(k);
            return StepOutcome::Stop;
        }
    }
    StepOutcome::Continue
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(exponents: Vec<i64>) -> MonomialSystem {
        MonomialSystem::new(
            Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]),
            vec![1.0, 2.0],
            exponents,
        )
    }

    const X_STAR: [f64; 2] = [0.2, 0.6];

    #[test]
    fn jacobian_matches_finite_differences() {
        let sys = two_by_two(vec![2, 3]);
        let x = [0.3, -0.4];
        let j = sys.jacobian(&x);
        let h = 1e-6;
        for col in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let (mut rp, mut rm) = ([0.0; 2], [0.0; 2]);
            sys.residual(&xp, &mut rp);
            sys.residual(&xm, &mut rm);
            for row in 0..2 {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!(
                    (j[(row, col)] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                    "J[{row},{col}] = {} vs fd {}",
                    j[(row, col)],
                    fd
                );
            }
        }
    }

    #[test]
    fn affine_system_solves_in_one_newton_step() {
        let sys = two_by_two(vec![1, 1]);
        let trace = anderson_iterate(
            &sys,
            &[0.5, 0.5],
            AndersonConfig {
                depth: 0,
                ..Default::default()
            },
        );
        assert_eq!(trace.status, VectorStatus::Converged);
        let x1 = &trace.iterates[1];
        assert!((x1[0] - X_STAR[0]).abs() < 1e-12);
        assert!((x1[1] - X_STAR[1]).abs() < 1e-12);
    }

    #[test]
    fn two_distinct_exponents_depth_two_exact_after_first_full_step() {
        let sys = two_by_two(vec![2, 3]);
        let trace = anderson_iterate(
            &sys,
            &[0.0, 0.0],
            AndersonConfig {
                depth: 2,
                ..Default::default()
            },
        );
        // x_0, x_1 (newton), x_2 (depth 1), x_3 = first step with m_k = m
        let x3 = &trace.iterates[3];
        let err = (x3[0] - X_STAR[0]).abs().max((x3[1] - X_STAR[1]).abs());
        assert!(err <= 1e-10, "first full optimisation step error {err}");
    }

    #[test]
    fn one_distinct_exponent_depth_one_exact_after_first_step() {
        for (exps, x0) in [
            (vec![2, 2], [0.0, 0.0]),
            (vec![3, 3], [0.0, 0.0]),
            (vec![2, 2], [1.0, 1.0]),
        ] {
            let sys = two_by_two(exps.clone());
            let trace = anderson_iterate(
                &sys,
                &x0,
                AndersonConfig {
                    depth: 1,
                    ..Default::default()
                },
            );
            let x2 = &trace.iterates[2];
            let err = (x2[0] - X_STAR[0]).abs().max((x2[1] - X_STAR[1]).abs());
            assert!(err <= 1e-10, "exponents {exps:?} from {x0:?}: error {err}");
        }
    }

    #[test]
    fn depth_zero_matches_plain_newton_bitwise() {
        let sys = two_by_two(vec![2, 3]);
        let accelerated = anderson_iterate(
            &sys,
            &[0.0, 0.0],
            AndersonConfig {
                depth: 0,
                tol: 1e-10,
                max_iter: 25,
            },
        );
        // plain Newton: replicate the update directly
        let mut x = vec![0.0, 0.0];
        let mut plain = vec![x.clone()];
        for _ in 0..25 {
            let mut r = [0.0; 2];
            sys.residual(&x, &mut r);
            if r.iter().all(|&v| v == 0.0) {
                break;
            }
            let j = sys.jacobian(&x);
            let w = lu_solve(&j, &[-r[0], -r[1]]).unwrap();
            x = vec![x[0] + w[0], x[1] + w[1]];
            plain.push(x.clone());
            let d = ((plain[plain.len() - 1][0] - plain[plain.len() - 2][0]).powi(2)
                + (plain[plain.len() - 1][1] - plain[plain.len() - 2][1]).powi(2))
            .sqrt();
            if d < 1e-10 {
                break;
            }
        }
        assert_eq!(accelerated.iterates.len(), plain.len());
        for (a, b) in accelerated.iterates.iter().zip(&plain) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }

    #[test]
    fn gamma_single_column_identity() {
        let (g, used) = least_squares_gamma(&[1.0, 2.0, -0.5], &[vec![1.0, 2.0, -0.5]]);
        assert_eq!(used, 1);
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_scalar_case_matches_closed_form() {
        // m_k = 1, n = 1: gamma = w_{k+1} / (w_{k+1} - w_k)
        let (w_next, w_prev) = (0.3, 0.5);
        let (g, _) = least_squares_gamma(&[w_next], &[vec![w_next - w_prev]]);
        assert!((g[0] - w_next / (w_next - w_prev)).abs() < 1e-15);
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // exponent 2 with residual away from zero but Jacobian rank collapse:
        // start exactly at the solution of one component only
        let sys = MonomialSystem::new(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            vec![0.0, 1.0],
            vec![2, 1],
        );
        // u = (x0, x1 - 1); at x = (0, 0): u = (0, -1), J row 0 = 2*u0 = 0
        let trace = anderson_iterate(&sys, &[0.0, 0.0], AndersonConfig::default());
        assert_eq!(trace.status, VectorStatus::SingularJacobian);
    }
}
