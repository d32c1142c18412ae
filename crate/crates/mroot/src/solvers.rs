//! Scalar rootfinding iterations: Newton, modified Newton, Newton-Anderson,
//! adaptive Newton, secant, and a second-derivative Newton-Raphson variant,
//! all driven by a common trace-producing run loop.
//!
//! Conventions fixed across the crate:
//! - the update step is `w_{k+1} = -f(x_k)/f'(x_k)`;
//! - an "iteration" is one update of `x`; the stopping test
//!   `|x_{k+1} - x_k| < tol` is evaluated after each update;
//! - when `f(x) == 0` exactly, the update step is zero (the iteration is
//!   stationary at an exact root) rather than a 0/0 failure;
//! - a run also stops when an update lands exactly on a simple root
//!   (`f == 0`, `f' != 0`), where the residual certifies the answer.

use crate::expr::{eval_jet, eval_value, Expr, Jet2};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    ModifiedNewton,
    NewtonAnderson,
    AdaptiveNewton,
    Secant,
    HalleyLike,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::ModifiedNewton => "modified-newton",
            Method::NewtonAnderson => "newton-anderson",
            Method::AdaptiveNewton => "adaptive-newton",
            Method::Secant => "secant",
            Method::HalleyLike => "halley-like",
        }
    }
}

/// A rootfinding instance: the function plus optional ground truth used only
/// by diagnostics and by the modified Newton method.
#[derive(Debug, Clone)]
pub struct Problem {
    pub f: Expr,
    pub known_root: Option<f64>,
    pub known_multiplicity: Option<f64>,
}

impl Problem {
    pub fn new(f: Expr) -> Self {
        Problem {
            f,
            known_root: None,
            known_multiplicity: None,
        }
    }

    pub fn with_known_root(mut self, c: f64) -> Self {
        self.known_root = Some(c);
        self
    }

    pub fn with_multiplicity(mut self, p: f64) -> Self {
        self.known_multiplicity = Some(p);
        self
    }
}

/// Gate controlling when the adaptive Newton method re-estimates the
/// multiplicity. The estimate `(x_{k-1} - x_{k-2}) / (2x_{k-1} - x_k - x_{k-2})`
/// equals `1/(1 - rate)`, which reads the multiplicity off a settled linear
/// regime; the gate therefore demands a settled step ratio before trusting it,
/// and (since the formula under-estimates once a factor p > 1 is already
/// applied) never lets the estimate decrease.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveGate {
    /// Relative change between consecutive step ratios below which the rate
    /// counts as stable.
    pub max_rel_change: f64,
    /// Number of consecutive stable ratios required before re-estimating.
    pub stable_window: u32,
    /// Reject candidates that would lower the current estimate.
    pub monotone: bool,
}

impl Default for AdaptiveGate {
    fn default() -> Self {
        AdaptiveGate {
            max_rel_change: 2e-3,
            stable_window: 1,
            monotone: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub method: Method,
    pub x0: f64,
    /// Secant initialisation: `x_{-1} = x0 - secant_offset`.
    pub secant_offset: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub adaptive_gate: AdaptiveGate,
}

impl SolverConfig {
    pub fn new(method: Method, x0: f64) -> Self {
        SolverConfig {
            method,
            x0,
            secant_offset: 1e-3,
            tol: 1e-10,
            max_iter: 500,
            adaptive_gate: AdaptiveGate::default(),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ConfigError::BadTolerance(self.tol));
        }
        if self.max_iter < 1 {
            return Err(ConfigError::BadMaxIter);
        }
        if self.secant_offset == 0.0 || !self.secant_offset.is_finite() {
            return Err(ConfigError::BadSecantOffset(self.secant_offset));
        }
        if !self.x0.is_finite() {
            return Err(ConfigError::BadInitialIterate(self.x0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("max_iter must be at least 1")]
    BadMaxIter,
    #[error("secant offset must be finite and nonzero, got {0}")]
    BadSecantOffset(f64),
    #[error("initial iterate must be finite, got {0}")]
    BadInitialIterate(f64),
    #[error("modified Newton requires Problem::known_multiplicity")]
    MissingMultiplicity,
}

/// How a run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterReached,
    DerivativeZero,
    StepDenominatorZero,
    DomainError,
    DivergedNonfinite,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterReached => "max_iter_reached",
            Status::DerivativeZero => "derivative_zero",
            Status::StepDenominatorZero => "step_denominator_zero",
            Status::DomainError => "domain_error",
            Status::DivergedNonfinite => "diverged_nonfinite",
        }
    }
}

/// One row of an iteration trace. `k = 0` is the initial iterate; for `k >= 1`
/// the row describes the iterate produced by update `k`.
#[derive(Debug, Clone, Copy)]
pub struct Record {
    pub k: usize,
    pub x: f64,
    /// `f(x)`, absent when the iterate left the domain of `f`.
    pub f: Option<f64>,
    /// Newton update step `w_k = -f(x_{k-1})/f'(x_{k-1})` where the method
    /// defines one.
    pub w: Option<f64>,
    /// `|x_k - x_{k-1}|`.
    pub step: Option<f64>,
    /// Multiplicity estimate used to form this iterate (Newton-Anderson and
    /// adaptive Newton).
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEventKind {
    /// Newton-Anderson denominator vanished; a plain Newton step was taken.
    NewtonFallback,
    /// Adaptive multiplicity formula had a zero denominator; estimate held.
    AdaptiveDenominatorZero,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceEvent {
    pub k: usize,
    pub kind: TraceEventKind,
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub records: Vec<Record>,
    pub status: Status,
    /// Count of x-updates performed when the stopping test first passed.
    pub iterations_to_converge: Option<usize>,
    pub events: Vec<TraceEvent>,
}

impl IterationTrace {
    pub fn final_x(&self) -> f64 {
        self.records.last().map(|r| r.x).unwrap_or(f64::NAN)
    }

    pub fn final_p(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.p)
    }

    /// `|x_{k+1} - x_k|` series, indexed from 1.
    pub fn steps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.records.iter().filter_map(|r| r.step.map(|s| (r.k, s)))
    }
}

/// The shared Newton update `w = -f/f'`. Stationary (zero) at an exact root;
/// `DerivativeZero` when `f != 0` but the derivative vanishes exactly.
fn newton_update(fjet: Jet2) -> Result<f64, Status> {
    if fjet.value == 0.0 {
        return Ok(0.0);
    }
    if fjet.d1 == 0.0 {
        return Err(Status::DerivativeZero);
    }
    Ok(-fjet.value / fjet.d1)
}

/// One Newton step from `x`.
pub fn newton_step(fjet: Jet2, x: f64) -> Result<f64, Status> {
    Ok(x + newton_update(fjet)?)
}

/// One modified Newton step `x - p f/f'` with known multiplicity `p`.
pub fn modified_newton_step(fjet: Jet2, x: f64, p: f64) -> Result<f64, Status> {
    Ok(x + p * newton_update(fjet)?)
}

/// Threshold below which the Anderson denominator counts as exactly zero.
/// No relative guard: near-cancellation is where the multiplicity estimate
/// comes from.
pub const NA_DENOMINATOR_GUARD: f64 = 1e-300;

/// One Newton-Anderson update. Given the two latest iterates and update
/// steps, returns the accelerated iterate and the multiplicity estimate
/// `p_k = (x_k - x_{k-1})/(w_k - w_{k+1})`, oriented so that `p_k -> p` (the
/// iterate is `x_k + p_k w_{k+1}`).
pub fn newton_anderson_step(
    x_k: f64,
    x_km1: f64,
    w_kp1: f64,
    w_k: f64,
) -> Result<(f64, f64), Status> {
    if (w_kp1 - w_k).abs() < NA_DENOMINATOR_GUARD {
        return Err(Status::StepDenominatorZero);
    }
    let p_k = (x_k - x_km1) / (w_k - w_kp1);
    Ok((x_k + p_k * w_kp1, p_k))
}

/// One step of the second-derivative Newton-Raphson variant
/// `x - f f' / ((f')^2 - f f'')`.
pub fn halley_like_step(fjet: Jet2, x: f64) -> Result<f64, Status> {
    if fjet.value == 0.0 {
        return Ok(x);
    }
    if fjet.d1 == 0.0 {
        // zero step at a non-root would be a spurious fixed point
        return Err(Status::DerivativeZero);
    }
    let den = fjet.d1 * fjet.d1 - fjet.value * fjet.d2;
    if den == 0.0 {
        return Err(Status::StepDenominatorZero);
    }
    Ok(x - fjet.value * fjet.d1 / den)
}

/// Outcome of the post-update bookkeeping shared by the jet-based loops.
enum Advance {
    Continue(Jet2),
    Stop(Status),
}

struct RunState {
    records: Vec<Record>,
    events: Vec<TraceEvent>,
    tol: f64,
}

impl RunState {
    fn start(f: &Expr, x0: f64, tol: f64) -> (Self, Option<Jet2>) {
        let mut st = RunState {
            records: Vec::new(),
            events: Vec::new(),
            tol,
        };
        match eval_jet(f, x0) {
            Ok(j) => {
                st.push(0, x0, Some(j.value), None, None, None);
                (st, Some(j))
            }
            Err(_) => {
                st.push(0, x0, None, None, None, None);
                (st, None)
            }
        }
    }

    fn push(
        &mut self,
        k: usize,
        x: f64,
        f: Option<f64>,
        w: Option<f64>,
        step: Option<f64>,
        p: Option<f64>,
    ) {
        self.records.push(Record {
            k,
            x,
            f,
            w,
            step,
            p,
        });
    }

    /// Record iterate `k`, run the stopping tests, and evaluate the jet for
    /// the next update.
    fn advance(
        &mut self,
        f: &Expr,
        k: usize,
        x_old: f64,
        x_new: f64,
        w: Option<f64>,
        p: Option<f64>,
    ) -> Advance {
        if !x_new.is_finite() {
            self.push(k, x_new, None, w, None, p);
            return Advance::Stop(Status::DivergedNonfinite);
        }
        let step = (x_new - x_old).abs();
        let jet = match eval_jet(f, x_new) {
            Ok(j) => j,
            Err(_) => {
                self.push(k, x_new, None, w, Some(step), p);
                return Advance::Stop(Status::DomainError);
            }
        };
        self.push(k, x_new, Some(jet.value), w, Some(step), p);
        if step < self.tol {
            return Advance::Stop(Status::Converged);
        }
        // landed exactly on a simple root: the residual certifies convergence
        if jet.value == 0.0 && jet.d1 != 0.0 {
            return Advance::Stop(Status::Converged);
        }
        if !jet.is_finite() {
            return Advance::Stop(Status::DivergedNonfinite);
        }
        Advance::Continue(jet)
    }

    fn finish(self, status: Status, converged_at: Option<usize>) -> IterationTrace {
        IterationTrace {
            records: self.records,
            status,
            iterations_to_converge: if status == Status::Converged {
                converged_at
            } else {
                None
            },
            events: self.events,
        }
    }
}

fn run_step_kernel<F>(problem: &Problem, config: &SolverConfig, kernel: F) -> IterationTrace
where
    F: Fn(Jet2, f64) -> Result<f64, Status>,
{
    let (mut st, jet0) = RunState::start(&problem.f, config.x0, config.tol);
    let Some(mut jet) = jet0 else {
        return st.finish(Status::DomainError, None);
    };
    let mut x = config.x0;
    for k in 1..=config.max_iter {
        let x_new = match kernel(jet, x) {
            Ok(v) => v,
            Err(status) => return st.finish(status, None),
        };
        // the kernels apply x + (factor * w); the trace reports the raw step
        let w = newton_update(jet).ok();
        match st.advance(&problem.f, k, x, x_new, w, None) {
            Advance::Continue(j) => {
                x = x_new;
                jet = j;
            }
            Advance::Stop(status) => return st.finish(status, Some(k)),
        }
    }
    st.finish(Status::MaxIterReached, None)
}

fn newton_anderson_run(problem: &Problem, config: &SolverConfig) -> IterationTrace {
    let (mut st, jet0) = RunState::start(&problem.f, config.x0, config.tol);
    let Some(jet) = jet0 else {
        return st.finish(Status::DomainError, None);
    };
    // first update is a plain Newton step
    let w1 = match newton_update(jet) {
        Ok(w) => w,
        Err(status) => return st.finish(status, None),
    };
    let x1 = config.x0 + w1;
    let mut jet = match st.advance(&problem.f, 1, config.x0, x1, Some(w1), None) {
        Advance::Continue(j) => j,
        Advance::Stop(status) => return st.finish(status, Some(1)),
    };
    let (mut x_prev, mut x, mut w_prev) = (config.x0, x1, w1);
    for k in 2..=config.max_iter {
        let w = match newton_update(jet) {
            Ok(w) => w,
            Err(status) => return st.finish(status, None),
        };
        let (x_new, p) = match newton_anderson_step(x, x_prev, w, w_prev) {
            Ok((xn, p)) => (xn, Some(p)),
            Err(_) => {
                // degenerate denominator: take the plain Newton step; the
                // step test then decides whether this counts as converged
                st.events.push(TraceEvent {
                    k,
                    kind: TraceEventKind::NewtonFallback,
                });
                (x + w, None)
            }
        };
        match st.advance(&problem.f, k, x, x_new, Some(w), p) {
            Advance::Continue(j) => {
                x_prev = x;
                x = x_new;
                w_prev = w;
                jet = j;
            }
            Advance::Stop(status) => return st.finish(status, Some(k)),
        }
    }
    st.finish(Status::MaxIterReached, None)
}

/// Adaptive Newton: `x_{k+1} = x_k - p_k f/f'` with `p_0 = p_1 = 1` and
/// `p_k = (x_{k-1} - x_{k-2})/(2x_{k-1} - x_k - x_{k-2})` re-estimated when
/// the configured gate judges the convergence rate stable.
pub fn adaptive_newton_run(problem: &Problem, config: &SolverConfig) -> IterationTrace {
    let gate = config.adaptive_gate;
    let (mut st, jet0) = RunState::start(&problem.f, config.x0, config.tol);
    let Some(mut jet) = jet0 else {
        return st.finish(Status::DomainError, None);
    };
    let mut x = config.x0;
    let mut p = 1.0;
    let mut prev_ratio: Option<f64> = None;
    let mut stable_run: u32 = 0;
    for k in 1..=config.max_iter {
        let w = match newton_update(jet) {
            Ok(w) => w,
            Err(status) => return st.finish(status, None),
        };
        if st.records.len() >= 3 {
            let n = st.records.len();
            let (xk, xkm1, xkm2) = (
                st.records[n - 1].x,
                st.records[n - 2].x,
                st.records[n - 3].x,
            );
            let ratio = if xkm1 != xkm2 {
                Some((xk - xkm1).abs() / (xkm1 - xkm2).abs())
            } else {
                None
            };
            let stable = match (ratio, prev_ratio) {
                (Some(r), Some(pr)) if pr > 0.0 => (r - pr).abs() < gate.max_rel_change * pr,
                _ => false,
            };
            stable_run = if stable { stable_run + 1 } else { 0 };
            if stable_run >= gate.stable_window {
                let den = 2.0 * xkm1 - xk - xkm2;
                if den == 0.0 {
                    st.events.push(TraceEvent {
                        k,
                        kind: TraceEventKind::AdaptiveDenominatorZero,
                    });
                } else {
                    let cand = (xkm1 - xkm2) / den;
                    let floor = if gate.monotone { p } else { 1.0 };
                    if cand >= floor {
                        p = cand;
                    }
                }
            }
            if let Some(r) = ratio {
                prev_ratio = Some(r);
            }
        }
        let x_new = x + p * w;
        match st.advance(&problem.f, k, x, x_new, Some(w), Some(p)) {
            Advance::Continue(j) => {
                x = x_new;
                jet = j;
            }
            Advance::Stop(status) => return st.finish(status, Some(k)),
        }
    }
    st.finish(Status::MaxIterReached, None)
}

/// Secant iteration seeded with `x_{-1} = x0 - secant_offset`.
pub fn secant_run(problem: &Problem, config: &SolverConfig) -> IterationTrace {
    let mut st = RunState {
        records: Vec::new(),
        events: Vec::new(),
        tol: config.tol,
    };
    let x0 = config.x0;
    let xm1 = x0 - config.secant_offset;
    let f0 = match eval_value(&problem.f, x0) {
        Ok(v) => v,
        Err(_) => {
            st.push(0, x0, None, None, None, None);
            return st.finish(Status::DomainError, None);
        }
    };
    st.push(0, x0, Some(f0), None, None, None);
    let fm1 = match eval_value(&problem.f, xm1) {
        Ok(v) => v,
        Err(_) => return st.finish(Status::DomainError, None),
    };
    let (mut x_prev, mut x, mut f_prev, mut fx) = (xm1, x0, fm1, f0);
    let mut last_slope: Option<f64> = None;
    for k in 1..=config.max_iter {
        let denom = fx - f_prev;
        if denom == 0.0 {
            // f-values coincide: accept the iterate when the residual is
            // negligible against the best slope estimate we have, else fail
            let slope_ok = last_slope
                .map(|s| fx.abs() <= config.tol * s.abs())
                .unwrap_or(false);
            if fx == 0.0 || slope_ok {
                return st.finish(Status::Converged, Some(k - 1));
            }
            return st.finish(Status::StepDenominatorZero, None);
        }
        if x != x_prev {
            last_slope = Some(denom / (x - x_prev));
        }
        let x_new = x - fx * (x - x_prev) / denom;
        if !x_new.is_finite() {
            st.push(k, x_new, None, None, None, None);
            return st.finish(Status::DivergedNonfinite, None);
        }
        let step = (x_new - x).abs();
        let f_new = match eval_value(&problem.f, x_new) {
            Ok(v) => v,
            Err(_) => {
                st.push(k, x_new, None, None, Some(step), None);
                return st.finish(Status::DomainError, None);
            }
        };
        st.push(k, x_new, Some(f_new), None, Some(step), None);
        if step < config.tol || f_new == 0.0 {
            return st.finish(Status::Converged, Some(k));
        }
        if !f_new.is_finite() {
            return st.finish(Status::DivergedNonfinite, None);
        }
        x_prev = x;
        f_prev = fx;
        x = x_new;
        fx = f_new;
    }
    st.finish(Status::MaxIterReached, None)
}

/// Run the configured method on the problem, producing a full trace.
pub fn run(problem: &Problem, config: &SolverConfig) -> Result<IterationTrace, ConfigError> {
    config.validate()?;
    Ok(match config.method {
        Method::Newton => run_step_kernel(problem, config, newton_step),
        Method::ModifiedNewton => {
            let p = problem
                .known_multiplicity
                .ok_or(ConfigError::MissingMultiplicity)?;
            run_step_kernel(problem, config, move |jet, x| {
                modified_newton_step(jet, x, p)
            })
        }
        Method::HalleyLike => run_step_kernel(problem, config, halley_like_step),
        Method::NewtonAnderson => newton_anderson_run(problem, config),
        Method::AdaptiveNewton => adaptive_newton_run(problem, config),
        Method::Secant => secant_run(problem, config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn problem(src: &str) -> Problem {
        Problem::new(parse(src).unwrap())
    }

    fn jet_at(src: &str, x: f64) -> Jet2 {
        eval_jet(&parse(src).unwrap(), x).unwrap()
    }

    #[test]
    fn newton_step_examples() {
        // one-step exact on monic linear
        assert_eq!(newton_step(jet_at("x-5", 0.0), 0.0).unwrap(), 5.0);
        // already at the root
        assert_eq!(newton_step(jet_at("x", 0.0), 0.0).unwrap(), 0.0);
        // multiplicity 2: step covers half the error
        assert_eq!(newton_step(jet_at("(x-1)^2", 2.0), 2.0).unwrap(), 1.5);
    }

    #[test]
    fn newton_step_zero_derivative() {
        let j = Jet2 {
            value: 2.0,
            d1: 0.0,
            d2: 1.0,
        };
        assert_eq!(newton_step(j, 1.0), Err(Status::DerivativeZero));
    }

    #[test]
    fn modified_newton_one_step_on_pure_power() {
        for p in [2.0, 3.0, 7.0] {
            let src = format!("(x-2)^{p}");
            let j = jet_at(&src, 3.0);
            let x1 = modified_newton_step(j, 3.0, p).unwrap();
            assert!((x1 - 2.0).abs() <= 1e-14, "p={p} gave {x1}");
        }
    }

    #[test]
    fn modified_newton_p1_is_newton() {
        let j = jet_at("(x^2-1)^2*log(x)", 0.8);
        assert_eq!(
            modified_newton_step(j, 0.8, 1.0).unwrap(),
            newton_step(j, 0.8).unwrap()
        );
    }

    #[test]
    fn halley_like_one_step_on_pure_power() {
        // the update equals x + e on (x-c)^p: the p(p-1) term cancels
        for p in [2.0, 3.0, 7.0] {
            let src = format!("(x-2)^{p}");
            let x1 = halley_like_step(jet_at(&src, 3.0), 3.0).unwrap();
            assert!((x1 - 2.0).abs() <= 1e-14, "p={p} gave {x1}");
        }
    }

    #[test]
    fn secant_plateau_is_denominator_failure() {
        // f constant: f(x0) == f(x_{-1}) with no residual progress
        let trace = run(&problem("2"), &SolverConfig::new(Method::Secant, 1.0)).unwrap();
        assert_eq!(trace.status, Status::StepDenominatorZero);
        assert!(trace.iterations_to_converge.is_none());
    }

    #[test]
    fn modified_newton_requires_multiplicity() {
        let cfg = SolverConfig::new(Method::ModifiedNewton, 0.8);
        let err = run(&problem("(x-1)^2"), &cfg).err();
        assert_eq!(err, Some(ConfigError::MissingMultiplicity));
    }

    #[test]
    fn na_step_pure_power_estimates_multiplicity() {
        // (x-c)^2 from x0 = c + 0.5: w1 = -0.25, x1 = c + 0.25, w2 = -0.125
        let c = 1.0;
        let (x2, p1) = newton_anderson_step(c + 0.25, c + 0.5, -0.125, -0.25).unwrap();
        assert!((p1 - 2.0).abs() < 1e-12);
        assert!((x2 - c).abs() < 1e-12);
    }

    #[test]
    fn na_step_denominator_guard() {
        assert_eq!(
            newton_anderson_step(1.0, 0.5, -0.25, -0.25),
            Err(Status::StepDenominatorZero)
        );
    }

    #[test]
    fn na_reaches_pure_power_root_in_two_updates() {
        for p in [2, 3, 7] {
            let pr = problem(&format!("(x-2)^{p}"));
            let cfg = SolverConfig::new(Method::NewtonAnderson, 3.0);
            let trace = run(&pr, &cfg).unwrap();
            let x2 = trace.records[2].x;
            assert!((x2 - 2.0).abs() <= 1e-12, "p={p}: x2={x2}");
        }
    }

    #[test]
    fn run_newton_on_linear_converges_in_one() {
        let trace = run(&problem("x-5"), &SolverConfig::new(Method::Newton, 0.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert_eq!(trace.iterations_to_converge, Some(1));
        assert_eq!(trace.final_x(), 5.0);
    }

    #[test]
    fn run_newton_table1_first_cell() {
        let trace = run(
            &problem("(x^2-1)^2*log(x)"),
            &SolverConfig::new(Method::Newton, 0.8),
        )
        .unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert_eq!(trace.iterations_to_converge, Some(51));
        assert!((trace.final_x() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn run_na_table1_first_cell() {
        let trace = run(
            &problem("(x^2-1)^2*log(x)"),
            &SolverConfig::new(Method::NewtonAnderson, 0.8),
        )
        .unwrap();
        assert_eq!(trace.iterations_to_converge, Some(6));
        let p = trace.final_p().unwrap();
        assert!((p - 3.0).abs() < 1e-4, "final p = {p}");
    }

    #[test]
    fn run_modified_table1_first_cell() {
        let pr = problem("(x^2-1)^2*log(x)").with_multiplicity(3.0);
        let trace = run(&pr, &SolverConfig::new(Method::ModifiedNewton, 0.8)).unwrap();
        assert_eq!(trace.iterations_to_converge, Some(4));
    }

    #[test]
    fn run_secant_on_affine_exact_first_step() {
        // exact in exact arithmetic; in f64 the 1e-3 offset is not
        // representable, leaving ~1e-12 from the rounded slope
        let trace = run(&problem("x-5"), &SolverConfig::new(Method::Secant, 0.0)).unwrap();
        assert!(
            (trace.records[1].x - 5.0).abs() <= 1e-11,
            "x1 = {}",
            trace.records[1].x
        );
        assert_eq!(trace.status, Status::Converged);
        assert!(trace.iterations_to_converge.unwrap() <= 3);
    }

    #[test]
    fn run_secant_table1_first_cell() {
        let trace = run(
            &problem("(x^2-1)^2*log(x)"),
            &SolverConfig::new(Method::Secant, 0.8),
        )
        .unwrap();
        assert_eq!(trace.iterations_to_converge, Some(72));
    }

    #[test]
    fn run_adaptive_on_linear_converges_in_one() {
        let trace = run(
            &problem("x-5"),
            &SolverConfig::new(Method::AdaptiveNewton, 0.0),
        )
        .unwrap();
        assert_eq!(trace.iterations_to_converge, Some(1));
        // p never recomputed: converged before three iterates existed
        assert!(trace
            .records
            .iter()
            .all(|r| r.p.is_none() || r.p == Some(1.0)));
    }

    #[test]
    fn run_adaptive_table1_first_cell() {
        let trace = run(
            &problem("(x^2-1)^2*log(x)"),
            &SolverConfig::new(Method::AdaptiveNewton, 0.8),
        )
        .unwrap();
        let k = trace.iterations_to_converge.unwrap();
        assert!((k as i64 - 13).abs() <= 3, "adaptive count {k}");
        let p = trace.final_p().unwrap();
        assert!((p - 2.9860).abs() <= 0.1, "final p {p}");
    }

    #[test]
    fn run_halley_like_q2() {
        let trace = run(
            &problem("(x^2-1)^2*log(x)"),
            &SolverConfig::new(Method::HalleyLike, 0.8),
        )
        .unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(trace.iterations_to_converge.unwrap() <= 8);
        assert!((trace.final_x() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn run_halley_like_rootless_does_not_converge() {
        let trace = run(
            &problem("x^2+1"),
            &SolverConfig::new(Method::HalleyLike, 0.0),
        )
        .unwrap();
        assert_ne!(trace.status, Status::Converged);
        assert!(matches!(
            trace.status,
            Status::DerivativeZero | Status::StepDenominatorZero | Status::MaxIterReached
        ));
    }

    #[test]
    fn run_na_exp_family_from_zero() {
        // modified Newton is lost from x0 = 0 on this one; NA converges to 2
        let pr = problem("(x-2)^6*exp(-(x-2)^2/2)");
        let trace = run(&pr, &SolverConfig::new(Method::NewtonAnderson, 0.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(
            (trace.final_x() - 2.0).abs() < 1e-9,
            "x_end = {}",
            trace.final_x()
        );
    }

    #[test]
    fn run_reports_domain_error_at_start() {
        let cfg = SolverConfig::new(Method::Newton, -1.0);
        let trace = run(&problem("log(x)"), &cfg).unwrap();
        assert_eq!(trace.status, Status::DomainError);
        assert_eq!(trace.records.len(), 1);
        assert!(trace.records[0].f.is_none());
    }

    #[test]
    fn run_reports_domain_error_mid_iteration() {
        // newton on 1/x + 1 from 0.5: x1 = 0.5 - (2+1)/(-4) = 1.25,
        // x2 = 1.25 - (0.8+1)/(-0.64) = 4.0625, ... iterates blow through
        // the pole; pick a start whose step lands at a negative log argument
        let pr = problem("log(x)+10");
        // w = -(ln x + 10) x; from x0 = 1: x1 = 1 - 10 = -9, out of domain
        let trace = run(&pr, &SolverConfig::new(Method::Newton, 1.0)).unwrap();
        assert_eq!(trace.status, Status::DomainError);
        let last = trace.records.last().unwrap();
        assert_eq!(last.x, -9.0);
        assert!(last.f.is_none());
    }

    #[test]
    fn na_constant_step_falls_back_to_newton() {
        // w = -exp(x)/exp(x) = -1 at every iterate, so the Anderson
        // denominator is exactly zero each time and the run walks plain
        // Newton steps until the iteration cap
        let pr = problem("exp(x)");
        let cfg = SolverConfig::new(Method::NewtonAnderson, 0.0).with_max_iter(5);
        let trace = run(&pr, &cfg).unwrap();
        assert_eq!(trace.status, Status::MaxIterReached);
        assert_eq!(trace.final_x(), -5.0);
        let fallbacks: Vec<_> = trace
            .events
            .iter()
            .filter(|e| e.kind == TraceEventKind::NewtonFallback)
            .collect();
        assert_eq!(fallbacks.len(), 4, "one fallback per accelerated update");
        assert!(trace.records.iter().all(|r| r.p.is_none()));
    }

    #[test]
    fn adaptive_zero_denominator_holds_estimate() {
        // constant unit steps make the rate ratio exactly 1 (stable) while
        // the estimate's denominator 2x_{k-1} - x_k - x_{k-2} is exactly 0
        let pr = problem("exp(x)");
        let cfg = SolverConfig::new(Method::AdaptiveNewton, 0.0).with_max_iter(6);
        let trace = run(&pr, &cfg).unwrap();
        assert_eq!(trace.status, Status::MaxIterReached);
        assert!(trace
            .events
            .iter()
            .any(|e| e.kind == TraceEventKind::AdaptiveDenominatorZero));
        assert!(trace
            .records
            .iter()
            .all(|r| r.p.is_none() || r.p == Some(1.0)));
    }

    #[test]
    fn adaptive_exp_family_estimates_multiplicity() {
        let pr = problem("(x-2)^6*exp(-(x-2)^2/2)");
        let trace = run(&pr, &SolverConfig::new(Method::AdaptiveNewton, 1.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!((trace.final_x() - 2.0).abs() < 1e-6);
        let p = trace.final_p().unwrap();
        assert!((p - 6.0).abs() <= 0.5, "final p {p}");
    }

    #[test]
    fn traces_are_bitwise_deterministic() {
        let pr = problem("(x^2-1)^2*log(x)");
        let cfg = SolverConfig::new(Method::NewtonAnderson, 0.8);
        let a = run(&pr, &cfg).unwrap();
        let b = run(&pr, &cfg).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.x.to_bits(), rb.x.to_bits());
        }
    }

    #[test]
    fn trace_ks_are_contiguous() {
        let pr = problem("(x^2-1)^2*log(x)");
        for method in [
            Method::Newton,
            Method::NewtonAnderson,
            Method::Secant,
            Method::AdaptiveNewton,
        ] {
            let trace = run(&pr, &SolverConfig::new(method, 2.0)).unwrap();
            for (i, r) in trace.records.iter().enumerate() {
                assert_eq!(r.k, i);
            }
            if trace.status == Status::Converged {
                let last = trace.records.last().unwrap();
                assert!(last.step.unwrap() < 1e-10 || last.f == Some(0.0));
            }
        }
    }

    #[test]
    fn newton_rate_on_multiple_roots() {
        // |x_{k+1}-c|/|x_k-c| -> 1 - 1/p
        for p in [2, 3, 6] {
            let pr = problem(&format!("(x-1)^{p}"));
            let cfg = SolverConfig::new(Method::Newton, 1.5).with_max_iter(40);
            let trace = run(&pr, &cfg).unwrap();
            let e20 = (trace.records[20].x - 1.0).abs();
            let e21 = (trace.records[21].x - 1.0).abs();
            let ratio = e21 / e20;
            let expected = 1.0 - 1.0 / p as f64;
            assert!(
                (ratio - expected).abs() < 1e-3,
                "p={p}: ratio {ratio} vs {expected}"
            );
        }
    }

    #[test]
    fn na_matches_secant_on_w() {
        // NA is the secant method applied to w(x) = -f(x)/f'(x)
        let pr = problem("(x^2-1)^2*log(x)");
        let cfg = SolverConfig::new(Method::NewtonAnderson, 0.8);
        let trace = run(&pr, &cfg).unwrap();

        let w = |x: f64| {
            let j = eval_jet(&pr.f, x).unwrap();
            -j.value / j.d1
        };
        // seed the secant with (x0, x1 = x0 + w(x0)) to align with NA
        let mut zs = vec![0.8, 0.8 + w(0.8)];
        let (mut gp, mut g) = (w(zs[0]), w(zs[1]));
        for _ in 0..10 {
            let (zp, z) = (zs[zs.len() - 2], zs[zs.len() - 1]);
            let d = g - gp;
            if d == 0.0 {
                break;
            }
            let zn = z - g * (z - zp) / d;
            zs.push(zn);
            if (zn - z).abs() < 1e-10 {
                break;
            }
            gp = g;
            g = w(zn);
        }
        for (i, r) in trace.records.iter().take(6).enumerate() {
            let allowed = i as f64 * (r.x.abs().max(1.0) * f64::EPSILON);
            assert!(
                (r.x - zs[i]).abs() <= allowed.max(0.0),
                "step {i}: na={} secant-on-w={}",
                r.x,
                zs[i]
            );
        }
    }

    #[test]
    fn na_multiplicity_estimate_tracks_error() {
        // f = (x-c)^p g with g = exp: |p_k - p| is first order in the error
        // of the older iterate entering the estimate
        let pr = problem("(x-2)^3*exp(x)");
        let cfg = SolverConfig::new(Method::NewtonAnderson, 2.5);
        let trace = run(&pr, &cfg).unwrap();
        for r in &trace.records {
            let Some(p) = r.p else { continue };
            // p on record k was formed from (x_{k-1}, x_{k-2}); the error
            // term is first order in the older point's error
            let older = (trace.records[r.k - 2].x - 2.0).abs();
            if older < 1e-2 {
                assert!(
                    (p - 3.0).abs() <= 10.0 * older,
                    "k={}: p={} older err={}",
                    r.k,
                    p,
                    older
                );
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let pr = problem("x-1");
        let mut cfg = SolverConfig::new(Method::Newton, 0.0);
        cfg.tol = 0.0;
        assert!(run(&pr, &cfg).is_err());
        let mut cfg = SolverConfig::new(Method::Newton, 0.0);
        cfg.max_iter = 0;
        assert!(run(&pr, &cfg).is_err());
        let mut cfg = SolverConfig::new(Method::Secant, 0.0);
        cfg.secant_offset = 0.0;
        assert!(run(&pr, &cfg).is_err());
    }
}
