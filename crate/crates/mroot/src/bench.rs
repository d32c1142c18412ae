//! Declarative benchmark suites over the scalar solvers, with CSV emission.
//!
//! Built-in suites: `quarteroni-q2`, `quarteroni-q6` (the two iteration-count
//! grids), `exp-p6` (the gaussian-damped power with its step-size series),
//! and `orders` (the convergence-order study).

use crate::diagnostics::multiplicity_history;
use crate::expr::{eval_jet, eval_value, parse, Expr};
use crate::solvers::{run, Method, Problem, SolverConfig, Status};
use thiserror::Error;

/// Step-size series are truncated to this many entries.
pub const SERIES_LEN: usize = 30;

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub id: String,
    pub expression: String,
    pub known_root: f64,
    pub known_multiplicity: f64,
    pub x0_list: Vec<f64>,
    pub tol: f64,
    pub methods: Vec<Method>,
    /// Emit the per-iteration step-size series for this case.
    pub emit_series: bool,
    /// Skip the numeric multiplicity probe (for cases where the scaling
    /// check is not meaningful).
    pub skip_order_probe: bool,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("case {id}: expression does not parse: {source}")]
    BadExpression {
        id: String,
        #[source]
        source: crate::expr::ParseError,
    },
    #[error("case {id}: |f^({j})(c)| = {value:e} at the stated root; expected a zero of multiplicity {p}")]
    RootInconsistent {
        id: String,
        j: usize,
        value: f64,
        p: f64,
    },
    #[error("case {id}: order probe estimates multiplicity {estimate:.2}, stated {p}")]
    MultiplicityInconsistent { id: String, estimate: f64, p: f64 },
    #[error("case {id}: solver configuration invalid: {source}")]
    BadConfig {
        id: String,
        #[source]
        source: crate::solvers::ConfigError,
    },
}

/// How a (case, method, x0) cell ended, after checking the final iterate
/// against the case's known root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Converged,
    /// The run reported convergence somewhere other than the known root
    /// (e.g. drifting to an asymptotic zero until the residual underflows).
    WrongRoot,
    Failed(Status),
}

impl CellStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, CellStatus::Converged)
    }

    pub fn label(&self) -> String {
        match self {
            CellStatus::Converged => "converged".to_string(),
            CellStatus::WrongRoot => "failed_wrong_root".to_string(),
            CellStatus::Failed(s) => format!("failed_{}", s.name()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub case_id: String,
    pub method: Method,
    pub x0: f64,
    /// Updates performed (equals iterations-to-converge when converged).
    pub iterations: usize,
    pub status: CellStatus,
    pub final_pk: Option<f64>,
    pub final_error: f64,
    /// `|x_{k+1} - x_k|` series, first `SERIES_LEN` entries, present only for
    /// series-flagged cases.
    pub steps: Vec<f64>,
}

fn builtin_case(
    id: &str,
    expression: &str,
    known_root: f64,
    known_multiplicity: f64,
    x0_list: &[f64],
    methods: &[Method],
    emit_series: bool,
) -> BenchCase {
    BenchCase {
        id: id.to_string(),
        expression: expression.to_string(),
        known_root,
        known_multiplicity,
        x0_list: x0_list.to_vec(),
        tol: 1e-10,
        methods: methods.to_vec(),
        emit_series,
        skip_order_probe: false,
    }
}

const TABLE_METHODS: [Method; 5] = [
    Method::ModifiedNewton,
    Method::NewtonAnderson,
    Method::AdaptiveNewton,
    Method::Newton,
    Method::Secant,
];

/// A built-in suite by name, or `None` for an unknown name.
pub fn builtin_suite(name: &str) -> Option<Vec<BenchCase>> {
    match name {
        "quarteroni-q2" => Some(vec![builtin_case(
            "q2",
            "(x^2-1)^2*log(x)",
            1.0,
            3.0,
            &[0.8, 2.0, 10.0],
            &TABLE_METHODS,
            false,
        )]),
        "quarteroni-q6" => Some(vec![builtin_case(
            "q6",
            "(x^2-1)^6*log(x)",
            1.0,
            7.0,
            &[0.8, 2.0, 10.0],
            &TABLE_METHODS,
            false,
        )]),
        "exp-p6" => Some(vec![builtin_case(
            "exp6",
            "(x-2)^6*exp(-(x-2)^2/2)",
            2.0,
            6.0,
            &[0.0, 1.0],
            &TABLE_METHODS,
            true,
        )]),
        "orders" => {
            let mut cases = Vec::new();
            for q in [2i64, 4, 6] {
                cases.push(builtin_case(
                    &format!("q{q}"),
                    &format!("(x^2-1)^{q}*log(x)"),
                    1.0,
                    (q + 1) as f64,
                    &[10.0],
                    &[Method::NewtonAnderson],
                    false,
                ));
            }
            for p in [6i64, 8, 10] {
                cases.push(builtin_case(
                    &format!("exp{p}"),
                    &format!("(x-2)^{p}*exp(-(x-2)^2/2)"),
                    2.0,
                    p as f64,
                    &[0.0],
                    &[Method::NewtonAnderson],
                    false,
                ));
            }
            Some(cases)
        }
        _ => None,
    }
}

pub fn suite_names() -> &'static [&'static str] {
    &["quarteroni-q2", "quarteroni-q6", "exp-p6", "orders"]
}

/// Check the case's stated root and multiplicity against the expression:
/// the derivatives available from one jet evaluation must vanish at the root,
/// and `log|f(c+h)| / log h` must land near the stated multiplicity.
pub fn validate_case(case: &BenchCase) -> Result<Expr, BenchError> {
    let expr = parse(&case.expression).map_err(|source| BenchError::BadExpression {
        id: case.id.clone(),
        source,
    })?;
    let c = case.known_root;
    let p = case.known_multiplicity;
    if let Ok(jet) = eval_jet(&expr, c) {
        let derivs = [jet.value, jet.d1, jet.d2];
        for (j, &value) in derivs.iter().enumerate() {
            if (j as f64) < p && value.abs() >= 1e-6 {
                return Err(BenchError::RootInconsistent {
                    id: case.id.clone(),
                    j,
                    value,
                    p,
                });
            }
        }
    }
    if !case.skip_order_probe {
        let h = 1e-8;
        let mut estimates = Vec::new();
        for side in [c + h, c - h] {
            if let Ok(v) = eval_value(&expr, side) {
                if v != 0.0 && v.is_finite() {
                    estimates.push(v.abs().ln() / h.ln());
                }
            }
        }
        if let Some(&est) = estimates.first() {
            if (est - p).abs() >= 0.5 {
                return Err(BenchError::MultiplicityInconsistent {
                    id: case.id.clone(),
                    estimate: est,
                    p,
                });
            }
        }
    }
    Ok(expr)
}

/// Tolerance on `|x_end - c|` for classifying a converged run as having found
/// the stated root rather than a spurious stationary point.
const ROOT_MATCH_TOL: f64 = 1e-6;

/// Run every (case, method, x0) cell of the manifest. Per-cell failures are
/// recorded in the results; only manifest-level problems abort.
pub fn run_suite(cases: &[BenchCase]) -> Result<Vec<BenchResult>, BenchError> {
    let mut results = Vec::new();
    for case in cases {
        let expr = validate_case(case)?;
        let problem = Problem::new(expr)
            .with_known_root(case.known_root)
            .with_multiplicity(case.known_multiplicity);
        for &method in &case.methods {
            for &x0 in &case.x0_list {
                let config = SolverConfig::new(method, x0).with_tol(case.tol);
                let trace = run(&problem, &config).map_err(|source| BenchError::BadConfig {
                    id: case.id.clone(),
                    source,
                })?;
                let final_x = trace.final_x();
                let final_error = (final_x - case.known_root).abs();
                let status = if trace.status == Status::Converged {
                    if final_error <= ROOT_MATCH_TOL * case.known_root.abs().max(1.0) {
                        CellStatus::Converged
                    } else {
                        CellStatus::WrongRoot
                    }
                } else {
                    CellStatus::Failed(trace.status)
                };
                let iterations = trace
                    .iterations_to_converge
                    .unwrap_or_else(|| trace.records.last().map(|r| r.k).unwrap_or(0));
                let final_pk = multiplicity_history(&trace).last().map(|&(_, p)| p);
                let steps = if case.emit_series {
                    trace.steps().take(SERIES_LEN).map(|(_, s)| s).collect()
                } else {
                    Vec::new()
                };
                results.push(BenchResult {
                    case_id: case.id.clone(),
                    method,
                    x0,
                    iterations,
                    status,
                    final_pk,
                    final_error,
                    steps,
                });
            }
        }
    }
    Ok(results)
}

/// RFC 4180 field quoting.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 17 significant digits: enough to round-trip any f64.
fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// The per-cell results table.
pub fn emit_results_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("case,method,x0,iterations,status,final_pk,final_error\n");
    for r in results {
        let pk = r.final_pk.map(csv_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&r.case_id),
            csv_field(r.method.name()),
            csv_float(r.x0),
            r.iterations,
            csv_field(&r.status.label()),
            pk,
            csv_float(r.final_error),
        ));
    }
    out
}

/// The step-size series table (`k` counts from 1).
pub fn emit_steps_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("case,method,x0,k,step\n");
    for r in results {
        for (i, &s) in r.steps.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&r.case_id),
                csv_field(r.method.name()),
                csv_float(r.x0),
                i + 1,
                csv_float(s),
            ));
        }
    }
    out
}
