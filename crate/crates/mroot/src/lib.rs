//! Scalar nonlinear rootfinding built around the Newton-Anderson method,
//! which converges superlinearly to roots of unknown multiplicity p > 1 and
//! estimates p along the way.
//!
//! The crate bundles six scalar iterations behind one trace-producing run
//! loop, a depth-m vector Anderson engine, convergence-order diagnostics,
//! and a benchmark harness that emits reproducible CSV tables. Functions are
//! given as text and differentiated by second-order forward-mode AD, so all
//! methods (including the one that needs f'') work from a single expression
//! string.
//!
//! ```
//! use mroot::expr::parse;
//! use mroot::solvers::{run, Method, Problem, SolverConfig, Status};
//!
//! let problem = Problem::new(parse("(x^2-1)^2*log(x)").unwrap());
//! let config = SolverConfig::new(Method::NewtonAnderson, 0.8);
//! let trace = run(&problem, &config).unwrap();
//! assert_eq!(trace.status, Status::Converged);
//! assert_eq!(trace.iterations_to_converge, Some(6));
//! // the final multiplicity estimate identifies the triple root at x = 1
//! assert!((trace.final_p().unwrap() - 3.0).abs() < 1e-4);
//! ```

pub mod anderson;
pub mod bench;
pub mod cli;
pub mod diagnostics;
pub mod expr;
pub mod solvers;

pub use expr::{eval_jet, eval_value, parse, Expr, Jet2};
pub use solvers::{run, IterationTrace, Method, Problem, SolverConfig, Status};
