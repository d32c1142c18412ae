//! Post-hoc convergence diagnostics computed from iteration traces against a
//! known root.

use crate::solvers::IterationTrace;

/// Running empirical convergence orders `q_k = log|x_k - c| / log|x_{k-1} - c|`.
#[derive(Debug, Clone)]
pub struct OrderSequence {
    pub root_used: f64,
    /// `(k, q_k)` for every admissible k; inadmissible entries are omitted.
    pub entries: Vec<(usize, f64)>,
}

/// Errors at or below this multiple of machine epsilon are rounding noise.
/// The log tolerates large relative noise in a tiny error (it enters the
/// ratio only additively), so the floor can sit just above the last ulps
/// where the error is pure representation artefact.
const NOISE_FLOOR_ULPS: f64 = 2.0;

/// Empirical convergence orders of a trace relative to the known root `c`.
///
/// `q_k` is defined only where both `|x_k - c|` and `|x_{k-1} - c|` lie in
/// `(0, 1)` (the logs share a sign) and `|x_k - c|` is still above the
/// rounding-noise floor.
pub fn convergence_orders(trace: &IterationTrace, c: f64) -> OrderSequence {
    let cutoff = NOISE_FLOOR_ULPS * f64::EPSILON * c.abs().max(1.0);
    let mut entries = Vec::new();
    for pair in trace.records.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let e_prev = (prev.x - c).abs();
        let e_cur = (cur.x - c).abs();
        if e_cur <= cutoff {
            continue;
        }
        if !(0.0 < e_cur && e_cur < 1.0 && 0.0 < e_prev && e_prev < 1.0) {
            continue;
        }
        entries.push((cur.k, e_cur.ln() / e_prev.ln()));
    }
    OrderSequence {
        root_used: c,
        entries,
    }
}

/// The recorded multiplicity-estimate sequence of a trace, as
/// `(k, p_k)` pairs where `p_k` formed the iterate `x_{k+1}`. Empty for
/// methods that do not estimate a multiplicity.
pub fn multiplicity_history(trace: &IterationTrace) -> Vec<(usize, f64)> {
    trace
        .records
        .iter()
        .filter_map(|r| r.p.map(|p| (r.k - 1, p)))
        .collect()
}
