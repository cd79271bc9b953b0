//! Pontryagin checks on a computed transfer.

use serde::{Deserialize, Serialize};

use super::shooting::flow;
use super::{density_gradient, singular_arc_ratios, switching_function, ControlProblem, ControlSolution, Costate};
use crate::error::{Error, Result};

/// Share of checked intervals that must agree with the bang-bang law.
pub const CONSISTENCY_THRESHOLD: f64 = 0.95;
const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostateSource {
    /// Defect multipliers of the shooting problem.
    Multipliers,
    /// Discrete adjoint swept back from the terminal costate.
    AdjointFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmpReport {
    pub source: CostateSource,
    /// Switching function at the nodes.
    pub sigma: Vec<f64>,
    pub tolerance: f64,
    pub checked_intervals: usize,
    pub consistent_intervals: usize,
    /// Intervals where σ changes sign or is below tolerance, plus their
    /// neighbours.
    pub excluded_intervals: Vec<usize>,
    pub fraction: f64,
    pub passed: bool,
    /// Every reported switch lies within one interval of a sign change of σ.
    pub switches_bracketed: bool,
    /// Largest relative gap between the multiplier costates and the
    /// discrete adjoint sweep from the terminal costate.
    pub adjoint_discrepancy: f64,
}

/// Discrete adjoint `p_k = Φ_zᵀ p_{k+1}` (plus the running-cost gradient
/// when the physical duration is minimised), swept back from `terminal`.
pub fn costates_from_terminal(
    problem: &ControlProblem,
    solution: &ControlSolution,
    terminal: Costate,
) -> Vec<Costate> {
    let nm = solution.controls.len();
    let h = if nm > 0 { solution.s_opt / nm as f64 } else { 0.0 };
    let mut out = vec![Costate::default(); nm + 1];
    out[nm] = terminal;
    for k in (0..nm).rev() {
        let fl = flow(&problem.params, problem.control, solution.states[k], solution.controls[k], h);
        let s = &fl.sens;
        let nx = out[k + 1];
        let mut c = Costate::new(s[0][0] * nx.p + s[1][0] * nx.q, s[0][1] * nx.p + s[1][1] * nx.q);
        if !problem.in_transformed_time {
            c.p += s[2][0];
            c.q += s[2][1];
        }
        out[k] = c;
    }
    out
}

fn sigma_at(problem: &ControlProblem, solution: &ControlSolution, costates: &[Costate], k: usize) -> f64 {
    let mut s = switching_function(&problem.params, solution.states[k], costates[k], problem.control);
    if !problem.in_transformed_time {
        s += density_gradient(&problem.params, problem.control);
    }
    s
}

/// Checks the control against the sign of σ: `u_max` where σ < 0 and
/// `u_min` where σ > 0, on every interval where σ keeps one sign.
pub fn verify_pmp(solution: &ControlSolution, problem: &ControlProblem) -> Result<PmpReport> {
    let nm = solution.controls.len();
    if nm == 0 || solution.states.len() != nm + 1 {
        return Err(Error::InvalidProblem("solution has no shooting intervals".into()));
    }
    let (source, costates) = match &solution.costates {
        Some(c) if c.len() == nm + 1 && c.iter().all(|v| v.p.is_finite() && v.q.is_finite()) => {
            (CostateSource::Multipliers, c.clone())
        }
        Some(c) if c.last().is_some_and(|v| v.p.is_finite() && v.q.is_finite()) => {
            let terminal = *c.last().unwrap();
            (CostateSource::AdjointFallback, costates_from_terminal(problem, solution, terminal))
        }
        _ => return Err(Error::InvalidProblem("solution carries no costates".into())),
    };
    let sweep = costates_from_terminal(problem, solution, costates[nm]);
    let scale = costates.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let adjoint_discrepancy = costates
        .iter()
        .zip(&sweep)
        .map(|(a, b)| (a.p - b.p).hypot(a.q - b.q) / scale)
        .fold(0.0, f64::max);

    let sigma: Vec<f64> = (0..=nm).map(|k| sigma_at(problem, solution, &costates, k)).collect();
    let tolerance = 1e-6 * (1.0 + sigma.iter().fold(0.0f64, |m, s| m.max(s.abs())));
    let (lo, hi) = problem.bounds;

    let mut bad = vec![false; nm];
    for k in 0..nm {
        let (a, b) = (sigma[k], sigma[k + 1]);
        bad[k] = a * b <= 0.0 || a.abs() <= tolerance || b.abs() <= tolerance;
    }
    let mut excluded = vec![false; nm];
    for k in 0..nm {
        if bad[k] {
            excluded[k] = true;
            if k > 0 {
                excluded[k - 1] = true;
            }
            if k + 1 < nm {
                excluded[k + 1] = true;
            }
        }
    }
    let mut checked = 0;
    let mut consistent = 0;
    for k in (0..nm).filter(|&k| !excluded[k]) {
        checked += 1;
        let expected = if sigma[k] < 0.0 { hi } else { lo };
        if (solution.controls[k] - expected).abs() <= BOUND_TOL * (1.0 + expected.abs()) {
            consistent += 1;
        }
    }
    let fraction = if checked > 0 { consistent as f64 / checked as f64 } else { 0.0 };

    let sign_change_nodes: Vec<usize> = (0..nm).filter(|&k| sigma[k] * sigma[k + 1] <= 0.0).collect();
    let h = solution.s_opt / nm as f64;
    let switches_bracketed = solution.switching_s.iter().all(|&s| {
        let k = ((s / h).floor() as isize).clamp(0, nm as isize - 1);
        sign_change_nodes.iter().any(|&j| (j as isize - k).abs() <= 1)
    });

    Ok(PmpReport {
        source,
        sigma,
        tolerance,
        checked_intervals: checked,
        consistent_intervals: consistent,
        excluded_intervals: (0..nm).filter(|&k| excluded[k]).collect(),
        fraction,
        passed: checked > 0 && fraction >= CONSISTENCY_THRESHOLD,
        switches_bracketed,
        adjoint_discrepancy,
    })
}

/// Intervals whose start node satisfies both singular-arc relations: the
/// two ratios agree and, when costates are known, match `p/q`.
pub fn singular_candidates(problem: &ControlProblem, solution: &ControlSolution, tol: f64) -> Vec<usize> {
    let nm = solution.controls.len();
    (0..nm)
        .filter(|&k| {
            let s = solution.states[k];
            let Some((r1, r2)) = singular_arc_ratios(&problem.params, s, solution.controls[k], problem.control)
            else {
                return false;
            };
            let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
            if !close(r1, r2) {
                return false;
            }
            match &solution.costates {
                Some(c) if c[k].q != 0.0 => close(c[k].p / c[k].q, r1),
                _ => true,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{solve, solve_fixed_control, ControlKind};
    use crate::model::{ModelParams, State};

    fn quality_problem() -> ControlProblem {
        let p = ModelParams::new(7.0, 1.0, 0.1, 0.3, 1.0, 3.0).unwrap();
        ControlProblem::new(p, ControlKind::Quality, State::new(5.0, 2.0), State::new(1.0, 4.0))
    }

    #[test]
    fn optimal_transfer_obeys_bang_bang_law() {
        let pr = quality_problem();
        let sol = solve(&pr).unwrap();
        let rep = verify_pmp(&sol, &pr).unwrap();
        assert_eq!(rep.source, CostateSource::Multipliers);
        assert!(rep.passed, "{rep:?}");
        assert!(rep.switches_bracketed);
        assert!(rep.adjoint_discrepancy < 1e-6, "{}", rep.adjoint_discrepancy);
        assert!(singular_candidates(&pr, &sol, 1e-6).len() <= 2);
    }

    #[test]
    fn constant_midpoint_control_fails_the_check() {
        let mut pr = quality_problem();
        let (lo, hi) = pr.bounds;
        let mid = 0.5 * (lo + hi);
        // endpoint of the discretised flow, so the frozen-control transfer is exact
        let h = 0.3 / pr.mesh_size as f64;
        let mut end = pr.initial;
        for _ in 0..pr.mesh_size {
            let f = flow(&pr.params, pr.control, end, mid, h);
            end = State::new(f.end[0], f.end[1]);
        }
        pr.target = end;
        let sol = solve_fixed_control(&pr, mid).unwrap();
        assert!(sol.nlp_stats.converged, "{:?}", sol.nlp_stats);
        assert!((sol.s_opt - 0.3).abs() < 1e-8, "{}", sol.s_opt);
        let rep = verify_pmp(&sol, &pr).unwrap();
        assert!(!rep.passed, "{rep:?}");
    }
}
