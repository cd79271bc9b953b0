//! Direct multiple shooting in transformed time.
//!
//! Variables are `[S, z₁ … z_{N−1}, u₀ … u_{N−1}]`; the endpoints `z₀` and
//! `z_N` are fixed. Each interval of length `h = S/N` is integrated by RK4
//! on `(x, y, τ)` with `dτ/ds = 1 + x² + αξ`, and the defects
//! `z_{k+1} − Φ(z_k, u_k, h)` are the equality constraints.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sqp::{solve_nlp, Nlp, NlpEval, SqpOptions, SqpResult, SqpStatus};
use super::{
    control_gradient, density_gradient, state_jacobian, time_density, transformed_rhs, ControlKind,
    ControlProblem, ControlSolution, Costate, NlpStats,
};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::simulation::{solve as ode_solve, IntegratorOptions, Monitors};

/// RK4 substeps per shooting interval.
const SUBSTEPS: usize = 4;
const S_MIN: f64 = 1e-8;
/// Largest defect for which a non-converged iterate still counts as feasible.
const FEASIBLE_DEFECT: f64 = 1e-6;
/// Controls within this distance of a bound count as on the bound.
const BOUND_TOL: f64 = 1e-6;

/// One shooting interval: end state `(x, y, τ)` and its derivatives with
/// respect to `(x₀, y₀, u, h)`.
pub(crate) struct Flow {
    pub end: [f64; 3],
    pub sens: [[f64; 4]; 3],
}

type Aug = ([f64; 3], [[f64; 4]; 3]);

fn aug_field(p: &ModelParams, kind: ControlKind, u: f64, h: f64, w: &[f64; 3], sw: &[[f64; 4]; 3]) -> Aug {
    let s = State::new(w[0], w[1]);
    let f = transformed_rhs(p, s, u, kind);
    let f3 = [f.x, f.y, time_density(p, s, u, kind)];
    let j = state_jacobian(p, s, u, kind);
    let jac = [[j[0][0], j[0][1]], [j[1][0], j[1][1]], [2.0 * w[0], 0.0]];
    let [a, b] = control_gradient(p, s, kind);
    let fu = [a, b, density_gradient(p, kind)];
    let mut dw = [0.0; 3];
    let mut dsw = [[0.0; 4]; 3];
    for r in 0..3 {
        dw[r] = h * f3[r];
        for c in 0..4 {
            dsw[r][c] = h * (jac[r][0] * sw[0][c] + jac[r][1] * sw[1][c]);
        }
        dsw[r][2] += h * fu[r];
        dsw[r][3] += f3[r];
    }
    (dw, dsw)
}

fn axpy(base: &Aug, k: &Aug, c: f64) -> Aug {
    let mut w = base.0;
    let mut sw = base.1;
    for r in 0..3 {
        w[r] += c * k.0[r];
        for col in 0..4 {
            sw[r][col] += c * k.1[r][col];
        }
    }
    (w, sw)
}

/// RK4 over one interval, written as `w' = h·f(w)` on `[0, 1]` so the step
/// length is an ordinary parameter and the sensitivities are exact for the
/// discrete scheme.
pub(crate) fn flow(p: &ModelParams, kind: ControlKind, z: State, u: f64, h: f64) -> Flow {
    let mut y: Aug = (
        [z.x, z.y, 0.0],
        [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0; 4]],
    );
    let dt = 1.0 / SUBSTEPS as f64;
    let field = |a: &Aug| aug_field(p, kind, u, h, &a.0, &a.1);
    for _ in 0..SUBSTEPS {
        let k1 = field(&y);
        let k2 = field(&axpy(&y, &k1, 0.5 * dt));
        let k3 = field(&axpy(&y, &k2, 0.5 * dt));
        let k4 = field(&axpy(&y, &k3, dt));
        y = axpy(&y, &k1, dt / 6.0);
        y = axpy(&y, &k2, dt / 3.0);
        y = axpy(&y, &k3, dt / 3.0);
        y = axpy(&y, &k4, dt / 6.0);
    }
    Flow { end: y.0, sens: y.1 }
}

struct ShootingNlp<'a> {
    problem: &'a ControlProblem,
    /// Controls are constants rather than variables when set.
    fixed_control: Option<f64>,
}

impl ShootingNlp<'_> {
    fn mesh(&self) -> usize {
        self.problem.mesh_size
    }

    fn z_index(&self, k: usize) -> Option<usize> {
        (k >= 1 && k < self.mesh()).then(|| 1 + 2 * (k - 1))
    }

    fn u_index(&self, k: usize) -> Option<usize> {
        self.fixed_control.is_none().then(|| 1 + 2 * (self.mesh() - 1) + k)
    }

    fn node(&self, v: &DVector<f64>, k: usize) -> State {
        match self.z_index(k) {
            Some(i) => State::new(v[i], v[i + 1]),
            None if k == 0 => self.problem.initial,
            None => self.problem.target,
        }
    }

    fn control(&self, v: &DVector<f64>, k: usize) -> f64 {
        match (self.fixed_control, self.u_index(k)) {
            (Some(u), _) => u,
            (None, Some(i)) => v[i],
            _ => unreachable!(),
        }
    }

    fn pack(&self, s: f64, nodes: &[State], controls: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.n());
        v[0] = s;
        for k in 1..self.mesh() {
            let i = self.z_index(k).unwrap();
            v[i] = nodes[k].x;
            v[i + 1] = nodes[k].y;
        }
        if self.fixed_control.is_none() {
            for (k, &u) in controls.iter().enumerate() {
                v[self.u_index(k).unwrap()] = u;
            }
        }
        v
    }

    fn flows(&self, v: &DVector<f64>) -> Vec<Flow> {
        let h = v[0] / self.mesh() as f64;
        (0..self.mesh())
            .map(|k| flow(&self.problem.params, self.problem.control, self.node(v, k), self.control(v, k), h))
            .collect()
    }
}

impl Nlp for ShootingNlp<'_> {
    fn n(&self) -> usize {
        let nodes = 1 + 2 * (self.mesh() - 1);
        if self.fixed_control.is_some() {
            nodes
        } else {
            nodes + self.mesh()
        }
    }

    fn m(&self) -> usize {
        2 * self.mesh()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut lo = vec![0.0; n];
        let mut hi = vec![f64::INFINITY; n];
        lo[0] = S_MIN;
        for k in 0..self.mesh() {
            if let Some(i) = self.u_index(k) {
                lo[i] = self.problem.bounds.0;
                hi[i] = self.problem.bounds.1;
            }
        }
        (lo, hi)
    }

    fn eval(&self, v: &DVector<f64>, derivs: bool) -> Result<NlpEval> {
        let n = self.n();
        let nm = self.mesh();
        let flows = self.flows(v);
        let mut c = DVector::zeros(2 * nm);
        for (k, fl) in flows.iter().enumerate() {
            let next = self.node(v, k + 1);
            c[2 * k] = next.x - fl.end[0];
            c[2 * k + 1] = next.y - fl.end[1];
        }
        if !c.iter().all(|x| x.is_finite()) {
            return Err(Error::Degenerate("non-finite shooting defect".into()));
        }
        let f = if self.problem.in_transformed_time {
            v[0]
        } else {
            flows.iter().map(|fl| fl.end[2]).sum()
        };
        let derivs = derivs.then(|| {
            let mut g = DVector::zeros(n);
            let mut a = DMatrix::zeros(2 * nm, n);
            let inv_n = 1.0 / nm as f64;
            if self.problem.in_transformed_time {
                g[0] = 1.0;
            }
            for (k, fl) in flows.iter().enumerate() {
                let s = &fl.sens;
                for r in 0..2 {
                    let row = 2 * k + r;
                    if let Some(i) = self.z_index(k + 1) {
                        a[(row, i + r)] = 1.0;
                    }
                    if let Some(i) = self.z_index(k) {
                        a[(row, i)] = -s[r][0];
                        a[(row, i + 1)] = -s[r][1];
                    }
                    if let Some(i) = self.u_index(k) {
                        a[(row, i)] = -s[r][2];
                    }
                    a[(row, 0)] = -s[r][3] * inv_n;
                }
                if !self.problem.in_transformed_time {
                    if let Some(i) = self.z_index(k) {
                        g[i] += s[2][0];
                        g[i + 1] += s[2][1];
                    }
                    if let Some(i) = self.u_index(k) {
                        g[i] += s[2][2];
                    }
                    g[0] += s[2][3] * inv_n;
                }
            }
            (g, a)
        });
        Ok(NlpEval { f, c, derivs })
    }

    /// Sum over intervals of `∇²(λ_kᵀΦ_k + τ_k)` in `(x₀, y₀, u, h)`, each
    /// block by central differences of the exact first sensitivities.
    fn hessian(&self, v: &DVector<f64>, lambda: &DVector<f64>) -> Option<DMatrix<f64>> {
        let nm = self.mesh();
        let pr = self.problem;
        let h = v[0] / nm as f64;
        let with_time = !pr.in_transformed_time;
        let mut out = DMatrix::zeros(self.n(), self.n());
        for k in 0..nm {
            let (l0, l1) = (lambda[2 * k], lambda[2 * k + 1]);
            let grad = |w: [f64; 4]| -> [f64; 4] {
                let s = flow(&pr.params, pr.control, State::new(w[0], w[1]), w[2], w[3]).sens;
                std::array::from_fn(|j| l0 * s[0][j] + l1 * s[1][j] + if with_time { s[2][j] } else { 0.0 })
            };
            let z = self.node(v, k);
            let w0 = [z.x, z.y, self.control(v, k), h];
            // variable index and chain factor of each coordinate
            let slots: [Option<(usize, f64)>; 4] = [
                self.z_index(k).map(|i| (i, 1.0)),
                self.z_index(k).map(|i| (i + 1, 1.0)),
                self.u_index(k).map(|i| (i, 1.0)),
                Some((0, 1.0 / nm as f64)),
            ];
            for j in 0..4 {
                let Some((vj, fj)) = slots[j] else { continue };
                let step = 1e-5 * (1.0 + w0[j].abs());
                let mut up = w0;
                let mut dn = w0;
                up[j] += step;
                dn[j] -= step;
                let (gu, gd) = (grad(up), grad(dn));
                for i in 0..4 {
                    let Some((vi, fi)) = slots[i] else { continue };
                    let hij = (gu[i] - gd[i]) / (2.0 * step);
                    out[(vi, vj)] += fi * fj * hij;
                }
            }
        }
        let sym = (&out + out.transpose()) * 0.5;
        sym.iter().all(|x| x.is_finite()).then_some(sym)
    }
}

/// Constant-control trajectory in transformed time and the transformed time
/// of its closest approach to the target.
fn constant_control_guess(problem: &ControlProblem, u: f64, horizon: f64) -> Option<(f64, f64, Vec<State>)> {
    let p = problem.params;
    let kind = problem.control;
    let traj = ode_solve(
        |_, s| transformed_rhs(&p, s, u, kind),
        |_| p.epsilon,
        problem.initial,
        0.0,
        horizon,
        &IntegratorOptions::with_tolerances(1e-8, 1e-10),
        Monitors::default(),
    )
    .ok()?;
    let (i, dist) = traj
        .states
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, s)| (i, s.dist(&problem.target)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let s_end = traj.times[i];
    let nm = problem.mesh_size;
    let nodes = (0..=nm).map(|k| traj.sample(s_end * k as f64 / nm as f64)).collect();
    Some((dist, s_end, nodes))
}

fn initial_guess(problem: &ControlProblem, nlp: &ShootingNlp) -> DVector<f64> {
    let (lo, hi) = problem.bounds;
    let candidates: Vec<f64> = match nlp.fixed_control {
        Some(u) => vec![u],
        None => vec![lo, 0.5 * (lo + hi), hi],
    };
    let mut best: Option<(f64, f64, Vec<State>, f64)> = None;
    for &u in &candidates {
        if let Some((dist, s, nodes)) = constant_control_guess(problem, u, 20.0) {
            if best.as_ref().is_none_or(|b| dist < b.0) {
                best = Some((dist, s, nodes, u));
            }
        }
    }
    let nm = problem.mesh_size;
    match best {
        Some((_, s, nodes, u)) => nlp.pack(s.max(1e-3), &nodes, &vec![u; nm]),
        None => {
            // straight line between the endpoints
            let nodes: Vec<State> = (0..=nm)
                .map(|k| {
                    let t = k as f64 / nm as f64;
                    problem.initial * (1.0 - t) + problem.target * t
                })
                .collect();
            nlp.pack(1.0, &nodes, &vec![0.5 * (lo + hi); nm])
        }
    }
}

/// Switches between the two bounds, in transformed time. An intermediate
/// control value θ of the way from `lo` to `hi` is read as a bang pair
/// inside its interval.
fn detect_switches(controls: &[f64], bounds: (f64, f64), h: f64) -> Vec<f64> {
    let (lo, hi) = bounds;
    let width = hi - lo;
    let label = |u: f64| -> Option<bool> {
        if (u - lo).abs() <= BOUND_TOL * (1.0 + lo.abs()) {
            Some(false)
        } else if (u - hi).abs() <= BOUND_TOL * (1.0 + hi.abs()) {
            Some(true)
        } else {
            None
        }
    };
    let mut out = Vec::new();
    let mut last: Option<(bool, usize)> = None;
    for (k, &u) in controls.iter().enumerate() {
        let Some(l) = label(u) else { continue };
        if let Some((prev, pk)) = last {
            if prev != l {
                // intervals pk+1 .. k-1 carry the transition
                let mut s = (pk + 1) as f64 * h;
                for &um in &controls[pk + 1..k] {
                    let theta = ((um - lo) / width).clamp(0.0, 1.0);
                    s += if l { 1.0 - theta } else { theta } * h;
                }
                out.push(s);
            }
        }
        last = Some((l, k));
    }
    out
}

fn s_to_t(s_grid: &[f64], t_grid: &[f64], s: f64) -> f64 {
    let i = s_grid.partition_point(|&v| v <= s).clamp(1, s_grid.len() - 1);
    let (s0, s1) = (s_grid[i - 1], s_grid[i]);
    let w = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
    t_grid[i - 1] + w * (t_grid[i] - t_grid[i - 1])
}

fn assemble(problem: &ControlProblem, nlp: &ShootingNlp, r: &SqpResult, v: &DVector<f64>) -> ControlSolution {
    let nm = problem.mesh_size;
    let s_opt = v[0];
    let h = s_opt / nm as f64;
    let flows = nlp.flows(v);
    let states: Vec<State> = (0..=nm).map(|k| nlp.node(v, k)).collect();
    let controls: Vec<f64> = (0..nm).map(|k| nlp.control(v, k)).collect();
    let s_grid: Vec<f64> = (0..=nm).map(|k| h * k as f64).collect();
    let mut t_grid = Vec::with_capacity(nm + 1);
    t_grid.push(0.0);
    for fl in &flows {
        let last = *t_grid.last().unwrap();
        t_grid.push(last + fl.end[2]);
    }
    let t_opt = *t_grid.last().unwrap();
    let switching_s = detect_switches(&controls, problem.bounds, h);
    let switching_times = switching_s.iter().map(|&s| s_to_t(&s_grid, &t_grid, s)).collect();

    // L = f − λᵀc gives p_{k+1} = λ_k and p_0 = Φ_zᵀ p_1 (+ ∂τ/∂z)
    let mut costates: Vec<Costate> = Vec::with_capacity(nm + 1);
    let lam = &r.lambda;
    let s0 = &flows[0].sens;
    let mut p0 = Costate::new(
        s0[0][0] * lam[0] + s0[1][0] * lam[1],
        s0[0][1] * lam[0] + s0[1][1] * lam[1],
    );
    if !problem.in_transformed_time {
        p0.p += s0[2][0];
        p0.q += s0[2][1];
    }
    costates.push(p0);
    for k in 0..nm {
        costates.push(Costate::new(lam[2 * k], lam[2 * k + 1]));
    }
    let max_defect = nlp.eval(v, false).map(|e| e.c.amax()).unwrap_or(f64::INFINITY);
    ControlSolution {
        control: Some(problem.control),
        bounds: problem.bounds,
        s_grid,
        t_grid,
        states,
        controls,
        switching_times,
        switching_s,
        s_opt,
        t_opt,
        costates: Some(costates),
        nlp_stats: NlpStats {
            iterations: r.iterations,
            kkt_residual: r.kkt,
            max_defect,
            converged: r.status == SqpStatus::Converged,
            message: format!("{:?}", r.status),
            variables: nlp.n(),
            constraints: nlp.m(),
        },
    }
}

fn trivial_solution(problem: &ControlProblem) -> ControlSolution {
    let nm = problem.mesh_size;
    let u = problem.bounds.0;
    ControlSolution {
        control: Some(problem.control),
        bounds: problem.bounds,
        s_grid: vec![0.0; nm + 1],
        t_grid: vec![0.0; nm + 1],
        states: vec![problem.initial; nm + 1],
        controls: vec![u; nm],
        costates: None,
        nlp_stats: NlpStats {
            converged: true,
            message: "initial state equals target".into(),
            ..NlpStats::default()
        },
        ..ControlSolution::default()
    }
}

fn run(problem: &ControlProblem, fixed_control: Option<f64>) -> Result<ControlSolution> {
    problem.validate()?;
    if problem.initial.dist(&problem.target) == 0.0 {
        return Ok(trivial_solution(problem));
    }
    let nlp = ShootingNlp { problem, fixed_control };
    let x0 = initial_guess(problem, &nlp);
    let r = solve_nlp(&nlp, &x0, &SqpOptions::default())?;
    match r.status {
        SqpStatus::Converged => Ok(assemble(problem, &nlp, &r, &r.x)),
        _ if r.feasibility <= FEASIBLE_DEFECT => Ok(assemble(problem, &nlp, &r, &r.x)),
        _ => {
            let best = assemble(problem, &nlp, &r, &r.best_x);
            Err(Error::Infeasible {
                best_residual: r.best_feasibility,
                best: Box::new(best),
            })
        }
    }
}

/// Time-optimal transfer from `initial` to `target` with piecewise-constant
/// bounded control.
pub fn solve(problem: &ControlProblem) -> Result<ControlSolution> {
    run(problem, None)
}

/// Same transcription with the control frozen at `u`; only the duration and
/// the nodes are free.
pub fn solve_fixed_control(problem: &ControlProblem, u: f64) -> Result<ControlSolution> {
    if !u.is_finite() {
        return Err(Error::InvalidProblem(format!("fixed control must be finite, got {u}")));
    }
    run(problem, Some(u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAttempt {
    pub bounds: (f64, f64),
    pub t_opt: Option<f64>,
    pub rel_error: Option<f64>,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub target_time: f64,
    pub rel_tol: f64,
    pub attempts: Vec<CalibrationAttempt>,
    /// Bounds of the first attempt within tolerance.
    pub bounds: Option<(f64, f64)>,
    pub solution: Option<ControlSolution>,
}

/// Tries the configured bounds, then progressively wider boxes around them,
/// until `T_opt` is within `rel_tol` of `target_time`.
pub fn calibrate_bounds(problem: &ControlProblem, target_time: f64, rel_tol: f64) -> Result<Calibration> {
    problem.validate()?;
    let (lo, hi) = problem.bounds;
    let candidates = [
        (lo, hi),
        (lo, 2.0 * hi),
        (0.5 * lo, hi),
        (0.5 * lo, 2.0 * hi),
        (0.25 * lo, 4.0 * hi),
    ];
    let mut cal = Calibration {
        target_time,
        rel_tol,
        attempts: Vec::new(),
        bounds: None,
        solution: None,
    };
    for bounds in candidates {
        let mut pr = *problem;
        pr.bounds = bounds;
        let attempt = match solve(&pr) {
            Ok(sol) => {
                let err = (sol.t_opt - target_time).abs() / target_time;
                let ok = err <= rel_tol && sol.nlp_stats.converged;
                let a = CalibrationAttempt {
                    bounds,
                    t_opt: Some(sol.t_opt),
                    rel_error: Some(err),
                    outcome: sol.nlp_stats.message.clone(),
                };
                if ok {
                    cal.attempts.push(a);
                    cal.bounds = Some(bounds);
                    cal.solution = Some(sol);
                    return Ok(cal);
                }
                a
            }
            Err(Error::Infeasible { best_residual, .. }) => CalibrationAttempt {
                bounds,
                t_opt: None,
                rel_error: None,
                outcome: format!("infeasible (residual {best_residual:.3e})"),
            },
            Err(e) => return Err(e),
        };
        cal.attempts.push(attempt);
    }
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quality_problem() -> ControlProblem {
        let p = ModelParams::new(7.0, 1.0, 0.1, 0.3, 1.0, 3.0).unwrap();
        ControlProblem::new(p, ControlKind::Quality, State::new(5.0, 2.0), State::new(1.0, 4.0))
    }

    #[test]
    fn flow_sensitivities_match_differences() {
        let pr = quality_problem();
        let (z, u, h) = (State::new(2.0, 1.5), 1.2, 0.05);
        let base = flow(&pr.params, pr.control, z, u, h);
        let step = 1e-6;
        let bumps = [
            (State::new(z.x + step, z.y), u, h),
            (State::new(z.x, z.y + step), u, h),
            (z, u + step, h),
            (z, u, h + step),
        ];
        for (col, (zz, uu, hh)) in bumps.into_iter().enumerate() {
            let up = flow(&pr.params, pr.control, zz, uu, hh);
            for r in 0..3 {
                let fd = (up.end[r] - base.end[r]) / step;
                assert!((fd - base.sens[r][col]).abs() < 1e-4 * (1.0 + fd.abs()), "row {r} col {col}");
            }
        }
    }

    #[test]
    fn flow_is_fourth_order() {
        let pr = quality_problem();
        let p = pr.params;
        let z = State::new(3.0, 2.0);
        let exact = ode_solve(
            |_, s| transformed_rhs(&p, s, 1.0, ControlKind::Quality),
            |_| p.epsilon,
            z,
            0.0,
            0.2,
            &IntegratorOptions::with_tolerances(1e-13, 1e-14),
            Monitors::default(),
        )
        .unwrap()
        .last_state();
        let err = |h: f64| {
            let n = (0.2 / h).round() as usize;
            let mut s = z;
            for _ in 0..n {
                let f = flow(&p, ControlKind::Quality, s, 1.0, h);
                s = State::new(f.end[0], f.end[1]);
            }
            s.dist(&exact)
        };
        let order = (err(0.05) / err(0.025)).log2();
        assert!((order - 4.0).abs() < 0.3, "{order}");
    }

    #[test]
    fn switch_placement() {
        let b = (0.5, 2.0);
        assert_eq!(detect_switches(&[0.5, 0.5, 2.0, 2.0], b, 1.0), vec![2.0]);
        // θ = 1/3 of the way up: the upper bound covers the last third
        let s = detect_switches(&[0.5, 1.0, 2.0], b, 1.0);
        assert!((s[0] - (1.0 + 2.0 / 3.0)).abs() < 1e-12);
        let s = detect_switches(&[2.0, 1.0, 0.5], b, 1.0);
        assert!((s[0] - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert!(detect_switches(&[0.5, 1.0, 0.5], b, 1.0).is_empty());
    }

    #[test]
    fn degenerate_transfer() {
        let mut pr = quality_problem();
        pr.target = pr.initial;
        let sol = solve(&pr).unwrap();
        assert_eq!(sol.t_opt, 0.0);
        assert_eq!(sol.nlp_stats.iterations, 0);
    }

    #[test]
    fn rejects_small_mesh() {
        let mut pr = quality_problem();
        pr.mesh_size = 10;
        assert!(matches!(solve(&pr), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn quality_transfer() {
        let pr = quality_problem();
        let sol = solve(&pr).unwrap();
        assert!(sol.nlp_stats.converged, "{:?}", sol.nlp_stats);
        assert!(sol.nlp_stats.max_defect <= 1e-7);
        assert!((sol.t_opt - 2.1).abs() / 2.1 < 0.1, "T = {}", sol.t_opt);
        assert!(sol.t_grid.windows(2).all(|w| w[1] > w[0]));
        let (lo, hi) = pr.bounds;
        let on_bound = sol
            .controls
            .iter()
            .filter(|&&u| (u - lo).abs() <= BOUND_TOL || (u - hi).abs() <= BOUND_TOL)
            .count();
        assert!(on_bound as f64 >= 0.9 * sol.controls.len() as f64);
        assert_eq!(sol.switching_times.len(), 1, "{:?}", sol.controls);
        // T equals the integral of the time density over the solution
        let h = sol.s_opt / pr.mesh_size as f64;
        let mut t = 0.0;
        for k in 0..pr.mesh_size {
            t += flow(&pr.params, pr.control, sol.states[k], sol.controls[k], h).end[2];
        }
        assert!((t - sol.t_opt).abs() < 1e-12);
    }
}
