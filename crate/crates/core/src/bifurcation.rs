//! Local bifurcations of the scaled system.
//!
//! Analytic critical values come with Sotomayor quantities evaluated at the
//! critical equilibrium. Interior-equilibrium branches are traced by
//! pseudo-arclength continuation of the nullcline intersection equations
//!
//! ```text
//! F₁ = (1 − x/γ)(1 + x² + αξ) − xy = 0
//! F₂ = δ(x² + ξ) − (m + εy)(1 + x² + αξ) = 0
//! ```
//!
//! with folds, focus-node transitions and Hopf candidates located by
//! bisection in arclength.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    eigenvalues, equilibrium_at, find_interior_equilibria, Equilibrium, EquilibriumKind,
};
use crate::error::{Error, Result};
use crate::model::{
    d_jacobian_d_xi, d_rhs_d_xi, hessians, jacobian, ModelParams, ParamName, State,
};
use crate::simulation::{integrate_nonautonomous, IntegratorOptions, Trajectory};

/// Parameter-width of the bracket around every reported event.
pub const TOL_BIF: f64 = 1e-8;

/// Magnitude below which a Sotomayor quantity counts as zero.
pub const SOTOMAYOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BifurcationKind {
    Transcritical,
    SaddleNode,
    Hopf,
    Fold,
    FocusNodeTransition,
}

impl BifurcationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BifurcationKind::Transcritical => "transcritical",
            BifurcationKind::SaddleNode => "saddle_node",
            BifurcationKind::Hopf => "hopf",
            BifurcationKind::Fold => "fold",
            BifurcationKind::FocusNodeTransition => "focus_node_transition",
        }
    }
}

/// Sotomayor quantities for a zero eigenvalue, with `V` and `W` the right
/// and left null vectors of the Jacobian and `μ = ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sotomayor {
    pub v: [f64; 2],
    pub w: [f64; 2],
    /// W·H_ξ
    pub w_h_mu: f64,
    /// W·(DH_ξ V)
    pub w_dh_mu_v: f64,
    /// W·D²H(V, V)
    pub w_d2h_vv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SotomayorVerdict {
    /// W·H_ξ = 0, W·DH_ξV ≠ 0, W·D²H(V,V) ≠ 0.
    Transcritical,
    /// W·H_ξ ≠ 0, W·D²H(V,V) ≠ 0.
    SaddleNode,
    Degenerate,
}

impl Sotomayor {
    pub fn verdict(&self) -> SotomayorVerdict {
        let nz = |v: f64| v.abs() > SOTOMAYOR_TOL;
        if !nz(self.w_d2h_vv) {
            SotomayorVerdict::Degenerate
        } else if nz(self.w_h_mu) {
            SotomayorVerdict::SaddleNode
        } else if nz(self.w_dh_mu_v) {
            SotomayorVerdict::Transcritical
        } else {
            SotomayorVerdict::Degenerate
        }
    }
}

/// Null vector of a rank-one 2×2 matrix, scaled so its first significant
/// component is 1.
fn null_vector(a: &Matrix2<f64>) -> [f64; 2] {
    let r0 = (a[(0, 0)], a[(0, 1)]);
    let r1 = (a[(1, 0)], a[(1, 1)]);
    let row = if r0.0.abs() + r0.1.abs() >= r1.0.abs() + r1.1.abs() {
        r0
    } else {
        r1
    };
    let v = if row.0 == 0.0 && row.1 == 0.0 {
        (1.0, 0.0)
    } else {
        (-row.1, row.0)
    };
    if v.0.abs() > 1e-12 * v.1.abs() {
        [1.0, v.1 / v.0]
    } else {
        [0.0, 1.0]
    }
}

/// Sotomayor quantities at an equilibrium with a zero eigenvalue.
pub fn sotomayor(p: &ModelParams, at: State) -> Sotomayor {
    let j = jacobian(p, at);
    let v = null_vector(&j);
    let w = null_vector(&j.transpose());
    let h_mu = d_rhs_d_xi(p, at);
    let dh = d_jacobian_d_xi(p, at) * Vector2::new(v[0], v[1]);
    let [fxx, fxy, fyy, gxx, gxy, gyy] = hessians(p, at);
    let quad = |a: f64, b: f64, c: f64| a * v[0] * v[0] + 2.0 * b * v[0] * v[1] + c * v[1] * v[1];
    let d2 = (quad(fxx, fxy, fyy), quad(gxx, gxy, gyy));
    Sotomayor {
        v,
        w,
        w_h_mu: w[0] * h_mu.x + w[1] * h_mu.y,
        w_dh_mu_v: w[0] * dh[0] + w[1] * dh[1],
        w_d2h_vv: w[0] * d2.0 + w[1] * d2.1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDiagnostics {
    pub eigenvalues: [Complex64; 2],
    pub sotomayor: Option<Sotomayor>,
    /// Whether the nondegeneracy conditions for `kind` hold.
    pub conditions_hold: Option<bool>,
    /// Test function values at the bracket ends.
    pub test_values: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: BifurcationKind,
    pub param_name: ParamName,
    pub param_value: f64,
    /// Parameter interval over which the test function changes sign.
    pub bracket: (f64, f64),
    pub location: State,
    pub diagnostics: EventDiagnostics,
}

/// Bisects a sign change of `f` starting from a bracket around `guess`.
fn bracket_root<F: Fn(f64) -> f64>(f: F, guess: f64) -> Option<((f64, f64), (f64, f64))> {
    let half = 1e-3 * guess.abs().max(1.0);
    let (mut lo, mut hi) = (guess - half, guess + half);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        if hi - lo <= 0.1 * TOL_BIF {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(((mid, mid), (0.0, 0.0)));
        }
        if fm * flo < 0.0 {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(((lo, hi), (flo, fhi)))
}

/// Critical ξ at which E₁ = (γ, 0) exchanges stability with the interior
/// branch, `ξ* = (m(1+γ²) − δγ²)/(δ − mα)`.
pub fn transcritical_xi_critical(p: &ModelParams) -> Result<BifurcationEvent> {
    let denom = p.delta - p.m * p.alpha;
    if denom == 0.0 {
        return Err(Error::Degenerate("δ = mα".into()));
    }
    let g2 = p.gamma * p.gamma;
    if 1.0 + (1.0 - p.alpha) * g2 == 0.0 {
        return Err(Error::Degenerate("1 + (1−α)γ² = 0".into()));
    }
    let xi = (p.m * (1.0 + g2) - p.delta * g2) / denom;
    if !(xi > 0.0) {
        return Err(Error::domain("xi*", xi, "critical value is not positive"));
    }
    let e1 = State::new(p.gamma, 0.0);
    // second eigenvalue of J(E₁)
    let test = |x: f64| jacobian(&p.with(ParamName::Xi, x), e1)[(1, 1)];
    let (bracket, test_values) = bracket_root(test, xi)
        .ok_or_else(|| Error::Degenerate("no sign change of the E₁ eigenvalue near ξ*".into()))?;
    let at = p.with(ParamName::Xi, xi);
    let s = sotomayor(&at, e1);
    Ok(BifurcationEvent {
        kind: BifurcationKind::Transcritical,
        param_name: ParamName::Xi,
        param_value: xi,
        bracket,
        location: e1,
        diagnostics: EventDiagnostics {
            eigenvalues: eigenvalues(&jacobian(&at, e1)),
            sotomayor: Some(s),
            conditions_hold: Some(s.verdict() == SotomayorVerdict::Transcritical),
            test_values,
        },
    })
}

/// Critical ξ at which the prey-free point E₂ reaches the boundary of
/// existence, `ξ* = m/(δ − mα)`.
///
/// At this value E₂ coincides with E₀, so W·H_ξ vanishes and the
/// saddle-node conditions are reported as not holding.
pub fn saddlenode_xi_critical(p: &ModelParams) -> Result<BifurcationEvent> {
    let denom = p.delta - p.m * p.alpha;
    if denom == 0.0 {
        return Err(Error::Degenerate("δ = mα".into()));
    }
    let xi = p.m / denom;
    if !(xi > 0.0) {
        return Err(Error::domain("xi*", xi, "critical value is not positive"));
    }
    let test = |x: f64| p.with(ParamName::Xi, x).phi1();
    let (bracket, test_values) = bracket_root(test, xi)
        .ok_or_else(|| Error::Degenerate("no sign change of φ₁ near ξ*".into()))?;
    let at = p.with(ParamName::Xi, xi);
    let e2 = State::new(0.0, (at.phi1() / (at.epsilon * at.food_factor())).max(0.0));
    let s = sotomayor(&at, e2);
    Ok(BifurcationEvent {
        kind: BifurcationKind::SaddleNode,
        param_name: ParamName::Xi,
        param_value: xi,
        bracket,
        location: e2,
        diagnostics: EventDiagnostics {
            eigenvalues: eigenvalues(&jacobian(&at, e2)),
            sotomayor: Some(s),
            conditions_hold: Some(s.verdict() == SotomayorVerdict::SaddleNode),
            test_values,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param_value: f64,
    pub equilibrium: Equilibrium,
    pub branch_id: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub events: Vec<BifurcationEvent>,
    /// Set when the branch stopped before the end of the range.
    pub truncated: Option<String>,
}

impl Branch {
    pub fn events_of(&self, kind: BifurcationKind) -> impl Iterator<Item = &BifurcationEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    /// First step as a fraction of the range.
    pub initial_step: f64,
    pub max_step: f64,
    pub max_halvings: u32,
    pub max_points: usize,
    pub newton_tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            initial_step: 1e-4,
            max_step: 1e-2,
            max_halvings: 12,
            max_points: 200_000,
            newton_tol: 1e-11,
        }
    }
}

/// Interior-equilibrium equations with the parameter rescaled to
/// `μ̂ = (μ − start)/(end − start)`.
struct BranchSystem {
    base: ModelParams,
    name: ParamName,
    start: f64,
    span: f64,
}

impl BranchSystem {
    fn mu(&self, mu_hat: f64) -> f64 {
        self.start + self.span * mu_hat
    }

    fn params(&self, mu_hat: f64) -> ModelParams {
        self.base.with(self.name, self.mu(mu_hat))
    }

    fn f(&self, z: &Vector3<f64>) -> Vector2<f64> {
        let p = self.params(z[2]);
        let (x, y) = (z[0], z[1]);
        let d = 1.0 + x * x + p.alpha * p.xi;
        Vector2::new(
            (1.0 - x / p.gamma) * d - x * y,
            p.delta * (x * x + p.xi) - (p.m + p.epsilon * y) * d,
        )
    }

    /// Rows ∂F₁ and ∂F₂ with respect to (x, y, μ̂).
    fn jac(&self, z: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let p = self.params(z[2]);
        let (x, y) = (z[0], z[1]);
        let d = 1.0 + x * x + p.alpha * p.xi;
        let c = p.m + p.epsilon * y;
        let f1x = -d / p.gamma + (1.0 - x / p.gamma) * 2.0 * x - y;
        let f1y = -x;
        let f2x = 2.0 * x * (p.delta - c);
        let f2y = -p.epsilon * d;
        let (f1p, f2p) = match self.name {
            ParamName::Gamma => (x * d / (p.gamma * p.gamma), 0.0),
            ParamName::Alpha => ((1.0 - x / p.gamma) * p.xi, -c * p.xi),
            ParamName::Xi => ((1.0 - x / p.gamma) * p.alpha, p.delta - c * p.alpha),
            ParamName::Epsilon => (0.0, -y * d),
            ParamName::M => (0.0, -d),
            ParamName::Delta => (0.0, x * x + p.xi),
        };
        (
            Vector3::new(f1x, f1y, f1p * self.span),
            Vector3::new(f2x, f2y, f2p * self.span),
        )
    }

    fn tangent(&self, z: &Vector3<f64>, orient: &Vector3<f64>) -> Vector3<f64> {
        let (a, b) = self.jac(z);
        let t = a.cross(&b).normalize();
        if t.dot(orient) < 0.0 {
            -t
        } else {
            t
        }
    }

    /// Newton on (F, t·(z − anchor)) = 0 from `anchor`.
    fn correct(&self, anchor: Vector3<f64>, t: &Vector3<f64>, tol: f64) -> Option<(Vector3<f64>, usize)> {
        let mut z = anchor;
        for it in 1..=15 {
            let f = self.f(&z);
            let (a, b) = self.jac(&z);
            let m = Matrix3::from_rows(&[a.transpose(), b.transpose(), t.transpose()]);
            let rhs = -Vector3::new(f[0], f[1], t.dot(&(z - anchor)));
            let dz = m.lu().solve(&rhs)?;
            z += dz;
            if !z.iter().all(|v| v.is_finite()) {
                return None;
            }
            if dz.norm() <= 1e-13 * (1.0 + z.norm()) || (self.f(&z).amax() <= tol && dz.norm() < 1e-9) {
                return (self.f(&z).amax() <= tol * 10.0).then_some((z, it));
            }
        }
        None
    }

    /// Newton in (x, y) at fixed μ̂.
    fn correct_fixed(&self, mut z: Vector3<f64>, tol: f64) -> Option<Vector3<f64>> {
        for _ in 0..50 {
            let f = self.f(&z);
            let (a, b) = self.jac(&z);
            let m = Matrix2::new(a[0], a[1], b[0], b[1]);
            let d = m.lu().solve(&(-f))?;
            z[0] += d[0];
            z[1] += d[1];
            if d.norm() <= 1e-14 * (1.0 + z.norm()) {
                break;
            }
        }
        (self.f(&z).amax() <= tol * 10.0).then_some(z)
    }

    fn inside(&self, z: &Vector3<f64>) -> bool {
        let p = self.params(z[2]);
        z[0] > 0.0 && z[0] < p.gamma && z[1] > 0.0
    }

    fn equilibrium(&self, z: &Vector3<f64>) -> Equilibrium {
        equilibrium_at(&self.params(z[2]), State::new(z[0], z[1]), EquilibriumKind::Interior)
    }
}

/// Trace and determinant of the Jacobian at a branch point.
fn trace_det(sys: &BranchSystem, z: &Vector3<f64>) -> (f64, f64) {
    let j = jacobian(&sys.params(z[2]), State::new(z[0], z[1]));
    (j.trace(), j.determinant())
}

#[derive(Clone, Copy)]
struct Node {
    z: Vector3<f64>,
    t: Vector3<f64>,
}

/// Pseudo-arclength continuation of an interior equilibrium in `name`
/// from `range.0` to `range.1` (either order). `seed` must be an interior
/// equilibrium at `range.0`; it is re-polished before the first step.
pub fn continue_branch(
    p: &ModelParams,
    name: ParamName,
    range: (f64, f64),
    seed: &Equilibrium,
    opts: &ContinuationOptions,
) -> Result<Branch> {
    continue_branch_with_id(p, name, range, seed, opts, 0)
}

fn continue_branch_with_id(
    p: &ModelParams,
    name: ParamName,
    range: (f64, f64),
    seed: &Equilibrium,
    opts: &ContinuationOptions,
    branch_id: usize,
) -> Result<Branch> {
    let span = range.1 - range.0;
    if !(span.is_finite() && span != 0.0) {
        return Err(Error::Config(format!("empty continuation range {range:?}")));
    }
    let sys = BranchSystem {
        base: *p,
        name,
        start: range.0,
        span,
    };
    let tol = opts.newton_tol;
    let z0 = Vector3::new(seed.location.x, seed.location.y, 0.0);
    let z0 = sys
        .correct_fixed(z0, tol)
        .filter(|z| sys.inside(z))
        .ok_or_else(|| Error::Degenerate("seed is not an interior equilibrium at the range start".into()))?;

    let mut branch = Branch::default();
    let push = |branch: &mut Branch, z: &Vector3<f64>| {
        branch.points.push(BranchPoint {
            param_value: sys.mu(z[2]),
            equilibrium: sys.equilibrium(z),
            branch_id,
        })
    };
    push(&mut branch, &z0);
    let mut node = Node {
        z: z0,
        t: sys.tangent(&z0, &Vector3::new(0.0, 0.0, 1.0)),
    };
    let mut h = opts.initial_step;
    let mut halvings = 0u32;

    while branch.points.len() < opts.max_points {
        let pred = node.z + node.t * h;
        let corrected = sys.correct(pred, &node.t, tol).and_then(|(z, it)| {
            let t = sys.tangent(&z, &node.t);
            // reject steps that jump branches or turn sharply
            let ok = (z - pred).norm() <= 0.5 * h.max(1e-12) + 1e-10 && t.dot(&node.t) > 0.9;
            ok.then_some((z, t, it))
        });
        let Some((z, t, iters)) = corrected else {
            h *= 0.5;
            halvings += 1;
            if halvings > opts.max_halvings {
                branch.truncated = Some(format!(
                    "step size underflow at {} = {}",
                    name.as_str(),
                    sys.mu(node.z[2])
                ));
                return Ok(branch);
            }
            continue;
        };
        halvings = 0;

        if z[2] >= 1.0 {
            // finish exactly at the range end
            let frac = (1.0 - node.z[2]) / (z[2] - node.z[2]);
            let mut guess = node.z + (z - node.z) * frac;
            guess[2] = 1.0;
            let next = Node { z, t };
            scan_events(&sys, &node, &next, h, &mut branch)?;
            if let Some(end) = sys.correct_fixed(guess, tol).filter(|e| sys.inside(e)) {
                push(&mut branch, &end);
            } else {
                push(&mut branch, &z);
            }
            return Ok(branch);
        }
        if !sys.inside(&z) {
            branch.truncated = Some(format!(
                "branch leaves the interior near {} = {}",
                name.as_str(),
                sys.mu(z[2])
            ));
            return Ok(branch);
        }
        if z[2] < -1e-9 && t[2] < 0.0 && branch.points.len() > 1 {
            branch.truncated = Some(format!("branch returns below the range start at {} = {}", name.as_str(), sys.mu(z[2])));
            return Ok(branch);
        }

        let next = Node { z, t };
        scan_events(&sys, &node, &next, h, &mut branch)?;
        push(&mut branch, &z);
        node = next;
        if iters <= 3 {
            h = (h * 1.5).min(opts.max_step);
        }
    }
    branch.truncated = Some("point budget exhausted".into());
    Ok(branch)
}

fn fold_test(_sys: &BranchSystem, n: &Node) -> f64 {
    n.t[2]
}

fn focus_node_test(sys: &BranchSystem, n: &Node) -> f64 {
    let (tr, det) = trace_det(sys, &n.z);
    tr * tr - 4.0 * det
}

fn hopf_test(sys: &BranchSystem, n: &Node) -> f64 {
    trace_det(sys, &n.z).0
}

fn scan_events(sys: &BranchSystem, a: &Node, b: &Node, h: f64, branch: &mut Branch) -> Result<()> {
    type Test = fn(&BranchSystem, &Node) -> f64;
    let tests: [(BifurcationKind, Test); 3] = [
        (BifurcationKind::Fold, fold_test),
        (BifurcationKind::FocusNodeTransition, focus_node_test),
        (BifurcationKind::Hopf, hopf_test),
    ];
    for (kind, test) in tests {
        let (fa, fb) = (test(sys, a), test(sys, b));
        if fa * fb >= 0.0 && !(fa == 0.0 && fb != 0.0) {
            continue;
        }
        if kind == BifurcationKind::Hopf {
            let (_, da) = trace_det(sys, &a.z);
            let (_, db) = trace_det(sys, &b.z);
            if da <= 0.0 || db <= 0.0 {
                continue;
            }
        }
        branch.events.push(refine(sys, a, h, kind, test, fa, fb));
    }
    Ok(())
}

/// Bisection in arclength on the segment leaving `a` along its tangent.
fn refine(
    sys: &BranchSystem,
    a: &Node,
    h: f64,
    kind: BifurcationKind,
    test: fn(&BranchSystem, &Node) -> f64,
    fa: f64,
    fb: f64,
) -> BifurcationEvent {
    let at = |s: f64| -> Option<Node> {
        let (z, _) = sys.correct(a.z + a.t * s, &a.t, 1e-11)?;
        Some(Node {
            z,
            t: sys.tangent(&z, &a.t),
        })
    };
    let (mut lo, mut hi) = (0.0, h);
    let (mut n_lo, mut n_hi) = (*a, at(h).unwrap_or(*a));
    let (mut f_lo, mut f_hi) = (fa, fb);
    for _ in 0..200 {
        if (sys.mu(n_hi.z[2]) - sys.mu(n_lo.z[2])).abs() <= 0.5 * TOL_BIF || hi - lo < 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let Some(n) = at(mid) else { break };
        let fm = test(sys, &n);
        if fm * f_lo <= 0.0 && f_lo != 0.0 {
            hi = mid;
            n_hi = n;
            f_hi = fm;
        } else {
            lo = mid;
            n_lo = n;
            f_lo = fm;
        }
    }
    let z = (n_lo.z + n_hi.z) * 0.5;
    let (m_lo, m_hi) = (sys.mu(n_lo.z[2]), sys.mu(n_hi.z[2]));
    let e = sys.equilibrium(&z);
    BifurcationEvent {
        kind,
        param_name: sys.name,
        param_value: sys.mu(z[2]),
        bracket: (m_lo.min(m_hi), m_lo.max(m_hi)),
        location: e.location,
        diagnostics: EventDiagnostics {
            eigenvalues: e.eigenvalues,
            sotomayor: None,
            conditions_hold: None,
            test_values: (f_lo, f_hi),
        },
    }
}

fn same_point(a: &Equilibrium, b: &Equilibrium) -> bool {
    a.location.dist(&b.location) <= 1e-6 * (1.0 + a.location.norm_inf())
}

/// All interior branches crossing the range: seeded from every interior
/// equilibrium at `range.0` (continued forward) and from those at
/// `range.1` not already reached (continued backward).
pub fn trace_branches(
    p: &ModelParams,
    name: ParamName,
    range: (f64, f64),
    opts: &ContinuationOptions,
) -> Result<Vec<Branch>> {
    let mut branches: Vec<Branch> = Vec::new();
    let start = find_interior_equilibria(&p.with(name, range.0))?;
    for seed in &start {
        let id = branches.len();
        branches.push(continue_branch_with_id(p, name, range, seed, opts, id)?);
    }
    let end = find_interior_equilibria(&p.with(name, range.1))?;
    for seed in &end {
        let reached = branches.iter().any(|b| {
            b.points.iter().any(|pt| {
                (pt.param_value - range.1).abs() <= 1e-12 * range.1.abs().max(1.0)
                    && same_point(&pt.equilibrium, seed)
            })
        });
        if reached {
            continue;
        }
        let id = branches.len();
        branches.push(continue_branch_with_id(p, name, (range.1, range.0), seed, opts, id)?);
    }
    Ok(branches)
}

/// Hopf candidates: sign changes of the trace along interior branches
/// while the determinant is positive. Criticality is not assessed.
pub fn detect_hopf(
    p: &ModelParams,
    name: ParamName,
    range: (f64, f64),
    opts: &ContinuationOptions,
) -> Result<Vec<BifurcationEvent>> {
    let mut out: Vec<BifurcationEvent> = Vec::new();
    for branch in trace_branches(p, name, range, opts)? {
        for e in branch.events_of(BifurcationKind::Hopf) {
            let dup = out.iter().any(|o| {
                (o.param_value - e.param_value).abs() <= 1e-6 && o.location.dist(&e.location) <= 1e-4
            });
            if !dup {
                out.push(e.clone());
            }
        }
    }
    out.sort_by(|a, b| a.param_value.total_cmp(&b.param_value));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub eps: f64,
    /// `true` when ε is increasing at the jump.
    pub rising: bool,
    pub dx_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub eps_min: f64,
    pub eps_max: f64,
    pub period: f64,
    pub cycles: u32,
    /// Integrator output; `eps_effective` holds the schedule.
    pub trajectory: Trajectory,
    /// Signed area of the (ε, x) curve over the final cycle,
    /// counter-clockwise positive.
    pub loop_area_proxy: f64,
    /// Largest |dx/dt| while ε rises and while it falls, final cycle.
    pub jumps: Vec<Jump>,
}

/// `ε(t) = mid + half·sin(2πt/period)`.
pub fn sine_schedule(eps_min: f64, eps_max: f64, period: f64) -> impl Fn(f64) -> f64 + Copy {
    let mid = 0.5 * (eps_min + eps_max);
    let half = 0.5 * (eps_max - eps_min);
    move |t: f64| mid + half * (2.0 * std::f64::consts::PI * t / period).sin()
}

/// Samples per period used for the loop area and jump search.
const SWEEP_SAMPLES: usize = 20_000;

/// Integrates with a sinusoidal ε sweep over `cycles` periods.
pub fn hysteresis_sweep(
    p: &ModelParams,
    eps_min: f64,
    eps_max: f64,
    period: f64,
    cycles: u32,
    initial: State,
    opts: &IntegratorOptions,
) -> Result<SweepResult> {
    if !(eps_min > 0.0 && eps_max >= eps_min && eps_max.is_finite()) {
        return Err(Error::Config(format!(
            "sweep range must satisfy 0 < eps_min <= eps_max, got ({eps_min}, {eps_max})"
        )));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::domain("period", period, "must be finite and > 0"));
    }
    if cycles == 0 {
        return Err(Error::Config("cycles must be at least 1".into()));
    }
    let eps = sine_schedule(eps_min, eps_max, period);
    let t_end = period * cycles as f64;
    let trajectory = integrate_nonautonomous(p, eps, initial, t_end, opts)?;

    let t0 = t_end - period;
    let samples = trajectory.resample(t0, t_end, SWEEP_SAMPLES + 1);
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(t, s)| (eps(t), s.x)).collect();
    let loop_area_proxy = shoelace(&pts);

    let mut jumps = Vec::new();
    if eps_max > eps_min {
        let w = 2.0 * std::f64::consts::PI / period;
        let mut best: [Option<Jump>; 2] = [None, None];
        for &(t, s) in &samples {
            let rising = (w * t).cos() > 0.0;
            let mut q = *p;
            q.epsilon = eps(t);
            let dx = crate::model::rhs(&q, s).x;
            let slot = &mut best[rising as usize];
            if slot.is_none_or(|j| dx.abs() > j.dx_dt.abs()) {
                *slot = Some(Jump {
                    time: t,
                    eps: eps(t),
                    rising,
                    dx_dt: dx,
                });
            }
        }
        jumps.extend(best.into_iter().rev().flatten());
    }
    Ok(SweepResult {
        eps_min,
        eps_max,
        period,
        cycles,
        trajectory,
        loop_area_proxy,
        jumps,
    })
}

/// Signed area of a closed polygon, counter-clockwise positive.
pub fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}
