//! Sequential quadratic programming for equality constraints and simple
//! bounds.
//!
//! Each iteration solves the elastic subproblem
//!
//! ```text
//! min  ½dᵀBd + gᵀd + ρ·1ᵀ(s⁺ + s⁻)
//! s.t. A d + s⁺ − s⁻ = −c,   l − x ≤ d ≤ u − x,   s± ≥ 0
//! ```
//!
//! by a Mehrotra predictor–corrector interior-point method, then steps along
//! `d` with a backtracking line search on the l1 merit `f + ρ‖c‖₁`. `B` is a
//! damped BFGS approximation of the Lagrangian Hessian. Multipliers follow
//! `L = f − λᵀc`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

pub struct NlpEval {
    pub f: f64,
    pub c: DVector<f64>,
    /// Gradient and constraint Jacobian, when requested.
    pub derivs: Option<(DVector<f64>, DMatrix<f64>)>,
}

pub trait Nlp {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
    fn eval(&self, x: &DVector<f64>, derivs: bool) -> Result<NlpEval>;

    /// Hessian of `f − λᵀc`; quasi-Newton updates are used when `None`.
    fn hessian(&self, _x: &DVector<f64>, _lambda: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqpOptions {
    /// Stationarity and complementarity tolerance.
    pub kkt_tol: f64,
    /// Constraint violation tolerance (max-norm).
    pub feas_tol: f64,
    pub max_iter: usize,
    pub max_penalty: f64,
}

impl Default for SqpOptions {
    fn default() -> Self {
        SqpOptions {
            kkt_tol: 1e-7,
            feas_tol: 1e-9,
            max_iter: 500,
            max_penalty: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqpStatus {
    Converged,
    MaxIterations,
    /// The linearised constraints stayed inconsistent at a stationary point
    /// of the constraint violation.
    Infeasible,
    /// Line search failed repeatedly.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SqpResult {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub f: f64,
    pub feasibility: f64,
    pub kkt: f64,
    pub iterations: usize,
    pub status: SqpStatus,
    /// Iterate with the smallest constraint violation seen.
    pub best_x: DVector<f64>,
    pub best_feasibility: f64,
}

struct QpSolution {
    d: DVector<f64>,
    y: DVector<f64>,
    zl: DVector<f64>,
    zu: DVector<f64>,
    slack: f64,
    converged: bool,
}

/// Elastic QP by primal–dual interior point.
fn solve_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    a: &DMatrix<f64>,
    e: &DVector<f64>,
    lo: &[f64],
    hi: &[f64],
    rho: f64,
) -> QpSolution {
    let n = g.len();
    let m = e.len();
    let has_lo: Vec<bool> = lo.iter().map(|v| v.is_finite()).collect();
    let has_hi: Vec<bool> = hi.iter().map(|v| v.is_finite()).collect();

    let mut d = DVector::<f64>::zeros(n);
    for i in 0..n {
        let (l, u) = (lo[i], hi[i]);
        let k = if has_lo[i] && has_hi[i] {
            1e-2 * (u - l).min(2.0) * 0.5
        } else {
            1e-2
        };
        let mut v = 0.0f64;
        if has_lo[i] {
            v = v.max(l + k);
        }
        if has_hi[i] {
            v = v.min(u - k);
        }
        d[i] = v;
    }
    let r = e - a * &d;
    let mut sp = DVector::from_fn(m, |i, _| r[i].max(0.0) + 1.0);
    let mut sn = DVector::from_fn(m, |i, _| (-r[i]).max(0.0) + 1.0);
    let mut y = DVector::<f64>::zeros(m);
    let mut zl = DVector::from_fn(n, |i, _| if has_lo[i] { 1.0 } else { 0.0 });
    let mut zu = DVector::from_fn(n, |i, _| if has_hi[i] { 1.0 } else { 0.0 });
    let mut zp = DVector::from_element(m, 1.0);
    let mut zn = DVector::from_element(m, 1.0);
    let nb = has_lo.iter().filter(|&&b| b).count() + has_hi.iter().filter(|&&b| b).count() + 2 * m;

    let g_scale = 1.0 + g.amax() + rho;
    let e_scale = 1.0 + e.amax();
    let mut converged = false;

    for _ in 0..100 {
        let sl = DVector::from_fn(n, |i, _| if has_lo[i] { d[i] - lo[i] } else { 1.0 });
        let tu = DVector::from_fn(n, |i, _| if has_hi[i] { hi[i] - d[i] } else { 1.0 });
        let rd = h * &d + g - a.transpose() * &y - &zl + &zu;
        let rdp = DVector::from_fn(m, |i, _| rho - y[i] - zp[i]);
        let rdn = DVector::from_fn(m, |i, _| rho + y[i] - zn[i]);
        let rp = a * &d + &sp - &sn - e;
        let mut comp = 0.0;
        for i in 0..n {
            if has_lo[i] {
                comp += sl[i] * zl[i];
            }
            if has_hi[i] {
                comp += tu[i] * zu[i];
            }
        }
        comp += sp.dot(&zp) + sn.dot(&zn);
        let mu = comp / nb as f64;
        let dual_res = rd.amax().max(rdp.amax()).max(rdn.amax());
        if dual_res <= 1e-11 * g_scale && rp.amax() <= 1e-11 * e_scale && mu <= 1e-13 * g_scale {
            converged = true;
            break;
        }

        let sig_d = DVector::from_fn(n, |i, _| {
            let mut s = 0.0;
            if has_lo[i] {
                s += zl[i] / sl[i];
            }
            if has_hi[i] {
                s += zu[i] / tu[i];
            }
            s
        });
        let sig_p = zp.component_div(&sp);
        let sig_n = zn.component_div(&sn);
        let mut k = DMatrix::<f64>::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(h);
        for i in 0..n {
            k[(i, i)] += sig_d[i] + 1e-12;
        }
        k.view_mut((0, n), (n, m)).copy_from(&(-a.transpose()));
        k.view_mut((n, 0), (m, n)).copy_from(a);
        for i in 0..m {
            k[(n + i, n + i)] = 1.0 / sig_p[i] + 1.0 / sig_n[i];
        }
        let Some(lu) = Some(k.lu()) else { break };

        // complementarity right-hand sides: lower (d, s⁺, s⁻) and upper (d)
        struct Dir {
            dd: DVector<f64>,
            dy: DVector<f64>,
            dsp: DVector<f64>,
            dsn: DVector<f64>,
            dzl: DVector<f64>,
            dzu: DVector<f64>,
            dzp: DVector<f64>,
            dzn: DVector<f64>,
        }
        let direction = |rl: &DVector<f64>, ru: &DVector<f64>, rpp: &DVector<f64>, rnn: &DVector<f64>| -> Option<Dir> {
            let gd = DVector::from_fn(n, |i, _| {
                let mut v = -rd[i];
                if has_lo[i] {
                    v += rl[i] / sl[i];
                }
                if has_hi[i] {
                    v -= ru[i] / tu[i];
                }
                v
            });
            let gp = DVector::from_fn(m, |i, _| -rdp[i] + rpp[i] / sp[i]);
            let gn = DVector::from_fn(m, |i, _| -rdn[i] + rnn[i] / sn[i]);
            let mut rhs = DVector::<f64>::zeros(n + m);
            rhs.rows_mut(0, n).copy_from(&gd);
            for i in 0..m {
                rhs[n + i] = -rp[i] - gp[i] / sig_p[i] + gn[i] / sig_n[i];
            }
            let sol = lu.solve(&rhs)?;
            let dd = sol.rows(0, n).into_owned();
            let dy = sol.rows(n, m).into_owned();
            let dsp = DVector::from_fn(m, |i, _| (gp[i] + dy[i]) / sig_p[i]);
            let dsn = DVector::from_fn(m, |i, _| (gn[i] - dy[i]) / sig_n[i]);
            let dzl = DVector::from_fn(n, |i, _| if has_lo[i] { (rl[i] - zl[i] * dd[i]) / sl[i] } else { 0.0 });
            let dzu = DVector::from_fn(n, |i, _| if has_hi[i] { (ru[i] + zu[i] * dd[i]) / tu[i] } else { 0.0 });
            let dzp = DVector::from_fn(m, |i, _| (rpp[i] - zp[i] * dsp[i]) / sp[i]);
            let dzn = DVector::from_fn(m, |i, _| (rnn[i] - zn[i] * dsn[i]) / sn[i]);
            Some(Dir { dd, dy, dsp, dsn, dzl, dzu, dzp, dzn })
        };
        let max_step = |dir: &Dir| -> f64 {
            let mut alpha: f64 = 1.0;
            let mut limit = |v: f64, dv: f64| {
                if dv < 0.0 {
                    alpha = alpha.min(-v / dv);
                }
            };
            for i in 0..n {
                if has_lo[i] {
                    limit(sl[i], dir.dd[i]);
                    limit(zl[i], dir.dzl[i]);
                }
                if has_hi[i] {
                    limit(tu[i], -dir.dd[i]);
                    limit(zu[i], dir.dzu[i]);
                }
            }
            for i in 0..m {
                limit(sp[i], dir.dsp[i]);
                limit(sn[i], dir.dsn[i]);
                limit(zp[i], dir.dzp[i]);
                limit(zn[i], dir.dzn[i]);
            }
            alpha
        };

        let rl0 = DVector::from_fn(n, |i, _| -sl[i] * zl[i]);
        let ru0 = DVector::from_fn(n, |i, _| -tu[i] * zu[i]);
        let rp0 = DVector::from_fn(m, |i, _| -sp[i] * zp[i]);
        let rn0 = DVector::from_fn(m, |i, _| -sn[i] * zn[i]);
        let Some(aff) = direction(&rl0, &ru0, &rp0, &rn0) else { break };
        let a_aff = max_step(&aff);
        let mut comp_aff = 0.0;
        for i in 0..n {
            if has_lo[i] {
                comp_aff += (sl[i] + a_aff * aff.dd[i]) * (zl[i] + a_aff * aff.dzl[i]);
            }
            if has_hi[i] {
                comp_aff += (tu[i] - a_aff * aff.dd[i]) * (zu[i] + a_aff * aff.dzu[i]);
            }
        }
        for i in 0..m {
            comp_aff += (sp[i] + a_aff * aff.dsp[i]) * (zp[i] + a_aff * aff.dzp[i]);
            comp_aff += (sn[i] + a_aff * aff.dsn[i]) * (zn[i] + a_aff * aff.dzn[i]);
        }
        let mu_aff = comp_aff / nb as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let target = sigma * mu;

        let rl = DVector::from_fn(n, |i, _| target - sl[i] * zl[i] - aff.dd[i] * aff.dzl[i]);
        let ru = DVector::from_fn(n, |i, _| target - tu[i] * zu[i] + aff.dd[i] * aff.dzu[i]);
        let rpp = DVector::from_fn(m, |i, _| target - sp[i] * zp[i] - aff.dsp[i] * aff.dzp[i]);
        let rnn = DVector::from_fn(m, |i, _| target - sn[i] * zn[i] - aff.dsn[i] * aff.dzn[i]);
        let Some(dir) = direction(&rl, &ru, &rpp, &rnn) else { break };
        let eta = (1.0 - mu).max(0.99).min(0.9999);
        let step = (eta * max_step(&dir)).min(1.0);

        d += &dir.dd * step;
        y += &dir.dy * step;
        sp += &dir.dsp * step;
        sn += &dir.dsn * step;
        zl += &dir.dzl * step;
        zu += &dir.dzu * step;
        zp += &dir.dzp * step;
        zn += &dir.dzn * step;
        if !d.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    QpSolution {
        slack: sp.sum() + sn.sum(),
        d,
        y,
        zl,
        zu,
        converged,
    }
}

/// Positive definite stand-in for a Lagrangian Hessian. Adding `νAᵀA`
/// leaves the curvature on the constraint tangent space untouched; the
/// eigenvalue clip is the last resort.
fn convexify(h: DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let sym = (&h + h.transpose()) * 0.5;
    let scale = 1.0 + sym.diagonal().amax();
    let ata = a.transpose() * a;
    for nu in [0.0, 1e-2, 1.0, 1e2, 1e4, 1e6] {
        let mut m = &sym + &ata * nu;
        for i in 0..n {
            m[(i, i)] += 1e-10 * scale;
        }
        if m.clone().cholesky().is_some() {
            return m;
        }
    }
    let eig = sym.symmetric_eigen();
    let floor = 1e-8 * scale;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.abs().max(floor)));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn l1(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Projects `x` onto the box.
fn clip(x: &mut DVector<f64>, lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

pub fn solve_nlp<P: Nlp>(nlp: &P, x0: &DVector<f64>, opts: &SqpOptions) -> Result<SqpResult> {
    let n = nlp.n();
    let (lo, hi) = nlp.bounds();
    let mut x = x0.clone();
    clip(&mut x, &lo, &hi);
    let mut ev = nlp.eval(&x, true)?;
    let mut b = DMatrix::<f64>::identity(n, n);
    let mut rho: f64 = 1.0;
    let mut stalls = 0usize;
    let mut lambda = DVector::<f64>::zeros(nlp.m());
    let mut best_x = x.clone();
    let mut best_feas = ev.c.amax();
    let mut kkt = f64::INFINITY;
    let mut small_elastic_steps = 0usize;

    for it in 0..opts.max_iter {
        let (g, a) = ev.derivs.clone().expect("derivatives requested");
        let feas = ev.c.amax();
        if feas < best_feas {
            best_feas = feas;
            best_x = x.clone();
        }
        let dlo: Vec<f64> = (0..n).map(|i| lo[i] - x[i]).collect();
        let dhi: Vec<f64> = (0..n).map(|i| hi[i] - x[i]).collect();
        let e = -&ev.c;

        let exact = nlp.hessian(&x, &lambda).map(|h| convexify(h, &a));
        let mut bq = exact.as_ref().unwrap_or(&b);
        let mut qp = solve_qp(bq, &g, &a, &e, &dlo, &dhi, rho);
        // raise the penalty while multipliers press against it
        while qp.y.amax() >= 0.9 * rho && rho < opts.max_penalty {
            rho = (rho * 10.0).min(opts.max_penalty);
            qp = solve_qp(bq, &g, &a, &e, &dlo, &dhi, rho);
        }
        let identity;
        if !qp.converged {
            identity = DMatrix::identity(n, n);
            b = identity.clone();
            bq = &identity;
            qp = solve_qp(bq, &g, &a, &e, &dlo, &dhi, rho);
        }
        lambda = qp.y.clone();

        // KKT measures at the current point with the subproblem multipliers
        let stat = (&g - a.transpose() * &lambda - &qp.zl + &qp.zu).amax();
        let mut comp: f64 = 0.0;
        for i in 0..n {
            if lo[i].is_finite() {
                comp = comp.max(qp.zl[i] * (x[i] - lo[i]));
            }
            if hi[i].is_finite() {
                comp = comp.max(qp.zu[i] * (hi[i] - x[i]));
            }
        }
        kkt = stat.max(comp);
        if feas <= opts.feas_tol && kkt <= opts.kkt_tol {
            return Ok(SqpResult {
                x: x.clone(),
                lambda,
                f: ev.f,
                feasibility: feas,
                kkt,
                iterations: it,
                status: SqpStatus::Converged,
                best_x: x,
                best_feasibility: feas,
            });
        }

        let d = qp.d.clone();
        let elastic = qp.slack > 1e-8 * (1.0 + l1(&ev.c));
        if elastic && d.amax() <= 1e-10 * (1.0 + x.amax()) {
            small_elastic_steps += 1;
            if small_elastic_steps >= 5 && rho >= opts.max_penalty {
                return Ok(SqpResult {
                    x,
                    lambda,
                    f: ev.f,
                    feasibility: feas,
                    kkt,
                    iterations: it,
                    status: SqpStatus::Infeasible,
                    best_x,
                    best_feasibility: best_feas,
                });
            }
        } else {
            small_elastic_steps = 0;
        }

        let merit = |f: f64, c: &DVector<f64>| f + rho * l1(c);
        let phi0 = merit(ev.f, &ev.c);
        let lin = &ev.c + &a * &d;
        let dphi = g.dot(&d) + rho * (l1(&lin) - l1(&ev.c));
        let mut alpha = 1.0;
        let mut accepted: Option<(DVector<f64>, NlpEval)> = None;
        let mut tried_soc = false;
        while alpha > 1e-12 {
            let mut xt = &x + &d * alpha;
            clip(&mut xt, &lo, &hi);
            if let Ok(et) = nlp.eval(&xt, false) {
                if et.c.iter().all(|v| v.is_finite()) && merit(et.f, &et.c) <= phi0 + 1e-4 * alpha * dphi.min(0.0) {
                    accepted = Some((xt, et));
                    break;
                }
                if alpha == 1.0 && !tried_soc {
                    tried_soc = true;
                    // second-order correction: least-norm fix of c(x + d)
                    let aat = &a * a.transpose();
                    if let Some(w) = aat.lu().solve(&et.c) {
                        let mut xs = &xt - a.transpose() * w;
                        clip(&mut xs, &lo, &hi);
                        if let Ok(es) = nlp.eval(&xs, false) {
                            if merit(es.f, &es.c) <= phi0 + 1e-4 * dphi.min(0.0) {
                                accepted = Some((xs, es));
                                break;
                            }
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((x_new, _)) = accepted else {
            stalls += 1;
            b = DMatrix::identity(n, n);
            if stalls > 8 {
                let status = if best_feas > opts.feas_tol {
                    SqpStatus::Infeasible
                } else {
                    SqpStatus::Stalled
                };
                return Ok(SqpResult {
                    x,
                    lambda,
                    f: ev.f,
                    feasibility: feas,
                    kkt,
                    iterations: it,
                    status,
                    best_x,
                    best_feasibility: best_feas,
                });
            }
            continue;
        };
        stalls = 0;
        let ev_new = nlp.eval(&x_new, true)?;
        let (g_new, a_new) = ev_new.derivs.as_ref().expect("derivatives requested");

        // damped BFGS on the Lagrangian gradient
        let s = &x_new - &x;
        let yv = (g_new - a_new.transpose() * &lambda) - (&g - a.transpose() * &lambda);
        let bs = &b * &s;
        let sbs = s.dot(&bs);
        if sbs > 1e-300 {
            let sy = s.dot(&yv);
            let r = if sy >= 0.2 * sbs {
                yv
            } else {
                let theta = 0.8 * sbs / (sbs - sy);
                &yv * theta + &bs * (1.0 - theta)
            };
            let sr = s.dot(&r);
            if sr > 1e-300 {
                b -= &bs * bs.transpose() / sbs;
                b += &r * r.transpose() / sr;
            }
        }
        x = x_new;
        ev = ev_new;
    }

    let feas = ev.c.amax();
    if feas < best_feas {
        best_feas = feas;
        best_x = x.clone();
    }
    Ok(SqpResult {
        x,
        lambda,
        f: ev.f,
        feasibility: feas,
        kkt,
        iterations: opts.max_iter,
        status: SqpStatus::MaxIterations,
        best_x,
        best_feasibility: best_feas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min (x0−1)² + (x1−2)² s.t. x0 + x1 = 1, x0 ≥ 0.25
    struct Toy;

    impl Nlp for Toy {
        fn n(&self) -> usize {
            2
        }
        fn m(&self) -> usize {
            1
        }
        fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
            (vec![0.25, f64::NEG_INFINITY], vec![f64::INFINITY, f64::INFINITY])
        }
        fn eval(&self, x: &DVector<f64>, derivs: bool) -> Result<NlpEval> {
            let f = (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2);
            let c = DVector::from_vec(vec![x[0] + x[1] - 1.0]);
            let derivs = derivs.then(|| {
                (
                    DVector::from_vec(vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] - 2.0)]),
                    DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
                )
            });
            Ok(NlpEval { f, c, derivs })
        }
    }

    #[test]
    fn bound_active_toy() {
        // unconstrained by the bound the answer is (0, 1); the bound moves it
        let r = solve_nlp(&Toy, &DVector::from_vec(vec![3.0, 3.0]), &SqpOptions::default()).unwrap();
        assert_eq!(r.status, SqpStatus::Converged);
        assert!((r.x[0] - 0.25).abs() < 1e-7 && (r.x[1] - 0.75).abs() < 1e-7, "{:?}", r.x);
        // ∇f = λ∇c + z: λ = 2(x1 − 2) = −2.5
        assert!((r.lambda[0] + 2.5).abs() < 1e-6);
    }

    /// Rosenbrock on the unit circle.
    struct Circle;

    impl Nlp for Circle {
        fn n(&self) -> usize {
            2
        }
        fn m(&self) -> usize {
            1
        }
        fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
            (vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2])
        }
        fn eval(&self, x: &DVector<f64>, derivs: bool) -> Result<NlpEval> {
            let f = (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
            let c = DVector::from_vec(vec![x[0] * x[0] + x[1] * x[1] - 1.0]);
            let derivs = derivs.then(|| {
                (
                    DVector::from_vec(vec![
                        -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                        200.0 * (x[1] - x[0] * x[0]),
                    ]),
                    DMatrix::from_row_slice(1, 2, &[2.0 * x[0], 2.0 * x[1]]),
                )
            });
            Ok(NlpEval { f, c, derivs })
        }
    }

    #[test]
    fn nonlinear_equality() {
        let r = solve_nlp(&Circle, &DVector::from_vec(vec![0.5, 0.5]), &SqpOptions::default()).unwrap();
        assert_eq!(r.status, SqpStatus::Converged);
        assert!((r.x[0] - 0.786_415).abs() < 1e-5 && (r.x[1] - 0.617_698).abs() < 1e-5, "{:?}", r.x);
    }

    /// x² + 1 = 0 has no real solution.
    struct NoRoot;

    impl Nlp for NoRoot {
        fn n(&self) -> usize {
            1
        }
        fn m(&self) -> usize {
            1
        }
        fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
            (vec![-5.0], vec![5.0])
        }
        fn eval(&self, x: &DVector<f64>, derivs: bool) -> Result<NlpEval> {
            let derivs = derivs.then(|| (DVector::from_vec(vec![0.0]), DMatrix::from_row_slice(1, 1, &[2.0 * x[0]])));
            Ok(NlpEval {
                f: 0.0,
                c: DVector::from_vec(vec![x[0] * x[0] + 1.0]),
                derivs,
            })
        }
    }

    #[test]
    fn reports_infeasibility() {
        let r = solve_nlp(&NoRoot, &DVector::from_vec(vec![2.0]), &SqpOptions::default()).unwrap();
        assert!(matches!(r.status, SqpStatus::Infeasible | SqpStatus::MaxIterations));
        assert!(r.best_feasibility >= 1.0 - 1e-9);
        assert!(r.best_x[0].abs() < 1e-3);
    }
}
