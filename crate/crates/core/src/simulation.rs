//! Time integration with invariant monitors.
//!
//! The integrator is the Dormand–Prince 5(4) pair with step-size control
//! and cubic Hermite dense output. Along model trajectories two monitors
//! run after every accepted step: positivity (components below
//! `-TOL_POS` are clamped to zero and recorded) and the Gronwall envelope of
//! `W = x + y/δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs, ModelParams, State};

pub const TOL_POS: f64 = 1e-10;

/// Slack on the envelope comparison.
pub const ENVELOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Smallest step relative to `max(1, |t|)` before giving up.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min_rel: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorOptions {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonitorEvent {
    /// A component fell below `-TOL_POS` and was reset to zero.
    PositivityClamp { t: f64, component: char, value: f64 },
    /// `W(t)` exceeded the Gronwall envelope by more than `ENVELOPE_TOL`.
    EnvelopeViolation { t: f64, w: f64, bound: f64 },
}

/// Accepted steps of an integration, with derivatives for interpolation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub derivs: Vec<State>,
    /// ε in force at each stored time.
    pub eps_effective: Vec<f64>,
    pub events: Vec<MonitorEvent>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> State {
        *self.states.last().expect("trajectory holds the initial state")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    /// Cubic Hermite interpolation; clamps outside the integrated span.
    pub fn sample(&self, t: f64) -> State {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.states[0];
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1];
        }
        let i = self.times.partition_point(|&ti| ti <= t) - 1;
        hermite(
            self.times[i],
            self.states[i],
            self.derivs[i],
            self.times[i + 1],
            self.states[i + 1],
            self.derivs[i + 1],
            t,
        )
    }

    /// `n` equally spaced samples on `[t0, t1]`.
    pub fn resample(&self, t0: f64, t1: f64, n: usize) -> Vec<(f64, State)> {
        (0..n)
            .map(|k| {
                let t = if n == 1 {
                    t0
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                };
                (t, self.sample(t))
            })
            .collect()
    }

    pub fn positivity_events(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, MonitorEvent::PositivityClamp { .. }))
            .count()
    }

    pub fn envelope_violations(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, MonitorEvent::EnvelopeViolation { .. }))
            .count()
    }
}

fn hermite(t0: f64, y0: State, f0: State, t1: f64, y1: State, f1: State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y0 * h00 + f0 * (h10 * h) + y1 * h01 + f1 * (h11 * h)
}

/// Ultimate bound on `W = x + y/δ` for a chosen decay rate `K`.
///
/// `m_bound` is the constant `γ(1+K)²/4 + ξ/ε + (K−m)²/(4ε)`. Maximising the
/// y-terms of `dW/dt + KW` exactly gives the larger constant
/// `γ(1+K)²/4 + max(0, δξ + K − m)²/(4δε)`, kept in `m_rigorous`; the
/// runtime monitor checks against that one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub k_choice: f64,
    pub m_bound: f64,
    pub asymptotic_bound: f64,
    pub m_rigorous: f64,
    pub rigorous_bound: f64,
}

impl BoundEnvelope {
    /// `(M/K)(1 − e^{−Kt}) + W(0) e^{−Kt}` using the rigorous constant.
    pub fn gronwall(&self, w0: f64, t: f64) -> f64 {
        let decay = (-self.k_choice * t).exp();
        self.rigorous_bound * (1.0 - decay) + w0 * decay
    }

    /// Same expression with the displayed constant `m_bound`.
    pub fn gronwall_displayed(&self, w0: f64, t: f64) -> f64 {
        let decay = (-self.k_choice * t).exp();
        self.asymptotic_bound * (1.0 - decay) + w0 * decay
    }
}

/// `W = x + y/δ`.
pub fn lyapunov_w(p: &ModelParams, s: State) -> f64 {
    s.x + s.y / p.delta
}

/// Envelope for decay rate `k_choice` (use `p.m` for the default).
pub fn bound_envelope(p: &ModelParams, k_choice: f64) -> Result<BoundEnvelope> {
    if !(k_choice.is_finite() && k_choice > 0.0) {
        return Err(Error::domain("K", k_choice, "must be finite and > 0"));
    }
    let prey = p.gamma * (1.0 + k_choice).powi(2) / 4.0;
    let m_bound =
        prey + p.xi / p.epsilon + (k_choice - p.m).powi(2) / (4.0 * p.epsilon);
    let lin = (p.delta * p.xi + k_choice - p.m).max(0.0);
    let m_rigorous = prey + lin * lin / (4.0 * p.delta * p.epsilon);
    Ok(BoundEnvelope {
        k_choice,
        m_bound,
        asymptotic_bound: m_bound / k_choice,
        m_rigorous,
        rigorous_bound: m_rigorous / k_choice,
    })
}

/// Envelope with the default `K = m`.
pub fn default_envelope(p: &ModelParams) -> BoundEnvelope {
    bound_envelope(p, p.m).expect("m > 0 for validated parameters")
}

/// Which checks to run on accepted steps.
#[derive(Debug, Clone, Copy, Default)]
pub struct Monitors {
    pub positivity: bool,
    /// Envelope and δ for `W = x + y/δ`.
    pub envelope: Option<(BoundEnvelope, f64)>,
}

/// Integrates the scaled model from `initial` over `[0, t_end]`.
pub fn integrate(
    p: &ModelParams,
    initial: State,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_initial(initial, t_end)?;
    let monitors = Monitors {
        positivity: true,
        envelope: Some((default_envelope(p), p.delta)),
    };
    let p = *p;
    solve(
        |_, s| rhs(&p, s),
        |_| p.epsilon,
        initial,
        0.0,
        t_end,
        opts,
        monitors,
    )
}

/// Integrates with ε replaced by `eps_fn(t)` at every stage.
pub fn integrate_nonautonomous<E>(
    p: &ModelParams,
    eps_fn: E,
    initial: State,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory>
where
    E: Fn(f64) -> f64,
{
    check_initial(initial, t_end)?;
    let monitors = Monitors {
        positivity: true,
        envelope: None,
    };
    let p = *p;
    solve(
        |t, s| {
            let mut q = p;
            q.epsilon = eps_fn(t);
            rhs(&q, s)
        },
        &eps_fn,
        initial,
        0.0,
        t_end,
        opts,
        monitors,
    )
}

fn check_initial(initial: State, t_end: f64) -> Result<()> {
    if !(initial.is_finite() && initial.x >= 0.0 && initial.y >= 0.0) {
        return Err(Error::Config(format!(
            "initial state must be finite and non-negative, got ({}, {})",
            initial.x, initial.y
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain("t_end", t_end, "must be finite and > 0"));
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// General adaptive solve of `ds/dt = f(t, s)`; `eps_at` only feeds the
/// `eps_effective` column.
pub fn solve<F, G>(
    f: F,
    eps_at: G,
    initial: State,
    t0: f64,
    t_end: f64,
    opts: &IntegratorOptions,
    monitors: Monitors,
) -> Result<Trajectory>
where
    F: Fn(f64, State) -> State,
    G: Fn(f64) -> f64,
{
    let mut traj = Trajectory::default();
    let mut t = t0;
    let mut y = initial;
    let mut k0 = f(t, y);
    traj.times.push(t);
    traj.states.push(y);
    traj.derivs.push(k0);
    traj.eps_effective.push(eps_at(t));

    let w0 = monitors
        .envelope
        .map(|(_, delta)| y.x + y.y / delta)
        .unwrap_or(0.0);

    let span = t_end - t0;
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(&f, t, y, k0, opts))
        .min(opts.h_max)
        .min(span);

    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow {
                t,
                partial: Box::new(traj),
            });
        }
        steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let mut k = [State::ORIGIN; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, &a) in A[s].iter().enumerate().take(s) {
                if a != 0.0 {
                    ys = ys + k[j] * (h * a);
                }
            }
            k[s] = f(t + C[s] * h, ys);
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let mut y_new = y;
        for (j, &a) in A[6].iter().enumerate() {
            if a != 0.0 {
                y_new = y_new + k[j] * (h * a);
            }
        }
        let mut err = State::ORIGIN;
        for (j, &e) in E.iter().enumerate() {
            if e != 0.0 {
                err = err + k[j] * (h * e);
            }
        }
        let sx = opts.atol + opts.rtol * y.x.abs().max(y_new.x.abs());
        let sy = opts.atol + opts.rtol * y.y.abs().max(y_new.y.abs());
        let err_norm = (((err.x / sx).powi(2) + (err.y / sy).powi(2)) / 2.0).sqrt();

        if !y_new.is_finite() || !err_norm.is_finite() {
            h *= 0.25;
            if h < opts.h_min_rel * t.abs().max(1.0) {
                return Err(Error::NonFinite {
                    t,
                    partial: Box::new(traj),
                });
            }
            continue;
        }

        if err_norm <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k0 = k[6];
            if monitors.positivity {
                let mut clamped = false;
                if y.x < -TOL_POS {
                    traj.events.push(MonitorEvent::PositivityClamp {
                        t,
                        component: 'x',
                        value: y.x,
                    });
                    y.x = 0.0;
                    clamped = true;
                }
                if y.y < -TOL_POS {
                    traj.events.push(MonitorEvent::PositivityClamp {
                        t,
                        component: 'y',
                        value: y.y,
                    });
                    y.y = 0.0;
                    clamped = true;
                }
                if clamped {
                    k0 = f(t, y);
                }
            }
            if let Some((env, delta)) = monitors.envelope {
                let w = y.x + y.y / delta;
                let bound = env.gronwall(w0, t - t0);
                if w > bound + ENVELOPE_TOL {
                    traj.events
                        .push(MonitorEvent::EnvelopeViolation { t, w, bound });
                }
            }
            traj.times.push(t);
            traj.states.push(y);
            traj.derivs.push(k0);
            traj.eps_effective.push(eps_at(t));
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(opts.h_max);
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < opts.h_min_rel * t.abs().max(1.0) {
            return Err(Error::StepUnderflow {
                t,
                partial: Box::new(traj),
            });
        }
    }
    Ok(traj)
}

fn initial_step<F>(f: &F, t: f64, y: State, f0: State, opts: &IntegratorOptions) -> f64
where
    F: Fn(f64, State) -> State,
{
    let sx = opts.atol + opts.rtol * y.x.abs();
    let sy = opts.atol + opts.rtol * y.y.abs();
    let norm = |v: State| (((v.x / sx).powi(2) + (v.y / sy).powi(2)) / 2.0).sqrt();
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let f1 = f(t + h0, y + f0 * h0);
    let d2 = norm(f1 - f0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Classical fixed-step RK4, returning the state after each step.
pub fn rk4_fixed<F>(f: F, initial: State, t0: f64, t_end: f64, steps: usize) -> Vec<State>
where
    F: Fn(f64, State) -> State,
{
    let h = (t_end - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = initial;
    out.push(y);
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + k1 * (0.5 * h));
        let k3 = f(t + 0.5 * h, y + k2 * (0.5 * h));
        let k4 = f(t + h, y + k3 * h);
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(y);
    }
    out
}

/// Peak-to-peak range of x over the samples with `t >= t_from`.
pub fn oscillation_amplitude(traj: &Trajectory, t_from: f64, samples: usize) -> f64 {
    let t1 = traj.t_end();
    let (lo, hi) = traj
        .resample(t_from, t1, samples)
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| {
            (lo.min(s.x), hi.max(s.x))
        });
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::find_interior_equilibria;
    use crate::model::{nondimensionalize, DimensionalParams};

    fn hopf_params(eps: f64) -> ModelParams {
        ModelParams::new(15.0, 0.1, 0.45, eps, 0.28, 0.45).unwrap()
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = ModelParams::new(15.0, 0.1, 1.0, 0.012, 0.258, 0.3).unwrap();
        let e = find_interior_equilibria(&p).unwrap()[0].location;
        let traj = integrate(&p, e, 100.0, &IntegratorOptions::default()).unwrap();
        let drift = traj
            .states
            .iter()
            .map(|s| s.dist(&e))
            .fold(0.0, f64::max);
        assert!(drift <= 1e-7, "drift {drift}");
    }

    #[test]
    fn prey_axis_is_invariant() {
        let p = hopf_params(0.04);
        let traj = integrate(&p, State::new(0.0, 3.0), 200.0, &IntegratorOptions::default()).unwrap();
        assert!(traj.states.iter().all(|s| s.x == 0.0));
        let traj = integrate(&p, State::new(2.0, 0.0), 200.0, &IntegratorOptions::default()).unwrap();
        assert!(traj.states.iter().all(|s| s.y == 0.0));
    }

    #[test]
    fn sustained_oscillation_past_the_hopf_point() {
        let p = hopf_params(0.035);
        let e = find_interior_equilibria(&p).unwrap()[0].location;
        let traj = integrate(&p, e * 1.01, 2000.0, &IntegratorOptions::default()).unwrap();
        assert!(oscillation_amplitude(&traj, 1000.0, 20_000) > 0.1);
        assert_eq!(traj.positivity_events(), 0);
        assert_eq!(traj.envelope_violations(), 0);
    }

    #[test]
    fn constant_sweep_matches_autonomous_run() {
        let p = hopf_params(0.04);
        let s0 = State::new(2.0, 1.5);
        let opts = IntegratorOptions::default();
        let a = integrate(&p, s0, 50.0, &opts).unwrap();
        let b = integrate_nonautonomous(&p, |_| 0.04, s0, 50.0, &opts).unwrap();
        assert!(a.last_state().dist(&b.last_state()) < 1e-12);
        assert!(b.eps_effective.iter().all(|&e| e == 0.04));
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let p = ModelParams::new(15.0, 0.1, 1.0, 0.01, 0.258, 0.3).unwrap();
        let sweep = |t: f64| 0.011 + 0.009 * (2.0 * std::f64::consts::PI * t / 400.0).sin();
        let s0 = State::new(0.6, 2.3);
        let tol = 1e-8;
        let a = integrate_nonautonomous(&p, sweep, s0, 100.0, &IntegratorOptions::with_tolerances(tol, 1e-10)).unwrap();
        let b = integrate_nonautonomous(&p, sweep, s0, 100.0, &IntegratorOptions::with_tolerances(tol / 2.0, 5e-11)).unwrap();
        let d = a.last_state() - b.last_state();
        let scale = a.last_state().norm_inf();
        assert!(d.norm_inf() < 10.0 * tol * scale.max(1.0), "{d:?}");
    }

    #[test]
    fn envelope_arithmetic() {
        let p = ModelParams::new(1.0, 1.0, 2.0, 0.5, 6.0, 8.0).unwrap();
        let env = bound_envelope(&p, 6.0).unwrap();
        assert!((env.m_bound - 16.25).abs() < 1e-14);
        assert!((env.asymptotic_bound - 16.25 / 6.0).abs() < 1e-14);
        // δξ²/(4ε) replaces ξ/ε when K = m
        assert!((env.m_rigorous - (49.0 / 4.0 + 8.0 * 4.0 / 2.0)).abs() < 1e-12);

        let q = ModelParams::no_food(1.0, 1.0, 0.5, 6.0, 8.0).unwrap();
        let env_q = bound_envelope(&q, 6.0).unwrap();
        assert!((env.m_bound - env_q.m_bound - p.xi / p.epsilon).abs() < 1e-14);
        assert!(bound_envelope(&p, 0.0).is_err());
    }

    #[test]
    fn long_run_settles_under_displayed_bound() {
        let p = ModelParams::new(1.0, 1.0, 2.0, 0.5, 6.0, 8.0).unwrap();
        let env = bound_envelope(&p, 6.0).unwrap();
        let traj = integrate(&p, State::new(0.5, 3.0), 200.0, &IntegratorOptions::default()).unwrap();
        let w0 = lyapunov_w(&p, traj.states[0]);
        for (&t, &s) in traj.times.iter().zip(&traj.states) {
            assert!(lyapunov_w(&p, s) <= env.gronwall_displayed(w0, t) + ENVELOPE_TOL);
        }
        assert!(lyapunov_w(&p, traj.last_state()) <= env.asymptotic_bound + 1e-6);
    }

    #[test]
    fn displayed_constant_can_be_exceeded() {
        // large δξ: the prey-free point E₂ sits above M/K with the displayed M
        let p = ModelParams::new(1.0, 0.01, 1.0, 0.01, 2.0, 100.0).unwrap();
        let env = default_envelope(&p);
        let y2 = p.phi1() / (p.epsilon * p.food_factor());
        let w_e2 = y2 / p.delta;
        assert!(w_e2 > env.asymptotic_bound);
        assert!(w_e2 <= env.rigorous_bound);
        let traj = integrate(&p, State::new(0.0, 1.0), 50.0, &IntegratorOptions::default()).unwrap();
        assert!((traj.last_state().y - y2).abs() < 1e-6 * y2);
        assert_eq!(traj.envelope_violations(), 0);
    }

    #[test]
    fn fixed_step_rk4_is_fourth_order() {
        let p = hopf_params(0.04);
        let f = |_: f64, s: State| rhs(&p, s);
        let s0 = State::new(2.0, 1.5);
        let reference = integrate(&p, s0, 5.0, &IntegratorOptions::with_tolerances(1e-12, 1e-14))
            .unwrap()
            .last_state();
        let err = |n| rk4_fixed(f, s0, 0.0, 5.0, n).last().unwrap().dist(&reference);
        let (e1, e2) = (err(100), err(200));
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }

    #[test]
    fn hermite_sampling_is_accurate() {
        let p = hopf_params(0.04);
        let traj = integrate(&p, State::new(2.0, 1.5), 20.0, &IntegratorOptions::default()).unwrap();
        let mid = traj.sample(7.3);
        let direct = integrate(&p, State::new(2.0, 1.5), 7.3, &IntegratorOptions::default())
            .unwrap()
            .last_state();
        assert!(mid.dist(&direct) < 1e-6);
    }

    #[test]
    fn dimensional_round_trip() {
        let dim = DimensionalParams {
            r: 2.0,
            k: 10.0,
            c: 4.0,
            a: 2.0,
            delta1: 3.0,
            m1: 1.0,
            d: 1.0,
            alpha: 0.5,
            food: 4.0,
            eta: 1.0,
        };
        let p = nondimensionalize(&dim).unwrap();
        let (n0, p0) = (3.0, 1.2);
        let t_dim = 10.0;
        let opts = IntegratorOptions::with_tolerances(1e-10, 1e-12);
        let dim_traj = solve(
            |_, s| {
                let (dn, dp) = dim.rhs(s.x, s.y);
                State::new(dn, dp)
            },
            |_| f64::NAN,
            State::new(n0, p0),
            0.0,
            t_dim,
            &opts,
            Monitors::default(),
        )
        .unwrap();
        let scaled = integrate(&p, dim.to_state(n0, p0), dim.scaled_time(t_dim), &opts).unwrap();
        for k in 0..=20 {
            let td = t_dim * k as f64 / 20.0;
            let raw = dim_traj.sample(td);
            let mapped = dim.to_state(raw.x, raw.y);
            let direct = scaled.sample(dim.scaled_time(td));
            assert!(mapped.dist(&direct) < 1e-6, "t = {td}: {mapped:?} vs {direct:?}");
        }
        let back = dim.from_state(dim.to_state(n0, p0));
        assert!((back.0 - n0).abs() < 1e-14 && (back.1 - p0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_initial_state() {
        let p = hopf_params(0.04);
        let opts = IntegratorOptions::default();
        assert!(integrate(&p, State::new(-1.0, 1.0), 1.0, &opts).is_err());
        assert!(integrate(&p, State::new(1.0, 1.0), 0.0, &opts).is_err());
    }
}
