//! Seeded randomized invariant suites.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{adjoint_rhs, hamiltonian, ControlKind, Costate};
use crate::equilibria::{
    equilibrium_at, find_interior_equilibria, interior_quintic, prey_free_point, residual, EquilibriumKind,
    StabilityClass,
};
use crate::model::{jacobian, rhs, Checks, ModelParams, State};
use crate::simulation::{integrate, IntegratorOptions, TOL_POS};

/// Relative error allowed in the finite-difference audits.
pub const FD_TOL: f64 = 1e-5;
/// Residual allowed at a computed interior equilibrium.
pub const RESIDUAL_TOL: f64 = 1e-9;
const MAX_LISTED_FAILURES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    /// Samples that exercised the property (e.g. hyperbolic cases only).
    pub checked: usize,
    pub failures: usize,
    pub worst: f64,
    pub examples: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    fn new(name: &str, samples: usize) -> Self {
        SuiteReport {
            name: name.into(),
            samples,
            checked: 0,
            failures: 0,
            worst: 0.0,
            examples: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }

    fn fail(&mut self, what: String) {
        self.failures += 1;
        if self.examples.len() < MAX_LISTED_FAILURES {
            self.examples.push(what);
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Valid parameters with predator conversion above mortality.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let m = log_uniform(rng, 0.05, 2.0);
    ModelParams {
        gamma: log_uniform(rng, 1.0, 20.0),
        alpha: log_uniform(rng, 0.01, 2.0),
        xi: log_uniform(rng, 0.01, 3.0),
        epsilon: log_uniform(rng, 0.01, 1.0),
        m,
        delta: m * log_uniform(rng, 1.05, 10.0),
    }
}

/// Like [`random_params`] but also with δ ≤ m, so every lemma sign occurs.
fn random_params_any_conversion(rng: &mut ChaCha8Rng) -> ModelParams {
    let mut p = random_params(rng);
    p.delta = p.m * log_uniform(rng, 0.2, 10.0);
    p
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trajectories from random positive states never go below `−TOL_POS` and
/// stay under the Gronwall envelope of `x + y/δ`.
pub fn positivity_suite(seed: u64, samples: usize) -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("positivity_and_boundedness", samples);
    let mut rng = rng_for(seed, 1);
    let opts = IntegratorOptions::default();
    for i in 0..samples {
        let p = random_params(&mut rng);
        let s0 = State::new(rng.random_range(0.0..2.0 * p.gamma), rng.random_range(0.0..10.0));
        rep.checked += 1;
        match integrate(&p, s0, 50.0, &opts) {
            Ok(tr) => {
                let low = tr.states.iter().map(|s| s.x.min(s.y)).fold(f64::INFINITY, f64::min);
                rep.worst = rep.worst.max(-low);
                if low < -TOL_POS || tr.positivity_events() > 0 || tr.envelope_violations() > 0 {
                    rep.fail(format!(
                        "sample {i}: {p:?} from ({}, {}): min component {low:e}, {} clamps, {} envelope violations",
                        s0.x,
                        s0.y,
                        tr.positivity_events(),
                        tr.envelope_violations()
                    ));
                }
            }
            Err(e) => rep.fail(format!("sample {i}: {p:?}: {e}")),
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-12);
    diff / scale
}

/// Analytic Jacobian of the vector field against central differences.
pub fn jacobian_suite(seed: u64, samples: usize) -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("jacobian_finite_difference", samples);
    let mut rng = rng_for(seed, 2);
    for i in 0..samples {
        let p = random_params(&mut rng);
        let s = State::new(rng.random_range(0.0..1.5 * p.gamma), rng.random_range(0.0..10.0));
        let j = jacobian(&p, s);
        let hx = 1e-6 * (1.0 + s.x.abs());
        let hy = 1e-6 * (1.0 + s.y.abs());
        let dx = (rhs(&p, State::new(s.x + hx, s.y)) - rhs(&p, State::new(s.x - hx, s.y))) * (0.5 / hx);
        let dy = (rhs(&p, State::new(s.x, s.y + hy)) - rhs(&p, State::new(s.x, s.y - hy))) * (0.5 / hy);
        let err = rel_err(&[j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]], &[dx.x, dy.x, dx.y, dy.y]);
        rep.checked += 1;
        rep.worst = rep.worst.max(err);
        if err > FD_TOL {
            rep.fail(format!("sample {i}: {p:?} at ({}, {}): relative error {err:e}", s.x, s.y));
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

/// Costate equations against `−∂H/∂(x, y)` by central differences, for
/// both control kinds.
pub fn adjoint_suite(seed: u64, samples: usize) -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("adjoint_finite_difference", samples);
    let mut rng = rng_for(seed, 3);
    for i in 0..samples {
        let p = random_params(&mut rng);
        let kind = if i % 2 == 0 { ControlKind::Quality } else { ControlKind::Quantity };
        let u = rng.random_range(0.05..2.0);
        let s = State::new(rng.random_range(0.0..1.5 * p.gamma), rng.random_range(0.0..10.0));
        let c = Costate::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let a = adjoint_rhs(&p, s, c, u, kind);
        let hx = 1e-6 * (1.0 + s.x.abs());
        let hy = 1e-6 * (1.0 + s.y.abs());
        let h = |x: f64, y: f64| hamiltonian(&p, State::new(x, y), c, u, kind);
        let fd = [
            -(h(s.x + hx, s.y) - h(s.x - hx, s.y)) / (2.0 * hx),
            -(h(s.x, s.y + hy) - h(s.x, s.y - hy)) / (2.0 * hy),
        ];
        let err = rel_err(&[a.p, a.q], &fd);
        rep.checked += 1;
        rep.worst = rep.worst.max(err);
        if err > FD_TOL {
            rep.fail(format!("sample {i}: {kind} {p:?} at ({}, {}), u = {u}: relative error {err:e}", s.x, s.y));
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

/// Sign rules for the boundary equilibria against eigenvalue classes:
/// E₀ saddle iff φ₁ < 0 (unstable node otherwise), E₁ stable node iff
/// φ₂ < 0 (saddle otherwise), E₂ a saddle whenever it exists.
pub fn lemma_suite(seed: u64, samples: usize) -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("boundary_sign_rules", samples);
    let mut rng = rng_for(seed, 4);
    let checks = Checks {
        allow_low_conversion: true,
        allow_zero_food: true,
    };
    for i in 0..samples {
        let p = random_params_any_conversion(&mut rng);
        if p.validate(checks).is_err() {
            continue;
        }
        let (phi1, phi2) = (p.phi1(), p.phi2());
        let mut cases = vec![
            (
                EquilibriumKind::E0,
                State::ORIGIN,
                if phi1 < 0.0 { StabilityClass::Saddle } else { StabilityClass::UnstableNode },
            ),
            (
                EquilibriumKind::E1,
                State::new(p.gamma, 0.0),
                if phi2 < 0.0 { StabilityClass::StableNode } else { StabilityClass::Saddle },
            ),
        ];
        if let Some(e2) = prey_free_point(&p) {
            cases.push((EquilibriumKind::E2, e2, StabilityClass::Saddle));
        }
        for (kind, at, expected) in cases {
            let e = equilibrium_at(&p, at, kind);
            if e.class == StabilityClass::NonHyperbolic {
                continue;
            }
            rep.checked += 1;
            if e.class != expected {
                rep.fail(format!("sample {i}: {kind} of {p:?}: eigenvalues give {}, signs give {}", e.class, expected));
            }
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

/// Interior equilibria satisfy the quintic (relative to its term sizes) and
/// the vector field to `RESIDUAL_TOL`.
pub fn residual_suite(seed: u64, samples: usize) -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("interior_residuals", samples);
    let mut rng = rng_for(seed, 5);
    for i in 0..samples {
        let p = random_params(&mut rng);
        let q = interior_quintic(&p);
        match find_interior_equilibria(&p) {
            Ok(list) => {
                for e in list {
                    let x = e.location.x;
                    let size: f64 = q.0.iter().enumerate().map(|(k, c)| c.abs() * x.powi(k as i32)).sum();
                    let quintic_res = q.eval(x).abs() / size.max(1e-300);
                    let field_res = residual(&p, e.location);
                    rep.checked += 1;
                    rep.worst = rep.worst.max(quintic_res).max(field_res);
                    if quintic_res > RESIDUAL_TOL || field_res > RESIDUAL_TOL {
                        rep.fail(format!(
                            "sample {i}: {p:?} at x = {x}: quintic {quintic_res:e}, field {field_res:e}"
                        ));
                    }
                }
            }
            Err(e) => rep.fail(format!("sample {i}: {p:?}: {e}")),
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

/// Every suite with its standard sample count.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![
        positivity_suite(seed, 1000),
        jacobian_suite(seed, 1000),
        adjoint_suite(seed, 1000),
        lemma_suite(seed, 2000),
        residual_suite(seed, 1000),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for rep in [
            positivity_suite(7, 30),
            jacobian_suite(7, 200),
            adjoint_suite(7, 200),
            lemma_suite(7, 300),
            residual_suite(7, 200),
        ] {
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = random_params(&mut rng_for(11, 1));
        let b = random_params(&mut rng_for(11, 1));
        assert_eq!(a, b);
        assert!(a.validate(Checks::default()).is_ok());
    }

    #[test]
    fn lemma_suite_sees_every_sign() {
        let mut rng = rng_for(3, 4);
        let draws: Vec<ModelParams> = (0..500).map(|_| random_params_any_conversion(&mut rng)).collect();
        assert!(draws.iter().any(|p| p.phi1() > 0.0) && draws.iter().any(|p| p.phi1() < 0.0));
        assert!(draws.iter().any(|p| p.phi2() > 0.0) && draws.iter().any(|p| p.phi2() < 0.0));
    }
}
