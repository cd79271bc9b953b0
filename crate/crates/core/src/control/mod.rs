//! Time-optimal control with the food quality α or the food quantity ξ as
//! the control.
//!
//! With `dt = (1 + x² + αξ) ds` the controlled system becomes polynomial
//! and affine in the control:
//!
//! ```text
//! x' = x(1 − x/γ)(1 + x² + αξ) − x²y
//! y' = δ(x² + ξ)y − (1 + x² + αξ)(my + εy²)
//! ```
//!
//! The Hamiltonian is `H = p x' + q y'` and the minimising control is
//! bang-bang on the sign of the switching function `σ = ∂H/∂u`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, State};

mod pmp;
mod shooting;
pub mod sqp;

pub use pmp::{costates_from_terminal, singular_candidates, verify_pmp, CostateSource, PmpReport};
pub use shooting::{calibrate_bounds, solve, solve_fixed_control, Calibration, CalibrationAttempt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// α is the control, ξ fixed.
    Quality,
    /// ξ is the control, α fixed.
    Quantity,
}

impl ControlKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlKind::Quality => "quality",
            ControlKind::Quantity => "quantity",
        }
    }

    /// Parameters with the controlled field set to `u`.
    pub fn apply(&self, p: &ModelParams, u: f64) -> ModelParams {
        let mut q = *p;
        match self {
            ControlKind::Quality => q.alpha = u,
            ControlKind::Quantity => q.xi = u,
        }
        q
    }

    /// Bounds used when none are configured.
    pub fn default_bounds(&self) -> (f64, f64) {
        match self {
            ControlKind::Quality => (0.5, 2.0),
            ControlKind::Quantity => (0.05, 1.0),
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quality" | "alpha" => Ok(ControlKind::Quality),
            "quantity" | "xi" => Ok(ControlKind::Quantity),
            _ => Err(Error::Config(format!("unknown control kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlProblem {
    /// The controlled field is ignored.
    pub params: ModelParams,
    pub control: ControlKind,
    pub bounds: (f64, f64),
    pub initial: State,
    pub target: State,
    pub mesh_size: usize,
    /// Minimise the transformed duration S when set, the physical duration
    /// T otherwise.
    pub in_transformed_time: bool,
}

pub const DEFAULT_MESH: usize = 40;

impl ControlProblem {
    pub fn new(params: ModelParams, control: ControlKind, initial: State, target: State) -> Self {
        ControlProblem {
            params,
            control,
            bounds: control.default_bounds(),
            initial,
            target,
            mesh_size: DEFAULT_MESH,
            in_transformed_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidProblem(format!("control bounds must satisfy lo < hi, got ({lo}, {hi})")));
        }
        if lo < 0.0 {
            return Err(Error::InvalidProblem(format!("control bounds must be non-negative, got ({lo}, {hi})")));
        }
        for (name, s) in [("initial", self.initial), ("target", self.target)] {
            if !(s.is_finite() && s.x > 0.0 && s.y > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "{name} state must lie in the open positive quadrant, got ({}, {})",
                    s.x, s.y
                )));
            }
        }
        if self.mesh_size < 20 {
            return Err(Error::InvalidProblem(format!("mesh_size must be at least 20, got {}", self.mesh_size)));
        }
        let p = &self.params;
        for (name, v) in [
            ("gamma", p.gamma),
            ("epsilon", p.epsilon),
            ("m", p.m),
            ("delta", p.delta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidProblem(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        let fixed = match self.control {
            ControlKind::Quality => ("xi", p.xi),
            ControlKind::Quantity => ("alpha", p.alpha),
        };
        if !(fixed.1.is_finite() && fixed.1 >= 0.0) {
            return Err(Error::InvalidProblem(format!("{} must be finite and >= 0, got {}", fixed.0, fixed.1)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Costate {
    pub p: f64,
    pub q: f64,
}

impl Costate {
    pub fn new(p: f64, q: f64) -> Self {
        Costate { p, q }
    }

    pub fn norm(&self) -> f64 {
        self.p.hypot(self.q)
    }
}

pub type CostateDerivative = Costate;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NlpStats {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub max_defect: f64,
    pub converged: bool,
    pub message: String,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    pub control: Option<ControlKind>,
    pub bounds: (f64, f64),
    /// Node positions in transformed time, `mesh_size + 1` entries.
    pub s_grid: Vec<f64>,
    /// Physical time at the nodes.
    pub t_grid: Vec<f64>,
    pub states: Vec<State>,
    /// One value per interval.
    pub controls: Vec<f64>,
    /// Switches in physical time.
    pub switching_times: Vec<f64>,
    /// Switches in transformed time.
    pub switching_s: Vec<f64>,
    pub s_opt: f64,
    pub t_opt: f64,
    /// Costates at the nodes, recovered from the defect multipliers.
    pub costates: Option<Vec<Costate>>,
    pub nlp_stats: NlpStats,
}

/// `1 + αξ` with the control substituted.
fn food(p: &ModelParams, u: f64, kind: ControlKind) -> f64 {
    let q = kind.apply(p, u);
    1.0 + q.alpha * q.xi
}

/// `dt/ds = 1 + x² + αξ`.
pub fn time_density(p: &ModelParams, s: State, u: f64, kind: ControlKind) -> f64 {
    food(p, u, kind) + s.x * s.x
}

/// Vector field in transformed time.
pub fn transformed_rhs(p: &ModelParams, s: State, u: f64, kind: ControlKind) -> State {
    let q = kind.apply(p, u);
    let State { x, y } = s;
    let d = 1.0 + x * x + q.alpha * q.xi;
    State::new(
        x * (1.0 - x / q.gamma) * d - x * x * y,
        q.delta * (x * x + q.xi) * y - d * (q.m * y + q.epsilon * y * y),
    )
}

/// `∂(x', y')/∂(x, y)` as `[[f1x, f1y], [f2x, f2y]]`.
pub fn state_jacobian(p: &ModelParams, s: State, u: f64, kind: ControlKind) -> [[f64; 2]; 2] {
    let q = kind.apply(p, u);
    let State { x, y } = s;
    let b = 1.0 + q.alpha * q.xi;
    let d = b + x * x;
    let g = q.gamma;
    [
        [
            b - 2.0 * b * x / g + 3.0 * x * x - 4.0 * x.powi(3) / g - 2.0 * x * y,
            -x * x,
        ],
        [
            2.0 * x * y * (q.delta - q.m - q.epsilon * y),
            q.delta * (x * x + q.xi) - d * (q.m + 2.0 * q.epsilon * y),
        ],
    ]
}

/// `∂(x', y')/∂u`; independent of u.
pub fn control_gradient(p: &ModelParams, s: State, kind: ControlKind) -> [f64; 2] {
    let State { x, y } = s;
    let logistic = x * (1.0 - x / p.gamma);
    let loss = p.m * y + p.epsilon * y * y;
    match kind {
        ControlKind::Quality => [p.xi * logistic, -p.xi * loss],
        ControlKind::Quantity => [p.alpha * logistic, p.delta * y - p.alpha * loss],
    }
}

/// `∂(dt/ds)/∂u`.
pub fn density_gradient(p: &ModelParams, kind: ControlKind) -> f64 {
    match kind {
        ControlKind::Quality => p.xi,
        ControlKind::Quantity => p.alpha,
    }
}

pub fn hamiltonian(p: &ModelParams, s: State, c: Costate, u: f64, kind: ControlKind) -> f64 {
    let f = transformed_rhs(p, s, u, kind);
    c.p * f.x + c.q * f.y
}

/// `(ṗ, q̇) = −∂H/∂(x, y)`.
pub fn adjoint_rhs(p: &ModelParams, s: State, c: Costate, u: f64, kind: ControlKind) -> CostateDerivative {
    let j = state_jacobian(p, s, u, kind);
    Costate::new(
        -(c.p * j[0][0] + c.q * j[1][0]),
        -(c.p * j[0][1] + c.q * j[1][1]),
    )
}

/// `σ = ∂H/∂u`: u_max is optimal where σ < 0, u_min where σ > 0.
pub fn switching_function(p: &ModelParams, s: State, c: Costate, kind: ControlKind) -> f64 {
    let [a, b] = control_gradient(p, s, kind);
    c.p * a + c.q * b
}

/// The two values of p/q a singular arc must satisfy: from `σ = 0` and
/// from `dσ/ds = 0`. `None` where either denominator vanishes.
pub fn singular_arc_ratios(p: &ModelParams, s: State, u: f64, kind: ControlKind) -> Option<(f64, f64)> {
    let State { x, y } = s;
    let [a, b] = control_gradient(p, s, kind);
    // ∂a/∂x and ∂b/∂y; a does not depend on y nor b on x
    let (ax, by) = match kind {
        ControlKind::Quality => (p.xi * (1.0 - 2.0 * x / p.gamma), -p.xi * (p.m + 2.0 * p.epsilon * y)),
        ControlKind::Quantity => (
            p.alpha * (1.0 - 2.0 * x / p.gamma),
            p.delta - p.alpha * (p.m + 2.0 * p.epsilon * y),
        ),
    };
    let f = transformed_rhs(p, s, u, kind);
    let j = state_jacobian(p, s, u, kind);
    // dσ/ds = p·ca + q·cb, the Lie bracket of drift and control field
    let ca = -j[0][0] * a - j[0][1] * b + ax * f.x;
    let cb = -j[1][0] * a - j[1][1] * b + by * f.y;
    let scale = 1.0 + a.abs() + b.abs();
    if a.abs() <= 1e-14 * scale || ca.abs() <= 1e-14 * (1.0 + cb.abs()) {
        return None;
    }
    Some((-b / a, -cb / ca))
}
