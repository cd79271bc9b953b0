//! The nondimensional additional-food predator–prey system with a Holling
//! type-III response and quadratic predator self-limitation:
//!
//! ```text
//! dx/dt = x (1 - x/γ) - x² y / (1 + x² + αξ)
//! dy/dt = δ (x² + ξ) y / (1 + x² + αξ) - m y - ε y²
//! ```
//!
//! Everything else in the crate evaluates the vector field, its Jacobian and
//! its nullclines through this module.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the dimensional model, before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalParams {
    /// Prey intrinsic growth rate.
    pub r: f64,
    /// Prey carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Maximum predation rate.
    pub c: f64,
    /// Half-saturation constant of the predator.
    pub a: f64,
    /// Conversion efficiency.
    pub delta1: f64,
    /// Predator mortality.
    pub m1: f64,
    /// Intra-specific competition among predators.
    pub d: f64,
    /// Quality of the additional food.
    pub alpha: f64,
    /// Amount of additional food; zero switches the food off.
    #[serde(rename = "A")]
    pub food: f64,
    /// Relative search rate for the additional food.
    pub eta: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("r", self.r),
            ("K", self.k),
            ("c", self.c),
            ("a", self.a),
            ("delta1", self.delta1),
            ("m1", self.m1),
            ("d", self.d),
            ("alpha", self.alpha),
            ("eta", self.eta),
        ];
        for (name, value) in strictly_positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(name, value, "must be finite and > 0"));
            }
        }
        if !(self.food.is_finite() && self.food >= 0.0) {
            return Err(Error::domain("A", self.food, "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Right-hand side of the dimensional system in (N, P, T) units.
    pub fn rhs(&self, n: f64, p: f64) -> (f64, f64) {
        let extra = self.eta * self.food * self.food;
        let denom = self.a * self.a + n * n + self.alpha * extra;
        let dn = self.r * n * (1.0 - n / self.k) - self.c * n * n * p / denom;
        let dp = self.delta1 * (n * n + extra) / denom * p - self.m1 * p - self.d * p * p;
        (dn, dp)
    }

    /// Maps a dimensional (N, P) pair to the scaled state.
    pub fn to_state(&self, n: f64, p: f64) -> State {
        State::new(n / self.a, p * self.c / (self.a * self.r))
    }

    /// Maps a scaled state back to (N, P).
    pub fn from_state(&self, s: State) -> (f64, f64) {
        (s.x * self.a, s.y * self.a * self.r / self.c)
    }

    /// Scaled time `t = r T`.
    pub fn scaled_time(&self, t_dim: f64) -> f64 {
        self.r * t_dim
    }
}

/// Reduces the ten dimensional parameters to the six scaled ones.
pub fn nondimensionalize(p: &DimensionalParams) -> Result<ModelParams> {
    p.validate()?;
    let ratio = p.food / p.a;
    let params = ModelParams {
        gamma: p.k / p.a,
        alpha: p.alpha,
        xi: p.eta * ratio * ratio,
        epsilon: p.d * p.a / p.c,
        m: p.m1 / p.r,
        delta: p.delta1 / p.r,
    };
    // A = 0 is the no-food configuration; δ ≤ m is left to the caller.
    params.validate(Checks {
        allow_low_conversion: true,
        allow_zero_food: true,
    })?;
    Ok(params)
}

/// Which of the usual parameter restrictions to waive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Checks {
    /// Accept δ ≤ m.
    pub allow_low_conversion: bool,
    /// Accept α = 0 or ξ = 0.
    pub allow_zero_food: bool,
}

/// The six scaled parameters (γ, α, ξ, ε, m, δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub gamma: f64,
    pub alpha: f64,
    pub xi: f64,
    pub epsilon: f64,
    pub m: f64,
    pub delta: f64,
}

impl ModelParams {
    /// Strict constructor: every parameter positive and δ > m.
    pub fn new(gamma: f64, alpha: f64, xi: f64, epsilon: f64, m: f64, delta: f64) -> Result<Self> {
        let p = ModelParams {
            gamma,
            alpha,
            xi,
            epsilon,
            m,
            delta,
        };
        p.validate(Checks::default())?;
        Ok(p)
    }

    /// The system without additional food (ξ = 0). α has no effect but is kept.
    pub fn no_food(gamma: f64, alpha: f64, epsilon: f64, m: f64, delta: f64) -> Result<Self> {
        let p = ModelParams {
            gamma,
            alpha,
            xi: 0.0,
            epsilon,
            m,
            delta,
        };
        p.validate(Checks {
            allow_zero_food: true,
            ..Checks::default()
        })?;
        Ok(p)
    }

    pub fn validate(&self, checks: Checks) -> Result<()> {
        for (name, value) in [
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("m", self.m),
            ("delta", self.delta),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(name, value, "must be finite and > 0"));
            }
        }
        for (name, value) in [("alpha", self.alpha), ("xi", self.xi)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::domain(name, value, "must be finite and >= 0"));
            }
            if value == 0.0 && !checks.allow_zero_food {
                return Err(Error::domain(
                    name,
                    value,
                    "zero is only accepted in no-food mode",
                ));
            }
        }
        if self.delta <= self.m && !checks.allow_low_conversion {
            return Err(Error::domain(
                "delta",
                self.delta,
                "must exceed m unless the low-conversion override is set",
            ));
        }
        Ok(())
    }

    /// Returns a copy with one parameter replaced. No validation.
    pub fn with(&self, name: ParamName, value: f64) -> Self {
        let mut p = *self;
        *p.get_mut(name) = value;
        p
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Gamma => self.gamma,
            ParamName::Alpha => self.alpha,
            ParamName::Xi => self.xi,
            ParamName::Epsilon => self.epsilon,
            ParamName::M => self.m,
            ParamName::Delta => self.delta,
        }
    }

    fn get_mut(&mut self, name: ParamName) -> &mut f64 {
        match name {
            ParamName::Gamma => &mut self.gamma,
            ParamName::Alpha => &mut self.alpha,
            ParamName::Xi => &mut self.xi,
            ParamName::Epsilon => &mut self.epsilon,
            ParamName::M => &mut self.m,
            ParamName::Delta => &mut self.delta,
        }
    }

    /// 1 + αξ, the additional-food term of the response denominator.
    #[inline]
    pub fn food_factor(&self) -> f64 {
        1.0 + self.alpha * self.xi
    }

    /// δξ − m(1+αξ): sign decides E₀'s type and whether E₂ exists.
    #[inline]
    pub fn phi1(&self) -> f64 {
        self.delta * self.xi - self.m * self.food_factor()
    }

    /// φ₁ + (δ−m)γ²: sign decides whether E₁ is a stable node or a saddle.
    #[inline]
    pub fn phi2(&self) -> f64 {
        self.phi1() + (self.delta - self.m) * self.gamma * self.gamma
    }

    /// 1 + αξ − ξ.
    #[inline]
    pub fn phi3(&self) -> f64 {
        self.food_factor() - self.xi
    }
}

/// Names of the scaled parameters, for sweeps and continuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    Gamma,
    Alpha,
    Xi,
    Epsilon,
    M,
    Delta,
}

impl ParamName {
    pub const ALL: [ParamName; 6] = [
        ParamName::Gamma,
        ParamName::Alpha,
        ParamName::Xi,
        ParamName::Epsilon,
        ParamName::M,
        ParamName::Delta,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ParamName::Gamma => "gamma",
            ParamName::Alpha => "alpha",
            ParamName::Xi => "xi",
            ParamName::Epsilon => "epsilon",
            ParamName::M => "m",
            ParamName::Delta => "delta",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown parameter name `{s}`")))
    }
}

/// Scaled prey and predator biomass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const ORIGIN: State = State { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for State {
    type Output = State;
    fn add(self, rhs: State) -> State {
        State::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for State {
    type Output = State;
    fn sub(self, rhs: State) -> State {
        State::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for State {
    type Output = State;
    fn mul(self, rhs: f64) -> State {
        State::new(self.x * rhs, self.y * rhs)
    }
}

/// Time derivative of a [`State`]; same layout.
pub type StateDerivative = State;

/// Right-hand side of the scaled system.
#[inline]
pub fn rhs(p: &ModelParams, s: State) -> StateDerivative {
    let State { x, y } = s;
    let x2 = x * x;
    let denom = 1.0 + x2 + p.alpha * p.xi;
    let dx = x * (1.0 - x / p.gamma) - x2 * y / denom;
    let dy = p.delta * (x2 + p.xi) * y / denom - p.m * y - p.epsilon * y * y;
    State::new(dx, dy)
}

/// Jacobian of [`rhs`], row-major `[[f_x, f_y], [g_x, g_y]]`.
pub fn jacobian(p: &ModelParams, s: State) -> Matrix2<f64> {
    let State { x, y } = s;
    let b = p.food_factor();
    let x2 = x * x;
    let denom = b + x2;
    let denom2 = denom * denom;
    let fx = 1.0 - 2.0 * x / p.gamma - 2.0 * x * y * b / denom2;
    let fy = -x2 / denom;
    let gx = 2.0 * p.delta * x * y * (1.0 + (p.alpha - 1.0) * p.xi) / denom2;
    let gy = p.delta * (x2 + p.xi) / denom - p.m - 2.0 * p.epsilon * y;
    Matrix2::new(fx, fy, gx, gy)
}

/// Second derivatives of the vector field at `s`, as `(f_xx, f_xy, f_yy, g_xx, g_xy, g_yy)`.
pub fn hessians(p: &ModelParams, s: State) -> [f64; 6] {
    let State { x, y } = s;
    let b = p.food_factor();
    let x2 = x * x;
    let denom = b + x2;
    let denom2 = denom * denom;
    let denom3 = denom2 * denom;
    // x²/D and (x²+ξ)/D, differentiated twice in x
    let q1 = 2.0 * x * b / denom2;
    let q2 = 2.0 * b * (b - 3.0 * x2) / denom3;
    let r1 = 2.0 * x * (b - p.xi) / denom2;
    let r2 = 2.0 * (b - p.xi) * (b - 3.0 * x2) / denom3;
    [
        -2.0 / p.gamma - y * q2,
        -q1,
        0.0,
        p.delta * y * r2,
        p.delta * r1,
        -2.0 * p.epsilon,
    ]
}

/// ∂(f, g)/∂ξ at `s`.
pub fn d_rhs_d_xi(p: &ModelParams, s: State) -> State {
    let State { x, y } = s;
    let x2 = x * x;
    let denom = p.food_factor() + x2;
    let denom2 = denom * denom;
    State::new(
        p.alpha * x2 * y / denom2,
        p.delta * y * (1.0 + (1.0 - p.alpha) * x2) / denom2,
    )
}

/// ∂J/∂ξ at `s`, i.e. the Jacobian of [`d_rhs_d_xi`] in (x, y).
pub fn d_jacobian_d_xi(p: &ModelParams, s: State) -> Matrix2<f64> {
    let State { x, y } = s;
    let x2 = x * x;
    let b = p.food_factor();
    let denom = b + x2;
    let denom2 = denom * denom;
    let denom3 = denom2 * denom;
    let num_g = 1.0 + (1.0 - p.alpha) * x2;
    // d/dx [x²/D²] = 2x(D - 2x²)/D³ = 2x(b - x²)/D³
    let dfx = p.alpha * y * 2.0 * x * (b - x2) / denom3;
    let dfy = p.alpha * x2 / denom2;
    let dgx = p.delta * y * (2.0 * x * (1.0 - p.alpha) * denom - 4.0 * x * num_g) / denom3;
    let dgy = p.delta * num_g / denom2;
    Matrix2::new(dfx, dfy, dgx, dgy)
}

/// Non-trivial prey nullcline `y = (1 − x/γ)(1 + x² + αξ)/x`.
pub fn prey_nullcline_y(p: &ModelParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "prey nullcline is defined for x > 0"));
    }
    Ok((1.0 - x / p.gamma) * (1.0 + x * x + p.alpha * p.xi) / x)
}

/// Non-trivial predator nullcline. Total: negative values are returned as is.
pub fn predator_nullcline_y(p: &ModelParams, x: f64) -> f64 {
    let x2 = x * x;
    ((p.delta - p.m) * x2 + p.phi1()) / (p.epsilon * (1.0 + x2 + p.alpha * p.xi))
}

/// Discriminant of the prey-nullcline slope cubic; positive means the
/// nullcline has a crest and a trough on (0, γ).
pub fn nullcline_discriminant(p: &ModelParams) -> f64 {
    let b = p.food_factor();
    let g2 = p.gamma * p.gamma;
    4.0 / g2 * b * (g2 - 27.0 * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transcritical_params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 2.0, 0.5, 6.0, 8.0).unwrap()
    }

    fn unit_dimensional() -> DimensionalParams {
        DimensionalParams {
            r: 1.0,
            k: 1.0,
            c: 1.0,
            a: 1.0,
            delta1: 1.0,
            m1: 1.0,
            d: 1.0,
            alpha: 1.0,
            food: 1.0,
            eta: 1.0,
        }
    }

    #[test]
    fn identity_scaling() {
        let p = nondimensionalize(&unit_dimensional()).unwrap();
        assert_eq!(
            p,
            ModelParams {
                gamma: 1.0,
                alpha: 1.0,
                xi: 1.0,
                epsilon: 1.0,
                m: 1.0,
                delta: 1.0
            }
        );
    }

    #[test]
    fn zero_food_gives_zero_xi() {
        let dim = DimensionalParams {
            food: 0.0,
            eta: 7.5,
            ..unit_dimensional()
        };
        assert_eq!(nondimensionalize(&dim).unwrap().xi, 0.0);
    }

    #[test]
    fn substitution_example() {
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
        let expected = [5.0, 0.5, 4.0, 0.5, 0.5, 1.5];
        let got = [p.gamma, p.alpha, p.xi, p.epsilon, p.m, p.delta];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn nonpositive_dimensional_field_rejected() {
        let dim = DimensionalParams {
            c: 0.0,
            ..unit_dimensional()
        };
        assert!(matches!(
            nondimensionalize(&dim),
            Err(Error::Domain { name: "c", .. })
        ));
        let dim = DimensionalParams {
            food: -1.0,
            ..unit_dimensional()
        };
        assert!(nondimensionalize(&dim).is_err());
    }

    #[test]
    fn strict_constructor_rejects_low_conversion() {
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.5, 2.0, 1.0).is_err());
        let p = ModelParams {
            gamma: 1.0,
            alpha: 1.0,
            xi: 1.0,
            epsilon: 0.5,
            m: 2.0,
            delta: 1.0,
        };
        p.validate(Checks {
            allow_low_conversion: true,
            ..Checks::default()
        })
        .unwrap();
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.5, 1.0, 2.0).is_err());
        assert!(ModelParams::no_food(1.0, 1.0, 0.5, 1.0, 2.0).is_ok());
    }

    #[test]
    fn trivial_and_axial_points_are_stationary() {
        let p = transcritical_params();
        assert_eq!(rhs(&p, State::ORIGIN), State::ORIGIN);
        assert_eq!(rhs(&p, State::new(p.gamma, 0.0)), State::ORIGIN);
    }

    #[test]
    fn predator_axis_derivative() {
        let p = transcritical_params();
        let s = State::new(0.0, 0.8);
        let d = rhs(&p, s);
        assert_eq!(d.x, 0.0);
        // hand evaluation: (δξ/(1+αξ) − m − εy) y = (16/3 − 6 − 0.4)·0.8
        let expected = (16.0 / 3.0 - 6.0 - 0.4) * 0.8;
        assert!((d.y - expected).abs() < 1e-14);

        // ẏ vanishes at y = φ₁/(ε(1+αξ)) when that is positive
        let q = ModelParams::new(1.0, 1.0, 4.0, 0.5, 6.0, 8.0).unwrap();
        let y2 = q.phi1() / (q.epsilon * q.food_factor());
        assert!(y2 > 0.0);
        assert!(rhs(&q, State::new(0.0, y2)).y.abs() < 1e-14);
    }

    #[test]
    fn jacobian_at_origin_is_diagonal() {
        let p = transcritical_params();
        let j = jacobian(&p, State::ORIGIN);
        let expected = p.phi1() / p.food_factor();
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(j[(1, 0)], 0.0);
        assert!((j[(1, 1)] - expected).abs() < 1e-15);
        assert!((expected + 2.0 / 3.0).abs() < 1e-15);
    }

    fn fd_jacobian(p: &ModelParams, s: State, h: f64) -> Matrix2<f64> {
        let dx = State::new(h, 0.0);
        let dy = State::new(0.0, h);
        let cx = (rhs(p, s + dx) - rhs(p, s - dx)) * (0.5 / h);
        let cy = (rhs(p, s + dy) - rhs(p, s - dy)) * (0.5 / h);
        Matrix2::new(cx.x, cy.x, cx.y, cy.y)
    }

    #[test]
    fn origin_jacobian_matches_finite_differences() {
        let p = transcritical_params();
        let diff = jacobian(&p, State::ORIGIN) - fd_jacobian(&p, State::ORIGIN, 1e-6);
        assert!(diff.amax() <= 1e-6);
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let p = ModelParams::new(3.0, 0.7, 1.3, 0.2, 0.4, 1.1).unwrap();
        let s = State::new(1.7, 0.9);
        let h = 1e-5;
        let [fxx, fxy, fyy, gxx, gxy, gyy] = hessians(&p, s);
        let jx = (jacobian(&p, s + State::new(h, 0.0)) - jacobian(&p, s - State::new(h, 0.0)))
            / (2.0 * h);
        let jy = (jacobian(&p, s + State::new(0.0, h)) - jacobian(&p, s - State::new(0.0, h)))
            / (2.0 * h);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-7 * (1.0 + b.abs());
        assert!(close(fxx, jx[(0, 0)]));
        assert!(close(fxy, jy[(0, 0)]));
        assert!(close(fyy, jy[(0, 1)]));
        assert!(close(gxx, jx[(1, 0)]));
        assert!(close(gxy, jy[(1, 0)]));
        assert!(close(gyy, jy[(1, 1)]));

        let px = p.with(ParamName::Xi, p.xi + h);
        let mx = p.with(ParamName::Xi, p.xi - h);
        let fd = (rhs(&px, s) - rhs(&mx, s)) * (0.5 / h);
        let an = d_rhs_d_xi(&p, s);
        assert!(close(an.x, fd.x) && close(an.y, fd.y));
        let fdj = (jacobian(&px, s) - jacobian(&mx, s)) / (2.0 * h);
        let anj = d_jacobian_d_xi(&p, s);
        for i in 0..4 {
            assert!(close(anj[i], fdj[i]), "{anj} vs {fdj}");
        }
    }

    #[test]
    fn prey_nullcline_shape() {
        let p = ModelParams::new(15.0, 0.1, 0.45, 0.04, 0.28, 0.45).unwrap();
        assert_eq!(prey_nullcline_y(&p, p.gamma).unwrap(), 0.0);
        assert!(prey_nullcline_y(&p, 0.0).is_err());
        assert!(prey_nullcline_y(&p, -1.0).is_err());
        let mut last = 0.0;
        for k in 1..12 {
            let x = 10f64.powi(-k);
            let y = prey_nullcline_y(&p, x).unwrap();
            assert!(y > last);
            last = y;
        }
        assert!(last > 1e10);
        assert!(prey_nullcline_y(&p, 16.0).unwrap() < 0.0);
    }

    #[test]
    fn predator_nullcline_intercepts() {
        let p = transcritical_params();
        let y0 = predator_nullcline_y(&p, 0.0);
        assert!((y0 - p.phi1() / (p.epsilon * p.food_factor())).abs() < 1e-15);
        let q = ModelParams::no_food(1.0, 1.0, 0.5, 6.0, 8.0).unwrap();
        assert!((predator_nullcline_y(&q, 0.0) + q.m / q.epsilon).abs() < 1e-15);
    }

    #[test]
    fn nullclines_zero_the_derivatives() {
        let p = ModelParams::new(15.0, 0.1, 1.0, 0.012, 0.258, 0.3).unwrap();
        for k in 1..150 {
            let x = 0.1 * k as f64;
            let y = prey_nullcline_y(&p, x).unwrap();
            let scale = 1.0 + y.abs();
            assert!(rhs(&p, State::new(x, y)).x.abs() <= 1e-12 * scale * x.max(1.0));
            let y = predator_nullcline_y(&p, x);
            if y >= 0.0 {
                assert!(rhs(&p, State::new(x, y)).y.abs() <= 1e-12 * scale);
            }
        }
    }

    /// Counts sign changes of dy/dx of the prey nullcline on (0, γ).
    fn slope_sign_changes(p: &ModelParams) -> usize {
        let b = p.food_factor();
        let slope = |x: f64| (-2.0 * x * x * x / p.gamma + x * x - b) / (x * x);
        let n = 100_000;
        let mut changes = 0;
        let mut prev = slope(p.gamma / n as f64);
        for i in 2..n {
            let s = slope(p.gamma * i as f64 / n as f64);
            if s.signum() != prev.signum() {
                changes += 1;
            }
            prev = s;
        }
        changes
    }

    #[test]
    fn discriminant_classifies_shape() {
        let p = ModelParams::new(15.0, 0.1, 0.45, 0.04, 0.28, 0.45).unwrap();
        assert!(nullcline_discriminant(&p) > 0.0);
        assert_eq!(slope_sign_changes(&p), 2);

        let q = transcritical_params();
        assert!(nullcline_discriminant(&q) < 0.0);
        assert_eq!(slope_sign_changes(&q), 0);

        let b = q.food_factor();
        let at = q.with(ParamName::Gamma, 3.0 * (3.0 * b).sqrt());
        assert!(nullcline_discriminant(&at).abs() < 1e-12);
    }

    #[test]
    fn param_names_round_trip() {
        for name in ParamName::ALL {
            assert_eq!(name.as_str().parse::<ParamName>().unwrap(), name);
        }
        assert!("beta".parse::<ParamName>().is_err());
    }

    #[test]
    fn phi_identities() {
        let p = transcritical_params();
        assert_eq!(p.phi1(), -2.0);
        assert!((p.phi2() - p.phi1() - (p.delta - p.m) * p.gamma * p.gamma).abs() < 1e-15);
        let a = 0.25;
        let q = p.with(ParamName::Alpha, a).with(ParamName::Xi, 1.0 / (1.0 - a));
        assert!(q.phi3().abs() < 1e-15);
    }
}
