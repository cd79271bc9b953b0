//! Equilibria of the scaled system and their local stability.
//!
//! The trivial point E₀ = (0, 0) and the predator-free point E₁ = (γ, 0)
//! always exist. The prey-free point E₂ = (0, φ₁/(ε(1+αξ))) exists when
//! φ₁ = δξ − m(1+αξ) > 0. Interior points have x* among the real roots in
//! (0, γ) of a degree-five polynomial and y* on the predator nullcline.

use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{jacobian, predator_nullcline_y, rhs, ModelParams, State};
use crate::poly::Polynomial;

/// |Re λ| at or below this declares an equilibrium non-hyperbolic.
pub const TOL_HYP: f64 = 1e-7;

/// A pair is complex when |Im λ| exceeds this fraction of the spectral radius.
pub const FOCUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    CenterAmbiguous,
    NonHyperbolic,
}

impl StabilityClass {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableFocus)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::StableNode => "stable_node",
            StabilityClass::StableFocus => "stable_focus",
            StabilityClass::UnstableNode => "unstable_node",
            StabilityClass::UnstableFocus => "unstable_focus",
            StabilityClass::Saddle => "saddle",
            StabilityClass::CenterAmbiguous => "center_ambiguous",
            StabilityClass::NonHyperbolic => "non_hyperbolic",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    E0,
    E1,
    E2,
    Interior,
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EquilibriumKind::E0 => "E0",
            EquilibriumKind::E1 => "E1",
            EquilibriumKind::E2 => "E2",
            EquilibriumKind::Interior => "interior",
        };
        f.write_str(s)
    }
}

/// Which closed-form inequalities hold at an equilibrium. The interior-only
/// fields are `None` for the boundary equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormFlags {
    /// δξ − m(1+αξ)
    pub phi1: f64,
    /// δξ − m(1+αξ) + (δ−m)γ²
    pub phi2: f64,
    /// 1 + αξ − ξ
    pub phi3: f64,
    /// x*² < 1 + αξ
    pub below_food_root: Option<bool>,
    /// x* > ε/(1+ε/γ)
    pub above_pest_floor: Option<bool>,
    /// φ₃ > 0 and ε/(1+ε/γ) < x* < min(√(1+αξ), γ): the sufficient
    /// condition for asymptotic stability of an interior point.
    pub stability_window: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: State,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
    pub flags: ClosedFormFlags,
}

/// Coefficients of the interior polynomial in x*, constant first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticCoefficients(pub [f64; 6]);

impl QuinticCoefficients {
    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(self.0.to_vec())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Minimum prey level ε/(1+ε/γ) quoted for stable coexistence.
pub fn pest_floor(p: &ModelParams) -> f64 {
    p.epsilon / (1.0 + p.epsilon / p.gamma)
}

/// Eigenvalues of a real 2×2 matrix, larger real part (or the `+i` member of
/// a complex pair) first.
pub fn eigenvalues(j: &Matrix2<f64>) -> [Complex64; 2] {
    let (a, b, c, d) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let det = a * d - b * c;
        // avoid cancellation in the smaller-magnitude root
        let big = if half_tr >= 0.0 {
            half_tr + root
        } else {
            half_tr - root
        };
        let small = if big != 0.0 { det / big } else { half_tr - root };
        let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half_tr, im), Complex64::new(half_tr, -im)]
    }
}

/// Stability class of a planar equilibrium from its eigenvalues.
pub fn stability_class(eig: &[Complex64; 2]) -> StabilityClass {
    let radius = eig[0].norm().max(eig[1].norm());
    let complex = eig[0].im.abs() > FOCUS_TOL * radius;
    let (r0, r1) = (eig[0].re, eig[1].re);
    if complex {
        if r0.abs() <= TOL_HYP {
            StabilityClass::CenterAmbiguous
        } else if r0 < 0.0 {
            StabilityClass::StableFocus
        } else {
            StabilityClass::UnstableFocus
        }
    } else if r0.abs() <= TOL_HYP || r1.abs() <= TOL_HYP {
        StabilityClass::NonHyperbolic
    } else if r0 < 0.0 && r1 < 0.0 {
        StabilityClass::StableNode
    } else if r0 > 0.0 && r1 > 0.0 {
        StabilityClass::UnstableNode
    } else {
        StabilityClass::Saddle
    }
}

/// Coefficients of the polynomial whose roots in (0, γ) are the interior x*.
pub fn interior_quintic(p: &ModelParams) -> QuinticCoefficients {
    let b = p.food_factor();
    let e = p.epsilon;
    let g = p.gamma;
    QuinticCoefficients([
        -e * b * b,
        e * b * b / g + p.phi1(),
        -2.0 * e * b,
        p.delta - p.m + 2.0 * e * b / g,
        -e,
        e / g,
    ])
}

fn flags_for(p: &ModelParams, location: State, kind: EquilibriumKind) -> ClosedFormFlags {
    let mut flags = ClosedFormFlags {
        phi1: p.phi1(),
        phi2: p.phi2(),
        phi3: p.phi3(),
        below_food_root: None,
        above_pest_floor: None,
        stability_window: None,
    };
    if kind == EquilibriumKind::Interior {
        let x = location.x;
        let b = p.food_factor();
        let floor = pest_floor(p);
        let below = x * x < b;
        let above = x > floor;
        flags.below_food_root = Some(below);
        flags.above_pest_floor = Some(above);
        flags.stability_window = Some(flags.phi3 > 0.0 && above && x < b.sqrt().min(p.gamma));
    }
    flags
}

/// Recomputes eigenvalues, class and closed-form flags at `e.location`.
pub fn classify(p: &ModelParams, e: Equilibrium) -> Equilibrium {
    equilibrium_at(p, e.location, e.kind)
}

/// Builds a classified [`Equilibrium`] at a known stationary point.
pub fn equilibrium_at(p: &ModelParams, location: State, kind: EquilibriumKind) -> Equilibrium {
    let eigenvalues = eigenvalues(&jacobian(p, location));
    Equilibrium {
        location,
        kind,
        eigenvalues,
        class: stability_class(&eigenvalues),
        flags: flags_for(p, location, kind),
    }
}

/// Interior equilibria sorted by x*; at most five.
pub fn find_interior_equilibria(p: &ModelParams) -> Result<Vec<Equilibrium>> {
    let quintic = interior_quintic(p).polynomial();
    let mut out = Vec::new();
    for x in quintic.real_roots()? {
        if !(x > 0.0 && x < p.gamma) {
            continue;
        }
        let y = predator_nullcline_y(p, x);
        if y > 0.0 {
            out.push(equilibrium_at(p, State::new(x, y), EquilibriumKind::Interior));
        }
    }
    Ok(out)
}

/// E₀, E₁, E₂ when it exists, then the interior equilibria.
pub fn find_all_equilibria(p: &ModelParams) -> Result<Vec<Equilibrium>> {
    let mut out = vec![
        equilibrium_at(p, State::ORIGIN, EquilibriumKind::E0),
        equilibrium_at(p, State::new(p.gamma, 0.0), EquilibriumKind::E1),
    ];
    if let Some(e2) = prey_free_point(p) {
        out.push(equilibrium_at(p, e2, EquilibriumKind::E2));
    }
    out.extend(find_interior_equilibria(p)?);
    Ok(out)
}

/// E₂ when φ₁ > 0.
pub fn prey_free_point(p: &ModelParams) -> Option<State> {
    let phi1 = p.phi1();
    (phi1 > 0.0).then(|| State::new(0.0, phi1 / (p.epsilon * p.food_factor())))
}

/// Max-norm of the vector field at `s`.
pub fn residual(p: &ModelParams, s: State) -> f64 {
    rhs(p, s).norm_inf()
}

/// Simplified trace of the Jacobian, valid only at interior equilibria.
pub fn interior_trace_closed_form(p: &ModelParams, s: State) -> f64 {
    let State { x, y } = s;
    let b = p.food_factor();
    let denom = 1.0 + x * x + p.alpha * p.xi;
    -p.epsilon * y - x / p.gamma + x * y * (x * x - b) / (denom * denom)
}

/// Simplified determinant of the Jacobian, valid only at interior equilibria.
pub fn interior_det_closed_form(p: &ModelParams, s: State) -> f64 {
    let State { x, y } = s;
    let b = p.food_factor();
    let denom = b + x * x;
    2.0 * p.delta * x.powi(3) * y * (b - p.xi) / denom.powi(3)
        + p.epsilon * x * y * (1.0 / p.gamma + (b - x * x) * y / (denom * denom))
}
