//! Parameter-plane atlas over (α, ξ).
//!
//! The no-food system (ξ = 0) falls into one of three archetypes: no
//! interior equilibrium (R1), a unique interior stable node (R2) or a unique
//! interior stable focus (R3). Within each, cells of the (α, ξ) plane are
//! labelled by the signs of
//!
//! ```text
//! φ₁ = δξ − m(1+αξ)            (E₂ exists and E₀ is unstable iff > 0)
//! φ₂ = φ₁ + (δ − m)γ²          (E₁ is a saddle iff > 0)
//! φ₃ = 1 + αξ − ξ
//! ```
//!
//! Labels for R2 and R3 (k = 2, 3):
//!
//! | label | φ₁ | φ₂ | φ₃ |
//! |-------|----|----|----|
//! | Ak1   | +  | +  | −  |
//! | Ak2   | +  | +  | +  |
//! | Ak3   | −  | +  | +  |
//! | Ak4   | −  | +  | −  |
//! | Ak5   | −  | −  | ±  |
//!
//! Labels for R1: A11 (φ₁ > 0), A12 (φ₁ < 0 < φ₂), A13 (φ₂ < 0 < φ₃),
//! A14 (φ₂ < 0, φ₃ < 0). Zero counts as positive. Since δ > m, φ₂ > φ₁, so
//! φ₁ > 0 with φ₂ < 0 does not occur. The labels are a sign-based
//! approximation; region boundaries shaped by folds of the interior
//! polynomial are not resolved by them.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{find_all_equilibria, pest_floor, EquilibriumKind, StabilityClass};
use crate::error::{Error, Result};
use crate::model::{ModelParams, ParamName};

pub const LABEL_TABLE: &str = "R2/R3 (k=2,3): Ak1 (+,+,-), Ak2 (+,+,+), Ak3 (-,+,+), Ak4 (-,+,-), Ak5 (-,-,*); \
R1: A11 (+,+,*), A12 (-,+,*), A13 (-,-,+), A14 (-,-,-); signs of (phi1, phi2, phi3), zero counted as +; \
sign-based approximation of the figure regions";

/// `(φ₁, φ₂, φ₃)` at the parameters' (α, ξ).
pub fn phi_values(p: &ModelParams) -> (f64, f64, f64) {
    (p.phi1(), p.phi2(), p.phi3())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseRegion {
    R1,
    R2,
    R3,
    Unclassified,
}

impl fmt::Display for BaseRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseRegion::R1 => "R1",
            BaseRegion::R2 => "R2",
            BaseRegion::R3 => "R3",
            BaseRegion::Unclassified => "unclassified",
        })
    }
}

/// Archetype of the no-food system from its computed equilibria.
pub fn classify_base_region(p_no_food: &ModelParams) -> Result<BaseRegion> {
    if p_no_food.xi != 0.0 {
        return Err(Error::Config(format!(
            "base region needs xi = 0, got {}",
            p_no_food.xi
        )));
    }
    let interior: Vec<_> = find_all_equilibria(p_no_food)?
        .into_iter()
        .filter(|e| e.kind == EquilibriumKind::Interior)
        .collect();
    Ok(match interior.as_slice() {
        [] => BaseRegion::R1,
        [e] if e.class == StabilityClass::StableNode => BaseRegion::R2,
        [e] if e.class == StabilityClass::StableFocus => BaseRegion::R3,
        _ => BaseRegion::Unclassified,
    })
}

fn sign(v: f64) -> char {
    if v >= 0.0 {
        '+'
    } else {
        '-'
    }
}

/// Sign-triple label within a base region.
pub fn subregion(base: BaseRegion, phi: (f64, f64, f64)) -> String {
    let (p1, p2, p3) = (phi.0 >= 0.0, phi.1 >= 0.0, phi.2 >= 0.0);
    match base {
        BaseRegion::R1 => {
            let j = match (p1, p2, p3) {
                (true, _, _) => 1,
                (false, true, _) => 2,
                (false, false, true) => 3,
                (false, false, false) => 4,
            };
            format!("A1{j}")
        }
        _ => {
            let j = match (p1, p2, p3) {
                (true, _, false) => 1,
                (true, _, true) => 2,
                (false, true, true) => 3,
                (false, true, false) => 4,
                (false, false, _) => 5,
            };
            let k = match base {
                BaseRegion::R2 => "2",
                BaseRegion::R3 => "3",
                _ => "U",
            };
            format!("A{k}{j}")
        }
    }
}

/// Equilibrium structure recomputed in every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFlags {
    pub e0_class: Option<StabilityClass>,
    pub e1_class: Option<StabilityClass>,
    pub e2_class: Option<StabilityClass>,
    pub interior_count: usize,
    pub stable_interior_count: usize,
    /// E₁ stable and at least one stable interior equilibrium.
    pub bistable: bool,
    pub min_stable_interior_x: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub base_region: BaseRegion,
    pub subregion: String,
    pub signs: String,
    pub flags: RegionFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasCell {
    pub alpha: f64,
    pub xi: f64,
    pub phi: (f64, f64, f64),
    pub label: RegionLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub base_params: ModelParams,
    pub base_region: BaseRegion,
    pub alpha_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    /// Row-major: α outer, ξ inner.
    pub cells: Vec<AtlasCell>,
}

impl Atlas {
    pub fn cell(&self, i_alpha: usize, i_xi: usize) -> &AtlasCell {
        &self.cells[i_alpha * self.xi_grid.len() + i_xi]
    }
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// 200 points log-spaced on [1e-2, 1e2].
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 200)
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Config(format!("{name} grid is empty")));
    }
    if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Config(format!("{name} grid must be finite and > 0")));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn cell_flags(p: &ModelParams) -> RegionFlags {
    let mut flags = RegionFlags {
        e0_class: None,
        e1_class: None,
        e2_class: None,
        interior_count: 0,
        stable_interior_count: 0,
        bistable: false,
        min_stable_interior_x: None,
        error: None,
    };
    match find_all_equilibria(p) {
        Ok(eqs) => {
            for e in eqs {
                match e.kind {
                    EquilibriumKind::E0 => flags.e0_class = Some(e.class),
                    EquilibriumKind::E1 => flags.e1_class = Some(e.class),
                    EquilibriumKind::E2 => flags.e2_class = Some(e.class),
                    EquilibriumKind::Interior => {
                        flags.interior_count += 1;
                        if e.class.is_stable() {
                            flags.stable_interior_count += 1;
                            let x = e.location.x;
                            flags.min_stable_interior_x =
                                Some(flags.min_stable_interior_x.map_or(x, |m: f64| m.min(x)));
                        }
                    }
                }
            }
            flags.bistable = flags.e1_class.is_some_and(|c| c.is_stable())
                && flags.stable_interior_count > 0;
        }
        Err(e) => flags.error = Some(e.to_string()),
    }
    flags
}

/// Labels every (α, ξ) cell; α and ξ of `p_base` are overridden per cell.
pub fn atlas(p_base: &ModelParams, alpha_grid: &[f64], xi_grid: &[f64]) -> Result<Atlas> {
    check_grid("alpha", alpha_grid)?;
    check_grid("xi", xi_grid)?;
    let base_region = classify_base_region(&p_base.with(ParamName::Xi, 0.0))?;
    let n_xi = xi_grid.len();
    let cells = (0..alpha_grid.len() * n_xi)
        .into_par_iter()
        .map(|k| {
            let (alpha, xi) = (alpha_grid[k / n_xi], xi_grid[k % n_xi]);
            let p = p_base.with(ParamName::Alpha, alpha).with(ParamName::Xi, xi);
            let phi = phi_values(&p);
            AtlasCell {
                alpha,
                xi,
                phi,
                label: RegionLabel {
                    base_region,
                    subregion: subregion(base_region, phi),
                    signs: [sign(phi.0), sign(phi.1), sign(phi.2)].iter().collect(),
                    flags: cell_flags(&p),
                },
            }
        })
        .collect();
    Ok(Atlas {
        base_params: *p_base,
        base_region,
        alpha_grid: alpha_grid.to_vec(),
        xi_grid: xi_grid.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EradicationVerdict {
    UnreachableAsStableState,
    StablePreyFreePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConsequence {
    pub alpha: f64,
    pub xi: f64,
    pub pest_eradication: EradicationVerdict,
    /// E₁ is stable: the pest can settle at carrying capacity.
    pub pest_dominance_risk: bool,
    pub min_coexistence_pest: Option<f64>,
    pub floor: f64,
    /// `min_coexistence_pest > floor`, when a stable interior point exists.
    pub above_floor: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsequencesReport {
    pub floor: f64,
    pub cells: Vec<CellConsequence>,
    pub stable_prey_free_cells: usize,
    pub dominance_cells: usize,
    pub floor_violations: usize,
}

/// Pest eradication, dominance and minimum-coexistence summary per cell.
pub fn consequences_report(atlas: &Atlas) -> ConsequencesReport {
    let floor = pest_floor(&atlas.base_params);
    let cells: Vec<CellConsequence> = atlas
        .cells
        .iter()
        .map(|c| {
            let f = &c.label.flags;
            let stable_e2 = f.e2_class.is_some_and(|k| k.is_stable());
            CellConsequence {
                alpha: c.alpha,
                xi: c.xi,
                pest_eradication: if stable_e2 {
                    EradicationVerdict::StablePreyFreePoint
                } else {
                    EradicationVerdict::UnreachableAsStableState
                },
                pest_dominance_risk: f.e1_class.is_some_and(|k| k.is_stable()),
                min_coexistence_pest: f.min_stable_interior_x,
                floor,
                above_floor: f.min_stable_interior_x.map(|x| x > floor),
            }
        })
        .collect();
    ConsequencesReport {
        floor,
        stable_prey_free_cells: cells
            .iter()
            .filter(|c| c.pest_eradication == EradicationVerdict::StablePreyFreePoint)
            .count(),
        dominance_cells: cells.iter().filter(|c| c.pest_dominance_risk).count(),
        floor_violations: cells.iter().filter(|c| c.above_floor == Some(false)).count(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::new(1.0, 1.0, 2.0, 0.5, 6.0, 8.0).unwrap()
    }

    #[test]
    fn phi_identities() {
        let (p1, p2, p3) = phi_values(&base());
        assert_eq!(p1, -2.0);
        assert_eq!(p2 - p1, (8.0 - 6.0) * 1.0);
        let q = base().with(ParamName::Alpha, 0.25).with(ParamName::Xi, 1.0 / 0.75);
        assert!(q.phi3().abs() < 1e-15);
        assert_eq!(p3, 1.0 + 2.0 - 2.0);
    }

    #[test]
    fn base_regions() {
        // (δ−m)γ² − m < 0: E₁ stable and no interior point without food
        let r1 = ModelParams::no_food(1.0, 1.0, 0.5, 6.0, 8.0).unwrap();
        assert_eq!(classify_base_region(&r1).unwrap(), BaseRegion::R1);
        let r2 = ModelParams::no_food(15.0, 0.1, 0.1, 0.28, 0.45).unwrap();
        assert_eq!(classify_base_region(&r2).unwrap(), BaseRegion::R2);
        let r3 = ModelParams::no_food(3.0, 1.0, 0.5, 1.0, 3.0).unwrap();
        assert_eq!(classify_base_region(&r3).unwrap(), BaseRegion::R3);

        // Hopf-scenario rates without food: a stable focus coexists with a
        // saddle and an unstable focus, so no single archetype applies
        let hopf = ModelParams::no_food(15.0, 0.1, 0.045, 0.28, 0.45).unwrap();
        assert_eq!(classify_base_region(&hopf).unwrap(), BaseRegion::Unclassified);
        let found = find_all_equilibria(&hopf).unwrap();
        let interior: Vec<_> = found.iter().filter(|e| e.kind == EquilibriumKind::Interior).collect();
        assert_eq!(interior.len(), 3);
        assert!(interior
            .iter()
            .any(|e| e.class == StabilityClass::StableFocus && e.eigenvalues[0].im.abs() > 0.0));
        assert!(classify_base_region(&base()).is_err());
    }

    #[test]
    fn labels_follow_sign_table() {
        assert_eq!(subregion(BaseRegion::R2, (1.0, 2.0, -1.0)), "A21");
        assert_eq!(subregion(BaseRegion::R3, (1.0, 2.0, 1.0)), "A32");
        assert_eq!(subregion(BaseRegion::R2, (-1.0, 2.0, 1.0)), "A23");
        assert_eq!(subregion(BaseRegion::R2, (-1.0, 2.0, -1.0)), "A24");
        assert_eq!(subregion(BaseRegion::R3, (-2.0, -1.0, 3.0)), "A35");
        assert_eq!(subregion(BaseRegion::R1, (-2.0, -1.0, -3.0)), "A14");
        assert_eq!(subregion(BaseRegion::R1, (0.0, 1.0, -3.0)), "A11");
    }

    #[test]
    fn atlas_cells_are_consistent() {
        let grid = log_grid(1e-2, 1e2, 24);
        let a = atlas(&base(), &grid, &grid).unwrap();
        assert_eq!(a.cells.len(), 24 * 24);
        for c in &a.cells {
            let f = &c.label.flags;
            assert!(f.error.is_none());
            if c.phi.0 > 0.0 {
                assert_eq!(f.e2_class, Some(StabilityClass::Saddle));
            } else {
                assert_eq!(f.e2_class, None);
            }
            if c.phi.1 < 0.0 {
                assert_eq!(f.e1_class, Some(StabilityClass::StableNode));
                assert_eq!(f.bistable, f.stable_interior_count > 0);
            }
        }
        let again = atlas(&base(), &grid, &grid).unwrap();
        assert_eq!(a, again);
        let report = consequences_report(&a);
        assert_eq!(report.stable_prey_free_cells, 0);
        assert!((report.floor - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn label_boundaries_track_zero_contours() {
        let grid = log_grid(1e-2, 1e2, 40);
        let a = atlas(&base(), &grid, &grid).unwrap();
        for i in 0..grid.len() {
            for j in 0..grid.len() - 1 {
                let (c0, c1) = (a.cell(i, j), a.cell(i, j + 1));
                if c0.label.signs != c1.label.signs {
                    let flips = |u: f64, v: f64| (u >= 0.0) != (v >= 0.0);
                    assert!(
                        flips(c0.phi.0, c1.phi.0) || flips(c0.phi.1, c1.phi.1) || flips(c0.phi.2, c1.phi.2)
                    );
                }
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(atlas(&base(), &[1.0, 0.5], &[1.0]).is_err());
        assert!(atlas(&base(), &[0.0, 0.5], &[1.0]).is_err());
        assert!(atlas(&base(), &[], &[1.0]).is_err());
        let g = default_grid();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (1e-2, 1e2));
    }
}
