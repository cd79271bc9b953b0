//! Real-coefficient polynomials and their roots.
//!
//! Roots come from the eigenvalues of the companion matrix and are then
//! refined by Newton's method on the polynomial itself.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients stored constant-first: `c[0] + c[1] x + ... + c[n] xⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

/// Roots are treated as real when `|Im z| ≤ REAL_ROOT_TOL · (1 + |z|)`.
pub const REAL_ROOT_TOL: f64 = 1e-8;

impl Polynomial {
    /// Trailing zero leading coefficients are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Σ |cᵢ| |x|ⁱ, the natural scale for a residual at `x`.
    pub fn magnitude_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    /// All complex roots, polished.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = companion.complex_eigenvalues();
        let deriv = self.derivative();
        eig.iter().map(|&z| self.polish(&deriv, z)).collect()
    }

    /// Real roots in ascending order, each polished in real arithmetic.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let deriv = self.derivative();
        let mut out: Vec<f64> = self
            .roots()?
            .into_iter()
            .filter(|z| z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.norm()))
            .map(|z| self.polish_real(&deriv, z.re))
            .collect();
        out.sort_by(|a, b| a.total_cmp(b));
        Ok(out)
    }

    fn polish(&self, deriv: &Polynomial, z0: Complex64) -> Result<Complex64> {
        let mut z = z0;
        let mut best = (self.eval_complex(z).norm(), z);
        for _ in 0..60 {
            let d = deriv.eval_complex(z);
            if d.norm() == 0.0 {
                break;
            }
            let step = self.eval_complex(z) / d;
            z -= step;
            let r = self.eval_complex(z).norm();
            if !r.is_finite() {
                break;
            }
            if r < best.0 {
                best = (r, z);
            }
            if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        let (residual, z) = best;
        // Newton must not wander off to a neighbouring root.
        let z = if (z - z0).norm() > 1e-3 * (1.0 + z0.norm()) {
            z0
        } else {
            z
        };
        let residual = residual.min(self.eval_complex(z).norm());
        if residual > 1e-6 * self.magnitude_at(z.norm()) {
            return Err(Error::RootPolish { root: z0, residual });
        }
        Ok(z)
    }

    fn polish_real(&self, deriv: &Polynomial, x0: f64) -> f64 {
        let mut x = x0;
        let mut best = (self.eval(x).abs(), x);
        for _ in 0..60 {
            let d = deriv.eval(x);
            if d == 0.0 {
                break;
            }
            let step = self.eval(x) / d;
            x -= step;
            let r = self.eval(x).abs();
            if r < best.0 {
                best = (r, x);
            }
            if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
        let x = best.1;
        if (x - x0).abs() > 1e-3 * (1.0 + x0.abs()) {
            x0
        } else {
            x
        }
    }
}
