//! Spectral symbols of the mass and stiffness matrices.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::{alpha_coeffs, to_f64, SymbolCoeffs};

/// The cosine polynomial `g(θ) = α_0 + 2 Σ α_k cos(kθ)` in double precision.
#[derive(Debug, Clone)]
pub struct SymbolFn {
    coeffs: SymbolCoeffs,
    alpha: Vec<f64>,
    at_zero: f64,
}

impl SymbolFn {
    pub fn new(coeffs: SymbolCoeffs) -> Self {
        let alpha = coeffs.to_f64();
        let at_zero = to_f64(&coeffs.value_at_zero());
        Self { coeffs, alpha, at_zero }
    }

    /// `g_p^r` built from the cardinal B-spline coefficients.
    pub fn spline(p: usize, r: usize) -> Result<Self> {
        Ok(Self::new(alpha_coeffs(p, r)?))
    }

    pub fn coeffs(&self) -> &SymbolCoeffs {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.degree()
    }

    /// Evaluates without the domain check.
    ///
    /// Written as `g(0) - 4 Σ α_k sin²(kθ/2)` with `g(0)` taken from the exact
    /// coefficients; this keeps full relative accuracy near `θ = 0`, where
    /// the stiffness symbol vanishes quadratically.
    pub fn eval_unchecked(&self, theta: f64) -> f64 {
        let tail: f64 = self
            .alpha
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                let s = (k as f64 * theta * 0.5).sin();
                a * s * s
            })
            .sum();
        self.at_zero - 4.0 * tail
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(self.eval_unchecked(theta))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
    }
    Ok(())
}

pub fn symbol_eval(s: &SymbolFn, theta: f64) -> Result<f64> {
    s.eval(theta)
}

/// `e_p = g_p^1 / g_p^0`, the symbol of `M^{-1} K`.
#[derive(Debug, Clone)]
pub struct RatioSymbol {
    mass: SymbolFn,
    stiffness: SymbolFn,
}

impl RatioSymbol {
    pub fn new(p: usize) -> Result<Self> {
        Ok(Self { mass: SymbolFn::spline(p, 0)?, stiffness: SymbolFn::spline(p, 1)? })
    }

    pub fn mass(&self) -> &SymbolFn {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymbolFn {
        &self.stiffness
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(self.stiffness.eval_unchecked(theta) / self.mass.eval_unchecked(theta))
    }
}

pub fn ratio_symbol(p: usize, theta: f64) -> Result<f64> {
    RatioSymbol::new(p)?.eval(theta)
}

/// Upper bound on the relative error `(e_p(θ) - θ²)/θ²`.
pub fn error_bound_rhs(p: usize, theta: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidDegree(p));
    }
    check_theta(theta)?;
    let two_p = 2 * p as i32;
    let first = 4.0 * PI * (PI - theta) / (2.0 * PI - theta).powi(2) * (theta / (2.0 * PI - theta)).powi(two_p);
    let second = 5.0 * (theta / (2.0 * PI + theta)).powi(two_p);
    Ok(first + second)
}

/// Lower bound `(4/π²)^{p+1}` of the mass symbol.
pub fn mass_symbol_lower_bound(p: usize) -> f64 {
    (4.0 / (PI * PI)).powi(p as i32 + 1)
}
