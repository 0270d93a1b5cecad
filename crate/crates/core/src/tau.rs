//! Toeplitz±Hankel matrices, the four τ(ε, φ) algebras that diagonalize
//! them, and O(p·n) structured products and transform-based solves.
//!
//! Every matrix here is `T_n^α ± H_n^α` for a banded symmetric Toeplitz part
//! and a Hankel correction living in the top-left and bottom-right corners.
//! Which Hankel variant and sign appear is fixed by the algebra:
//!
//! | algebra  | matrix        | grid `θ_j`          |
//! |----------|---------------|---------------------|
//! | (0, 0)   | `T - H2`      | `jπ/(n+1)`          |
//! | (1, 1)   | `T + H1`      | `(j-1)π/n`          |
//! | (0, 1)   | `T + H21`     | `(2j-1)π/(2n+1)`    |
//! | (-1, -1) | `T - H1`      | `jπ/n`              |
//!
//! Indices `i, j` in public APIs are 1-based where they name an eigenpair.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational, SymbolCoeffs};
use crate::symbols::SymbolFn;

/// Relative threshold below which an eigenvalue is treated as zero in solves.
pub const SINGULAR_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HankelVariant {
    /// Corners seeded by `α_1`.
    H1,
    /// Corners seeded by `α_2`.
    H2,
    /// Negated `α_2` corner top-left, `α_1` corner bottom-right.
    H21,
}

impl HankelVariant {
    /// Which `α_k` sits at 0-based `(i, j)` of the size-`n` Hankel matrix, and
    /// whether it enters negated. `None` outside the corners.
    ///
    /// For `n >= p + 1` the two corners never overlap, so at most one applies.
    pub fn index(self, n: usize, p: usize, i: usize, j: usize) -> Option<(usize, bool)> {
        let s = i + j + 2; // 1-based I + J
        let (top, bottom, neg_top) = match self {
            HankelVariant::H1 => (s - 1, 2 * n + 1 - s, false),
            HankelVariant::H2 => (s, 2 * n + 2 - s, false),
            HankelVariant::H21 => (s, 2 * n + 1 - s, true),
        };
        if top <= p {
            Some((top, neg_top))
        } else if bottom <= p {
            Some((bottom, false))
        } else {
            None
        }
    }
}

/// One of the four τ(ε, φ) algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauAlgebra {
    /// (ε, φ) = (0, 0)
    ZeroZero,
    /// (ε, φ) = (1, 1)
    OneOne,
    /// (ε, φ) = (0, 1)
    ZeroOne,
    /// (ε, φ) = (-1, -1)
    MinusMinus,
}

impl TauAlgebra {
    pub const ALL: [TauAlgebra; 4] =
        [TauAlgebra::ZeroZero, TauAlgebra::OneOne, TauAlgebra::ZeroOne, TauAlgebra::MinusMinus];

    pub fn from_eps_phi(eps: i8, phi: i8) -> Option<Self> {
        match (eps, phi) {
            (0, 0) => Some(TauAlgebra::ZeroZero),
            (1, 1) => Some(TauAlgebra::OneOne),
            (0, 1) => Some(TauAlgebra::ZeroOne),
            (-1, -1) => Some(TauAlgebra::MinusMinus),
            _ => None,
        }
    }

    pub fn eps_phi(self) -> (i8, i8) {
        match self {
            TauAlgebra::ZeroZero => (0, 0),
            TauAlgebra::OneOne => (1, 1),
            TauAlgebra::ZeroOne => (0, 1),
            TauAlgebra::MinusMinus => (-1, -1),
        }
    }

    /// Hankel variant and sign (`true` for `+`) of the matrices in this algebra.
    pub fn hankel(self) -> (HankelVariant, bool) {
        match self {
            TauAlgebra::ZeroZero => (HankelVariant::H2, false),
            TauAlgebra::OneOne => (HankelVariant::H1, true),
            TauAlgebra::ZeroOne => (HankelVariant::H21, true),
            TauAlgebra::MinusMinus => (HankelVariant::H1, false),
        }
    }

    /// Sampling point of the `j`-th eigenvalue, `j = 1..=n`.
    pub fn theta(self, n: usize, j: usize) -> f64 {
        let (n, j) = (n as f64, j as f64);
        match self {
            TauAlgebra::ZeroZero => j * PI / (n + 1.0),
            TauAlgebra::OneOne => (j - 1.0) * PI / n,
            TauAlgebra::ZeroOne => (2.0 * j - 1.0) * PI / (2.0 * n + 1.0),
            TauAlgebra::MinusMinus => j * PI / n,
        }
    }

    /// Entry `(i, j)` (1-based) of the orthogonal transform `Q_n(ε, φ)`.
    pub fn q_entry(self, n: usize, i: usize, j: usize) -> f64 {
        let nf = n as f64;
        let (fi, fj) = (i as f64, j as f64);
        match self {
            TauAlgebra::ZeroZero => (2.0 / (nf + 1.0)).sqrt() * (fi * fj * PI / (nf + 1.0)).sin(),
            TauAlgebra::OneOne => {
                let c = if j == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                (2.0 / nf).sqrt() * c * ((fj - 1.0) * PI / nf * (fi - 0.5)).cos()
            }
            TauAlgebra::ZeroOne => {
                (4.0 / (2.0 * nf + 1.0)).sqrt() * (fi * (2.0 * fj - 1.0) * PI / (2.0 * nf + 1.0)).sin()
            }
            TauAlgebra::MinusMinus => {
                let c = if j == n { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                (2.0 / nf).sqrt() * c * (fj * PI / nf * (fi - 0.5)).sin()
            }
        }
    }

    pub fn dense_q(self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| self.q_entry(n, i + 1, j + 1))
    }
}

impl std::fmt::Display for TauAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (e, p) = self.eps_phi();
        write!(f, "tau({e},{p})")
    }
}

fn check_size(coeffs: &SymbolCoeffs, n: usize) -> Result<()> {
    let p = coeffs.degree();
    if n < p + 1 {
        return Err(Error::SizeTooSmall { n, min: p + 1, reason: "band pattern would overlap itself" });
    }
    Ok(())
}

/// Symmetric banded Toeplitz matrix with first row `(α_0, …, α_p, 0, …)`.
pub fn build_toeplitz(coeffs: &SymbolCoeffs, n: usize) -> Result<DMatrix<Rational>> {
    check_size(coeffs, n)?;
    let p = coeffs.degree();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        if d <= p {
            coeffs.coeffs()[d].clone()
        } else {
            Rational::zero()
        }
    }))
}

pub fn build_hankel(coeffs: &SymbolCoeffs, n: usize, variant: HankelVariant) -> Result<DMatrix<Rational>> {
    check_size(coeffs, n)?;
    let p = coeffs.degree();
    Ok(DMatrix::from_fn(n, n, |i, j| match variant.index(n, p, i, j) {
        Some((k, neg)) => {
            let v = coeffs.coeffs()[k].clone();
            if neg {
                -v
            } else {
                v
            }
        }
        None => Rational::zero(),
    }))
}

/// `scale · (T_n^α ± H_n^α)` stored through its `p + 1` coefficients.
#[derive(Debug, Clone)]
pub struct StructuredMatrix {
    coeffs: SymbolCoeffs,
    alpha: Vec<f64>,
    n: usize,
    algebra: TauAlgebra,
    scale: Rational,
    scale_f64: f64,
}

impl StructuredMatrix {
    pub fn new(coeffs: SymbolCoeffs, n: usize, algebra: TauAlgebra, scale: Rational) -> Result<Self> {
        check_size(&coeffs, n)?;
        let alpha = coeffs.to_f64();
        let scale_f64 = to_f64(&scale);
        Ok(Self { coeffs, alpha, n, algebra, scale, scale_f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coeffs.degree()
    }

    pub fn coeffs(&self) -> &SymbolCoeffs {
        &self.coeffs
    }

    pub fn algebra(&self) -> TauAlgebra {
        self.algebra
    }

    pub fn hankel_variant(&self) -> HankelVariant {
        self.algebra.hankel().0
    }

    /// `true` when the Hankel part is added.
    pub fn hankel_plus(&self) -> bool {
        self.algebra.hankel().1
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn scale_f64(&self) -> f64 {
        self.scale_f64
    }

    /// Unscaled `(T ± H)` entry at 0-based `(i, j)`, as `(α index, sign)` terms.
    fn terms(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, f64)> {
        let p = self.degree();
        let d = i.abs_diff(j);
        let toeplitz = (d <= p).then_some((d, 1.0));
        let (variant, plus) = self.algebra.hankel();
        let hankel = variant.index(self.n, p, i, j).map(|(k, neg)| {
            let s = if neg { -1.0 } else { 1.0 };
            (k, if plus { s } else { -s })
        });
        toeplitz.into_iter().chain(hankel)
    }

    pub fn entry_exact(&self, i: usize, j: usize) -> Rational {
        let mut acc = Rational::zero();
        for (k, s) in self.terms(i, j) {
            let a = &self.coeffs.coeffs()[k];
            if s > 0.0 {
                acc += a;
            } else {
                acc -= a;
            }
        }
        acc * &self.scale
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.scale_f64 * self.terms(i, j).map(|(k, s)| s * self.alpha[k]).sum::<f64>()
    }

    pub fn dense_exact(&self) -> DMatrix<Rational> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry_exact(i, j))
    }

    /// Dense expansion; entries are rounded from the exact values.
    pub fn dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry_exact(i, j).to_f64().unwrap_or(f64::NAN))
    }

    /// Product with `v` in O(p·n): the band, then the two Hankel corners.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        let p = self.degree();
        let a = &self.alpha;
        let mut y = vec![0.0; n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(p);
            let hi = (i + p).min(n - 1);
            let mut acc = 0.0;
            for (j, vj) in v.iter().enumerate().take(hi + 1).skip(lo) {
                acc += a[i.abs_diff(j)] * vj;
            }
            *yi = acc;
        }
        let (variant, plus) = self.algebra.hankel();
        let corner = p.min(n);
        let mut idx: Vec<usize> = (0..corner).chain(n - corner..n).collect();
        idx.sort_unstable();
        idx.dedup();
        for &i in &idx {
            for &j in &idx {
                if let Some((k, neg)) = variant.index(n, p, i, j) {
                    let s = if neg == plus { -1.0 } else { 1.0 };
                    y[i] += s * a[k] * v[j];
                }
            }
        }
        for yi in &mut y {
            *yi *= self.scale_f64;
        }
        Ok(y)
    }

    pub fn eigensystem(&self) -> EigenSystem {
        EigenSystem::from_coeffs(&self.coeffs, self.n, self.algebra, self.scale_f64)
    }

    /// Solves `A x = b` through `Q diag(λ)^{-1} Qᵀ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.eigensystem().solve(b)
    }
}

pub fn structured_matvec(m: &StructuredMatrix, v: &[f64]) -> Result<Vec<f64>> {
    m.matvec(v)
}

pub fn structured_solve(m: &StructuredMatrix, b: &[f64]) -> Result<Vec<f64>> {
    m.solve(b)
}

/// Eigenvalues sampled from the symbol, eigenvectors implicit in `Q_n(ε, φ)`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    algebra: TauAlgebra,
    scale: f64,
}

impl EigenSystem {
    fn from_coeffs(coeffs: &SymbolCoeffs, n: usize, algebra: TauAlgebra, scale: f64) -> Self {
        let g = SymbolFn::new(coeffs.clone());
        let eigenvalues = (1..=n).map(|j| scale * g.eval_unchecked(algebra.theta(n, j))).collect();
        Self { eigenvalues, algebra, scale }
    }

    /// Ordered by `j`, not by magnitude.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn algebra(&self) -> TauAlgebra {
        self.algebra
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.algebra.theta(self.n(), j)
    }

    pub fn eigenvector(&self, j: usize) -> Result<Vec<f64>> {
        tau_transform_column(self.algebra, self.n(), j)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let max = self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some((idx, &value)) = self.eigenvalues.iter().enumerate().find(|(_, v)| v.abs() <= SINGULAR_RTOL * max) {
            return Err(Error::Singular { index: idx + 1, value });
        }
        let mut c = tau_apply_transpose(self.algebra, n, b)?;
        for (cj, lam) in c.iter_mut().zip(&self.eigenvalues) {
            *cj /= lam;
        }
        tau_apply(self.algebra, n, &c)
    }
}

pub fn tau_eigensystem(coeffs: &SymbolCoeffs, n: usize, algebra: TauAlgebra, scale: f64) -> Result<EigenSystem> {
    check_size(coeffs, n)?;
    Ok(EigenSystem::from_coeffs(coeffs, n, algebra, scale))
}

/// Column `j` (1-based) of `Q_n(ε, φ)`, a unit-norm eigenvector.
pub fn tau_transform_column(algebra: TauAlgebra, n: usize, j: usize) -> Result<Vec<f64>> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    Ok((1..=n).map(|i| algebra.q_entry(n, i, j)).collect())
}

/// `Q v`, dense O(n²).
pub fn tau_apply(algebra: TauAlgebra, n: usize, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok((1..=n).map(|i| v.iter().enumerate().map(|(j, vj)| algebra.q_entry(n, i, j + 1) * vj).sum()).collect())
}

/// `Qᵀ v`, dense O(n²).
pub fn tau_apply_transpose(algebra: TauAlgebra, n: usize, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok((1..=n).map(|j| v.iter().enumerate().map(|(i, vi)| algebra.q_entry(n, i + 1, j) * vi).sum()).collect())
}

/// Converts an exact dense matrix to floating point.
pub fn to_f64_matrix(m: &DMatrix<Rational>) -> DMatrix<f64> {
    m.map(|q| to_f64(&q))
}

/// `‖A u - λ u‖₂` for a dense `A`.
pub fn eigen_residual(a: &DMatrix<f64>, u: &[f64], lambda: f64) -> f64 {
    let u = DVector::from_column_slice(u);
    (a * &u - u * lambda).norm()
}
