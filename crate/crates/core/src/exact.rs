//! Exact evaluation of cardinal B-splines on integer knots.
//!
//! The cardinal B-spline of degree `p` is supported on `[0, p + 1]` and is
//! built by the two-term recursion starting from the indicator of `[0, 1)`.
//! Derivatives are finite differences of lower-degree splines:
//! `N_p^{(r)}(t) = sum_k (-1)^k C(r, k) N_{p-r}(t - k)`.
//!
//! Everything here is generic over the scalar so that the same recursion runs
//! on [`Rational`] (for exact identities) and on `f64` (for quadrature).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Shorthand for `num / den` as a [`Rational`].
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Scalars the cardinal recursion can run on.
pub trait SplineScalar: Clone + Num + PartialOrd + FromPrimitive {}
impl<T: Clone + Num + PartialOrd + FromPrimitive> SplineScalar for T {}

fn from_usize<T: SplineScalar>(v: usize) -> T {
    T::from_usize(v).expect("small integer fits in scalar")
}

/// Value of the degree-`q` cardinal B-spline at `t` (no derivative).
///
/// Triangular evaluation of the recursion: level `d` holds `N_d(t - k)` for
/// `k = 0..=q-d`.
pub fn cardinal_value<T: SplineScalar>(q: usize, t: &T) -> T {
    let zero = T::zero();
    let upper: T = from_usize(q + 1);
    if *t < zero || *t >= upper {
        return zero;
    }
    let mut level: Vec<T> = (0..=q)
        .map(|k| {
            let lo: T = from_usize(k);
            let hi: T = from_usize(k + 1);
            if *t >= lo && *t < hi {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    for d in 1..=q {
        let dd: T = from_usize(d);
        for k in 0..=(q - d) {
            let shifted = t.clone() - from_usize::<T>(k);
            let left = shifted.clone() / dd.clone() * level[k].clone();
            let right = (from_usize::<T>(d + 1) - shifted) / dd.clone() * level[k + 1].clone();
            level[k] = left + right;
        }
    }
    level.swap_remove(0)
}

/// `r`-th derivative of the degree-`p` cardinal B-spline at `t`.
///
/// At the knots of an `r = p` derivative the right limit is returned, the
/// same convention as the half-open degree-zero indicator.
pub fn cardinal_eval_generic<T: SplineScalar>(p: usize, r: usize, t: &T) -> Result<T> {
    if r > p {
        return Err(Error::InvalidOrder { p, r });
    }
    let q = p - r;
    let mut acc = T::zero();
    let mut binom = 1usize;
    for k in 0..=r {
        let term = cardinal_value(q, &(t.clone() - from_usize::<T>(k))) * from_usize::<T>(binom);
        acc = if k % 2 == 0 { acc + term } else { acc - term };
        binom = binom * (r - k) / (k + 1);
    }
    Ok(acc)
}

/// Exact value of `N_p^{(r)}(t)`.
pub fn cardinal_eval(p: usize, r: usize, t: &Rational) -> Result<Rational> {
    cardinal_eval_generic(p, r, t)
}

/// Floating-point value of `N_p^{(r)}(t)`, used on quadrature nodes.
pub fn cardinal_eval_f64(p: usize, r: usize, t: f64) -> Result<f64> {
    cardinal_eval_generic(p, r, &t)
}

/// Full-line inner product `∫ N_{p1}^{(r1)}(t) N_{p2}^{(r2)}(t + rho) dt`.
pub fn cardinal_inner(p1: usize, r1: usize, p2: usize, r2: usize, rho: &Rational) -> Result<Rational> {
    if r1 > p1 {
        return Err(Error::InvalidOrder { p: p1, r: r1 });
    }
    if r2 > p2 {
        return Err(Error::InvalidOrder { p: p2, r: r2 });
    }
    let arg = rat_int((p1 + 1) as i64) + rho;
    let v = cardinal_eval(p1 + p2 + 1, r1 + r2, &arg)?;
    Ok(if r1 % 2 == 1 { -v } else { v })
}

/// The coefficient vector `(α_0, …, α_p)` of a symmetric banded Toeplitz
/// generator `α_0 + 2 Σ α_k cos(kθ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolCoeffs {
    #[serde(serialize_with = "ser_rationals")]
    coeffs: Vec<Rational>,
    /// Derivative order when the coefficients come from [`alpha_coeffs`].
    order: Option<usize>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

impl SymbolCoeffs {
    /// Arbitrary coefficients; needs at least `α_0, α_1`.
    pub fn from_alpha(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidDegree(coeffs.len().saturating_sub(1)));
        }
        Ok(Self { coeffs, order: None })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.coeffs.get(k)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }

    /// `α_0 + 2 Σ_{k≥1} α_k`, the generator at `θ = 0`, computed exactly.
    pub fn value_at_zero(&self) -> Rational {
        let tail: Rational = self.coeffs[1..].iter().fold(Rational::zero(), |a, c| a + c);
        self.coeffs[0].clone() + tail * rat_int(2)
    }
}

/// `α_k = (-1)^r N_{2p+1}^{(2r)}(p + 1 - k)` for `k = 0..=p`.
pub fn alpha_coeffs(p: usize, r: usize) -> Result<SymbolCoeffs> {
    if p == 0 {
        return Err(Error::InvalidDegree(p));
    }
    if r > p {
        return Err(Error::InvalidOrder { p, r });
    }
    let coeffs = (0..=p)
        .map(|k| {
            let v = cardinal_eval(2 * p + 1, 2 * r, &rat_int((p + 1 - k) as i64))?;
            Ok(if r % 2 == 1 { -v } else { v })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolCoeffs { coeffs, order: Some(r) })
}

pub(crate) fn rational_pow(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        Rational::one() / num_traits::pow(base.clone(), (-exp) as usize)
    }
}
