//! Boundary-adapted spline bases on `[0, 1]` and the Galerkin matrices
//! `X^{p,r,b}_{ij} = ∫₀¹ N_i^{(r)} N_j^{(r)}`.
//!
//! Each basis function is a signed sum of at most two shifted, dilated
//! cardinal B-splines `N_l(x) = 𝒩_p(s·x − l − δ)`: the function itself plus
//! its mirror image across the nearest boundary (negated where the boundary
//! condition is odd, kept where it is even). The mirror is only needed near
//! the ends, and with `n >= p + 1` a single reflection per end suffices.
//!
//! Three assembly paths share that description:
//! - [`assemble_quadrature`]: Gauss–Legendre, `p + 1` points per knot span;
//! - [`assemble_exact`]: the same integrals in exact rational arithmetic;
//! - [`assemble_closed_form`]: `s^{2r−1} (T ± H)` from the cardinal α vector.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{alpha_coeffs, cardinal_eval, cardinal_eval_f64, rat, rat_int, rational_pow, to_f64, Rational};
use crate::quadrature::{gauss_legendre, interior_newton_cotes};
use crate::tau::{StructuredMatrix, TauAlgebra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// `u(0) = u(1) = 0`
    Dirichlet,
    /// `u'(0) = u'(1) = 0`
    Neumann,
    /// `u(0) = 0`, `u'(1) = 0`
    Mixed,
    /// Dirichlet on the plain uniform grid with one fewer boundary condition.
    #[serde(rename = "reduced")]
    ReducedDirichlet,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 4] =
        [BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Mixed, BoundaryKind::ReducedDirichlet];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Neumann => "neumann",
            BoundaryKind::Mixed => "mixed",
            BoundaryKind::ReducedDirichlet => "reduced",
        }
    }

    pub fn algebra(self) -> TauAlgebra {
        match self {
            BoundaryKind::Dirichlet => TauAlgebra::ZeroZero,
            BoundaryKind::Neumann => TauAlgebra::OneOne,
            BoundaryKind::Mixed => TauAlgebra::ZeroOne,
            BoundaryKind::ReducedDirichlet => TauAlgebra::MinusMinus,
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "0" => Ok(BoundaryKind::Dirichlet),
            "neumann" | "1" => Ok(BoundaryKind::Neumann),
            "mixed" | "2" => Ok(BoundaryKind::Mixed),
            "reduced" => Ok(BoundaryKind::ReducedDirichlet),
            other => Err(Error::Parse(format!("unknown boundary kind '{other}'"))),
        }
    }
}

/// Degree, dimension and boundary kind of a spline space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub p: usize,
    pub n: usize,
    pub kind: BoundaryKind,
}

impl SpaceSpec {
    pub fn new(p: usize, n: usize, kind: BoundaryKind) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDegree(p));
        }
        if n == 0 {
            return Err(Error::SizeTooSmall { n, min: 1, reason: "empty space" });
        }
        if kind == BoundaryKind::ReducedDirichlet && p % 2 == 1 {
            return Err(Error::ReducedOddDegree(p));
        }
        Ok(Self { p, n, kind })
    }

    fn half(&self) -> usize {
        self.p / 2
    }

    /// Smallest `n` for which the Toeplitz±Hankel identity is guaranteed.
    pub fn threshold(&self) -> usize {
        let (p, m) = (self.p, self.half());
        match self.kind {
            BoundaryKind::Dirichlet => (p + 1).max((p + m).saturating_sub(1)),
            BoundaryKind::Neumann => (2 * p - m).max(2 * p - 2 * m + 1),
            BoundaryKind::Mixed => (p + 1).max(p + m),
            BoundaryKind::ReducedDirichlet => p + p / 2,
        }
    }

    pub fn threshold_formula(&self) -> &'static str {
        match self.kind {
            BoundaryKind::Dirichlet => "max{p+1, p+floor(p/2)-1}",
            BoundaryKind::Neumann => "max{2p-floor(p/2), 2p-2*floor(p/2)+1}",
            BoundaryKind::Mixed => "max{p+1, p+floor(p/2)}",
            BoundaryKind::ReducedDirichlet => "p+p/2",
        }
    }

    pub fn check_threshold(&self) -> Result<()> {
        let min = self.threshold();
        if self.n < min {
            return Err(Error::BelowThreshold {
                kind: self.kind.name(),
                p: self.p,
                n: self.n,
                min,
                formula: self.threshold_formula(),
            });
        }
        Ok(())
    }

    fn check_extraction_size(&self) -> Result<()> {
        if self.n < self.p + 1 {
            return Err(Error::SizeTooSmall {
                n: self.n,
                min: self.p + 1,
                reason: "boundary extraction is implemented for n >= p+1",
            });
        }
        Ok(())
    }

    pub fn shift_scale(&self) -> ShiftScale {
        let (n, odd) = (self.n as i64, self.p % 2 == 1);
        let (scale, delta) = match self.kind {
            BoundaryKind::Dirichlet => (rat_int(n + 1), if odd { rat(0, 1) } else { rat(-1, 2) }),
            BoundaryKind::Neumann => (rat_int(n), if odd { rat(-1, 2) } else { rat(0, 1) }),
            BoundaryKind::Mixed => (rat(2 * n + 1, 2), if odd { rat(0, 1) } else { rat(-1, 2) }),
            BoundaryKind::ReducedDirichlet => (rat_int(n), rat(0, 1)),
        };
        ShiftScale { scale, delta }
    }

    /// Breakpoints of the space, endpoints included.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let n = self.n as i64;
        let odd = self.p % 2 == 1;
        let inner: Vec<Rational> = match (self.kind, odd) {
            (BoundaryKind::Dirichlet, true) => (1..=n).map(|k| rat(k, n + 1)).collect(),
            (BoundaryKind::Dirichlet, false) => (0..=n).map(|k| rat(2 * k + 1, 2 * (n + 1))).collect(),
            (BoundaryKind::Neumann, true) => (0..n).map(|k| rat(2 * k + 1, 2 * n)).collect(),
            (BoundaryKind::Neumann, false) | (BoundaryKind::ReducedDirichlet, _) => (1..n).map(|k| rat(k, n)).collect(),
            (BoundaryKind::Mixed, true) => (1..=n).map(|k| rat(2 * k, 2 * n + 1)).collect(),
            (BoundaryKind::Mixed, false) => (1..=n).map(|k| rat(2 * k - 1, 2 * n + 1)).collect(),
        };
        std::iter::once(Rational::zero()).chain(inner).chain(std::iter::once(Rational::one())).collect()
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} n={} kind={}", self.p, self.n, self.kind)
    }
}

pub fn opt_breakpoints(spec: &SpaceSpec) -> Vec<Rational> {
    spec.breakpoints()
}

/// Dilation and offset: `N_l(x) = 𝒩_p(scale·x − l − delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScale {
    pub scale: Rational,
    pub delta: Rational,
}

/// Sparse `{−1, 0, +1}` map from shifted cardinal B-splines to the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionMatrix {
    first_shift: i64,
    last_shift: i64,
    rows: Vec<Vec<(i64, i8)>>,
}

impl ExtractionMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Number of cardinal shifts the construction draws on.
    pub fn ncols(&self) -> usize {
        (self.last_shift - self.first_shift + 1) as usize
    }

    pub fn first_shift(&self) -> i64 {
        self.first_shift
    }

    pub fn last_shift(&self) -> i64 {
        self.last_shift
    }

    /// Nonzero `(shift, sign)` terms of basis function `i` (1-based).
    pub fn row(&self, i: usize) -> &[(i64, i8)] {
        &self.rows[i - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(i64, i8)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Dense form; column `c` is shift `first_shift + c`.
    pub fn dense(&self) -> DMatrix<i8> {
        let mut d = DMatrix::zeros(self.nrows(), self.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(l, s) in row {
                d[(i, (l - self.first_shift) as usize)] += s;
            }
        }
        d
    }

    /// For every shift, the basis rows (0-based) it contributes to.
    fn shift_to_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut map = vec![Vec::new(); self.ncols()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(l, s) in row {
                map[(l - self.first_shift) as usize].push((i, s as f64));
            }
        }
        map
    }
}

/// Extraction of the boundary-adapted basis for `n >= p + 1`.
pub fn extraction_matrix(spec: &SpaceSpec) -> Result<(ExtractionMatrix, ShiftScale)> {
    spec.check_extraction_size()?;
    let (p, n) = (spec.p as i64, spec.n as i64);
    let m = p / 2;
    let q = m - p;
    let odd = p % 2 == 1;
    let last_shift = match spec.kind {
        BoundaryKind::Dirichlet => {
            if odd {
                n
            } else {
                n + 1
            }
        }
        BoundaryKind::Neumann => {
            if odd {
                n
            } else {
                n - 1
            }
        }
        BoundaryKind::Mixed => n,
        BoundaryKind::ReducedDirichlet => n - 1,
    };
    let rows = (1..=n)
        .map(|i| match spec.kind {
            BoundaryKind::Dirichlet => {
                let mut row = vec![(q + i, 1)];
                if i <= m {
                    row.push((q - i, -1));
                } else if i >= n + 1 - m {
                    row.push((q + 2 * (n + 1) - i, -1));
                }
                row
            }
            BoundaryKind::Neumann => {
                let mut row = vec![(-m + i - 1, 1)];
                if i <= -q {
                    row.push((-m - i, 1));
                } else if i > n + q {
                    row.push((-m + 2 * n - i, 1));
                }
                row
            }
            BoundaryKind::Mixed => {
                let mut row = vec![(q + i, 1)];
                if i <= m {
                    row.push((q - i, -1));
                } else if i > n + q {
                    row.push((q - i + 2 * n + 1, 1));
                }
                row
            }
            BoundaryKind::ReducedDirichlet => {
                let mut row = vec![(q + i - 1, 1)];
                if i <= -q {
                    row.push((q - i, -1));
                } else if i > n + q {
                    row.push((q + 2 * n - i, -1));
                }
                row
            }
        })
        .collect();
    Ok((ExtractionMatrix { first_shift: -p, last_shift, rows }, spec.shift_scale()))
}

/// Precomputed description of a basis, shared by evaluation and assembly.
#[derive(Debug, Clone)]
pub struct Basis {
    spec: SpaceSpec,
    extraction: ExtractionMatrix,
    shift: ShiftScale,
    scale: f64,
    delta: f64,
}

impl Basis {
    pub fn new(spec: SpaceSpec) -> Result<Self> {
        let (extraction, shift) = extraction_matrix(&spec)?;
        let scale = to_f64(&shift.scale);
        let delta = to_f64(&shift.delta);
        Ok(Self { spec, extraction, shift, scale, delta })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn extraction(&self) -> &ExtractionMatrix {
        &self.extraction
    }

    pub fn shift_scale(&self) -> &ShiftScale {
        &self.shift
    }

    fn check(&self, i: usize, r: usize) -> Result<()> {
        if i == 0 || i > self.spec.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.spec.n });
        }
        if r > self.spec.p {
            return Err(Error::InvalidOrder { p: self.spec.p, r });
        }
        Ok(())
    }

    /// `(N_i)^{(r)}(x)`. At `x = 1` the limit from inside `[0, 1]` is taken.
    pub fn eval(&self, i: usize, r: usize, x: f64) -> Result<f64> {
        self.check(i, r)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let p = self.spec.p;
        let mut acc = 0.0;
        for &(l, s) in self.extraction.row(i) {
            let t = self.scale * x - l as f64 - self.delta;
            let v = if x == 1.0 {
                let v = cardinal_eval_f64(p, r, (p + 1) as f64 - t)?;
                if r % 2 == 1 {
                    -v
                } else {
                    v
                }
            } else {
                cardinal_eval_f64(p, r, t)?
            };
            acc += s as f64 * v;
        }
        Ok(acc * self.scale.powi(r as i32))
    }

    /// Exact `(N_i)^{(r)}(x)` for rational `x`, same end convention.
    pub fn eval_exact(&self, i: usize, r: usize, x: &Rational) -> Result<Rational> {
        self.check(i, r)?;
        if *x < Rational::zero() || *x > Rational::one() {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let p = self.spec.p;
        let at_end = x.is_one();
        let mut acc = Rational::zero();
        for &(l, s) in self.extraction.row(i) {
            let t = &self.shift.scale * x - rat_int(l) - &self.shift.delta;
            let v = if at_end {
                let v = cardinal_eval(p, r, &(rat_int(p as i64 + 1) - t))?;
                if r % 2 == 1 {
                    -v
                } else {
                    v
                }
            } else {
                cardinal_eval(p, r, &t)?
            };
            if s > 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        Ok(acc * num_traits::pow(self.shift.scale.clone(), r))
    }

    /// Shifts whose support meets the point `x` (floating point).
    fn active_shifts(&self, x: f64) -> std::ops::RangeInclusive<i64> {
        let t0 = (self.scale * x - self.delta).floor() as i64;
        let lo = (t0 - self.spec.p as i64).max(self.extraction.first_shift);
        let hi = t0.min(self.extraction.last_shift);
        lo..=hi
    }

    /// Rows of `B[i][k] = N_i^{(r)}(x_k)` for the given points.
    fn value_table(&self, r: usize, points: &[f64]) -> Result<Vec<Vec<f64>>> {
        let p = self.spec.p;
        let map = self.extraction.shift_to_rows();
        let factor = self.scale.powi(r as i32);
        let mut table = vec![vec![0.0; points.len()]; self.spec.n];
        for (k, &x) in points.iter().enumerate() {
            for l in self.active_shifts(x) {
                let v = factor * cardinal_eval_f64(p, r, self.scale * x - l as f64 - self.delta)?;
                if v == 0.0 {
                    continue;
                }
                for &(row, s) in &map[(l - self.extraction.first_shift) as usize] {
                    table[row][k] += s * v;
                }
            }
        }
        Ok(table)
    }
}

pub fn basis_eval(spec: &SpaceSpec, i: usize, r: usize, x: f64) -> Result<f64> {
    Basis::new(*spec)?.eval(i, r, x)
}

fn check_order(spec: &SpaceSpec, r: usize) -> Result<()> {
    if r > spec.p {
        return Err(Error::InvalidOrder { p: spec.p, r });
    }
    Ok(())
}

/// `X^{p,r,b}` by Gauss–Legendre quadrature with `p + 1` nodes per span.
pub fn assemble_quadrature(spec: &SpaceSpec, r: usize) -> Result<DMatrix<f64>> {
    check_order(spec, r)?;
    let basis = Basis::new(*spec)?;
    let (gx, gw) = gauss_legendre(spec.p + 1);
    let bps: Vec<f64> = spec.breakpoints().iter().map(to_f64).collect();
    let mut points = Vec::with_capacity((bps.len() - 1) * gx.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for span in bps.windows(2) {
        let h = span[1] - span[0];
        for (x, w) in gx.iter().zip(&gw) {
            points.push(span[0] + h * x);
            weights.push(h * w);
        }
    }
    let table = basis.value_table(r, &points)?;
    let n = spec.n;
    let weighted: Vec<Vec<f64>> =
        table.iter().map(|row| row.iter().zip(&weights).map(|(v, w)| v * w).collect()).collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| weighted[i].iter().zip(&table[j]).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let mut x = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            x[(i, i + off)] = *v;
            x[(i + off, i)] = *v;
        }
    }
    Ok(x)
}

/// `X^{p,r,b}` in exact arithmetic: on every span the integrand is a
/// polynomial of degree `<= 2p`, integrated exactly by a `2p + 1` point
/// interior rule with rational weights.
pub fn assemble_exact(spec: &SpaceSpec, r: usize) -> Result<DMatrix<Rational>> {
    check_order(spec, r)?;
    let basis = Basis::new(*spec)?;
    let p = spec.p;
    let (ux, uw) = interior_newton_cotes(2 * p + 1);
    let bps = spec.breakpoints();
    let scale = basis.shift.scale.clone();
    let delta = basis.shift.delta.clone();
    let map = basis.extraction.shift_to_rows();
    let first = basis.extraction.first_shift;
    let last = basis.extraction.last_shift;
    let factor = num_traits::pow(scale.clone(), r);
    let n = spec.n;
    let mut x = vec![vec![Rational::zero(); n]; n];
    for span in bps.windows(2) {
        let h = &span[1] - &span[0];
        for (u, w) in ux.iter().zip(&uw) {
            let pt = &span[0] + &h * u;
            let t_base = &scale * &pt - &delta;
            let t0 = t_base.floor().to_integer().to_i64().expect("small shift");
            let mut vals: Vec<(usize, Rational)> = Vec::new();
            for l in (t0 - p as i64).max(first)..=t0.min(last) {
                let v = cardinal_eval(p, r, &(&t_base - rat_int(l)))? * &factor;
                if v.is_zero() {
                    continue;
                }
                for &(row, s) in &map[(l - first) as usize] {
                    let sv = if s > 0.0 { v.clone() } else { -v.clone() };
                    match vals.iter_mut().find(|(rw, _)| *rw == row) {
                        Some((_, acc)) => *acc += sv,
                        None => vals.push((row, sv)),
                    }
                }
            }
            let wh = w * &h;
            for (a, va) in &vals {
                let wa = va * &wh;
                for (b, vb) in &vals {
                    if b >= a {
                        x[*a][*b] += &wa * vb;
                    }
                }
            }
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if i <= j { x[i][j].clone() } else { x[j][i].clone() }))
}

/// The exact factor `s^{2r−1}` in front of `T ± H`.
pub fn closed_form_scale(spec: &SpaceSpec, r: usize) -> Rational {
    rational_pow(&spec.shift_scale().scale, 2 * r as i32 - 1)
}

/// `X^{p,r,b}` as `s^{2r−1} (T ± H)`; refuses `n` below the structure threshold.
pub fn assemble_closed_form(spec: &SpaceSpec, r: usize) -> Result<StructuredMatrix> {
    check_order(spec, r)?;
    spec.check_threshold()?;
    let coeffs = alpha_coeffs(spec.p, r)?;
    StructuredMatrix::new(coeffs, spec.n, spec.kind.algebra(), closed_form_scale(spec, r))
}

/// `true` iff `J A J = A` exactly.
pub fn is_centrosymmetric_exact(a: &DMatrix<Rational>) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| a[(i, j)] == a[(n - 1 - i, n - 1 - j)]))
}

/// `max |A − J A J|`.
pub fn centrosymmetry_defect(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(n - 1 - i, n - 1 - j)]).abs());
        }
    }
    worst
}

/// Breakpoints derived from where the dilated cardinal knots fall in `(0, 1)`.
#[doc(hidden)]
pub fn knot_positions(spec: &SpaceSpec) -> Vec<Rational> {
    let ss = spec.shift_scale();
    // x = (k + δ)/s for integer k, kept when strictly inside (0, 1)
    let kmax = (ss.scale.clone() - &ss.delta).ceil().to_integer().to_i64().unwrap_or(0) + 1;
    let mut out = vec![Rational::zero()];
    for k in 0..=kmax {
        let x = (rat_int(k) + &ss.delta) / &ss.scale;
        if x > Rational::zero() && x < Rational::one() {
            out.push(x);
        }
    }
    out.push(Rational::one());
    out.sort();
    out.dedup();
    out
}
