//! Closed-form spectra of `L = M⁻¹K` in one dimension and on boxes, and the
//! comparison with the continuous Laplace spectrum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{assemble_quadrature, closed_form_scale, BoundaryKind, SpaceSpec};
use crate::error::{Error, Result};
use crate::exact::to_f64;
use crate::symbols::{error_bound_rhs, RatioSymbol, SymbolFn};
use crate::tau::{tau_transform_column, TauAlgebra};

/// Absolute tolerance on the Neumann zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-12;
/// Slack on both sides of the relative-error envelope.
pub const BOUND_SLACK: f64 = 1e-12;
/// Largest tensor eigenvector materialized densely.
pub const TENSOR_CAP: usize = 1_000_000;

fn kind_scale(spec: &SpaceSpec) -> f64 {
    to_f64(&spec.shift_scale().scale)
}

/// Eigenvalues of the 1D discrete Laplacian with eigenvectors from the
/// kind's transform.
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceEigs {
    spec: SpaceSpec,
    scale: f64,
    theta: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl LaplaceEigs {
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn algebra(&self) -> TauAlgebra {
        self.spec.kind.algebra()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Ordered by `j`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        self.check(j)?;
        Ok(self.eigenvalues[j - 1])
    }

    pub fn eigenvector(&self, j: usize) -> Result<Vec<f64>> {
        tau_transform_column(self.algebra(), self.spec.n, j)
    }

    fn check(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.spec.n {
            return Err(Error::IndexOutOfRange { index: j, len: self.spec.n });
        }
        Ok(())
    }
}

pub fn laplace_eigs_1d(spec: &SpaceSpec) -> Result<LaplaceEigs> {
    spec.check_threshold()?;
    let e = RatioSymbol::new(spec.p)?;
    let scale = kind_scale(spec);
    let algebra = spec.kind.algebra();
    let theta: Vec<f64> = (1..=spec.n).map(|j| algebra.theta(spec.n, j)).collect();
    let eigenvalues = theta.iter().map(|&t| e.eval(t.min(PI)).map(|v| scale * scale * v)).collect::<Result<_>>()?;
    Ok(LaplaceEigs { spec: *spec, scale, theta, eigenvalues })
}

/// First `count` eigenvalues of `−u'' = λu` on `(0, 1)` with the kind's
/// boundary conditions; the reduced space uses the Dirichlet family.
pub fn exact_continuous_eigs(kind: BoundaryKind, count: usize) -> Vec<f64> {
    (1..=count).map(|k| exact_eig(kind, k)).collect()
}

fn exact_eig(kind: BoundaryKind, k: usize) -> f64 {
    let k = k as f64;
    let w = match kind {
        BoundaryKind::Dirichlet | BoundaryKind::ReducedDirichlet => k * PI,
        BoundaryKind::Neumann => (k - 1.0) * PI,
        BoundaryKind::Mixed => (2.0 * k - 1.0) * PI / 2.0,
    };
    w * w
}

#[derive(Debug, Clone, Serialize)]
pub struct OutlierRow {
    pub j: usize,
    pub theta: f64,
    pub lambda_discrete: f64,
    pub lambda_exact: f64,
    /// `None` for the zero mode.
    pub rel_error: Option<f64>,
    pub bound_rhs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutlierReport {
    pub spec: SpaceSpec,
    pub rows: Vec<OutlierRow>,
    pub max_rel_error: f64,
    pub all_ok: bool,
}

impl OutlierReport {
    /// Rows ordered by discrete eigenvalue.
    pub fn sorted_rows(&self) -> Vec<OutlierRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.lambda_discrete.total_cmp(&b.lambda_discrete).then(a.j.cmp(&b.j)));
        rows
    }
}

pub fn outlier_report(spec: &SpaceSpec) -> Result<OutlierReport> {
    let eigs = laplace_eigs_1d(spec)?;
    let rows: Vec<OutlierRow> = (1..=spec.n)
        .into_par_iter()
        .map(|j| {
            let theta = eigs.theta[j - 1];
            let lambda_discrete = eigs.eigenvalues[j - 1];
            let lambda_exact = exact_eig(spec.kind, j);
            let bound_rhs = error_bound_rhs(spec.p, theta.min(PI))?;
            let (rel_error, ok) = if lambda_exact == 0.0 {
                (None, lambda_discrete.abs() <= ZERO_MODE_TOL)
            } else {
                let rel = (lambda_discrete - lambda_exact) / lambda_exact;
                (Some(rel), rel >= -BOUND_SLACK && rel <= bound_rhs + BOUND_SLACK)
            };
            Ok(OutlierRow { j, theta, lambda_discrete, lambda_exact, rel_error, bound_rhs, ok })
        })
        .collect::<Result<_>>()?;
    let max_rel_error = rows.iter().filter_map(|r| r.rel_error).fold(0.0f64, f64::max);
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(OutlierReport { spec: *spec, rows, max_rel_error, all_ok })
}

/// `max_j ‖K u_j − λ_j M u_j‖₂ / ‖K‖_F` with `K`, `M` from quadrature.
pub fn generalized_residual_1d(spec: &SpaceSpec) -> Result<f64> {
    let eigs = laplace_eigs_1d(spec)?;
    let k = assemble_quadrature(spec, 1)?;
    let m = assemble_quadrature(spec, 0)?;
    let knorm = k.norm();
    let mut worst = 0.0f64;
    for j in 1..=spec.n {
        let u = DVector::from_vec(eigs.eigenvector(j)?);
        let res = (&k * &u - (&m * &u) * eigs.eigenvalues[j - 1]).norm();
        worst = worst.max(res / knorm);
    }
    Ok(worst)
}

/// Dirichlet tensor-product space on `[0, 1]^d`.
#[derive(Debug, Clone, Serialize)]
pub struct TensorSpec {
    dims: Vec<SpaceSpec>,
}

impl TensorSpec {
    pub fn new(p: &[usize], n: &[usize]) -> Result<Self> {
        if p.len() != n.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: n.len() });
        }
        if p.is_empty() {
            return Err(Error::Domain("tensor space needs d >= 1".into()));
        }
        let dims = p
            .iter()
            .zip(n)
            .enumerate()
            .map(|(d, (&p, &n))| {
                SpaceSpec::new(p, n, BoundaryKind::Dirichlet)
                    .map_err(|e| Error::InDimension { dim: d + 1, source: Box::new(e) })
            })
            .collect::<Result<_>>()?;
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[SpaceSpec] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn total_size(&self) -> usize {
        self.dims.iter().map(|s| s.n).product()
    }
}

struct Factor {
    n: usize,
    algebra: TauAlgebra,
    mass: Vec<f64>,
    laplace: Vec<f64>,
}

/// Tensor-product eigenpairs indexed by multi-index `𝐣` (1-based).
pub struct TensorEigs {
    factors: Vec<Factor>,
}

impl TensorEigs {
    pub fn d(&self) -> usize {
        self.factors.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.n).collect()
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: idx.len() });
        }
        for (f, &j) in self.factors.iter().zip(idx) {
            if j == 0 || j > f.n {
                return Err(Error::IndexOutOfRange { index: j, len: f.n });
            }
        }
        Ok(())
    }

    /// `λ_𝐣(L) = Σ_r λ_{j_r}(L_r)`.
    pub fn laplace(&self, idx: &[usize]) -> Result<f64> {
        self.check(idx)?;
        Ok(self.factors.iter().zip(idx).map(|(f, &j)| f.laplace[j - 1]).sum())
    }

    /// `λ_𝐣(M) = Π_r λ_{j_r}(M_r)`.
    pub fn mass(&self, idx: &[usize]) -> Result<f64> {
        self.check(idx)?;
        Ok(self.factors.iter().zip(idx).map(|(f, &j)| f.mass[j - 1]).product())
    }

    /// `λ_𝐣(K) = λ_𝐣(M) λ_𝐣(L)`.
    pub fn stiffness(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.mass(idx)? * self.laplace(idx)?)
    }

    /// The eigenvector as its list of 1D factors.
    pub fn eigenvector_factors(&self, idx: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.check(idx)?;
        self.factors.iter().zip(idx).map(|(f, &j)| tau_transform_column(f.algebra, f.n, j)).collect()
    }

    /// Dense Kronecker product of the factors, first index slowest.
    pub fn eigenvector(&self, idx: &[usize]) -> Result<Vec<f64>> {
        let total: usize = self.sizes().iter().product();
        if total > TENSOR_CAP {
            return Err(Error::TooLarge(format!("eigenvector of length {total} exceeds {TENSOR_CAP}")));
        }
        let mut out = vec![1.0];
        for f in self.eigenvector_factors(idx)? {
            out = out.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        Ok(out)
    }

    /// All multi-indices in lexicographic order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let sizes = self.sizes();
        let total: usize = sizes.iter().product();
        (0..total).map(move |mut flat| {
            let mut idx = vec![0; sizes.len()];
            for (slot, &n) in idx.iter_mut().zip(&sizes).rev() {
                *slot = flat % n + 1;
                flat /= n;
            }
            idx
        })
    }
}

pub fn tensor_eigs(tspec: &TensorSpec) -> Result<TensorEigs> {
    let factors = tspec
        .dims
        .iter()
        .enumerate()
        .map(|(d, spec)| {
            let wrap = |e| Error::InDimension { dim: d + 1, source: Box::new(e) };
            let l = laplace_eigs_1d(spec).map_err(wrap)?;
            let g0 = SymbolFn::spline(spec.p, 0)?;
            let mscale = to_f64(&closed_form_scale(spec, 0));
            let mass = l.theta.iter().map(|&t| mscale * g0.eval_unchecked(t)).collect();
            Ok(Factor { n: spec.n, algebra: l.algebra(), mass, laplace: l.eigenvalues })
        })
        .collect::<Result<_>>()?;
    Ok(TensorEigs { factors })
}

/// Dense `M = ⊗ M_r` and `K = Σ_r M_1 ⊗ … ⊗ K_r ⊗ … ⊗ M_d` from 1D
/// quadrature matrices.
pub fn tensor_dense(tspec: &TensorSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let total = tspec.total_size();
    if total * total > TENSOR_CAP * 16 {
        return Err(Error::TooLarge(format!("dense tensor matrices of size {total}")));
    }
    let ms: Vec<DMatrix<f64>> = tspec.dims.iter().map(|s| assemble_quadrature(s, 0)).collect::<Result<_>>()?;
    let ks: Vec<DMatrix<f64>> = tspec.dims.iter().map(|s| assemble_quadrature(s, 1)).collect::<Result<_>>()?;
    let kron_all = |pick: &dyn Fn(usize) -> bool| {
        let f = |r: usize| if pick(r) { &ks[r] } else { &ms[r] };
        (1..ms.len()).fold(f(0).clone(), |acc, r| acc.kronecker(f(r)))
    };
    let m = kron_all(&|_| false);
    let mut k = DMatrix::zeros(total, total);
    for s in 0..ms.len() {
        k += kron_all(&|r| r == s);
    }
    Ok((m, k))
}

/// `max ‖K u − λ M u‖₂ / ‖K‖_F` over the given multi-indices.
pub fn tensor_residual_check(tspec: &TensorSpec, sample_indices: &[Vec<usize>]) -> Result<f64> {
    let eigs = tensor_eigs(tspec)?;
    let (m, k) = tensor_dense(tspec)?;
    let knorm = k.norm();
    let mut worst = 0.0f64;
    for idx in sample_indices {
        let u = DVector::from_vec(eigs.eigenvector(idx)?);
        let lambda = eigs.laplace(idx)?;
        worst = worst.max((&k * &u - (&m * &u) * lambda).norm() / knorm);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: usize, n: usize, kind: BoundaryKind) -> SpaceSpec {
        SpaceSpec::new(p, n, kind).unwrap()
    }

    #[test]
    fn classical_linear_spectrum() {
        let l = laplace_eigs_1d(&spec(1, 3, BoundaryKind::Dirichlet)).unwrap();
        for j in 1..=3 {
            let t = j as f64 * PI / 4.0;
            let hand = 6.0 * 16.0 * (1.0 - t.cos()) / (2.0 + t.cos());
            assert!((l.eigenvalue(j).unwrap() - hand).abs() <= 1e-12 * hand);
        }
    }

    #[test]
    fn neumann_zero_mode() {
        for p in 1..=6 {
            let s = spec(p, s_threshold(p, BoundaryKind::Neumann), BoundaryKind::Neumann);
            assert_eq!(laplace_eigs_1d(&s).unwrap().eigenvalue(1).unwrap(), 0.0);
        }
    }

    fn s_threshold(p: usize, kind: BoundaryKind) -> usize {
        spec(p, 100, kind).threshold()
    }

    #[test]
    fn exact_families() {
        assert!((exact_continuous_eigs(BoundaryKind::Dirichlet, 1)[0] - PI * PI).abs() < 1e-15);
        assert_eq!(exact_continuous_eigs(BoundaryKind::Neumann, 1)[0], 0.0);
        assert!((exact_continuous_eigs(BoundaryKind::Mixed, 1)[0] - PI * PI / 4.0).abs() < 1e-15);
        assert_eq!(
            exact_continuous_eigs(BoundaryKind::ReducedDirichlet, 3),
            exact_continuous_eigs(BoundaryKind::Dirichlet, 3)
        );
    }

    #[test]
    fn threshold_is_enforced() {
        let err = laplace_eigs_1d(&spec(2, 2, BoundaryKind::ReducedDirichlet)).unwrap_err();
        assert!(matches!(err, Error::BelowThreshold { min: 3, .. }));
    }

    #[test]
    fn reports_are_outlier_free() {
        for kind in BoundaryKind::ALL {
            for p in 1..=6 {
                if kind == BoundaryKind::ReducedDirichlet && p % 2 == 1 {
                    continue;
                }
                let r = outlier_report(&spec(p, 100, kind)).unwrap();
                assert!(r.all_ok, "{kind} p={p}");
                assert_eq!(r.rows.len(), 100);
                // the envelope peaks inside (0, π), not at π
                let sup = (0..=2000).map(|i| error_bound_rhs(p, PI * i as f64 / 2000.0).unwrap()).fold(0.0, f64::max);
                assert!(r.max_rel_error <= sup);
            }
        }
        let m1 = outlier_report(&spec(1, 100, BoundaryKind::Dirichlet)).unwrap().max_rel_error;
        let m3 = outlier_report(&spec(3, 100, BoundaryKind::Dirichlet)).unwrap().max_rel_error;
        assert!(m3 < m1);
        let neu = outlier_report(&spec(2, 10, BoundaryKind::Neumann)).unwrap();
        assert!(neu.rows[0].rel_error.is_none() && neu.rows[0].ok);
    }

    #[test]
    fn generalized_residuals() {
        for kind in BoundaryKind::ALL {
            for p in 1..=6 {
                if kind == BoundaryKind::ReducedDirichlet && p % 2 == 1 {
                    continue;
                }
                for n in [s_threshold(p, kind), 50] {
                    let res = generalized_residual_1d(&spec(p, n, kind)).unwrap();
                    assert!(res <= 1e-10, "{kind} p={p} n={n} res={res}");
                }
            }
        }
    }

    #[test]
    fn tensor_basics() {
        let t = TensorSpec::new(&[1, 1], &[3, 3]).unwrap();
        let e = tensor_eigs(&t).unwrap();
        let one = laplace_eigs_1d(&spec(1, 3, BoundaryKind::Dirichlet)).unwrap().eigenvalue(1).unwrap();
        assert!((e.laplace(&[1, 1]).unwrap() - 2.0 * one).abs() < 1e-12);
        assert_eq!(e.indices().count(), 9);
        assert_eq!(e.indices().nth(1).unwrap(), vec![1, 2]);
        assert!(tensor_residual_check(&t, &e.indices().collect::<Vec<_>>()).unwrap() < 1e-12);

        let bad = TensorSpec::new(&[3, 3], &[9, 2]).unwrap();
        let err = tensor_eigs(&bad).err().unwrap();
        assert!(matches!(err, Error::InDimension { dim: 2, .. }));
        assert!(TensorSpec::new(&[1], &[3, 3]).is_err());
    }

    #[test]
    fn tensor_stiffness_identity() {
        let t = TensorSpec::new(&[2, 3, 1], &[5, 6, 4]).unwrap();
        let e = tensor_eigs(&t).unwrap();
        let (m, k) = tensor_dense(&t).unwrap();
        for idx in [vec![1, 1, 1], vec![5, 2, 3], vec![3, 6, 4]] {
            let u = DVector::from_vec(e.eigenvector(&idx).unwrap());
            let lm = e.mass(&idx).unwrap();
            let lk = e.stiffness(&idx).unwrap();
            assert!((&m * &u - &u * lm).norm() <= 1e-13);
            assert!((&k * &u - &u * lk).norm() <= 1e-10 * k.norm());
        }
    }
}
