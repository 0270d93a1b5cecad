//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use ofi_core::assembly::{assemble_closed_form, assemble_exact, assemble_quadrature, is_centrosymmetric_exact};
use ofi_core::exact::{alpha_coeffs, rat, SymbolCoeffs};
use ofi_core::spectrum::{laplace_eigs_1d, outlier_report, tensor_eigs, tensor_residual_check, TensorSpec};
use ofi_core::symbols::{mass_symbol_lower_bound, SymbolFn};
use ofi_core::tau::{structured_matvec, structured_solve, StructuredMatrix, TauAlgebra};
use ofi_core::{BoundaryKind, Error, SpaceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kinds_for(p: usize) -> impl Iterator<Item = BoundaryKind> {
    BoundaryKind::ALL.into_iter().filter(move |k| *k != BoundaryKind::ReducedDirichlet || p.is_multiple_of(2))
}

fn spec(p: usize, n: usize, kind: BoundaryKind) -> SpaceSpec {
    SpaceSpec::new(p, n, kind).unwrap()
}

fn structure_identities() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for p in 1..=6 {
        for kind in kinds_for(p) {
            let min = spec(p, 100, kind).threshold();
            for n in [min, 25] {
                let s = spec(p, n, kind);
                for r in 0..=1 {
                    let quad = assemble_quadrature(&s, r).unwrap();
                    let closed = assemble_closed_form(&s, r).map_err(|e| e.to_string())?.dense();
                    let scale = quad.amax();
                    let rel = (closed - &quad).amax() / scale;
                    worst = worst.max(rel);
                    cases += 1;
                    ensure(rel <= 1e-12, || format!("{kind} p={p} n={n} r={r}: diff/scale = {rel:e}"))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{cases} cases, max diff/scale {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn random_alpha(rng: &mut ChaCha8Rng) -> SymbolCoeffs {
    let p = rng.gen_range(1..=6);
    let coeffs = (0..=p).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=9))).collect();
    SymbolCoeffs::from_alpha(coeffs).unwrap()
}

fn check_eigenpairs(coeffs: &SymbolCoeffs, n: usize, algebra: TauAlgebra) -> Result<f64, String> {
    let m = StructuredMatrix::new(coeffs.clone(), n, algebra, rat(1, 1)).map_err(|e| e.to_string())?;
    let a = m.dense();
    let es = m.eigensystem();
    let fro = a.norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for j in 1..=n {
        let u = DVector::from_vec(es.eigenvector(j).unwrap());
        let res = (&a * &u - &u * es.eigenvalues()[j - 1]).norm() / fro;
        worst = worst.max(res);
    }
    ensure(worst <= 1e-10, || format!("{algebra} p={} n={n}: residual/|A|_F = {worst:e}", coeffs.degree()))?;
    Ok(worst)
}

fn tau_eigenpairs() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (a, algebra) in TauAlgebra::ALL.into_iter().enumerate() {
        for p in 1..=6 {
            for r in 0..=1 {
                let c = alpha_coeffs(p, r).unwrap();
                for n in [p + 1, 16, 64] {
                    worst = worst.max(check_eigenpairs(&c, n, algebra)?);
                    cases += 1;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a11 + a as u64);
        for _ in 0..20 {
            let c = random_alpha(&mut rng);
            for n in [c.degree() + 1, 16, 64] {
                worst = worst.max(check_eigenpairs(&c, n, algebra)?);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} matrices (incl. 80 random alpha sets), max residual/|A|_F {worst:.1e}"))
}

fn transform_orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    for algebra in TauAlgebra::ALL {
        for n in [1, 2, 3, 4, 7, 16, 33, 64, 128, 255, 512] {
            let q = algebra.dense_q(n);
            let d = (q.transpose() * &q - DMatrix::identity(n, n)).amax();
            worst = worst.max(d);
            ensure(d <= 1e-12, || format!("{algebra} n={n}: |QtQ - I| = {d:e}"))?;
        }
    }
    Ok(format!("4 transforms, n <= 512, max |QtQ - I| {worst:.1e}"))
}

fn symbol_identities() -> Outcome {
    for p in 1..=10 {
        let g1 = alpha_coeffs(p, 1).unwrap().value_at_zero();
        let g0 = alpha_coeffs(p, 0).unwrap().value_at_zero();
        ensure(g1.is_zero(), || format!("p={p}: g1(0) = {g1}"))?;
        ensure(g0.is_one(), || format!("p={p}: g0(0) = {g0}"))?;
    }
    for p in 1..=8 {
        let g = SymbolFn::spline(p, 0).unwrap();
        let lo = mass_symbol_lower_bound(p);
        for i in 0..1000 {
            let th = PI * i as f64 / 999.0;
            let v = g.eval(th).unwrap();
            ensure(lo <= v && v <= 1.0, || format!("p={p} theta={th}: g0 = {v}, lower bound {lo}"))?;
        }
    }
    Ok("exact g1(0)=0, g0(0)=1 for p<=10; mass symbol bounds at 1000 samples, p<=8".into())
}

fn outlier_free_bound() -> Outcome {
    let mut worst = 0.0f64;
    for p in 1..=6 {
        for kind in kinds_for(p) {
            let r = outlier_report(&spec(p, 100, kind)).unwrap();
            for row in &r.rows {
                match row.rel_error {
                    Some(rel) => {
                        ensure(rel >= -1e-12 && rel <= row.bound_rhs + 1e-12, || {
                            format!("{kind} p={p} j={}: rel {rel:e} vs bound {:e}", row.j, row.bound_rhs)
                        })?;
                        worst = worst.max(rel);
                    }
                    None => ensure(row.lambda_discrete.abs() <= 1e-12, || {
                        format!("{kind} p={p}: zero mode {}", row.lambda_discrete)
                    })?,
                }
            }
            if kind == BoundaryKind::Neumann {
                ensure(r.rows[0].rel_error.is_none(), || "Neumann j=1 not a zero mode".into())?;
            }
        }
    }
    Ok(format!("n=100, all kinds, p<=6: 0 <= rel error <= bound, max rel error {worst:.3e}"))
}

fn classical_linear() -> Outcome {
    let mut worst = 0.0f64;
    for n in [3, 10, 57, 200] {
        let l = laplace_eigs_1d(&spec(1, n, BoundaryKind::Dirichlet)).unwrap();
        for j in 1..=n {
            let th = j as f64 * PI / (n + 1) as f64;
            let h = (n + 1) as f64;
            let hand = 6.0 * h * h * (1.0 - th.cos()) / (2.0 + th.cos());
            let rel = (l.eigenvalue(j).unwrap() - hand).abs() / hand;
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || format!("n={n} j={j}: rel {rel:e}"))?;
        }
    }
    Ok(format!("hand formula vs closed form, max rel diff {worst:.1e}"))
}

fn reduced_optimal() -> Outcome {
    let n = 20;
    let mut notes = Vec::new();
    for p in [2, 4] {
        let red = laplace_eigs_1d(&spec(p, n + 1, BoundaryKind::ReducedDirichlet)).unwrap();
        let opt = laplace_eigs_1d(&spec(p, n, BoundaryKind::Dirichlet)).unwrap();
        for j in 1..=n {
            let (a, b) = (red.eigenvalue(j).unwrap(), opt.eigenvalue(j).unwrap());
            ensure((a - b).abs() <= 1e-12 * b, || format!("p={p} j={j}: {a} vs {b}"))?;
        }
        let mut max_diff = 0.0f64;
        for j in 1..=n {
            let u = red.eigenvector(j).unwrap();
            let v = opt.eigenvector(j).unwrap();
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            let s = if dot < 0.0 { -1.0 } else { 1.0 };
            let d = u.iter().zip(&v).map(|(a, b)| (s * a - b).abs()).fold(0.0, f64::max);
            max_diff = max_diff.max(d);
        }
        ensure(max_diff > 0.01, || format!("p={p}: eigenvectors coincide (max diff {max_diff:e})"))?;
        notes.push(format!("p={p} eigvec diff {max_diff:.3}"));
    }
    Ok(format!("n=20 eigenvalues identical; {}", notes.join(", ")))
}

fn tensor_product() -> Outcome {
    let start = Instant::now();
    let mut out = Vec::new();
    for (p, n) in [(vec![2, 3], vec![12, 14]), (vec![1, 1, 1], vec![6, 6, 6])] {
        let t = TensorSpec::new(&p, &n).unwrap();
        let e = tensor_eigs(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let samples: Vec<Vec<usize>> = (0..5).map(|_| n.iter().map(|&m| rng.gen_range(1..=m)).collect()).collect();
        for idx in &samples {
            let (lm, ll, lk) = (e.mass(idx).unwrap(), e.laplace(idx).unwrap(), e.stiffness(idx).unwrap());
            ensure((lk - lm * ll).abs() <= 1e-14 * lk.abs(), || format!("{idx:?}: lambda(K) != lambda(M) lambda(L)"))?;
        }
        let res = tensor_residual_check(&t, &samples).unwrap();
        ensure(res <= 1e-9, || format!("p={p:?} n={n:?}: residual {res:e}"))?;
        out.push(format!("d={} residual {res:.1e}", p.len()));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{}, {:.2} s", out.join(", "), elapsed.as_secs_f64()))
}

fn structured_operators() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut mv, mut sv) = (0.0f64, 0.0f64);
    for p in 1..=6 {
        for kind in kinds_for(p) {
            for n in [spec(p, 100, kind).threshold(), 40] {
                let s = spec(p, n, kind);
                for r in 0..=1 {
                    let a = assemble_closed_form(&s, r).unwrap();
                    let dense = a.dense();
                    for _ in 0..3 {
                        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let fast = DVector::from_vec(structured_matvec(&a, &v).unwrap());
                        let slow = &dense * DVector::from_column_slice(&v);
                        let d = (&fast - &slow).amax() / slow.amax().max(1.0);
                        mv = mv.max(d);
                        ensure(d <= 1e-12, || format!("matvec {kind} p={p} n={n} r={r}: {d:e}"))?;
                    }
                    if kind == BoundaryKind::Neumann && r == 1 {
                        continue;
                    }
                    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let x = structured_solve(&a, &b).map_err(|e| e.to_string())?;
                    let bv = DVector::from_vec(b);
                    let rel = (&dense * DVector::from_vec(x) - &bv).norm() / bv.norm();
                    sv = sv.max(rel);
                    ensure(rel <= 1e-10, || format!("solve {kind} p={p} n={n} r={r}: {rel:e}"))?;
                }
            }
        }
    }
    let k = assemble_closed_form(&spec(3, 12, BoundaryKind::Neumann), 1).unwrap();
    match structured_solve(&k, &[1.0; 12]) {
        Err(Error::Singular { index: 1, .. }) => {}
        other => return Err(format!("Neumann stiffness solve: expected singular at index 1, got {other:?}")),
    }
    Ok(format!("matvec max diff {mv:.1e}, solve max residual {sv:.1e}, Neumann K singular at j=1"))
}

fn centrosymmetry() -> Outcome {
    let mut checked = 0;
    for p in 1..=6 {
        for kind in kinds_for(p) {
            let s = spec(p, p + 1, kind);
            for r in 0..=1 {
                let x = assemble_exact(&s, r).unwrap();
                if kind == BoundaryKind::Mixed {
                    if p >= 2 {
                        ensure(!is_centrosymmetric_exact(&x), || format!("mixed p={p} r={r} is centrosymmetric"))?;
                    }
                } else {
                    ensure(is_centrosymmetric_exact(&x), || format!("{kind} p={p} r={r} not centrosymmetric"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} exact matrices at n=p+1 centrosymmetric; mixed p>=2 not"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("structure identities", structure_identities),
        ("tau-algebra eigenpairs", tau_eigenpairs),
        ("transform orthogonality", transform_orthogonality),
        ("symbol identities", symbol_identities),
        ("outlier-free bound", outlier_free_bound),
        ("classical p=1 spectrum", classical_linear),
        ("reduced/optimal coincidence", reduced_optimal),
        ("tensor product", tensor_product),
        ("structured operators", structured_operators),
        ("centrosymmetry", centrosymmetry),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match res {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
