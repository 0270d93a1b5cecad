//! Quadrature rules on `[0, 1]`.

use num_traits::{One, Zero};

use crate::exact::{rat_int, Rational};

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
///
/// Nodes are roots of `P_m`, found by Newton iteration from the usual
/// Chebyshev-like initial guesses.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "need at least one point");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for k in 0..half {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x > 0 here; mirror into [-1, 1] slots, then map to [0, 1]
        nodes[k] = 0.5 * (1.0 - x);
        nodes[m - 1 - k] = 0.5 * (1.0 + x);
        weights[k] = 0.5 * w;
        weights[m - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Interior equispaced rule with `m` nodes `(k + 1/2)/m`, exact for
/// polynomials of degree `< m`, with rational weights.
///
/// Nodes avoid the interval ends so piecewise-constant integrands with jumps
/// at the ends are sampled from the inside.
pub fn interior_newton_cotes(m: usize) -> (Vec<Rational>, Vec<Rational>) {
    assert!(m >= 1, "need at least one point");
    let nodes: Vec<Rational> =
        (0..m).map(|k| Rational::new((2 * k as i64 + 1).into(), (2 * m as i64).into())).collect();
    // Vandermonde system sum_k w_k u_k^d = 1/(d+1), d = 0..m-1
    let mut a: Vec<Vec<Rational>> = (0..m)
        .map(|d| {
            let mut row: Vec<Rational> = nodes.iter().map(|u| num_traits::pow(u.clone(), d)).collect();
            row.push(Rational::one() / rat_int(d as i64 + 1));
            row
        })
        .collect();
    solve_in_place(&mut a);
    let weights = a.into_iter().map(|row| row[m].clone()).collect();
    (nodes, weights)
}

/// Gauss–Jordan elimination on an augmented `m × (m+1)` system.
fn solve_in_place(a: &mut [Vec<Rational>]) {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero()).expect("nonsingular Vandermonde");
        a.swap(col, piv);
        let inv = Rational::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
    }
}
