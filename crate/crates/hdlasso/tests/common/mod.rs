//! Shared helpers for integration tests: independent oracles and small
//! assertion utilities. Nothing here calls back into the solvers under
//! test; linear systems are solved by a local Gaussian elimination.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;

use hdlasso::RegressionProblem;

pub fn assert_close(got: f64, want: f64, tol: f64, ctx: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{ctx}: got {got}, want {want} (|diff| = {} > {tol})",
        (got - want).abs()
    );
}

pub fn assert_rel_close(got: f64, want: f64, rel: f64, ctx: &str) {
    let denom = want.abs().max(1e-300);
    assert!(
        ((got - want) / denom).abs() <= rel,
        "{ctx}: got {got}, want {want} (rel diff {} > {rel})",
        ((got - want) / denom).abs()
    );
}

/// Gaussian elimination with partial pivoting; `None` when the pivot
/// collapses. Kept local so oracle solutions do not share code with the
/// library's linear algebra.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pmax < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in (r + 1)..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

/// The l1-penalized objective evaluated directly.
pub fn lasso_objective(problem: &RegressionProblem, beta: &[f64], lambda: f64) -> f64 {
    let x = problem.x();
    let y = problem.y();
    let mut rss = 0.0;
    for i in 0..problem.n() {
        let mut fit = 0.0;
        for j in 0..problem.p() {
            fit += x[[i, j]] * beta[j];
        }
        rss += (y[i] - fit) * (y[i] - fit);
    }
    0.5 * rss + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
}

/// Global minimum of the penalized objective by enumerating all 3^p sign
/// patterns. For each pattern the stationarity system restricted to the
/// claimed support is solved, and the true objective is evaluated at that
/// candidate; the optimum's own pattern yields the optimum itself, so the
/// minimum over candidates is the global minimum. Tractable for p <= 6.
pub fn lasso_enumeration_minimum(problem: &RegressionProblem, lambda: f64) -> (f64, Vec<f64>) {
    let p = problem.p();
    let n = problem.n();
    let x = problem.x();
    let y = problem.y();
    assert!(p <= 6, "enumeration oracle is exponential in p");
    let mut best = (lasso_objective(problem, &vec![0.0; p], lambda), vec![0.0; p]);
    let total = 3usize.pow(p as u32);
    for code in 1..total {
        let mut signs = vec![0i8; p];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = [0i8, 1, -1][c % 3];
            c /= 3;
        }
        let support: Vec<usize> = (0..p).filter(|&j| signs[j] != 0).collect();
        let k = support.len();
        if k == 0 {
            continue;
        }
        // X_S' X_S b = X_S' y - lambda * sigma_S
        let mut gram = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for (a, &ja) in support.iter().enumerate() {
            for (b, &jb) in support.iter().enumerate() {
                let mut s = 0.0;
                for i in 0..n {
                    s += x[[i, ja]] * x[[i, jb]];
                }
                gram[a][b] = s;
            }
            let mut g = 0.0;
            for i in 0..n {
                g += x[[i, ja]] * y[i];
            }
            rhs[a] = g - lambda * signs[ja] as f64;
        }
        let Some(sol) = gauss_solve(&gram, &rhs) else { continue };
        let mut beta = vec![0.0; p];
        for (a, &ja) in support.iter().enumerate() {
            beta[ja] = sol[a];
        }
        let obj = lasso_objective(problem, &beta, lambda);
        if obj < best.0 {
            best = (obj, beta);
        }
    }
    best
}

/// Random dense problem with N(0,1)-ish entries from the supplied rng.
pub fn random_problem<R: Rng>(rng: &mut R, n: usize, p: usize) -> RegressionProblem {
    let x = Array2::from_shape_fn((n, p), |_| standard_normal(rng));
    let y = Array1::from_shape_fn(n, |_| standard_normal(rng));
    RegressionProblem::new(x, y).unwrap()
}

/// Design whose columns satisfy X'X = n I exactly up to rounding:
/// modified Gram-Schmidt on a random matrix, scaled by sqrt(n).
pub fn orthonormal_design<R: Rng>(rng: &mut R, n: usize, p: usize) -> Array2<f64> {
    assert!(p <= n);
    loop {
        let mut cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| standard_normal(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..p {
            // Two orthogonalization passes keep the Gram matrix at the
            // rounding floor even for moderately correlated draws.
            for _ in 0..2 {
                for k in 0..j {
                    let prev = cols[k].clone();
                    let dot: f64 = cols[j].iter().zip(prev.iter()).map(|(a, b)| a * b).sum();
                    for (vj, vk) in cols[j].iter_mut().zip(prev.iter()) {
                        *vj -= dot * vk;
                    }
                }
            }
            let norm: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for v in cols[j].iter_mut() {
                *v /= norm;
            }
        }
        if !ok {
            continue;
        }
        let scale = (n as f64).sqrt();
        return Array2::from_shape_fn((n, p), |(i, j)| cols[j][i] * scale);
    }
}

/// Box-Muller standard normal; independent of the library's samplers.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        let v: f64 = rng.gen::<f64>();
        if u > 1e-300 {
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}
