//! Smallest eigenpairs of the pencil `A w = λ B w` with `A`, `B` SPD.
//!
//! Small problems are reduced to a standard dense problem through the
//! Cholesky factor of `B`. Larger ones run Lanczos on the shift-invert
//! operator `A⁻¹B`, which is self-adjoint in the `B` inner product; its
//! largest Ritz values `θ` give the smallest `λ = 1/θ`. Every Lanczos vector
//! is reorthogonalized against all previous ones, which keeps the basis
//! `B`-orthonormal and avoids ghost copies of converged eigenvalues.

use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sparse::{Cholesky, CscMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigOptions {
    /// Bound on `‖A w - λ B w‖ / ‖A w‖` for every returned pair.
    pub tol: f64,
    /// Dimensions up to this use the dense path.
    pub dense_threshold: usize,
    pub max_lanczos_steps: usize,
    /// Eigenvectors are scaled so that `wᵀ B w = normalization`.
    pub normalization: f64,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            dense_threshold: 2000,
            max_lanczos_steps: 400,
            normalization: 1.0,
            seed: 0x1a2c_2005,
        }
    }
}

impl EigOptions {
    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖A w - λ B w‖₂ / ‖A w‖₂`.
    pub residuals: Vec<f64>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        frequencies(&self.eigenvalues)
    }
}

/// `ω = √λ`; a negative eigenvalue means the pencil was not SPD.
pub fn frequencies(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    eigenvalues
        .iter()
        .map(|&l| if l < 0.0 { Err(Error::NegativeEigenvalue(l)) } else { Ok(l.sqrt()) })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn relative_residual(a: &CscMatrix, b: &CscMatrix, lambda: f64, w: &[f64]) -> f64 {
    let aw = a.apply(w);
    let bw = b.apply(w);
    let r: Vec<f64> = aw.iter().zip(&bw).map(|(x, y)| x - lambda * y).collect();
    norm(&r) / norm(&aw)
}

pub fn solve_smallest(
    a: &CscMatrix,
    b: &CscMatrix,
    count: usize,
    options: &EigOptions,
) -> Result<EigenSolution> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "pencil shapes {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if !(options.tol > 0.0) || !(options.normalization > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {} and normalization {} must be positive",
            options.tol, options.normalization
        )));
    }
    let count = count.min(n);
    if count == 0 {
        return Ok(EigenSolution {
            eigenvalues: Vec::new(),
            eigenvectors: Vec::new(),
            residuals: Vec::new(),
        });
    }
    let (eigenvalues, mut eigenvectors) = if n <= options.dense_threshold {
        dense(a, b, count)?
    } else {
        lanczos(a, b, count, options)?
    };
    if let Some(&l) = eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NegativeEigenvalue(l));
    }
    for w in &mut eigenvectors {
        let scale = (options.normalization / b.bilinear(w, w)).sqrt();
        let pivot = w.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let scale = if pivot < 0.0 { -scale } else { scale };
        w.iter_mut().for_each(|x| *x *= scale);
    }
    let residuals: Vec<f64> = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, w)| relative_residual(a, b, l, w))
        .collect();
    if residuals.iter().any(|&r| !(r <= options.tol)) {
        return Err(Error::NoConvergence {
            iterations: options.max_lanczos_steps,
            residuals,
        });
    }
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

type Pairs = (Vec<f64>, Vec<Vec<f64>>);

fn dense(a: &CscMatrix, b: &CscMatrix, count: usize) -> Result<Pairs> {
    // Same shift-invert view as the sparse path: with A = R Rᵀ the largest
    // eigenvalues θ = 1/λ of R⁻¹ B R⁻ᵀ. Reducing through B's factor instead
    // leaves eigenvector errors that A amplifies in the residual.
    let n = a.nrows();
    let llt = a
        .to_dense()
        .llt(Side::Lower)
        .map_err(|e| Error::NotSpd(format!("stiffness matrix: {e:?}")))?;
    let r = llt.L();
    let mut x = b.to_dense();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(r, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(r, c.as_mut(), Par::Seq);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence {
            iterations: 0,
            residuals: Vec::new(),
        })?;
    let s = evd.S().column_vector();
    let mut z = Mat::from_fn(n, count, |i, k| evd.U()[(i, n - 1 - k)]);
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(r.transpose(), z.as_mut(), Par::Seq);
    let values = (0..count).map(|k| 1.0 / s[n - 1 - k]).collect();
    let vectors = (0..count).map(|k| (0..n).map(|i| z[(i, k)]).collect()).collect();
    Ok((values, vectors))
}

fn lanczos(a: &CscMatrix, b: &CscMatrix, count: usize, options: &EigOptions) -> Result<Pairs> {
    let n = a.nrows();
    let chol = Cholesky::new(a)?;
    let steps_cap = options.max_lanczos_steps.max(2 * count + 10).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut last_residuals = vec![f64::INFINITY; count];
    let check_every = 10;
    let mut next_check = (2 * count + 10).min(steps_cap);

    loop {
        // Normalize r in the B inner product and append it to the basis.
        let br = b.apply(&r);
        let bnorm = dot(&r, &br).sqrt();
        if !q.is_empty() {
            beta.push(bnorm);
        }
        let invariant = bnorm <= 1e-300 || (!q.is_empty() && bnorm <= 1e-14 * alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        if invariant {
            // Krylov space exhausted: its Ritz pairs are exact.
            beta.pop();
            if q.len() >= count {
                return finish(&q, &alpha, &beta, count);
            }
            // Restart with a fresh direction orthogonal to the basis.
            r = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            orthogonalize(b, &q, &mut r);
            orthogonalize(b, &q, &mut r);
            let br = b.apply(&r);
            let s = dot(&r, &br).sqrt();
            r.iter_mut().for_each(|x| *x /= s);
            beta.push(0.0);
            q.push(r.clone());
        } else {
            r.iter_mut().for_each(|x| *x /= bnorm);
            q.push(r.clone());
        }

        // r = A⁻¹ B q_j, then three-term recurrence and full reorthogonalization.
        let j = q.len() - 1;
        let mut w = b.apply(&q[j]);
        chol.solve_in_place(&mut w);
        let bw = b.apply(&w);
        let a_j = dot(&q[j], &bw);
        alpha.push(a_j);
        for (x, qj) in w.iter_mut().zip(&q[j]) {
            *x -= a_j * qj;
        }
        if j > 0 {
            let b_j = beta[j - 1];
            for (x, qp) in w.iter_mut().zip(&q[j - 1]) {
                *x -= b_j * qp;
            }
        }
        orthogonalize(b, &q, &mut w);
        orthogonalize(b, &q, &mut w);
        r = w;

        let steps = q.len();
        if steps >= next_check || steps == steps_cap {
            next_check = steps + check_every;
            let next_beta = {
                let br = b.apply(&r);
                dot(&r, &br).sqrt()
            };
            let (theta, s) = tridiagonal_eigen(&alpha, &beta)?;
            // Largest θ first; the Ritz residual of A⁻¹B is |β_{k+1} s_{k,i}|.
            let top = theta.len().min(count);
            let converged = (0..top).all(|i| {
                let idx = theta.len() - 1 - i;
                (next_beta * s[(steps - 1, idx)]).abs() <= 1e-2 * options.tol * theta[idx].abs()
            });
            if converged && top == count {
                let (values, vectors) = finish(&q, &alpha, &beta, count)?;
                last_residuals = values
                    .iter()
                    .zip(&vectors)
                    .map(|(&l, w)| relative_residual(a, b, l, w))
                    .collect();
                if last_residuals.iter().all(|&res| res <= options.tol) || steps == steps_cap {
                    return Ok((values, vectors));
                }
            }
            if steps == steps_cap {
                if top == count {
                    let (values, vectors) = finish(&q, &alpha, &beta, count)?;
                    last_residuals = values
                        .iter()
                        .zip(&vectors)
                        .map(|(&l, w)| relative_residual(a, b, l, w))
                        .collect();
                }
                return Err(Error::NoConvergence {
                    iterations: steps,
                    residuals: last_residuals,
                });
            }
        }
    }
}

/// `r -= Q (Qᵀ B r)`.
fn orthogonalize(b: &CscMatrix, q: &[Vec<f64>], r: &mut [f64]) {
    let br = b.apply(r);
    let coeffs: Vec<f64> = q.iter().map(|qi| dot(qi, &br)).collect();
    for (c, qi) in coeffs.iter().zip(q) {
        for (x, y) in r.iter_mut().zip(qi) {
            *x -= c * y;
        }
    }
}

/// Ascending eigenvalues and eigenvectors of the symmetric tridiagonal matrix.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence {
        iterations: k,
        residuals: vec![f64::NAN],
    })?;
    let s = evd.S().column_vector();
    Ok(((0..k).map(|i| s[i]).collect(), evd.U().to_owned()))
}

fn finish(
    q: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    count: usize,
) -> Result<Pairs> {
    let (theta, s) = tridiagonal_eigen(alpha, &beta[..alpha.len() - 1])?;
    let k = theta.len();
    let n = q[0].len();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for i in 0..count {
        let idx = k - 1 - i;
        values.push(1.0 / theta[idx]);
        let mut w = vec![0.0; n];
        for (j, qj) in q.iter().enumerate() {
            let c = s[(j, idx)];
            for (x, y) in w.iter_mut().zip(qj) {
                *x += c * y;
            }
        }
        vectors.push(w);
    }
    Ok((values, vectors))
}
