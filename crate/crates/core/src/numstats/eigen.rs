//! Dense symmetric eigensolvers.

use ndarray::{Array1, Array2, ArrayView2};
use rand::RngCore;
use rand_xoshiro::SplitMix64;
use rand::SeedableRng;

use crate::error::{Error, Result};

/// Relative off-diagonal Frobenius tolerance for the Jacobi iteration.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Array2<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over all `(p, q)` pairs in row order, annihilating each
/// off-diagonal entry with a plane rotation, until the off-diagonal
/// Frobenius norm drops below `JACOBI_TOL` times the Frobenius norm of the
/// input. Only the upper triangle's symmetric counterpart is assumed; the
/// input is symmetrized as `(A + Aᵀ) / 2` first.
pub fn jacobi_eigen(a: ArrayView2<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }

    // row-major working copies
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    if total > 0.0 {
        loop {
            if off_norm(&m) <= JACOBI_TOL * total {
                break;
            }
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: "jacobi eigensolver",
                    iterations: sweeps,
                });
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;

                    // A <- A J
                    for k in 0..n {
                        let akp = m[k * n + p];
                        let akq = m[k * n + q];
                        m[k * n + p] = c * akp - s * akq;
                        m[k * n + q] = s * akp + c * akq;
                    }
                    // A <- Jᵀ A
                    for k in 0..n {
                        let apk = m[p * n + k];
                        let aqk = m[q * n + k];
                        m[p * n + k] = c * apk - s * aqk;
                        m[q * n + k] = s * apk + c * aqk;
                    }
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    // V <- V J
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their index order
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));

    let values = Array1::from_iter(order.iter().map(|&i| m[i * n + i]));
    let mut vectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, col]] = v[k * n + i];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Matrices up to this order use the full Jacobi solve in [`top_eigenvector`].
pub const TOP_EIGEN_JACOBI_MAX: usize = 256;
const POWER_MAX_ITER: usize = 20_000;
const POWER_TOL: f64 = 1e-14;

/// Dominant eigenpair of a symmetric positive semi-definite matrix.
///
/// Small matrices go through [`jacobi_eigen`]; larger ones use power
/// iteration from a fixed pseudo-random start vector.
pub fn top_eigenvector(a: ArrayView2<f64>) -> Result<(f64, Array1<f64>)> {
    let n = a.nrows();
    if n <= TOP_EIGEN_JACOBI_MAX {
        let eig = jacobi_eigen(a)?;
        return Ok((eig.values[0], eig.vectors.column(0).to_owned()));
    }

    let mut rng = SplitMix64::seed_from_u64(0x5eed_0f70_9e16);
    let mut x = Array1::from_iter((0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5));
    let norm = x.dot(&x).sqrt();
    x /= norm;
    for _ in 0..POWER_MAX_ITER {
        let mut y = a.dot(&x);
        let ny = y.dot(&y).sqrt();
        if ny == 0.0 {
            return Ok((0.0, x));
        }
        y /= ny;
        let delta = (&y - &x).iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        x = y;
        if delta < POWER_TOL {
            break;
        }
    }
    let lambda = x.dot(&a.dot(&x));
    Ok((lambda, x))
}
