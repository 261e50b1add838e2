//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, C_ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance required of eigensolver inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct JacobiConfig {
    /// Stop when the off-diagonal Frobenius mass drops below `tol * ‖A‖_F`.
    pub tol: f64,
    /// Sweep cap is `sweeps_per_dim * dim`.
    pub sweeps_per_dim: usize,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            tol: 1e-10,
            sweeps_per_dim: 50,
        }
    }
}

/// Eigenvalues in ascending order; column `k` of `vectors` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// V · diag(f(λ)) · V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let w: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, |i, j| {
            let mut acc = C_ZERO;
            for k in 0..n {
                if w[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * w[k];
                }
            }
            acc
        })
    }
}

pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigen> {
    eigh_with(h, JacobiConfig::default())
}

pub fn eigh_with(h: &ComplexMatrix, cfg: JacobiConfig) -> Result<HermitianEigen> {
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::input(format!(
            "matrix is not Hermitian (‖A − A†‖_max = {err:.3e})"
        )));
    }
    Ok(jacobi(h.hermitian_part(), cfg))
}

/// Jacobi iteration on a matrix already known to be Hermitian.
pub(crate) fn jacobi(mut a: ComplexMatrix, cfg: JacobiConfig) -> HermitianEigen {
    let n = a.dim();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let threshold = cfg.tol * scale;
    let max_sweeps = cfg.sweeps_per_dim * n;

    for _ in 0..max_sweeps {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE * 16.0 {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, mag);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zeroes a[p,q] with U = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on rows/cols p, q.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: Complex64, mag: f64) {
    let n = a.dim();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u_pq = phase * s;
    let u_qp = -phase.conj() * s;

    // A ← A·U (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * c;
    }
    // A ← U†·A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * u_pq.conj() + aqk * c;
    }
    a[(p, q)] = C_ZERO;
    a[(q, p)] = C_ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * c;
    }
}

/// Relative width of the eigenvalue cluster treated as one eigenspace.
const CLUSTER_TOL: f64 = 1e-9;

/// Largest eigenvalue and a unit eigenvector.
///
/// The vector is the normalized projection of the fixed start vector
/// (1, …, 1)/√n onto the top eigenspace, which is where power iteration from
/// that start converges. When the start vector is orthogonal to that
/// eigenspace the Jacobi vector is returned instead.
pub fn top_eigpair(h: &ComplexMatrix) -> Result<(f64, Vec<Complex64>)> {
    let eig = eigh(h)?;
    Ok(extreme_pair(&eig, true))
}

/// Smallest eigenvalue and a unit eigenvector, chosen like [`top_eigpair`].
pub fn bottom_eigpair(h: &ComplexMatrix) -> Result<(f64, Vec<Complex64>)> {
    let eig = eigh(h)?;
    Ok(extreme_pair(&eig, false))
}

pub(crate) fn extreme_pair(eig: &HermitianEigen, top: bool) -> (f64, Vec<Complex64>) {
    let n = eig.values.len();
    let lambda = if top { eig.max() } else { eig.min() };
    let spread = (eig.max() - eig.min()).abs().max(lambda.abs()).max(1e-300);
    let cluster: Vec<usize> = (0..n)
        .filter(|&k| (eig.values[k] - lambda).abs() <= CLUSTER_TOL * spread.max(1.0))
        .collect();

    let start = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut proj = vec![C_ZERO; n];
    for &k in &cluster {
        let col = eig.vector(k);
        let coef: Complex64 = col.iter().map(|z| z.conj() * start).sum();
        for (p, c) in proj.iter_mut().zip(&col) {
            *p += c * coef;
        }
    }
    let norm = proj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let vector = if norm > 1e-6 {
        proj.iter().map(|z| z / norm).collect()
    } else {
        eig.vector(if top { n - 1 } else { 0 })
    };
    (lambda, vector)
}

/// Spectral norm of a Hermitian matrix.
pub fn spectral_norm(h: &ComplexMatrix) -> Result<f64> {
    let eig = eigh(h)?;
    Ok(eig.max().abs().max(eig.min().abs()))
}
