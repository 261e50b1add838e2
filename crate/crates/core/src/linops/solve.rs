//! Small dense real solvers shared by the Newton methods.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;

/// Orthonormal basis of r×r Hermitian matrices under ⟨A,B⟩ = tr(A†B).
pub(crate) fn hermitian_basis(r: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(r * r);
    for k in 0..r {
        out.push(ComplexMatrix::basis_projector(r, k));
    }
    for k in 0..r {
        for l in k + 1..r {
            let mut re = ComplexMatrix::zeros(r);
            re[(k, l)] = Complex64::new(s, 0.0);
            re[(l, k)] = Complex64::new(s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(r);
            im[(k, l)] = Complex64::new(0.0, -s);
            im[(l, k)] = Complex64::new(0.0, s);
            out.push(im);
        }
    }
    out
}

/// Solves H·x = b for symmetric positive semidefinite H, with a small ridge
/// added when the Cholesky factorization breaks down.
pub(crate) fn solve_spd(h: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let scale = (0..p).map(|i| h[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if !scale.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return vec![0.0; p];
    }
    let mut ridge = 0.0;
    loop {
        if let Some(l) = cholesky(h, ridge) {
            let mut z = vec![0.0; p];
            for i in 0..p {
                let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
                z[i] = (b[i] - s) / l[i][i];
            }
            let mut x = vec![0.0; p];
            for i in (0..p).rev() {
                let s: f64 = (i + 1..p).map(|k| l[k][i] * x[k]).sum();
                x[i] = (z[i] - s) / l[i][i];
            }
            return x;
        }
        if ridge > scale {
            return vec![0.0; p];
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
}

fn cholesky(h: &[Vec<f64>], ridge: f64) -> Option<Vec<Vec<f64>>> {
    let p = h.len();
    let mut l = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h[i][i] + ridge - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_solver() {
        let h = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve_spd(&h, &[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = x.inner(y);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - want).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }
}
