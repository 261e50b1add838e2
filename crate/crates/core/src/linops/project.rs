//! Projections onto the PSD cone and onto partial-trace fibers.

use super::eigen::{eigh, jacobi, HermitianEigen, JacobiConfig};
use super::layout::{FactorSplit, RegisterLayout};
use super::matrix::ComplexMatrix;
use super::solve::{hermitian_basis, solve_spd};
use super::states::DensityMatrix;
use crate::error::{Error, Result};

/// Frobenius-nearest PSD matrix (negative eigenvalues clipped to zero).
pub fn project_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigh(h)?;
    Ok(clip(&eig))
}

fn clip(eig: &HermitianEigen) -> ComplexMatrix {
    eig.map_spectrum(|l| l.max(0.0))
}

/// Split of a layout's space into the kept registers and `extended`.
fn fiber_split(
    layout: &RegisterLayout,
    extended: &str,
    x: &ComplexMatrix,
    rho1: &DensityMatrix,
) -> Result<FactorSplit> {
    if x.dim() != layout.total_dim() {
        return Err(Error::input(format!(
            "matrix dimension {} does not match layout dimension {}",
            x.dim(),
            layout.total_dim()
        )));
    }
    let pos = layout.positions(&[extended])?;
    let split = FactorSplit::new(&layout.factor_dims(), &pos);
    if rho1.dim() != split.kept_dim {
        return Err(Error::input(format!(
            "marginal has dimension {} but the kept registers have dimension {}",
            rho1.dim(),
            split.kept_dim
        )));
    }
    Ok(split)
}

fn affine_step(split: &FactorSplit, x: &ComplexMatrix, rho1: &ComplexMatrix) -> ComplexMatrix {
    let delta = rho1 - &split.trace_out(x);
    let corr = split.extend_identity(&delta, 1.0 / split.traced_dim as f64);
    x + &corr
}

/// Orthogonal projection onto {r : tr_ext(r) = rho1}:
/// r = x + (rho1 − tr_ext(x)) ⊗ I/d_ext.
pub fn project_fiber_affine(
    x: &ComplexMatrix,
    rho1: &DensityMatrix,
    layout: &RegisterLayout,
    extended: &str,
) -> Result<ComplexMatrix> {
    let split = fiber_split(layout, extended, x, rho1)?;
    if !x.is_hermitian(1e-10) {
        return Err(Error::input("fiber projection needs a Hermitian input"));
    }
    Ok(affine_step(&split, x, rho1.matrix()))
}

#[derive(Debug, Clone, Copy)]
pub struct DykstraConfig {
    pub max_iter: usize,
    /// Stop once successive iterates differ by at most this (Frobenius).
    pub step_tol: f64,
    /// Residual accepted when the cap is hit.
    pub fail_residual: f64,
}

impl Default for DykstraConfig {
    fn default() -> Self {
        DykstraConfig {
            max_iter: 10_000,
            step_tol: 1e-10,
            fail_residual: 1e-6,
        }
    }
}

/// Outcome diagnostics of a fiber projection.
#[derive(Debug, Clone, Copy)]
pub struct FiberProjectionStats {
    pub iterations: usize,
    /// max(−λ_min, ‖tr_ext(r) − rho1‖_max).
    pub residual: f64,
}

/// Euclidean projection onto S = {ρ ⪰ 0 : tr_ext(ρ) = rho1}.
pub fn project_fiber(
    x: &ComplexMatrix,
    rho1: &DensityMatrix,
    layout: &RegisterLayout,
    extended: &str,
) -> Result<DensityMatrix> {
    project_fiber_with(x, rho1, layout, extended, DykstraConfig::default()).map(|(r, _)| r)
}

/// Dykstra alternating projections between the PSD cone and the affine fiber.
pub fn project_fiber_with(
    x: &ComplexMatrix,
    rho1: &DensityMatrix,
    layout: &RegisterLayout,
    extended: &str,
    cfg: DykstraConfig,
) -> Result<(DensityMatrix, FiberProjectionStats)> {
    let split = fiber_split(layout, extended, x, rho1)?;
    if !x.is_hermitian(1e-10) {
        return Err(Error::input("fiber projection needs a Hermitian input"));
    }
    // ρ ⪰ 0 with tr_ext ρ = rho1 vanishes off supp(rho1) ⊗ X_ext, and that
    // block is orthogonal to the rest, so compress onto it before iterating.
    let eig = eigh(rho1.matrix())?;
    let scale = eig.max().max(1.0);
    let support: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > SUPPORT_TOL * scale)
        .collect();
    let rank = support.len();
    let d_ext = split.traced_dim;
    // Columns of `basis` span supp(rho1) ⊗ X_ext in the full space; reduced
    // coordinate (a, t) maps to column a * d_ext + t.
    let reduced = rank * d_ext;
    let mut basis = vec![num_complex::Complex64::new(0.0, 0.0); x.dim() * reduced];
    for (a, &k) in support.iter().enumerate() {
        for kept in 0..split.kept_dim {
            let w = eig.vectors[(kept, k)];
            for t in 0..d_ext {
                basis[split.index(kept, t) * reduced + a * d_ext + t] = w;
            }
        }
    }
    let compress = |m: &ComplexMatrix| -> ComplexMatrix {
        let n = m.dim();
        ComplexMatrix::from_fn(reduced, |i, j| {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for p in 0..n {
                let bp = basis[p * reduced + i].conj();
                if bp.norm_sqr() == 0.0 {
                    continue;
                }
                for q in 0..n {
                    acc += bp * m[(p, q)] * basis[q * reduced + j];
                }
            }
            acc
        })
    };
    let expand = |m: &ComplexMatrix| -> ComplexMatrix {
        let n = x.dim();
        ComplexMatrix::from_fn(n, |p, q| {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..reduced {
                let bp = basis[p * reduced + i];
                if bp.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..reduced {
                    acc += bp * m[(i, j)] * basis[q * reduced + j].conj();
                }
            }
            acc
        })
    };
    let reduced_split = FactorSplit::new(&[rank, d_ext], &[1]);
    let target = ComplexMatrix::diag_real(&support.iter().map(|&k| eig.values[k]).collect::<Vec<_>>());
    let n = reduced;

    let mut cur = compress(&x.hermitian_part()).hermitian_part();
    // Only the cone needs a correction term; the affine set is a translated subspace.
    let mut p = ComplexMatrix::zeros(n);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < cfg.max_iter {
        iterations += 1;
        let shifted = &cur + &p;
        let y = clip(&jacobi(shifted.clone(), Default::default()));
        p = &shifted - &y;
        let next = affine_step(&reduced_split, &y, &target);
        let step = (&next - &cur).frobenius_norm();
        cur = next;
        if step <= cfg.step_tol {
            residual = fiber_residual(&reduced_split, &cur, &target);
            if residual <= 1e-8 {
                break;
            }
        }
    }
    if !residual.is_finite() || iterations == cfg.max_iter {
        residual = fiber_residual(&reduced_split, &cur, &target);
    }
    // Dykstra crawls when the projection is rank-deficient; finish on the dual.
    let polished = dual_newton(&reduced_split, &compress(&x.hermitian_part()).hermitian_part(), &target);
    let polished_residual = fiber_residual(&reduced_split, &polished, &target);
    if polished_residual <= residual {
        cur = polished;
        residual = polished_residual;
    }
    if residual > cfg.fail_residual {
        return Err(Error::Convergence {
            iterations,
            residual,
            report: None,
        });
    }
    let out = expand(&cur).hermitian_part();
    let residual = fiber_residual(&split, &out, rho1.matrix());
    Ok((
        DensityMatrix::new_unchecked(out),
        FiberProjectionStats { iterations, residual },
    ))
}

/// Eigenvalues of the marginal below this (relative) count as zero.
const SUPPORT_TOL: f64 = 1e-12;

/// Projection onto {ρ ⪰ 0 : tr_ext ρ = target} as ρ = Π₊(x + Y⊗I), where Y
/// minimizes the convex dual φ(Y) = ½‖Π₊(x + Y⊗I)‖² − tr(Y·target).
/// Semismooth Newton with backtracking; ∇φ = tr_ext Π₊(x + Y⊗I) − target.
fn dual_newton(split: &FactorSplit, x: &ComplexMatrix, target: &ComplexMatrix) -> ComplexMatrix {
    let r = split.kept_dim;
    let basis = hermitian_basis(r);
    let lifted: Vec<ComplexMatrix> = basis.iter().map(|b| split.extend_identity(b, 1.0)).collect();
    let cfg = JacobiConfig {
        tol: 1e-14,
        ..Default::default()
    };
    let state = |y: &ComplexMatrix| {
        let eig = jacobi((x + &split.extend_identity(y, 1.0)).hermitian_part(), cfg);
        let rho = clip(&eig);
        let phi = 0.5 * rho.frobenius_norm().powi(2) - y.inner(target).re;
        (eig, rho, phi)
    };
    let mut y = ComplexMatrix::zeros(r);
    let (mut eig, mut rho, mut phi) = state(&y);
    for _ in 0..NEWTON_MAX {
        let g = &split.trace_out(&rho) - target;
        if g.max_abs() <= NEWTON_TOL {
            break;
        }
        let grad: Vec<f64> = basis.iter().map(|b| b.inner(&g).re).collect();
        let q = &eig.vectors;
        let qh = q.adjoint();
        let ws: Vec<ComplexMatrix> = lifted.iter().map(|l| qh.matmul(l).matmul(q)).collect();
        let n = eig.values.len();
        let omega = |i: usize, j: usize| {
            let (a, b) = (eig.values[i], eig.values[j]);
            match (a > 0.0, b > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                _ => (a.max(0.0) - b.max(0.0)) / (a - b),
            }
        };
        let mut hess = vec![vec![0.0; basis.len()]; basis.len()];
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += omega(i, j) * (ws[a][(i, j)].conj() * ws[b][(i, j)]).re;
                    }
                }
                hess[a][b] = acc;
                hess[b][a] = acc;
            }
        }
        let dir = solve_spd(&hess, &grad.iter().map(|v| -v).collect::<Vec<_>>());
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let mut step_dir = ComplexMatrix::zeros(r);
        let (dir, slope) = if slope < 0.0 {
            (dir, slope)
        } else {
            let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
            let s = -grad.iter().map(|v| v * v).sum::<f64>();
            (neg, s)
        };
        for (b, d) in basis.iter().zip(&dir) {
            step_dir.add_scaled(*d, b);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = y.clone();
            trial.add_scaled(t, &step_dir);
            let next = state(&trial);
            if next.2 <= phi + 1e-4 * t * slope {
                y = trial;
                (eig, rho, phi) = next;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    rho
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX: usize = 100;

fn fiber_residual(split: &FactorSplit, r: &ComplexMatrix, target: &ComplexMatrix) -> f64 {
    let min = jacobi(r.hermitian_part(), Default::default()).min();
    let cons = split.trace_out(r).max_abs_diff(target);
    (-min).max(cons).max(0.0)
}
