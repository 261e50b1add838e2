//! Strategy space {ρ ⪰ 0 : tr_ext ρ = ρ₁} for the maximizer's extended move.
//!
//! Entropic steps solve max tr(Kρ) + S(ρ) over the fiber. The maximizer is
//! ρ = exp(K − Y⊗I), where Y minimizes the convex dual
//! φ(Y) = tr exp(K − Y⊗I) + tr(ρ₁Y); Y is found by damped Newton.

use crate::error::{Error, Result};
use crate::linops::eigen::{jacobi, JacobiConfig};
use crate::linops::matrix::C_ZERO;
use crate::linops::solve::{hermitian_basis, solve_spd};
use crate::linops::{tensor, ComplexMatrix, DensityMatrix, HermitianEigen};

const SUPPORT_TOL: f64 = 1e-12;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX: usize = 200;

/// Fiber best response with a two-sided certificate on its value.
#[cfg(test)]
#[derive(Debug, Clone)]
pub(crate) struct FiberResponse {
    pub state: ComplexMatrix,
    pub lower: f64,
    pub upper: f64,
}

pub(crate) struct FiberSpace {
    d2: usize,
    rank: usize,
    /// Eigenbasis of ρ₁ ordered support first, and U₁ ⊗ I.
    u1: ComplexMatrix,
    frame: ComplexMatrix,
    /// Eigenvalues of ρ₁ on its support (ρ₁ is diagonal in the frame).
    marg: Vec<f64>,
    basis: Vec<ComplexMatrix>,
    play_dual: Option<(ComplexMatrix, ComplexMatrix)>,
    respond_dual: Option<(f64, ComplexMatrix)>,
    /// Sharpest bound returned so far, with its dual and operator.
    best_dual: Option<(f64, ComplexMatrix, ComplexMatrix)>,
}

impl FiberSpace {
    pub fn new(rho1: &DensityMatrix, d2: usize) -> Result<FiberSpace> {
        let d1 = rho1.dim();
        let eig = herm_eig(rho1.matrix());
        let mut order: Vec<usize> = (0..d1).collect();
        order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]));
        let marg: Vec<f64> = order
            .iter()
            .map(|&k| eig.values[k])
            .take_while(|&v| v > SUPPORT_TOL)
            .collect();
        let rank = marg.len();
        let u1 = ComplexMatrix::from_fn(d1, |i, j| eig.vectors[(i, order[j])]);
        Ok(FiberSpace {
            d2,
            rank,
            frame: tensor(&u1, &ComplexMatrix::identity(d2)),
            u1,
            marg,
            basis: hermitian_basis(rank),
            play_dual: None,
            respond_dual: None,
            best_dual: None,
        })
    }

    fn reduced_dim(&self) -> usize {
        self.rank * self.d2
    }

    fn compress(&self, k: &ComplexMatrix) -> ComplexMatrix {
        let rot = self.frame.adjoint().matmul(k).matmul(&self.frame);
        ComplexMatrix::from_fn(self.reduced_dim(), |i, j| rot[(i, j)])
    }

    fn expand(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let m = self.reduced_dim();
        let padded = ComplexMatrix::from_fn(self.frame.dim(), |i, j| if i < m && j < m { x[(i, j)] } else { C_ZERO });
        self.frame.matmul(&padded).matmul(&self.frame.adjoint())
    }

    fn marginal(&self) -> ComplexMatrix {
        ComplexMatrix::diag_real(&self.marg)
    }

    /// argmax over the fiber of tr(Kρ) + S(ρ), warm-started from the last call.
    pub fn play(&mut self, k: &ComplexMatrix) -> Result<ComplexMatrix> {
        let kc = self.compress(k);
        // Shifting Y by the change of K averaged over the extension is exact
        // for changes of the form A ⊗ I.
        let y0 = match self.play_dual.take() {
            Some((prev_k, y)) => {
                let mut y0 = y;
                y0.add_scaled(
                    1.0 / self.d2 as f64,
                    &partial_trace_second(&(&kc - &prev_k), self.rank, self.d2),
                );
                y0
            }
            None => ComplexMatrix::zeros(self.rank),
        };
        let (rho, y) = self.solve(&kc, y0)?;
        self.play_dual = Some((kc, y));
        Ok(self.expand(&rho))
    }

    /// Upper bound on max tr(Eρ) over the fiber. Returns as soon as the bound
    /// is at most `goal`, otherwise once it is within `target` of the maximum.
    pub fn upper_bound(&mut self, e: &ComplexMatrix, target: f64, goal: f64) -> Result<f64> {
        let ec = self.compress(e);
        if let Some((_, yt)) = &self.respond_dual {
            let cheap = self.dual_bound(&ec, yt);
            if cheap <= goal {
                let yt = yt.clone();
                self.record(cheap, yt, e);
                return Ok(cheap);
            }
        }
        let (_, _, upper, yt) = self.continuation(&ec, target, goal)?;
        self.record(upper, yt, e);
        Ok(upper)
    }

    fn record(&mut self, bound: f64, yt: ComplexMatrix, e: &ComplexMatrix) {
        if self.best_dual.as_ref().is_none_or(|(b, _, _)| bound < *b) {
            self.best_dual = Some((bound, yt, e.clone()));
        }
    }

    /// Maximizes tr(Eρ) over the fiber by entropic continuation until the
    /// dual bound is within `target` of the achieved value.
    #[cfg(test)]
    pub fn respond(&mut self, e: &ComplexMatrix, target: f64) -> Result<FiberResponse> {
        let ec = self.compress(e);
        let (rho, lower, upper, _) = self.continuation(&ec, target, f64::NEG_INFINITY)?;
        Ok(FiberResponse {
            state: self.expand(&rho),
            lower,
            upper,
        })
    }

    /// Affine majorant (c, Y) of ρ₁′ ↦ max over the fiber of ρ₁′ of tr(Eρ),
    /// namely tr(ρ₁′Y) + c, taken from the sharpest bound `upper_bound` has
    /// returned. Needs ρ₁ of full rank so that Y is defined everywhere.
    pub fn plane(&self) -> Option<(f64, ComplexMatrix)> {
        let (_, yt, e) = self.best_dual.as_ref()?;
        if self.rank != self.u1.dim() {
            return None;
        }
        let y = self.u1.matmul(yt).matmul(&self.u1.adjoint()).hermitian_part();
        let c = herm_eig(&(e - &kron_identity(&y, self.d2))).max();
        Some((c, y))
    }

    /// tr(ρ₁Ỹ) + λmax(E − Ỹ⊗I), valid for every Hermitian Ỹ.
    fn dual_bound(&self, ec: &ComplexMatrix, yt: &ComplexMatrix) -> f64 {
        let slack = ec - &kron_identity(yt, self.d2);
        self.marginal().trace_product(yt).re + herm_eig(&slack).max()
    }

    /// max tr(Eρ) + μS(ρ) for decreasing μ; the entropy term costs at most
    /// μ·ln d₂ of value, which sets the first μ.
    fn continuation(
        &mut self,
        ec: &ComplexMatrix,
        target: f64,
        goal: f64,
    ) -> Result<(ComplexMatrix, f64, f64, ComplexMatrix)> {
        let spread = (self.d2.max(2) as f64).ln();
        // A cold start begins at the coarsest level, where Newton from Y = 0
        // is well conditioned.
        let (mut mu, mut yt) = match self.respond_dual.take() {
            Some((_, y)) => ((0.5 * target / spread).clamp(1e-10, 0.1), y),
            None => (0.1, ComplexMatrix::zeros(self.rank)),
        };
        let mut best: Option<(ComplexMatrix, f64)> = None;
        let mut upper = (f64::INFINITY, ComplexMatrix::zeros(self.rank));
        loop {
            let (rho, y) = match self.solve(&ec.scale(1.0 / mu), yt.scale(1.0 / mu)) {
                Ok(sol) => sol,
                Err(_) if best.is_some() => break,
                Err(e) => return Err(e),
            };
            yt = y.scale(mu);
            let lower = ec.trace_product(&rho).re;
            let bound = self.dual_bound(ec, &yt);
            if bound < upper.0 {
                upper = (bound, yt.clone());
            }
            if best.as_ref().is_none_or(|(_, l)| lower > *l) {
                best = Some((rho, lower));
            }
            let lo = best.as_ref().map(|(_, l)| *l).unwrap_or(lower);
            if upper.0 - lo <= target || upper.0 <= goal || mu <= 1e-10 {
                break;
            }
            mu *= 0.1;
        }
        self.respond_dual = Some((mu, yt));
        let (rho, lower) = best.expect("at least one continuation stage");
        Ok((rho, lower, upper.0, upper.1))
    }

    /// Damped Newton on the dual in the compressed frame. Returns the primal
    /// state and the dual variable.
    fn solve(&self, k: &ComplexMatrix, y0: ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (r, d2) = (self.rank, self.d2);
        let marg = self.marginal();
        let mut y = y0;
        let shift = herm_eig(&(k - &kron_identity(&y, d2))).max();
        for i in 0..r {
            y[(i, i)] += shift;
        }
        let eval = |y: &ComplexMatrix| -> Result<(f64, HermitianEigen)> {
            let eig = herm_eig(&(k - &kron_identity(y, d2)));
            let phi = eig.values.iter().map(|l| l.exp()).sum::<f64>() + marg.trace_product(y).re;
            Ok((phi, eig))
        };
        let (mut phi, mut eig) = eval(&y)?;
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX {
            let rho = eig.map_spectrum(f64::exp);
            let g = &marg - &partial_trace_second(&rho, r, d2);
            residual = g.frobenius_norm();
            if residual <= NEWTON_TOL {
                return Ok((rho.hermitian_part(), y));
            }
            let grad: Vec<f64> = self.basis.iter().map(|b| b.inner(&g).re).collect();
            let hess = self.hessian(&eig);
            let step = solve_spd(&hess, &grad.iter().map(|v| -v).collect::<Vec<_>>());
            let dy = self
                .basis
                .iter()
                .zip(&step)
                .fold(ComplexMatrix::zeros(r), |mut acc, (b, &c)| {
                    acc.add_scaled(c, b);
                    acc
                });
            let slope: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial = y.clone();
                trial.add_scaled(alpha, &dy);
                let (p, e) = eval(&trial)?;
                // Near the optimum φ stalls at rounding level; a smaller
                // gradient is then the better acceptance test.
                let armijo = p <= phi + 1e-4 * alpha * slope;
                let flat = p <= phi + 1e-13 * phi.abs().max(1.0) && marg_residual(&e, &marg, r, d2) < 0.5 * residual;
                if p.is_finite() && (armijo || flat) {
                    y = trial;
                    phi = p;
                    eig = e;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let rho = eig.map_spectrum(f64::exp);
        if residual <= 1e-9 {
            return Ok((rho.hermitian_part(), y));
        }
        Err(Error::Convergence {
            iterations: NEWTON_MAX,
            residual,
            report: None,
        })
    }

    fn hessian(&self, eig: &HermitianEigen) -> Vec<Vec<f64>> {
        let n = eig.values.len();
        let lam = &eig.values;
        let mut gamma = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = lam[i] - lam[j];
                gamma[i * n + j] = if d.abs() < 1e-12 {
                    lam[i].max(lam[j]).exp()
                } else if d.abs() > 1.0 {
                    (lam[i].exp() - lam[j].exp()) / d
                } else {
                    lam[j].exp() * d.exp_m1() / d
                };
            }
        }
        let v = &eig.vectors;
        let vh = v.adjoint();
        let zs: Vec<ComplexMatrix> = self
            .basis
            .iter()
            .map(|b| vh.matmul(&kron_identity(b, self.d2)).matmul(v))
            .collect();
        let p = zs.len();
        let mut h = vec![vec![0.0; p]; p];
        for a in 0..p {
            for b in a..p {
                let za = zs[a].as_slice();
                let zb = zs[b].as_slice();
                let mut acc = 0.0;
                for (idx, g) in gamma.iter().enumerate() {
                    acc += g * (za[idx].conj() * zb[idx]).re;
                }
                h[a][b] = acc;
                h[b][a] = acc;
            }
        }
        h
    }
}

/// Eigendecomposition of the Hermitian part, tolerant of rounding in large
/// rescaled operators.
fn herm_eig(m: &ComplexMatrix) -> HermitianEigen {
    jacobi(
        m.hermitian_part(),
        JacobiConfig {
            tol: 1e-13,
            ..Default::default()
        },
    )
}

fn kron_identity(y: &ComplexMatrix, d2: usize) -> ComplexMatrix {
    tensor(y, &ComplexMatrix::identity(d2))
}

fn marg_residual(eig: &HermitianEigen, marg: &ComplexMatrix, r: usize, d2: usize) -> f64 {
    let rho = eig.map_spectrum(f64::exp);
    (marg - &partial_trace_second(&rho, r, d2)).frobenius_norm()
}

fn partial_trace_second(m: &ComplexMatrix, r: usize, d2: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(r, |i, j| (0..d2).map(|t| m[(i * d2 + t, j * d2 + t)]).sum())
}
