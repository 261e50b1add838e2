//! Seeded random matrices. Equal seeds give bit-identical output.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::eigen::jacobi;
use super::matrix::ComplexMatrix;
use super::states::{DensityMatrix, Observable};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_matrix<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex_matrix(dim: usize, seed: u64) -> ComplexMatrix {
    gaussian_matrix(dim, &mut rng_from_seed(seed))
}

/// (G + G†)/2 for a complex Gaussian G.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    random_complex_matrix(dim, seed).hermitian_part()
}

pub(crate) fn density_from_rng<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(dim, rng);
    let w = g.matmul(&g.adjoint()).hermitian_part();
    let tr = w.trace().re;
    DensityMatrix::new_unchecked(w.scale(1.0 / tr))
}

/// G·G†/tr(G·G†) for a seeded complex Gaussian G.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1);
    density_from_rng(dim, &mut rng_from_seed(seed))
}

pub(crate) fn observable_from_rng<R: Rng>(dim: usize, rng: &mut R) -> Observable {
    let h = gaussian_matrix(dim, rng).hermitian_part();
    let eig = jacobi(h.clone(), Default::default());
    let norm = eig.max().abs().max(eig.min().abs());
    if norm == 0.0 {
        return Observable::new_unchecked(ComplexMatrix::identity(dim).scale(0.5));
    }
    let mut shifted = h;
    for i in 0..dim {
        shifted[(i, i)] += norm;
    }
    Observable::new_unchecked(shifted.scale(1.0 / (2.0 * norm)))
}

/// (H + ‖H‖·I)/(2‖H‖) for a seeded Hermitian Gaussian H; spectrum in [0, 1].
pub fn random_observable(dim: usize, seed: u64) -> Observable {
    assert!(dim >= 1);
    observable_from_rng(dim, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::eigen::eigh;

    #[test]
    fn density_invariants() {
        let rho = random_density(2, 42);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn observable_spectrum_in_unit_interval() {
        let r = random_observable(4, 7);
        let eig = eigh(r.matrix()).unwrap();
        assert!(eig.min() >= -1e-9 && eig.max() <= 1.0 + 1e-9);
    }

    #[test]
    fn determinism_and_distinctness() {
        let mut total = 0.0;
        for s in 0..100u64 {
            let a = random_density(3, s);
            let b = random_density(3, s);
            assert_eq!(a, b);
            let a_bits: Vec<u64> = a.matrix().as_slice().iter().map(|z| z.re.to_bits()).collect();
            let b_bits: Vec<u64> = b.matrix().as_slice().iter().map(|z| z.re.to_bits()).collect();
            assert_eq!(a_bits, b_bits);
            let c = random_density(3, s + 1000);
            total += a.matrix().max_abs_diff(c.matrix());
            assert_eq!(random_observable(3, s), random_observable(3, s));
        }
        assert!(total / 100.0 > 1e-3);
    }
}
