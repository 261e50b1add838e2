//! Validated density matrices and observables.

use serde::{Deserialize, Serialize};

use super::eigen::eigh;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::input(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::input(format!("density matrix trace {tr} is not 1")));
        }
        let min = eigh(&mat)?.min();
        if min < -PSD_TOL {
            return Err(Error::input(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix {
            mat: mat.hermitian_part(),
        })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn new_unchecked(mat: ComplexMatrix) -> Self {
        DensityMatrix { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::basis_projector(dim, index),
        }
    }

    /// Pure state |v⟩⟨v| of a unit vector.
    pub fn pure(v: &[num_complex::Complex64]) -> Self {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let m = ComplexMatrix::outer(v).scale(1.0 / norm2);
        DensityMatrix { mat: m }
    }

    /// Qubit state (I + r·σ)/2 from a Bloch vector with |r| ≤ 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::input(format!("Bloch vector norm {norm} exceeds 1")));
        }
        use num_complex::Complex64 as C;
        let m = ComplexMatrix::from_row_major(
            2,
            vec![
                C::new((1.0 + r[2]) / 2.0, 0.0),
                C::new(r[0] / 2.0, -r[1] / 2.0),
                C::new(r[0] / 2.0, r[1] / 2.0),
                C::new((1.0 - r[2]) / 2.0, 0.0),
            ],
        )?;
        Ok(DensityMatrix { mat: m })
    }

    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.mat.dim() != 2 {
            return None;
        }
        let off = self.mat[(1, 0)];
        Some([2.0 * off.re, 2.0 * off.im, (self.mat[(0, 0)] - self.mat[(1, 1)]).re])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Hermitian operator with 0 ⪯ R ⪯ I.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Observable {
    mat: ComplexMatrix,
}

impl Observable {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::input(format!("observable not Hermitian ({herm:.3e})")));
        }
        let eig = eigh(&mat)?;
        if eig.min() < -PSD_TOL || eig.max() > 1.0 + PSD_TOL {
            return Err(Error::input(format!(
                "observable spectrum [{:.3e}, {:.3e}] not within [0, 1]",
                eig.min(),
                eig.max()
            )));
        }
        Ok(Observable {
            mat: mat.hermitian_part(),
        })
    }

    pub(crate) fn new_unchecked(mat: ComplexMatrix) -> Self {
        Observable { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Observable {
            mat: ComplexMatrix::identity(dim),
        }
    }

    /// I − R, the reject operator.
    pub fn complement(&self) -> Observable {
        let n = self.mat.dim();
        Observable {
            mat: &ComplexMatrix::identity(n) - &self.mat,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        Observable::new(m).map_err(serde::de::Error::custom)
    }
}
