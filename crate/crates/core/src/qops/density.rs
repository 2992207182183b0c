use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{hermitian_eig, qubit_count, ComplexMatrix, QopsError};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite state of a qubit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = QopsError;

    fn try_from(m: ComplexMatrix) -> Result<Self, QopsError> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.matrix
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before wrapping `matrix`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QopsError> {
        if !matrix.is_square() {
            return Err(QopsError::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if qubit_count(matrix.rows()).is_none() {
            return Err(QopsError::InvalidDensity(format!(
                "dimension {} is not a power of two",
                matrix.rows()
            )));
        }
        let residual = matrix.hermiticity_residual();
        if residual >= HERMITIAN_TOL {
            return Err(QopsError::NotHermitian { residual });
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(QopsError::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let rho = DensityMatrix { matrix };
        let min = rho.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(QopsError::NegativeEigenvalue(min));
        }
        Ok(rho)
    }

    /// Wraps a matrix without checks. Used for integrator states and reduced
    /// states whose validity follows from construction.
    pub fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        DensityMatrix { matrix }
    }

    /// |ψ⟩⟨ψ| for a normalized ket.
    pub fn from_pure(psi: &[C64]) -> Result<Self, QopsError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(QopsError::InvalidDensity(format!("ket norm² {norm} differs from 1")));
        }
        Self::new(ComplexMatrix::outer(psi, psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// The basis projector |index⟩⟨index|.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix { matrix: m }
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_sites(&self) -> usize {
        qubit_count(self.dim()).expect("density matrix dimension is a power of two")
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64, QopsError> {
        let eig = hermitian_eig(&self.matrix)?;
        Ok(eig.values[0])
    }

    /// Mixture `p·self + (1-p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self, QopsError> {
        if self.dim() != other.dim() {
            return Err(QopsError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(DensityMatrix {
            matrix: &self.matrix.scale_real(p) + &other.matrix.scale_real(1.0 - p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_inputs() {
        let not_herm = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]);
        assert!(matches!(DensityMatrix::new(not_herm), Err(QopsError::NotHermitian { .. })));
        let bad_trace = ComplexMatrix::real_diagonal(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(QopsError::InvalidDensity(_))));
        let negative = ComplexMatrix::real_diagonal(&[1.1, -0.1]);
        assert!(matches!(DensityMatrix::new(negative), Err(QopsError::NegativeEigenvalue(_))));
        let odd = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(DensityMatrix::new(odd).is_err());
    }

    #[test]
    fn accepts_tiny_negative_eigenvalue() {
        let m = ComplexMatrix::real_diagonal(&[1.0 + 1e-9, -1e-9]);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn json_round_trip_validates() {
        let rho = DensityMatrix::maximally_mixed(4);
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);
        let bad = r#"{"rows":2,"cols":2,"entries":[[2,0],[0,0],[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<DensityMatrix>(bad).is_err());
    }
}
