//! Dense complex Hermitian linear algebra.

mod eigen;
mod matrix;
mod state;

use std::sync::OnceLock;

use num_complex::Complex64;

pub use eigen::{eigh, eigvalsh, tridiagonal_ql};
pub use matrix::ComplexMatrix;
pub(crate) use matrix::{inner, vec_norm};
pub use state::{modified_covariance, purity, variance, DensityState};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and the unitary whose columns are the eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralData {
    /// Spectrum known a priori in the computational basis.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::domain("eigenvalues must be finite and non-empty"));
        }
        let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let d = eigenvalues.len();
        let vecs = ComplexMatrix::from_fn(d, |i, j| {
            if idx[j] == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self { eigenvalues: idx.iter().map(|&i| eigenvalues[i]).collect(), eigenvectors: vecs })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// max_k ‖H v_k − E_k v_k‖₂
    pub fn max_residual(&self, h: &ComplexMatrix) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.eigenvectors.column(k);
                let hv = h.mul_vec(&v);
                hv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * self.eigenvalues[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Hermitian operator with a lazily computed, compute-once spectral cache.
#[derive(Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectral: OnceLock<std::result::Result<SpectralData, Error>>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let spectral = OnceLock::new();
        if let Some(s) = self.spectral.get() {
            let _ = spectral.set(s.clone());
        }
        Self { matrix: self.matrix.clone(), spectral }
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Validates Hermiticity to `1e-12 · max(1, ‖X‖_max)`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, rel_tol: f64) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::domain("operator entries must be finite"));
        }
        let deviation = matrix.hermiticity_defect();
        if deviation > rel_tol * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::new_unchecked(matrix))
    }

    /// Caller guarantees exact conjugate symmetry.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix, spectral: OnceLock::new() }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("diagonal must be finite and non-empty"));
        }
        let op = Self::new_unchecked(ComplexMatrix::from_diagonal(diag));
        let _ = op.spectral.set(SpectralData::diagonal(diag));
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim]).expect("identity is finite")
    }

    pub fn pauli_x() -> Self {
        Self::new_unchecked(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap())
    }

    pub fn pauli_y() -> Self {
        let (z, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        Self::new_unchecked(ComplexMatrix::from_vec(vec![z, -i, i, z]).unwrap())
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new_unchecked(self.matrix.scale_real(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::new_unchecked(self.matrix.kron(&other.matrix))
    }

    pub fn square(&self) -> Self {
        Self::new_unchecked(self.matrix.matmul(&self.matrix).hermitian_part())
    }

    /// Eigendecomposition, computed at most once per operator.
    pub fn spectral(&self) -> Result<&SpectralData> {
        self.spectral
            .get_or_init(|| eig_hermitian_matrix(&self.matrix))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Largest |eigenvalue|.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.spectral()?.spectral_norm())
    }
}

fn eig_hermitian_matrix(m: &ComplexMatrix) -> Result<SpectralData> {
    let (eigenvalues, eigenvectors) = eigh(m)?;
    Ok(SpectralData { eigenvalues, eigenvectors })
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<SpectralData> {
    h.spectral().cloned()
}

/// max |eigenvalue| of `x`.
pub fn spectral_norm(x: &HermitianOperator) -> Result<f64> {
    x.spectral_norm()
}
