use num_complex::Complex64;

use super::matrix::{inner, vec_norm, ComplexMatrix};
use super::{eigvalsh, HermitianOperator};
use crate::error::{Error, Result};

const STATE_TOL: f64 = 1e-10;

/// A quantum state, either a unit vector or a unit-trace PSD matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityState {
    Pure(Vec<Complex64>),
    Mixed(ComplexMatrix),
}

impl DensityState {
    /// Unit-norm vector, checked to 1e-10.
    pub fn pure(psi: Vec<Complex64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = vec_norm(&psi);
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self::Pure(psi))
    }

    /// Normalizes `psi` before wrapping it.
    pub fn pure_normalized(mut psi: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&psi);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        psi.iter_mut().for_each(|z| *z /= norm);
        Ok(Self::Pure(psi))
    }

    /// Computational basis state |k⟩.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::domain(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        psi[k] = Complex64::new(1.0, 0.0);
        Ok(Self::Pure(psi))
    }

    /// |+⟩^{⊗n}
    pub fn plus_product(n: usize) -> Self {
        let d = 1usize << n;
        let amp = Complex64::new((d as f64).sqrt().recip(), 0.0);
        Self::Pure(vec![amp; d])
    }

    /// Validates trace, Hermiticity and positivity (min eigenvalue ≥ −1e-10).
    pub fn mixed(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::InvalidState("non-finite density matrix".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if rho.hermiticity_defect() > STATE_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let min_eig = eigvalsh(&rho)?[0];
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig}")));
        }
        Ok(Self::Mixed(rho))
    }

    /// Wraps an integrator output without the positivity check.
    pub(crate) fn mixed_unchecked(rho: ComplexMatrix) -> Self {
        Self::Mixed(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::Mixed(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(psi) => psi.len(),
            Self::Mixed(rho) => rho.dim(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        match self {
            Self::Pure(psi) => ComplexMatrix::outer(psi, psi),
            Self::Mixed(rho) => rho.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Pure(psi) => vec_norm(psi).powi(2),
            Self::Mixed(rho) => rho.trace().re,
        }
    }

    /// tr(ρ X)
    pub fn expectation(&self, x: &ComplexMatrix) -> Result<Complex64> {
        Error::check_dim(self.dim(), x.dim())?;
        Ok(match self {
            Self::Pure(psi) => inner(psi, &x.mul_vec(psi)),
            Self::Mixed(rho) => rho.trace_product(x),
        })
    }
}

/// tr(ρ²); exactly 1 for the pure representation.
pub fn purity(rho: &DensityState) -> f64 {
    match rho {
        DensityState::Pure(_) => 1.0,
        DensityState::Mixed(m) => m.trace_product(m).re,
    }
}

/// Modified covariance tr(ρ²XY) − tr(ρXρY).
pub fn modified_covariance(
    rho: &DensityState,
    x: &HermitianOperator,
    y: &HermitianOperator,
) -> Result<Complex64> {
    Error::check_dim(rho.dim(), x.dim())?;
    Error::check_dim(rho.dim(), y.dim())?;
    Ok(match rho {
        DensityState::Pure(psi) => {
            let xpsi = x.matrix().mul_vec(psi);
            let ypsi = y.matrix().mul_vec(psi);
            // ⟨ψ|XY|ψ⟩ = ⟨X†ψ|Yψ⟩ with X Hermitian
            let xy = inner(&xpsi, &ypsi);
            let ex = inner(psi, &xpsi);
            let ey = inner(psi, &ypsi);
            xy - ex * ey
        }
        DensityState::Mixed(m) => {
            let rx = m.matmul(x.matrix());
            let ry = m.matmul(y.matrix());
            let rrx = m.matmul(&rx);
            rrx.trace_product(y.matrix()) - rx.trace_product(&ry)
        }
    })
}

/// var_ρ(X) = tr(ρX²) − tr(ρX)²
pub fn variance(rho: &DensityState, x: &HermitianOperator) -> Result<f64> {
    Error::check_dim(rho.dim(), x.dim())?;
    Ok(match rho {
        DensityState::Pure(psi) => {
            let xpsi = x.matrix().mul_vec(psi);
            let second = vec_norm(&xpsi).powi(2);
            let first = inner(psi, &xpsi).re;
            second - first * first
        }
        DensityState::Mixed(m) => {
            let rx = m.matmul(x.matrix());
            let second = rx.trace_product(x.matrix()).re;
            let first = rx.trace().re;
            second - first * first
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> DensityState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityState::pure(vec![c(h, 0.0), c(h, 0.0)]).unwrap()
    }

    #[test]
    fn purity_of_pure_and_maximally_mixed() {
        assert_eq!(purity(&plus()), 1.0);
        for d in [1, 2, 5, 16] {
            assert!((purity(&DensityState::maximally_mixed(d)) - 1.0 / d as f64).abs() < 1e-15);
        }
        let as_matrix = DensityState::mixed(plus().to_matrix()).unwrap();
        assert!((purity(&as_matrix) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thermal_state_purity() {
        let e = [0.0, 0.3, 1.7];
        let beta = 0.8;
        let z = |b: f64| e.iter().map(|x| (-b * x).exp()).sum::<f64>();
        let w: Vec<f64> = e.iter().map(|x| (-beta * x).exp() / z(beta)).collect();
        let rho = DensityState::mixed(ComplexMatrix::from_diagonal(&w)).unwrap();
        let expected = z(2.0 * beta) / z(beta).powi(2);
        assert!((purity(&rho) - expected).abs() < 1e-15);
    }

    #[test]
    fn covariance_reduces_to_variance_for_pure_states() {
        let psi = DensityState::pure_normalized(vec![c(1.0, 0.0), c(0.5, -0.5), c(0.0, 2.0)]).unwrap();
        let x = HermitianOperator::new(
            ComplexMatrix::from_fn(3, |i, j| c((i + j) as f64, i as f64 - j as f64)),
        )
        .unwrap();
        let cov = modified_covariance(&psi, &x, &x).unwrap();
        let var = variance(&psi, &x).unwrap();
        assert!(cov.im.abs() < 1e-12);
        assert!((cov.re - var).abs() < 1e-12);
        let mixed = DensityState::mixed(psi.to_matrix()).unwrap();
        let cov_m = modified_covariance(&mixed, &x, &x).unwrap();
        assert!((cov_m - cov).norm() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_fixed_point() {
        let z = HermitianOperator::pauli_z();
        let cov = modified_covariance(&DensityState::maximally_mixed(2), &z, &z).unwrap();
        assert!(cov.norm() < 1e-15);
    }

    #[test]
    fn covariance_matches_elementwise_oracle() {
        // ρ and X at d = 4 from a fixed pattern, compared with index sums
        let d = 4;
        let a = ComplexMatrix::from_fn(d, |i, j| c(((i * 3 + j) as f64 * 0.7).sin(), ((i + 2 * j) as f64).cos()));
        let mut rho = a.matmul(&a.adjoint());
        let tr = rho.trace().re;
        rho = rho.scale_real(1.0 / tr);
        let x = ComplexMatrix::from_fn(d, |i, j| c((i as f64 - j as f64).powi(2), i as f64 * 0.3 - j as f64 * 0.3));
        let y = ComplexMatrix::from_fn(d, |i, j| c(((i + j) as f64).sqrt(), 0.1 * (i as f64 - j as f64)));
        let mut t1 = c(0.0, 0.0);
        let mut t2 = c(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        t1 += rho[(i, j)] * rho[(j, k)] * x[(k, l)] * y[(l, i)];
                        t2 += rho[(i, j)] * x[(j, k)] * rho[(k, l)] * y[(l, i)];
                    }
                }
            }
        }
        let state = DensityState::mixed(rho).unwrap();
        let got = modified_covariance(
            &state,
            &HermitianOperator::new(x).unwrap(),
            &HermitianOperator::new(y).unwrap(),
        )
        .unwrap();
        assert!((got - (t1 - t2)).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let z = HermitianOperator::pauli_z();
        let err = modified_covariance(&DensityState::maximally_mixed(3), &z, &z).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(DensityState::pure(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(DensityState::mixed(ComplexMatrix::from_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityState::mixed(ComplexMatrix::from_diagonal(&[0.7, 0.7])).is_err());
    }
}
