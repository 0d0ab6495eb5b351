//! Thermofield-double dephasing, purity decay, and a Runge–Kutta integrator
//! for the dephasing master equation.
//!
//! A TFD state is stored in its Schmidt representation: ρ_t = Σ c_{kℓ}(t)
//! |k⟩|k⟩⟨ℓ|⟨ℓ| with |k⟩ the eigenbasis of H, which is closed under energy
//! dephasing of both copies.

use num_complex::Complex64;

use crate::ensembles::{sample_gue, GueSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, ComplexMatrix, DensityState, HermitianOperator, SpectralData};
use crate::rates::LindbladChannel;
use crate::rng::RngStream;
use crate::specfun::{gauss_hermite, log_sum_exp, partition_spectral, partition_spectral_continued, z_gue_exact};
use crate::stats::{par_map_indexed, EnsembleEstimate, Welford};

/// Upper limit for dt·(‖H₀‖ + Σγ‖V‖²) accepted by [`master_equation_rk4`].
pub const RK4_STEP_LIMIT: f64 = 0.05;

/// Spectrum of H together with the TFD weights at inverse temperature β.
#[derive(Debug, Clone, PartialEq)]
pub struct TfdSystem {
    pub spectral: SpectralData,
    pub beta: f64,
    pub gamma: f64,
    log_z: f64,
    weights: Vec<f64>,
}

impl TfdSystem {
    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    /// ln Z(β)
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// w_k = e^{−βE_k/2}/√Z
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Gibbs probabilities w_k²
    pub fn gibbs(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * w).collect()
    }
}

pub fn build_tfd(spectral: SpectralData, beta: f64, gamma: f64) -> Result<TfdSystem> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("β must be finite and non-negative, got {beta}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("γ must be finite and non-negative, got {gamma}")));
    }
    if spectral.eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::domain("spectrum contains non-finite values"));
    }
    let log_z = partition_spectral(&spectral.eigenvalues, beta).log_value;
    let weights = spectral.eigenvalues.iter().map(|e| (-0.5 * (beta * e + log_z)).exp()).collect();
    Ok(TfdSystem { spectral, beta, gamma, log_z, weights })
}

/// Coefficients c_{kℓ}(t) of the TFD density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TfdDensity {
    pub coefficients: ComplexMatrix,
}

impl TfdDensity {
    pub fn purity(&self) -> f64 {
        self.coefficients.as_slice().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.coefficients.trace().re
    }

    /// Embeds the coefficients into the d²-dimensional product space, index k·d + ℓ.
    pub fn to_product_matrix(&self) -> ComplexMatrix {
        let d = self.coefficients.dim();
        let mut m = ComplexMatrix::zeros(d * d);
        for k in 0..d {
            for l in 0..d {
                m[(k * d + k, l * d + l)] = self.coefficients[(k, l)];
            }
        }
        m
    }
}

fn require_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || t.is_nan() {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

/// c_{kℓ}(t) = w_k w_ℓ exp(−2it(E_k − E_ℓ) − γt(E_k − E_ℓ)²)
pub fn evolve_tfd(sys: &TfdSystem, t: f64) -> Result<TfdDensity> {
    require_time(t)?;
    let e = sys.eigenvalues();
    let w = &sys.weights;
    let coefficients = ComplexMatrix::from_fn(sys.dim(), |k, l| {
        let gap = e[k] - e[l];
        let mag = w[k] * w[l] * (-sys.gamma * t * gap * gap).exp();
        Complex64::from_polar(mag, -2.0 * t * gap)
    });
    Ok(TfdDensity { coefficients })
}

/// P_t = Z⁻² Σ_{kℓ} exp(−β(E_k + E_ℓ) − 2γt(E_k − E_ℓ)²)
pub fn purity_tfd(sys: &TfdSystem, t: f64) -> Result<f64> {
    require_time(t)?;
    let e = sys.eigenvalues();
    let p = sys.gibbs();
    let mut total = 0.0;
    for k in 0..e.len() {
        let mut row = 0.0;
        for l in 0..e.len() {
            let gap = e[k] - e[l];
            row += p[l] * (-2.0 * sys.gamma * t * gap * gap).exp();
        }
        total += p[k] * row;
    }
    Ok(total)
}

/// t → ∞ purity Z(2β)/Z(β)² (the separable fixed point; nondegenerate spectrum).
pub fn purity_tfd_infinite(sys: &TfdSystem) -> f64 {
    let lz2 = partition_spectral(sys.eigenvalues(), 2.0 * sys.beta).log_value;
    (lz2 - 2.0 * sys.log_z).exp()
}

/// Purity from the Gaussian-integral form
/// P_t = π^{−1/2} ∫ e^{−u²} |Z(β − i√(8γt)u)/Z(β)|² du, by Gauss–Hermite quadrature.
pub fn purity_tfd_hs(sys: &TfdSystem, t: f64, quadrature_nodes: usize) -> Result<f64> {
    require_time(t)?;
    if t == 0.0 || sys.gamma == 0.0 {
        return Err(Error::domain("the Gaussian representation degenerates at γt = 0; use purity_tfd"));
    }
    let (nodes, weights) = gauss_hermite(quadrature_nodes)?;
    let scale = (8.0 * sys.gamma * t).sqrt();
    let e = sys.eigenvalues();
    let sum: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&u, &w)| {
            let r = partition_spectral_continued(e, sys.beta, scale * u).complex_value.expect("continued value");
            w * r.norm_sqr()
        })
        .sum();
    Ok(sum / std::f64::consts::PI.sqrt())
}

/// D̃ = 4γ var_β(H)
pub fn rate_tfd(sys: &TfdSystem) -> f64 {
    4.0 * sys.gamma * gibbs_variance(sys.eigenvalues(), &sys.gibbs())
}

fn gibbs_variance(e: &[f64], p: &[f64]) -> f64 {
    let mean: f64 = e.iter().zip(p).map(|(x, q)| x * q).sum();
    e.iter().zip(p).map(|(x, q)| q * (x - mean).powi(2)).sum()
}

/// GUE ensemble averages of the TFD purity curve.
#[derive(Debug, Clone)]
pub struct TfdEnsemble {
    pub times: Vec<f64>,
    pub purity: Vec<EnsembleEstimate>,
    pub purity_inf: EnsembleEstimate,
    pub rate: EnsembleEstimate,
}

pub const TFD_ENSEMBLE_MAX_QUBITS: usize = 10;

/// ⟨P_t⟩ over GUE Hamiltonians on n qubits; sample i uses stream (seed, i), so
/// different β share the same Hamiltonians for a given seed.
pub fn ensemble_purity_tfd(
    n_qubits: usize,
    beta: f64,
    gamma: f64,
    times: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<TfdEnsemble> {
    if n_qubits == 0 || n_qubits > TFD_ENSEMBLE_MAX_QUBITS {
        return Err(Error::domain(format!("qubit count must be in 1..={TFD_ENSEMBLE_MAX_QUBITS}")));
    }
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    for &t in times {
        require_time(t)?;
    }
    let spec = GueSpec::new(1 << n_qubits)?;
    let per: Vec<Result<(Vec<f64>, f64, f64)>> = par_map_indexed(n_samples, |i| {
        let h = sample_gue(spec, RngStream::new(master_seed, i as u64));
        let sys = build_tfd(SpectralData::diagonal(&eigvalsh(h.matrix())?)?, beta, gamma)?;
        let curve = times.iter().map(|&t| purity_tfd(&sys, t)).collect::<Result<Vec<f64>>>()?;
        Ok((curve, purity_tfd_infinite(&sys), rate_tfd(&sys)))
    });
    let mut acc = vec![Welford::default(); times.len()];
    let (mut inf, mut rate) = (Welford::default(), Welford::default());
    for r in per {
        let (curve, p_inf, d) = r?;
        for (a, p) in acc.iter_mut().zip(curve) {
            a.push(p);
        }
        inf.push(p_inf);
        rate.push(d);
    }
    Ok(TfdEnsemble {
        times: times.to_vec(),
        purity: acc.iter().map(|a| a.estimate(master_seed)).collect(),
        purity_inf: inf.estimate(master_seed),
        rate: rate.estimate(master_seed),
    })
}

/// Quenched versus annealed averages of ln Z over the GUE.
#[derive(Debug, Clone, Copy)]
pub struct AnnealingCheck {
    /// ⟨ln Z(β)⟩
    pub mean_ln_z: EnsembleEstimate,
    /// ln ⟨Z(β)⟩ from the same samples
    pub ln_mean_z: f64,
    /// ln ⟨Z(β)⟩ from the closed-form Laguerre expression
    pub ln_mean_z_exact: f64,
    /// 4γ d²/dβ² ⟨ln Z⟩ = 4γ ⟨var_β(H)⟩, per unit γ
    pub rate_quenched: EnsembleEstimate,
    /// 4 d²/dβ² ln⟨Z⟩ from the sampled moments of Z, per unit γ
    pub rate_annealed_mc: f64,
    /// closed-form annealed rate per unit γ
    pub rate_annealed_exact: f64,
}

impl AnnealingCheck {
    /// ⟨ln Z⟩ ≤ ln⟨Z⟩ + k·stderr, evaluated on the sampled ⟨Z⟩.
    pub fn jensen_holds(&self, k: f64) -> bool {
        self.mean_ln_z.mean <= self.ln_mean_z + k * self.mean_ln_z.stderr + 1e-12 * self.ln_mean_z.abs().max(1.0)
    }

    /// |quenched − annealed| / quenched, with the closed-form annealed rate.
    pub fn relative_rate_gap(&self) -> f64 {
        (self.rate_quenched.mean - self.rate_annealed_exact).abs() / self.rate_quenched.mean
    }
}

pub fn annealing_check(beta: f64, d: usize, n_samples: usize, master_seed: u64) -> Result<AnnealingCheck> {
    if n_samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain("β must be finite and non-negative"));
    }
    let spec = GueSpec::new(d)?;
    // per sample: ln Z, Gibbs mean ⟨E⟩, Gibbs second moment ⟨E²⟩
    let per: Vec<Result<(f64, f64, f64)>> = par_map_indexed(n_samples, |i| {
        let h = sample_gue(spec, RngStream::new(master_seed, i as u64));
        let e = eigvalsh(h.matrix())?;
        let lz = partition_spectral(&e, beta).log_value;
        let (mut m1, mut m2) = (0.0, 0.0);
        for x in &e {
            let p = (-beta * x - lz).exp();
            m1 += p * x;
            m2 += p * x * x;
        }
        Ok((lz, m1, m2))
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let ln_z: Vec<f64> = per.iter().map(|p| p.0).collect();
    let var: Vec<f64> = per.iter().map(|p| 4.0 * (p.2 - p.1 * p.1)).collect();
    // ⟨Z⟩, ⟨Z'⟩/⟨Z⟩ and ⟨Z''⟩/⟨Z⟩ with a common shift for stability
    let ln_sum = log_sum_exp(ln_z.iter().copied());
    let ln_mean_z = ln_sum - (n_samples as f64).ln();
    let (mut a1, mut a2) = (0.0, 0.0);
    for (lz, m1, m2) in &per {
        let w = (lz - ln_sum).exp();
        a1 += w * m1;
        a2 += w * m2;
    }
    let rate_annealed_mc = 4.0 * (a2 - a1 * a1);
    Ok(AnnealingCheck {
        mean_ln_z: EnsembleEstimate::from_samples(&ln_z, master_seed),
        ln_mean_z,
        ln_mean_z_exact: z_gue_exact(beta, d)?.log_value,
        rate_quenched: EnsembleEstimate::from_samples(&var, master_seed),
        rate_annealed_mc,
        rate_annealed_exact: crate::specfun::rate_tfd_gue_exact(beta, d, 1.0)?,
    })
}

/// −i[H, ρ] − ½ Σ γ [V, [V, ρ]]
pub fn lindblad_rhs(h0: &HermitianOperator, channels: &[LindbladChannel], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = h0.matrix().commutator(rho).scale(Complex64::new(0.0, -1.0));
    for c in channels {
        let v = c.v().matrix();
        let inner = v.commutator(rho);
        out.axpy(Complex64::new(-0.5 * c.gamma(), 0.0), &v.commutator(&inner));
    }
    out
}

/// Fixed-step RK4 for the dephasing master equation; returns steps + 1 states
/// (including ρ₀). Refuses steps with dt·(‖H₀‖ + Σγ‖V‖²) > [`RK4_STEP_LIMIT`].
pub fn master_equation_rk4(
    h0: &HermitianOperator,
    channels: &[LindbladChannel],
    rho0: &DensityState,
    dt: f64,
    steps: usize,
) -> Result<Vec<DensityState>> {
    let d = rho0.dim();
    Error::check_dim(d, h0.dim())?;
    for c in channels {
        Error::check_dim(d, c.dim())?;
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("time step must be positive"));
    }
    let mut stiffness = h0.spectral_norm()?;
    for c in channels {
        stiffness += c.gamma() * c.v().spectral_norm()?.powi(2);
    }
    if dt * stiffness > RK4_STEP_LIMIT {
        return Err(Error::domain(format!(
            "step too large: dt·(‖H₀‖ + Σγ‖V‖²) = {:.3e} exceeds {RK4_STEP_LIMIT}; use dt ≤ {:.3e}",
            dt * stiffness,
            RK4_STEP_LIMIT / stiffness
        )));
    }
    let f = |r: &ComplexMatrix| lindblad_rhs(h0, channels, r);
    let mut rho = rho0.to_matrix();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(DensityState::mixed_unchecked(rho.clone()));
    let half = Complex64::new(0.5 * dt, 0.0);
    for _ in 0..steps {
        let k1 = f(&rho);
        let mut tmp = rho.clone();
        tmp.axpy(half, &k1);
        let k2 = f(&tmp);
        let mut tmp = rho.clone();
        tmp.axpy(half, &k2);
        let k3 = f(&tmp);
        let mut tmp = rho.clone();
        tmp.axpy(Complex64::new(dt, 0.0), &k3);
        let k4 = f(&tmp);
        let sixth = Complex64::new(dt / 6.0, 0.0);
        rho.axpy(sixth, &k1);
        rho.axpy(sixth * 2.0, &k2);
        rho.axpy(sixth * 2.0, &k3);
        rho.axpy(sixth, &k4);
        rho = rho.hermitian_part();
        if !rho.is_finite() {
            return Err(Error::numerical("master-equation integration produced non-finite entries"));
        }
        out.push(DensityState::mixed_unchecked(rho.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{purity, spectral_norm};

    fn two_level(beta: f64, gamma: f64) -> TfdSystem {
        build_tfd(SpectralData::diagonal(&[0.0, 1.0]).unwrap(), beta, gamma).unwrap()
    }

    #[test]
    fn tfd_weights() {
        let s = two_level(1.0, 1.0);
        let z = 1.0 + (-1.0f64).exp();
        let p = s.gibbs();
        assert!((p[0] - 1.0 / z).abs() < 1e-15);
        assert!((p[1] - (-1.0f64).exp() / z).abs() < 1e-15);
        let s = build_tfd(SpectralData::diagonal(&[-1.0, 0.5, 2.0, 3.0]).unwrap(), 0.0, 1.0).unwrap();
        assert!(s.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
        let s = build_tfd(SpectralData::diagonal(&[-1.0, 0.5]).unwrap(), 800.0, 1.0).unwrap();
        assert!((s.weights()[0] - 1.0).abs() < 1e-15 && s.weights()[1] < 1e-200);
        assert!(build_tfd(SpectralData::diagonal(&[0.0]).unwrap(), -1.0, 1.0).is_err());
    }

    #[test]
    fn evolution_single_gap() {
        let s = two_level(0.0, 1.0);
        let rho = evolve_tfd(&s, 1.0).unwrap();
        assert!((rho.coefficients[(0, 1)].norm() - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert!((rho.coefficients[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        let r0 = evolve_tfd(&s, 0.0).unwrap();
        assert!((r0.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn purity_double_sum_matches_coefficients() {
        let s = build_tfd(SpectralData::diagonal(&[-1.3, -0.2, 0.4, 2.0]).unwrap(), 0.7, 0.9).unwrap();
        for t in [0.0, 0.1, 0.5, 3.0] {
            let a = purity_tfd(&s, t).unwrap();
            let b = evolve_tfd(&s, t).unwrap().purity();
            assert!((a - b).abs() < 1e-14);
        }
        assert!((purity_tfd(&s, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((purity_tfd(&s, 1e4).unwrap() - purity_tfd_infinite(&s)).abs() < 1e-12);
    }

    #[test]
    fn hs_quadrature_matches_double_sum() {
        let s = two_level(0.3, 1.0);
        let a = purity_tfd(&s, 0.5).unwrap();
        let b = purity_tfd_hs(&s, 0.5, 80).unwrap();
        assert!((a - b).abs() < 1e-8);
        let c = purity_tfd_hs(&s, 0.5, 160).unwrap();
        assert!((b - c).abs() < 1e-9);
        assert!(purity_tfd_hs(&s, 0.0, 40).is_err());
    }

    #[test]
    fn rate_from_variance() {
        let s = build_tfd(SpectralData::diagonal(&[-1.0, 1.0]).unwrap(), 0.0, 1.0).unwrap();
        assert!((rate_tfd(&s) - 4.0).abs() < 1e-15);
        let s = build_tfd(SpectralData::diagonal(&[2.0, 2.0, 2.0]).unwrap(), 0.3, 1.0).unwrap();
        assert!(rate_tfd(&s).abs() < 1e-14);
    }

    #[test]
    fn rate_matches_second_derivative_of_ln_z() {
        let e = [-1.7, -0.4, 0.1, 0.9, 2.5];
        let (beta, h) = (0.8, 1e-4);
        let lz = |b: f64| partition_spectral(&e, b).log_value;
        let fd = (lz(beta + h) - 2.0 * lz(beta) + lz(beta - h)) / (h * h);
        let s = build_tfd(SpectralData::diagonal(&e).unwrap(), beta, 1.0).unwrap();
        assert!((rate_tfd(&s) - 4.0 * fd).abs() <= 1e-5 * rate_tfd(&s));
    }

    #[test]
    fn annealing_scalar_case() {
        // ln Z = −βE is linear in E, so ⟨ln Z⟩ = 0 while ln⟨Z⟩ = β²/4
        let a = annealing_check(0.8, 1, 4000, 2).unwrap();
        assert!(a.mean_ln_z.within(0.0, 3.0), "{:?}", a.mean_ln_z);
        assert!((a.ln_mean_z - 0.16).abs() < 0.03);
        assert!((a.ln_mean_z_exact - 0.16).abs() < 1e-14);
        assert!(a.jensen_holds(0.0));
        assert!(annealing_check(0.8, 1, 1, 2).is_err());
    }

    #[test]
    fn rk4_pure_dephasing() {
        let ch = LindbladChannel::new(0.5, HermitianOperator::pauli_z()).unwrap();
        let h0 = HermitianOperator::new(ComplexMatrix::zeros(2)).unwrap();
        let plus = DensityState::plus_product(1);
        let traj = master_equation_rk4(&h0, &[ch], &plus, 0.01, 200).unwrap();
        for (i, rho) in traj.iter().enumerate() {
            let t = i as f64 * 0.01;
            let m = rho.to_matrix();
            assert!((m[(0, 1)].re - 0.5 * (-2.0 * 0.5 * t).exp()).abs() < 1e-9);
            assert!((m.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_unitary_and_refusal() {
        let h0 = HermitianOperator::pauli_x();
        let up = DensityState::basis(2, 0).unwrap();
        let traj = master_equation_rk4(&h0, &[], &up, 0.01, 300).unwrap();
        assert!(traj.iter().all(|r| (purity(r) - 1.0).abs() < 1e-8));
        let t = 3.0f64;
        let z = traj[300].to_matrix()[(0, 0)].re;
        assert!((z - t.cos().powi(2)).abs() < 1e-8);
        let ch = LindbladChannel::new(10.0, HermitianOperator::pauli_z()).unwrap();
        assert!(matches!(master_equation_rk4(&h0, &[ch], &up, 0.01, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn rk4_matches_tfd_solution() {
        let e = [-1.0, -0.3, 0.2, 1.1];
        let sys = build_tfd(SpectralData::diagonal(&e).unwrap(), 0.5, 1.0).unwrap();
        let h = HermitianOperator::from_real_diagonal(&e).unwrap();
        let id = HermitianOperator::identity(4);
        let hl = h.kron(&id);
        let hr = id.kron(&h);
        let h0 = HermitianOperator::new(hl.matrix() + hr.matrix()).unwrap();
        let chans = [LindbladChannel::new(1.0, hl).unwrap(), LindbladChannel::new(1.0, hr).unwrap()];
        let rho0 = DensityState::mixed(evolve_tfd(&sys, 0.0).unwrap().to_product_matrix()).unwrap();
        let stiff = spectral_norm(&h0).unwrap() + 2.0 * 1.1f64.powi(2);
        let dt = 0.04 / stiff;
        let steps = (0.5 / dt).ceil() as usize;
        let traj = master_equation_rk4(&h0, &chans, &rho0, dt, steps).unwrap();
        let exact = evolve_tfd(&sys, steps as f64 * dt).unwrap().to_product_matrix();
        assert!(traj[steps].to_matrix().max_abs_diff(&exact) < 1e-6);
    }
}
