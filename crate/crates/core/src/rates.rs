//! Decoherence-rate calculators.
//!
//! The rate of a dephasing process started from ρ₀ is
//! D = 2 Σ_μ γ_μ c̃ov(V_μ, V_μ) / tr ρ₀², the initial fractional decay rate of
//! the purity under ρ̇ = −i[H, ρ] − ½ Σ_μ γ_μ [V_μ, [V_μ, ρ]].

use num_complex::Complex64;

use crate::ensembles::{sample_gue, GueSpec};
use crate::error::{Error, Result};
use crate::linalg::{modified_covariance, purity, ComplexMatrix, DensityState, HermitianOperator};
use crate::rng::RngStream;
use crate::specfun::log_sum_exp;
use crate::stats::{par_map_indexed, EnsembleEstimate};

/// One dephasing channel (γ, V).
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    gamma: f64,
    v: HermitianOperator,
}

impl LindbladChannel {
    pub fn new(gamma: f64, v: HermitianOperator) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("channel rate must be finite and non-negative, got {gamma}")));
        }
        Ok(Self { gamma, v })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn v(&self) -> &HermitianOperator {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }
}

/// Γ = Σ_μ γ_μ
pub fn total_gamma(channels: &[LindbladChannel]) -> f64 {
    channels.iter().map(|c| c.gamma).sum()
}

/// D = 2 Σ_μ γ_μ c̃ov(V_μ, V_μ) / tr ρ₀².
pub fn decoherence_rate(rho0: &DensityState, channels: &[LindbladChannel]) -> Result<f64> {
    let p = purity(rho0);
    if p <= 0.0 {
        return Err(Error::InvalidState("state has zero purity".into()));
    }
    let mut acc = 0.0;
    for c in channels {
        Error::check_dim(rho0.dim(), c.dim())?;
        if c.gamma == 0.0 {
            continue;
        }
        acc += c.gamma * modified_covariance(rho0, &c.v, &c.v)?.re;
    }
    Ok(2.0 * acc / p)
}

/// GUE-averaged rate as stated in closed form: Γd²/(d+1).
pub fn rate_gue_paper(d: usize, total_gamma: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let d = d as f64;
    Ok(total_gamma * d * d / (d + 1.0))
}

/// GUE-averaged rate from the entrywise second moments ⟨tr V²⟩ = d²/2 and
/// ⟨(tr V)²⟩ = d/2: Γ(d − 1/tr ρ₀²). Equals Γ(d−1) for pure states.
pub fn rate_gue_wick(d: usize, total_gamma: f64, purity0: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if !(purity0 > 0.0 && purity0 <= 1.0 + 1e-10) {
        return Err(Error::domain(format!("purity must lie in (0, 1], got {purity0}")));
    }
    Ok(total_gamma * (d as f64 - 1.0 / purity0))
}

/// Monte-Carlo GUE average of the rate for a single channel (γ, V), V ~ GUE.
/// Sample i uses stream (master_seed, i).
pub fn rate_gue_mc(rho0: &DensityState, gamma: f64, n_samples: usize, master_seed: u64) -> Result<EnsembleEstimate> {
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let spec = GueSpec::new(rho0.dim())?;
    let rates: Vec<Result<f64>> = par_map_indexed(n_samples, |i| {
        let v = sample_gue(spec, RngStream::new(master_seed, i as u64));
        decoherence_rate(rho0, &[LindbladChannel::new(gamma, v)?])
    });
    let rates = rates.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(EnsembleEstimate::from_samples(&rates, master_seed))
}

/// All-to-all k-body σᶻ-string operator ε Σ_{l₁<…<l_k} σᶻ_{l₁}⋯σᶻ_{l_k}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KBodySpec {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
}

/// Largest n for which the diagonal is materialized.
pub const KBODY_MAX_N: usize = 24;

impl KBodySpec {
    pub fn new(n: usize, k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("locality k must be at least 1"));
        }
        if k > n {
            return Err(Error::domain(format!("locality k = {k} exceeds qubit count n = {n}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("amplitude must be positive, got {epsilon}")));
        }
        Ok(Self { n, k, epsilon })
    }

    /// ‖V‖ = ε C(n, k)
    pub fn norm(&self) -> f64 {
        self.epsilon * binomial(self.n, self.k)
    }
}

/// Diagonal k-body operator; entry b belongs to the spin configuration with
/// s_l = +1 when bit (n−1−l) of b is clear.
#[derive(Debug, Clone, PartialEq)]
pub struct KBodyOperator {
    pub n: usize,
    pub diagonal: Vec<f64>,
}

impl KBodyOperator {
    pub fn to_hermitian(&self) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&self.diagonal).expect("finite diagonal")
    }

    pub fn spectral_norm(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Pure-state variance ⟨V²⟩ − ⟨V⟩², O(2ⁿ).
    pub fn variance_pure(&self, psi: &[Complex64]) -> Result<f64> {
        Error::check_dim(self.diagonal.len(), psi.len())?;
        let (mut m1, mut m2) = (0.0, 0.0);
        for (x, a) in self.diagonal.iter().zip(psi) {
            let p = a.norm_sqr();
            m1 += p * x;
            m2 += p * x * x;
        }
        Ok(m2 - m1 * m1)
    }
}

/// e_k(s₁, …, s_n) by the recurrence e_j ← e_j + s_m e_{j−1}.
pub fn elementary_symmetric(s: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in s {
        for j in (1..=k.min(s.len())).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

pub fn build_kbody_operator(spec: KBodySpec) -> Result<KBodyOperator> {
    if spec.n > KBODY_MAX_N {
        return Err(Error::domain(format!("n = {} exceeds the dense limit {KBODY_MAX_N}", spec.n)));
    }
    let n = spec.n;
    let mut s = vec![0.0; n];
    let diagonal = (0..1usize << n)
        .map(|b| {
            for (l, sl) in s.iter_mut().enumerate() {
                *sl = if (b >> (n - 1 - l)) & 1 == 0 { 1.0 } else { -1.0 };
            }
            spec.epsilon * elementary_symmetric(&s, spec.k)
        })
        .collect();
    Ok(KBodyOperator { n, diagonal })
}

/// C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Which form of ‖V‖² enters the k-body bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// n^{2k}/(k!)², the large-n form
    Approx,
    /// C(n, k)²
    ExactBinomial,
}

/// Upper bound 2γ‖V‖² on the k-body rate (‖Λ‖ = 1 for σᶻ strings).
pub fn rate_kbody_bound(spec: KBodySpec, gamma: f64, mode: BoundMode) -> f64 {
    let norm_sq = match mode {
        BoundMode::Approx => (spec.n as f64).powi(2 * spec.k as i32) / factorial(spec.k).powi(2),
        BoundMode::ExactBinomial => binomial(spec.n, spec.k).powi(2),
    };
    2.0 * gamma * spec.epsilon * spec.epsilon * norm_sq
}

/// ε² making the GUE rate at d = 2^{n₀} equal the k-body bound at n₀.
pub fn calibrate_epsilon(n0: usize, k: usize, gamma: f64, mode: BoundMode) -> Result<f64> {
    if n0 >= 64 {
        return Err(Error::domain("n₀ must be below 64"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain("γ must be positive"));
    }
    let unit = rate_kbody_bound(KBodySpec::new(n0, k, 1.0)?, gamma, mode);
    Ok(rate_gue_paper(1usize << n0, gamma)? / unit)
}

/// Upper end of the crossover scan.
pub const CROSSOVER_SCAN_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossover {
    /// smallest n such that D_GUE(2^m) > D_k-body(m) for every n ≤ m ≤ scan end
    At(usize),
    /// the k-body bound still reaches the GUE rate at n = scanned_to
    Absent { scanned_to: usize },
}

impl Crossover {
    pub fn n_min(self) -> Option<usize> {
        match self {
            Crossover::At(n) => Some(n),
            Crossover::Absent { .. } => None,
        }
    }
}

fn gue_rate_qubits(n: usize, gamma: f64) -> f64 {
    let d = 2f64.powi(n as i32);
    gamma * d * d / (d + 1.0)
}

/// Smallest n ≥ k from which the GUE rate strictly exceeds the k-body bound for
/// all larger n up to `CROSSOVER_SCAN_MAX`.
///
/// With exact binomials the bound is tiny near n = k (C(k, k) = 1), so the GUE
/// curve starts above it, drops below, and overtakes it for good later on; the
/// final overtaking is the crossover.
pub fn crossover_min_n(k: usize, epsilon_sq: f64, mode: BoundMode) -> Result<Crossover> {
    if !(epsilon_sq > 0.0 && epsilon_sq.is_finite()) {
        return Err(Error::domain("ε² must be positive"));
    }
    let eps = epsilon_sq.sqrt();
    let start = k.max(1);
    let mut n_min = start;
    for n in start..=CROSSOVER_SCAN_MAX {
        let bound = rate_kbody_bound(KBodySpec::new(n, k, eps)?, 1.0, mode);
        if gue_rate_qubits(n, 1.0) <= bound {
            n_min = n + 1;
        }
    }
    if n_min > CROSSOVER_SCAN_MAX {
        return Ok(Crossover::Absent { scanned_to: CROSSOVER_SCAN_MAX });
    }
    Ok(Crossover::At(n_min))
}

/// GUE rate γ4ⁿ/(2ⁿ+1) on n qubits (no dimension cap).
pub fn rate_gue_paper_qubits(n: usize, gamma: f64) -> f64 {
    gue_rate_qubits(n, gamma)
}

/// Spin chain with random nearest-neighbour two-body couplings and fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbreSpec {
    pub n: usize,
    /// standard deviation of the couplings A_{l,α,α'}
    pub coupling_sd: f64,
    /// standard deviation of the fields B_{l,α}
    pub field_sd: f64,
}

pub const TBRE_MAX_N: usize = 12;

impl TbreSpec {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=TBRE_MAX_N).contains(&n) {
            return Err(Error::domain(format!("chain length must be in 2..={TBRE_MAX_N}, got {n}")));
        }
        Ok(Self { n, coupling_sd: 1.0, field_sd: 1.0 })
    }

    /// 162γ(n−1)²
    pub fn bound(&self, gamma: f64) -> f64 {
        162.0 * gamma * ((self.n - 1) as f64).powi(2)
    }
}

/// Action of σ^α on a single qubit: |b⟩ ↦ phase |b'⟩.
fn pauli_action(alpha: usize, bit: usize) -> (usize, Complex64) {
    match alpha {
        0 => (bit ^ 1, Complex64::new(1.0, 0.0)),
        1 => (bit ^ 1, if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }),
        _ => (bit, if bit == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) }),
    }
}

/// Adds c · (product of σ^{α_j} on sites j) to `m`. Site l is bit (n−1−l).
fn add_pauli_string(m: &mut ComplexMatrix, n: usize, ops: &[(usize, usize)], c: f64) {
    for col in 0..1usize << n {
        let mut row = col;
        let mut phase = Complex64::new(c, 0.0);
        for &(site, alpha) in ops {
            let shift = n - 1 - site;
            let (nb, ph) = pauli_action(alpha, (row >> shift) & 1);
            row = (row & !(1 << shift)) | (nb << shift);
            phase *= ph;
        }
        m[(row, col)] += phase;
    }
}

/// V = Σ_l Σ_{α,α'} σ_l^α σ_{l+1}^{α'} (open chain).
pub fn tbre_lindblad(n: usize) -> Result<HermitianOperator> {
    TbreSpec::new(n)?;
    let mut m = ComplexMatrix::zeros(1 << n);
    for l in 0..n - 1 {
        for a in 0..3 {
            for b in 0..3 {
                add_pauli_string(&mut m, n, &[(l, a), (l + 1, b)], 1.0);
            }
        }
    }
    HermitianOperator::new(m)
}

/// One draw of H₀ = Σ A σ_l^α σ_{l+1}^{α'} + Σ B σ_l^α with normal couplings.
pub fn tbre_hamiltonian(spec: TbreSpec, stream: RngStream) -> Result<HermitianOperator> {
    let n = spec.n;
    let mut rng = stream.rng();
    let mut m = ComplexMatrix::zeros(1 << n);
    for l in 0..n - 1 {
        for a in 0..3 {
            for b in 0..3 {
                let c = spec.coupling_sd * crate::ensembles::normal(&mut rng);
                add_pauli_string(&mut m, n, &[(l, a), (l + 1, b)], c);
            }
        }
    }
    for l in 0..n {
        for a in 0..3 {
            let c = spec.field_sd * crate::ensembles::normal(&mut rng);
            add_pauli_string(&mut m, n, &[(l, a)], c);
        }
    }
    HermitianOperator::new(m)
}

/// (rate with the coupling-noise Lindblad operator, bound 162γ(n−1)²).
pub fn tbre_rate_and_bound(spec: TbreSpec, rho0: &DensityState, gamma: f64) -> Result<(f64, f64)> {
    let v = tbre_lindblad(spec.n)?;
    let rate = decoherence_rate(rho0, &[LindbladChannel::new(gamma, v)?])?;
    Ok((rate, spec.bound(gamma)))
}

/// Energy-dephasing rate 4γ var_β(H₀) of H₀ = ε Σ_{l<m} σᶻ_l σᶻ_m, from the
/// sector spectrum E_j = ε[(n−2j)² − n]/2 with multiplicity C(n, j).
pub fn rate_lmg(n: usize, epsilon: f64, beta: f64, gamma: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("LMG model needs n ≥ 2"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("β must be finite and non-negative, got {beta}")));
    }
    let energies: Vec<f64> = (0..=n)
        .map(|j| {
            let m = n as f64 - 2.0 * j as f64;
            epsilon * (m * m - n as f64) / 2.0
        })
        .collect();
    let log_w: Vec<f64> = energies
        .iter()
        .enumerate()
        .map(|(j, e)| binomial(n, j).ln() - beta * e)
        .collect();
    let lz = log_sum_exp(log_w.iter().copied());
    let probs: Vec<f64> = log_w.iter().map(|l| (l - lz).exp()).collect();
    let mean: f64 = probs.iter().zip(&energies).map(|(p, e)| p * e).sum();
    let var: f64 = probs.iter().zip(&energies).map(|(p, e)| p * (e - mean).powi(2)).sum();
    Ok(4.0 * gamma * var)
}
