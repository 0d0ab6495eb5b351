//! Stochastic Schrödinger unraveling of the dephasing master equation.
//!
//! Each trajectory follows the Itô equation
//! d|ψ⟩ = [−iH₀dt − iΣ√γ_μ V_μ dW_μ − ½Σγ_μ V_μ² dt]|ψ⟩
//! discretized by Euler–Maruyama; the noise average of |ψ⟩⟨ψ| solves
//! ρ̇ = −i[H₀, ρ] − ½Σγ_μ[V_μ, [V_μ, ρ]].

use num_complex::Complex64;

use crate::ensembles::normal;
use crate::error::{Error, Result};
use crate::linalg::{inner, vec_norm, ComplexMatrix, DensityState, HermitianOperator, SpectralData};
use crate::rates::LindbladChannel;
use crate::rng::RngStream;
use crate::stats::{par_map_indexed, EnsembleEstimate, Welford};

/// Upper limit for dt·Σγ‖V‖².
pub const SSE_STEP_LIMIT: f64 = 0.01;
/// Pre-renormalization norm below which a step is reported as a failure.
pub const NORM_COLLAPSE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub steps: usize,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub renormalize: bool,
    /// states are kept at steps that are multiples of this (and at the last step)
    pub record_every: usize,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, steps: usize, n_trajectories: usize, master_seed: u64) -> Self {
        Self { dt, steps, n_trajectories, master_seed, renormalize: true, record_every: 1 }
    }

    /// 10⁻³/(‖H₀‖ + Σγ‖V‖²)
    pub fn default_dt(h0: &HermitianOperator, channels: &[LindbladChannel]) -> Result<f64> {
        let s = h0.spectral_norm()? + noise_strength(channels)?;
        Ok(if s > 0.0 { 1e-3 / s } else { 1e-3 })
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn with_renormalize(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    /// Times of the recorded states.
    pub fn record_times(&self) -> Vec<f64> {
        self.record_steps().into_iter().map(|s| s as f64 * self.dt).collect()
    }

    fn record_steps(&self) -> Vec<usize> {
        let mut s: Vec<usize> = (0..=self.steps).step_by(self.record_every).collect();
        if *s.last().unwrap() != self.steps {
            s.push(self.steps);
        }
        s
    }

    fn validate(&self, channels: &[LindbladChannel]) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain("time step must be positive"));
        }
        if self.n_trajectories == 0 {
            return Err(Error::domain("need at least one trajectory"));
        }
        let s = noise_strength(channels)?;
        if self.dt * s > SSE_STEP_LIMIT {
            return Err(Error::domain(format!(
                "step too large: dt·Σγ‖V‖² = {:.3e} exceeds {SSE_STEP_LIMIT}",
                self.dt * s
            )));
        }
        Ok(())
    }
}

fn noise_strength(channels: &[LindbladChannel]) -> Result<f64> {
    let mut s = 0.0;
    for c in channels {
        s += c.gamma() * c.v().spectral_norm()?.powi(2);
    }
    Ok(s)
}

/// A single trajectory: recorded states and the per-step norms before renormalization.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub pre_norms: Vec<f64>,
}

struct Propagator {
    /// −iH₀ − ½Σγ V²
    drift: ComplexMatrix,
    /// √γ_μ V_μ
    noise: Vec<ComplexMatrix>,
}

impl Propagator {
    fn new(h0: &HermitianOperator, channels: &[LindbladChannel]) -> Self {
        let mut drift = h0.matrix().scale(Complex64::new(0.0, -1.0));
        let mut noise = Vec::with_capacity(channels.len());
        for c in channels {
            let v = c.v().matrix();
            drift.axpy(Complex64::new(-0.5 * c.gamma(), 0.0), &v.matmul(v));
            noise.push(v.scale_real(c.gamma().sqrt()));
        }
        Self { drift, noise }
    }
}

fn check_inputs(h0: &HermitianOperator, channels: &[LindbladChannel], psi0: &DensityState) -> Result<Vec<Complex64>> {
    let psi = match psi0 {
        DensityState::Pure(v) => v.clone(),
        DensityState::Mixed(_) => return Err(Error::InvalidState("trajectories need a pure initial state".into())),
    };
    Error::check_dim(psi.len(), h0.dim())?;
    for c in channels {
        Error::check_dim(psi.len(), c.dim())?;
    }
    Ok(psi)
}

fn run(prop: &Propagator, mut psi: Vec<Complex64>, cfg: &TrajectoryConfig, stream: RngStream) -> Result<Trajectory> {
    let mut rng = stream.rng();
    let sqdt = cfg.dt.sqrt();
    let record = cfg.record_steps();
    let mut next_record = 1;
    let mut states = Vec::with_capacity(record.len());
    states.push(psi.clone());
    let mut pre_norms = Vec::with_capacity(cfg.steps);
    let minus_i = Complex64::new(0.0, -1.0);
    for step in 1..=cfg.steps {
        let mut next = prop.drift.mul_vec(&psi);
        for z in next.iter_mut() {
            *z *= cfg.dt;
        }
        for v in &prop.noise {
            let dw = sqdt * normal(&mut rng);
            let vpsi = v.mul_vec(&psi);
            for (n, x) in next.iter_mut().zip(vpsi) {
                *n += minus_i * dw * x;
            }
        }
        for (n, p) in next.iter_mut().zip(&psi) {
            *n += p;
        }
        let norm = vec_norm(&next);
        if !(norm >= NORM_COLLAPSE) || !norm.is_finite() {
            return Err(Error::numerical(format!("trajectory norm collapsed to {norm:.3e} at step {step}; reduce dt")));
        }
        pre_norms.push(norm);
        if cfg.renormalize {
            next.iter_mut().for_each(|z| *z /= norm);
        }
        psi = next;
        if next_record < record.len() && record[next_record] == step {
            states.push(psi.clone());
            next_record += 1;
        }
    }
    Ok(Trajectory { times: cfg.record_times(), states, pre_norms })
}

/// One Euler–Maruyama trajectory driven by `stream`.
pub fn sse_trajectory(
    h0: &HermitianOperator,
    channels: &[LindbladChannel],
    psi0: &DensityState,
    cfg: &TrajectoryConfig,
    stream: RngStream,
) -> Result<Trajectory> {
    let psi = check_inputs(h0, channels, psi0)?;
    cfg.validate(channels)?;
    run(&Propagator::new(h0, channels), psi, cfg, stream)
}

/// Noise average of the recorded trajectory states.
#[derive(Debug, Clone)]
pub struct TrajectoryAverage {
    pub times: Vec<f64>,
    /// mean of |ψ⟩⟨ψ| at each recorded time
    pub mean: Vec<ComplexMatrix>,
    /// entrywise standard error of |mean| entries, row-major (real and imaginary combined)
    pub stderr: Vec<Vec<f64>>,
    /// unbiased estimate of tr ρ² at each recorded time
    pub purity: Vec<EnsembleEstimate>,
    pub n_trajectories: usize,
}

impl TrajectoryAverage {
    pub fn states(&self) -> Vec<DensityState> {
        self.mean.iter().map(|m| DensityState::mixed_unchecked(m.clone())).collect()
    }
}

/// Runs `cfg.n_trajectories` trajectories (stream index = trajectory index)
/// and averages them in index order.
pub fn average_trajectories(
    h0: &HermitianOperator,
    channels: &[LindbladChannel],
    psi0: &DensityState,
    cfg: &TrajectoryConfig,
) -> Result<TrajectoryAverage> {
    let psi = check_inputs(h0, channels, psi0)?;
    cfg.validate(channels)?;
    let prop = Propagator::new(h0, channels);
    let runs: Vec<Result<Trajectory>> = par_map_indexed(cfg.n_trajectories, |i| {
        run(&prop, psi.clone(), cfg, RngStream::new(cfg.master_seed, i as u64))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let d = psi.len();
    let n = cfg.n_trajectories as f64;
    let times = cfg.record_times();
    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut purity = Vec::with_capacity(times.len());
    for r in 0..times.len() {
        let mut sum = ComplexMatrix::zeros(d);
        let mut sq = vec![0.0; d * d];
        for run in &runs {
            let s = &run.states[r];
            let outer = ComplexMatrix::outer(s, s);
            for (k, z) in outer.as_slice().iter().enumerate() {
                sq[k] += z.norm_sqr();
            }
            sum = &sum + &outer;
        }
        let m = sum.scale_real(1.0 / n);
        let se = m
            .as_slice()
            .iter()
            .zip(&sq)
            .map(|(z, s2)| {
                if runs.len() < 2 {
                    0.0
                } else {
                    (((s2 / n) - z.norm_sqr()).max(0.0) / (n - 1.0)).sqrt()
                }
            })
            .collect();
        purity.push(purity_u_statistic(&m, runs.iter().map(|t| t.states[r].as_slice()), cfg.master_seed));
        mean.push(m);
        stderr.push(se);
    }
    Ok(TrajectoryAverage { times, mean, stderr, purity, n_trajectories: cfg.n_trajectories })
}

/// Unbiased tr ρ² from N pure samples: (N tr ρ̄² − 1)/(N − 1), with the
/// U-statistic standard error 2·sd(⟨ψᵢ|ρ̄|ψᵢ⟩)/√N.
fn purity_u_statistic<'a>(mean: &ComplexMatrix, states: impl Iterator<Item = &'a [Complex64]>, seed: u64) -> EnsembleEstimate {
    let mut h = Welford::default();
    for s in states {
        h.push(inner(s, &mean.mul_vec(s)).re);
    }
    let n = h.count() as f64;
    let p_hat = mean.trace_product(mean).re;
    if h.count() < 2 {
        return EnsembleEstimate { mean: p_hat, stderr: 0.0, n_samples: h.count(), master_seed: seed };
    }
    EnsembleEstimate {
        mean: (n * p_hat - 1.0) / (n - 1.0),
        stderr: 2.0 * h.sample_variance().sqrt() / n.sqrt(),
        n_samples: h.count(),
        master_seed: seed,
    }
}

/// Two copies of H, each dephased by its own white noise.
#[derive(Debug, Clone)]
pub struct TwoNoiseConfig {
    /// H ⊗ 𝟙 + 𝟙 ⊗ H in the eigenbasis of H
    pub h0: HermitianOperator,
    /// (γ, H ⊗ 𝟙) and (γ, 𝟙 ⊗ H)
    pub channels: Vec<LindbladChannel>,
    /// TFD state Σ w_k |k⟩|k⟩
    pub psi0: DensityState,
}

pub const TWO_NOISE_MAX_DIM: usize = 1 << 12;

pub fn tfd_two_noise_config(spectral: &SpectralData, beta: f64, gamma: f64) -> Result<TwoNoiseConfig> {
    let d = spectral.dim();
    if d * d > TWO_NOISE_MAX_DIM {
        return Err(Error::domain(format!("product dimension {} exceeds {TWO_NOISE_MAX_DIM}", d * d)));
    }
    let sys = crate::dynamics::build_tfd(spectral.clone(), beta, gamma)?;
    let e = sys.eigenvalues();
    let h = HermitianOperator::from_real_diagonal(e)?;
    let id = HermitianOperator::identity(d);
    let left = h.kron(&id);
    let right = id.kron(&h);
    let total: Vec<f64> = (0..d * d).map(|i| e[i / d] + e[i % d]).collect();
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, w) in sys.weights().iter().enumerate() {
        psi[k * d + k] = Complex64::new(*w, 0.0);
    }
    Ok(TwoNoiseConfig {
        h0: HermitianOperator::from_real_diagonal(&total)?,
        channels: vec![LindbladChannel::new(gamma, left)?, LindbladChannel::new(gamma, right)?],
        psi0: DensityState::pure_normalized(psi)?,
    })
}

/// Partial trace over the second factor of a d² × d² matrix.
pub fn partial_trace_second(m: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    Error::check_dim(d * d, m.dim())?;
    Ok(ComplexMatrix::from_fn(d, |i, j| (0..d).map(|k| m[(i * d + k, j * d + k)]).sum()))
}
