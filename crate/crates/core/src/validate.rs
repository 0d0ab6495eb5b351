//! Self-checks run by `dephase-lab validate`.
//!
//! Each check compares a computed quantity against an independent oracle and
//! reports the observed deviation next to the tolerance it was held to.

use std::fmt::Write as _;

use crate::dynamics::{build_tfd, master_equation_rk4, purity_tfd, purity_tfd_hs, purity_tfd_infinite, annealing_check};
use crate::ensembles::{haar_fourth_moment, haar_fourth_moment_closed_form, haar_second_moment, haar_second_moment_closed_form, sample_gue, GueSpec};
use crate::error::Result;
use crate::linalg::{eigvalsh, ComplexMatrix, DensityState, HermitianOperator, SpectralData};
use crate::rates::{binomial, build_kbody_operator, decoherence_rate, rate_lmg, KBodySpec, LindbladChannel};
use crate::rng::RngStream;
use crate::specfun::{beta_crossover, partition_spectral, rate_tfd_gue_exact, rate_tfd_gue_semicircle};
use crate::trajectories::{average_trajectories, TrajectoryConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    pub quick: bool,
    /// multiplies every tolerance; 1 is the default
    pub tolerance_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { seed: crate::rng::DEFAULT_SEED, quick: false, tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub observed: f64,
    pub tolerance: f64,
}

fn outcome(name: &'static str, observed: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome { name, passed: observed <= tolerance, observed, tolerance }
}

fn gue_spectrum(d: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    eigvalsh(sample_gue(GueSpec::new(d)?, RngStream::new(seed, index)).matrix())
}

pub fn run_validation(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    let s = opts.tolerance_scale;
    let seed = opts.seed;
    let mut out = Vec::new();

    // Haar moments at d = 3
    let haar_n = if opts.quick { 20_000 } else { 100_000 };
    let x1 = sample_gue(GueSpec::new(3)?, RngStream::new(RngStream::derive(seed, 1), 0));
    let x2 = sample_gue(GueSpec::new(3)?, RngStream::new(RngStream::derive(seed, 1), 1));
    let x3 = sample_gue(GueSpec::new(3)?, RngStream::new(RngStream::derive(seed, 1), 2));
    let est = haar_second_moment(&x1, haar_n, RngStream::derive(seed, 2))?;
    out.push(outcome("haar second moment (max z-score)", est.max_z_score(&haar_second_moment_closed_form(&x1)), 4.0 * s));
    let est = haar_fourth_moment(&x1, &x2, &x3, haar_n, RngStream::derive(seed, 3))?;
    let target = haar_fourth_moment_closed_form(&x1, &x2, &x3)?;
    out.push(outcome("haar fourth moment (max z-score)", est.max_z_score(&target), 4.0 * s));

    // Jensen: ⟨ln Z⟩ − ln⟨Z⟩ ≤ 0
    let mut worst: f64 = f64::NEG_INFINITY;
    for (i, (beta, d)) in [(0.1, 4), (0.5, 8), (1.0, 16), (2.0, 10), (3.0, 3)].iter().enumerate() {
        let a = annealing_check(*beta, *d, if opts.quick { 200 } else { 1000 }, RngStream::derive(seed, 10 + i as u64))?;
        worst = worst.max(a.mean_ln_z.mean - a.ln_mean_z);
    }
    out.push(outcome("jensen ⟨ln Z⟩ − ln⟨Z⟩", worst, 0.0));

    // trajectories vs analytic dephasing
    let n_traj = if opts.quick { 1000 } else { 4000 };
    let h0 = HermitianOperator::new(ComplexMatrix::zeros(2))?;
    let ch = vec![LindbladChannel::new(1.0, HermitianOperator::pauli_z())?];
    let plus = DensityState::plus_product(1);
    let cfg = TrajectoryConfig::new(1e-3, 2000, n_traj, RngStream::derive(seed, 20)).with_record_every(100);
    let avg = average_trajectories(&h0, &ch, &plus, &cfg)?;
    let dev = avg
        .times
        .iter()
        .zip(&avg.mean)
        .map(|(t, m)| (m[(0, 1)].norm() - 0.5 * (-2.0 * t).exp()).abs())
        .fold(0.0, f64::max);
    out.push(outcome("trajectory coherence vs e^{-2γt}", dev, 3.0 / (n_traj as f64).sqrt() * s));

    // Gaussian-integral purity vs double sum
    let spec = SpectralData::diagonal(&gue_spectrum(4, RngStream::derive(seed, 30), 0)?)?;
    let mut dev: f64 = 0.0;
    for beta in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let sys = build_tfd(spec.clone(), beta, 1.0)?;
        for gt in [0.05, 0.1, 0.25, 0.5, 1.0] {
            dev = dev.max((purity_tfd_hs(&sys, gt, 240)? - purity_tfd(&sys, gt)?).abs());
        }
    }
    out.push(outcome("purity Gaussian integral vs double sum", dev, 1e-8 * s));

    // long-time purity
    let mut dev: f64 = 0.0;
    for beta in [0.0, 0.5, 1.0] {
        let sys = build_tfd(spec.clone(), beta, 1.0)?;
        dev = dev.max((purity_tfd(&sys, 1e3)? - purity_tfd_infinite(&sys)).abs());
    }
    out.push(outcome("purity at γt = 10³ vs Z(2β)/Z(β)²", dev, 1e-6 * s));

    // master equation vs exact TFD coefficients
    let sys = build_tfd(spec.clone(), 0.5, 1.0)?;
    let h = HermitianOperator::from_real_diagonal(&spec.eigenvalues)?;
    let id = HermitianOperator::identity(4);
    let (hl, hr) = (h.kron(&id), id.kron(&h));
    let h0 = HermitianOperator::new(hl.matrix() + hr.matrix())?;
    let stiff = h0.spectral_norm()? + 2.0 * h.spectral_norm()?.powi(2);
    let t_end = if opts.quick { 0.5 } else { 2.0 };
    let dt = 0.04 / stiff;
    let steps = (t_end / dt).ceil() as usize;
    let rho0 = DensityState::mixed(crate::dynamics::evolve_tfd(&sys, 0.0)?.to_product_matrix())?;
    let chans = [LindbladChannel::new(1.0, hl)?, LindbladChannel::new(1.0, hr)?];
    let traj = master_equation_rk4(&h0, &chans, &rho0, dt, steps)?;
    let mut dev: f64 = 0.0;
    for (i, rho) in traj.iter().enumerate().step_by(25) {
        let exact = crate::dynamics::evolve_tfd(&sys, i as f64 * dt)?.to_product_matrix();
        dev = dev.max(rho.to_matrix().max_abs_diff(&exact));
    }
    out.push(outcome("master equation vs exact TFD evolution", dev, 1e-6 * s));

    // k-body rate on |+⟩^⊗n
    let mut dev: f64 = 0.0;
    for n in 1..=5 {
        for k in 1..=n {
            let spec = KBodySpec::new(n, k, 0.7)?;
            let v = build_kbody_operator(spec)?.to_hermitian();
            let r = decoherence_rate(&DensityState::plus_product(n), &[LindbladChannel::new(1.3, v)?])?;
            let exact = 2.0 * 1.3 * 0.49 * binomial(n, k);
            dev = dev.max((r - exact).abs() / exact);
        }
    }
    out.push(outcome("k-body rate on |+⟩^n vs 2γε²C(n,k)", dev, 1e-10 * s));

    // LMG sector spectrum vs enumeration
    let mut dev: f64 = 0.0;
    for n in 2..=if opts.quick { 8 } else { 12 } {
        let energies: Vec<f64> = (0..1usize << n)
            .map(|b| {
                let m = n as f64 - 2.0 * b.count_ones() as f64;
                (m * m - n as f64) / 2.0
            })
            .collect();
        for beta in [0.0, 0.3] {
            let lz = partition_spectral(&energies, beta).log_value;
            let (mut m1, mut m2) = (0.0, 0.0);
            for e in &energies {
                let p = (-beta * e - lz).exp();
                m1 += p * e;
                m2 += p * e * e;
            }
            let brute = 4.0 * (m2 - m1 * m1);
            dev = dev.max((rate_lmg(n, 1.0, beta, 1.0)? - brute).abs() / brute);
        }
    }
    out.push(outcome("LMG sector spectrum vs enumeration", dev, 1e-10 * s));

    // semicircle rate limits
    let mut dev: f64 = 0.0;
    for log2d in [10.0, 50.0] {
        let d = 2f64.powf(log2d);
        let bc = beta_crossover(d);
        let hi = rate_tfd_gue_semicircle(bc / 100.0, d, 1.0)?;
        let lo = rate_tfd_gue_semicircle(bc * 100.0, d, 1.0)?;
        dev = dev.max((hi / (2.0 * d) - 1.0).abs() / 1e-3);
        dev = dev.max((lo * (bc * 100.0).powi(2) / 6.0 - 1.0).abs() / 1e-2);
    }
    out.push(outcome("semicircle rate limits (fraction of allowance)", dev, 1.0 * s));

    // exact vs semicircle at high temperature
    let mut dev: f64 = 0.0;
    for d in 4..=256 {
        let a = rate_tfd_gue_exact(0.01, d, 1.0)?;
        let b = rate_tfd_gue_semicircle(0.01, d as f64, 1.0)?;
        dev = dev.max((a - b).abs() / a);
    }
    out.push(outcome("finite-d vs semicircle rate at β = 0.01", dev, 1e-2 * s));

    Ok(out)
}

pub fn format_report(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::new();
    let width = outcomes.iter().map(|o| o.name.chars().count()).max().unwrap_or(0);
    for o in outcomes {
        let pad = width - o.name.chars().count();
        let _ = writeln!(
            s,
            "{}  {}{}  observed {:.3e}  tolerance {:.3e}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            " ".repeat(pad),
            o.observed,
            o.tolerance
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(s, "{} checks, {} failed", outcomes.len(), failed);
    s
}
