use dephase_lab::dynamics::{build_tfd, purity_tfd};
use dephase_lab::ensembles::{sample_gue, sample_haar_unitary, GueSpec};
use dephase_lab::linalg::{eigh, modified_covariance, purity, spectral_norm, variance};
use dephase_lab::rates::{decoherence_rate, LindbladChannel};
use dephase_lab::specfun::{partition_spectral, rate_tfd_gue_semicircle};
use dephase_lab::{Complex64, ComplexMatrix, DensityState, HermitianOperator, RngStream, SpectralData};
use proptest::prelude::*;

fn gue(d: usize, seed: u64) -> HermitianOperator {
    sample_gue(GueSpec::new(d).unwrap(), RngStream::new(seed, 0))
}

fn mixed_state(d: usize, seed: u64) -> DensityState {
    let u = sample_haar_unitary(d, RngStream::new(seed, 1)).unwrap();
    let w: Vec<f64> = (0..d).map(|i| 1.0 / (1.0 + i as f64 + (seed % 7) as f64)).collect();
    let total: f64 = w.iter().sum();
    let diag = ComplexMatrix::from_fn(d, |i, j| if i == j { Complex64::new(w[i] / total, 0.0) } else { Complex64::new(0.0, 0.0) });
    DensityState::mixed(u.matmul(&diag).matmul(&u.adjoint()).hermitian_part()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_reconstructs(d in 1usize..12, seed in any::<u64>()) {
        let h = gue(d, seed);
        let (e, u) = eigh(h.matrix()).unwrap();
        let diag = ComplexMatrix::from_fn(d, |i, j| if i == j { Complex64::new(e[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        let back = u.matmul(&diag).matmul(&u.adjoint());
        prop_assert!(back.max_abs_diff(h.matrix()) < 1e-10 * (1.0 + spectral_norm(&h).unwrap()));
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn variance_bounded_by_norm(d in 1usize..10, seed in any::<u64>()) {
        let x = gue(d, seed);
        let rho = mixed_state(d, seed ^ 0xabc);
        let v = variance(&rho, &x).unwrap();
        let n = spectral_norm(&x).unwrap();
        prop_assert!(v >= -1e-12 && v <= n * n * (1.0 + 1e-12));
    }

    #[test]
    fn modified_covariance_is_nonnegative(d in 1usize..10, seed in any::<u64>()) {
        let x = gue(d, seed);
        let rho = mixed_state(d, seed ^ 0x123);
        let c = modified_covariance(&rho, &x, &x).unwrap();
        prop_assert!(c.re >= -1e-12);
        prop_assert!(c.im.abs() < 1e-12);
    }

    #[test]
    fn rate_scales_linearly_in_gamma(d in 2usize..8, seed in any::<u64>(), g in 0.01f64..5.0) {
        let v = gue(d, seed);
        let rho = mixed_state(d, seed ^ 0x55);
        let r1 = decoherence_rate(&rho, &[LindbladChannel::new(1.0, v.clone()).unwrap()]).unwrap();
        let rg = decoherence_rate(&rho, &[LindbladChannel::new(g, v).unwrap()]).unwrap();
        prop_assert!(r1 >= -1e-12);
        prop_assert!((rg - g * r1).abs() <= 1e-10 * (1.0 + rg.abs()));
        prop_assert!(purity(&rho) <= 1.0 + 1e-12);
    }

    #[test]
    fn log_partition_is_convex_in_beta(d in 1usize..16, seed in any::<u64>(), beta in -3.0f64..3.0, h in 0.01f64..0.5) {
        let e = SpectralData::diagonal(&dephase_lab::linalg::eigvalsh(gue(d, seed).matrix()).unwrap()).unwrap();
        let f = |b: f64| partition_spectral(&e.eigenvalues, b).log_value;
        prop_assert!(f(beta + h) + f(beta - h) - 2.0 * f(beta) >= -1e-10);
    }

    #[test]
    fn tfd_purity_non_increasing(d in 2usize..10, seed in any::<u64>(), beta in 0.0f64..2.0, t in 0.0f64..3.0, dt in 0.0f64..1.0) {
        let e = dephase_lab::linalg::eigvalsh(gue(d, seed).matrix()).unwrap();
        let sys = build_tfd(SpectralData::diagonal(&e).unwrap(), beta, 1.0).unwrap();
        let p0 = purity_tfd(&sys, t).unwrap();
        let p1 = purity_tfd(&sys, t + dt).unwrap();
        prop_assert!(p1 <= p0 + 1e-12);
        prop_assert!(p1 >= 1.0 / (d * d) as f64 - 1e-12);
    }

    #[test]
    fn semicircle_rate_decreases_with_beta(log2d in 2.0f64..60.0, beta in 1e-6f64..10.0) {
        let d = 2f64.powf(log2d);
        let a = rate_tfd_gue_semicircle(beta, d, 1.0).unwrap();
        let b = rate_tfd_gue_semicircle(beta * 1.1, d, 1.0).unwrap();
        prop_assert!(a.is_finite() && a > 0.0);
        prop_assert!(b <= a * (1.0 + 1e-12));
    }
}
