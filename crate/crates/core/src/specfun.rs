//! Special functions and closed-form GUE partition functions and rates.
//!
//! Everything that can overflow is carried in log scale: Hermite functions
//! and Laguerre polynomials are evaluated by normalized upward recurrences,
//! the Bessel ratio I₂/I₁ by a continued fraction (small argument) or the
//! Hankel asymptotic series (large argument).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_ql;

/// Below this argument I₂/I₁ is evaluated by continued fraction.
const BESSEL_ASYMPTOTIC_FROM: f64 = 40.0;
/// Above this argument the semicircle rate bracket uses its 1/x expansion.
const RATE_ASYMPTOTIC_FROM: f64 = 100.0;
const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

/// Physicists' Hermite polynomial Hₗ(x) by the raw recurrence.
///
/// Overflows for moderately large `l`/`x`; use [`hermite_phi`] there.
pub fn hermite_h(l: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if l == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..l {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Runs the normalized Hermite-function recurrence up to order `l_max`,
/// calling `visit(l, mantissa, log_scale)` with φₗ(x) = mantissa · e^{log_scale}.
fn hermite_phi_walk(l_max: usize, x: f64, mut visit: impl FnMut(usize, f64, f64, f64)) {
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    visit(0, cur, log_scale, 1.0);
    for l in 0..l_max {
        let lf = l as f64;
        let next = (2.0 / (lf + 1.0)).sqrt() * x * cur - (lf / (lf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mut rescale = 1.0;
        let mag = cur.abs().max(prev.abs());
        if mag > RESCALE_HIGH || (mag < RESCALE_LOW && mag > 0.0) {
            rescale = mag;
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
        visit(l + 1, cur, log_scale, rescale);
    }
}

/// Normalized Hermite function φₗ(x) = e^{−x²/2} Hₗ(x) / √(√π 2ˡ l!).
pub fn hermite_phi(l: usize, x: f64) -> f64 {
    let mut out = 0.0;
    hermite_phi_walk(l, x, |k, m, s, _| {
        if k == l {
            out = m * s.exp();
        }
    });
    out
}

/// Σ_{l<d} φₗ(x)², the averaged GUE level density for weight e^{−tr X²}.
pub(crate) fn hermite_phi_sq_sum(d: usize, x: f64) -> f64 {
    // sum of mantissa² under the current scale
    let mut sum = 0.0;
    let mut log_scale = 0.0;
    hermite_phi_walk(d - 1, x, |_, m, s, rescale| {
        if rescale != 1.0 {
            sum /= rescale * rescale;
        }
        log_scale = s;
        sum += m * m;
    });
    if sum == 0.0 {
        0.0
    } else {
        (sum.ln() + 2.0 * log_scale).exp()
    }
}

/// Generalized Laguerre polynomial L_n^{(α)}(x) by the three-term recurrence.
pub fn laguerre_l(n: usize, alpha: u32, x: f64) -> f64 {
    let (ln_abs, sign) = ln_laguerre_l(n, alpha, x);
    sign * ln_abs.exp()
}

/// (ln |L_n^{(α)}(x)|, sign). The recurrence is renormalized at every step,
/// so the result is finite whenever the true log is.
pub fn ln_laguerre_l(n: usize, alpha: u32, x: f64) -> (f64, f64) {
    let a = alpha as f64;
    let mut prev = 1.0;
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > 0.0 && mag.is_finite() {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
    }
    if cur == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (log_scale + cur.abs().ln(), cur.signum())
    }
}

fn require_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive and finite, got {x}")))
    }
}

/// Terms of the Hankel expansion Σ (−1)^k a_k(ν) / x^k of e^{−x}√(2πx) I_ν(x).
fn bessel_i_asymptotic_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// g(x) = I₂(x)/I₁(x) for x > 0.
pub fn bessel_i_ratio_g(x: f64) -> Result<f64> {
    require_positive(x, "Bessel ratio argument")?;
    if x < 1e-8 {
        return Ok(0.25 * x * (1.0 - x * x / 24.0));
    }
    if x >= BESSEL_ASYMPTOTIC_FROM {
        return Ok(bessel_i_asymptotic_sum(2.0, x) / bessel_i_asymptotic_sum(1.0, x));
    }
    // I_{ν+1}/I_ν = 1/(b₁ + 1/(b₂ + …)), b_k = 2(ν + k)/x, modified Lentz
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..10_000 {
        let b = 2.0 * (1.0 + k as f64) / x;
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(Error::numerical(format!("Bessel continued fraction did not converge at x = {x}")))
}

/// ln I₁(x) for x > 0.
pub fn ln_bessel_i1(x: f64) -> Result<f64> {
    require_positive(x, "Bessel argument")?;
    if x < BESSEL_ASYMPTOTIC_FROM {
        // I₁(x) = (x/2) Σ_k (x²/4)^k / (k! (k+1)!)
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..500 {
            let kf = k as f64;
            term *= q / (kf * (kf + 1.0));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok((0.5 * x).ln() + sum.ln())
    } else {
        Ok(x - 0.5 * (2.0 * PI * x).ln() + bessel_i_asymptotic_sum(1.0, x).ln())
    }
}

/// A positive partition function carried as its logarithm, optionally with
/// the normalized analytic continuation Z(β − iy)/Z(β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValue {
    pub log_value: f64,
    pub complex_value: Option<Complex64>,
}

impl PartitionValue {
    pub fn real(log_value: f64) -> Self {
        Self { log_value, complex_value: None }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// ln Σ exp(xᵢ) with the maximum shifted out.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Z(β) = Σ e^{−βEₖ} of an explicit spectrum.
pub fn partition_spectral(eigenvalues: &[f64], beta: f64) -> PartitionValue {
    PartitionValue::real(log_sum_exp(eigenvalues.iter().map(|e| -beta * e)))
}

/// Z(β) together with Z(β − iy)/Z(β).
pub fn partition_spectral_continued(eigenvalues: &[f64], beta: f64, y: f64) -> PartitionValue {
    let log_z = log_sum_exp(eigenvalues.iter().map(|e| -beta * e));
    let ratio: Complex64 = eigenvalues
        .iter()
        .map(|&e| Complex64::from_polar((-beta * e - log_z).exp(), y * e))
        .sum();
    PartitionValue { log_value: log_z, complex_value: Some(ratio) }
}

fn require_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::domain("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// ⟨Z(β)⟩ over the GUE at finite d: e^{β²/4} L_{d−1}^{(1)}(−β²/2).
pub fn z_gue_exact(beta: f64, d: usize) -> Result<PartitionValue> {
    require_dim(d)?;
    if !beta.is_finite() {
        return Err(Error::domain("beta must be finite"));
    }
    let (ln_l, _) = ln_laguerre_l(d - 1, 1, -0.5 * beta * beta);
    Ok(PartitionValue::real(0.25 * beta * beta + ln_l))
}

/// Semicircle approximation √(2d) I₁(√(2d) β)/β; `d` may be astronomically large.
pub fn z_gue_semicircle(beta: f64, d: f64) -> Result<PartitionValue> {
    if !(d >= 1.0 && d.is_finite()) {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta must be non-negative"));
    }
    if beta == 0.0 {
        return Ok(PartitionValue::real(d.ln()));
    }
    let s = (2.0 * d).sqrt();
    Ok(PartitionValue::real(s.ln() + ln_bessel_i1(s * beta)? - beta.ln()))
}

/// 4γ d²/dβ² ln⟨Z(β)⟩ with ⟨Z⟩ the finite-d GUE average, via Laguerre ratios
/// F_1^{(m)} = L_{d−m}^{(m)}/L_{d−1}^{(1)} at x = −β²/2.
pub fn rate_tfd_gue_exact(beta: f64, d: usize, gamma: f64) -> Result<f64> {
    require_dim(d)?;
    require_positive(gamma, "gamma")?;
    if !beta.is_finite() {
        return Err(Error::domain("beta must be finite"));
    }
    let x = -0.5 * beta * beta;
    let (ln_base, _) = ln_laguerre_l(d - 1, 1, x);
    let ratio = |m: usize| -> f64 {
        if d < m {
            0.0
        } else {
            let (ln_num, sign) = ln_laguerre_l(d - m, m as u32, x);
            sign * (ln_num - ln_base).exp()
        }
    };
    let f2 = ratio(2);
    let f3 = ratio(3);
    let b2 = beta * beta;
    let rate = 2.0 * gamma * (1.0 + 2.0 * f2 - 2.0 * b2 * f2 * f2 + 2.0 * b2 * f3);
    if !rate.is_finite() {
        return Err(Error::numerical(format!("Laguerre ratio breakdown at beta = {beta}, d = {d}")));
    }
    Ok(rate)
}

/// Semicircle TFD rate 8γd[1 − 3g(x)/x − g(x)²], x = √(2d) β.
///
/// `d` is a float so that dimensions such as 2⁵⁰ can be passed exactly.
pub fn rate_tfd_gue_semicircle(beta: f64, d: f64, gamma: f64) -> Result<f64> {
    if !(d >= 1.0 && d.is_finite()) {
        return Err(Error::domain("dimension must be at least 1"));
    }
    require_positive(gamma, "gamma")?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta must be non-negative"));
    }
    if beta == 0.0 {
        return Ok(2.0 * gamma * d);
    }
    let x = (2.0 * d).sqrt() * beta;
    let bracket = if x < RATE_ASYMPTOTIC_FROM {
        let g = bessel_i_ratio_g(x)?;
        1.0 - 3.0 * g / x - g * g
    } else {
        // 1 − 3g/x − g² = (ln I₁)'' + 1/x² expanded in y = 1/x
        const COEFFS: [f64; 8] = [
            1.5,
            -0.75,
            -1.125,
            -63.0 / 32.0,
            -135.0 / 32.0,
            -5697.0 / 512.0,
            -567.0 / 16.0,
            -543_483.0 / 4096.0,
        ];
        let y = 1.0 / x;
        let poly = COEFFS.iter().rev().fold(0.0, |acc, c| acc * y + c);
        poly * y * y
    };
    Ok(8.0 * gamma * d * bracket)
}

/// β_c = √(3/d), the crossover between the 2γd and 6γ/β² regimes.
pub fn beta_crossover(d: f64) -> f64 {
    (3.0 / d).sqrt()
}

/// Gauss–Hermite nodes and weights for ∫ e^{−x²} f(x) dx (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("quadrature needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (0.5 * k as f64).sqrt()).collect();
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut nodes, &off, Some(&mut z))?;
    let weights = (0..n).map(|j| PI.sqrt() * z[j] * z[j]).collect();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_base_cases() {
        assert_eq!(hermite_h(0, 0.7), 1.0);
        assert_eq!(hermite_h(1, 0.7), 1.4);
        // H₃(x) = 8x³ − 12x
        assert_relative_eq!(hermite_h(3, 0.7), 8.0 * 0.343 - 8.4, epsilon = 1e-14);
    }

    #[test]
    fn hermite_phi_matches_polynomial_form() {
        let fact = |l: usize| (1..=l).product::<usize>() as f64;
        for l in 0..8 {
            for &x in &[-2.0f64, -0.3, 0.0, 1.1, 3.5] {
                let direct = (-0.5 * x * x).exp() * hermite_h(l, x)
                    / (PI.sqrt() * 2f64.powi(l as i32) * fact(l)).sqrt();
                assert_relative_eq!(hermite_phi(l, x), direct, epsilon = 1e-13, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_phi_survives_underflowing_gaussian() {
        // e^{−x²/2} underflows at x = 40, φ_1500(40) does not
        let v = hermite_phi(1500, 40.0);
        assert!(v.is_finite() && v != 0.0);
        let sum = hermite_phi_sq_sum(2000, 40.0);
        assert!(sum.is_finite() && sum > 0.0);
    }

    #[test]
    fn hermite_phi_orthonormal_by_quadrature() {
        // Gauss–Hermite with 40 nodes integrates e^{−x²}·poly of degree ≤ 79 exactly
        let (x, w) = gauss_hermite(40).unwrap();
        for k in 0..=6 {
            for l in 0..=6 {
                let integral: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * (xi * xi).exp() * hermite_phi(k, xi) * hermite_phi(l, xi))
                    .sum();
                let expected = if k == l { 1.0 } else { 0.0 };
                assert!((integral - expected).abs() < 1e-12, "k={k} l={l} {integral}");
            }
        }
    }

    #[test]
    fn hermite_first_moment_identity() {
        // ∫ x e^{−x²} H_k H_l dx at (k, l) = (2, 3): only the δ_{l,k+1} term,
        // ½√π (k+1)! 2^{k+1} = ½√π · 6 · 8 = 24√π. x H₂ H₃ is a degree-6
        // polynomial, exact under a 10-node rule.
        let (x, w) = gauss_hermite(10).unwrap();
        let integral: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi * hermite_h(2, xi) * hermite_h(3, xi)).sum();
        assert_relative_eq!(integral, 24.0 * PI.sqrt(), max_relative = 1e-12);
        // (k, l) = (3, 2) picks the δ_{l,k−1} term: k√π (k−1)! 2^{k−1} = 3√π · 2 · 4
        assert_relative_eq!(integral, 3.0 * PI.sqrt() * 2.0 * 4.0, max_relative = 1e-12);
        // off-diagonal pairs vanish
        let zero: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi * hermite_h(2, xi) * hermite_h(4, xi)).sum();
        assert!(zero.abs() < 1e-10);
    }

    #[test]
    fn laguerre_closed_forms() {
        assert_eq!(laguerre_l(0, 3, 1.7), 1.0);
        assert_relative_eq!(laguerre_l(1, 1, 0.4), 2.0 - 0.4, epsilon = 1e-15);
        // L_2^{(0)}(x) = (x² − 4x + 2)/2
        assert_relative_eq!(laguerre_l(2, 0, 1.3), (1.69 - 5.2 + 2.0) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn laguerre_upper_index_sum_rule() {
        let (d, x) = (5, -0.5);
        let direct: f64 = (0..d).map(|l| laguerre_l(l, 0, x)).sum();
        assert_relative_eq!(laguerre_l(d - 1, 1, x), direct, max_relative = 1e-14);
    }

    #[test]
    fn laguerre_log_form_large_negative_argument() {
        let (ln_l, sign) = ln_laguerre_l(2000, 1, -500.0);
        assert_eq!(sign, 1.0);
        assert!(ln_l.is_finite() && ln_l > 700.0);
    }

    #[test]
    fn bessel_ratio_limits() {
        assert!((bessel_i_ratio_g(1e-6).unwrap() - 2.5e-7).abs() < 1e-13);
        let big = bessel_i_ratio_g(1e10).unwrap();
        assert!((big - (1.0 - 1.5e-10)).abs() < 1e-16);
        assert!(bessel_i_ratio_g(1e30).unwrap() <= 1.0);
        assert!(bessel_i_ratio_g(0.0).is_err());
        assert!(bessel_i_ratio_g(-1.0).is_err());
    }

    #[test]
    fn bessel_ratio_continuous_across_branch() {
        let below = bessel_i_ratio_g(BESSEL_ASYMPTOTIC_FROM * (1.0 - 1e-12)).unwrap();
        let above = bessel_i_ratio_g(BESSEL_ASYMPTOTIC_FROM).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-13);
        // d ln I₁/dx = g(x) + 1/x accounts for the step between the two points
        let x = BESSEL_ASYMPTOTIC_FROM;
        let h = x * 1e-12;
        let l_below = ln_bessel_i1(x - h).unwrap();
        let l_above = ln_bessel_i1(x).unwrap();
        let slope = above + 1.0 / x;
        assert!((l_above - l_below - h * slope).abs() < 2e-13);
    }

    #[test]
    fn bessel_ratio_matches_integral_representation() {
        // I_n(x) = (1/π) ∫₀^π e^{x cos θ} cos(nθ) dθ, composite Simpson oracle
        let x = 2.0;
        let i_n = |n: f64| {
            let m = 2000;
            let h = PI / m as f64;
            let f = |t: f64| (x * t.cos()).exp() * (n * t).cos();
            let mut s = f(0.0) + f(PI);
            for k in 1..m {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
            }
            s * h / 3.0 / PI
        };
        assert_relative_eq!(bessel_i_ratio_g(x).unwrap(), i_n(2.0) / i_n(1.0), max_relative = 1e-12);
        assert_relative_eq!(ln_bessel_i1(x).unwrap(), i_n(1.0).ln(), max_relative = 1e-12);
    }

    #[test]
    fn z_exact_limits() {
        for d in [1, 2, 7, 64] {
            assert_relative_eq!(z_gue_exact(0.0, d).unwrap().value(), d as f64, max_relative = 1e-14);
        }
        for beta in [0.1, 1.0, 3.0] {
            assert_relative_eq!(
                z_gue_exact(beta, 1).unwrap().log_value,
                beta * beta / 4.0,
                max_relative = 1e-14
            );
        }
        assert!(z_gue_exact(1.0, 0).is_err());
    }

    #[test]
    fn z_exact_matches_level_density_quadrature() {
        // ⟨Z(β)⟩ = ∫ ρ(v) e^{−βv} dv with ρ = Σ φₗ²; trapezoid on a wide grid
        let (beta, d) = (0.7, 6);
        let (a, b, m) = (-12.0, 12.0, 24_000);
        let h = (b - a) / m as f64;
        let integral: f64 = (0..=m)
            .map(|k| {
                let v = a + k as f64 * h;
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                w * hermite_phi_sq_sum(d, v) * (-beta * v).exp()
            })
            .sum::<f64>()
            * h;
        assert_relative_eq!(z_gue_exact(beta, d).unwrap().value(), integral, max_relative = 1e-10);
    }

    #[test]
    fn z_semicircle_limits() {
        assert_relative_eq!(z_gue_semicircle(0.0, 17.0).unwrap().value(), 17.0);
        assert_relative_eq!(z_gue_semicircle(1e-9, 17.0).unwrap().value(), 17.0, max_relative = 1e-9);
        let z = z_gue_semicircle(0.05, 1024.0).unwrap().value();
        let exact = z_gue_exact(0.05, 1024).unwrap().value();
        assert!((z / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn z_semicircle_large_beta_asymptotics() {
        // ln Z ≈ √(2d)β − (3/2) ln β + const: the second difference in ln β vanishes
        let d = 64.0f64;
        let s = (2.0 * d).sqrt();
        let resid = |b: f64| z_gue_semicircle(b, d).unwrap().log_value - s * b + 1.5 * b.ln();
        let c1 = resid(1e3);
        let c2 = resid(1e4);
        assert!((c1 - c2).abs() < 1e-3);
        let expected_const = 0.5 * (2.0 * d).ln() - 0.5 * (2.0 * PI * s).ln();
        assert!((c2 - expected_const).abs() < 1e-4);
    }

    #[test]
    fn rate_exact_high_temperature_two_levels() {
        // β → 0, d = 2: 2γ[1 + 2F] with F = L_0^{(2)}(0)/L_1^{(1)}(0) = 1/2
        assert_relative_eq!(rate_tfd_gue_exact(0.0, 2, 1.0).unwrap(), 4.0, max_relative = 1e-14);
        // 4γ × variance of the level density (second moment d²/2, divided by d)
        let (a, b, m) = (-10.0, 10.0, 20_000);
        let h = (b - a) / m as f64;
        let second: f64 = (0..=m)
            .map(|k| {
                let v = a + k as f64 * h;
                v * v * hermite_phi_sq_sum(2, v)
            })
            .sum::<f64>()
            * h
            / 2.0;
        assert_relative_eq!(rate_tfd_gue_exact(0.0, 2, 1.0).unwrap(), 4.0 * second, max_relative = 1e-10);
        assert_relative_eq!(rate_tfd_gue_exact(0.3, 1, 2.5).unwrap(), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn rate_exact_equals_second_log_derivative() {
        let (d, gamma) = (12, 1.0);
        for beta in [0.2, 0.9, 2.5] {
            let h = 1e-3;
            let lz = |b: f64| z_gue_exact(b, d).unwrap().log_value;
            let fd = (lz(beta + h) - 2.0 * lz(beta) + lz(beta - h)) / (h * h);
            assert_relative_eq!(rate_tfd_gue_exact(beta, d, gamma).unwrap(), 4.0 * fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn rate_semicircle_limits() {
        let gamma = 1.3;
        for log2d in [10.0, 50.0] {
            let d = 2f64.powf(log2d);
            let bc = beta_crossover(d);
            let hi = rate_tfd_gue_semicircle(bc / 100.0, d, gamma).unwrap();
            assert!((hi / (2.0 * gamma * d) - 1.0).abs() <= 1e-3);
            let lo_beta = 100.0 * bc;
            let lo = rate_tfd_gue_semicircle(lo_beta, d, gamma).unwrap();
            assert!((lo * lo_beta * lo_beta / (6.0 * gamma) - 1.0).abs() <= 1e-2);
        }
        assert_eq!(rate_tfd_gue_semicircle(0.0, 8.0, 1.0).unwrap(), 16.0);
    }

    #[test]
    fn rate_semicircle_fifty_qubits() {
        let d = 2f64.powi(50);
        let r = rate_tfd_gue_semicircle(1e-3, d, 1.0).unwrap();
        assert!((r / 6e6 - 1.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn rate_semicircle_continuous_at_expansion_switch() {
        let d = 50.0f64;
        let beta = RATE_ASYMPTOTIC_FROM / (2.0 * d).sqrt();
        let a = rate_tfd_gue_semicircle(beta * (1.0 - 1e-12), d, 1.0).unwrap();
        let b = rate_tfd_gue_semicircle(beta, d, 1.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn gauss_hermite_low_order() {
        let (x, w) = gauss_hermite(2).unwrap();
        let r = 0.5f64.sqrt();
        assert_relative_eq!(x[0], -r, epsilon = 1e-15);
        assert_relative_eq!(x[1], r, epsilon = 1e-15);
        assert_relative_eq!(w[0], PI.sqrt() / 2.0, epsilon = 1e-15);
        let (_, w) = gauss_hermite(60).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), PI.sqrt(), max_relative = 1e-13);
    }
}
