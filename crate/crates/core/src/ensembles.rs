//! GUE and Haar sampling, the averaged GUE level density, and Monte-Carlo
//! checks of the unitary-group moment identities.
//!
//! GUE normalization is the weight exp(−tr X²): diagonal entries have
//! variance 1/2, off-diagonal real and imaginary parts variance 1/4 each, so
//! the spectrum fills [−√(2d), √(2d)] at large d.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::rng::RngStream;
use crate::specfun::hermite_phi_sq_sum;
use crate::stats::{par_map_indexed, EnsembleEstimate};

/// Samples per parallel work unit; fixed so reductions are thread-count independent.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GueSpec {
    pub dim: usize,
}

impl GueSpec {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("GUE dimension must be at least 1"));
        }
        Ok(Self { dim })
    }
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws one GUE matrix from an existing generator.
pub fn sample_gue_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let diag_sd = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(diag_sd * normal(rng), 0.0);
    }
    for i in 0..dim {
        for j in i + 1..dim {
            let z = Complex64::new(0.5 * normal(rng), 0.5 * normal(rng));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new_unchecked(m)
}

/// One GUE matrix drawn from `stream`.
pub fn sample_gue(spec: GueSpec, stream: RngStream) -> HermitianOperator {
    sample_gue_from(spec.dim, &mut stream.rng())
}

/// Haar unitary from an existing generator: Gram–Schmidt (applied twice) on
/// a complex Ginibre matrix, which leaves R with a positive real diagonal.
pub fn sample_haar_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| Complex64::new(sd * normal(rng), sd * normal(rng))).collect())
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[k];
                let proj: Complex64 = q.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qi) in rest[0].iter_mut().zip(q) {
                    *x -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

pub fn sample_haar_unitary(dim: usize, stream: RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::domain("unitary dimension must be at least 1"));
    }
    Ok(sample_haar_from(dim, &mut stream.rng()))
}

/// Entrywise Monte-Carlo mean of a matrix-valued quantity.
#[derive(Debug, Clone)]
pub struct MatrixEstimate {
    pub mean: ComplexMatrix,
    /// standard errors of the real and imaginary parts, row-major
    pub stderr_re: Vec<f64>,
    pub stderr_im: Vec<f64>,
    pub n_samples: usize,
}

impl MatrixEstimate {
    /// Largest |mean − target| / stderr over real and imaginary parts.
    /// Entries whose deviation is at round-off level count as zero.
    pub fn max_z_score(&self, target: &ComplexMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, (m, t)) in self.mean.as_slice().iter().zip(target.as_slice()).enumerate() {
            for (diff, se) in [(m.re - t.re, self.stderr_re[k]), (m.im - t.im, self.stderr_im[k])] {
                if diff.abs() <= 1e-12 {
                    continue;
                }
                worst = worst.max(if se > 0.0 { diff.abs() / se } else { f64::INFINITY });
            }
        }
        worst
    }
}

#[derive(Clone)]
struct MomentSums {
    n: usize,
    sum: Vec<Complex64>,
    sum_sq_re: Vec<f64>,
    sum_sq_im: Vec<f64>,
}

impl MomentSums {
    fn new(len: usize) -> Self {
        Self { n: 0, sum: vec![Complex64::new(0.0, 0.0); len], sum_sq_re: vec![0.0; len], sum_sq_im: vec![0.0; len] }
    }

    fn push(&mut self, m: &ComplexMatrix) {
        self.n += 1;
        for (k, z) in m.as_slice().iter().enumerate() {
            self.sum[k] += z;
            self.sum_sq_re[k] += z.re * z.re;
            self.sum_sq_im[k] += z.im * z.im;
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.n += other.n;
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sum_sq_re[k] += other.sum_sq_re[k];
            self.sum_sq_im[k] += other.sum_sq_im[k];
        }
        self
    }

    fn finish(self, dim: usize) -> MatrixEstimate {
        let n = self.n as f64;
        let se = |sum: f64, sq: f64| {
            if self.n < 2 {
                return 0.0;
            }
            let mean = sum / n;
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        let stderr_re = (0..self.sum.len()).map(|k| se(self.sum[k].re, self.sum_sq_re[k])).collect();
        let stderr_im = (0..self.sum.len()).map(|k| se(self.sum[k].im, self.sum_sq_im[k])).collect();
        let mean = ComplexMatrix::from_vec(self.sum.iter().map(|z| z / n).collect())
            .expect("square by construction");
        debug_assert_eq!(mean.dim(), dim);
        MatrixEstimate { mean, stderr_re, stderr_im, n_samples: self.n }
    }
}

/// Mean of `f(U)` over `n_samples` Haar unitaries (stream index = sample index).
fn haar_average(
    dim: usize,
    n_samples: usize,
    master_seed: u64,
    f: impl Fn(&ComplexMatrix) -> ComplexMatrix + Sync + Send,
) -> Result<MatrixEstimate> {
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<MomentSums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = MomentSums::new(dim * dim);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let u = sample_haar_from(dim, &mut RngStream::new(master_seed, i as u64).rng());
                acc.push(&f(&u));
            }
            acc
        })
        .collect();
    let total = partial.iter().fold(MomentSums::new(dim * dim), |a, b| a.merge(b));
    Ok(total.finish(dim))
}

/// Monte-Carlo estimate of ∫ U X U† dμ(U).
pub fn haar_second_moment(x: &HermitianOperator, n_samples: usize, master_seed: u64) -> Result<MatrixEstimate> {
    let xm = x.matrix();
    haar_average(x.dim(), n_samples, master_seed, |u| u.matmul(xm).matmul(&u.adjoint()))
}

/// tr(X) 𝟙/d
pub fn haar_second_moment_closed_form(x: &HermitianOperator) -> ComplexMatrix {
    let d = x.dim();
    ComplexMatrix::identity(d).scale(x.matrix().trace() / d as f64)
}

fn fourth_moment_dims(x1: &HermitianOperator, x2: &HermitianOperator, x3: &HermitianOperator) -> Result<usize> {
    let d = x1.dim();
    Error::check_dim(d, x2.dim())?;
    Error::check_dim(d, x3.dim())?;
    if d < 2 {
        return Err(Error::domain("fourth-moment identity requires d ≥ 2 (denominator d(d²−1) vanishes)"));
    }
    Ok(d)
}

/// Monte-Carlo estimate of ∫ U X₁ U† X₂ U X₃ U† dμ(U).
pub fn haar_fourth_moment(
    x1: &HermitianOperator,
    x2: &HermitianOperator,
    x3: &HermitianOperator,
    n_samples: usize,
    master_seed: u64,
) -> Result<MatrixEstimate> {
    let d = fourth_moment_dims(x1, x2, x3)?;
    let (a, b, c) = (x1.matrix(), x2.matrix(), x3.matrix());
    haar_average(d, n_samples, master_seed, |u| {
        let ud = u.adjoint();
        let left = u.matmul(a).matmul(&ud);
        let right = u.matmul(c).matmul(&ud);
        left.matmul(b).matmul(&right)
    })
}

/// Closed form of the fourth Haar moment:
/// [d tr(X₁X₃) − tr X₁ tr X₃] tr(X₂) 𝟙 /(d(d²−1)) + [d tr X₁ tr X₃ − tr(X₁X₃)] X₂ /(d(d²−1)).
pub fn haar_fourth_moment_closed_form(
    x1: &HermitianOperator,
    x2: &HermitianOperator,
    x3: &HermitianOperator,
) -> Result<ComplexMatrix> {
    let d = fourth_moment_dims(x1, x2, x3)?;
    let df = d as f64;
    let denom = df * (df * df - 1.0);
    let t13 = x1.matrix().trace_product(x3.matrix());
    let t1 = x1.matrix().trace();
    let t3 = x3.matrix().trace();
    let t2 = x2.matrix().trace();
    let c_id = (t13 * df - t1 * t3) * t2 / denom;
    let c_x2 = (t1 * t3 * df - t13) / denom;
    let mut out = ComplexMatrix::identity(d).scale(c_id);
    out.axpy(c_x2, x2.matrix());
    Ok(out)
}

/// Averaged GUE level density Σ_{l<d} φₗ(v)², normalized to ∫ = d.
pub fn gue_level_density(v: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if !v.is_finite() {
        return Err(Error::numerical("level density evaluated at a non-finite point"));
    }
    let rho = hermite_phi_sq_sum(d, v);
    if !rho.is_finite() {
        return Err(Error::numerical(format!("Hermite recurrence overflow at v = {v}, d = {d}")));
    }
    Ok(rho)
}

/// Semicircle density √(2d)/π · √(1 − (v/√(2d))²), normalized to ∫ = d.
pub fn semicircle_density(v: f64, d: f64) -> f64 {
    let r = (2.0 * d).sqrt();
    let u = v / r;
    if u.abs() >= 1.0 {
        0.0
    } else {
        r / PI_F * (1.0 - u * u).sqrt()
    }
}

const PI_F: f64 = std::f64::consts::PI;

/// Pooled eigenvalues of `n_matrices` GUE samples.
pub fn pooled_gue_eigenvalues(d: usize, n_matrices: usize, master_seed: u64) -> Result<Vec<f64>> {
    let spec = GueSpec::new(d)?;
    let per: Vec<Result<Vec<f64>>> = par_map_indexed(n_matrices, |i| {
        let h = sample_gue(spec, RngStream::new(master_seed, i as u64));
        crate::linalg::eigvalsh(h.matrix())
    });
    let mut out = Vec::with_capacity(d * n_matrices);
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Monte-Carlo estimates of ⟨tr V²⟩ and ⟨(tr V)²⟩ over the GUE.
///
/// The second moment of the trace is what separates the two candidate
/// closed forms of the GUE-averaged decoherence rate.
pub fn gue_trace_moments(d: usize, n_samples: usize, master_seed: u64) -> Result<(EnsembleEstimate, EnsembleEstimate)> {
    let spec = GueSpec::new(d)?;
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let pairs: Vec<(f64, f64)> = par_map_indexed(n_samples, |i| {
        let v = sample_gue(spec, RngStream::new(master_seed, i as u64));
        let m = v.matrix();
        (m.trace_product(m).re, m.trace().re.powi(2))
    });
    let tr_sq: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let sq_tr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok((EnsembleEstimate::from_samples(&tr_sq, master_seed), EnsembleEstimate::from_samples(&sq_tr, master_seed)))
}
