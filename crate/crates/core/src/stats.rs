use rayon::prelude::*;

/// Monte-Carlo estimate of a scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub master_seed: u64,
}

impl EnsembleEstimate {
    /// Mean and standard error of the mean, accumulated in slice order.
    pub fn from_samples(samples: &[f64], master_seed: u64) -> Self {
        let mut acc = Welford::default();
        for &x in samples {
            acc.push(x);
        }
        acc.estimate(master_seed)
    }

    /// |mean − target| ≤ k · stderr, with an absolute floor for exact cases.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12 * target.abs().max(1.0)
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr > 0.0 {
            (self.mean - target) / self.stderr
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY.copysign(self.mean - target)
        }
    }
}

/// Streaming mean/variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.sample_variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, master_seed: u64) -> EnsembleEstimate {
        EnsembleEstimate { mean: self.mean, stderr: self.stderr(), n_samples: self.n, master_seed }
    }
}

/// Evaluates `f(i)` for `i in 0..n` in parallel and returns results in index
/// order, so downstream reductions do not depend on the worker count.
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25, 0.0];
        let e = EnsembleEstimate::from_samples(&xs, 0);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((e.mean - mean).abs() < 1e-14);
        assert!((e.stderr - (var / xs.len() as f64).sqrt()).abs() < 1e-14);
        assert_eq!(e.n_samples, 6);
    }

    #[test]
    fn constant_samples_have_zero_stderr() {
        let e = EnsembleEstimate::from_samples(&[2.0; 10], 5);
        assert_eq!(e.stderr, 0.0);
        assert!(e.within(2.0, 3.0));
        assert_eq!(e.z_score(2.0), 0.0);
    }

    #[test]
    fn indexed_map_preserves_order() {
        let v = par_map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
