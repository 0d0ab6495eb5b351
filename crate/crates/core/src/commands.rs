//! Experiment drivers behind the `dephase-lab` subcommands. Each returns the
//! complete CSV document as a string so output can be compared byte-for-byte.

use crate::dynamics::ensemble_purity_tfd;
use crate::error::{Error, Result};
use crate::linalg::DensityState;
use crate::rates::{
    calibrate_epsilon, crossover_min_n, rate_gue_mc, rate_gue_paper, rate_gue_paper_qubits, rate_gue_wick,
    rate_kbody_bound, BoundMode, KBodySpec,
};
use crate::rng::RngStream;
use crate::specfun::{rate_tfd_gue_exact, rate_tfd_gue_semicircle};

pub const SCHEMA_LINE: &str = "# dephase-lab schema v1";

/// Largest qubit count for which the finite-d rate is evaluated in formula-only mode.
pub const FORMULA_EXACT_MAX_QUBITS: usize = 20;

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn require_positive(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config(format!("{name} must be positive and finite, got {x}")))
    }
}

struct Csv {
    head: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(comments: &[String], header: &[&str]) -> Result<Self> {
        let mut head = String::from(SCHEMA_LINE);
        head.push('\n');
        for c in comments {
            head.push_str("# ");
            head.push_str(c);
            head.push('\n');
        }
        let mut csv = Self { head, writer: csv::Writer::from_writer(Vec::new()) };
        csv.row(header.iter().map(|s| s.to_string()))?;
        Ok(csv)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.writer.write_record(fields.into_iter().collect::<Vec<_>>()).map_err(|e| Error::Numerical(e.to_string()))
    }

    fn finish(self) -> Result<String> {
        let body = self.writer.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(self.head + &String::from_utf8(body).expect("CSV output is UTF-8"))
    }
}

/// Runs `f` on a dedicated pool with `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(config("--threads must be at least 1"));
        }
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(|e| config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateGueConfig {
    pub dims: Vec<usize>,
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
}

/// GUE-averaged rate for a fixed pure state |0⟩: both closed forms and the
/// Monte-Carlo estimate. Dimension d uses master seed derive(seed, d).
pub fn rate_gue_csv(cfg: &RateGueConfig) -> Result<String> {
    if cfg.dims.is_empty() || cfg.dims.contains(&0) {
        return Err(config("dimensions must be a non-empty list of positive integers"));
    }
    require_positive(cfg.gamma, "gamma")?;
    if cfg.samples < 2 {
        return Err(config("--samples must be at least 2"));
    }
    let mut csv = Csv::new(
        &["initial state |0>; V ~ GUE with weight exp(-tr V^2)".into()],
        &["d", "gamma", "rate_paper", "rate_wick", "rate_mc_mean", "rate_mc_stderr", "n_samples", "seed"],
    )?;
    for &d in &cfg.dims {
        let rho = DensityState::basis(d, 0)?;
        let seed = RngStream::derive(cfg.seed, d as u64);
        let est = rate_gue_mc(&rho, cfg.gamma, cfg.samples, seed)?;
        csv.row([
            d.to_string(),
            fmt_f64(cfg.gamma),
            fmt_f64(rate_gue_paper(d, cfg.gamma)?),
            fmt_f64(rate_gue_wick(d, cfg.gamma, 1.0)?),
            fmt_f64(est.mean),
            fmt_f64(est.stderr),
            cfg.samples.to_string(),
            seed.to_string(),
        ])?;
    }
    csv.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Config {
    pub ks: Vec<usize>,
    pub n_max: usize,
    pub n0: usize,
    pub gamma: f64,
    pub mode: BoundMode,
    pub seed: u64,
}

/// GUE rate versus k-body bounds over n, followed by the crossover table.
/// ε² is calibrated with k = 1 at n₀ and shared by every k.
pub fn fig1_csv(cfg: &Fig1Config) -> Result<String> {
    if cfg.ks.is_empty() || cfg.ks.contains(&0) {
        return Err(config("k list must be non-empty and positive"));
    }
    if cfg.n0 == 0 || cfg.n0 > cfg.n_max || cfg.n_max > 63 {
        return Err(config("need 1 ≤ n0 ≤ n_max ≤ 63"));
    }
    require_positive(cfg.gamma, "gamma")?;
    let eps_sq = calibrate_epsilon(cfg.n0, 1, cfg.gamma, cfg.mode)?;
    let mode = match cfg.mode {
        BoundMode::Approx => "paper",
        BoundMode::ExactBinomial => "exact-binomial",
    };
    let mut header: Vec<String> = vec!["n".into(), "D_gue".into(), "D_gue_wick".into()];
    header.extend(cfg.ks.iter().map(|k| format!("D_kbody_k{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(
        &[
            format!("epsilon_sq = {}", fmt_f64(eps_sq)),
            format!("n0 = {}, mode = {mode}, gamma = {}, seed = {}", cfg.n0, fmt_f64(cfg.gamma), cfg.seed),
        ],
        &header_refs,
    )?;
    let eps = eps_sq.sqrt();
    for n in 1..=cfg.n_max {
        let mut row = vec![
            n.to_string(),
            fmt_f64(rate_gue_paper_qubits(n, cfg.gamma)),
            fmt_f64(cfg.gamma * (2f64.powi(n as i32) - 1.0)),
        ];
        for &k in &cfg.ks {
            row.push(if k <= n {
                fmt_f64(rate_kbody_bound(KBodySpec::new(n, k, eps)?, cfg.gamma, cfg.mode))
            } else {
                "NA".into()
            });
        }
        csv.row(row)?;
    }
    let mut out = csv.finish()?;
    out.push_str("# crossover: smallest n beyond which D_gue > D_kbody\n");
    let mut inset = csv::Writer::from_writer(Vec::new());
    let werr = |e: csv::Error| Error::Numerical(e.to_string());
    inset.write_record(["k", "n_min"]).map_err(werr)?;
    for &k in &cfg.ks {
        let n_min = crossover_min_n(k, eps_sq, cfg.mode)?.n_min().map_or("NA".to_string(), |n| n.to_string());
        inset.write_record([k.to_string(), n_min]).map_err(werr)?;
    }
    out.push_str(&String::from_utf8(inset.into_inner().map_err(|e| Error::Numerical(e.to_string()))?).expect("UTF-8"));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfdConfig {
    pub n_qubits: usize,
    pub betas: Vec<f64>,
    pub gamma: f64,
    pub gamma_t: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub formula_only: bool,
}

/// TFD purity curves (GUE ensemble) and the closed-form rates for each β.
pub fn tfd_csv(cfg: &TfdConfig) -> Result<String> {
    require_positive(cfg.gamma, "gamma")?;
    if cfg.betas.is_empty() || cfg.betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(config("β list must be non-empty, finite and non-negative"));
    }
    if cfg.n_qubits == 0 || cfg.n_qubits > 60 {
        return Err(config("qubit count must be in 1..=60"));
    }
    if !cfg.formula_only {
        if cfg.n_qubits > crate::dynamics::TFD_ENSEMBLE_MAX_QUBITS {
            return Err(config(format!(
                "sampling is limited to {} qubits; use --formula-only",
                crate::dynamics::TFD_ENSEMBLE_MAX_QUBITS
            )));
        }
        if cfg.samples < 2 {
            return Err(config("--samples must be at least 2"));
        }
        if cfg.gamma_t.is_empty() || cfg.gamma_t.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(config("γt grid must be non-empty, finite and non-negative"));
        }
    }
    let d = 2f64.powi(cfg.n_qubits as i32);
    let mut csv = Csv::new(
        &[format!(
            "n_qubits = {}, d = {}, gamma = {}, samples = {}, seed = {}{}",
            cfg.n_qubits,
            fmt_f64(d),
            fmt_f64(cfg.gamma),
            cfg.samples,
            cfg.seed,
            if cfg.formula_only { ", formula-only" } else { "" }
        )],
        &[
            "beta",
            "gamma_t",
            "purity_mean",
            "purity_stderr",
            "purity_inf",
            "rate_exact_E4",
            "rate_semicircle_F3",
            "rate_highT",
            "rate_lowT",
        ],
    )?;
    for &beta in &cfg.betas {
        let exact = if cfg.n_qubits <= FORMULA_EXACT_MAX_QUBITS {
            fmt_f64(rate_tfd_gue_exact(beta, 1usize << cfg.n_qubits, cfg.gamma)?)
        } else {
            "NA".into()
        };
        let semi = fmt_f64(rate_tfd_gue_semicircle(beta, d, cfg.gamma)?);
        let high = fmt_f64(2.0 * cfg.gamma * d);
        let low = if beta > 0.0 { fmt_f64(6.0 * cfg.gamma / (beta * beta)) } else { "NA".into() };
        if cfg.formula_only {
            csv.row([fmt_f64(beta), "NA".into(), "NA".into(), "NA".into(), "NA".into(), exact, semi, high, low])?;
            continue;
        }
        let times: Vec<f64> = cfg.gamma_t.iter().map(|gt| gt / cfg.gamma).collect();
        let ens = ensemble_purity_tfd(cfg.n_qubits, beta, cfg.gamma, &times, cfg.samples, cfg.seed)?;
        for (gt, p) in cfg.gamma_t.iter().zip(&ens.purity) {
            csv.row([
                fmt_f64(beta),
                fmt_f64(*gt),
                fmt_f64(p.mean),
                fmt_f64(p.stderr),
                fmt_f64(ens.purity_inf.mean),
                exact.clone(),
                semi.clone(),
                high.clone(),
                low.clone(),
            ])?;
        }
    }
    csv.finish()
}
