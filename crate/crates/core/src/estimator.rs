//! Empirical PAPR, the Monte Carlo experiment engine, and Gaussian-kernel
//! density estimates of PAPR on the dB scale.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{PaprError, Result};
use crate::papr_math::{mean_papr, PaprModel};
use crate::rng::{substream, trial_stream};
use crate::scalar::{to_db, Real};
use crate::signal_gen::{
    apply_imbalance, apply_quantizer, design_lowpass, filter_trimmed, generate_wgn_from, FirLowPass,
    ImbalanceParams, IqBuffer, QuantizerParams, WgnParams,
};

/// Below this many observations confidence intervals use Student's t.
pub const T_QUANTILE_BELOW: usize = 30;

/// Number of points on the default KDE grid.
pub const KDE_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaprEstimate<T> {
    pub papr_linear: T,
    pub papr_db: T,
    pub cf: T,
}

/// `max(P) / mean(P)` with `P_k = i_k² + q_k²`.
pub fn estimate_papr<T: Real>(b: &IqBuffer<T>) -> Result<PaprEstimate<T>> {
    if b.is_empty() {
        return Err(PaprError::UndefinedRatio("empty buffer".into()));
    }
    let (peak, total) = b
        .powers()
        .fold((T::zero(), T::zero()), |(peak, total), p| (peak.max(p), total + p));
    if total == T::zero() {
        return Err(PaprError::UndefinedRatio("buffer has zero mean power".into()));
    }
    let mean = total / T::from_count(b.len() as u64);
    // the mean of n values never exceeds their max, but rounding can say so
    let papr_linear = (peak / mean).max(T::one());
    Ok(PaprEstimate {
        papr_linear,
        papr_db: to_db(papr_linear),
        cf: papr_linear.sqrt(),
    })
}

/// `max(P) / reference_power`, normalizing by a known mean power such as
/// `2σ²` instead of the sample mean. This is the quantity whose law is
/// exactly `(1 − e^{−x})^n` for complex WGN.
pub fn estimate_papr_with_reference<T: Real>(b: &IqBuffer<T>, reference_power: T) -> Result<PaprEstimate<T>> {
    if b.is_empty() {
        return Err(PaprError::UndefinedRatio("empty buffer".into()));
    }
    if !(reference_power > T::zero() && reference_power.is_finite()) {
        return Err(PaprError::UndefinedRatio(format!(
            "reference power must be positive, got {reference_power}"
        )));
    }
    let peak = b.powers().fold(T::zero(), |peak, p| peak.max(p));
    let papr_linear = peak / reference_power;
    Ok(PaprEstimate {
        papr_linear,
        papr_db: to_db(papr_linear),
        cf: papr_linear.sqrt(),
    })
}

/// Which WGN-assumption violation, if any, to apply in a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ImpairmentSpec {
    Imbalance(ImbalanceParams<f64>),
    Quantizer(QuantizerParams<f64>),
    LowPass { cutoff: f64, order: usize },
}

impl fmt::Display for ImpairmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Imbalance(p) => write!(f, "imbalance:{},{}", p.delta_g, p.delta_phi_deg),
            Self::Quantizer(p) => write!(f, "quantize:{},{}", p.bits, p.reference_level),
            Self::LowPass { cutoff, order } => write!(f, "lowpass:{cutoff},{order}"),
        }
    }
}

/// Parses `none`, `imbalance:dg,dphi_deg`, `quantize:bits,ref` or
/// `lowpass:fc,order`. `none` yields `Ok(None)`.
pub fn parse_impairment(s: &str) -> Result<Option<ImpairmentSpec>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse().map(Some)
}

impl FromStr for ImpairmentSpec {
    type Err = PaprError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PaprError::Config(format!("malformed impairment spec '{s}'"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        if args.len() != 2 {
            return Err(bad());
        }
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad());
        match kind.trim().to_ascii_lowercase().as_str() {
            "imbalance" => Ok(Self::Imbalance(ImbalanceParams::new(num(args[0])?, num(args[1])?)?)),
            "quantize" | "quantizer" => Ok(Self::Quantizer(QuantizerParams::new(
                int(args[0])? as u32,
                num(args[1])?,
            )?)),
            "lowpass" => {
                let cutoff = num(args[0])?;
                let order = int(args[1])? as usize;
                design_lowpass(cutoff, order)?;
                Ok(Self::LowPass { cutoff, order })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub sample_sizes: Vec<u64>,
    pub trials: usize,
    pub impairment: Option<ImpairmentSpec>,
    pub master_seed: u64,
    pub confidence_level: f64,
    /// Per-component noise standard deviation.
    pub sigma: f64,
}

impl MonteCarloConfig {
    pub fn new(sample_sizes: Vec<u64>, trials: usize, master_seed: u64) -> Self {
        Self {
            sample_sizes,
            trials,
            impairment: None,
            master_seed,
            confidence_level: 0.95,
            sigma: 1.0,
        }
    }

    pub fn with_impairment(mut self, impairment: Option<ImpairmentSpec>) -> Self {
        self.impairment = impairment;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(PaprError::Config(format!("need at least 2 trials, got {}", self.trials)));
        }
        if self.sample_sizes.is_empty() {
            return Err(PaprError::Config("no sample sizes given".into()));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(PaprError::Config(format!("sample sizes must be >= 2, got {n}")));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(PaprError::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(PaprError::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Monte Carlo summary for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: u64,
    pub trials: usize,
    /// Mean of the linear per-trial PAPRs.
    pub mean_papr_linear: f64,
    /// `10·log10(mean_papr_linear)`.
    pub mean_papr_db: f64,
    /// Confidence interval of `mean_papr_db` (delta method on the linear mean).
    pub ci_low_db: f64,
    pub ci_high_db: f64,
    /// Average of the per-trial dB values.
    pub mean_of_db: f64,
    pub mean_of_db_ci_half_width: f64,
    /// `10·log10(H_n)`.
    pub theory_papr_db: f64,
    pub trial_paprs_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub config: MonteCarloConfig,
    pub sizes: Vec<SizeSummary>,
}

impl MonteCarloResult {
    pub fn size(&self, n: u64) -> Option<&SizeSummary> {
        self.sizes.iter().find(|s| s.n == n)
    }
}

/// Sample mean and the half-width of its two-sided `level` confidence
/// interval (normal quantile, or Student's t below [`T_QUANTILE_BELOW`]
/// observations).
pub fn mean_confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    let m = values.len();
    if m < 2 {
        return Err(PaprError::Config("confidence interval needs at least 2 values".into()));
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let se = (var / m as f64).sqrt();
    let p = 0.5 + level / 2.0;
    let quantile = if m < T_QUANTILE_BELOW {
        StudentsT::new(0.0, 1.0, (m - 1) as f64)
            .map_err(|e| PaprError::Config(e.to_string()))?
            .inverse_cdf(p)
    } else {
        Normal::standard().inverse_cdf(p)
    };
    Ok((mean, quantile * se))
}

/// Mean of linear ratios in dB, with the delta-method interval
/// `mean_db ± (10/ln 10)·h/mean`.
pub(crate) fn linear_mean_in_db(linear: &[f64], level: f64) -> Result<(f64, f64, f64, f64)> {
    let (mean, half) = mean_confidence_interval(linear, level)?;
    let mean_db = to_db(mean);
    let half_db = 10.0 / std::f64::consts::LN_10 * half / mean;
    Ok((mean, mean_db, mean_db - half_db, mean_db + half_db))
}

enum PreparedImpairment {
    None,
    Imbalance(ImbalanceParams<f64>),
    Quantizer(QuantizerParams<f64>),
    LowPass(FirLowPass<f64>),
}

fn prepare(spec: &Option<ImpairmentSpec>) -> Result<PreparedImpairment> {
    Ok(match spec {
        None => PreparedImpairment::None,
        Some(ImpairmentSpec::Imbalance(p)) => PreparedImpairment::Imbalance(*p),
        Some(ImpairmentSpec::Quantizer(p)) => PreparedImpairment::Quantizer(*p),
        Some(ImpairmentSpec::LowPass { cutoff, order }) => PreparedImpairment::LowPass(design_lowpass(*cutoff, *order)?),
    })
}

fn run_trial(
    cfg: &MonteCarloConfig,
    imp: &PreparedImpairment,
    size_index: usize,
    n: usize,
    trial: usize,
) -> Result<f64> {
    let stream = trial_stream(size_index, trial);
    let mut rng = substream(cfg.master_seed, stream);
    let clean = generate_wgn_from(&mut rng, n, cfg.sigma);
    let buffer = match imp {
        PreparedImpairment::None => clean,
        PreparedImpairment::Imbalance(p) => apply_imbalance(&clean, p),
        PreparedImpairment::Quantizer(p) => apply_quantizer(&clean, p),
        PreparedImpairment::LowPass(f) => {
            let params = WgnParams::new(cfg.sigma, cfg.master_seed)?.with_stream(stream);
            filter_trimmed(&clean, f, &params)
        }
    };
    Ok(estimate_papr(&buffer)?.papr_linear)
}

/// Run every (sample size, trial) pair on the current rayon pool.
///
/// Trial `t` at sample-size index `s` draws from stream
/// [`trial_stream(s, t)`](crate::rng::trial_stream) of `master_seed`, and
/// reductions run in trial order, so the result is independent of the
/// thread count.
pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let imp = prepare(&cfg.impairment)?;
    let mut sizes = Vec::with_capacity(cfg.sample_sizes.len());
    for (size_index, &n) in cfg.sample_sizes.iter().enumerate() {
        let linear: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &imp, size_index, n as usize, t))
            .collect::<Result<_>>()?;
        let trial_paprs_db: Vec<f64> = linear.iter().map(|&v| to_db(v)).collect();
        let (mean_lin, mean_db, lo, hi) = linear_mean_in_db(&linear, cfg.confidence_level)?;
        let (mean_of_db, half_of_db) = mean_confidence_interval(&trial_paprs_db, cfg.confidence_level)?;
        sizes.push(SizeSummary {
            n,
            trials: cfg.trials,
            mean_papr_linear: mean_lin,
            mean_papr_db: mean_db,
            ci_low_db: lo,
            ci_high_db: hi,
            mean_of_db,
            mean_of_db_ci_half_width: half_of_db,
            theory_papr_db: to_db(mean_papr::<f64>(PaprModel::new(n)?)),
            trial_paprs_db,
        });
    }
    Ok(MonteCarloResult {
        config: cfg.clone(),
        sizes,
    })
}

/// [`run_monte_carlo`] on a dedicated pool of `threads` workers.
pub fn run_monte_carlo_with_threads(cfg: &MonteCarloConfig, threads: usize) -> Result<MonteCarloResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| PaprError::Config(e.to_string()))?;
    pool.install(|| run_monte_carlo(cfg))
}

/// Kernel density estimate on a dB grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

/// Scott's rule: sample standard deviation times `m^(−1/5)`.
pub fn scott_bandwidth(samples: &[f64]) -> Result<f64> {
    let m = samples.len();
    if m < 2 {
        return Err(PaprError::Config("KDE needs at least 2 samples".into()));
    }
    let mean = samples.iter().sum::<f64>() / m as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let bw = var.sqrt() * (m as f64).powf(-0.2);
    if !(bw > 0.0 && bw.is_finite()) {
        return Err(PaprError::Config("KDE samples have zero spread; bandwidth undefined".into()));
    }
    Ok(bw)
}

/// [`KDE_GRID_POINTS`] evenly spaced points over `[min − 3·bw, max + 3·bw]`.
pub fn default_kde_grid(samples: &[f64], bandwidth: f64) -> Vec<f64> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bandwidth;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bandwidth;
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    (0..KDE_GRID_POINTS).map(|k| lo + step * k as f64).collect()
}

/// Gaussian-kernel density of `samples_db` evaluated on `grid`.
pub fn kde_pdf_db(samples_db: &[f64], grid: &[f64]) -> Result<KdeCurve> {
    let bandwidth = scott_bandwidth(samples_db)?;
    let norm = 1.0 / (samples_db.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .par_iter()
        .map(|&y| {
            samples_db
                .iter()
                .map(|&s| {
                    let z = (y - s) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(KdeCurve {
        grid: grid.to_vec(),
        density,
        bandwidth,
    })
}

/// [`kde_pdf_db`] on the [`default_kde_grid`].
pub fn kde_pdf_db_auto(samples_db: &[f64]) -> Result<KdeCurve> {
    let bw = scott_bandwidth(samples_db)?;
    kde_pdf_db(samples_db, &default_kde_grid(samples_db, bw))
}
