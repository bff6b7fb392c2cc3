//! STFT spectrograms of I/Q captures, per-frequency-bin PAPR over time, and
//! the band check that compares the band-averaged PAPR with `H_T` for `T`
//! time bins.
//!
//! For complex WGN every spectrogram bin is exponentially distributed over
//! time with a scale set by the window energy, so per-bin PAPR follows the
//! same law as sample PAPR with `n = T`. Window gain and capture calibration
//! cancel.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{PaprError, Result};
use crate::estimator::{linear_mean_in_db, mean_confidence_interval};
use crate::iq_io::IqCapture;
use crate::papr_math::{mean_papr, PaprModel};
use crate::scalar::to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Hamming,
    Blackman,
    Rectangular,
    /// Explicit taper; its length must equal the window length.
    Custom(Vec<f64>),
}

impl WindowKind {
    /// Periodic (DFT-even) taper of length `len`.
    pub fn taper(&self, len: usize) -> Result<Vec<f64>> {
        let l = len as f64;
        let cos = |k: usize, m: f64| (2.0 * std::f64::consts::PI * m * k as f64 / l).cos();
        Ok(match self {
            Self::Hann => (0..len).map(|k| 0.5 - 0.5 * cos(k, 1.0)).collect(),
            Self::Hamming => (0..len).map(|k| 0.54 - 0.46 * cos(k, 1.0)).collect(),
            Self::Blackman => (0..len)
                .map(|k| 0.42 - 0.5 * cos(k, 1.0) + 0.08 * cos(k, 2.0))
                .collect(),
            Self::Rectangular => vec![1.0; len],
            Self::Custom(w) => {
                if w.len() != len {
                    return Err(PaprError::Config(format!(
                        "custom window has {} taps, window length is {len}",
                        w.len()
                    )));
                }
                w.clone()
            }
        })
    }
}

impl std::str::FromStr for WindowKind {
    type Err = PaprError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" | "hanning" => Ok(Self::Hann),
            "hamming" => Ok(Self::Hamming),
            "blackman" => Ok(Self::Blackman),
            "rect" | "rectangular" | "boxcar" => Ok(Self::Rectangular),
            other => Err(PaprError::Config(format!("unknown window '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detrend {
    None,
    /// Subtract each frame's complex mean before windowing.
    Constant,
}

impl std::str::FromStr for Detrend {
    type Err = PaprError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "off" => Ok(Self::None),
            "constant" => Ok(Self::Constant),
            other => Err(PaprError::Config(format!("unknown detrend option '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramConfig {
    pub window: WindowKind,
    pub window_length: usize,
    pub overlap_fraction: f64,
    pub detrend: Detrend,
    pub fft_length: usize,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        Self {
            window: WindowKind::Hann,
            window_length: 512,
            overlap_fraction: 0.5,
            detrend: Detrend::Constant,
            fft_length: 512,
        }
    }
}

impl SpectrogramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length < 8 {
            return Err(PaprError::Config(format!("window length must be >= 8, got {}", self.window_length)));
        }
        if !(0.0..=0.95).contains(&self.overlap_fraction) {
            return Err(PaprError::Config(format!(
                "overlap fraction must lie in [0, 0.95], got {}",
                self.overlap_fraction
            )));
        }
        if self.fft_length < self.window_length {
            return Err(PaprError::Config(format!(
                "FFT length {} is shorter than the window ({})",
                self.fft_length, self.window_length
            )));
        }
        Ok(())
    }

    /// Frame advance `max(1, round(L·(1 − overlap)))`.
    pub fn hop(&self) -> usize {
        ((self.window_length as f64 * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }

    /// `1 + floor((n − L) / hop)` frames, each starting at a multiple of the
    /// hop with no edge padding.
    pub fn time_bins(&self, n: usize) -> usize {
        if n < self.window_length {
            0
        } else {
            1 + (n - self.window_length) / self.hop()
        }
    }
}

/// Squared-magnitude STFT, frequency-major: `power[f * time_bins + t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub power: Vec<f64>,
    pub freq_bins: usize,
    pub time_bins: usize,
    /// Absolute frequency of each bin in Hz, ascending, centered on the
    /// capture's center frequency.
    pub freq_axis: Vec<f64>,
    /// Frame centers in seconds from the capture start.
    pub time_axis: Vec<f64>,
    pub sample_rate_hz: f64,
    pub center_frequency_hz: f64,
    pub config: SpectrogramConfig,
}

impl Spectrogram {
    /// Power of frequency bin `f` across time.
    pub fn bin(&self, f: usize) -> &[f64] {
        &self.power[f * self.time_bins..(f + 1) * self.time_bins]
    }
}

/// Spectral power density `|DFT(w·x)|² / (fs·Σw²)` per frame, FFT-shifted.
pub fn compute_spectrogram(capture: &IqCapture, cfg: &SpectrogramConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let n = capture.len();
    let len = cfg.window_length;
    if n < len {
        return Err(PaprError::Config(format!(
            "capture has {n} samples, fewer than one window of {len}"
        )));
    }
    let window = cfg.window.taper(len)?;
    let energy: f64 = window.iter().map(|w| w * w).sum();
    if !(energy > 0.0) {
        return Err(PaprError::Config("window has zero energy".into()));
    }
    let scale = 1.0 / (capture.sample_rate_hz * energy);
    let nfft = cfg.fft_length;
    let hop = cfg.hop();
    let time_bins = cfg.time_bins(n);
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(nfft);
    let shift = nfft / 2;

    let frames: Vec<Vec<f64>> = (0..time_bins)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::default(); nfft], vec![Complex64::default(); fft.get_inplace_scratch_len()]),
            |(buf, scratch), t| {
                let seg = &capture.samples[t * hop..t * hop + len];
                let mean = match cfg.detrend {
                    Detrend::None => Complex64::default(),
                    Detrend::Constant => {
                        seg.iter()
                            .fold(Complex64::default(), |acc, s| acc + Complex64::new(s.re as f64, s.im as f64))
                            / len as f64
                    }
                };
                for (k, slot) in buf.iter_mut().enumerate() {
                    *slot = if k < len {
                        (Complex64::new(seg[k].re as f64, seg[k].im as f64) - mean) * window[k]
                    } else {
                        Complex64::default()
                    };
                }
                fft.process_with_scratch(buf, scratch);
                (0..nfft)
                    .map(|m| buf[(m + nfft - shift) % nfft].norm_sqr() * scale)
                    .collect()
            },
        )
        .collect();

    let mut power = vec![0.0; nfft * time_bins];
    for (t, frame) in frames.iter().enumerate() {
        for (f, &p) in frame.iter().enumerate() {
            power[f * time_bins + t] = p;
        }
    }
    let df = capture.sample_rate_hz / nfft as f64;
    let freq_axis = (0..nfft)
        .map(|m| capture.center_frequency_hz + (m as f64 - shift as f64) * df)
        .collect();
    let time_axis = (0..time_bins)
        .map(|t| (t * hop) as f64 / capture.sample_rate_hz + len as f64 / (2.0 * capture.sample_rate_hz))
        .collect();

    Ok(Spectrogram {
        power,
        freq_bins: nfft,
        time_bins,
        freq_axis,
        time_axis,
        sample_rate_hz: capture.sample_rate_hz,
        center_frequency_hz: capture.center_frequency_hz,
        config: cfg.clone(),
    })
}

/// Max-over-mean across time of every frequency bin, linear.
pub fn per_bin_papr_linear(s: &Spectrogram) -> Result<Vec<f64>> {
    if s.time_bins < 2 {
        return Err(PaprError::Config(format!(
            "per-bin PAPR needs at least 2 time bins, got {}",
            s.time_bins
        )));
    }
    (0..s.freq_bins)
        .map(|f| {
            let row = s.bin(f);
            let (peak, total) = row.iter().fold((0.0f64, 0.0f64), |(p, t), &v| (p.max(v), t + v));
            if total <= 0.0 {
                return Err(PaprError::UndefinedRatio(format!(
                    "frequency bin {f} ({:.1} Hz) has zero mean power",
                    s.freq_axis[f]
                )));
            }
            Ok(peak / (total / s.time_bins as f64))
        })
        .collect()
}

/// Per-bin PAPR in dB.
pub fn per_bin_papr(s: &Spectrogram) -> Result<Vec<f64>> {
    Ok(per_bin_papr_linear(s)?.into_iter().map(to_db).collect())
}

/// `10·log10(H_T)` for the spectrogram's number of time bins.
pub fn theory_db(time_bins: usize) -> Result<f64> {
    Ok(to_db(mean_papr::<f64>(PaprModel::new(time_bins as u64)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithWgn,
    Inconsistent,
}

/// Per-bin PAPR and axis of a spectrogram, the serializable part of
/// [`Spectrogram`] used for plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSummary {
    pub config: SpectrogramConfig,
    pub sample_rate_hz: f64,
    pub center_frequency_hz: f64,
    pub freq_bins: usize,
    pub time_bins: usize,
    pub freq_axis_hz: Vec<f64>,
    pub per_bin_papr_db: Vec<f64>,
    pub theory_db: f64,
    /// Full power matrix, frequency-major, when requested.
    pub power: Option<Vec<f64>>,
}

pub fn summarize(s: &Spectrogram, include_power: bool) -> Result<SpectrogramSummary> {
    Ok(SpectrogramSummary {
        config: s.config.clone(),
        sample_rate_hz: s.sample_rate_hz,
        center_frequency_hz: s.center_frequency_hz,
        freq_bins: s.freq_bins,
        time_bins: s.time_bins,
        freq_axis_hz: s.freq_axis.clone(),
        per_bin_papr_db: per_bin_papr(s)?,
        theory_db: theory_db(s.time_bins)?,
        power: include_power.then(|| s.power.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub bin_frequencies_hz: Vec<f64>,
    pub per_bin_papr_db: Vec<f64>,
    pub time_bins: usize,
    /// `10·log10` of the mean linear per-bin PAPR.
    pub band_mean_papr_db: f64,
    pub band_ci_db: (f64, f64),
    /// Average of the per-bin dB values.
    pub band_mean_of_db: f64,
    pub band_mean_of_db_ci_half_width: f64,
    pub theory_db: f64,
    pub excess_db: f64,
    /// `excess_db` over the CI half-width's standard error.
    pub z_score: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl BandReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::ConsistentWithWgn
    }
}

/// Compare the mean PAPR of the bins inside `[f_low, f_high]` with the WGN
/// prediction `10·log10(H_T)`.
///
/// Verdict: consistent iff the theory value lies inside the 95% confidence
/// interval of the band mean. Bins are treated as independent.
pub fn verify_band(s: &Spectrogram, f_low: f64, f_high: f64) -> Result<BandReport> {
    const LEVEL: f64 = 0.95;
    if !(f_low <= f_high) {
        return Err(PaprError::Config(format!("band lower edge {f_low} exceeds upper edge {f_high}")));
    }
    let bins: Vec<usize> = (0..s.freq_bins)
        .filter(|&f| s.freq_axis[f] >= f_low && s.freq_axis[f] <= f_high)
        .collect();
    if bins.len() < 2 {
        return Err(PaprError::Config(format!(
            "band [{f_low}, {f_high}] Hz covers {} frequency bins; at least 2 are required",
            bins.len()
        )));
    }
    let all = per_bin_papr_linear(s)?;
    let linear: Vec<f64> = bins.iter().map(|&f| all[f]).collect();
    let per_bin_db: Vec<f64> = linear.iter().map(|&v| to_db(v)).collect();
    let (_, mean_db, lo, hi) = linear_mean_in_db(&linear, LEVEL)?;
    let (mean_of_db, half_of_db) = mean_confidence_interval(&per_bin_db, LEVEL)?;
    let theory = theory_db(s.time_bins)?;
    let excess = mean_db - theory;
    let half = 0.5 * (hi - lo);
    // The half-width already carries the t or normal quantile; report z
    // against the 95% normal quantile.
    let se = half / 1.959_963_984_540_054;
    let z_score = if se > 0.0 { excess / se } else { f64::INFINITY.copysign(excess) };
    let verdict = if lo <= theory && theory <= hi {
        Verdict::ConsistentWithWgn
    } else {
        Verdict::Inconsistent
    };
    Ok(BandReport {
        f_low_hz: f_low,
        f_high_hz: f_high,
        bin_frequencies_hz: bins.iter().map(|&f| s.freq_axis[f]).collect(),
        per_bin_papr_db: per_bin_db,
        time_bins: s.time_bins,
        band_mean_papr_db: mean_db,
        band_ci_db: (lo, hi),
        band_mean_of_db: mean_of_db,
        band_mean_of_db_ci_half_width: half_of_db,
        theory_db: theory,
        excess_db: excess,
        z_score,
        verdict,
        note: "confidence interval treats frequency bins as independent; window leakage correlates neighbours".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex32;

    fn tone(n: usize, bin: f64, len: usize) -> IqCapture {
        let samples = (0..n)
            .map(|k| {
                let ph = 2.0 * std::f64::consts::PI * bin * k as f64 / len as f64;
                Complex32::new(ph.cos() as f32, ph.sin() as f32)
            })
            .collect();
        IqCapture::new(samples, 1.0, 0.0, "tone").unwrap()
    }

    #[test]
    fn frame_count_formula() {
        let cfg = SpectrogramConfig::default();
        assert_eq!(cfg.hop(), 256);
        assert_eq!(cfg.time_bins(900_000), 3514);
        assert_eq!(cfg.time_bins(512), 1);
        assert_eq!(cfg.time_bins(511), 0);
        let cfg = SpectrogramConfig {
            overlap_fraction: 0.75,
            ..cfg
        };
        assert_eq!(cfg.hop(), 128);
        assert_eq!(cfg.time_bins(1000), 1 + (1000 - 512) / 128);
    }

    #[test]
    fn config_validation() {
        let base = SpectrogramConfig::default();
        assert!(SpectrogramConfig { window_length: 4, fft_length: 4, ..base.clone() }.validate().is_err());
        assert!(SpectrogramConfig { overlap_fraction: 0.99, ..base.clone() }.validate().is_err());
        assert!(SpectrogramConfig { fft_length: 256, ..base.clone() }.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn short_capture_is_rejected() {
        let cap = tone(100, 3.0, 512);
        assert!(compute_spectrogram(&cap, &SpectrogramConfig::default()).is_err());
    }

    #[test]
    fn tone_energy_stays_local() {
        let len = 64;
        let cfg = SpectrogramConfig {
            window_length: len,
            fft_length: len,
            detrend: Detrend::None,
            ..Default::default()
        };
        let cap = tone(len * 8, 10.0, len);
        let s = compute_spectrogram(&cap, &cfg).unwrap();
        let peak_bin = len / 2 + 10;
        let peak = s.bin(peak_bin)[0];
        for f in 0..len {
            let p = s.bin(f)[0];
            if (f as i64 - peak_bin as i64).abs() > 1 {
                assert!(p < peak * 10f64.powf(-3.1), "bin {f}");
            }
        }
        assert_eq!(s.freq_axis[peak_bin], 10.0 / len as f64);
    }

    #[test]
    fn constant_input_detrends_to_zero() {
        let samples = vec![Complex32::new(0.7, -0.2); 2048];
        let cap = IqCapture::new(samples, 1e6, 1e9, "dc").unwrap();
        let s = compute_spectrogram(&cap, &SpectrogramConfig::default()).unwrap();
        assert!(s.power.iter().all(|&p| p < 1e-20));
    }

    #[test]
    fn constant_envelope_bin_has_flat_papr() {
        let len = 64;
        let cfg = SpectrogramConfig {
            window_length: len,
            fft_length: len,
            ..Default::default()
        };
        let s = compute_spectrogram(&tone(len * 40, 5.0, len), &cfg).unwrap();
        let papr = per_bin_papr(&s).unwrap();
        assert!(papr[len / 2 + 5].abs() < 0.01);
    }

    #[test]
    fn band_needs_two_bins() {
        let len = 64;
        let cfg = SpectrogramConfig {
            window_length: len,
            fft_length: len,
            ..Default::default()
        };
        let s = compute_spectrogram(&tone(len * 40, 5.0, len), &cfg).unwrap();
        assert!(verify_band(&s, 0.1, 0.1001).is_err());
        assert!(verify_band(&s, 0.3, 0.1).is_err());
        assert!(verify_band(&s, 5.0, 6.0).is_err());
    }

    #[test]
    fn axis_is_centered() {
        let cap = tone(4096, 1.0, 512);
        let cap = IqCapture::new(cap.samples, 30e6, 3.7e9, "").unwrap();
        let s = compute_spectrogram(&cap, &SpectrogramConfig::default()).unwrap();
        assert_eq!(s.freq_axis[256], 3.7e9);
        assert_eq!(s.freq_axis[0], 3.7e9 - 15e6);
        assert!(s.freq_axis.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(s.time_axis.len(), s.time_bins);
    }
}
