//! I/Q capture files and analysis result documents.
//!
//! A capture is a raw body of interleaved little-endian `f32` values
//! `I₀ Q₀ I₁ Q₁ …` plus a JSON sidecar at `<path>.json` holding
//! `sample_rate_hz`, `center_frequency_hz`, `label` and `num_samples`.
//!
//! Result documents are written as compact JSON with struct-declaration key
//! order and every float printed with 17 significant digits, so identical
//! inputs give identical bytes and floats read back exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{PaprError, Result};
use crate::estimator::{KdeCurve, MonteCarloResult};
use crate::spectro::{BandReport, SpectrogramSummary};
use crate::tables::StatsTable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct IqCapture {
    pub samples: Vec<Complex32>,
    pub sample_rate_hz: f64,
    pub center_frequency_hz: f64,
    pub label: String,
}

impl IqCapture {
    pub fn new(
        samples: Vec<Complex32>,
        sample_rate_hz: f64,
        center_frequency_hz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(PaprError::Domain("capture must hold at least one sample".into()));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(PaprError::Domain("capture samples must be finite".into()));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(PaprError::Domain(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if !(center_frequency_hz >= 0.0 && center_frequency_hz.is_finite()) {
            return Err(PaprError::Domain(format!(
                "center frequency must be >= 0, got {center_frequency_hz}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            center_frequency_hz,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn metadata(&self) -> CaptureMetadata {
        CaptureMetadata {
            sample_rate_hz: self.sample_rate_hz,
            center_frequency_hz: self.center_frequency_hz,
            label: self.label.clone(),
            num_samples: self.samples.len() as u64,
        }
    }
}

/// Contents of the `<path>.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureMetadata {
    pub sample_rate_hz: f64,
    pub center_frequency_hz: f64,
    pub label: String,
    pub num_samples: u64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_capture(capture: &IqCapture, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = Vec::with_capacity(capture.samples.len() * 8);
    for s in &capture.samples {
        body.extend_from_slice(&s.re.to_le_bytes());
        body.extend_from_slice(&s.im.to_le_bytes());
    }
    fs::write(path, body)?;
    fs::write(sidecar_path(path), to_canonical_json(&capture.metadata())?)?;
    Ok(())
}

pub fn read_capture(path: impl AsRef<Path>) -> Result<IqCapture> {
    let path = path.as_ref();
    let corrupt = |reason: String| PaprError::Corrupt {
        path: path.to_path_buf(),
        reason,
    };
    let body = fs::read(path)?;
    if body.len() % 4 != 0 {
        return Err(corrupt(format!("body length {} is not a whole number of f32 values", body.len())));
    }
    let floats = body.len() / 4;
    if floats % 2 != 0 {
        return Err(corrupt(format!("body holds an odd number of floats ({floats})")));
    }

    let side = sidecar_path(path);
    let meta_err = |reason: String| PaprError::Metadata {
        path: side.clone(),
        reason,
    };
    let raw = fs::read(&side).map_err(|e| meta_err(format!("cannot read sidecar: {e}")))?;
    let meta: CaptureMetadata =
        serde_json::from_slice(&raw).map_err(|e| meta_err(format!("invalid sidecar: {e}")))?;
    let num_samples = (floats / 2) as u64;
    if meta.num_samples != num_samples {
        return Err(meta_err(format!(
            "sidecar declares {} samples but body holds {num_samples}",
            meta.num_samples
        )));
    }

    let samples: Vec<Complex32> = body
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect();
    if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(corrupt("body contains non-finite samples".into()));
    }
    IqCapture::new(samples, meta.sample_rate_hz, meta.center_frequency_hz, meta.label)
        .map_err(|e| meta_err(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultKind {
    MonteCarlo,
    Kde,
    Spectrogram,
    BandReport,
    StatsTable,
}

impl ResultKind {
    pub fn is_tabular(self) -> bool {
        !matches!(self, ResultKind::BandReport)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    MonteCarlo(MonteCarloResult),
    Kde(KdeDocument),
    Spectrogram(SpectrogramSummary),
    BandReport(BandReport),
    StatsTable(StatsTable),
}

impl Payload {
    pub fn kind(&self) -> ResultKind {
        match self {
            Payload::MonteCarlo(_) => ResultKind::MonteCarlo,
            Payload::Kde(_) => ResultKind::Kde,
            Payload::Spectrogram(_) => ResultKind::Spectrogram,
            Payload::BandReport(_) => ResultKind::BandReport,
            Payload::StatsTable(_) => ResultKind::StatsTable,
        }
    }
}

/// A KDE curve with the sample size it was estimated for, so the theoretical
/// density can be tabulated beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeDocument {
    pub n: u64,
    pub curve: KdeCurve,
    pub theory_density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Invocation parameters, sufficient to regenerate the document.
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub payload: Payload,
    pub provenance: Provenance,
}

impl ResultDocument {
    pub fn new(payload: Payload, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            payload,
            provenance,
        }
    }

    pub fn kind(&self) -> ResultKind {
        self.payload.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = PaprError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(PaprError::Format(format!("unknown output format '{other}'"))),
        }
    }
}

/// JSON formatter printing floats as `{:.16e}` (17 significant digits).
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_canonical_json<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Plot-ready CSV rendering of a tabular document.
pub fn to_csv(doc: &ResultDocument) -> Result<String> {
    let mut out = String::new();
    match &doc.payload {
        Payload::MonteCarlo(mc) => {
            out.push_str("n,mean_papr_db,ci_low_db,ci_high_db,theory_db\n");
            for s in &mc.sizes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.n,
                    float(s.mean_papr_db),
                    float(s.ci_low_db),
                    float(s.ci_high_db),
                    float(s.theory_papr_db)
                );
            }
        }
        Payload::Kde(k) => {
            out.push_str("papr_db,density,theory_density\n");
            for ((x, d), t) in k.curve.grid.iter().zip(&k.curve.density).zip(&k.theory_density) {
                let _ = writeln!(out, "{},{},{}", float(*x), float(*d), float(*t));
            }
        }
        Payload::Spectrogram(s) => {
            out.push_str("frequency_hz,papr_db,theory_db\n");
            for (f, p) in s.freq_axis_hz.iter().zip(&s.per_bin_papr_db) {
                let _ = writeln!(out, "{},{},{}", float(*f), float(*p), float(s.theory_db));
            }
        }
        Payload::StatsTable(t) => t.write_csv(&mut out),
        Payload::BandReport(_) => {
            return Err(PaprError::Format(format!(
                "CSV output is not available for {:?} documents; use json",
                doc.kind()
            )))
        }
    }
    Ok(out)
}

pub fn write_result(doc: &ResultDocument, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let bytes = match format {
        OutputFormat::Json => to_canonical_json(doc)?,
        OutputFormat::Csv => to_csv(doc)?.into_bytes(),
    };
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_result(path: impl AsRef<Path>) -> Result<ResultDocument> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}
