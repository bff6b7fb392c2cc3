use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use papr_core::estimator::{parse_impairment, run_monte_carlo, MonteCarloConfig};
use papr_core::iq_io::{
    read_capture, write_result, IqCapture, KdeDocument, OutputFormat, Payload, Provenance, ResultDocument,
};
use papr_core::papr_math::{papr_pdf_db, PaprModel};
use papr_core::quadrature::QuadratureSpec;
use papr_core::spectro::{
    compute_spectrogram, per_bin_papr_linear, summarize, verify_band, Detrend, SpectrogramConfig, Verdict, WindowKind,
};
use papr_core::tables::{build_stats_table, log_spaced_sizes};
use papr_core::{estimator, to_db};

/// Exit status of `verify` when the band is not consistent with white noise.
const EXIT_INCONSISTENT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "papr", version, about = "PAPR statistics of sampled complex white Gaussian noise")]
struct Cli {
    /// Worker threads for Monte Carlo trials and STFT frames [default: all cores]
    #[arg(long, env = "PAPR_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form mean PAPR / crest factor, prior formulas and quantiles per n
    Stats(StatsArgs),
    /// Monte Carlo PAPR experiment, optionally with a receiver impairment
    Sim(SimArgs),
    /// Spectrogram of an I/Q capture and its per-frequency-bin PAPR
    Spectro(SpectroArgs),
    /// Check whether a frequency band of a capture looks like white noise
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Result file to write
    #[arg(long)]
    out: Option<PathBuf>,

    /// json or csv [default: from the --out extension, else json]
    #[arg(long)]
    format: Option<OutputFormat>,
}

impl OutputArgs {
    fn format(&self) -> OutputFormat {
        self.format.unwrap_or_else(|| match &self.out {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => OutputFormat::Csv,
            _ => OutputFormat::Json,
        })
    }

    fn write(&self, doc: &ResultDocument) -> Result<()> {
        if let Some(path) = &self.out {
            write_result(doc, path, self.format()).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("sizes").required(true).args(["n", "n_range"])))]
struct StatsArgs {
    /// Sample sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,

    /// Log-spaced sizes as lo:hi:count
    #[arg(long)]
    n_range: Option<String>,

    /// Probabilities for PAPR and crest-factor quantiles
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,0.999")]
    quantiles: Vec<f64>,

    /// Add relative-error columns for the approximations and prior formulas
    #[arg(long)]
    rel_err: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Sample sizes per trial, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<u64>,

    /// Trials per sample size
    #[arg(long, default_value_t = 1000)]
    trials: usize,

    /// none | imbalance:dg,dphi_deg | quantize:bits,ref | lowpass:fc,order
    #[arg(long, default_value = "none")]
    impairment: String,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Confidence level of the reported intervals
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,

    /// Per-component noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    /// Also write a KDE of the per-trial PAPR (dB) for each size next to --out
    #[arg(long, requires = "out")]
    kde: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct SpectroFlags {
    /// Capture file (interleaved little-endian f32 I/Q with a .json sidecar)
    #[arg(long = "in")]
    input: PathBuf,

    /// hann | hamming | blackman | rectangular
    #[arg(long, default_value = "hann")]
    window: WindowKind,

    /// Window length in samples
    #[arg(long, default_value_t = 512)]
    length: usize,

    /// Fractional frame overlap in [0, 0.95]
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,

    /// constant | none
    #[arg(long, default_value = "constant")]
    detrend: Detrend,

    /// FFT length [default: window length]
    #[arg(long)]
    fft_length: Option<usize>,
}

impl SpectroFlags {
    fn config(&self) -> Result<SpectrogramConfig> {
        let cfg = SpectrogramConfig {
            window: self.window.clone(),
            window_length: self.length,
            overlap_fraction: self.overlap,
            detrend: self.detrend,
            fft_length: self.fft_length.unwrap_or(self.length),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn provenance(&self, cfg: &SpectrogramConfig) -> serde_json::Value {
        json!({
            "input": self.input,
            "spectrogram": cfg,
        })
    }
}

#[derive(Args, Debug)]
struct SpectroArgs {
    #[command(flatten)]
    spectro: SpectroFlags,

    /// Include the full power matrix in JSON output
    #[arg(long)]
    include_power: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    spectro: SpectroFlags,

    /// Band edges in Hz as f_low:f_high
    #[arg(long)]
    band: String,

    #[command(flatten)]
    output: OutputArgs,
}

fn parse_count(s: &str) -> Result<u64> {
    let v: f64 = s.trim().parse().with_context(|| format!("'{s}' is not a number"))?;
    ensure!(v >= 1.0 && v.fract() == 0.0 && v <= 9.0e15, "'{s}' is not a positive integer");
    Ok(v as u64)
}

fn parse_range(s: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = s.split(':').collect();
    ensure!(parts.len() == 3, "--n-range expects lo:hi:count, got '{s}'");
    let (lo, hi) = (parse_count(parts[0])?, parse_count(parts[1])?);
    let count = parse_count(parts[2])? as usize;
    ensure!(lo <= hi, "--n-range lower end {lo} exceeds upper end {hi}");
    Ok(log_spaced_sizes(lo, hi, count))
}

fn parse_band(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .with_context(|| format!("--band expects f_low:f_high in Hz, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad band edge '{lo}'"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad band edge '{hi}'"))?;
    ensure!(lo.is_finite() && hi.is_finite() && lo < hi, "band '{s}' must satisfy f_low < f_high");
    Ok((lo, hi))
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let ns = match &args.n_range {
        Some(r) => parse_range(r)?,
        None => args.n.clone(),
    };
    ensure!(ns.iter().all(|&n| n >= 1), "sample sizes must be >= 1");
    ensure!(
        args.quantiles.iter().all(|p| (0.0..1.0).contains(p)),
        "quantile probabilities must lie in [0, 1)"
    );
    let table = build_stats_table(&ns, &args.quantiles, args.rel_err, &QuadratureSpec::default())?;
    for r in &table.rows {
        print!(
            "n={:<10} H_n={:<12.6} theory_papr_db={:<9.4} mean_cf={:.6}",
            r.n, r.mean_papr, r.theory_papr_db, r.mean_cf
        );
        if let Some(e) = &r.relative_errors {
            if let Some(d) = e.dunsmore_db {
                print!(" dunsmore_db={d:+.4}");
            }
            print!(" keysight_db={:+.4}", e.keysight_db);
        }
        println!();
    }
    let doc = ResultDocument::new(
        Payload::StatsTable(table),
        Provenance::new(
            None,
            json!({"command": "stats", "n": ns, "quantiles": args.quantiles, "rel_err": args.rel_err}),
        ),
    );
    args.output.write(&doc)?;
    Ok(ExitCode::SUCCESS)
}

fn kde_path(out: &Path, n: u64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}.kde-n{n}{ext}"))
}

fn sim(args: SimArgs) -> Result<ExitCode> {
    let impairment = parse_impairment(&args.impairment)?;
    let mut cfg = MonteCarloConfig::new(args.sizes.clone(), args.trials, args.seed).with_impairment(impairment);
    cfg.confidence_level = args.confidence;
    cfg.sigma = args.sigma;
    cfg.validate()?;
    let result = run_monte_carlo(&cfg)?;
    for s in &result.sizes {
        println!(
            "n={:<8} mean_papr_db={:.4} ci=[{:.4}, {:.4}] theory_db={:.4} diff_db={:+.4}",
            s.n,
            s.mean_papr_db,
            s.ci_low_db,
            s.ci_high_db,
            s.theory_papr_db,
            s.mean_papr_db - s.theory_papr_db
        );
    }
    let provenance = json!({
        "command": "sim",
        "sizes": args.sizes,
        "trials": args.trials,
        "impairment": args.impairment,
        "seed": args.seed,
        "confidence": args.confidence,
        "sigma": args.sigma,
    });
    if args.kde {
        let out = args.output.out.as_deref().expect("clap enforces --out with --kde");
        for s in &result.sizes {
            let curve = estimator::kde_pdf_db_auto(&s.trial_paprs_db)?;
            let model = PaprModel::new(s.n)?;
            let theory_density = curve
                .grid
                .iter()
                .map(|&y| papr_pdf_db(y, model))
                .collect::<papr_core::Result<_>>()?;
            let doc = ResultDocument::new(
                Payload::Kde(KdeDocument {
                    n: s.n,
                    curve,
                    theory_density,
                }),
                Provenance::new(Some(args.seed), provenance.clone()),
            );
            let path = kde_path(out, s.n);
            write_result(&doc, &path, args.output.format()).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
    }
    let doc = ResultDocument::new(Payload::MonteCarlo(result), Provenance::new(Some(args.seed), provenance));
    args.output.write(&doc)?;
    Ok(ExitCode::SUCCESS)
}

fn load(flags: &SpectroFlags) -> Result<IqCapture> {
    read_capture(&flags.input).with_context(|| format!("reading capture {}", flags.input.display()))
}

fn spectro(args: SpectroArgs) -> Result<ExitCode> {
    let cfg = args.spectro.config()?;
    let capture = load(&args.spectro)?;
    let s = compute_spectrogram(&capture, &cfg)?;
    let summary = summarize(&s, args.include_power)?;
    let linear = per_bin_papr_linear(&s)?;
    let mean_db = to_db(linear.iter().sum::<f64>() / linear.len() as f64);
    println!(
        "time_bins={} freq_bins={} mean_per_bin_papr_db={:.4} theory_db={:.4}",
        s.time_bins, s.freq_bins, mean_db, summary.theory_db
    );
    let mut config = args.spectro.provenance(&cfg);
    config["command"] = json!("spectro");
    let doc = ResultDocument::new(Payload::Spectrogram(summary), Provenance::new(None, config));
    args.output.write(&doc)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let cfg = args.spectro.config()?;
    let (lo, hi) = parse_band(&args.band)?;
    let capture = load(&args.spectro)?;
    let half_span = capture.sample_rate_hz / 2.0;
    let (span_lo, span_hi) = (capture.center_frequency_hz - half_span, capture.center_frequency_hz + half_span);
    if lo < span_lo || hi > span_hi {
        bail!("band [{lo}, {hi}] Hz lies outside the capture span [{span_lo}, {span_hi}] Hz");
    }
    let s = compute_spectrogram(&capture, &cfg)?;
    let report = verify_band(&s, lo, hi)?;
    println!(
        "band=[{lo}, {hi}] Hz bins={} time_bins={} band_mean_papr_db={:.4} ci=[{:.4}, {:.4}] theory_db={:.4} excess_db={:+.4} verdict={}",
        report.per_bin_papr_db.len(),
        report.time_bins,
        report.band_mean_papr_db,
        report.band_ci_db.0,
        report.band_ci_db.1,
        report.theory_db,
        report.excess_db,
        match report.verdict {
            Verdict::ConsistentWithWgn => "consistent_with_wgn",
            Verdict::Inconsistent => "inconsistent",
        }
    );
    let consistent = report.is_consistent();
    let mut config = args.spectro.provenance(&cfg);
    config["command"] = json!("verify");
    config["band"] = json!([lo, hi]);
    let doc = ResultDocument::new(Payload::BandReport(report), Provenance::new(None, config));
    args.output.write(&doc)?;
    Ok(if consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INCONSISTENT)
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        ensure!(t >= 1, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Stats(a) => stats(a),
        Command::Sim(a) => sim(a),
        Command::Spectro(a) => spectro(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1 so that 2 stays reserved for an inconsistent
    // `verify` verdict.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
