//! `mrdpi`: lifting-based EMG denoising, feature extraction and classifier
//! evaluation from the command line.
//!
//! Failures print a single JSON line `{"error": KIND, "message": TEXT}` on
//! stderr and exit with status 1 (2 for usage errors).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mrdpi::lifting::{Bandwidth, LiftingConfig, UpdateMode};
use mrdpi::signal::{OverlapMode, WindowSpec};
use mrdpi::threshold::{ShrinkMode, SigmaMode, ThresholdScheme};

#[derive(Parser, Debug)]
#[command(name = "mrdpi", version, about = "Lifting-scheme denoising and EMG pattern-recognition pipeline")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON object of flag names to values, applied before explicit flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct LiftingArgs {
    /// Polynomial order r̃ of the local fits.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// `auto` or a fixed bandwidth h₀ in samples.
    #[arg(long, default_value = "auto", value_parser = parse_bandwidth)]
    pub bandwidth: Bandwidth,
    /// `haar` or `moment`.
    #[arg(long, default_value = "haar", value_parser = parse_update)]
    pub update: UpdateMode,
    /// Normalize detail coefficients by their prediction row norm.
    #[arg(long)]
    pub standardize: bool,
}

impl LiftingArgs {
    pub fn config(&self, levels: usize) -> LiftingConfig {
        LiftingConfig {
            levels,
            poly_order: self.order,
            bandwidth: self.bandwidth,
            update: self.update,
            standardize: self.standardize,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Threshold estimator.
    #[arg(long, default_value = "sure", value_parser = ["sure", "bayes", "median", "median-abs", "none"])]
    pub tes: String,
    #[arg(long, default_value = "soft", value_parser = parse_shrink)]
    pub shrink: ShrinkMode,
    /// `finest` or `per-level` noise estimate.
    #[arg(long, default_value = "finest", value_parser = parse_sigma)]
    pub sigma: SigmaMode,
}

impl SchemeArgs {
    pub fn scheme(&self) -> ThresholdScheme {
        ThresholdScheme { kind: self.tes.clone(), shrink: self.shrink, sigma: self.sigma }
    }
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 250.0)]
    pub window_ms: f64,
    #[arg(long, default_value_t = 100.0)]
    pub overlap_ms: f64,
    /// Read `--overlap-ms` as the hop between window starts.
    #[arg(long)]
    pub step: bool,
}

impl WindowArgs {
    pub fn spec(&self) -> mrdpi::Result<WindowSpec> {
        let mode = if self.step { OverlapMode::Step } else { OverlapMode::Shared };
        let w = WindowSpec { window_ms: self.window_ms, overlap_ms: self.overlap_ms, mode };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ClassifierArgs {
    /// Neighbours for kNN.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub rf_trees: usize,
    #[arg(long)]
    pub rf_max_depth: Option<usize>,
    /// Ridge added to the pooled LDA covariance.
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a seeded synthetic dataset directory (with clean references).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        channels: usize,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 6)]
        trials: usize,
        /// Seconds per record.
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 2000.0)]
        fs: f64,
        /// Input SNR of each record against its clean power.
        #[arg(long, default_value_t = 0.0, conflicts_with = "noise_sigma")]
        snr_db: f64,
        /// Fixed noise standard deviation instead of a target SNR.
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Add a class of noise-only records.
        #[arg(long)]
        rest: bool,
    },
    /// Convert a numeric CSV (one column per channel) into a bundle.
    Import {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        fs: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long)]
        trial: Option<String>,
        #[arg(long = "class")]
        class_label: Option<String>,
    },
    /// Forward lifting transform of a bundle into a coefficient container.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Signal resolution level (number of lifting steps).
        #[arg(long, default_value_t = 2)]
        srl: usize,
        #[command(flatten)]
        lifting: LiftingArgs,
    },
    /// Inverse transform of a coefficient container, optionally thresholded.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "none", value_parser = ["sure", "bayes", "median", "median-abs", "none"])]
        tes: String,
        #[arg(long, default_value = "soft", value_parser = parse_shrink)]
        shrink: ShrinkMode,
        #[arg(long, default_value = "finest", value_parser = parse_sigma)]
        sigma: SigmaMode,
    },
    /// Lifting-scheme denoising of a bundle or a directory of bundles.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        srl: usize,
        #[command(flatten)]
        lifting: LiftingArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Wavelet or pass-through baseline on a bundle or directory.
    Baseline {
        #[arg(long, value_parser = ["db4", "coif5", "orgdat"])]
        family: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value = "median", value_parser = ["sure", "bayes", "median", "median-abs", "none"])]
        tes: String,
        #[arg(long, default_value = "soft", value_parser = parse_shrink)]
        shrink: ShrinkMode,
        #[arg(long, default_value = "finest", value_parser = parse_sigma)]
        sigma: SigmaMode,
    },
    /// Windowed feature table (CSV) of a dataset directory or labelled bundle.
    Features {
        #[arg(long)]
        input: PathBuf,
        /// feat1, feat2, feat3, feat4 or plugin:NAME.
        #[arg(long)]
        set: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
        /// Amplitude deadzone for zero crossings and slope sign changes.
        #[arg(long, default_value_t = 0.0)]
        deadzone: f64,
    },
    /// Fit a classifier on a feature table and save it as JSON.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_parser = ["lda", "knn", "rf"])]
        classifier: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ClassifierArgs,
    },
    /// Score a saved model, or cross-validate a classifier with `--cv`.
    Eval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, required_unless_present = "cv", conflicts_with = "cv")]
        model: Option<PathBuf>,
        #[arg(long)]
        cv: bool,
        #[arg(long, value_parser = ["lda", "knn", "rf"], required_if_eq("cv", "true"))]
        classifier: Option<String>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[command(flatten)]
        params: ClassifierArgs,
        /// Metrics JSON destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        confusion: Option<PathBuf>,
    },
    /// Sweep thresholding scheme × resolution level × feature set × classifier.
    Grid {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "feat1,feat2,feat3,feat4,plugin:hjorth")]
        features: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "lda,knn,rf")]
        classifiers: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "sure,bayes,median")]
        tes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        srl: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0.0)]
        deadzone: f64,
        #[command(flatten)]
        lifting: LiftingArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        params: ClassifierArgs,
    },
    /// SNR of a bundle against a clean reference or an active sample range.
    Snr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "active", required_unless_present = "active")]
        reference: Option<PathBuf>,
        /// `START:END` sample range holding the signal; the rest is noise.
        #[arg(long)]
        active: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Windowed RMS per channel as CSV, with an optional SVG heat map.
    Energymap {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
    },
}

fn parse_bandwidth(s: &str) -> mrdpi::Result<Bandwidth> {
    s.parse()
}

fn parse_update(s: &str) -> mrdpi::Result<UpdateMode> {
    s.parse()
}

fn parse_shrink(s: &str) -> mrdpi::Result<ShrinkMode> {
    s.parse()
}

fn parse_sigma(s: &str) -> mrdpi::Result<SigmaMode> {
    s.parse()
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    e.chain().find_map(|c| c.downcast_ref::<mrdpi::Error>()).map(mrdpi::Error::kind).unwrap_or("cli")
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<std::io::Error>().or_else(|| match c.downcast_ref::<mrdpi::Error>() {
            Some(mrdpi::Error::Io(io)) => Some(io),
            _ => None,
        });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}", error_line(error_kind(&e), &format!("{e:#}")));
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("{}", error_line("usage", e.kind().as_str().unwrap_or("invalid arguments")));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed stdout (`mrdpi grid ... | head`) is not worth an error line.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(error_kind(&e), &format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
