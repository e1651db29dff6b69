use std::path::PathBuf;

use cae_core::argument::NodeId;
use cae_core::defeaters::PrioritisationWeights;
use cae_core::Method;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cae", version, about = "Build, check and quantify confidence in CAE assurance cases")]
pub struct Cli {
    /// Output format. `json` is compact and machine-readable.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a case and run the structural lint.
    Validate { case: PathBuf },
    /// Validity of every node under the current defeater verdicts.
    Soundness { case: PathBuf },
    /// Propagate leaf confidences to the top claim.
    Propagate {
        case: PathBuf,
        #[command(flatten)]
        method: MethodArg,
        #[command(flatten)]
        warrant: WarrantArg,
        /// Use exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Uniform confidence each of n assigned nodes needs for the top claim to reach a target.
    RequiredConfidence {
        #[arg(long, value_parser = parse_unit)]
        target: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[command(flatten)]
        method: MethodArg,
    },
    /// Recompute with some posteriors or warrant confidences replaced.
    Whatif {
        case: PathBuf,
        /// node=value; repeatable.
        #[arg(long = "set", value_parser = parse_set, required = true)]
        set: Vec<(NodeId, f64)>,
        #[command(flatten)]
        method: MethodArg,
        #[command(flatten)]
        warrant: WarrantArg,
    },
    /// Defeater prioritisation and the identification checklist
    #[command(subcommand)]
    Defeaters(DefeatersCommand),
    /// Elicit probabilities from an expert panel
    #[command(subcommand)]
    Delphi(DelphiCommand),
    /// Summary chart and sentencing statement
    #[command(subcommand)]
    Report(ReportCommand),
    /// Run the HTTP service.
    Serve {
        /// Defaults to $CAE_PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
        /// Case directory loaded at startup and written through. Defaults to $CAE_CASES_DIR.
        #[arg(long)]
        cases_dir: Option<PathBuf>,
        /// Static assets served under /ui. Defaults to $CAE_UI_DIR.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MethodArg {
    /// Propagation method: sod (sum of doubts) or product.
    #[arg(long, value_parser = parse_method, default_value = "product")]
    pub method: Method,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct WarrantArg {
    /// Treat a block without a warrant as if its warrant had confidence 1.
    #[arg(long)]
    pub allow_missing_warrant: bool,
}

#[derive(Debug, Subcommand)]
pub enum DefeatersCommand {
    /// Order unresolved defeaters for investigation.
    Prioritise {
        case: PathBuf,
        /// wp,wi,we: exponents on probability, impact and 1/effort.
        #[arg(long, value_parser = parse_weights, default_value = "1,1,1")]
        weights: PrioritisationWeights,
        #[command(flatten)]
        method: MethodArg,
        /// Also re-rank under each weight in {0.5, 1, 2}^3.
        #[arg(long)]
        sensitivity: bool,
    },
    /// List the defeater-identification checklist.
    Checklist {
        #[arg(long)]
        category: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Scripted,
    Simulated,
    Remote,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Scripted)]
    pub backend: BackendKind,
    /// JSON script for the scripted backend. Without one, scenarios answer
    /// with their reference estimate.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Centre of the simulated backend's answers.
    #[arg(long, value_parser = parse_unit)]
    pub centre: Option<f64>,
    /// Standard deviation of the simulated backend's noise.
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    /// Remote endpoint. Defaults to $CAE_REMOTE_ENDPOINT.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value_t = cae_core::delphi::DEFAULT_PANEL_SIZE)]
    pub experts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub max_rounds: usize,
}

#[derive(Debug, Subcommand)]
pub enum DelphiCommand {
    /// Elicit a probability for one scenario.
    Run {
        /// Plain-text question, or a JSON scenario object.
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        /// Repeat the session and report mean and spread.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Write the full transcript of a single run as JSON.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Score the panel against resolved scenarios.
    Bench {
        #[arg(long)]
        scenarios: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Visual summary as SVG (or its record with --format json).
    Summary {
        case: PathBuf,
        #[command(flatten)]
        method: MethodArg,
        /// Evidence quality, 1-5.
        #[arg(long, default_value_t = 3)]
        ev: u8,
        /// Argumentation quality, 1-5.
        #[arg(long, default_value_t = 3)]
        aq: u8,
        /// Scientific agreement, 1-5.
        #[arg(long, default_value_t = 3)]
        sa: u8,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sentencing statement filled from a JSON object of clause judgements.
    Sentence {
        case: PathBuf,
        #[command(flatten)]
        method: MethodArg,
        #[arg(long)]
        judgements: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: cae_core::ConfidenceError| e.to_string())
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_set(s: &str) -> Result<(NodeId, f64), String> {
    let (node, value) = s.split_once('=').ok_or_else(|| format!("expected node=value, got {s:?}"))?;
    let node = NodeId::new(node.trim()).map_err(|e| e.to_string())?;
    Ok((node, parse_unit(value.trim())?))
}

fn parse_weights(s: &str) -> Result<PrioritisationWeights, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [wp, wi, we] = parts.as_slice() else {
        return Err(format!("expected wp,wi,we, got {s:?}"));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("{x:?} is not a number"));
    PrioritisationWeights::new(num(wp)?, num(wi)?, num(we)?).map_err(|e| e.to_string())
}
