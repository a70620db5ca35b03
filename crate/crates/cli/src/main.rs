//! `stataudit` command-line driver.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure. Failures are
//! reported on stderr as a single JSON object.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stataudit::pipeline::MccMode;
use stataudit::report::Format;

mod commands;

#[derive(Debug, Parser)]
#[command(name = "stataudit", version, about = "Statistical reliability audits of reported test statistics")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "STATAUDIT_OUT", default_value = "stataudit-out")]
    out: PathBuf,

    /// Worker threads for parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Artifact formats to write; defaults to every format the command supports.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    format: Vec<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract APA-style test statistics from text files and check their p-values.
    Extract {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Significance level for the decision-error check.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run the full pipeline over a coded corpus directory.
    Audit {
        corpus: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Power tables: upper-bound per paper and a priori per test.
    Power {
        corpus: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Upper-bound power of each paper's total sample.
        #[arg(long)]
        upper_bound: bool,
        /// Power of each retained test.
        #[arg(long)]
        per_test: bool,
    },
    /// Publication-bias battery.
    Bias {
        corpus: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Funnel points and the Begg–Mazumdar rank test.
        #[arg(long)]
        funnel: bool,
        /// Effect size versus power, extrapolated to full power.
        #[arg(long)]
        winners_curse: bool,
        /// Observed against expected significant results over an alpha grid.
        #[arg(long)]
        chasing: bool,
        /// Significance with and without Bonferroni, with Fisher's exact test.
        #[arg(long)]
        mcc_contingency: bool,
    },
    /// Generate a synthetic field from a JSON configuration.
    Simulate {
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-render the artifacts of a previous audit from its audit.json.
    Report { run: PathBuf },
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// JSON file with small/medium/large thresholds per effect-size type.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Bonferroni correction within test families.
    #[arg(long, value_enum, default_value_t = MccArg::Both)]
    mcc: MccArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Svg => Format::Svg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MccArg {
    On,
    Off,
    Both,
}

impl From<MccArg> for MccMode {
    fn from(m: MccArg) -> Self {
        match m {
            MccArg::On => MccMode::On,
            MccArg::Off => MccMode::Off,
            MccArg::Both => MccMode::Both,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    let numeric = err
        .chain()
        .filter_map(|e| e.downcast_ref::<stataudit::Error>())
        .any(stataudit::Error::is_numeric);
    if numeric { (2, "numeric") } else { (1, "input") }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = exit_code(&err);
            let diag = serde_json::json!({
                "error": kind,
                "message": format!("{err:#}"),
                "exit_code": code,
            });
            eprintln!("{diag}");
            ExitCode::from(code)
        }
    }
}
