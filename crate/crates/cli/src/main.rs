mod run;
mod stages;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use run::Run;

/// Counterfactual consistency and partisanship analysis of adjudication
/// records.
#[derive(Debug, Parser)]
#[command(name = "variability", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Input CSV: a canonical corpus, or a source file read through --mapping.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Directory receiving every output and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,

    /// TOML column mapping for non-canonical inputs.
    #[arg(long, global = true)]
    pub mapping: Option<PathBuf>,

    /// Root seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Administration table overriding the shipped one.
    #[arg(long, global = true, requires = "state_votes")]
    pub administrations: Option<PathBuf>,

    /// State election table overriding the shipped one.
    #[arg(long, global = true, requires = "administrations")]
    pub state_votes: Option<PathBuf>,

    /// Also write SVG charts.
    #[arg(long, global = true)]
    pub plots: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    /// Count each other judge once (by cohort majority) in consistency.
    #[arg(long)]
    pub judge_weighted: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrelateArgs {
    /// Drop the later of two features whose |Pearson r| exceeds this.
    #[arg(long, default_value_t = 0.95)]
    pub prune_threshold: f64,

    /// Family-wise significance level before Bonferroni correction.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Bootstrap replicates per target.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,

    /// Rows drawn per replicate.
    #[arg(long, default_value_t = 5000)]
    pub sample_size: usize,

    /// Trees per forest.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,

    /// Bootstrap rows per tree.
    #[arg(long, default_value_t = 1000)]
    pub max_samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,

    /// Hinge-loss weight of the linear SVC.
    #[arg(long, default_value_t = 1.0)]
    pub svc_c: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrendArgs {
    #[arg(long, default_value_t = 0.1)]
    pub changepoint_scale: f64,

    #[arg(long, default_value_t = 0.01)]
    pub seasonality_scale: f64,

    /// Weight each week by its case count when fitting.
    #[arg(long)]
    pub count_weighted_weeks: bool,

    #[arg(long, default_value_t = 25)]
    pub n_changepoints: usize,

    #[arg(long, default_value_t = 10)]
    pub fourier_order: usize,

    /// Pick both scales by rolling one-year cross-validation over the
    /// default grid instead of using the values given.
    #[arg(long)]
    pub grid_search: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// TOML scenario; flags below override it.
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    #[arg(long)]
    pub cases: Option<usize>,

    #[arg(long)]
    pub climate_effect: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate the input; write the canonical corpus.
    Ingest,
    /// Yearly volume, grant and representation tables.
    Describe,
    /// Consistency and partisanship scores.
    Score(ScoreArgs),
    /// Feature importances and rank correlations against each score.
    Correlate {
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        correlate: CorrelateArgs,
    },
    /// Decision prediction from the scores.
    Predict {
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        predict: PredictArgs,
    },
    /// Weekly partisanship trend with changepoints and seasonality.
    Trend {
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        trend: TrendArgs,
    },
    /// Generate a synthetic corpus.
    Simulate(SimulateArgs),
    /// Every analysis stage in sequence.
    Report {
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        correlate: CorrelateArgs,
        #[command(flatten)]
        predict: PredictArgs,
        #[command(flatten)]
        trend: TrendArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Describe => "describe",
            Command::Score(_) => "score",
            Command::Correlate { .. } => "correlate",
            Command::Predict { .. } => "predict",
            Command::Trend { .. } => "trend",
            Command::Simulate(_) => "simulate",
            Command::Report { .. } => "report",
        }
    }

    fn parameters(&self) -> serde_json::Value {
        match self {
            Command::Ingest | Command::Describe => serde_json::json!({}),
            Command::Score(s) => serde_json::json!({ "score": v(s) }),
            Command::Correlate { score, correlate } => {
                serde_json::json!({ "score": v(score), "correlate": v(correlate) })
            }
            Command::Predict { score, predict } => {
                serde_json::json!({ "score": v(score), "predict": v(predict) })
            }
            Command::Trend { score, trend } => serde_json::json!({ "score": v(score), "trend": v(trend) }),
            Command::Simulate(s) => serde_json::json!({ "simulate": v(s) }),
            Command::Report {
                score,
                correlate,
                predict,
                trend,
            } => serde_json::json!({
                "score": v(score),
                "correlate": v(correlate),
                "predict": v(predict),
                "trend": v(trend),
            }),
        }
    }
}

fn v<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap_or(serde_json::Value::Null)
}

fn execute(command: &Command, common: &Common, run: &mut Run) -> anyhow::Result<()> {
    if let Command::Simulate(args) = command {
        return stages::simulate(run, common, args);
    }
    let corpus = stages::ingest(run, common, matches!(command, Command::Ingest | Command::Report { .. }))?;
    match command {
        Command::Ingest | Command::Simulate(_) => Ok(()),
        Command::Describe => stages::describe(run, &corpus, common.plots),
        Command::Score(score) => stages::score(run, &corpus, score).map(drop),
        Command::Correlate { score, correlate } => {
            let scores = stages::score(run, &corpus, score)?;
            stages::correlate(run, &corpus, &scores, correlate, common.seed)
        }
        Command::Predict { score, predict } => {
            let scores = stages::score(run, &corpus, score)?;
            stages::predict(run, &corpus, &scores, predict, common.seed)
        }
        Command::Trend { score, trend } => {
            let scores = stages::score(run, &corpus, score)?;
            stages::trend(run, &corpus, &scores, trend, common.plots)
        }
        Command::Report {
            score,
            correlate,
            predict,
            trend,
        } => {
            stages::describe(run, &corpus, common.plots)?;
            let scores = stages::score(run, &corpus, score)?;
            stages::correlate(run, &corpus, &scores, correlate, common.seed)?;
            stages::predict(run, &corpus, &scores, predict, common.seed)?;
            stages::trend(run, &corpus, &scores, trend, common.plots)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let mut run = match Run::start(&cli.common, cli.command.name(), cli.command.parameters()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let outcome = execute(&cli.command, &cli.common, &mut run);
    let failure = outcome.as_ref().err().map(|e| format!("{e:#}"));
    if let Err(e) = run.finish(failure.as_deref()) {
        eprintln!("error: writing manifest: {e:#}");
        return ExitCode::FAILURE;
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
