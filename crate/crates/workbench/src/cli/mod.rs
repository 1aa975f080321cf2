//! The `dsr` command line.
//!
//! Exit status is 0 on success, 1 when an input fails validation and 2 on a
//! usage error. Each run writes a `*.manifest.json` beside its main output.

mod commands;
mod manifest;

pub use manifest::{manifest_path, sha256_file, RunManifest};

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::export::GraphFormat;

#[derive(Debug, Parser)]
#[command(name = "dsr", version, about = "Directed social regard workbench")]
pub struct Cli {
    /// Flat `key = value` file with default settings; flags override it.
    #[arg(long, env = "DSR_CONFIG", global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Krippendorff's alpha per dimension over annotation events.
    Agreement(AgreementArgs),
    /// Average annotations into reference scores, dropping noisy spans.
    Aggregate(AggregateArgs),
    /// Strict span-level and token-level scores of predicted spans.
    EvalSpans(EvalSpansArgs),
    /// Deterministic test embeddings for every text of a corpus.
    Embed(EmbedArgs),
    /// Fit a scoring head on embedded, scored spans.
    Train(TrainArgs),
    /// RMSE and R² of a trained head.
    EvalScores(EvalScoresArgs),
    /// Template variants of each text with span surfaces swapped.
    Augment(AugmentArgs),
    /// Log odds of each regard label between two span populations.
    AnalyzeLogodds(LogOddsArgs),
    /// Log odds of joint and category-conditional labels.
    AnalyzeComposite(LogOddsArgs),
    /// Targets whose median Oppose–Advocate score differs most across corpora.
    AnalyzeTargets(TargetsArgs),
    /// Harm/help pairs between characters, as a graph.
    AnalyzePairwise(PairwiseArgs),
    /// Score histogram as CSV.
    Histogram(HistogramArgs),
    /// Run the annotation service.
    Serve(ServeArgs),
    /// Convert a graph JSON document to DOT or JSON.
    ExportGraph(ExportGraphArgs),
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long, value_name = "FILE")]
    pub annotations: PathBuf,
    #[arg(long, default_value = "agreement.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub annotations: PathBuf,
    /// Largest accepted per-unit standard deviation [default: 0.5].
    #[arg(long)]
    pub sd_threshold: Option<f64>,
    #[arg(long, default_value = "aggregated.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalSpansArgs {
    /// Gold corpus.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub predictions: PathBuf,
    /// Row label in the table [default: predictions file name].
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "eval-spans.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Embedding width [default: 1024].
    #[arg(long)]
    pub h: Option<usize>,
    /// Token limit per text [default: 512].
    #[arg(long)]
    pub text_max: Option<usize>,
    #[arg(long, default_value = "embeddings.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    /// Corpus with scored spans.
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Mini-batch size, or `full`.
    #[arg(long)]
    pub batch_size: Option<String>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalScoresArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
    #[arg(long, default_value = "eval-scores.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Replacement surfaces for Character spans, one per line.
    #[arg(long, value_name = "FILE")]
    pub char_lexicon: PathBuf,
    /// Replacement surfaces for Topic spans, one per line.
    #[arg(long, value_name = "FILE")]
    pub topic_lexicon: PathBuf,
    /// Also copy the source texts into the output.
    #[arg(long)]
    pub include_source: bool,
    #[arg(long, default_value = "augmented.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LogOddsArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Compare the High and Low bins of this document label.
    #[arg(long, conflicts_with = "others", required_unless_present = "others")]
    pub label: Option<String>,
    /// Compare the corpus against these corpora.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    pub others: Vec<PathBuf>,
    /// Label threshold [default: 0.15].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Report raw odds ratios even with a zero cell.
    #[arg(long)]
    pub no_haldane: bool,
    /// Category lexicon override (JSON: category -> lemma array).
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TargetsArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    pub others: Vec<PathBuf>,
    /// Minimum spans per target on each side [default: 20].
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Number of targets kept [default: 15].
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long, default_value = "targets.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairwiseArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Label threshold [default: 0.15].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of edges kept [default: 40].
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Output format [default: from the file extension, else dot].
    #[arg(long, value_enum)]
    pub format: Option<GraphFormat>,
    #[arg(long, default_value = "themes.dot")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Dimension code (oa, va, hh); all three when omitted.
    #[arg(long)]
    pub dim: Vec<String>,
    /// Number of bins [default: 20].
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value = "histogram.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Corpus to load at startup; one can also be posted later.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Append-only annotation log.
    #[arg(long, default_value = "annotations.jsonl")]
    pub log: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct ExportGraphArgs {
    /// Graph JSON document.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub format: GraphFormat,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", error_message(&e));
            ExitCode::from(1)
        }
    }
}

/// The error chain on one line, leaving out causes that an outer message
/// already quotes.
fn error_message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

pub use commands::run;
