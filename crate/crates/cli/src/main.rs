mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Default seed for every randomized command.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "cis2kit", version, about = "Story-rule corpus toolkit")]
pub struct Cli {
    /// Worker threads (0 = one per core). Never changes output content.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Abort on the first per-entry error instead of logging and continuing.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Write per-entry errors here instead of stderr.
    #[arg(long, global = true, value_name = "PATH")]
    pub error_log: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a headed CSV into canonical entry JSON-lines.
    Import(ImportArgs),
    /// Render entries into one task format.
    BuildTask(BuildTaskArgs),
    /// Convert gold rules or model predictions into sentence-selection labels.
    Convert(ConvertArgs),
    /// Per-dimension corpus BLEU of generated rules.
    EvalBleu(EvalBleuArgs),
    /// Exact-match accuracy of predicted labels.
    EvalCis2(EvalCis2Args),
    /// Random sentence-selection baseline labels.
    Baseline(BaselineArgs),
    /// Print every valid label, one per line.
    EnumerateLabels(EnumerateArgs),
    /// Seeded train/dev split of an entry file.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output path (stdout if omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Column overrides as field=column (fields: entry_id, story,
    /// selected_sentence, dimension, specific_rule, general_rule).
    #[arg(long = "column", value_name = "FIELD=COLUMN")]
    pub columns: Vec<String>,
    /// File of field=column lines, applied before --column.
    #[arg(long, value_name = "PATH", env = "CIS2KIT_COLUMN_MAP")]
    pub column_map: Option<PathBuf>,
    #[arg(long, default_value_t = cis2kit::model::DEFAULT_MATCH_THRESHOLD)]
    pub match_threshold: f64,
    #[command(flatten)]
    pub vocab: VocabArgs,
}

#[derive(Debug, Args, Clone)]
pub struct VocabArgs {
    /// File with one relation connective per line, replacing the default set.
    #[arg(long, value_name = "PATH", env = "CIS2KIT_VOCABULARY")]
    pub vocabulary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimilarityArg {
    TokenF1,
    Tfidf,
    Embedding,
}

#[derive(Debug, Args, Clone)]
pub struct ConvertOpts {
    #[arg(long, value_enum, default_value = "token-f1")]
    pub similarity: SimilarityArg,
    /// Embedding table (JSON-lines of {"text", "vector"}) for --similarity embedding.
    #[arg(long, value_name = "PATH", env = "CIS2KIT_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    /// Fail conversions whose best candidate scores below this value.
    #[arg(long)]
    pub min_similarity: Option<f64>,
    /// Label relations from the dimension: `uniform`, `dimension`, or a
    /// dimension=surface file. Without it the rule's own connective is used.
    #[arg(long, value_name = "MAP", env = "CIS2KIT_RELATION_MAP")]
    pub relation_map: Option<String>,
    #[command(flatten)]
    pub vocab: VocabArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum SampleFormat {
    Jsonl,
    Tsv,
}

#[derive(Debug, Args)]
pub struct BuildTaskArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// original, history, mask-x, history-x or cis2.
    #[arg(long)]
    pub task: cis2kit::TaskKind,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: SampleFormat,
    /// Leave the dimension prefix off Mask X inputs.
    #[arg(long)]
    pub no_mask_prefix: bool,
    /// Write the drop report JSON here (always echoed to stderr).
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub convert: ConvertOpts,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum LabelFormat {
    Jsonl,
    Text,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Canonical entries.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model outputs, one per line, aligned with the entries. Gold rules are
    /// converted when omitted.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: LabelFormat,
    #[command(flatten)]
    pub convert: ConvertOpts,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum PartArg {
    Specific,
    General,
}

#[derive(Debug, Args)]
pub struct EvalBleuArgs {
    /// Canonical entries providing references and dimensions.
    #[arg(long)]
    pub entries: PathBuf,
    /// Hypotheses, one per line, aligned with the entries.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Score one half of the rule; both halves (table layout) when omitted.
    #[arg(long, value_enum)]
    pub part: Option<PartArg>,
    /// Row name in the table.
    #[arg(long, default_value = "model")]
    pub name: String,
    /// Write the JSON report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCis2Args {
    /// Predicted labels: plain text or conversion JSON-lines. Empty or
    /// invalid lines count as unparseable.
    #[arg(long)]
    pub predicted: PathBuf,
    /// Reference labels, same formats.
    #[arg(long)]
    pub reference: PathBuf,
    /// Entries for a per-dimension breakdown.
    #[arg(long)]
    pub entries: Option<PathBuf>,
    #[arg(long, value_name = "MAP", env = "CIS2KIT_RELATION_MAP")]
    pub relation_map: Option<String>,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "MAP", env = "CIS2KIT_RELATION_MAP")]
    pub relation_map: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// `uniform`, `dimension` (ten distinct tokens, 200 labels) or a
    /// dimension=surface file.
    #[arg(long, default_value = "dimension", env = "CIS2KIT_RELATION_MAP")]
    pub relation_map: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub dev_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub dev_out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(commands::Outcome::Clean) => ExitCode::SUCCESS,
        Ok(commands::Outcome::EntryErrors(n)) => {
            eprintln!("finished with {n} per-entry error(s)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
