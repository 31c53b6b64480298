//! `fact`: generate, ingest, annotate, split, build tasks, run baselines,
//! and score predictions, all from JSONL files with reproducible seeds.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod cmds;
mod io;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags or malformed configuration. Exit code 2.
    Config,
    /// Generation starved: too many slots exhausted their attempts. Exit
    /// code 3.
    Starved,
    /// Malformed or insufficient input data. Exit code 1.
    Data,
    /// Filesystem failure. Exit code 1.
    Io,
}

impl ErrorKind {
    fn name(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Starved => "starved",
            ErrorKind::Data => "data",
            ErrorKind::Io => "io",
        }
    }

    fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Starved => 3,
            ErrorKind::Data | ErrorKind::Io => 1,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    kind: ErrorKind,
    msg: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, msg: impl Into<String>) -> CliError {
        CliError { kind, msg: msg.into() }
    }
}

#[derive(Parser)]
#[command(name = "fact", version, about = "Integer-sequence benchmark pipeline")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores). Output is
    /// byte-identical for any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic sequences for one category.
    Generate(GenerateArgs),
    /// Convert OEIS exports (stripped or JSONL) into sequence records.
    IngestOeis(IngestArgs),
    /// Assign category membership levels to sequence records.
    Annotate(AnnotateArgs),
    /// Split records into train / val / test_synth / test_oeis.
    Split(SplitArgs),
    /// Build one benchmark task file from sequence records.
    Tasks(TasksArgs),
    /// Fit a reference model on a train task file and predict a test one.
    Baseline(BaselineArgs),
    /// Score predictions against task instances.
    Eval(EvalArgs),
}

#[derive(clap::Args)]
pub struct GenerateArgs {
    /// Generative category (polynomial, exponential, prime, periodic,
    /// modulo, trigonometric, finite).
    #[arg(long)]
    category: String,
    /// Number of sequences to generate.
    #[arg(long)]
    count: usize,
    /// Terms per sequence.
    #[arg(long, default_value_t = 64)]
    terms: usize,
    /// Shortest formula length in the schedule.
    #[arg(long, default_value_t = 2)]
    len_min: u32,
    /// Longest formula length in the schedule.
    #[arg(long, default_value_t = 20)]
    len_max: u32,
    /// RNG seed (falls back to $FACT_SEED, then 1234).
    #[arg(long)]
    seed: Option<u64>,
    /// Output records file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IngestFormat {
    /// OEIS "stripped" dump: `A000045 ,0,1,1,2,3,5,...`.
    Stripped,
    /// One JSON entry per line with the full 18-field schema.
    Jsonl,
}

impl IngestFormat {
    fn name(self) -> &'static str {
        match self {
            IngestFormat::Stripped => "stripped",
            IngestFormat::Jsonl => "jsonl",
        }
    }
}

#[derive(clap::Args)]
pub struct IngestArgs {
    /// Input dump file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: IngestFormat,
    /// Output records file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct AnnotateArgs {
    /// Records to annotate (JSONL).
    #[arg(long)]
    input: PathBuf,
    /// Optional OEIS entries (JSONL) for text-based methods, keyed by id.
    #[arg(long)]
    entries: Option<PathBuf>,
    /// Annotator configuration JSON; defaults to the built-in set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output records file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct SplitArgs {
    /// Input records files (repeatable; merged before splitting).
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// train:val:test_synth weights, plus an optional fourth part that
    /// requests the organic test_oeis set.
    #[arg(long, default_value = "9:1:1:1")]
    ratios: String,
    /// Disable stratification by level-3+ category combination.
    #[arg(long)]
    no_stratify: bool,
    /// RNG seed (falls back to $FACT_SEED, then 1234).
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the four split files plus manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct TasksArgs {
    /// Task kind: classify_ovr, classify_multi, similarity, nspp,
    /// continuation, unmasking.
    #[arg(long)]
    task: String,
    /// Input records file (JSONL).
    #[arg(long)]
    input: PathBuf,
    /// Input window length (per side for nspp; the prefix length for
    /// continuation).
    #[arg(long, default_value_t = 50)]
    window: usize,
    /// Target category (classify_ovr only).
    #[arg(long)]
    category: Option<String>,
    /// Restrict to records of one category at level 3+ and mark instances
    /// within-scope (nspp, continuation, unmasking, similarity).
    #[arg(long)]
    scope_category: Option<String>,
    /// Cap on instances per class (classify_ovr).
    #[arg(long)]
    per_side: Option<usize>,
    /// Where negative nspp windows come from: aligned or random.
    #[arg(long, default_value = "aligned")]
    gap_policy: String,
    /// Independent masking probability per position (unmasking).
    #[arg(long, default_value_t = 0.25)]
    mask_prob: f64,
    /// Pool candidates per category (similarity).
    #[arg(long, default_value_t = 5)]
    per_category: usize,
    /// RNG seed (falls back to $FACT_SEED, then 1234).
    #[arg(long)]
    seed: Option<u64>,
    /// Output task file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct BaselineArgs {
    /// dummy or knn.
    #[arg(long)]
    model: String,
    /// Training task file (JSONL).
    #[arg(long)]
    train: PathBuf,
    /// Task file to predict (JSONL).
    #[arg(long)]
    test: PathBuf,
    /// Neighbor count for knn; also caps emitted candidates.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Output predictions file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    /// Task instances (JSONL).
    #[arg(long)]
    tasks: PathBuf,
    /// Predictions (JSONL).
    #[arg(long)]
    preds: PathBuf,
    /// k for Recall@k and candidate truncation.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
}

/// Flag, then $FACT_SEED, then 1234.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("FACT_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::new(ErrorKind::Config, format!("FACT_SEED must be an integer, got `{text}`"))
        }),
        Err(_) => Ok(1234),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            fail(CliError::new(ErrorKind::Config, format!("--jobs: {e}")));
        }
    }
    let result = match &cli.command {
        Command::Generate(args) => {
            resolve_seed(args.seed).and_then(|seed| cmds::cmd_generate(args, seed))
        }
        Command::IngestOeis(args) => cmds::cmd_ingest(args),
        Command::Annotate(args) => cmds::cmd_annotate(args),
        Command::Split(args) => resolve_seed(args.seed).and_then(|seed| cmds::cmd_split(args, seed)),
        Command::Tasks(args) => resolve_seed(args.seed).and_then(|seed| cmds::cmd_tasks(args, seed)),
        Command::Baseline(args) => cmds::cmd_baseline(args),
        Command::Eval(args) => cmds::cmd_eval(args),
    };
    if let Err(e) = result {
        fail(e);
    }
}

fn fail(e: CliError) -> ! {
    eprintln!("error: {}: {}", e.kind.name(), e.msg);
    std::process::exit(e.kind.exit_code());
}
