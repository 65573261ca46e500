//! `adaptmt`: corpus construction, data selection, subword segmentation and
//! evaluation for test-set adapted machine translation.
//!
//! Exit status: 0 success, 2 usage error, 3 data or contract error, 4 external
//! command failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use adaptmt::metrics::{Metric, DEFAULT_BOOTSTRAP_SEED, DEFAULT_RESAMPLES};
use adaptmt::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_EXTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "adaptmt", version, about = "Test-set adapted MT corpus toolkit")]
struct Cli {
    /// RNG seed for randomized procedures (bootstrap resampling)
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_SEED)]
    seed: u64,

    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(next_help_heading = "Global options")]
struct GlobalArgs {
    /// Lowercase text before tokenization [default: off]
    #[arg(long, global = true, default_value_t = false)]
    lowercase: bool,

    /// Worker threads; 0 uses every available core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Where to write the run manifest [default: <primary output>.manifest.json; none when writing to stdout]
    #[arg(long, global = true, value_name = "PATH")]
    manifest_path: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select the pool sentences closest to a seed text with feature decay
    FdaSelect(FdaSelectArgs),
    /// Drop sentence pairs whose source/target length ratio is out of bounds
    FilterRatio(FilterRatioArgs),
    /// Back-translate a bitext's target side and concatenate authentic and synthetic pairs
    BuildHybrid(BuildHybridArgs),
    /// Learn BPE merge rules from one or more text files
    BpeLearn(BpeLearnArgs),
    /// Segment text into subwords with a learned BPE model
    BpeApply(BpeCodecArgs),
    /// Undo BPE segmentation
    BpeDecode(BpeCodecArgs),
    /// Score a hypothesis against a reference with BLEU, NIST, TER and chrF
    Evaluate(EvaluateArgs),
    /// Paired bootstrap significance test between two systems
    Significance(SignificanceArgs),
    /// Build a fine-tuning corpus tailored to a test set
    Adapt(AdaptArgs),
}

#[derive(Debug, Args, Serialize)]
struct FdaSelectArgs {
    /// Seed text whose n-grams define relevance
    #[arg(long, value_name = "FILE")]
    seed: PathBuf,

    /// Candidate sentences, one per line
    #[arg(long, value_name = "FILE")]
    pool: PathBuf,

    /// Number of sentences to select
    #[arg(long, default_value_t = 50_000)]
    size: usize,

    /// Selected sentences in selection order
    #[arg(long, value_name = "FILE", default_value = "-")]
    out: PathBuf,

    /// Also write the zero-based pool index of each selected sentence [default: not written]
    #[arg(long, value_name = "FILE")]
    indices: Option<PathBuf>,

    #[command(flatten)]
    fda: FdaArgs,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct FdaArgs {
    /// Maximum n-gram order of selection features
    #[arg(long, default_value_t = 3)]
    order: usize,

    /// Factor applied to a feature's weight each time it is selected
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct RatioArgs {
    /// Exclusive lower bound on source/target token ratio
    #[arg(long, default_value_t = 0.5)]
    lower: f64,

    /// Exclusive upper bound on source/target token ratio
    #[arg(long, default_value_t = 1.5)]
    upper: f64,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct TranslatorLimits {
    /// Seconds an external translator command may run per batch
    #[arg(long, default_value_t = 3600)]
    timeout: u64,

    /// Lines per external translator invocation
    #[arg(long, default_value_t = 10_000)]
    batch_size: usize,
}

#[derive(Debug, Args, Serialize)]
struct FilterRatioArgs {
    #[arg(long, value_name = "FILE")]
    src: PathBuf,

    #[arg(long, value_name = "FILE")]
    tgt: PathBuf,

    #[arg(long, value_name = "FILE")]
    out_src: PathBuf,

    #[arg(long, value_name = "FILE")]
    out_tgt: PathBuf,

    #[command(flatten)]
    ratio: RatioArgs,
}

#[derive(Debug, Args, Serialize)]
struct BuildHybridArgs {
    /// Authentic source side
    #[arg(long, value_name = "FILE")]
    src: PathBuf,

    /// Authentic target side
    #[arg(long, value_name = "FILE")]
    tgt: PathBuf,

    /// Target-to-source translator: identity, dict:PATH, file:PATH or cmd:TEMPLATE
    #[arg(long, value_name = "SPEC")]
    back: String,

    #[arg(long, value_name = "FILE")]
    out_src: PathBuf,

    #[arg(long, value_name = "FILE")]
    out_tgt: PathBuf,

    /// Write one authentic/synthetic tag per output pair [default: not written]
    #[arg(long, value_name = "FILE")]
    origins: Option<PathBuf>,

    #[command(flatten)]
    ratio: RatioArgs,

    #[command(flatten)]
    limits: TranslatorLimits,
}

#[derive(Debug, Args, Serialize)]
struct BpeLearnArgs {
    /// Training text; repeat to learn one joint model over several files
    #[arg(long, value_name = "FILE", required = true)]
    input: Vec<PathBuf>,

    /// Maximum number of merge rules
    #[arg(long, default_value_t = 30_000)]
    merges: usize,

    /// Model file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct BpeCodecArgs {
    /// Model file written by bpe-learn
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    #[arg(long, value_name = "FILE", default_value = "-")]
    input: PathBuf,

    #[arg(long, value_name = "FILE", default_value = "-")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    /// System output, one segment per line
    #[arg(long, value_name = "FILE")]
    hyp: PathBuf,

    /// Reference translation, aligned with the hypothesis
    #[arg(long, value_name = "FILE")]
    r#ref: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SignificanceArgs {
    #[arg(long, value_name = "FILE")]
    baseline: PathBuf,

    #[arg(long, value_name = "FILE")]
    system: PathBuf,

    #[arg(long, value_name = "FILE")]
    r#ref: PathBuf,

    /// One of bleu, nist, ter, chrf3, chrf1
    #[arg(long, default_value_t = Metric::Bleu)]
    metric: Metric,

    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
}

#[derive(Debug, Args, Serialize)]
struct AdaptArgs {
    /// Source-language test set
    #[arg(long, value_name = "FILE")]
    test: PathBuf,

    /// Target-language monolingual pool
    #[arg(long, value_name = "FILE")]
    pool: PathBuf,

    /// Source-to-target translator for the test set: identity, dict:PATH, file:PATH or cmd:TEMPLATE
    #[arg(long, value_name = "SPEC")]
    forward: String,

    /// Target-to-source translator for the selection: identity, dict:PATH, file:PATH or cmd:TEMPLATE
    #[arg(long, value_name = "SPEC")]
    back: String,

    /// Number of pool sentences to select
    #[arg(long, default_value_t = 50_000)]
    size: usize,

    /// Fine-tuning corpus, source side
    #[arg(long, value_name = "FILE")]
    out_src: PathBuf,

    /// Fine-tuning corpus, target side
    #[arg(long, value_name = "FILE")]
    out_tgt: PathBuf,

    /// Write the test-set pre-translation used as selection seed [default: not written]
    #[arg(long, value_name = "FILE")]
    seed_out: Option<PathBuf>,

    /// Write the pool index of each selected sentence [default: not written]
    #[arg(long, value_name = "FILE")]
    indices: Option<PathBuf>,

    /// Trainer command run on the emitted corpus, with {source} and {target} placeholders [default: none]
    #[arg(long, value_name = "TEMPLATE")]
    finetune_cmd: Option<String>,

    #[command(flatten)]
    fda: FdaArgs,

    #[command(flatten)]
    limits: TranslatorLimits,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Phase { source, .. } => exit_code(source),
        Error::InvalidConfig(_) => EXIT_USAGE,
        e if e.is_external() => EXIT_EXTERNAL,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
        {
            eprintln!("adaptmt: cannot start thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adaptmt: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
