//! `patchrank` command line: `rank`, `validate`, `synth`.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error. Diagnostics go to
//! stderr; stdout only carries requested data.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{read_failing_tests, validate_corpus, CorpusConfig, FAILING_TESTS};
use crate::exec::Execution;
use crate::objgraph::DEFAULT_NODE_BUDGET;
use crate::report::{render_plain, render_rank_csv};
use crate::synthgen::{generate_scenario, ScenarioParams, SynthError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DATA: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "patchrank", version, about = "Rank plausible repair patches by object-state similarity")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank the patches of a corpus and write the ranked list.
    Rank(RankArgs),
    /// Check that a corpus parses and validates.
    Validate(ValidateArgs),
    /// Generate a synthetic corpus with a planted best patch.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// One failing test per line. Defaults to failing-tests.txt in the corpus.
    #[arg(long)]
    failing_tests: Option<PathBuf>,
    /// Defaults to ranked.csv in the corpus.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write bare patch ids, best first.
    #[arg(long)]
    plain: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    patches: usize,
    #[arg(long)]
    tests: usize,
    #[arg(long)]
    out: PathBuf,
    /// Tests that fail on the original program.
    #[arg(long, default_value_t = 2)]
    failing: usize,
    /// Spread of decoy distances.
    #[arg(long, default_value_t = 0)]
    edit_noise: u64,
    /// Share of patches with an exit-count mismatch.
    #[arg(long, default_value_t = 0.0)]
    w_fraction: f64,
    #[arg(long, default_value_t = 12)]
    min_nodes: usize,
    #[arg(long, default_value_t = 40)]
    max_nodes: usize,
}

fn execution(jobs: Option<usize>) -> Execution {
    jobs.map_or_else(Execution::available, Execution::with_jobs)
}

fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_DATA
    })
}

fn cmd_rank(args: RankArgs) -> u8 {
    if !args.corpus.is_dir() {
        eprintln!("error: corpus directory {} does not exist", args.corpus.display());
        return EXIT_DATA;
    }
    let failing_path = match args.failing_tests {
        Some(p) => p,
        None => {
            let embedded = args.corpus.join(FAILING_TESTS);
            if !embedded.is_file() {
                eprintln!(
                    "error: --failing-tests is required when {} has no {FAILING_TESTS}",
                    args.corpus.display()
                );
                return EXIT_USAGE;
            }
            embedded
        }
    };
    let failing = match read_failing_tests(&failing_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DATA;
        }
    };
    let config = CorpusConfig {
        corpus_root: args.corpus.clone(),
        failing_tests: failing,
        node_budget: args.node_budget,
    };
    let (corpus, ranked) = match crate::rank_corpus(&config, &execution(args.jobs)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DATA;
        }
    };
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    let output = args.output.unwrap_or_else(|| args.corpus.join("ranked.csv"));
    if let Err(code) = write_file(&output, &render_rank_csv(&ranked)) {
        return code;
    }
    if let Some(plain) = args.plain {
        if let Err(code) = write_file(&plain, &render_plain(&ranked)) {
            return code;
        }
    }
    EXIT_OK
}

fn cmd_validate(args: ValidateArgs) -> u8 {
    let errors = validate_corpus(&args.corpus, args.node_budget, &execution(args.jobs));
    if errors.is_empty() {
        eprintln!("{}: ok", args.corpus.display());
        return EXIT_OK;
    }
    for e in &errors {
        println!("{e}");
    }
    eprintln!("{}: {} problem(s)", args.corpus.display(), errors.len());
    EXIT_DATA
}

fn cmd_synth(args: SynthArgs) -> u8 {
    let params = ScenarioParams {
        seed: args.seed,
        n_patches: args.patches,
        n_tests: args.tests,
        n_failing: args.failing,
        graph_size: args.min_nodes..=args.max_nodes,
        edit_noise: args.edit_noise,
        w_fraction: args.w_fraction,
    };
    match generate_scenario(&params, &args.out) {
        Ok(truth) => {
            eprintln!("wrote {} (planted patch {})", args.out.display(), truth.planted);
            EXIT_OK
        }
        Err(e @ SynthError::InvalidParams(_)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Rank(a) => cmd_rank(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(run(["patchrank", "rank"]), EXIT_USAGE);
        assert_eq!(run(["patchrank", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["patchrank", "rank", "--corpus", "x", "--jobs", "many"]), EXIT_USAGE);
    }

    #[test]
    fn missing_corpus_is_a_data_error() {
        assert_eq!(run(["patchrank", "rank", "--corpus", "/nonexistent/corpus"]), EXIT_DATA);
        assert_eq!(run(["patchrank", "validate", "--corpus", "/nonexistent/corpus"]), EXIT_DATA);
    }
}
