use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sas::io::{load_pool, save_pool, summary};
use sas::report_out;
use sas::scores_csv::write_scores;
use sas::selection_json::{parse_selection, selection_json, FILE_CACHE_TOLERANCE};
use sas::sweep_out::{parse_grid, run_and_write};
use sas_core::report::selection_report;
use sas_core::synth::{generate_pool, SyntheticSpec};
use sas_core::{score_pool, select, Ablation, SelectionConfig, SelectorKind, SemanticSpace};

/// Semantic-aware sampling of generated images in CLIP space.
#[derive(Parser)]
#[command(name = "sas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a pool file and print a summary.
    Validate { pool: PathBuf },
    /// Write per-image scores as CSV.
    Score {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the mixed score with this diversity weight.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
    },
    /// Select images per class and write a selection JSON.
    Sample(SampleArgs),
    /// Summarize a selection as JSON or CSV (chosen by the output extension).
    Report {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic pool.
    Synth {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        dup: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of selection configs and write one CSV.
    Sweep {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    ipc: usize,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value = "sas")]
    selector: SelectorKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_rel: bool,
    #[arg(long)]
    no_sep: bool,
    #[arg(long)]
    no_div: bool,
    #[arg(long)]
    out: PathBuf,
}

impl SampleArgs {
    fn config(&self) -> SelectionConfig {
        SelectionConfig {
            ipc: self.ipc,
            candidate_ratio: self.ratio,
            selector: self.selector,
            lambda: self.lambda,
            seed: self.seed,
            ablation: Ablation {
                use_rel: !self.no_rel,
                use_sep: !self.no_sep,
                use_div: !self.no_div,
            },
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { pool } => {
            let pool = load_pool(&pool)?;
            print!("{}", summary(&pool));
        }
        Command::Score { pool, out, lambda } => {
            let pool = load_pool(&pool)?;
            let mut table = score_pool(&SemanticSpace::new(&pool));
            if let Some(lambda) = lambda {
                table = table.with_mixed(&pool, lambda)?;
            }
            let mut sink = create(&out)?;
            write_scores(&pool, &table, &mut sink)?;
            sink.flush()?;
        }
        Command::Sample(args) => {
            let pool = load_pool(&args.pool)?;
            let space = SemanticSpace::new(&pool);
            let table = score_pool(&space);
            let selection = select(&space, &table, &args.config())?;
            for w in &selection.warnings {
                eprintln!("warning: {w}");
            }
            fs::write(&args.out, selection_json(&pool, &selection)?)
                .with_context(|| format!("cannot write {}", args.out.display()))?;
        }
        Command::Report { pool, selection, out } => {
            let pool = load_pool(&pool)?;
            let selection = parse_selection(&read_text(&selection)?, &pool)?;
            let report = selection_report(&pool, &selection, FILE_CACHE_TOLERANCE)?;
            let csv = match out.extension().and_then(|e| e.to_str()) {
                Some("csv") => true,
                Some("json") => false,
                _ => bail!("report output must end in .json or .csv"),
            };
            let mut sink = create(&out)?;
            if csv {
                report_out::write_csv(&pool, &report, &mut sink)?;
            } else {
                report_out::write_json(&pool, &report, &mut sink)?;
            }
            sink.flush()?;
            print!("{}", report_out::table(&pool, &report));
        }
        Command::Synth {
            dim,
            classes,
            per_class,
            kappa,
            dup,
            seed,
            out,
        } => {
            let spec = SyntheticSpec {
                dim,
                n_classes: classes,
                per_class,
                concentration: kappa,
                duplicate_fraction: dup,
                seed,
            };
            save_pool(&generate_pool(&spec)?.pool, &out)?;
        }
        Command::Sweep { pool, grid, out } => {
            let pool = load_pool(&pool)?;
            let grid = parse_grid(&read_text(&grid)?)?;
            let mut sink = create(&out)?;
            let s = run_and_write(&pool, &grid, &mut sink)?;
            sink.flush()?;
            println!("{} configs ok, {} failed", s.ok, s.failed);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
