use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixbo::engine::optimizer_ids;
use mixbo::tasks::task_ids;
use mixbo_bench::grid::parse_seed_range;
use mixbo_bench::{emit_report, load_records, probe_fit, run_grid, ExperimentConfig, ProbeConfig, ReportOptions};

#[derive(Parser)]
#[command(name = "mixbo", version, about = "Mixed-variable BO benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (task x optimizer x seed) grid; complete runs are skipped.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Record directory.
        #[arg(long, env = "MIXBO_OUT", default_value = "mixbo-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Emit CSV, SVG and summary files from a record directory.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Report uncorrected Wilcoxon p-values.
        #[arg(long)]
        no_holm: bool,
        #[arg(long)]
        no_svg: bool,
    },
    /// Held-out GP log-likelihood per kernel next to the kernel's BO result.
    ProbeFit {
        #[arg(long)]
        task: String,
        /// Seed range `a..b` (half-open) or `a..=b`.
        #[arg(long, default_value = "0..3")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "gp_o,gp_to,gp_hed")]
        kernels: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trajectory_budget: usize,
        #[arg(long, default_value_t = 75)]
        n_train: usize,
        #[arg(long, default_value_t = 100)]
        bo_budget: usize,
        /// Write rows as JSON lines here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    ListTasks,
    ListOptimizers,
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { config, out, workers } => {
            let config = ExperimentConfig::from_file(&config)?;
            let outcome = run_grid(&config, &out, workers)?;
            println!(
                "{} runs: {} new, {} skipped, {} new evaluations -> {}",
                outcome.records.len(),
                outcome.new_runs,
                outcome.skipped,
                outcome.new_evaluations,
                out.display()
            );
        }
        Command::Report {
            records,
            out,
            alpha,
            no_holm,
            no_svg,
        } => {
            let recs = load_records(&records)?;
            let options = ReportOptions {
                alpha,
                holm: !no_holm,
                svg: !no_svg,
            };
            for p in emit_report(&recs, &out, &options)? {
                println!("{}", p.display());
            }
        }
        Command::ProbeFit {
            task,
            seeds,
            kernels,
            trajectory_budget,
            n_train,
            bo_budget,
            out,
        } => {
            let config = ProbeConfig {
                kernels,
                trajectory_budget,
                n_train,
                bo_budget,
                ..ProbeConfig::default()
            };
            let mut lines = String::new();
            for seed in parse_seed_range(&seeds)? {
                for row in probe_fit(&task, seed, &config)? {
                    lines.push_str(&serde_json::to_string(&row)?);
                    lines.push('\n');
                }
            }
            match out {
                Some(p) => std::fs::write(&p, lines)?,
                None => print!("{lines}"),
            }
        }
        Command::ListTasks => task_ids().iter().for_each(|t| println!("{t}")),
        Command::ListOptimizers => optimizer_ids().iter().for_each(|o| println!("{o}")),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
