use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use postrisk::config::ExperimentConfig;
use postrisk::experiment::run_experiment;
use postrisk::pool::Pool;
use postrisk::{cases, output, plot, summary};

#[derive(Parser)]
#[command(name = "postrisk", version, about = "Posterior rare-event estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed of the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `out` of the file, then `runs/<label>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draws the synthetic truth and its data and writes truth.json.
    GenerateTruth {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the configured estimator and writes the run directory and figures.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Redraws the figures of a run directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints a table over run directories and writes summary.csv.
    Summarize {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Path of the csv table; defaults to summary.csv in the current directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(cfg: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| cfg.out.clone()).unwrap_or_else(|| {
        let label = if cfg.label.is_empty() { cfg.method.name() } else { cfg.label.as_str() };
        Path::new("runs").join(label)
    })
}

fn load(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenerateTruth { common } => {
            let cfg = load(&common)?;
            let seed = common.seed.unwrap_or(cfg.data.truth_seed);
            let Some(truth) = cases::generate_truth(&cfg, seed)? else {
                bail!("the {:?} case has no synthetic truth", cfg.test_case);
            };
            let dir = out_dir(&cfg, common.out);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            output::write_json(&dir.join(output::TRUTH), &truth)?;
            println!(
                "{}",
                serde_json::json!({
                    "truth_seed": seed,
                    "qoi": truth.qoi,
                    "qoi_censored": truth.qoi_censored,
                    "observations": truth.observed.len(),
                    "out": dir,
                })
            );
        }
        Command::Run { common, reps, threads } => {
            let mut cfg = load(&common)?;
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let dir = out_dir(&cfg, common.out);
            let pool = Pool::new(cfg.threads)?;
            let outcome = run_experiment(&cfg, &pool)?;
            output::write_outcome(&dir, &outcome)?;
            plot::render_dir(&dir)?;
            summary::print_table(std::io::stdout().lock(), &summary::rows(&outcome.report))?;
        }
        Command::Plot { out } => {
            for p in plot::render_dir(&out)? {
                println!("{}", p.display());
            }
        }
        Command::Summarize { dirs, out } => {
            let mut rows = Vec::new();
            for d in &dirs {
                rows.extend(summary::rows(&output::read_report(d)?));
            }
            summary::print_table(std::io::stdout().lock(), &rows)?;
            summary::write_csv(&out.unwrap_or_else(|| PathBuf::from("summary.csv")), &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}
