//! `tct`: runs teachers against learners under a time budget, sweeps
//! settings, renders reports from an archive and runs the theory checks.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tct_core::harness::{
    emit_reports, prepare, replay, run_experiment, sweep_alpha, sweep_teachers, BudgetRule, ClockSpec, DataSource,
    ExperimentConfig, LabelColumn, LearnerKind, RunArchive, RunRecord, SyntheticSpec, TeacherSpec, ALPHA_GRID,
};
use tct_core::stats::DEFAULT_GRID;
use tct_core::teachers::CountRounding;
use tct_core::theory::{
    run_bad_example, run_shrinkage, run_threshold_experiment, shape_check, verify_fallback_bounds, FallbackConfig,
    ThresholdConfig,
};
use tct_core::{ClockMode, CostModel, CostShape};

#[derive(Parser)]
#[command(name = "tct", version, about = "Time-constrained teaching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one teacher for a number of trials.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run several teachers, or one teacher over an alpha grid, on shared data.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated teacher ids; ignored with --alpha-grid.
        #[arg(long, value_delimiter = ',', default_value = "tct,double,osct,tbatch")]
        teachers: Vec<String>,
        /// Sweep alpha for --teacher instead of comparing teachers.
        #[arg(long)]
        alpha_grid: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full-training time, budget, m0 and full-data accuracy for a setup.
    Measure {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Re-render traces, curves and win/loss tables from an archive.
    Curves {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Normalized-time grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        svg: bool,
    },
    /// Re-run every archived record and compare it with the stored one.
    Replay {
        #[arg(long)]
        archive: PathBuf,
    },
    /// Theory harness on synthetic instances.
    Theory {
        #[command(subcommand)]
        check: TheoryCheck,
    },
    /// The finite instance on which the base teacher rarely finds the best hypothesis.
    BadExample {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = RoundingArg::Nearest)]
        rounding: RoundingArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum TheoryCheck {
    /// Samples needed by the base teacher and by one batch to reach each eps.
    Threshold {
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Per-round shrinkage frequency of the uncertainty interval.
    Shrinkage {
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        first_round: usize,
        #[arg(long, default_value_t = 10)]
        last_round: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Error of the base teacher at the extended budget against one batch.
    Fallback {
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Leave the target out of the hypothesis class.
        #[arg(long)]
        agnostic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    Floor,
    Nearest,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Sim,
    Wall,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Const,
    Log,
}

#[derive(Args)]
struct ExperimentArgs {
    /// tct, tct_dynamic, double, osct, osct_exp, osct_best, tbatch, tct_al or sgd.
    #[arg(long, default_value = "tct")]
    teacher: String,
    /// tree, bagged, logreg or svm.
    #[arg(long, default_value = "tree")]
    learner: String,
    /// CSV file with a header row.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Label column of --data: a header name, a 0-based index or `last`.
    #[arg(long, default_value = "last")]
    label: String,
    /// Built-in generator: blobs or threshold.
    #[arg(long)]
    synthetic: Option<String>,
    /// Rows generated for --synthetic.
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Initial sample size as a fraction of all rows.
    #[arg(long, default_value_t = 0.005)]
    m0_frac: f64,
    /// Absolute time budget; defaults to the full-training time.
    #[arg(long, conflicts_with = "budget_frac")]
    budget: Option<f64>,
    /// Budget as a fraction of the full-training time.
    #[arg(long)]
    budget_frac: Option<f64>,
    #[arg(long, value_enum, default_value_t = ClockArg::Sim)]
    clock: ClockArg,
    /// Exponent of the simulated training cost `m^k f(m)`.
    #[arg(long)]
    k: Option<u32>,
    /// Factor `f` of the simulated training cost.
    #[arg(long, value_enum, requires = "k")]
    f: Option<ShapeArg>,
    /// Simulated cost of classifying one example.
    #[arg(long, default_value_t = 0.0)]
    cclf: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for config.json, runs.jsonl and the reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also plot the curves as SVG.
    #[arg(long)]
    svg: bool,
}

impl ExperimentArgs {
    fn config(&self, out: Option<&Path>) -> Result<ExperimentConfig> {
        let teacher = TeacherSpec::parse(&self.teacher, self.alpha)?;
        let learner = LearnerKind::parse(&self.learner)?;
        let data = match (&self.data, &self.synthetic) {
            (Some(path), _) => DataSource::Csv { path: path.clone(), label: LabelColumn::parse(&self.label) },
            (None, Some(name)) => DataSource::Synthetic { spec: SyntheticSpec::preset(name, self.n)? },
            (None, None) => bail!("one of --data or --synthetic is required"),
        };
        let mut config = ExperimentConfig::new(teacher, learner, data, self.seed);
        config.clock = ClockSpec {
            mode: match self.clock {
                ClockArg::Sim => ClockMode::Simulated,
                ClockArg::Wall => ClockMode::Wall,
            },
            cost: self.k.map(|k| {
                let shape = match self.f {
                    Some(ShapeArg::Log) => CostShape::Log2,
                    _ => CostShape::Constant,
                };
                CostModel::new(k, shape)
            }),
            classify_cost: self.cclf,
        };
        config.budget = match (self.budget, self.budget_frac) {
            (Some(limit), _) => BudgetRule::Fixed { limit },
            (None, Some(fraction)) => BudgetRule::FullTraining { fraction },
            (None, None) => BudgetRule::default(),
        };
        config.m0_fraction = self.m0_frac;
        config.trials = self.trials;
        config.out = out.map(Path::to_path_buf);
        config.validate()?;
        Ok(config)
    }
}

fn print_summary(records: &[RunRecord]) {
    println!(
        "{:<22} {:<20} {:>5} {:>7} {:>9} {:>9}  stop",
        "teacher", "learner", "trial", "rounds", "accuracy", "full"
    );
    for r in records {
        match r.run() {
            Some(run) => println!(
                "{:<22} {:<20} {:>5} {:>7} {:>9.4} {:>9.4}  {:?}",
                r.teacher,
                r.learner,
                r.trial,
                run.rounds.len(),
                r.final_accuracy().unwrap_or(f64::NAN),
                r.full_accuracy,
                run.stop
            ),
            None => println!(
                "{:<22} {:<20} {:>5} {:>7} {:>9} {:>9.4}  unsupported",
                r.teacher, r.learner, r.trial, "-", "-", r.full_accuracy
            ),
        }
    }
}

fn save(config: &ExperimentConfig, records: &[RunRecord], output: &OutputArgs) -> Result<()> {
    let Some(dir) = &output.out else { return Ok(()) };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.json"), config.to_json()?)?;
    let mut archive = RunArchive::open(&dir.join("runs.jsonl"))?;
    archive.append_all(records)?;
    let all = RunArchive::load(archive.path())?;
    let files = emit_reports(&all, &DEFAULT_GRID, dir, output.svg)?;
    eprintln!(
        "wrote {} records to {}; reports in {}",
        records.len(),
        archive.path().display(),
        files.curves.parent().unwrap_or(dir).display()
    );
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { exp, output } => {
            let config = exp.config(output.out.as_deref())?;
            let records = run_experiment(&config)?;
            print_summary(&records);
            save(&config, &records, &output)?;
        }
        Command::Sweep { exp, teachers, alpha_grid, output } => {
            let config = exp.config(output.out.as_deref())?;
            let records = if alpha_grid {
                sweep_alpha(&config, &ALPHA_GRID)?
            } else {
                let specs = teachers.iter().map(|t| TeacherSpec::parse(t, exp.alpha)).collect::<Result<Vec<_>, _>>()?;
                sweep_teachers(&config, &specs)?
            };
            print_summary(&records);
            save(&config, &records, &output)?;
        }
        Command::Measure { exp } => {
            let config = exp.config(None)?;
            let prepared = prepare(&config)?;
            print_json(&serde_json::json!({
                "dataset": prepared.dataset.name,
                "train_size": prepared.dataset.train.len(),
                "test_size": prepared.dataset.test.len(),
                "t_full": prepared.t_full,
                "budget": prepared.budget,
                "m0": prepared.m0,
                "full_accuracy": prepared.full_accuracy,
            }))?;
        }
        Command::Curves { archive, out, grid, svg } => {
            let records = RunArchive::load(&archive).with_context(|| format!("reading {}", archive.display()))?;
            let grid = grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
            let files = emit_reports(&records, &grid, &out, svg)?;
            eprintln!("wrote {}, {} and {}", files.traces.display(), files.curves.display(), files.win_loss.display());
        }
        Command::Replay { archive } => {
            let records = RunArchive::load(&archive).with_context(|| format!("reading {}", archive.display()))?;
            let mut mismatched = 0;
            for r in &records {
                let again = replay(r)?;
                let same = serde_json::to_string(&again)? == serde_json::to_string(r)?;
                mismatched += usize::from(!same);
                println!(
                    "{} trial {} seed {}: {}",
                    r.teacher,
                    r.trial,
                    r.seed,
                    if same { "identical" } else { "DIFFERS" }
                );
            }
            if mismatched > 0 {
                bail!("{mismatched} of {} records did not replay identically", records.len());
            }
        }
        Command::Theory { check } => match check {
            TheoryCheck::Threshold { eps, alpha, trials, seed } => {
                let reports = eps
                    .iter()
                    .map(|&e| {
                        run_threshold_experiment(&ThresholdConfig { trials, ..ThresholdConfig::new(e, alpha, seed) })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let shape = shape_check(&reports);
                print_json(&serde_json::json!({
                    "reports": reports,
                    "tbatch_ratios": shape.tbatch_ratios,
                    "tct_ratios": shape.tct_ratios,
                    "sqrt_log_residual": shape.sqrt_log_residual,
                    "linear_log_residual": shape.linear_log_residual,
                }))?;
            }
            TheoryCheck::Shrinkage { alpha, trials, first_round, last_round, seed } => {
                print_json(&run_shrinkage(alpha, trials, first_round, last_round, seed)?)?;
            }
            TheoryCheck::Fallback { alpha, trials, agnostic, seed } => {
                let config = FallbackConfig { alpha, trials, agnostic, ..FallbackConfig::new(seed) };
                print_json(&verify_fallback_bounds(&config)?)?;
            }
        },
        Command::BadExample { trials, rounds, alpha, rounding, seed } => {
            let rounding = match rounding {
                RoundingArg::Floor => CountRounding::Floor,
                RoundingArg::Nearest => CountRounding::Nearest,
            };
            print_json(&run_bad_example(trials, rounds, alpha, rounding, seed)?)?;
        }
    }
    Ok(())
}
