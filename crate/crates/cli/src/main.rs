use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qbrn::engine::{run, Limits, Solver, SolverConfig, Verdict};
use qbrn::formula::{parse_qdimacs, BooleanFamilyConfig};
use qbrn::harness::{
    cactus_series, eval_sweep, filter_trivial, generate_dataset, load_dataset, load_dir,
    manifest_rows, read_results, write_manifest, write_results, write_series, write_timing,
    HeuristicSpec, MANIFEST_NAME,
};
use qbrn::neural::{load_params, Hyper};
use qbrn::trainer::{Checkpoint, MetricsRow, MetricsWriter, Optimizer, TrainConfig, Trainer};

#[derive(Parser)]
#[command(name = "qbrn", version, about = "2QBF solver with learned branching heuristics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one QDIMACS file. Exit code 10 = TRUE, 20 = FALSE, 0 = UNKNOWN.
    Solve(SolveArgs),
    /// Write random-circuit 2QBF formulas to a directory.
    Generate(GenerateArgs),
    /// Write a manifest separating formulas solved without decisions.
    Filter {
        dir: PathBuf,
    },
    /// Train the policy with REINFORCE.
    Train(TrainArgs),
    /// Run one heuristic over a dataset and write a results CSV.
    Eval(EvalArgs),
    /// Turn a results CSV into a (rank, decisions) series.
    Cactus {
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicKind {
    Random,
    Vsids,
    Learned,
}

#[derive(Args)]
struct HeuristicArgs {
    #[arg(long, value_enum)]
    heuristic: HeuristicKind,
    /// Weight file for the learned heuristic.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Sample from the learned policy instead of taking the most probable literal.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl HeuristicArgs {
    fn spec(&self) -> Result<HeuristicSpec> {
        Ok(match self.heuristic {
            HeuristicKind::Random => HeuristicSpec::Random,
            HeuristicKind::Vsids => HeuristicSpec::Vsids,
            HeuristicKind::Learned => {
                let path = self
                    .weights
                    .as_ref()
                    .context("--heuristic learned needs --weights")?;
                let params =
                    load_params(path).with_context(|| format!("loading {}", path.display()))?;
                HeuristicSpec::Learned {
                    params: Arc::new(params),
                    sample: self.sample,
                }
            }
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    #[arg(long)]
    max_decisions: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Print the decision/flip/conflict/restart trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = BooleanFamilyConfig::default().num_inputs)]
    inputs: u32,
    #[arg(long, default_value_t = BooleanFamilyConfig::default().gate_limit_range.0)]
    min_gates: u32,
    #[arg(long, default_value_t = BooleanFamilyConfig::default().gate_limit_range.1)]
    max_gates: u32,
    #[arg(long, default_value_t = BooleanFamilyConfig::default().extra_clause_fraction)]
    extra_clauses: f64,
    #[arg(long, default_value_t = BooleanFamilyConfig::default().num_universals)]
    universals: u32,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Final weights; a `.json` sidecar with trainer counters is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once this many decisions have been taken in training episodes.
    #[arg(long, default_value_t = 2_000_000)]
    steps: u64,
    /// Metrics CSV, appended to. Defaults to `<out>.metrics.csv`.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Overwrite the `--out` checkpoint every N updates (0 = only at the end).
    #[arg(long, default_value_t = 50)]
    checkpoint_every: u64,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, default_value_t = TrainConfig::default().episodes_per_formula)]
    episodes_per_formula: usize,
    #[arg(long, default_value_t = TrainConfig::default().min_batch_timesteps)]
    min_batch: usize,
    #[arg(long, default_value_t = TrainConfig::default().lr_initial)]
    lr: f64,
    #[arg(long, default_value_t = TrainConfig::default().lr_final)]
    lr_final: f64,
    #[arg(long, default_value_t = TrainConfig::default().episode_cap)]
    episode_cap: usize,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Sgd)]
    optimizer: OptimizerKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerKind {
    Sgd,
    Adam,
}

impl From<OptimizerKind> for Optimizer {
    fn from(k: OptimizerKind) -> Optimizer {
        match k {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    #[arg(long)]
    max_decisions: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Results CSV. Wall times go to `<out>.timing.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Generate(a) => {
            let cfg = BooleanFamilyConfig {
                num_inputs: a.inputs,
                gate_limit_range: (a.min_gates, a.max_gates),
                extra_clause_fraction: a.extra_clauses,
                num_universals: a.universals,
            };
            let paths = generate_dataset(&cfg, a.seed, a.count, &a.out)?;
            println!("wrote {} formulas to {}", paths.len(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Filter { dir } => {
            let (entries, failures) = load_dir(&dir)?;
            let split = filter_trivial(entries);
            let manifest = dir.join(MANIFEST_NAME);
            write_manifest(&manifest, &manifest_rows(&split, &failures))?;
            println!(
                "kept {} removed {} unreadable {} -> {}",
                split.kept.len(),
                split.removed.len(),
                failures.len(),
                manifest.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Cactus { results, out } => {
            let series = cactus_series(&read_results(&results)?);
            let file = File::create(&out).with_context(|| out.display().to_string())?;
            write_series(BufWriter::new(file), &series)?;
            println!("{} solved runs -> {}", series.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn solve_cmd(a: SolveArgs) -> Result<ExitCode> {
    let bytes = std::fs::read(&a.file).with_context(|| a.file.display().to_string())?;
    let formula = Arc::new(parse_qdimacs(&bytes).with_context(|| a.file.display().to_string())?);
    let spec = a.heuristic.spec()?;
    let mut h = spec.build(a.heuristic.seed);
    let limits = Limits {
        max_decisions: a.max_decisions,
        max_seconds: a.max_seconds,
    };
    let config = SolverConfig {
        trace: a.trace,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(formula, config);
    let out = run(&mut solver, &mut h, limits)?;
    for e in solver.trace() {
        println!("{e}");
    }
    println!("s {}", out.verdict);
    println!(
        "c heuristic {} decisions {} conflicts {} reason {} seconds {:.3}",
        spec.id(),
        out.decisions_used,
        out.conflicts,
        out.reason_for_unknown,
        out.elapsed.as_secs_f64()
    );
    Ok(ExitCode::from(match out.verdict {
        Verdict::True => 10,
        Verdict::False => 20,
        Verdict::Unknown => 0,
    }))
}

fn metrics_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".metrics.csv");
    PathBuf::from(s)
}

fn train_cmd(a: TrainArgs) -> Result<ExitCode> {
    let data: Vec<_> = load_dataset(&a.data)?
        .into_iter()
        .map(|e| e.formula)
        .collect();
    let cfg = TrainConfig {
        episodes_per_formula: a.episodes_per_formula,
        min_batch_timesteps: a.min_batch,
        lr_initial: a.lr,
        lr_final: a.lr_final,
        episode_cap: a.episode_cap,
        optimizer: a.optimizer.into(),
        ..TrainConfig::default()
    };
    log::info!("training on {} formulas", data.len());
    let mut trainer = match &a.resume {
        Some(path) => {
            let ckpt = Checkpoint::load(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            if ckpt.seed != a.seed {
                bail!("checkpoint was trained with seed {}, not {}", ckpt.seed, a.seed);
            }
            Trainer::resume(data, cfg, ckpt)?
        }
        None => Trainer::new(data, cfg, Hyper::default(), a.seed)?,
    };
    let mut metrics = MetricsWriter::open(a.metrics.clone().unwrap_or_else(|| metrics_path(&a.out)))?;
    let out = a.out.clone();
    trainer.run(a.steps, |s, t| {
        metrics.append(&MetricsRow::from(s))?;
        if s.update % 10 == 0 {
            log::info!(
                "update {} steps {} return {:.4} solved {:.3} decisions {:.1} grad {:.3}",
                s.update,
                s.env_steps,
                s.mean_return,
                s.solve_rate,
                s.mean_decisions,
                s.grad_norm
            );
        }
        if a.checkpoint_every > 0 && s.update % a.checkpoint_every == 0 {
            t.checkpoint().save(&out)?;
        }
        Ok(())
    })?;
    trainer.checkpoint().save(&a.out)?;
    println!(
        "trained {} updates, {} env steps -> {}",
        trainer.counters().updates,
        trainer.counters().env_steps,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(a: EvalArgs) -> Result<ExitCode> {
    let data = load_dataset(&a.data)?;
    let spec = a.heuristic.spec()?;
    let limits = Limits {
        max_decisions: a.max_decisions,
        max_seconds: a.max_seconds,
    };
    let results = eval_sweep(&data, &spec, limits, a.heuristic.seed)?;
    write_results(&a.out, &results)?;
    let mut timing = a.out.as_os_str().to_owned();
    timing.push(".timing.csv");
    write_timing(Path::new(&timing), &results)?;
    let solved = results.iter().filter(|r| r.verdict != Verdict::Unknown).count();
    println!(
        "{}: solved {solved} of {} -> {}",
        spec.id(),
        results.len(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
