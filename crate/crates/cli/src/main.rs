use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use herd_cli::config::{parse_switch, RunConfig};
use herd_cli::error::CliError;
use herd_cli::{checkpoint, harness, plot};
use herd_core::envs::by_name;

#[derive(Parser)]
#[command(
    name = "herd",
    version,
    about = "Curriculum-driven goal exploration for sparse-reward control tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and optionally write run artifacts
    Train(TrainArgs),
    /// Score a saved agent on fresh evaluation episodes
    Eval(EvalArgs),
    /// Train the full method and the plain hindsight baseline side by side
    Compare(CompareArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Environment: point_reach, push_gap, or throw
    #[arg(long)]
    env: Option<String>,
    /// Key=value settings file; explicit flags override its entries
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Training episodes collected per epoch
    #[arg(long)]
    episodes: Option<usize>,
    /// Deterministic evaluation episodes per epoch
    #[arg(long)]
    eval_episodes: Option<usize>,
    /// Gradient updates per epoch
    #[arg(long)]
    updates: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Episode-collection threads (results are identical for any count)
    #[arg(long)]
    workers: Option<usize>,
    /// Curriculum goal replacement
    #[arg(long, value_name = "on|off")]
    curriculum: Option<String>,
    /// Ball-noise goal augmentation
    #[arg(long, value_name = "on|off")]
    goal_aug: Option<String>,
    /// Curriculum-goal transition relabeling in update batches
    #[arg(long, value_name = "on|off")]
    trans_aug: Option<String>,
    /// Peak goal-replacement rate for the decaying schedule
    #[arg(long)]
    alpha: Option<f64>,
    /// Directory for progress.csv, curve.svg, final.agent, config.txt, goals/
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Saved agent file (final.agent from a training run)
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Environment the agent was trained for
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    env: String,
    /// Comma-separated run seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Directory for per-run artifacts and the joint comparison chart
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Train(args) => run_train(args),
        Command::Eval(args) => run_eval(args),
        Command::Compare(args) => run_compare(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn build_config(args: &TrainArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    if let Some(env) = &args.env {
        cfg.env = env.clone();
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.episodes {
        cfg.episodes_per_epoch = v;
    }
    if let Some(v) = args.eval_episodes {
        cfg.eval_episodes = v;
    }
    if let Some(v) = args.updates {
        cfg.updates_per_epoch = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = &args.curriculum {
        cfg.curriculum = parse_switch(v)?;
    }
    if let Some(v) = &args.goal_aug {
        cfg.goal_aug = parse_switch(v)?;
    }
    if let Some(v) = &args.trans_aug {
        cfg.trans_aug = parse_switch(v)?;
    }
    if let Some(v) = args.alpha {
        cfg.curriculum_cfg.alpha = v;
    }
    if cfg.env.is_empty() {
        return Err(CliError::config(
            "no environment given: pass --env or put env= in the --config file",
        ));
    }
    Ok(cfg)
}

fn run_train(args: &TrainArgs) -> Result<(), CliError> {
    let cfg = build_config(args)?;
    log::info!(
        "training on {} for {} epochs (seed {}, curriculum {}, goal_aug {}, trans_aug {})",
        cfg.env,
        cfg.epochs,
        cfg.seed,
        cfg.curriculum,
        cfg.goal_aug,
        cfg.trans_aug
    );
    let result = harness::train_with(&cfg, |r| {
        println!(
            "epoch {:>4}  success {:.3}  critic {:>9.4}  actor {:>9.4}  eps {:.3}  {:>6.2}s",
            r.epoch, r.success_rate, r.critic_loss, r.actor_loss, r.epsilon, r.wall_s
        );
    })?;
    println!("final success rate: {:.3}", result.final_success());
    if let Some(dir) = &args.out {
        harness::write_run_artifacts(&cfg, &result, dir)?;
        println!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    let agent = checkpoint::load(&args.checkpoint)?;
    let mut env = by_name(&args.env)?;
    if agent.dims() != env.dims() {
        return Err(CliError::config(format!(
            "checkpoint dimensions {:?} do not match environment {} ({:?})",
            agent.dims(),
            args.env,
            env.dims()
        )));
    }
    let rate = harness::evaluate(&agent, env.as_mut(), args.episodes, args.seed, 0)?;
    println!(
        "success rate over {} episodes of {}: {:.3}",
        args.episodes, args.env, rate
    );
    Ok(())
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let seeds: Result<Vec<u64>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<u64>())
        .collect();
    let seeds =
        seeds.map_err(|_| CliError::config(format!("bad --seeds list {text:?}")))?;
    if seeds.is_empty() {
        return Err(CliError::config("--seeds must name at least one seed"));
    }
    Ok(seeds)
}

fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut rows = Vec::new();
    let mut full_curves: Vec<Vec<f64>> = Vec::new();
    let mut base_curves: Vec<Vec<f64>> = Vec::new();
    for &seed in &seeds {
        let full = RunConfig {
            env: args.env.clone(),
            seed,
            epochs: args.epochs,
            ..RunConfig::default()
        };
        let baseline = RunConfig {
            curriculum: false,
            goal_aug: false,
            trans_aug: false,
            ..full.clone()
        };
        log::info!("seed {seed}: training full variant");
        let full_run = harness::train(&full)?;
        log::info!("seed {seed}: training baseline variant");
        let base_run = harness::train(&baseline)?;
        if let Some(dir) = &args.out {
            harness::write_run_artifacts(&full, &full_run, &dir.join(format!("full_seed{seed}")))?;
            harness::write_run_artifacts(
                &baseline,
                &base_run,
                &dir.join(format!("baseline_seed{seed}")),
            )?;
        }
        println!(
            "seed {seed}: full {:.3}  baseline {:.3}",
            full_run.final_success(),
            base_run.final_success()
        );
        rows.push((full_run.final_success(), base_run.final_success()));
        full_curves.push(full_run.reports.iter().map(|r| r.success_rate).collect());
        base_curves.push(base_run.reports.iter().map(|r| r.success_rate).collect());
    }
    let n = rows.len() as f64;
    let full_mean = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let base_mean = rows.iter().map(|r| r.1).sum::<f64>() / n;
    println!(
        "mean over {} seeds: full {:.3}  baseline {:.3}  gap {:+.3}",
        rows.len(),
        full_mean,
        base_mean,
        full_mean - base_mean
    );
    if let Some(dir) = &args.out {
        let mean_curve = |curves: &[Vec<f64>]| {
            (0..args.epochs)
                .map(|e| {
                    let m = curves.iter().map(|c| c[e]).sum::<f64>() / curves.len() as f64;
                    (e as f64, m)
                })
                .collect()
        };
        let series = vec![
            plot::Series { label: "full".into(), points: mean_curve(&full_curves) },
            plot::Series { label: "baseline".into(), points: mean_curve(&base_curves) },
        ];
        let path = dir.join("compare.svg");
        plot::write_chart(
            &path,
            &format!("{}: full vs baseline (mean of {} seeds)", args.env, rows.len()),
            "epoch",
            "success rate",
            Some((0.0, 1.0)),
            &series,
        )?;
        println!("comparison chart written to {}", path.display());
    }
    Ok(())
}
