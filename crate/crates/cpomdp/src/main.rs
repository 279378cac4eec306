use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cpomdp::config::describe_keys;
use cpomdp::harness::{run_comparison, run_costprop_ablation, run_pareto_sweep};
use cpomdp::oracle::run_oracle_test;
use cpomdp::output;
use cpomdp::{Overrides, PlannerId, ProblemId, RunConfig};

#[derive(Parser)]
#[command(name = "cpomdp", version, about = "Constrained POMDP planning experiments", after_help = describe_keys())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the configured planners and write episodes.csv and summary.json.
    Run(Common),
    /// Sweep scalarization weights and write plot data under pareto/.
    Pareto(Common),
    /// Cost-propagation ablation from the initial LightDark belief.
    Ablation(Common),
    /// Check planners against the enumerated costly-listen optimum.
    OracleTest(Common),
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected `on` or `off`, got `{s}`")),
    }
}

#[derive(Args)]
struct Common {
    /// TOML config file; built-in LightDark defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, env = "CPOMDP_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Run only this planner.
    #[arg(long)]
    planner: Option<PlannerId>,
    #[arg(long, value_name = "on|off", value_parser = parse_switch)]
    min_cost_prop: Option<bool>,
    #[arg(long, value_name = "on|off", value_parser = parse_switch)]
    rolling_budget: Option<bool>,
    /// Record per-step planning time in wall_ms.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let overrides = Overrides {
            episodes: self.episodes,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            planner: self.planner,
            min_cost_propagation: self.min_cost_prop,
            rolling_budget: self.rolling_budget,
            record_wall_time: self.timing.then_some(true),
        };
        let cfg = match &self.config {
            Some(path) => RunConfig::from_file(path, &overrides)?,
            None => RunConfig::from_str("", &overrides)?,
        };
        if let Some(jobs) = self.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build_global()
                .context("configuring the worker pool")?;
        }
        Ok(cfg)
    }
}

fn run(cfg: &RunConfig) -> Result<()> {
    let cmp = run_comparison(cfg)?;
    let csv = cfg.out_dir.join("episodes.csv");
    let json = cfg.out_dir.join("summary.json");
    output::write_episodes_csv(&csv, &cmp.results)?;
    output::write_summary_json(&json, &cmp.table)?;
    print!("{}", output::format_table(&cmp.table));
    log::info!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn pareto(cfg: &RunConfig) -> Result<()> {
    let sweep = run_pareto_sweep(cfg)?;
    let dir = cfg.out_dir.join("pareto");
    output::write_pareto(&dir, &sweep)?;
    println!(
        "{:>12} {:>10} {:>10} {:>10} {:>10}",
        "lambda", "V_C", "sem", "V_R", "sem"
    );
    for p in sweep.sweep.iter().chain(std::iter::once(&sweep.constrained)) {
        let lambda = p.lambda.map_or("constrained".to_string(), |l| l.to_string());
        println!(
            "{lambda:>12} {:>10.4} {:>10.4} {:>10.3} {:>10.3}",
            p.stats.costs[0].mean, p.stats.costs[0].sem, p.stats.reward.mean, p.stats.reward.sem
        );
    }
    log::info!("wrote plot data under {}", dir.display());
    Ok(())
}

fn ablation(cfg: &RunConfig) -> Result<()> {
    if cfg.problem != ProblemId::Lightdark {
        anyhow::bail!("the ablation runs on lightdark only");
    }
    let rows = run_costprop_ablation(cfg)?;
    let dir = cfg.out_dir.join("ablation");
    output::write_ablation(&dir, &rows)?;
    print!("{}", output::format_ablation(&rows));
    Ok(())
}

fn oracle(cfg: &RunConfig) -> Result<bool> {
    let reports = run_oracle_test(cfg)?;
    let mut ok = true;
    for r in &reports {
        let pass = r.agreement() >= 0.95;
        ok &= pass;
        println!(
            "{:<12} budget {:<8} optimum {:<8} agreement {:>5.1}% ({}/{}) {}",
            r.planner,
            r.budget,
            r.oracle_action,
            100.0 * r.agreement(),
            r.matches,
            r.searches,
            if pass { "ok" } else { "MISMATCH" }
        );
    }
    let path = cfg.out_dir.join("oracle.json");
    output::write_text(&path, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => c.load().and_then(|cfg| run(&cfg)).map(|()| true),
        Command::Pareto(c) => c.load().and_then(|cfg| pareto(&cfg)).map(|()| true),
        Command::Ablation(c) => c.load().and_then(|cfg| ablation(&cfg)).map(|()| true),
        Command::OracleTest(c) => c.load().and_then(|cfg| oracle(&cfg)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
