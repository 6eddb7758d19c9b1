use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adaptive_pls::decision::DecisionMode;
use adaptive_pls::harness::experiment::{environment, run, run_baseline, Metric, SecrecyCache};
use adaptive_pls::harness::output::{emit_outputs, report_dir, write_trace};
use adaptive_pls::harness::{Preset, RelativeIndicatorReport, ScenarioConfig};
use adaptive_pls::pls::PlsPolicy;
use adaptive_pls::secrecy::SecrecyMap;
use adaptive_pls::{Error, Result};

#[derive(Parser)]
#[command(name = "adaptive-pls", version, about = "Adaptive PLS policy selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML); omitted keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weight preset, overriding the file
    #[arg(long)]
    scenario: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut sc = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(p) = self.scenario {
            sc = sc.with_preset(p)?;
        }
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        Ok(sc)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train, evaluate, run the fixed-policy baselines and write a run directory
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        mode: Option<DecisionMode>,
        /// Seed range `N..M` (exclusive) or `N..=M`; one run directory per seed
        #[arg(long)]
        seeds: Option<String>,
        /// Override the number of training episodes
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Roll out one fixed policy at the baseline configuration
    Baseline {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        policy: PlsPolicy,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Rebuild relative-indicator tables from run directories
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write the ergodic secrecy capacity over the surface grid as CSV
    DumpSecrecyMap {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Policy played by every agent at the baseline configuration
        #[arg(long, default_value = "AN")]
        policy: PlsPolicy,
        #[arg(long, default_value = "secrecy-map.csv")]
        out: PathBuf,
    },
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::config(format!("seed range `{spec}` must look like N..M or N..=M"));
    let (start, end, inclusive) = if let Some((a, b)) = spec.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = spec.split_once("..") {
        (a, b, false)
    } else {
        let s: u64 = spec.trim().parse().map_err(|_| bad())?;
        return Ok(vec![s]);
    };
    let start: u64 = start.trim().parse().map_err(|_| bad())?;
    let end: u64 = end.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive { (start..=end).collect() } else { (start..end).collect() };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn print_report(report: &RelativeIndicatorReport, agents: usize) {
    let baselines: Vec<PlsPolicy> = PlsPolicy::ALL
        .into_iter()
        .filter(|p| report.cells.iter().any(|c| c.baseline == *p))
        .collect();
    for agent in 1..=agents {
        println!("  agent {agent}  (relative indicator, % vs. fixed policy)");
        print!("    {:<9}", "metric");
        for p in &baselines {
            print!("{:>10}", p.name());
        }
        println!();
        for m in Metric::ALL {
            print!("    {:<9}", m.name());
            for p in &baselines {
                match report.get(agent, *p, m) {
                    Some(v) => print!("{v:>10.1}"),
                    None => print!("{:>10}", "undef"),
                }
            }
            println!();
        }
    }
}

fn cmd_run(args: &ScenarioArgs, mode: Option<DecisionMode>, seeds: Option<&str>, episodes: Option<usize>, out: &Path) -> Result<()> {
    let mut sc = args.load()?;
    if let Some(m) = mode {
        sc.mode = m;
    }
    if let Some(e) = episodes {
        sc.hyperparams_mut(sc.mode).episodes = e;
    }
    let seeds = match seeds {
        Some(spec) => parse_seeds(spec)?,
        None => sc.sweep_seeds(),
    };
    let cache = SecrecyCache::new();
    let single = seeds.len() == 1;
    let mut reports = Vec::new();
    for seed in seeds {
        let mut run_sc = sc.clone();
        run_sc.seed = seed;
        run_sc.seeds.clear();
        let result = run(&run_sc, sc.mode, seed, &cache)?;
        let dir = if single { out.to_path_buf() } else { out.join(format!("seed-{seed}")) };
        emit_outputs(&result, &dir)?;
        let first = &result.trace.slots[0].profile;
        let actions: Vec<String> = first
            .0
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{}@{}", sc.policies[i][a.policy], sc.configs[i][a.config].label()))
            .collect();
        println!(
            "{} {} seed {seed}: mean network utility {:.4}, greedy actions [{}] -> {}",
            sc.name(),
            sc.mode,
            result.trace.mean_network_utility(),
            actions.join(", "),
            dir.display()
        );
        if single {
            print_report(&result.report, sc.agent_count());
        }
        reports.push(result.report);
    }
    if !single {
        println!("seed-averaged:");
        print_report(&RelativeIndicatorReport::average(&reports)?, sc.agent_count());
    }
    Ok(())
}

fn cmd_baseline(args: &ScenarioArgs, policy: PlsPolicy, out: &Path) -> Result<()> {
    let sc = args.load()?;
    let env = environment(&sc, sc.seed, &SecrecyCache::new())?;
    let slots = sc.hyperparams(sc.mode).slots;
    let trace = run_baseline(&env, &sc, policy, slots, sc.seed)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join(adaptive_pls::harness::output::baseline_file(policy));
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_trace(&trace, &sc, file).map_err(|source| Error::Csv { path: path.clone(), source })?;
    println!(
        "{policy} at {} dB, seed {}: mean network utility {:.4} -> {}",
        sc.baseline_config.label(),
        sc.seed,
        trace.mean_network_utility(),
        path.display()
    );
    Ok(())
}

fn cmd_report(input: &Path) -> Result<()> {
    let (runs, mean) = report_dir(input)?;
    let agents = mean.cells.iter().map(|c| c.agent).max().unwrap_or(0);
    println!("{} run(s) under {}", runs.len(), input.display());
    print_report(&mean, agents);
    println!("wrote {} and {}", input.join("report-runs.csv").display(), input.join("report-mean.csv").display());
    Ok(())
}

fn cmd_secrecy_map(args: &ScenarioArgs, policy: PlsPolicy, out: &Path) -> Result<()> {
    let sc = args.load()?;
    let model = sc.model()?;
    let (grid, _) = sc.secrecy_grid()?;
    let emissions = model.emissions(&sc.baseline_profile_for(policy)?);
    let map = SecrecyMap::compute(&model.network, &emissions, &grid, sc.n_mc, sc.seed)?;
    map.save(out)?;
    println!("{} grid points x {} agents -> {}", grid.len(), sc.agent_count(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            mode,
            seeds,
            episodes,
            out,
        } => cmd_run(scenario, *mode, seeds.as_deref(), *episodes, out),
        Command::Baseline { scenario, policy, out } => cmd_baseline(scenario, *policy, out),
        Command::Report { input } => cmd_report(input),
        Command::DumpSecrecyMap { scenario, policy, out } => cmd_secrecy_map(scenario, *policy, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
