//! `curvlab` command-line driver.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail};
use clap::{Parser, Subcommand};
use curvlab::campaign::{run_suite, SUITES};
use curvlab::scenarios::SCENARIOS;

#[derive(Parser)]
#[command(name = "curvlab", version, about = "Curvature-flow experiments and verification campaigns")]
struct Cli {
    /// Print the scenario, target and suite registries and exit.
    #[arg(long)]
    list_scenarios: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios listed in a TOML config.
    Run { config: PathBuf },
    /// Run a randomized inequality campaign.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Samples per case; accepts `1000000` or `1e6`.
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        samples: u64,
    },
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("`{s}` is not a sample count")),
    }
}

fn list() {
    println!("acceptance scenarios (target = \"acceptance\", config.name):");
    for (id, what) in SCENARIOS {
        println!("  {id:<22} {what}");
    }
    println!("targets: support_flow entropy_gcf mesh_flow curvature_algebra acceptance");
    println!("verification suites (target = \"curvature_algebra\", config.suite):");
    for s in SUITES {
        println!("  {s}");
    }
}

fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!("{e}"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if cli.list_scenarios {
        list();
        return Ok(true);
    }
    match cli.command {
        None => bail!("nothing to do; see --help"),
        Some(Command::Verify { suite, seed, samples }) => {
            if samples == 0 {
                bail!("--samples must be positive");
            }
            init_threads(cli.threads)?;
            let report = run_suite(&suite, seed, samples)?;
            println!("{report}");
            if let Some(out) = cli.out {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join(format!("{suite}.json")), serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(report.passed)
        }
        Some(Command::Run { config }) => {
            let plan = config::load(&config)?;
            init_threads(cli.threads.or(plan.threads))?;
            let out = cli.out.or_else(|| plan.out.clone().map(PathBuf::from)).unwrap_or_else(|| runner::default_out(&config));
            let summary = runner::run_plan(&plan, &config, &out)?;
            for s in &summary.scenarios {
                let status = serde_json::to_value(s.status)?;
                println!("{:<24} {:<18} {}", s.id, s.target, status.as_str().unwrap_or("?"));
                if let Some(e) = &s.error {
                    println!("    error: {e}");
                }
                for c in s.checks.iter().filter(|c| !c.passed) {
                    println!("    failed: {} = {:e} (needs {} {:e})", c.name, c.value, c.op, c.bound);
                }
            }
            println!("wrote {}", out.join("summary.json").display());
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
