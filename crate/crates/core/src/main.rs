use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcent::runner::{self, emit, preset, run_scenario, ScenarioConfig, PRESETS};
use qcent::Result;

/// Quantum and classical entropy runs for coupled quartic oscillators.
#[derive(Parser)]
#[command(name = "qcent", version)]
struct Cli {
    /// Worker threads; defaults to one per CPU.
    #[arg(long, global = true, env = "QCENT_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (or a config file) and write CSV and SVG files.
    Run {
        #[arg(long, required_unless_present = "config", conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ntraj: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_plot: bool,
    },
    /// List compiled-in presets.
    ListPresets {
        /// Print each panel's config as TOML.
        #[arg(long)]
        show: bool,
    },
    /// Validate a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the anchor and convergence checks.
    Selfcheck,
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(w) = cli.workers {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
    match cli.command {
        Command::Run {
            preset: name,
            config,
            seed,
            ntraj,
            out,
            no_plot,
        } => {
            let mut cfgs = match (name, config) {
                (Some(n), _) => preset(&n)?,
                (None, Some(path)) => vec![ScenarioConfig::from_file(&path)?],
                (None, None) => unreachable!("clap requires one of them"),
            };
            for cfg in &mut cfgs {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                if let Some(n) = ntraj {
                    cfg.n_traj = n;
                }
            }
            let scenarios = cfgs.iter().map(|c| c.resolve()).collect::<Result<Vec<_>>>()?;
            for s in &scenarios {
                eprintln!(
                    "running {}: {:?}, alpha = {}, E0 = {}, n = {}, t_final = {}",
                    s.name, s.kind, s.params.alpha, s.e0, s.grid.n, s.t_final
                );
                let series = run_scenario(s)?;
                if let Some(w) = series.warnings.first() {
                    eprintln!("  warning: {w} ({} such samples)", series.warnings.len());
                }
                for path in emit(&series, &out, !no_plot)? {
                    println!("{}", path.display());
                }
            }
            Ok(true)
        }
        Command::ListPresets { show } => {
            for p in PRESETS {
                println!("{:24} {}", p.name, p.description);
                if show {
                    for c in preset(p.name)? {
                        for line in c.to_toml().lines() {
                            println!("    {line}");
                        }
                        println!();
                    }
                }
            }
            Ok(true)
        }
        Command::Validate { config } => {
            let s = ScenarioConfig::from_file(&config)?.resolve()?;
            println!(
                "ok: {} ({:?}), grid {} on [{}, {}), {} samples",
                s.name,
                s.kind,
                s.grid.n,
                s.grid.x_min,
                s.grid.x_max,
                s.sample_count()
            );
            Ok(true)
        }
        Command::Selfcheck => {
            let checks = runner::selfcheck::run()?;
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
