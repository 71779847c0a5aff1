use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::info;

use relaxlab_core::config::{parse_config, preset, RunConfig, PRESETS};
use relaxlab_core::harness::{run_experiment, write_results};
use relaxlab_core::plot::{plot_csv, PlotKind};

#[derive(Parser, Debug)]
#[command(name = "relaxlab", version, about = "Jin-Xin relaxation experiments")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Shipped configuration by name.
    #[arg(long)]
    preset: Option<String>,

    /// Results root; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed added to the random-spectrum seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for sweeps.
    #[arg(long, env = "RELAXLAB_JOBS", default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a CSV as a standalone SVG.
    Plot {
        csv: PathBuf,
        /// log-log, linear or overdamping.
        #[arg(long, default_value = "log-log")]
        kind: String,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// List the shipped presets.
    Presets,
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => parse_config(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!("give --config <path> or --preset <name> (one of {})", PRESETS.join(", ")),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Some(Command::Plot { csv, kind, output, title }) => {
            let kind: PlotKind = kind.parse()?;
            let text = std::fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
            std::fs::write(output, plot_csv(&text, kind, title)?)?;
            println!("wrote {}", output.display());
            return Ok(true);
        }
        Some(Command::Presets) => {
            for p in PRESETS {
                println!("{p}");
            }
            return Ok(true);
        }
        None => {}
    }
    let cfg = load(&cli)?;
    if cli.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    info!("running {} with {} job(s)", cfg.experiment.name(), cli.jobs);
    let outcome = run_experiment(&cfg, cli.jobs)?;
    let dir = write_results(&outcome, &cfg, std::path::Path::new(&cfg.output))?;
    println!("{} -> {}", outcome.summary, dir.display());
    if let Some(c) = outcome.first_failure() {
        eprintln!("FAILED: {}: {}", c.name, c.detail);
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
