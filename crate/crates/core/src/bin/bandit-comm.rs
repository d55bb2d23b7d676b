use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use bandit_comm::config::{self, RawConfig, PRESETS};
use bandit_comm::metrics::{linear_fit, log_fit};
use bandit_comm::montecarlo::run_experiment_with_progress;
use bandit_comm::output::{emit_results, read_series, RunManifest};
use bandit_comm::{Error, ProtocolKind};

#[derive(Parser)]
#[command(
    name = "bandit-comm",
    version,
    about = "Multi-agent UCB bandits under partial communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV results plus a manifest.
    Run(RunArgs),
    /// Inspect built-in presets.
    Preset {
        #[command(subcommand)]
        command: PresetCommand,
    },
    /// Fit an emitted series against ln(t) and t.
    Fit(FitArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<i64>,
    /// Comma-separated, e.g. `full,explore-only`.
    #[arg(long, value_delimiter = ',')]
    protocols: Option<Vec<String>>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    parallelism: Option<i64>,
    /// Reuse the same reward streams for every protocol.
    #[arg(long)]
    shared_randomness: bool,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum PresetCommand {
    List,
    /// Print a preset as a config file.
    Show {
        name: String,
    },
}

#[derive(clap::Args)]
struct FitArgs {
    /// A CSV written by `run`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "explore-only")]
    protocol: String,
    /// First round of the fit window.
    #[arg(long, default_value_t = 100)]
    from: usize,
    /// Last round of the fit window; defaults to the horizon.
    #[arg(long)]
    to: Option<usize>,
}

fn run(args: RunArgs) -> Result<(), Error> {
    let flags = RawConfig {
        preset: args.preset,
        seed: args.seed,
        trials: args.trials,
        protocols: args.protocols,
        parallelism: args.parallelism,
        shared_randomness: args.shared_randomness.then_some(true),
        ..Default::default()
    };
    let (resolved, plan) = config::parse_config(args.config.as_deref(), &flags)?;

    let quiet = args.quiet;
    let step = (plan.trials() / 10).max(1);
    let progress = move |p: ProtocolKind, done: usize, total: usize| {
        if !quiet && (done.is_multiple_of(step) || done == total) {
            eprintln!("[{p}] {done}/{total} trials");
        }
    };
    if !quiet {
        eprintln!(
            "running {} trials x {} protocols, K={}, N={}, T={}",
            plan.trials(),
            plan.protocols().len(),
            resolved.agents,
            resolved.mu.len(),
            resolved.horizon
        );
    }
    let started = Instant::now();
    let results = run_experiment_with_progress(&plan, &progress)?;
    let mut manifest = RunManifest::new(resolved, started.elapsed().as_secs_f64());
    let written = emit_results(&results, &mut manifest, &args.out)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn preset(command: PresetCommand) -> Result<(), Error> {
    match command {
        PresetCommand::List => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.description);
            }
        }
        PresetCommand::Show { name } => {
            let raw = config::preset(&name)?;
            let text = toml::to_string(&raw).map_err(|e| Error::Usage(e.to_string()))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Error> {
    let protocol: ProtocolKind = args.protocol.parse()?;
    let series = read_series(&args.input, protocol)?;
    let to = args.to.unwrap_or(series.len());
    let log = log_fit(&series, args.from..=to)?;
    let lin = linear_fit(&series, args.from..=to)?;
    println!("protocol {protocol} window {}..={to}", args.from);
    println!(
        "log    slope {} intercept {} r2 {}",
        log.slope, log.intercept, log.r_squared
    );
    println!(
        "linear slope {} intercept {} r2 {}",
        lin.slope, lin.intercept, lin.r_squared
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Preset { command } => preset(command),
        Command::Fit(args) => fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
