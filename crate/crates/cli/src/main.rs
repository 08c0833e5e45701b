use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use qlattice_cli::commands;
use qlattice_cli::config::{Config, DEFAULT_SEED};
use qlattice_cli::manifest::RunManifest;
use qlattice_cli::{OutputFormat, RunContext};

/// Quantum transport and localization on 1d/2d tight-binding lattices.
#[derive(Parser)]
#[command(name = "qlattice", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Re-run the resolved config stored in a previous run's manifest.
    #[arg(long, global = true, value_name = "MANIFEST")]
    from_manifest: Option<PathBuf>,

    /// Override the master/disorder seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: env QLATTICE_OUT_DIR, then ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for ensemble sweeps (default: env
    /// QLATTICE_WORKERS, then all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Dataset format: csv (default) or json. Summaries are always JSON.
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum random walk: populations, transport curve, group velocity.
    Qrw,
    /// Disorder-ensemble sweep: PR, localization lengths, power-law fit.
    Anderson,
    /// Wannier-Stark sweep: Bloch periods, spreads, anisotropy ratios.
    Stark,
    /// Entanglement metrics along a walk.
    Entangle,
    /// Distance-shell reduction of a corner walk.
    Reduce {
        /// Also evolve both systems and report the max deviation.
        #[arg(long)]
        verify: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Qrw => "qrw",
            Self::Anderson => "anderson",
            Self::Stark => "stark",
            Self::Entangle => "entangle",
            Self::Reduce { .. } => "reduce",
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut config = match (&cli.from_manifest, &cli.config) {
        (Some(manifest_path), _) => {
            let manifest = RunManifest::load(manifest_path)?;
            if manifest.command != cli.command.name() {
                bail!(
                    "manifest records command {:?} but {:?} was requested",
                    manifest.command,
                    cli.command.name()
                );
            }
            manifest.config
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            Config::parse(&text)?
        }
        (None, None) => bail!("either --config or --from-manifest is required"),
    };

    if let Some(seed) = cli.seed {
        if let Some(d) = &mut config.disorder {
            d.seed = seed;
        }
        if let Some(a) = &mut config.anderson {
            a.seed = seed;
        } else if matches!(cli.command, Command::Anderson) {
            let resolved = config.resolve()?;
            let mut section = commands::anderson::default_section(resolved.spec.kind());
            section.seed = seed;
            config.anderson = Some(section);
        }
    }
    Ok(config)
}

fn effective_seed(command: &Command, config: &Config) -> Option<u64> {
    match command {
        Command::Anderson => {
            Some(config.anderson.as_ref().map_or(DEFAULT_SEED, |a| a.seed))
        }
        _ => config.disorder.as_ref().map(|d| d.seed),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;

    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("QLATTICE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let workers = cli.workers.or_else(|| {
        std::env::var("QLATTICE_WORKERS").ok().and_then(|w| w.parse().ok())
    });
    if let Some(workers) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already initialized")?;
    }

    let ctx = RunContext { config: config.clone(), out_dir: out_dir.clone(), format: cli.format };
    let started = Instant::now();
    let outputs = match &cli.command {
        Command::Qrw => commands::qrw::run(&ctx)?,
        Command::Anderson => commands::anderson::run(&ctx)?,
        Command::Stark => commands::stark::run(&ctx)?,
        Command::Entangle => commands::entangle::run(&ctx)?,
        Command::Reduce { verify } => commands::reduce::run(&ctx, *verify)?,
    };

    let mut manifest =
        RunManifest::new(cli.command.name(), effective_seed(&cli.command, &config), config);
    manifest.outputs = outputs
        .iter()
        .map(|p| p.file_name().expect("named file").to_string_lossy().into_owned())
        .collect();
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(&out_dir)?;

    for name in &manifest.outputs {
        eprintln!("wrote {}", out_dir.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": {
                    "command": cli.command.name(),
                    "message": format!("{err:#}"),
                }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
