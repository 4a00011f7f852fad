use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ringblow::cli::{load_config, resolve_out_dir, run_experiment, write_error, Command, OUT_ENV};

#[derive(Parser)]
#[command(name = "ringblow", version, about = "Standing-ring blow-up experiments for the radial nonlinear heat equation")]
struct Cli {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $RINGBLOW_OUT/<command> or ringblow-out/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random perturbation shapes; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Single run until blow-up, plus diagnostics for ring data.
    Simulate,
    /// Degree check and bisection over the shooting parameters.
    Shoot {
        /// Restart from checkpoint.json in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Continuity of blow-up time and radius under small perturbations.
    Stability,
    /// Spectral self-tests of the Hermite machinery.
    Modes,
    /// Re-analyse a stored run directory.
    ProfileCheck {
        /// Directory containing run.json.
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Sub::Simulate => Command::Simulate,
        Sub::Shoot { resume } => Command::Shoot { resume },
        Sub::Stability => Command::Stability,
        Sub::Modes => Command::Modes,
        Sub::ProfileCheck { input } => Command::ProfileCheck { input },
    };
    let env_root = std::env::var(OUT_ENV).ok();
    let out = resolve_out_dir(cli.out.as_deref(), env_root.as_deref(), &cmd);
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let result = load_config(cli.config.as_deref()).and_then(|mut cfg| {
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        run_experiment(&cmd, &cfg, &out)
    });
    match result {
        Ok(manifest) => {
            println!("{}: {} artifacts in {}", cmd.name(), manifest.artifacts.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            write_error(&out, &e);
            eprintln!("error ({}): {e}", e.status());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
