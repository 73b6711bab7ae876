use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters: exit code 2.
    Usage(String),
    /// A computation failed: exit code 1.
    Run(String),
}

impl CliError {
    pub fn from_core(e: conley_kit::Error) -> Self {
        use conley_kit::Error as E;
        match e {
            E::InvalidParameters(_)
            | E::UnsupportedCombination(_)
            | E::ResolutionTooSmall { .. }
            | E::BadDescriptor(_)
            | E::Parse(_) => Self::Usage(e.to_string()),
            other => Self::Run(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "conley-kit", version, about = "Conley pairs, thickenings and category bounds on closed surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key = value file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// circle | sphere:rho=1 | torus:R=2,r=1 | rp2
    #[arg(long, global = true)]
    surface: Option<String>,
    /// height | cos-theta | cubic-circle | double-well
    #[arg(long, global = true)]
    field: Option<String>,
    /// mesh resolution (vertices per period)
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(long = "h-min", global = true)]
    h_min: Option<f64>,
    #[arg(long = "delta-conv", global = true)]
    delta_conv: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// truncation horizon of forward thickenings
    #[arg(long = "w-horizon", global = true)]
    w_horizon: Option<f64>,
    /// trajectory samples per verification
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// directory for JSON/CSV artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List critical points
    Crit,
    /// Build and verify Conley pairs
    Conley {
        /// all | min | max | saddle | degenerate | index
        #[arg(long, default_value = "all")]
        crit: String,
    },
    /// Build thickenings
    Thicken {
        /// forward | ambient | unstable
        #[arg(long, default_value = "forward")]
        kind: String,
    },
    /// Check forward and ambient covers
    Cover,
    /// Betti numbers, cuplength, subordination and category bounds
    Homology,
    /// Minimax values of filtration-adapted classes
    Minimax {
        /// sublevel band `a,b` (default: min f - 0.5, max f + 0.5)
        #[arg(long)]
        band: Option<String>,
    },
    /// Full inequality report
    Report,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            surface: self.surface.clone(),
            field: self.field.clone(),
            n: self.n,
            epsilon: self.epsilon,
            tau: self.tau,
            h: self.h,
            h_min: self.h_min,
            delta_conv: self.delta_conv,
            horizon: self.horizon,
            w_horizon: self.w_horizon,
            samples: self.samples.map(|s| s as usize),
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CONLEY_KIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("CONLEY_KIT_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Run(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let file = match &cli.common.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let cfg = RunConfig::resolve(cli.common.overrides().over(file))?;
    let (name, outcome) = match &cli.command {
        Command::Crit => ("crit", commands::crit(&cfg)?),
        Command::Conley { crit } => ("conley", commands::conley(&cfg, crit)?),
        Command::Thicken { kind } => ("thicken", commands::thicken(&cfg, kind)?),
        Command::Cover => ("cover", commands::cover(&cfg)?),
        Command::Homology => ("homology", commands::homology(&cfg)?),
        Command::Minimax { band } => ("minimax", commands::minimax(&cfg, band.as_deref())?),
        Command::Report => ("report", commands::report(&cfg)?),
    };
    let text = serde_json::to_string_pretty(&outcome.json).expect("json serializes");
    // a closed pipe (`| head`) is not an error
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(dir) = &cfg.out {
        let write = |file: &str, body: &str| {
            std::fs::write(dir.join(file), body).map_err(|e| CliError::Run(format!("writing {file}: {e}")))
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::Run(format!("creating {}: {e}", dir.display())))?;
        write(&format!("{name}.json"), &text)?;
        for (file, body) in &outcome.files {
            write(file, body)?;
        }
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: conley-kit <crit|conley|thicken|cover|homology|minimax|report> [--config FILE] [--surface S] [--field F] [--n N] [--epsilon E] [--tau T] [--seed S] [--samples M] [--out DIR]");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
