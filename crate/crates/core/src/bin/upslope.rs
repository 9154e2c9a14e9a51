use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use upslope::experiment::{cmd_charpoly, cmd_matrix, cmd_polygon, cmd_verify, exit_code, ExperimentConfig, Source};

#[derive(Parser)]
#[command(name = "upslope", version, about = "Slopes of U_p over weight space, certified")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; built-in defaults when absent
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Synthetic operator seed, overriding the config's source
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the operator and check its entry bounds
    Matrix {
        /// Also write the operator in the T-rescaled basis
        #[arg(long)]
        rescale: bool,
    },
    /// Characteristic series with its coefficient bounds
    Charpoly,
    /// Newton polygons at each configured v(T)
    Polygon,
    /// Run the check registry
    Verify {
        /// Comma-separated check names
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let mut cfg = match &cli.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = cli.seed {
            cfg.source = Source::Seed(seed);
            cfg.verify.seed = seed;
        }
        if let Some(out) = &cli.out {
            cfg.out = out.clone();
        }
        match &cli.command {
            Command::Matrix { rescale } => cmd_matrix(&cfg, *rescale),
            Command::Charpoly => cmd_charpoly(&cfg),
            Command::Polygon => cmd_polygon(&cfg),
            Command::Verify { only } => cmd_verify(&cfg, only.as_deref()),
        }
    })();
    match &result {
        Ok(outcome) => print!("{}", outcome.summary),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
