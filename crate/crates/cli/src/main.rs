use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use srdem::validation::SuiteOptions;
use srdem_cli::commands::{self, Global};

#[derive(Parser)]
#[command(name = "srdem", version, about = "Surface-of-revolution DEM driver")]
struct Cli {
    /// Override `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Force 17-digit output formatting.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for the parallel phases; 0 uses the rayon default.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mass properties by revolution and by voxelisation.
    Props {
        config: PathBuf,
        /// Voxel divisions along the major axis.
        #[arg(long, default_value_t = 160)]
        voxels: usize,
        /// Mesh segments around the axis.
        #[arg(long, default_value_t = 128)]
        around: usize,
    },
    /// Dump the cross-section SDF.
    Sdf { config: PathBuf },
    /// Single-particle wall impact sweep.
    ImpactWall {
        config: PathBuf,
        /// Comma-separated tilt angles in degrees.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta_list: Option<Vec<f64>>,
    },
    /// Particle-particle impact with force-overlap traces.
    ImpactPair { config: PathBuf },
    /// Batch packing in a cylinder.
    Pack { config: PathBuf },
    /// Rotating drum angle of repose.
    Drum { config: PathBuf },
    /// Run the fast acceptance checks.
    Validate {
        /// Skip the contact-point variant of the wall impact sweep.
        #[arg(long)]
        no_variant: bool,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let global = Global {
        out: cli.out,
        seed: cli.seed,
        deterministic: cli.deterministic,
    };
    match cli.command {
        Command::Props {
            config,
            voxels,
            around,
        } => commands::props(&config, &global, voxels, around)?,
        Command::Sdf { config } => commands::sdf(&config, &global)?,
        Command::ImpactWall { config, theta_list } => {
            commands::impact_wall(&config, &global, theta_list)?
        }
        Command::ImpactPair { config } => commands::impact_pair(&config, &global)?,
        Command::Pack { config } => commands::pack(&config, &global)?,
        Command::Drum { config } => commands::drum(&config, &global)?,
        Command::Validate { no_variant } => {
            let mut options = SuiteOptions {
                variant: !no_variant,
                ..Default::default()
            };
            if let Some(seed) = global.seed {
                options.seed = seed;
            }
            return commands::validate(&global, &options);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match srdem::par::with_threads(threads, move || run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
