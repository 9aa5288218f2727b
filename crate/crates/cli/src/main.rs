use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topopt::diagnostics::FieldMetrics;
use topopt::runner::{self, Method, Preset, RunConfig};
use topopt::TopOptError;

/// Compliance topology optimization (SIMP / BESO) on regular 2D grids.
#[derive(Parser)]
#[command(name = "topopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimization described by a key = value config file.
    Run { config: PathBuf },
    /// Show the default configuration of a benchmark preset.
    Preset {
        /// `cantilever` or `short_cantilever`.
        name: String,
        /// Print the configuration to stdout.
        #[arg(long)]
        print: bool,
        #[arg(long, default_value = "simp")]
        method: String,
    },
    /// Recompute diagnostics from a PGM image or a density CSV dump.
    Metrics { file: PathBuf },
}

const EXIT_MAX_ITERS: u8 = 2;

fn run(config: &PathBuf) -> Result<bool, TopOptError> {
    let text = fs::read_to_string(config)?;
    let parsed = runner::parse_config(&text)?;
    let summary = runner::execute(&parsed, &mut io::stderr())?;
    println!("image {}", summary.image.display());
    println!("density {}", summary.density.display());
    println!("log {}", summary.log.display());
    Ok(summary.outcome.converged)
}

fn preset(name: &str, method: &str, print: bool) -> Result<(), TopOptError> {
    let method: Method = method
        .parse()
        .map_err(|m: String| TopOptError::Parameter(m))?;
    let preset: Preset = match name.parse() {
        Ok(p) if p != Preset::Custom => p,
        _ => return Err(TopOptError::UnknownPreset(name.to_string())),
    };
    let config = RunConfig::preset_default(method, preset)?;
    if print {
        print!("{}", config.to_config_string());
    } else {
        println!(
            "{}: {}x{} elements, volfrac {}, rmin {}",
            preset, config.nelx, config.nely, config.volfrac, config.rmin
        );
    }
    Ok(())
}

fn metrics(file: &PathBuf) -> Result<(), TopOptError> {
    let bytes = fs::read(file)?;
    let (mesh, rho) = if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        runner::parse_pgm(&bytes)?
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| TopOptError::Format("density file is not UTF-8".into()))?;
        runner::parse_density_csv(&text)?
    };
    let m = FieldMetrics::compute(&mesh, &rho)?;
    println!("nelx={}", mesh.nelx());
    println!("nely={}", mesh.nely());
    println!("checkerboard_index={:?}", m.checkerboard_index);
    println!("gray_fraction={:?}", m.gray_fraction);
    println!("volume_fraction={:?}", m.volume_fraction);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config).map(|converged| {
            if converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MAX_ITERS)
            }
        }),
        Command::Preset {
            name,
            print,
            method,
        } => preset(name, method, *print).map(|_| ExitCode::SUCCESS),
        Command::Metrics { file } => metrics(file).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err}");
        ExitCode::FAILURE
    })
}
