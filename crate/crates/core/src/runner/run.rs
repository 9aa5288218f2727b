use std::fs;
use std::io::Write;
use std::path::PathBuf;

use super::config::{Method, ParsedConfig, RunConfig};
use super::output::{emit_convergence_log, emit_density_image, render_density_csv};
use super::preset::problem_for;
use crate::beso::{run_beso_with, BesoConfig};
use crate::diagnostics::FieldMetrics;
use crate::error::Result;
use crate::grid_fem::{DofOrdering, ElastParams, SolverOptions};
use crate::record::{IterationRow, OptOutcome};
use crate::simp::{run_simp_with, SimpConfig};

pub const IMAGE_FILE: &str = "density.pgm";
pub const DENSITY_FILE: &str = "density.csv";
pub const LOG_FILE: &str = "convergence.csv";

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub outcome: OptOutcome<f64>,
    pub metrics: FieldMetrics<f64>,
    pub image: PathBuf,
    pub density: PathBuf,
    pub log: PathBuf,
}

fn solver_options(config: &RunConfig) -> SolverOptions<f64> {
    SolverOptions {
        solver: config.solver,
        ordering: DofOrdering::Auto,
        tolerance: 1e-8,
    }
}

pub fn elast_params(config: &RunConfig) -> Result<ElastParams<f64>> {
    ElastParams::with_emin(config.e0, config.emin, config.nu, config.penal)
}

pub fn simp_config(config: &RunConfig) -> SimpConfig<f64> {
    SimpConfig {
        volfrac: config.volfrac,
        move_limit: config.simp.move_limit,
        eta: config.simp.eta,
        max_iters: config.max_iters,
        change_tol: config.simp.change_tol,
        r_min: config.rmin,
        rho_min: config.rho_min,
        solver: solver_options(config),
    }
}

pub fn beso_config(config: &RunConfig) -> BesoConfig<f64> {
    BesoConfig {
        volfrac: config.volfrac,
        evolution_rate: config.beso.er,
        rho_min: config.rho_min,
        r_min: config.rmin,
        max_iters: config.max_iters,
        stability_window: config.beso.stability_window,
        stability_tol: config.beso.stability_tol,
        strict_swap: config.beso.strict_swap,
        solver: solver_options(config),
    }
}

fn log_row(log: &mut dyn Write, row: &IterationRow<f64>) {
    let _ = writeln!(
        log,
        "iter {:4}  compliance {:.6e}  volfrac {:.6}  change {:.4e}  checkerboard {:.4e}",
        row.iter, row.compliance, row.volfrac, row.change, row.checkerboard_index
    );
}

/// Runs the configured optimization and writes the image, density dump and
/// convergence log into the output directory.
///
/// A failed run still leaves the partial convergence log behind.
pub fn execute(parsed: &ParsedConfig, log: &mut dyn Write) -> Result<RunSummary> {
    let config = &parsed.config;
    for (key, value) in &parsed.defaults {
        let _ = writeln!(log, "default {key} = {value}");
    }
    let (mesh, lc) = problem_for(config)?;
    let params = elast_params(config)?;
    fs::create_dir_all(&config.output)?;
    let log_path = config.output.join(LOG_FILE);

    let every = config.log_every;
    let mut observer = |row: &IterationRow<f64>| {
        if every > 0 && row.iter.is_multiple_of(every) {
            log_row(log, row);
        }
    };
    let result = match config.method {
        Method::Simp => run_simp_with(&mesh, &params, &lc, &simp_config(config), &mut observer),
        Method::Beso => run_beso_with(&mesh, &params, &lc, &beso_config(config), &mut observer),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(err) => {
            if !err.record.is_empty() {
                emit_convergence_log(&err.record, &log_path)?;
            }
            return Err(err.source);
        }
    };
    if every == 0 || outcome.record.len() % every != 0 {
        if let Some(row) = outcome.record.last() {
            log_row(log, row);
        }
    }

    let image = config.output.join(IMAGE_FILE);
    let density = config.output.join(DENSITY_FILE);
    emit_density_image(&mesh, &outcome.density, &image, config.image_format)?;
    fs::write(&density, render_density_csv(&mesh, &outcome.density)?)?;
    emit_convergence_log(&outcome.record, &log_path)?;

    let metrics = FieldMetrics::compute(&mesh, &outcome.density)?;
    let _ = writeln!(
        log,
        "{} after {} iterations: checkerboard {:.4e}, gray {:.4}, volfrac {:.6}",
        if outcome.converged {
            "converged"
        } else {
            "stopped at max_iters"
        },
        outcome.record.len(),
        metrics.checkerboard_index,
        metrics.gray_fraction,
        metrics.volume_fraction
    );
    Ok(RunSummary {
        outcome,
        metrics,
        image,
        density,
        log: log_path,
    })
}
