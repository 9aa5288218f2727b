//! Configuration, benchmark presets, run orchestration and file outputs.

mod config;
mod output;
mod preset;
mod run;

pub use config::{
    parse_config, BesoKnobs, ImageFormat, Method, ParsedConfig, PointLoad, Preset, RunConfig,
    SimpKnobs,
};
pub use output::{
    emit_convergence_log, emit_density_image, parse_convergence_log, parse_density_csv, parse_pgm,
    render_convergence_log, render_density_csv, render_pgm, CONVERGENCE_HEADER,
};
pub use preset::{
    build_preset, build_preset_sized, clamped_left_problem, mid_right_load, problem_for,
};
pub use run::{
    beso_config, elast_params, execute, simp_config, RunSummary, DENSITY_FILE, IMAGE_FILE, LOG_FILE,
};
