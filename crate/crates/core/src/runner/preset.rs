use super::config::{PointLoad, Preset, RunConfig};
use crate::error::{Result, TopOptError};
use crate::grid_fem::{GridMesh, LoadCase};
use crate::scalar::Scalar;

/// Grid clamped along its whole left edge with a point load at one node.
pub fn clamped_left_problem<T: Scalar>(
    nelx: usize,
    nely: usize,
    load: PointLoad,
) -> Result<(GridMesh, LoadCase<T>)> {
    let mesh = GridMesh::new(nelx, nely)?;
    if load.node_x == 0 || load.node_x > nelx || load.node_y > nely {
        return Err(TopOptError::Parameter(format!(
            "load node ({}, {}) must lie off the clamped edge inside the {}x{} node grid",
            load.node_x,
            load.node_y,
            nelx + 1,
            nely + 1
        )));
    }
    let node = mesh.node_index(load.node_x, load.node_y);
    let mut lc = LoadCase::new(mesh.left_edge_dofs());
    if load.fx != 0.0 {
        lc = lc.with_load(2 * node, T::lit(load.fx));
    }
    if load.fy != 0.0 {
        lc = lc.with_load(2 * node + 1, T::lit(load.fy));
    }
    Ok((mesh, lc))
}

/// Unit downward load at the mid-height node of the right edge.
pub fn mid_right_load(nelx: usize, nely: usize) -> PointLoad {
    PointLoad {
        node_x: nelx,
        node_y: nely / 2,
        fx: 0.0,
        fy: -1.0,
    }
}

/// Mesh and supports of a named benchmark at its default size
/// (`cantilever` 80×40, `short_cantilever` 40×80).
pub fn build_preset<T: Scalar>(name: &str) -> Result<(GridMesh, LoadCase<T>)> {
    let preset = match name.parse::<Preset>() {
        Ok(p) if p != Preset::Custom => p,
        _ => return Err(TopOptError::UnknownPreset(name.to_string())),
    };
    let (nelx, nely) = match preset {
        Preset::ShortCantilever => (40, 80),
        _ => (80, 40),
    };
    build_preset_sized(preset, nelx, nely)
}

pub fn build_preset_sized<T: Scalar>(
    preset: Preset,
    nelx: usize,
    nely: usize,
) -> Result<(GridMesh, LoadCase<T>)> {
    match preset {
        Preset::Cantilever | Preset::ShortCantilever => {
            clamped_left_problem(nelx, nely, mid_right_load(nelx, nely))
        }
        Preset::Custom => Err(TopOptError::UnknownPreset(
            "custom (needs an explicit load)".into(),
        )),
    }
}

/// Mesh and load case described by a run configuration.
pub fn problem_for(config: &RunConfig) -> Result<(GridMesh, LoadCase<f64>)> {
    clamped_left_problem(config.nelx, config.nely, config.load)
}
