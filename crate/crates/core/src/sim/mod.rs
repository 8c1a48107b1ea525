//! Ground-truth worlds, procedural forests, depth rendering and the ideal
//! tracking simulator.

mod forest;
mod render;
mod state;
mod world;

use std::path::Path;

use thiserror::Error;

pub use forest::{gen_forest, Forest, ForestParams};
pub use render::{apply_depth_noise, cast_ray, render_depth, render_generic, render_raster};
pub use state::{sim_step, write_trajectory_csv, SimState, TrajectoryRow};
pub use world::{Aabb, Cylinder, World, WORLD_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
