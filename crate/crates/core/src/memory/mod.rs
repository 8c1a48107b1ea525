//! Temporal depth-frame memory for proximity queries.
//!
//! Frames are kept newest first and linked by relative sensor transforms.
//! A query point is carried from frame to frame along those edges until a
//! frame has it in view and in observed free space; that frame's k-d tree
//! then gives the distance to the closest observed surface. No pose
//! uncertainty is propagated along the chain.

mod camera;
mod chain;
mod frame;
mod kdtree;

use thiserror::Error;

pub use camera::{forward_mount, CameraModel, Projection};
pub use chain::{
    classify_in_frame, knn, ChainConfig, ChainEntry, FrameChain, FrameClass, QueryResult,
    SharedFrameChain, Verdict,
};
pub use frame::{read_dump, DepthFrame, DepthRaster, DumpHeader, INVALID_DEPTH, NO_RETURN};
pub use kdtree::{KdTree, Neighbor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MemoryError {
    #[error("frame stamp {got} is not newer than the newest frame ({newest})")]
    OutOfOrderStamp { newest: f64, got: f64 },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("raster is {got:?}, camera expects {expected:?}")]
    RasterShape {
        expected: (usize, usize),
        got: (usize, usize),
    },
}
