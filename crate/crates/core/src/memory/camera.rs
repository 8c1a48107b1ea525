use nalgebra::{Matrix3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::MemoryError;
use crate::{Pose, Vec3};

/// Pinhole depth camera with its mounting on the body.
///
/// Sensor axes follow the usual optical convention: x right, y down, z
/// forward. Pixel centers sit at integer coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// Closest valid depth, m.
    pub d_min: f64,
    /// Farthest valid depth, m.
    pub d_max: f64,
    /// Maps body coordinates into sensor coordinates.
    pub body_to_sensor: Pose,
    /// Pixels ignored along each image border by the in-view test.
    pub edge_margin: usize,
}

impl Default for CameraModel {
    /// 424x240 forward-facing depth camera, roughly 90 x 58 degrees.
    fn default() -> Self {
        Self {
            fx: 215.0,
            fy: 215.0,
            cx: 212.0,
            cy: 120.0,
            width: 424,
            height: 240,
            d_min: 0.2,
            d_max: 20.0,
            body_to_sensor: forward_mount(),
            edge_margin: 2,
        }
    }
}

/// Camera at the body origin looking along body +x, with body axes
/// forward-left-up.
pub fn forward_mount() -> Pose {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0, -1.0, 0.0,
        0.0, 0.0, -1.0,
        1.0, 0.0, 0.0,
    );
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m));
    Pose::from_parts(Translation3::identity(), rot)
}

/// Pixel coordinates and depth of a projected point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub col: usize,
    pub row: usize,
    pub depth: f64,
}

impl CameraModel {
    /// Same field of view and mounting at `scale` times the resolution.
    pub fn scaled(&self, scale: f64) -> Self {
        let width = ((self.width as f64) * scale).round() as usize;
        let height = ((self.height as f64) * scale).round() as usize;
        Self {
            fx: self.fx * scale,
            fy: self.fy * scale,
            cx: self.cx * scale,
            cy: self.cy * scale,
            width,
            height,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), MemoryError> {
        let bad = |msg: String| Err(MemoryError::InvalidCamera(msg));
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return bad(format!("focal lengths must be positive ({}, {})", self.fx, self.fy));
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return bad(format!("need 0 < d_min < d_max, got {} / {}", self.d_min, self.d_max));
        }
        if self.width == 0 || self.height == 0 {
            return bad("image must be non-empty".into());
        }
        if 2 * self.edge_margin >= self.width.min(self.height) {
            return bad(format!("edge margin {} leaves no pixels", self.edge_margin));
        }
        let r = self.body_to_sensor.rotation.to_rotation_matrix();
        let m = r.matrix();
        let orth = (m.transpose() * m - Matrix3::identity()).amax();
        if orth > 1e-9 || (m.determinant() - 1.0).abs() > 1e-9 {
            return bad("body_to_sensor is not a proper rotation".into());
        }
        Ok(())
    }

    /// Pinhole projection with the in-view test. `None` means out of view.
    pub fn project(&self, p: &Vec3) -> Option<Projection> {
        let depth = p.z;
        if !(depth >= self.d_min && depth <= self.d_max) {
            return None;
        }
        let u = self.fx * p.x / depth + self.cx;
        let v = self.fy * p.y / depth + self.cy;
        let col = (u + 0.5).floor();
        let row = (v + 0.5).floor();
        let m = self.edge_margin as f64;
        if col < m
            || row < m
            || col > (self.width - 1) as f64 - m
            || row > (self.height - 1) as f64 - m
        {
            return None;
        }
        Some(Projection {
            u,
            v,
            col: col as usize,
            row: row as usize,
            depth,
        })
    }

    /// Sensor-frame point seen at pixel `(col, row)` with depth `z`.
    pub fn back_project(&self, col: usize, row: usize, z: f64) -> Vec3 {
        Vec3::new(
            (col as f64 - self.cx) * z / self.fx,
            (row as f64 - self.cy) * z / self.fy,
            z,
        )
    }

    /// Unnormalized ray through a pixel center, with unit z component.
    pub fn pixel_ray(&self, col: usize, row: usize) -> Vec3 {
        Vec3::new(
            (col as f64 - self.cx) / self.fx,
            (row as f64 - self.cy) / self.fy,
            1.0,
        )
    }

    /// `world_from_sensor` for a body at `world_from_body`.
    pub fn sensor_pose(&self, world_from_body: &Pose) -> Pose {
        world_from_body * self.body_to_sensor.inverse()
    }
}
