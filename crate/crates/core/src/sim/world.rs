use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::Vec3;

pub const WORLD_FORMAT_VERSION: u32 = 1;

/// Vertical cylinder with a finite z extent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub center: [f64; 2],
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self {
            min: [min.x, min.y, min.z],
            max: [max.x, max.y, max.z],
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] && other.max[i] <= self.max[i])
    }

    /// Distance from `p` to the solid box, zero inside.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let e = (self.min[i] - p[i]).max(p[i] - self.max[i]).max(0.0);
            d2 += e * e;
        }
        d2.sqrt()
    }
}

impl Cylinder {
    /// Distance from `p` to the solid cylinder, zero inside.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let dx = p.x - self.center[0];
        let dy = p.y - self.center[1];
        let radial = ((dx * dx + dy * dy).sqrt() - self.radius).max(0.0);
        let vertical = (self.z_min - p.z).max(p.z - self.z_max).max(0.0);
        radial.hypot(vertical)
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb {
            min: [self.center[0] - self.radius, self.center[1] - self.radius, self.z_min],
            max: [self.center[0] + self.radius, self.center[1] + self.radius, self.z_max],
        }
    }
}

/// Ground-truth obstacle geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub version: u32,
    pub bounds: Aabb,
    #[serde(default)]
    pub ground_z: Option<f64>,
    #[serde(default)]
    pub ceiling_z: Option<f64>,
    #[serde(default)]
    pub cylinders: Vec<Cylinder>,
    #[serde(default)]
    pub boxes: Vec<Aabb>,
}

impl World {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            version: WORLD_FORMAT_VERSION,
            bounds,
            ground_z: None,
            ceiling_z: None,
            cylinders: Vec::new(),
            boxes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidWorld(msg));
        if self.version != WORLD_FORMAT_VERSION {
            return bad(format!("unsupported world version {}", self.version));
        }
        if (0..3).any(|i| !(self.bounds.min[i] < self.bounds.max[i])) {
            return bad("bounds are degenerate".into());
        }
        for (i, c) in self.cylinders.iter().enumerate() {
            if !(c.radius > 0.0 && c.z_min < c.z_max) {
                return bad(format!("cylinder {i} has non-positive radius or height"));
            }
            if !self.bounds.contains_box(&c.bounding_box()) {
                return bad(format!("cylinder {i} leaves the world bounds"));
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if (0..3).any(|k| !(b.min[k] < b.max[k])) {
                return bad(format!("box {i} is degenerate"));
            }
            if !self.bounds.contains_box(b) {
                return bad(format!("box {i} leaves the world bounds"));
            }
        }
        if let (Some(g), Some(c)) = (self.ground_z, self.ceiling_z) {
            if !(g < c) {
                return bad("ceiling must be above ground".into());
            }
        }
        Ok(())
    }

    /// Distance from `p` to the nearest obstacle, plane included; zero when
    /// `p` is inside an obstacle.
    pub fn clearance(&self, p: &Vec3) -> f64 {
        let mut d = f64::INFINITY;
        if let Some(g) = self.ground_z {
            d = d.min((p.z - g).max(0.0));
        }
        if let Some(c) = self.ceiling_z {
            d = d.min((c - p.z).max(0.0));
        }
        for c in &self.cylinders {
            d = d.min(c.distance(p));
        }
        for b in &self.boxes {
            d = d.min(b.distance(p));
        }
        d
    }

    /// Whether a sphere of `robot_radius` at `p` overlaps an obstacle.
    /// Touching is not a collision.
    pub fn gt_collides(&self, p: &Vec3, robot_radius: f64) -> bool {
        self.clearance(p) < robot_radius
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("worlds always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let world: World =
            serde_json::from_str(text).map_err(|e| SimError::InvalidWorld(e.to_string()))?;
        world.validate()?;
        Ok(world)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        }
        fs::write(path, self.to_json() + "\n").map_err(|e| SimError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            SimError::InvalidWorld(msg) => {
                SimError::InvalidWorld(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> World {
        let mut w = World::empty(Aabb::new(Vec3::new(-20.0, -20.0, 0.0), Vec3::new(20.0, 20.0, 10.0)));
        w.cylinders.push(Cylinder {
            center: [5.0, 0.0],
            radius: 1.0,
            z_min: 0.0,
            z_max: 10.0,
        });
        w
    }

    #[test]
    fn far_from_everything() {
        assert!(!world().gt_collides(&Vec3::new(-10.0, 10.0, 5.0), 0.3));
    }

    #[test]
    fn on_cylinder_axis() {
        assert!(world().gt_collides(&Vec3::new(5.0, 0.0, 3.0), 0.3));
    }

    #[test]
    fn tangent_is_not_a_collision() {
        let w = world();
        let p = Vec3::new(5.0 + 1.0 + 0.5, 0.0, 3.0);
        assert!((w.clearance(&p) - 0.5).abs() < 1e-15);
        assert!(!w.gt_collides(&p, 0.5));
        assert!(w.gt_collides(&p, 0.5 + 1e-9));
    }

    #[test]
    fn planes_count() {
        let mut w = world();
        w.ground_z = Some(0.0);
        assert!(w.gt_collides(&Vec3::new(-10.0, 0.0, 0.2), 0.3));
        assert!(!w.gt_collides(&Vec3::new(-10.0, 0.0, 1.5), 0.3));
    }

    #[test]
    fn json_round_trip() {
        let w = world();
        assert_eq!(World::from_json(&w.to_json()).unwrap(), w);
    }

    #[test]
    fn rejects_obstacle_outside_bounds() {
        let mut w = world();
        w.cylinders[0].center = [19.5, 0.0];
        assert!(w.validate().is_err());
    }
}
