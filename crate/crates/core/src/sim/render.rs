use nalgebra::Vector2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::world::{Aabb, Cylinder, World};
use crate::memory::{CameraModel, DepthFrame, DepthRaster, MemoryError, INVALID_DEPTH, NO_RETURN};
use crate::{Pose, Vec3};

/// Parameter interval `[t_in, t_out]` of a ray inside a solid.
type Span = (f64, f64);

fn intersect(a: Span, b: Span) -> Option<Span> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi && hi >= 0.0).then_some((lo, hi))
}

/// Span of `o + t d` within `[lo, hi]` along one axis.
fn slab(o: f64, d: f64, lo: f64, hi: f64) -> Option<Span> {
    if d == 0.0 {
        return (o >= lo && o <= hi).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let a = (lo - o) / d;
    let b = (hi - o) / d;
    Some(if a <= b { (a, b) } else { (b, a) })
}

/// Span of a ray inside the infinite vertical cylinder, from its horizontal
/// components.
fn disc_span(c: &Cylinder, o: Vector2<f64>, d: Vector2<f64>) -> Option<Span> {
    let rel = o - Vector2::new(c.center[0], c.center[1]);
    let a = d.norm_squared();
    let cc = rel.norm_squared() - c.radius * c.radius;
    if a < 1e-300 {
        return (cc <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let b = rel.dot(&d);
    let disc = b * b - a * cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable roots
    let q = if b >= 0.0 { -(b + sq) } else { -b + sq };
    let (t1, t2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, cc / q)
    };
    Some(if t1 <= t2 { (t1, t2) } else { (t2, t1) })
}

fn box_xy_span(b: &Aabb, o: Vector2<f64>, d: Vector2<f64>) -> Option<Span> {
    let sx = slab(o.x, d.x, b.min[0], b.max[0])?;
    let sy = slab(o.y, d.y, b.min[1], b.max[1])?;
    let lo = sx.0.max(sy.0);
    let hi = sx.1.min(sy.1);
    (lo <= hi).then_some((lo, hi))
}

fn plane_hits(world: &World, oz: f64, dz: f64) -> f64 {
    let mut best = f64::INFINITY;
    if let Some(g) = world.ground_z {
        if oz <= g {
            return 0.0;
        }
        if dz < 0.0 {
            best = best.min((g - oz) / dz);
        }
    }
    if let Some(c) = world.ceiling_z {
        if oz >= c {
            return 0.0;
        }
        if dz > 0.0 {
            best = best.min((c - oz) / dz);
        }
    }
    best
}

/// Smallest `t >= 0` at which `origin + t * dir` enters an obstacle, or
/// infinity. `dir` need not be normalized.
pub fn cast_ray(world: &World, origin: &Vec3, dir: &Vec3) -> f64 {
    let o2 = origin.xy();
    let d2 = dir.xy();
    let mut best = plane_hits(world, origin.z, dir.z);
    for c in &world.cylinders {
        let Some(z) = slab(origin.z, dir.z, c.z_min, c.z_max) else {
            continue;
        };
        if let Some(s) = disc_span(c, o2, d2).and_then(|h| intersect(h, z)) {
            best = best.min(s.0.max(0.0));
        }
    }
    for b in &world.boxes {
        let Some(z) = slab(origin.z, dir.z, b.min[2], b.max[2]) else {
            continue;
        };
        if let Some(s) = box_xy_span(b, o2, d2).and_then(|h| intersect(h, z)) {
            best = best.min(s.0.max(0.0));
        }
    }
    best
}

fn encode(t: f64, camera: &CameraModel) -> f32 {
    if t > camera.d_max {
        NO_RETURN
    } else if t < camera.d_min {
        INVALID_DEPTH
    } else {
        t as f32
    }
}

/// Renders the depth raster seen from `world_from_sensor`.
///
/// Depth is the sensor-frame z of the first hit. Rays that meet nothing
/// within `d_max` read [`NO_RETURN`]; hits closer than `d_min` read
/// [`INVALID_DEPTH`].
pub fn render_raster(world: &World, world_from_sensor: &Pose, camera: &CameraModel) -> DepthRaster {
    let rot = world_from_sensor.rotation.to_rotation_matrix();
    let down = rot * Vec3::y();
    if (down - Vec3::new(0.0, 0.0, -1.0)).amax() < 1e-12 {
        render_level(world, world_from_sensor, camera)
    } else {
        render_generic(world, world_from_sensor, camera)
    }
}

/// Per-pixel ray casting for arbitrary orientations.
pub fn render_generic(world: &World, world_from_sensor: &Pose, camera: &CameraModel) -> DepthRaster {
    let origin = world_from_sensor.translation.vector;
    let mut raster = DepthRaster::filled(camera.width, camera.height, NO_RETURN);
    for row in 0..camera.height {
        for col in 0..camera.width {
            // the sensor-frame ray has unit z, so the hit parameter is depth
            let dir = world_from_sensor.rotation * camera.pixel_ray(col, row);
            raster.set(col, row, encode(cast_ray(world, &origin, &dir), camera));
        }
    }
    raster
}

/// Column-coherent path for a camera whose image rows are horizontal: the
/// horizontal part of a ray depends only on its column.
fn render_level(world: &World, world_from_sensor: &Pose, camera: &CameraModel) -> DepthRaster {
    let origin = world_from_sensor.translation.vector;
    let o2 = origin.xy();
    let ex = (world_from_sensor.rotation * Vec3::x()).xy();
    let ez = (world_from_sensor.rotation * Vec3::z()).xy();
    let mut raster = DepthRaster::filled(camera.width, camera.height, NO_RETURN);
    let row_dz: Vec<f64> = (0..camera.height)
        .map(|row| -(row as f64 - camera.cy) / camera.fy)
        .collect();
    let mut spans: Vec<(Span, f64, f64)> = Vec::new();
    for col in 0..camera.width {
        let x = (col as f64 - camera.cx) / camera.fx;
        let h = ex * x + ez;
        spans.clear();
        for c in &world.cylinders {
            if let Some(s) = disc_span(c, o2, h) {
                if s.1 >= 0.0 && s.0 <= camera.d_max {
                    spans.push((s, c.z_min, c.z_max));
                }
            }
        }
        for b in &world.boxes {
            if let Some(s) = box_xy_span(b, o2, h) {
                if s.1 >= 0.0 && s.0 <= camera.d_max {
                    spans.push((s, b.min[2], b.max[2]));
                }
            }
        }
        spans.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
        for (row, &dz) in row_dz.iter().enumerate() {
            let mut best = plane_hits(world, origin.z, dz);
            for &(s, z_min, z_max) in &spans {
                if s.0 >= best {
                    break;
                }
                if let Some(hit) = slab(origin.z, dz, z_min, z_max).and_then(|z| intersect(s, z)) {
                    best = best.min(hit.0.max(0.0));
                }
            }
            raster.set(col, row, encode(best, camera));
        }
    }
    raster
}

/// Adds zero-mean Gaussian noise to every measured depth.
pub fn apply_depth_noise<R: Rng + ?Sized>(raster: &mut DepthRaster, sigma: f64, rng: &mut R) {
    if !(sigma > 0.0) {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    for d in raster.data.iter_mut().filter(|d| d.is_finite()) {
        *d += normal.sample(rng) as f32;
    }
}

/// Renders and wraps the raster into a frame for the memory.
pub fn render_depth(
    world: &World,
    world_from_body: &Pose,
    camera: &CameraModel,
    stamp: f64,
    stride: usize,
) -> Result<DepthFrame, MemoryError> {
    let raster = render_raster(world, &camera.sensor_pose(world_from_body), camera);
    DepthFrame::new(camera, raster, stamp, *world_from_body, stride)
}
