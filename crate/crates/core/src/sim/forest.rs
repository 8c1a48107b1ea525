use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::world::{Aabb, Cylinder, World};
use super::SimError;
use crate::Vec3;

/// Parameters of a Poisson-disk forest of vertical cylinders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    /// Requested obstacles per square meter.
    pub density: f64,
    /// Planted region `[x_min, x_max, y_min, y_max]`, m.
    pub region: [f64; 4],
    pub diameter: f64,
    /// Minimum distance between cylinder centers, m.
    pub min_separation: f64,
    pub z_range: [f64; 2],
    /// Points kept free of obstacles (start and goal positions).
    pub spawn_points: Vec<[f64; 2]>,
    /// Minimum gap between a spawn point and any cylinder surface, m.
    pub spawn_radius: f64,
    pub ground_z: Option<f64>,
    /// World bounds; must contain the region.
    pub bounds: Aabb,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            density: 0.0,
            region: [0.0, 70.0, -20.0, 20.0],
            diameter: 0.75,
            min_separation: 2.0,
            z_range: [0.0, 10.0],
            spawn_points: Vec::new(),
            spawn_radius: 3.0,
            ground_z: Some(0.0),
            bounds: Aabb::new(Vec3::new(-10.0, -30.0, 0.0), Vec3::new(80.0, 30.0, 10.0)),
        }
    }
}

impl ForestParams {
    pub fn area(&self) -> f64 {
        (self.region[1] - self.region[0]) * (self.region[3] - self.region[2])
    }

    pub fn target_count(&self) -> usize {
        (self.density * self.area() - 1e-9).ceil().max(0.0) as usize
    }
}

/// A generated forest with the density it actually achieved.
#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    pub world: World,
    pub requested: usize,
    pub realized_density: f64,
    /// Set when the packing fell below 90 % of the requested density.
    pub warning: Option<String>,
}

pub fn gen_forest(params: &ForestParams, seed: u64) -> Result<Forest, SimError> {
    let [x0, x1, y0, y1] = params.region;
    if !(params.density >= 0.0 && params.density.is_finite()) {
        return Err(SimError::InvalidWorld(format!("bad density {}", params.density)));
    }
    if !(x0 < x1 && y0 < y1) {
        return Err(SimError::InvalidWorld("forest region is degenerate".into()));
    }
    if !(params.diameter > 0.0 && params.min_separation >= params.diameter) {
        return Err(SimError::InvalidWorld(format!(
            "need 0 < diameter <= min_separation, got {} / {}",
            params.diameter, params.min_separation
        )));
    }
    let mut world = World::empty(params.bounds);
    world.ground_z = params.ground_z;
    let target = params.target_count();
    let area = params.area();
    if target == 0 {
        world.validate()?;
        return Ok(Forest {
            world,
            requested: 0,
            realized_density: 0.0,
            warning: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = bridson(&mut rng, params.region, params.min_separation, 30);
    centers.shuffle(&mut rng);
    let radius = params.diameter / 2.0;
    let keep_out = params.spawn_radius + radius;
    centers.retain(|c| {
        params
            .spawn_points
            .iter()
            .all(|s| (c[0] - s[0]).hypot(c[1] - s[1]) >= keep_out)
    });
    centers.truncate(target);
    world.cylinders = centers
        .into_iter()
        .map(|c| Cylinder {
            center: c,
            radius,
            z_min: params.z_range[0],
            z_max: params.z_range[1],
        })
        .collect();
    world.validate()?;

    let realized = world.cylinders.len() as f64 / area;
    let warning = (realized < 0.9 * params.density).then(|| {
        format!(
            "separation {} m caps the forest at {realized:.4}/m^2, below the requested {}/m^2",
            params.min_separation, params.density
        )
    });
    Ok(Forest {
        world,
        requested: target,
        realized_density: realized,
        warning,
    })
}

/// Bridson's Poisson-disk sampler over a rectangle.
fn bridson(rng: &mut ChaCha8Rng, region: [f64; 4], r: f64, attempts: usize) -> Vec<[f64; 2]> {
    let [x0, x1, y0, y1] = region;
    let cell = r / std::f64::consts::SQRT_2;
    let nx = ((x1 - x0) / cell).ceil() as usize + 1;
    let ny = ((y1 - y0) / cell).ceil() as usize + 1;
    let mut grid: Vec<Option<usize>> = vec![None; nx * ny];
    let cell_of = |p: &[f64; 2]| {
        (
            ((p[0] - x0) / cell).floor() as usize,
            ((p[1] - y0) / cell).floor() as usize,
        )
    };

    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let first = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
    let (cx, cy) = cell_of(&first);
    grid[cy * nx + cx] = Some(0);
    points.push(first);
    active.push(0);

    while !active.is_empty() {
        let slot = rng.random_range(0..active.len());
        let base = points[active[slot]];
        let mut placed = false;
        for _ in 0..attempts {
            let rho = r * (1.0 + 3.0 * rng.random::<f64>()).sqrt();
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let cand = [base[0] + rho * phi.cos(), base[1] + rho * phi.sin()];
            if !(cand[0] >= x0 && cand[0] < x1 && cand[1] >= y0 && cand[1] < y1) {
                continue;
            }
            let (cx, cy) = cell_of(&cand);
            let mut ok = true;
            'scan: for gy in cy.saturating_sub(2)..(cy + 3).min(ny) {
                for gx in cx.saturating_sub(2)..(cx + 3).min(nx) {
                    if let Some(j) = grid[gy * nx + gx] {
                        let q = points[j];
                        if (q[0] - cand[0]).hypot(q[1] - cand[1]) < r {
                            ok = false;
                            break 'scan;
                        }
                    }
                }
            }
            if ok {
                grid[cy * nx + cx] = Some(points.len());
                active.push(points.len());
                points.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(slot);
        }
    }
    points
}
