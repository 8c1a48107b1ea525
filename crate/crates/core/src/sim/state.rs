use std::io::Write;

use serde::{Deserialize, Serialize};

use super::world::World;
use crate::primitives::{ReferenceSource, ReferenceState};

/// Ideal-tracking vehicle state and accumulated metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time: f64,
    pub reference: ReferenceState,
    pub collided: bool,
    /// Sum of chord lengths between consecutive steps, m.
    pub path_length: f64,
    pub speed_max: f64,
    /// Trapezoidal integral of squared jerk magnitude.
    pub effort_accum: f64,
    /// Smallest ground-truth clearance seen so far, m.
    pub min_clearance: f64,
}

impl SimState {
    pub fn new(time: f64, reference: ReferenceState) -> Self {
        Self {
            time,
            reference,
            collided: false,
            path_length: 0.0,
            speed_max: reference.speed(),
            effort_accum: 0.0,
            min_clearance: f64::INFINITY,
        }
    }
}

/// Advances by `dt`, tracking `source` exactly.
pub fn sim_step<S: ReferenceSource + ?Sized>(
    sim: &SimState,
    source: &S,
    dt: f64,
    world: &World,
    robot_radius: f64,
) -> SimState {
    let time = sim.time + dt;
    let next = source.reference_at(time);
    let prev = &sim.reference;
    let j0 = prev.jerk.norm_squared();
    let j1 = next.jerk.norm_squared();
    let clearance = world.clearance(&next.position);
    SimState {
        time,
        reference: next,
        // same strict test as World::gt_collides
        collided: sim.collided || clearance < robot_radius,
        min_clearance: sim.min_clearance.min(clearance),
        path_length: sim.path_length + (next.position - prev.position).norm(),
        speed_max: sim.speed_max.max(next.speed()),
        effort_accum: sim.effort_accum + 0.5 * (j0 + j1) * dt,
    }
}

/// One row of the trajectory log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub speed: f64,
    pub decision_kind: String,
}

impl TrajectoryRow {
    pub fn new(t: f64, r: &ReferenceState, decision_kind: &str) -> Self {
        Self {
            t,
            x: r.position.x,
            y: r.position.y,
            z: r.position.z,
            yaw: r.yaw,
            vx: r.velocity.x,
            vy: r.velocity.y,
            vz: r.velocity.z,
            speed: r.speed(),
            decision_kind: decision_kind.to_string(),
        }
    }
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["t", "x", "y", "z", "yaw", "vx", "vy", "vz", "speed", "decision_kind"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{BodyCommand, Hold, MotionPrimitive, Trajectory};
    use crate::sim::world::Aabb;
    use crate::Vec3;

    struct Prim(MotionPrimitive);

    impl ReferenceSource for Prim {
        fn reference_at(&self, t: f64) -> ReferenceState {
            self.0.reference(t)
        }
    }

    fn world() -> World {
        World::empty(Aabb::new(Vec3::new(-100.0, -100.0, -100.0), Vec3::new(100.0, 100.0, 100.0)))
    }

    fn run<S: ReferenceSource>(src: &S, seconds: f64) -> SimState {
        let dt = 1.0 / 240.0;
        let mut s = SimState::new(0.0, src.reference_at(0.0));
        let n = (seconds / dt).round() as usize;
        for _ in 0..n {
            s = sim_step(&s, src, dt, &world(), 0.3);
        }
        s
    }

    #[test]
    fn hover_accumulates_nothing() {
        let s = run(&Hold(ReferenceState::hover(Vec3::new(1.0, 2.0, 3.0), 0.3)), 1.0);
        assert_eq!(s.path_length, 0.0);
        assert_eq!(s.effort_accum, 0.0);
        assert!(!s.collided);
    }

    #[test]
    fn constant_speed_line() {
        let mut start = ReferenceState::hover(Vec3::zeros(), 0.0);
        start.velocity = Vec3::new(2.0, 0.0, 0.0);
        let prim =
            MotionPrimitive::new(start, BodyCommand::new(2.0, 0.0, 0.0, 3.0).unwrap(), 0.0).unwrap();
        let s = run(&Prim(prim), 3.0);
        assert!((s.path_length - 6.0).abs() < 1e-6);
        assert_eq!(s.effort_accum, 0.0);
        assert!((s.speed_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_rows() {
        let rows = vec![TrajectoryRow::new(
            0.0,
            &ReferenceState::hover(Vec3::zeros(), 0.0),
            "commit",
        )];
        let mut out = Vec::new();
        write_trajectory_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,y,z,yaw,vx,vy,vz,speed,decision_kind");
        assert_eq!(lines.count(), 1);
    }
}
