use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use arcnav::primitives::{
    build_library, build_stop, propagate_flat, sample_points, symmetric_grid, BodyCommand, FlatState,
    MotionPrimitive, ReferenceState, Trajectory,
};
use arcnav::Vec3;

fn rest() -> ReferenceState {
    ReferenceState::hover(Vec3::zeros(), 0.0)
}

#[test]
fn quarter_turn_with_climb() {
    let cmd = BodyCommand::new(1.0, 0.5, FRAC_PI_2, 1.0).unwrap();
    let end = propagate_flat(&FlatState::new(Vec3::zeros(), 0.0), &cmd, 1.0).unwrap();
    // RK4 of the unicycle ODE at step 1e-4
    let oracle = Vec3::new(0.636_619_772_367_521_1, 0.636_619_772_367_599_9, 0.499_999_999_999_953_1);
    assert!((end.position - oracle).norm() < 1e-6);
    assert!((end.position.x - 2.0 / PI).abs() < 1e-12);
    assert!((end.yaw - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn singular_limit() {
    let start = FlatState::new(Vec3::zeros(), 0.0);
    let a = propagate_flat(&start, &BodyCommand::new(1.0, 0.0, 1e-12, 1.0).unwrap(), 1.0).unwrap();
    let b = propagate_flat(&start, &BodyCommand::new(1.0, 0.0, 0.0, 1.0).unwrap(), 1.0).unwrap();
    assert!((a.position - b.position).norm() < 1e-9);
    assert_eq!(b.position, Vec3::new(1.0, 0.0, 0.0));
}

#[test]
fn post_ramp_arc_derivatives() {
    let prim = MotionPrimitive::new(rest(), BodyCommand::new(1.0, 0.0, FRAC_PI_2, 2.0).unwrap(), 0.3)
        .unwrap();
    // find the local time where the heading reaches pi/4 past the ramp
    let ramp_yaw = prim.eval(0.3).unwrap().yaw;
    let tau = 0.3 + (FRAC_PI_4 - ramp_yaw) / FRAC_PI_2;
    let s = prim.eval(tau).unwrap();
    assert!((s.yaw - FRAC_PI_4).abs() < 1e-12);
    assert!((s.speed() - 1.0).abs() < 1e-12);
    assert!((s.acceleration.norm() - FRAC_PI_2).abs() < 1e-12);
    let h = 1e-5;
    let fd_v = (prim.eval(tau + h).unwrap().position - prim.eval(tau - h).unwrap().position) / (2.0 * h);
    let fd_a = (prim.eval(tau + h).unwrap().velocity - prim.eval(tau - h).unwrap().velocity) / (2.0 * h);
    assert!((fd_v.norm() - 1.0).abs() < 1e-4);
    assert!((fd_a.norm() - FRAC_PI_2).abs() < 1e-4);
}

#[test]
fn default_fan_is_symmetric() {
    let lib = build_library(&rest(), 3.0, &symmetric_grid(1.2, 11), &[-0.5, 0.0, 0.5], 2.0, 0.3)
        .unwrap();
    assert_eq!(lib.len(), 33);
    let straight = &lib.primitives[0];
    assert_eq!((straight.command().omega, straight.command().v_z), (0.0, 0.0));
    for a in &lib.primitives {
        let c = a.command();
        let mirror = lib
            .primitives
            .iter()
            .find(|b| b.command().omega == -c.omega && b.command().v_z == c.v_z)
            .unwrap();
        let (pa, pb) = (a.endpoint(), mirror.endpoint());
        assert!((pa.x - pb.x).abs() < 1e-9);
        assert!((pa.y + pb.y).abs() < 1e-9);
        assert!((pa.z - pb.z).abs() < 1e-9);
    }
}

#[test]
fn stop_covers_half_the_cruise_distance() {
    let mut start = rest();
    start.velocity = Vec3::new(2.0, 0.0, 0.0);
    let stop = build_stop(&start, 1.0).unwrap();
    let end = stop.terminal();
    assert!((end.position.x - 1.0).abs() < 1e-12);
    assert_eq!(end.velocity, Vec3::zeros());
    assert_eq!(end.acceleration, Vec3::zeros());
    assert_eq!(end.jerk, Vec3::zeros());
    // held forever after
    assert_eq!(stop.eval(5.0).position, end.position);
}

#[test]
fn samples_match_evaluation() {
    let prim = MotionPrimitive::new(rest(), BodyCommand::new(1.0, 0.0, 0.0, 1.0).unwrap(), 0.3).unwrap();
    let samples = sample_points(&prim, 0.5);
    let taus: Vec<f64> = samples.iter().map(|s| s.0).collect();
    assert_eq!(taus, vec![0.0, 0.5, 1.0]);
    for (tau, p) in samples {
        assert_eq!(p, prim.eval(tau).unwrap().position);
    }
    assert_eq!(prim.duration(), 1.0);
}
