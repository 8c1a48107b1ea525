use arcnav::memory::{CameraModel, ChainConfig, DepthFrame, DepthRaster, FrameChain, KdTree, NO_RETURN};
use arcnav::planner::cost;
use arcnav::primitives::{
    build_library, build_stop_after, commit_schedule, propagate_flat, wrap_angle, BodyCommand,
    FlatState, MotionPrimitive, ReferenceState, Trajectory,
};
use arcnav::sim::{gen_forest, ForestParams};
use arcnav::{Pose, Vec3};
use nalgebra::{Point3, Translation3, UnitQuaternion};
use proptest::prelude::*;

fn rk4(xi: &FlatState, cmd: &BodyCommand, tau: f64, h: f64) -> FlatState {
    let f = |s: &[f64; 4]| [cmd.v_x * s[3].cos(), cmd.v_x * s[3].sin(), cmd.v_z, cmd.omega];
    let mut s = [xi.position.x, xi.position.y, xi.position.z, xi.yaw];
    let n = (tau / h).round() as usize;
    let h = tau / n.max(1) as f64;
    for _ in 0..n {
        let add = |a: &[f64; 4], b: &[f64; 4], k: f64| std::array::from_fn(|i| a[i] + k * b[i]);
        let k1 = f(&s);
        let k2 = f(&add(&s, &k1, h / 2.0));
        let k3 = f(&add(&s, &k2, h / 2.0));
        let k4 = f(&add(&s, &k3, h));
        s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    FlatState::new(Vec3::new(s[0], s[1], s[2]), s[3])
}

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn pose(range: f64) -> impl Strategy<Value = Pose> {
    (vec3(range), vec3(std::f64::consts::PI)).prop_map(|(t, r)| {
        Pose::from_parts(Translation3::from(t), UnitQuaternion::from_euler_angles(r.x, r.y, r.z))
    })
}

fn empty_frame(cam: &CameraModel, stamp: f64, pose: Pose) -> DepthFrame {
    let raster = DepthRaster::filled(cam.width, cam.height, NO_RETURN);
    DepthFrame::new(cam, raster, stamp, pose, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_rk4(
        p in vec3(10.0),
        yaw in -3.0..3.0f64,
        v_x in 0.0..6.0f64,
        v_z in -1.0..1.0f64,
        omega in -2.0..2.0f64,
        tau in 0.0..2.0f64,
    ) {
        let xi = FlatState::new(p, yaw);
        let cmd = BodyCommand::new(v_x, v_z, omega, 2.0).unwrap();
        let exact = propagate_flat(&xi, &cmd, tau).unwrap();
        let num = rk4(&xi, &cmd, tau, 1e-3);
        prop_assert!((exact.position - num.position).norm() < 1e-9);
        prop_assert!(wrap_angle(exact.yaw - num.yaw).abs() < 1e-9);
    }

    #[test]
    fn small_yaw_rates_approach_straight_line(
        yaw in -3.0..3.0f64,
        v_x in 0.0..6.0f64,
        delta in -1e-5..1e-5f64,
        tau in 0.0..2.0f64,
    ) {
        let xi = FlatState::new(Vec3::zeros(), yaw);
        let straight = propagate_flat(&xi, &BodyCommand::new(v_x, 0.0, 0.0, 2.0).unwrap(), tau).unwrap();
        let bent = propagate_flat(&xi, &BodyCommand::new(v_x, 0.0, delta, 2.0).unwrap(), tau).unwrap();
        let bound = 0.5 * v_x * tau * tau * delta.abs() + 1e-12;
        prop_assert!((straight.position - bent.position).norm() <= bound);
    }

    #[test]
    fn derivatives_match_finite_differences(
        v_x in 0.5..6.0f64,
        v_z in -1.0..1.0f64,
        omega in -1.5..1.5f64,
        tau in 0.01..1.99f64,
    ) {
        let start = ReferenceState::hover(Vec3::new(1.0, -2.0, 1.5), 0.3);
        let ramp = 0.3;
        prop_assume!((tau - ramp).abs() > 1e-3);
        let prim = MotionPrimitive::new(start, BodyCommand::new(v_x, v_z, omega, 2.0).unwrap(), ramp).unwrap();
        let h = 1e-5;
        let a = prim.eval(tau - h).unwrap();
        let b = prim.eval(tau + h).unwrap();
        let s = prim.eval(tau).unwrap();
        let fd = |x: Vec3, y: Vec3| (y - x) / (2.0 * h);
        prop_assert!((fd(a.position, b.position) - s.velocity).norm() < 1e-6);
        prop_assert!((fd(a.velocity, b.velocity) - s.acceleration).norm() < 1e-5);
        prop_assert!((fd(a.acceleration, b.acceleration) - s.jerk).norm() < 1e-4);
        prop_assert!((fd(a.jerk, b.jerk) - s.snap).norm() < 1e-2 * (1.0 + s.snap.norm()));
        prop_assert!(((b.yaw - a.yaw) / (2.0 * h) - s.yaw_rate).abs() < 1e-6);
    }

    #[test]
    fn committed_junctions_are_continuous(omegas in prop::collection::vec(-1.2..1.2f64, 2..8)) {
        let t_p = 1.0 / 12.0;
        let mut sched = None;
        let mut start = ReferenceState::hover(Vec3::new(0.0, 0.0, 1.5), 0.0);
        for (round, &omega) in omegas.iter().enumerate() {
            let t_now = round as f64 * t_p;
            if let Some(s) = &sched {
                start = arcnav::primitives::ScheduledTrajectory::eval(s, t_now + t_p);
            }
            let prim = MotionPrimitive::new(start, BodyCommand::new(3.0, 0.0, omega, 2.0).unwrap(), 0.3).unwrap();
            let stop = build_stop_after(&prim, t_p, 2.0).unwrap();
            let next = commit_schedule(sched.as_ref(), prim, stop, t_now, t_p).unwrap();
            for k in 1..=round + 2 {
                let t = k as f64 * t_p;
                let (dev, field) = next.eval_left_limit(t).max_deviation(&next.eval(t));
                prop_assert!(dev < 1e-9, "{field} jumps by {dev} at {t}");
            }
            let (_, stop_begin) = next.active_window();
            let (dev, field) = next.eval_left_limit(stop_begin).max_deviation(&next.eval(stop_begin));
            prop_assert!(dev < 1e-9, "{field} jumps by {dev} into the stop");
            sched = Some(next);
        }
    }

    #[test]
    fn library_is_mirror_symmetric(
        p in vec3(20.0),
        yaw in -3.0..3.0f64,
        v_x in 0.5..6.0f64,
        omega_max in 0.1..2.0f64,
    ) {
        let start = ReferenceState::hover(p, yaw);
        let omegas = arcnav::primitives::symmetric_grid(omega_max, 5);
        let lib = build_library(&start, v_x, &omegas, &[0.0], 2.0, 0.3).unwrap();
        let to_local = |q: Vec3| {
            let d = q - p;
            Vec3::new(d.x * yaw.cos() + d.y * yaw.sin(), -d.x * yaw.sin() + d.y * yaw.cos(), d.z)
        };
        for a in &lib.primitives {
            let b = lib
                .primitives
                .iter()
                .find(|b| b.command().omega == -a.command().omega)
                .unwrap();
            let (la, lb) = (to_local(a.endpoint()), to_local(b.endpoint()));
            prop_assert!((la.x - lb.x).abs() < 1e-9);
            prop_assert!((la.y + lb.y).abs() < 1e-9);
        }
    }

    #[test]
    fn chained_edges_equal_direct_transform(
        poses in prop::collection::vec(pose(10.0), 1..30),
        p_body in vec3(5.0),
    ) {
        let cam = CameraModel::default().scaled(0.05);
        let mut chain = FrameChain::new(cam.clone(), ChainConfig { history_duration: 10.0, ..ChainConfig::default() }).unwrap();
        for (i, pose) in poses.iter().enumerate() {
            chain.push_posed(empty_frame(&cam, i as f64 * 0.01, *pose)).unwrap();
        }
        let chained = chain.frame_coordinates(&p_body);
        let p_world = poses.last().unwrap() * Point3::from(p_body);
        for (c, pose) in chained.iter().zip(poses.iter().rev()) {
            let direct = cam.sensor_pose(pose).inverse_transform_point(&p_world).coords;
            prop_assert!((c - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn chain_keeps_recent_frames_newest_first(gaps in prop::collection::vec(0.0..0.2f64, 1..60)) {
        let cam = CameraModel::default().scaled(0.05);
        let cfg = ChainConfig::default();
        let mut chain = FrameChain::new(cam.clone(), cfg.clone()).unwrap();
        let mut t = 0.0;
        for g in gaps {
            t += g;
            chain.push_posed(empty_frame(&cam, t, Pose::identity())).unwrap();
            let stamps: Vec<f64> = chain.entries().map(|e| e.frame.stamp()).collect();
            prop_assert_eq!(stamps[0], t);
            prop_assert!(stamps.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(stamps.iter().all(|&s| s >= t - cfg.history_duration - 1e-9));
        }
    }

    #[test]
    fn projection_round_trips(col in 2usize..420, row in 2usize..236, z in 0.2..20.0f64) {
        let cam = CameraModel::default();
        let p = cam.back_project(col, row, z);
        let proj = cam.project(&p).unwrap();
        prop_assert_eq!((proj.col, proj.row), (col, row));
        prop_assert!((proj.depth - z).abs() < 1e-12);
        prop_assert!((proj.u - col as f64).abs() < 1e-9);
        prop_assert!((proj.v - row as f64).abs() < 1e-9);
    }

    #[test]
    fn knn_matches_brute_force(
        cloud in prop::collection::vec(vec3(10.0), 1..400),
        queries in prop::collection::vec(vec3(12.0), 1..10),
        k in 1usize..6,
    ) {
        let tree = KdTree::new(&cloud);
        for q in &queries {
            let got = tree.knn(q, k);
            let mut brute: Vec<f64> = cloud.iter().map(|p| (p - q).norm()).collect();
            brute.sort_by(f64::total_cmp);
            brute.truncate(k);
            let dists: Vec<f64> = got.iter().map(|n| n.distance).collect();
            prop_assert_eq!(dists, brute);
            for n in &got {
                prop_assert_eq!(cloud[n.index], n.point);
            }
        }
    }

    #[test]
    fn poisson_forest_respects_separation(density in 0.0..0.15f64, seed in any::<u64>()) {
        let params = ForestParams {
            density,
            spawn_points: vec![[0.0, 0.0], [70.0, 0.0]],
            ..ForestParams::default()
        };
        let forest = gen_forest(&params, seed).unwrap();
        let c = &forest.world.cylinders;
        prop_assert!(c.len() <= params.target_count());
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = (c[i].center[0] - c[j].center[0]).hypot(c[i].center[1] - c[j].center[1]);
                prop_assert!(d >= params.min_separation);
            }
            for s in &params.spawn_points {
                let d = (c[i].center[0] - s[0]).hypot(c[i].center[1] - s[1]);
                prop_assert!(d - c[i].radius >= params.spawn_radius);
            }
        }
    }

    #[test]
    fn cost_is_translation_invariant(
        goal in vec3(50.0),
        shift in vec3(50.0),
        omega in -1.2..1.2f64,
        yaw in -3.0..3.0f64,
    ) {
        let cmd = BodyCommand::new(3.0, 0.5, omega, 2.0).unwrap();
        let a = MotionPrimitive::new(ReferenceState::hover(Vec3::zeros(), yaw), cmd, 0.3).unwrap();
        let b = MotionPrimitive::new(ReferenceState::hover(shift, yaw), cmd, 0.3).unwrap();
        prop_assert!((cost(&a, &goal) - cost(&b, &(goal + shift))).abs() < 1e-12);
        prop_assert!(((b.endpoint() - shift) - a.endpoint()).norm() < 1e-12);
        prop_assert!((b.duration() - a.duration()).abs() == 0.0);
    }
}
