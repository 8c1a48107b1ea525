use arcnav::memory::{
    classify_in_frame, knn, CameraModel, ChainConfig, DepthFrame, DepthRaster, FrameChain,
    FrameClass, MemoryError, Verdict, INVALID_DEPTH, NO_RETURN,
};
use arcnav::{Pose, Vec3};
use nalgebra::Translation3;

/// Small camera with an identity extrinsic, so body and sensor frames agree.
fn identity_camera() -> CameraModel {
    CameraModel {
        body_to_sensor: Pose::identity(),
        ..CameraModel::default().scaled(0.25)
    }
}

fn frame_with(cam: &CameraModel, pixels: &[(usize, usize, f32)], stamp: f64, pose: Pose) -> DepthFrame {
    let mut raster = DepthRaster::filled(cam.width, cam.height, NO_RETURN);
    for &(c, r, d) in pixels {
        raster.set(c, r, d);
    }
    DepthFrame::new(cam, raster, stamp, pose, 1).unwrap()
}

fn center(cam: &CameraModel) -> (usize, usize) {
    (cam.cx.round() as usize, cam.cy.round() as usize)
}

#[test]
fn projection_hand_computed() {
    let cam = CameraModel {
        fx: 200.0,
        cx: 212.0,
        ..CameraModel::default()
    };
    let p = cam.project(&Vec3::new(1.0, 0.0, 4.0)).unwrap();
    assert_eq!(p.u, 262.0);
    let axis = cam.project(&Vec3::new(0.0, 0.0, 5.0)).unwrap();
    assert_eq!((axis.u, axis.v, axis.depth), (cam.cx, cam.cy, 5.0));
    assert!(cam.project(&Vec3::new(0.0, 0.0, cam.d_min / 2.0)).is_none());
}

#[test]
fn free_space_classification() {
    let cam = identity_camera();
    let (c, r) = center(&cam);
    let frame = frame_with(&cam, &[(c, r, 5.0)], 0.0, Pose::identity());
    let on_axis = |z: f64| Vec3::new(0.0, 0.0, z);
    assert_eq!(classify_in_frame(&frame, &cam, &on_axis(2.0), 0.1), FrameClass::FreeKnown);
    assert_eq!(classify_in_frame(&frame, &cam, &on_axis(5.05), 0.1), FrameClass::FreeKnown);
    assert_eq!(classify_in_frame(&frame, &cam, &on_axis(6.0), 0.1), FrameClass::Occluded);
    assert_eq!(classify_in_frame(&frame, &cam, &on_axis(-1.0), 0.1), FrameClass::OutOfView);

    let blind = frame_with(&cam, &[(c, r, INVALID_DEPTH)], 0.0, Pose::identity());
    assert_eq!(classify_in_frame(&blind, &cam, &on_axis(2.0), 0.1), FrameClass::Occluded);
}

#[test]
fn nearest_neighbor_examples() {
    let cam = identity_camera();
    let (c, r) = center(&cam);
    let frame = frame_with(&cam, &[(c, r, 5.0)], 0.0, Pose::identity());
    let n = knn(&frame, &Vec3::new(0.0, 0.0, 4.0), 1);
    assert_eq!(n.len(), 1);
    assert!((n[0].distance - 1.0).abs() < 1e-12);
    assert_eq!(knn(&frame, &Vec3::new(0.0, 0.0, 4.0), 5).len(), 1);
}

#[test]
fn query_near_obstacle() {
    let cam = identity_camera();
    let (c, r) = center(&cam);
    let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
    chain.push_posed(frame_with(&cam, &[(c, r, 5.0)], 0.0, Pose::identity())).unwrap();
    let q = chain.query(&Vec3::new(0.0, 0.0, 4.7), 1, 0.5);
    assert_eq!(q.verdict, Verdict::NearObstacle);
    assert!((q.distance - 0.3).abs() < 1e-6);
    assert_eq!(q.frame_index, Some(0));

    let far = chain.query(&Vec3::new(0.0, 0.0, 2.0), 1, 0.5);
    assert_eq!(far.verdict, Verdict::FreeKnown);
    assert!((far.distance - 3.0).abs() < 1e-6);
}

#[test]
fn behind_every_camera_is_unknown() {
    let cam = identity_camera();
    let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
    for i in 0..5 {
        let pose = Pose::from_parts(Translation3::new(0.0, 0.0, 0.1 * i as f64), Default::default());
        chain.push_posed(frame_with(&cam, &[], i as f64 / 30.0, pose)).unwrap();
    }
    let q = chain.query(&Vec3::new(0.0, 0.0, -3.0), 1, 0.5);
    assert_eq!(q.verdict, Verdict::Unknown);
    assert!(q.distance.is_infinite());
}

#[test]
fn identity_edges_keep_coordinates() {
    let cam = identity_camera();
    let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
    chain.push_frame(frame_with(&cam, &[], 0.0, Pose::identity()), Pose::identity()).unwrap();
    chain.push_frame(frame_with(&cam, &[], 0.1, Pose::identity()), Pose::identity()).unwrap();
    let p = Vec3::new(0.3, -0.2, 4.0);
    assert_eq!(chain.frame_coordinates(&p), vec![p, p]);
}

#[test]
fn history_at_camera_rate() {
    let cam = identity_camera();
    let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
    for i in 0..40 {
        chain.push_posed(frame_with(&cam, &[], i as f64 / 30.0, Pose::identity())).unwrap();
    }
    assert_eq!(chain.len(), 31);
    let err = chain.push_posed(frame_with(&cam, &[], 0.5, Pose::identity())).unwrap_err();
    assert!(matches!(err, MemoryError::OutOfOrderStamp { .. }));
}

#[test]
fn kd_tree_agrees_with_brute_force_on_large_clouds() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut v = || Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(0.0..10.0));
    let cloud: Vec<Vec3> = (0..1000).map(|_| v()).collect();
    let queries: Vec<Vec3> = (0..100).map(|_| v()).collect();
    let tree = arcnav::memory::KdTree::new(&cloud);
    for q in &queries {
        let got = tree.knn(q, 3);
        let mut brute: Vec<(f64, usize)> = cloud.iter().enumerate().map(|(i, p)| ((p - q).norm(), i)).collect();
        brute.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (n, (d, i)) in got.iter().zip(brute) {
            assert_eq!(n.distance, d);
            assert_eq!(n.index, i);
        }
    }
}
