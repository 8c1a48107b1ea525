use std::collections::VecDeque;
use std::sync::{Arc, RwLock};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::camera::CameraModel;
use super::frame::DepthFrame;
use super::kdtree::Neighbor;
use super::MemoryError;
use crate::{Pose, Vec3};

/// Tunables of the frame memory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Frames older than this relative to the newest are evicted, s.
    pub history_duration: f64,
    /// Depth band around a measured surface still counted as free, m.
    pub occlusion_band: f64,
    /// Pixel stride used when building frame clouds.
    pub stride: usize,
    /// Neighbors returned per query.
    pub k: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            history_duration: 1.0,
            occlusion_band: 0.1,
            stride: 4,
            k: 1,
        }
    }
}

/// Per-frame classification of a sensor-frame point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameClass {
    FreeKnown,
    Occluded,
    OutOfView,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    FreeKnown,
    NearObstacle,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub verdict: Verdict,
    /// Distance to the nearest cloud point of the resolving frame; infinite
    /// when no frame resolved the query or its cloud is empty.
    pub distance: f64,
    pub frame_index: Option<usize>,
    pub neighbors: Vec<Neighbor>,
}

/// Compares the point's depth with the raster at its pixel.
pub fn classify_in_frame(
    frame: &DepthFrame,
    camera: &CameraModel,
    p_sensor: &Vec3,
    occlusion_band: f64,
) -> FrameClass {
    let Some(proj) = camera.project(p_sensor) else {
        return FrameClass::OutOfView;
    };
    let measured = frame.raster().get(proj.col, proj.row);
    if measured.is_nan() {
        // no information is never free
        return FrameClass::Occluded;
    }
    if proj.depth <= measured as f64 + occlusion_band {
        FrameClass::FreeKnown
    } else {
        FrameClass::Occluded
    }
}

/// Exact k nearest cloud points of `frame`, closest first.
pub fn knn(frame: &DepthFrame, p_sensor: &Vec3, k: usize) -> Vec<Neighbor> {
    frame.knn(p_sensor, k)
}

/// A frame plus the edge to the next older frame.
#[derive(Clone, Debug)]
pub struct ChainEntry {
    pub frame: Arc<DepthFrame>,
    /// Maps this frame's sensor coordinates into the next older frame's.
    /// Unused on the oldest entry.
    pub edge: Pose,
}

/// Newest-first chain of depth frames over a sliding time window.
///
/// Cloning is cheap (frames are shared), so a clone is a consistent
/// snapshot for concurrent readers.
#[derive(Clone, Debug)]
pub struct FrameChain {
    camera: CameraModel,
    config: ChainConfig,
    entries: VecDeque<ChainEntry>,
}

impl FrameChain {
    pub fn new(camera: CameraModel, config: ChainConfig) -> Result<Self, MemoryError> {
        camera.validate()?;
        if !(config.history_duration >= 0.0) {
            return Err(MemoryError::InvalidCamera(
                "history duration must be non-negative".into(),
            ));
        }
        Ok(Self {
            camera,
            config,
            entries: VecDeque::new(),
        })
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ChainEntry> {
        self.entries.iter()
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut ChainEntry> {
        self.entries.iter_mut()
    }

    pub fn newest(&self) -> Option<&DepthFrame> {
        self.entries.front().map(|e| e.frame.as_ref())
    }

    /// Prepends `frame`. `edge` maps the new frame's sensor coordinates into
    /// those of the previous newest frame.
    pub fn push_frame(&mut self, frame: DepthFrame, edge: Pose) -> Result<(), MemoryError> {
        if let Some(newest) = self.newest() {
            if !(frame.stamp() > newest.stamp()) {
                return Err(MemoryError::OutOfOrderStamp {
                    newest: newest.stamp(),
                    got: frame.stamp(),
                });
            }
        }
        let stamp = frame.stamp();
        self.entries.push_front(ChainEntry {
            frame: Arc::new(frame),
            edge,
        });
        let horizon = stamp - self.config.history_duration - 1e-9;
        while self
            .entries
            .back()
            .is_some_and(|e| e.frame.stamp() < horizon)
        {
            self.entries.pop_back();
        }
        Ok(())
    }

    /// Pushes a frame whose edge follows from the capture poses.
    pub fn push_posed(&mut self, frame: DepthFrame) -> Result<(), MemoryError> {
        let edge = match self.newest() {
            Some(prev) => {
                let prev_sensor = self.camera.sensor_pose(prev.pose());
                let new_sensor = self.camera.sensor_pose(frame.pose());
                prev_sensor.inverse() * new_sensor
            }
            None => Pose::identity(),
        };
        self.push_frame(frame, edge)
    }

    /// Coordinates of a body-frame point in every frame, newest first, by
    /// chaining the stored edges.
    pub fn frame_coordinates(&self, p_body: &Vec3) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut p = self.camera.body_to_sensor * Point3::from(*p_body);
        for i in 0..self.entries.len() {
            if i > 0 {
                p = self.entries[i - 1].edge * p;
            }
            out.push(p.coords);
        }
        out
    }

    /// Query for a point in the body frame of the newest capture.
    pub fn query(&self, p_body: &Vec3, k: usize, r_coll: f64) -> QueryResult {
        let mut p = self.camera.body_to_sensor * Point3::from(*p_body);
        for (i, entry) in self.entries.iter().enumerate() {
            if i > 0 {
                p = self.entries[i - 1].edge * p;
            }
            let class = classify_in_frame(&entry.frame, &self.camera, &p.coords, self.config.occlusion_band);
            if class == FrameClass::FreeKnown {
                let neighbors = entry.frame.knn(&p.coords, k.max(1));
                let distance = neighbors.first().map_or(f64::INFINITY, |n| n.distance);
                let verdict = if distance < r_coll {
                    Verdict::NearObstacle
                } else {
                    Verdict::FreeKnown
                };
                return QueryResult {
                    verdict,
                    distance,
                    frame_index: Some(i),
                    neighbors,
                };
            }
        }
        QueryResult {
            verdict: Verdict::Unknown,
            distance: f64::INFINITY,
            frame_index: None,
            neighbors: Vec::new(),
        }
    }

    /// Query for a world-frame point, using the newest capture pose.
    pub fn query_world(&self, p_world: &Vec3, k: usize, r_coll: f64) -> QueryResult {
        match self.newest() {
            Some(frame) => {
                let p_body = frame.pose().inverse_transform_point(&Point3::from(*p_world));
                self.query(&p_body.coords, k, r_coll)
            }
            None => self.query(p_world, k, r_coll),
        }
    }
}

/// Single-writer, many-reader wrapper with snapshot reads.
#[derive(Debug)]
pub struct SharedFrameChain {
    inner: RwLock<Arc<FrameChain>>,
}

impl SharedFrameChain {
    pub fn new(chain: FrameChain) -> Self {
        Self {
            inner: RwLock::new(Arc::new(chain)),
        }
    }

    /// Current chain; unaffected by later pushes.
    pub fn snapshot(&self) -> Arc<FrameChain> {
        self.inner.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn push_frame(&self, frame: DepthFrame, edge: Pose) -> Result<(), MemoryError> {
        let mut guard = self.inner.write().unwrap_or_else(|e| e.into_inner());
        Arc::make_mut(&mut guard).push_frame(frame, edge)
    }

    pub fn push_posed(&self, frame: DepthFrame) -> Result<(), MemoryError> {
        let mut guard = self.inner.write().unwrap_or_else(|e| e.into_inner());
        Arc::make_mut(&mut guard).push_posed(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::frame::{DepthRaster, NO_RETURN};

    fn camera() -> CameraModel {
        CameraModel::default().scaled(0.25)
    }

    fn empty_frame(cam: &CameraModel, stamp: f64) -> DepthFrame {
        let raster = DepthRaster::filled(cam.width, cam.height, NO_RETURN);
        DepthFrame::new(cam, raster, stamp, Pose::identity(), 1).unwrap()
    }

    #[test]
    fn thirty_hz_for_one_second() {
        let cam = camera();
        let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
        for i in 0..40 {
            chain
                .push_frame(empty_frame(&cam, i as f64 / 30.0), Pose::identity())
                .unwrap();
            let newest = chain.entries().next().unwrap().frame.stamp();
            let oldest = chain.entries().last().unwrap().frame.stamp();
            assert!(newest - oldest <= 1.0 + 1e-9);
        }
        assert_eq!(chain.len(), 31);
    }

    #[test]
    fn first_push() {
        let cam = camera();
        let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
        chain.push_frame(empty_frame(&cam, 0.0), Pose::identity()).unwrap();
        assert_eq!(chain.len(), 1);
    }

    #[test]
    fn stale_stamp_rejected() {
        let cam = camera();
        let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
        chain.push_frame(empty_frame(&cam, 1.0), Pose::identity()).unwrap();
        let err = chain.push_frame(empty_frame(&cam, 1.0), Pose::identity());
        assert!(matches!(err, Err(MemoryError::OutOfOrderStamp { .. })));
        let err = chain.push_frame(empty_frame(&cam, 0.5), Pose::identity());
        assert!(matches!(err, Err(MemoryError::OutOfOrderStamp { .. })));
    }

    #[test]
    fn identity_chain_keeps_coordinates() {
        let cam = CameraModel {
            body_to_sensor: Pose::identity(),
            ..camera()
        };
        let mut chain = FrameChain::new(cam.clone(), ChainConfig::default()).unwrap();
        chain.push_frame(empty_frame(&cam, 0.0), Pose::identity()).unwrap();
        chain.push_frame(empty_frame(&cam, 0.1), Pose::identity()).unwrap();
        let p = Vec3::new(0.3, -0.2, 4.0);
        let coords = chain.frame_coordinates(&p);
        assert_eq!(coords, vec![p, p]);
    }

    #[test]
    fn empty_chain_is_unknown() {
        let chain = FrameChain::new(camera(), ChainConfig::default()).unwrap();
        let r = chain.query(&Vec3::new(3.0, 0.0, 0.0), 1, 0.5);
        assert_eq!(r.verdict, Verdict::Unknown);
        assert!(r.distance.is_infinite());
    }
}
