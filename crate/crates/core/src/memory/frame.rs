use std::io::{self, Read, Write};

use super::camera::CameraModel;
use super::kdtree::{KdTree, Neighbor};
use super::MemoryError;
use crate::{Pose, Vec3};

/// Depth value for pixels with no usable measurement.
pub const INVALID_DEPTH: f32 = f32::NAN;
/// Depth value for rays that met nothing within the sensor range. Unlike
/// [`INVALID_DEPTH`] this is evidence of free space up to `d_max`.
pub const NO_RETURN: f32 = f32::INFINITY;

/// Row-major depth image in meters (sensor-frame z, not range).
#[derive(Clone, Debug, PartialEq)]
pub struct DepthRaster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl DepthRaster {
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f32 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f32) {
        self.data[row * self.width + col] = value;
    }

    /// Pixels holding an actual surface measurement.
    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite()).count()
    }
}

/// One depth observation: raster, back-projected cloud and its k-d tree.
#[derive(Clone, Debug)]
pub struct DepthFrame {
    raster: DepthRaster,
    points: Vec<Vec3>,
    pixels: Vec<(usize, usize)>,
    tree: KdTree,
    stamp: f64,
    pose: Pose,
}

impl DepthFrame {
    /// Builds the cloud from every `stride`-th valid pixel along both axes.
    ///
    /// `pose` is `world_from_body` at capture time.
    pub fn new(
        camera: &CameraModel,
        raster: DepthRaster,
        stamp: f64,
        pose: Pose,
        stride: usize,
    ) -> Result<Self, MemoryError> {
        if raster.width != camera.width
            || raster.height != camera.height
            || raster.data.len() != raster.width * raster.height
        {
            return Err(MemoryError::RasterShape {
                expected: (camera.width, camera.height),
                got: (raster.width, raster.height),
            });
        }
        if stride == 0 {
            return Err(MemoryError::InvalidCamera("stride must be at least 1".into()));
        }
        let mut points = Vec::new();
        let mut pixels = Vec::new();
        for row in (0..raster.height).step_by(stride) {
            for col in (0..raster.width).step_by(stride) {
                let z = raster.get(col, row);
                if z.is_finite() {
                    points.push(camera.back_project(col, row, z as f64));
                    pixels.push((col, row));
                }
            }
        }
        let tree = KdTree::new(&points);
        Ok(Self {
            raster,
            points,
            pixels,
            tree,
            stamp,
            pose,
        })
    }

    pub fn raster(&self) -> &DepthRaster {
        &self.raster
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Source pixel `(col, row)` of each cloud point.
    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub fn stamp(&self) -> f64 {
        self.stamp
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    /// Same observation under a new timestamp.
    pub fn restamped(&self, stamp: f64, pose: Pose) -> Self {
        Self {
            stamp,
            pose,
            ..self.clone()
        }
    }

    pub fn knn(&self, p_sensor: &Vec3, k: usize) -> Vec<Neighbor> {
        self.tree.knn(p_sensor, k)
    }

    /// Writes the diagnostic dump: header then little-endian f32 raster.
    ///
    /// ```text
    /// magic   b"DFRM"
    /// u32     format version (1)
    /// u32     width, u32 height
    /// f64 x4  fx, fy, cx, cy
    /// f64     stamp
    /// f32 * width*height   depth in meters, row-major, NaN = invalid
    /// ```
    pub fn write_dump<W: Write>(&self, camera: &CameraModel, mut out: W) -> io::Result<()> {
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        out.write_all(&(self.raster.width as u32).to_le_bytes())?;
        out.write_all(&(self.raster.height as u32).to_le_bytes())?;
        for v in [camera.fx, camera.fy, camera.cx, camera.cy, self.stamp] {
            out.write_all(&v.to_le_bytes())?;
        }
        for d in &self.raster.data {
            out.write_all(&d.to_le_bytes())?;
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 4] = b"DFRM";
const DUMP_VERSION: u32 = 1;

/// Header of a frame dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DumpHeader {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub stamp: f64,
}

pub fn read_dump<R: Read>(mut input: R) -> io::Result<(DumpHeader, DepthRaster)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a depth frame dump"));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |input: &mut R| -> io::Result<u32> {
        input.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut input)?;
    if version != DUMP_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported dump version {version}"),
        ));
    }
    let width = read_u32(&mut input)? as usize;
    let height = read_u32(&mut input)? as usize;
    let mut f64buf = [0u8; 8];
    let mut vals = [0.0f64; 5];
    for v in vals.iter_mut() {
        input.read_exact(&mut f64buf)?;
        *v = f64::from_le_bytes(f64buf);
    }
    let mut data = Vec::with_capacity(width * height);
    let mut f32buf = [0u8; 4];
    for _ in 0..width * height {
        input.read_exact(&mut f32buf)?;
        data.push(f32::from_le_bytes(f32buf));
    }
    let header = DumpHeader {
        width,
        height,
        fx: vals[0],
        fy: vals[1],
        cx: vals[2],
        cy: vals[3],
        stamp: vals[4],
    };
    Ok((header, DepthRaster { width, height, data }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_camera() -> CameraModel {
        CameraModel::default().scaled(0.1)
    }

    #[test]
    fn cloud_skips_invalid_and_no_return() {
        let cam = small_camera();
        let mut raster = DepthRaster::filled(cam.width, cam.height, NO_RETURN);
        raster.set(4, 4, 3.0);
        raster.set(8, 4, INVALID_DEPTH);
        let frame = DepthFrame::new(&cam, raster, 0.0, Pose::identity(), 1).unwrap();
        assert_eq!(frame.points().len(), 1);
        assert_eq!(frame.tree().len(), 1);
        assert_eq!(frame.pixels()[0], (4, 4));
    }

    #[test]
    fn stride_subsamples() {
        let cam = small_camera();
        let raster = DepthRaster::filled(cam.width, cam.height, 5.0);
        let full = DepthFrame::new(&cam, raster.clone(), 0.0, Pose::identity(), 1).unwrap();
        let sub = DepthFrame::new(&cam, raster, 0.0, Pose::identity(), 4).unwrap();
        assert_eq!(full.points().len(), cam.width * cam.height);
        assert_eq!(
            sub.points().len(),
            cam.width.div_ceil(4) * cam.height.div_ceil(4)
        );
    }

    #[test]
    fn shape_mismatch_rejected() {
        let cam = small_camera();
        let raster = DepthRaster::filled(3, 3, 1.0);
        assert!(DepthFrame::new(&cam, raster, 0.0, Pose::identity(), 1).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let cam = small_camera();
        let mut raster = DepthRaster::filled(cam.width, cam.height, 2.5);
        raster.set(0, 0, INVALID_DEPTH);
        raster.set(1, 0, NO_RETURN);
        let frame = DepthFrame::new(&cam, raster.clone(), 1.25, Pose::identity(), 1).unwrap();
        let mut bytes = Vec::new();
        frame.write_dump(&cam, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 12 + 40 + 4 * cam.width * cam.height);
        let (header, back) = read_dump(bytes.as_slice()).unwrap();
        assert_eq!(header.width, cam.width);
        assert_eq!(header.stamp, 1.25);
        assert_eq!(header.fx, cam.fx);
        assert!(back.get(0, 0).is_nan());
        assert_eq!(back.get(1, 0), f32::INFINITY);
        assert_eq!(back.get(2, 0), 2.5);
    }
}
