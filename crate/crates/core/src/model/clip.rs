use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use crate::error::ModelError;

/// Maximum accepted deviation of a pose quaternion's norm from 1.
pub const QUATERNION_TOLERANCE: f64 = 1e-3;

/// A point in the clip's local ENU frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Point3 { x, y, z }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Map vector type codes as they appear in data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VecType {
    Divider = 0,
    SpecialDivider = 1,
    RoadBoundary = 2,
    Centerline = 3,
    Crosswalk = 4,
}

impl VecType {
    pub const ALL: [VecType; 5] = [
        VecType::Divider,
        VecType::SpecialDivider,
        VecType::RoadBoundary,
        VecType::Centerline,
        VecType::Crosswalk,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        VecType::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            VecType::Divider => "divider",
            VecType::SpecialDivider => "special_divider",
            VecType::RoadBoundary => "road_boundary",
            VecType::Centerline => "centerline",
            VecType::Crosswalk => "crosswalk",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneVector {
    pub id: u32,
    pub vec_type: VecType,
    pub points: Vec<Point3>,
}

impl LaneVector {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.points.len() < 2 {
            return Err(ModelError::TooFewPoints {
                needed: 2,
                found: self.points.len(),
            });
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(())
    }
}

/// Pinhole intrinsics; the full matrix is `[[fx,0,cx],[0,fy,cy],[0,0,1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.fx, self.fy, self.cx, self.cy];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(ModelError::BadFocalLength {
                fx: self.fx,
                fy: self.fy,
            });
        }
        Ok(())
    }
}

/// Camera pose for one frame.
///
/// `rvec` keeps the four components exactly as stored so that files round-trip
/// bit for bit; [`CameraPose::unit_quaternion`] yields the normalized value.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub timestamp: String,
    pub tvec: Point3,
    pub rvec: [f64; 4],
}

impl CameraPose {
    pub fn quaternion_norm(&self) -> f64 {
        self.rvec.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.tvec.is_finite() || self.rvec.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let norm = self.quaternion_norm();
        if (norm - 1.0).abs() > QUATERNION_TOLERANCE {
            return Err(ModelError::QuaternionNorm(norm));
        }
        Ok(())
    }

    pub fn unit_quaternion(&self) -> [f64; 4] {
        let n = self.quaternion_norm();
        self.rvec.map(|c| c / n)
    }
}

/// Reference to an image frame on disk. Images are never decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRef {
    pub timestamp: String,
    pub path: String,
}

/// One traffic scene centred on a single sign.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipData {
    pub sign_quad: [Point3; 4],
    pub vectors: BTreeMap<u32, LaneVector>,
    pub intrinsics: CameraIntrinsics,
    pub poses: BTreeMap<String, CameraPose>,
    pub frames: Vec<FrameRef>,
}

impl ClipData {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sign_quad.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        for (id, v) in &self.vectors {
            if *id != v.id {
                return Err(ModelError::DuplicateVectorId(v.id));
            }
            v.validate()?;
        }
        self.intrinsics.validate()?;
        if self.poses.is_empty() {
            return Err(ModelError::NoPoses);
        }
        for pose in self.poses.values() {
            pose.validate()?;
        }
        Ok(())
    }

    pub fn centerlines(&self) -> impl Iterator<Item = &LaneVector> {
        self.vectors
            .values()
            .filter(|v| v.vec_type == VecType::Centerline)
    }

    pub fn centerline_ids(&self) -> Vec<u32> {
        self.centerlines().map(|v| v.id).collect()
    }

    pub fn is_centerline(&self, id: u32) -> bool {
        self.vectors
            .get(&id)
            .is_some_and(|v| v.vec_type == VecType::Centerline)
    }
}

/// Outline of a detected symbol or text block.
#[derive(Debug, Clone, PartialEq)]
pub enum OcrPolygon {
    World(Vec<Point3>),
    Pixel(Vec<[f64; 2]>),
}

/// Optional detection box plus recognized text for one sign element.
#[derive(Debug, Clone, PartialEq)]
pub struct OcrObservation {
    pub polygon: OcrPolygon,
    pub text: String,
}

impl OcrObservation {
    pub fn validate(&self) -> Result<(), ModelError> {
        let distinct = match &self.polygon {
            OcrPolygon::World(pts) => {
                if pts.iter().any(|p| !p.is_finite()) {
                    return Err(ModelError::NonFinite);
                }
                count_distinct(pts.iter().map(|p| p.to_array().to_vec()))
            }
            OcrPolygon::Pixel(pts) => {
                if pts.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(ModelError::NonFinite);
                }
                count_distinct(pts.iter().map(|p| p.to_vec()))
            }
        };
        if distinct < 3 {
            return Err(ModelError::DegeneratePolygon);
        }
        Ok(())
    }
}

pub(crate) fn count_distinct(points: impl Iterator<Item = Vec<f64>>) -> usize {
    let mut seen: Vec<Vec<u64>> = Vec::new();
    for p in points {
        let bits: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
        if !seen.contains(&bits) {
            seen.push(bits);
        }
    }
    seen.len()
}
