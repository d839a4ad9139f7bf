//! Quaternion rotations, pinhole projection with near-plane clipping, and
//! left-to-right ordering of centerlines as seen by a driver facing the sign.
//!
//! Camera frame: +z forward, +x right, +y down; image origin top-left.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{CameraIntrinsics, CameraPose, LaneVector, Point3, QUATERNION_TOLERANCE};

/// Minimum vector area of a usable sign quad, m².
pub const MIN_SIGN_AREA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("quaternion norm {0} is not within 1e-3 of 1")]
    QuaternionNorm(f64),
    #[error("sign quad is degenerate (area {0:e} m²)")]
    DegenerateQuad(f64),
    #[error("no centerlines to order")]
    NoCenterlines,
    #[error("invalid projection config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuaternionOrder {
    /// Scalar last.
    #[default]
    Xyzw,
    /// Scalar first.
    Wxyz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoseDirection {
    /// `rvec`/`tvec` place the camera in the world: `p_world = R p_cam + t`.
    #[default]
    CameraToWorld,
    /// `rvec`/`tvec` map world points into the camera: `p_cam = R p_world + t`.
    WorldToCamera,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    pub quaternion_order: QuaternionOrder,
    pub pose_direction: PoseDirection,
    /// Near clipping plane, meters in front of the camera.
    pub near_clip: f64,
    pub image_size: (u32, u32),
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            quaternion_order: QuaternionOrder::Xyzw,
            pose_direction: PoseDirection::CameraToWorld,
            near_clip: 0.1,
            image_size: (1920, 1240),
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.near_clip > 0.0 && self.near_clip.is_finite()) {
            return Err(GeometryError::Config(format!(
                "near_clip must be positive, got {}",
                self.near_clip
            )));
        }
        if self.image_size.0 == 0 || self.image_size.1 == 0 {
            return Err(GeometryError::Config("image size must be positive".into()));
        }
        Ok(())
    }

    /// Applies comma-separated `key=value` overrides, e.g.
    /// `quat=wxyz,pose=world_to_camera,near=0.2,size=1920x1080`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, GeometryError> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                GeometryError::Config(format!("expected key=value, got {item:?}"))
            })?;
            let bad = || GeometryError::Config(format!("bad value {value:?} for {key}"));
            match key.trim() {
                "quat" => self.quaternion_order = value.parse()?,
                "pose" => self.pose_direction = value.parse()?,
                "near" => self.near_clip = value.parse().map_err(|_| bad())?,
                "size" => {
                    let (w, h) = value.split_once('x').ok_or_else(bad)?;
                    self.image_size =
                        (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
                }
                other => return Err(GeometryError::Config(format!("unknown key {other:?}"))),
            }
        }
        self.validate()?;
        Ok(self)
    }
}

impl FromStr for QuaternionOrder {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xyzw" => Ok(QuaternionOrder::Xyzw),
            "wxyz" => Ok(QuaternionOrder::Wxyz),
            _ => Err(GeometryError::Config(format!(
                "unknown quaternion order {s:?}"
            ))),
        }
    }
}

impl FromStr for PoseDirection {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "camera_to_world" => Ok(PoseDirection::CameraToWorld),
            "world_to_camera" => Ok(PoseDirection::WorldToCamera),
            _ => Err(GeometryError::Config(format!(
                "unknown pose direction {s:?}"
            ))),
        }
    }
}

impl fmt::Display for QuaternionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuaternionOrder::Xyzw => "xyzw",
            QuaternionOrder::Wxyz => "wxyz",
        })
    }
}

impl fmt::Display for PoseDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoseDirection::CameraToWorld => "camera_to_world",
            PoseDirection::WorldToCamera => "world_to_camera",
        })
    }
}

/// Row-major 3×3 rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rotation whose columns are the given axes.
    pub fn from_columns(c0: Point3, c1: Point3, c2: Point3) -> Self {
        Rotation([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        let m = &self.0;
        Point3::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
        )
    }

    pub fn transpose(&self) -> Rotation {
        let m = &self.0;
        Rotation(std::array::from_fn(|r| std::array::from_fn(|c| m[c][r])))
    }

    pub fn mul(&self, o: &Rotation) -> Rotation {
        Rotation(std::array::from_fn(|r| {
            std::array::from_fn(|c| (0..3).map(|k| self.0[r][k] * o.0[k][c]).sum())
        }))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `R Rᵀ − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.mul(&self.transpose());
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p.0[r][c] - want).abs());
            }
        }
        worst
    }
}

/// Rotation for a quaternion stored in `order`. The quaternion is
/// normalized first; norms further than 1e-3 from 1 are rejected.
pub fn quat_to_rotation(q: [f64; 4], order: QuaternionOrder) -> Result<Rotation, GeometryError> {
    let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_TOLERANCE {
        return Err(GeometryError::QuaternionNorm(norm));
    }
    let [x, y, z, w] = match order {
        QuaternionOrder::Xyzw => q,
        QuaternionOrder::Wxyz => [q[1], q[2], q[3], q[0]],
    }
    .map(|c| c / norm);
    Ok(Rotation([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]))
}

/// Unit quaternion of a proper rotation, written in `order`, with w ≥ 0.
pub fn rotation_to_quat(r: &Rotation, order: QuaternionOrder) -> [f64; 4] {
    let m = &r.0;
    let trace = m[0][0] + m[1][1] + m[2][2];
    let (x, y, z, w);
    if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (m[2][1] - m[1][2]) / s;
        y = (m[0][2] - m[2][0]) / s;
        z = (m[1][0] - m[0][1]) / s;
    } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
        let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
        w = (m[2][1] - m[1][2]) / s;
        x = 0.25 * s;
        y = (m[0][1] + m[1][0]) / s;
        z = (m[0][2] + m[2][0]) / s;
    } else if m[1][1] > m[2][2] {
        let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
        w = (m[0][2] - m[2][0]) / s;
        x = (m[0][1] + m[1][0]) / s;
        y = 0.25 * s;
        z = (m[1][2] + m[2][1]) / s;
    } else {
        let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
        w = (m[1][0] - m[0][1]) / s;
        x = (m[0][2] + m[2][0]) / s;
        y = (m[1][2] + m[2][1]) / s;
        z = 0.25 * s;
    }
    let sign = if w < 0.0 { -1.0 } else { 1.0 };
    let [x, y, z, w] = [x, y, z, w].map(|c| c * sign);
    match order {
        QuaternionOrder::Xyzw => [x, y, z, w],
        QuaternionOrder::Wxyz => [w, x, y, z],
    }
}

/// World → camera transform for one pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraTransform {
    rotation: Rotation,
    translation: Point3,
}

impl CameraTransform {
    pub fn new(pose: &CameraPose, cfg: &ProjectionConfig) -> Result<Self, GeometryError> {
        let r = quat_to_rotation(pose.rvec, cfg.quaternion_order)?;
        Ok(match cfg.pose_direction {
            PoseDirection::WorldToCamera => CameraTransform {
                rotation: r,
                translation: pose.tvec,
            },
            PoseDirection::CameraToWorld => {
                let rt = r.transpose();
                CameraTransform {
                    rotation: rt,
                    translation: rt.apply(pose.tvec) * -1.0,
                }
            }
        })
    }

    pub fn to_camera(&self, p: Point3) -> Point3 {
        self.rotation.apply(p) + self.translation
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pixel { u: f64, v: f64 },
    BehindCamera,
}

/// Pinhole projection of a camera-frame point.
pub fn project_camera_point(p: Point3, k: &CameraIntrinsics, near_clip: f64) -> Projection {
    if p.z < near_clip {
        return Projection::BehindCamera;
    }
    Projection::Pixel {
        u: k.fx * p.x / p.z + k.cx,
        v: k.fy * p.y / p.z + k.cy,
    }
}

pub fn project_point(
    p: Point3,
    pose: &CameraPose,
    k: &CameraIntrinsics,
    cfg: &ProjectionConfig,
) -> Result<Projection, GeometryError> {
    let cam = CameraTransform::new(pose, cfg)?;
    Ok(project_camera_point(cam.to_camera(p), k, cfg.near_clip))
}

/// A projected line piece in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

fn pixel(p: Point3, k: &CameraIntrinsics) -> [f64; 2] {
    [k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy]
}

/// Projects consecutive point pairs. Pairs straddling the near plane are
/// cut at it; pairs entirely behind it are dropped.
pub fn project_polyline(
    points: &[Point3],
    pose: &CameraPose,
    k: &CameraIntrinsics,
    cfg: &ProjectionConfig,
) -> Result<Vec<Segment2>, GeometryError> {
    let cam = CameraTransform::new(pose, cfg)?;
    let near = cfg.near_clip;
    let local: Vec<Point3> = points.iter().map(|&p| cam.to_camera(p)).collect();
    let mut out = Vec::new();
    for w in local.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        match (a.z >= near, b.z >= near) {
            (false, false) => continue,
            (true, true) => {}
            (front_a, _) => {
                let t = (near - a.z) / (b.z - a.z);
                let mut cut = a + (b - a) * t;
                cut.z = near;
                if front_a {
                    b = cut;
                } else {
                    a = cut;
                }
            }
        }
        out.push(Segment2 {
            a: pixel(a, k),
            b: pixel(b, k),
        });
    }
    Ok(out)
}

/// Half the norm of the polygon's vector area.
pub fn polygon_area(points: &[Point3]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = Point3::default();
    for i in 0..n {
        acc = acc + points[i].cross(points[(i + 1) % n]);
    }
    acc.norm() / 2.0
}

fn closest_on_segment(p: Point3, a: Point3, b: Point3) -> Point3 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

struct Approach {
    id: u32,
    nearest: Point3,
    heading: (f64, f64),
}

fn approach(v: &LaneVector, target: Point3) -> Approach {
    let mut best = (f64::INFINITY, v.points[0], (0.0, 0.0));
    for w in v.points.windows(2) {
        let c = closest_on_segment(target, w[0], w[1]);
        let d = (c - target).norm();
        if d < best.0 {
            let dir = w[1] - w[0];
            let h = dir.x.hypot(dir.y);
            let heading = if h > 0.0 {
                (dir.x / h, dir.y / h)
            } else {
                (0.0, 0.0)
            };
            best = (d, c, heading);
        }
    }
    Approach {
        id: v.id,
        nearest: best.1,
        heading: best.2,
    }
}

/// Centerline ids ordered left to right for a driver approaching the sign.
///
/// The sign's width axis is the principal horizontal direction of its quad,
/// oriented to point to the driver's right (travel direction taken from the
/// centerlines near the sign). Each centerline is placed by projecting its
/// point closest to the sign centre onto that axis; ties go to the lower id.
pub fn lateral_order(
    centerlines: &[&LaneVector],
    sign_quad: &[Point3; 4],
) -> Result<Vec<u32>, GeometryError> {
    if centerlines.is_empty() {
        return Err(GeometryError::NoCenterlines);
    }
    let area = polygon_area(sign_quad);
    if area.is_nan() || area < MIN_SIGN_AREA {
        return Err(GeometryError::DegenerateQuad(area));
    }
    let center = sign_quad.iter().fold(Point3::default(), |acc, &p| acc + p) * 0.25;

    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in sign_quad {
        let (dx, dy) = (p.x - center.x, p.y - center.y);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx + syy < MIN_SIGN_AREA {
        return Err(GeometryError::DegenerateQuad(area));
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut axis = (theta.cos(), theta.sin());

    let approaches: Vec<Approach> = centerlines.iter().map(|v| approach(v, center)).collect();
    let mut forward = approaches.iter().fold((0.0, 0.0), |acc, a| {
        (acc.0 + a.heading.0, acc.1 + a.heading.1)
    });
    if forward.0.hypot(forward.1) < 1e-9 {
        // No usable travel direction: face the sign from the lanes instead.
        let n = approaches.len() as f64;
        let mean = approaches
            .iter()
            .fold(Point3::default(), |acc, a| acc + a.nearest)
            * (1.0 / n);
        forward = (center.x - mean.x, center.y - mean.y);
    }
    let right = (forward.1, -forward.0);
    if axis.0 * right.0 + axis.1 * right.1 < 0.0 {
        axis = (-axis.0, -axis.1);
    }

    let mut keyed: Vec<(f64, u32)> = approaches
        .iter()
        .map(|a| {
            let d = a.nearest - center;
            (axis.0 * d.x + axis.1 * d.y, a.id)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, id)| id).collect())
}
