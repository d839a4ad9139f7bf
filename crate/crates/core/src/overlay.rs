//! SVG overlays of projected map elements for one camera pose.
//!
//! Stroke palette by vector type:
//!
//! | type            | color     |
//! |-----------------|-----------|
//! | divider         | `#ffffff` |
//! | special_divider | `#ffd700` |
//! | road_boundary   | `#1f77b4` |
//! | centerline      | `#e41a1c` |
//! | crosswalk       | `#2ca02c` |
//!
//! The sign quad is drawn in `#ff7f0e`, semantic polygons in `#9467bd`.

use std::fmt::Write;

use thiserror::Error;

use crate::geometry::{project_polyline, GeometryError, ProjectionConfig, Segment2};
use crate::model::{ClipData, LabeledRule, Point3, VecType};

pub const SIGN_COLOR: &str = "#ff7f0e";
pub const SEMANTIC_COLOR: &str = "#9467bd";

pub fn vec_type_color(t: VecType) -> &'static str {
    match t {
        VecType::Divider => "#ffffff",
        VecType::SpecialDivider => "#ffd700",
        VecType::RoadBoundary => "#1f77b4",
        VecType::Centerline => "#e41a1c",
        VecType::Crosswalk => "#2ca02c",
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OverlayError {
    #[error("no pose with timestamp {0}")]
    UnknownTimestamp(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub svg: String,
    /// Ids of the vectors that produced a path, ascending.
    pub vectors: Vec<u32>,
    pub sign_visible: bool,
    /// Keys of the labels whose semantic polygon produced a path.
    pub semantic: Vec<String>,
}

fn in_view(s: &Segment2, (w, h): (u32, u32)) -> bool {
    let (w, h) = (w as f64, h as f64);
    let lo = [s.a[0].min(s.b[0]), s.a[1].min(s.b[1])];
    let hi = [s.a[0].max(s.b[0]), s.a[1].max(s.b[1])];
    hi[0] >= 0.0 && lo[0] <= w && hi[1] >= 0.0 && lo[1] <= h
}

fn path_data(segments: &[Segment2]) -> String {
    let mut d = String::new();
    let mut last: Option<[f64; 2]> = None;
    for s in segments {
        if last != Some(s.a) {
            let _ = write!(d, "M{:.2} {:.2}", s.a[0], s.a[1]);
        }
        let _ = write!(d, "L{:.2} {:.2}", s.b[0], s.b[1]);
        last = Some(s.b);
    }
    d
}

/// Renders every element visible from the pose at `timestamp`. Segments
/// behind the near plane or entirely outside the image are omitted, and an
/// element with nothing left gets no path.
pub fn render_overlay(
    clip: &ClipData,
    labels: &[LabeledRule],
    timestamp: &str,
    cfg: &ProjectionConfig,
) -> Result<Overlay, OverlayError> {
    cfg.validate()?;
    let pose = clip
        .poses
        .get(timestamp)
        .ok_or_else(|| OverlayError::UnknownTimestamp(timestamp.to_string()))?;
    let k = &clip.intrinsics;
    let (w, h) = cfg.image_size;
    let visible = |points: &[Point3]| -> Result<Vec<Segment2>, OverlayError> {
        let mut segs = project_polyline(points, pose, k, cfg)?;
        segs.retain(|s| in_view(s, cfg.image_size));
        Ok(segs)
    };
    let ring = |points: &[Point3]| -> Vec<Point3> {
        let mut r = points.to_vec();
        if let Some(&first) = points.first() {
            r.push(first);
        }
        r
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<g fill="none" stroke-width="3">"#);

    let mut vectors = Vec::new();
    for (id, v) in &clip.vectors {
        let segs = visible(&v.points)?;
        if segs.is_empty() {
            continue;
        }
        vectors.push(*id);
        let _ = writeln!(
            svg,
            r#"<path class="vector {}" data-id="{id}" stroke="{}" d="{}"/>"#,
            v.vec_type.name(),
            vec_type_color(v.vec_type),
            path_data(&segs)
        );
    }

    let segs = visible(&ring(&clip.sign_quad))?;
    let sign_visible = !segs.is_empty();
    if sign_visible {
        let _ = writeln!(
            svg,
            r#"<path class="sign" stroke="{SIGN_COLOR}" d="{}"/>"#,
            path_data(&segs)
        );
    }

    let mut semantic = Vec::new();
    for l in labels {
        let segs = visible(&ring(&l.semantic_polygon))?;
        if segs.is_empty() {
            continue;
        }
        let key: String = l
            .key
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || "-_.".contains(*c))
            .collect();
        let _ = writeln!(
            svg,
            r#"<path class="semantic" data-key="{key}" stroke="{SEMANTIC_COLOR}" d="{}"/>"#,
            path_data(&segs)
        );
        semantic.push(l.key.clone());
    }

    svg.push_str("</g>\n</svg>\n");
    Ok(Overlay {
        svg,
        vectors,
        sign_visible,
        semantic,
    })
}
