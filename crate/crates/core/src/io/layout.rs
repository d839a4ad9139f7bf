use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{
    parse_clip, parse_labels, parse_prediction, write_clip, write_labels, write_prediction, Labels,
    ParseError, ValidationIssue,
};
use crate::model::{ClipData, FrameRef, LabeledRule, PredictionSet};

pub const DATA_FILE: &str = "data.json";
pub const LABEL_FILE: &str = "label.json";
pub const PREDICTION_FILE: &str = "prediction.json";
pub const FRAMES_DIR: &str = "frames";

#[derive(Debug, Error)]
pub enum DirError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {error}", path.display())]
    Invalid { path: PathBuf, error: ParseError },
}

impl DirError {
    pub fn is_io(&self) -> bool {
        matches!(self, DirError::Io { .. })
    }
}

/// Everything found in one clip directory.
#[derive(Debug, Clone)]
pub struct ClipBundle {
    pub id: String,
    pub dir: PathBuf,
    pub clip: ClipData,
    pub labels: Option<Labels>,
    pub prediction: Option<PredictionSet>,
    /// Warnings paired with the file they were raised in.
    pub warnings: Vec<(PathBuf, ValidationIssue)>,
}

fn read(path: &Path) -> Result<Vec<u8>, DirError> {
    fs::read(path).map_err(|source| DirError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads `data.json`, plus `label.json`, `prediction.json` and `frames/`
/// when present.
pub fn read_clip_dir(dir: &Path, strict: bool) -> Result<ClipBundle, DirError> {
    let mut warnings = Vec::new();
    let invalid = |path: &Path| {
        let path = path.to_owned();
        move |error| DirError::Invalid { path, error }
    };

    let data_path = dir.join(DATA_FILE);
    let parsed = parse_clip(&read(&data_path)?).map_err(invalid(&data_path))?;
    warnings.extend(parsed.warnings.into_iter().map(|w| (data_path.clone(), w)));
    let mut clip = parsed.value;
    clip.frames = read_frames(&dir.join(FRAMES_DIR))?;

    let label_path = dir.join(LABEL_FILE);
    let labels = if label_path.exists() {
        let parsed =
            parse_labels(&read(&label_path)?, &clip, strict).map_err(invalid(&label_path))?;
        warnings.extend(parsed.warnings.into_iter().map(|w| (label_path.clone(), w)));
        Some(parsed.value)
    } else {
        None
    };

    let pred_path = dir.join(PREDICTION_FILE);
    let prediction = if pred_path.exists() {
        let parsed = parse_prediction(&read(&pred_path)?).map_err(invalid(&pred_path))?;
        warnings.extend(parsed.warnings.into_iter().map(|w| (pred_path.clone(), w)));
        Some(parsed.value)
    } else {
        None
    };

    Ok(ClipBundle {
        id: clip_id(dir),
        dir: dir.to_owned(),
        clip,
        labels,
        prediction,
        warnings,
    })
}

fn clip_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn read_frames(dir: &Path) -> Result<Vec<FrameRef>, DirError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let entries = fs::read_dir(dir).map_err(|source| DirError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut frames = Vec::new();
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "jpg") {
            if let Some(stem) = path.file_stem() {
                frames.push(FrameRef {
                    timestamp: stem.to_string_lossy().into_owned(),
                    path: format!("{FRAMES_DIR}/{}", entry.file_name().to_string_lossy()),
                });
            }
        }
    }
    frames.sort_by(|a, b| a.timestamp.cmp(&b.timestamp));
    Ok(frames)
}

/// Clip directories under `root`, sorted by name. `root` itself counts as a
/// clip directory when it holds a data file.
pub fn list_clip_dirs(root: &Path) -> Result<Vec<PathBuf>, DirError> {
    if root.join(DATA_FILE).is_file() {
        return Ok(vec![root.to_owned()]);
    }
    let entries = fs::read_dir(root).map_err(|source| DirError::Io {
        path: root.to_owned(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.join(DATA_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Writes a clip directory, creating it if needed. Files for `None` inputs
/// are left untouched.
pub fn write_clip_dir(
    dir: &Path,
    clip: &ClipData,
    labels: Option<&[LabeledRule]>,
    prediction: Option<&PredictionSet>,
) -> Result<(), DirError> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| DirError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = vec![(DATA_FILE, write_clip(clip))];
    if let Some(labels) = labels {
        files.push((LABEL_FILE, write_labels(labels)));
    }
    if let Some(pred) = prediction {
        files.push((PREDICTION_FILE, write_prediction(pred)));
    }
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    Ok(())
}
