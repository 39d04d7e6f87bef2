//! Camera list JSON: an array of posed pinhole views.

use std::path::{Path, PathBuf};

use gslift_core::CameraView;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub view_id: u32,
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major 4x4.
    pub world_to_camera: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
}

impl CameraRecord {
    pub fn from_view(view: &CameraView, mask_path: Option<String>) -> Self {
        Self {
            view_id: view.view_id,
            width: view.width,
            height: view.height,
            fx: view.fx,
            fy: view.fy,
            cx: view.cx,
            cy: view.cy,
            world_to_camera: view.world_to_camera.iter().flatten().copied().collect(),
            mask_path,
        }
    }

    pub fn to_view(&self) -> gslift_core::Result<CameraView> {
        if self.world_to_camera.len() != 16 {
            return Err(gslift_core::Error::Input(format!(
                "view {}: world_to_camera has {} numbers, expected 16",
                self.view_id,
                self.world_to_camera.len()
            )));
        }
        let mut m = [[0.0; 4]; 4];
        for (k, v) in self.world_to_camera.iter().enumerate() {
            m[k / 4][k % 4] = *v;
        }
        let view = CameraView::new(self.view_id, self.width, self.height, self.fx, self.fy, self.cx, self.cy).with_pose(m);
        view.validate()?;
        Ok(view)
    }
}

/// Parsed camera file. `mask_path`s are resolved against the file's directory.
#[derive(Debug, Clone)]
pub struct CameraSet {
    pub views: Vec<CameraView>,
    pub mask_paths: Vec<Option<PathBuf>>,
}

impl CameraSet {
    pub fn view(&self, view_id: u32) -> Option<&CameraView> {
        self.views.iter().find(|v| v.view_id == view_id)
    }
}

pub fn load_cameras(path: &Path) -> Result<CameraSet> {
    let bytes = error::read(path)?;
    let records: Vec<CameraRecord> =
        serde_json::from_slice(&bytes).map_err(|e| Error::format(path, format!("camera JSON: {e}")))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut views: Vec<CameraView> = Vec::with_capacity(records.len());
    let mut mask_paths = Vec::with_capacity(records.len());
    for r in &records {
        if views.iter().any(|v| v.view_id == r.view_id) {
            return Err(Error::data(path, format!("duplicate view_id {}", r.view_id)));
        }
        views.push(r.to_view().map_err(|e| Error::data(path, e.to_string()))?);
        mask_paths.push(r.mask_path.as_ref().map(|p| base.join(p)));
    }
    Ok(CameraSet { views, mask_paths })
}

pub fn write_cameras(path: &Path, records: &[CameraRecord]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(records).expect("camera records serialize");
    text.push('\n');
    error::write(path, text.as_bytes())
}

/// One pixel prompt as read from a prompt file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptRecord {
    pub view_id: u32,
    pub x: f64,
    pub y: f64,
}

pub fn load_prompts(path: &Path) -> Result<Vec<PromptRecord>> {
    let bytes = error::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, format!("prompt JSON: {e}")))
}
