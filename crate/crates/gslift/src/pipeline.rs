//! File-to-file pipeline stages shared by the command line, service and tests.

use std::path::{Path, PathBuf};

use gslift_core::mask_render::render_mask;
use gslift_core::metrics::{mean_scores, score_masks, MaskScore};
use gslift_core::{
    accumulate_contributions, assign_binary, assign_scene, remove_objects, Assignment, AssignmentMode, CameraView,
    ContributionMatrix, GaussianScene,
};

use crate::cameras::CameraSet;
use crate::error::{Error, Result};
use crate::masks::{list_mask_dir, load_masked_views, read_label_png, write_label_png};

/// Loads masks and accumulates `A` over every view that has one.
pub fn accumulate(scene: &GaussianScene, cameras: &CameraSet, masks_dir: Option<&Path>, num_objects: usize) -> Result<ContributionMatrix> {
    let views = load_masked_views(cameras, masks_dir)?;
    if !views.iter().any(|v| v.mask.is_some()) {
        return Err(gslift_core::Error::Input("no view has a mask".into()).into());
    }
    Ok(accumulate_contributions(scene, &views, num_objects)?)
}

pub fn assign(a: &ContributionMatrix, gamma: f64, mode: AssignmentMode) -> Result<Assignment> {
    Ok(match mode {
        AssignmentMode::Binary => assign_binary(a, gamma)?,
        AssignmentMode::Scene => assign_scene(a, gamma)?,
    })
}

/// Views with the given ids, in the order given; all views when `ids` is empty.
pub fn select_views<'a>(cameras: &'a CameraSet, ids: &[u32]) -> Result<Vec<&'a CameraView>> {
    if ids.is_empty() {
        return Ok(cameras.views.iter().collect());
    }
    ids.iter()
        .map(|&id| {
            cameras
                .view(id)
                .ok_or_else(|| gslift_core::Error::Lookup(format!("no view with id {id}")).into())
        })
        .collect()
}

/// Renders and writes `{dir}/{view_id}.png` per view; returns the labeled pixel count per view.
pub fn render_masks(
    scene: &GaussianScene,
    assignment: &Assignment,
    views: &[&CameraView],
    tau: f64,
    dir: &Path,
) -> Result<Vec<(u32, usize)>> {
    views
        .iter()
        .map(|view| {
            let m = render_mask(scene, assignment, view, tau)?;
            write_label_png(&dir.join(format!("{}.png", view.view_id)), m.width, m.height, &m.labels)?;
            Ok((view.view_id, m.labeled_pixels()))
        })
        .collect()
}

pub fn remove(scene: &GaussianScene, assignment: &Assignment, object_ids: &[usize]) -> Result<GaussianScene> {
    Ok(remove_objects(scene, assignment, object_ids)?.0)
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub per_view: Vec<(u32, MaskScore)>,
    /// Percent.
    pub miou: f64,
    /// Percent.
    pub macc: f64,
}

impl EvalReport {
    pub fn table(&self) -> String {
        let mut s = String::from("view      IoU      Acc\n");
        for (id, score) in &self.per_view {
            s += &format!("{id:>4} {:>8.2} {:>8.2}\n", 100.0 * score.iou, 100.0 * score.accuracy);
        }
        s += &format!("mIoU {:.2}\nmAcc {:.2}\n", self.miou, self.macc);
        s
    }
}

/// Scores every prediction in `pred_dir` against the file of the same name in `gt_dir`.
pub fn evaluate(pred_dir: &Path, gt_dir: &Path) -> Result<EvalReport> {
    let preds = list_mask_dir(pred_dir)?;
    if preds.is_empty() {
        return Err(Error::format(pred_dir, "no {view_id}.png masks found"));
    }
    let mut per_view = Vec::with_capacity(preds.len());
    for (id, pred_path) in preds {
        let gt_path: PathBuf = gt_dir.join(format!("{id}.png"));
        let (pw, ph, pred) = read_label_png(&pred_path)?;
        let (gw, gh, gt) = read_label_png(&gt_path)?;
        if (pw, ph) != (gw, gh) {
            return Err(Error::data(&pred_path, format!("{pw}x{ph} prediction against {gw}x{gh} ground truth")));
        }
        per_view.push((id, score_masks(&pred, &gt)?));
    }
    let scores: Vec<MaskScore> = per_view.iter().map(|p| p.1).collect();
    let (miou, macc) = mean_scores(&scores);
    Ok(EvalReport { per_view, miou, macc })
}
