//! Point-prompt propagation between views.
//!
//! A clicked pixel is resolved to a Gaussian by casting its ray, keeping the
//! ten centres closest to the ray, and choosing the shallowest of them. The
//! centre of that Gaussian is then projected into other views so an external
//! mask generator receives prompts on the same object.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::scene::{CameraView, GaussianScene};

/// Candidates kept by ray distance before the depth test.
pub const PROMPT_CANDIDATES: usize = 10;
/// Candidates whose centre is within this many of their largest standard
/// deviation of the ray are preferred over the plain nearest ones.
pub const RAY_GATE_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PointPrompt {
    pub view_id: u32,
    pub pixel: [f64; 2],
    pub gaussian_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PromptTarget {
    Visible([f64; 2]),
    /// In front of the camera but outside the image.
    OutOfFrame([f64; 2]),
    BehindCamera,
}

/// Candidate for a prompt ray: perpendicular distance, depth, index, gate flag.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RayCandidate {
    pub distance: f64,
    pub depth: f64,
    pub index: usize,
    pub gated: bool,
}

/// Distances of every centre with positive depth to the prompt's ray.
pub(crate) fn ray_candidates(scene: &GaussianScene, view: &CameraView, pixel: [f64; 2]) -> Vec<RayCandidate> {
    let dir = {
        let d = [(pixel[0] - view.cx) / view.fx, (pixel[1] - view.cy) / view.fy, 1.0];
        math::scale(&d, 1.0 / math::norm(&d))
    };
    scene
        .gaussians
        .iter()
        .enumerate()
        .filter_map(|(index, g)| {
            let p = view.to_camera(&g.center);
            if !(p[2] > view.near_clip) {
                return None;
            }
            let along = math::dot(&p, &dir);
            let perp = math::sub(&p, &math::scale(&dir, along));
            let distance = math::norm(&perp);
            Some(RayCandidate {
                distance,
                depth: p[2],
                index,
                gated: distance <= RAY_GATE_SIGMAS * g.max_scale(),
            })
        })
        .collect()
}

/// Resolves a pixel prompt to the Gaussian it most likely landed on.
pub fn backproject_prompt(scene: &GaussianScene, view: &CameraView, pixel: [f64; 2]) -> Result<usize> {
    view.validate()?;
    if !view.contains(pixel) {
        return Err(Error::input(format!(
            "prompt ({}, {}) outside the {}x{} image of view {}",
            pixel[0], pixel[1], view.width, view.height, view.view_id
        )));
    }
    let mut candidates = ray_candidates(scene, view, pixel);
    if candidates.is_empty() {
        return Err(Error::Lookup(format!("no Gaussian lies in front of view {}", view.view_id)));
    }
    if candidates.iter().any(|c| c.gated) {
        candidates.retain(|c| c.gated);
    }
    let by_distance = |a: &RayCandidate, b: &RayCandidate| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index));
    let k = PROMPT_CANDIDATES.min(candidates.len());
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, by_distance);
        candidates.truncate(k);
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.depth.total_cmp(&b.depth).then(a.index.cmp(&b.index)))
        .map(|c| c.index)
        .unwrap_or_else(|| unreachable!());
    Ok(best)
}

/// Projects the centre of Gaussian `gaussian_index` into each view.
pub fn project_prompts_to_views(
    scene: &GaussianScene,
    gaussian_index: usize,
    views: &[CameraView],
) -> Result<Vec<(u32, PromptTarget)>> {
    let g = scene
        .gaussians
        .get(gaussian_index)
        .ok_or_else(|| Error::input(format!("Gaussian {gaussian_index} out of range")))?;
    Ok(views
        .iter()
        .map(|view| {
            let p = view.to_camera(&g.center);
            let target = if !(p[2] > view.near_clip) {
                PromptTarget::BehindCamera
            } else {
                let px = view.project_camera_point(&p);
                if view.contains(px) {
                    PromptTarget::Visible(px)
                } else {
                    PromptTarget::OutOfFrame(px)
                }
            };
            (view.view_id, target)
        })
        .collect())
}
