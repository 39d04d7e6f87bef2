//! Rendering an assignment back into 2D label masks for any view.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::assign::{Assignment, AssignmentMode};
use crate::error::{Error, Result};
use crate::raster::{render_subset_from_splats, RenderConfig, ViewSplats};
use crate::scene::{CameraView, GaussianScene};

/// Quantization threshold on accumulated alpha.
pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedMask {
    pub view_id: u32,
    pub width: u32,
    pub height: u32,
    /// Row-major object ids, 0 = background.
    pub labels: Vec<u16>,
    pub gamma: f64,
    pub tau: f64,
}

impl RenderedMask {
    pub fn labeled_pixels(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::input(format!("tau {tau} outside (0, 1)")));
    }
    Ok(())
}

fn check_scene(scene: &GaussianScene, assignment: &Assignment) -> Result<()> {
    if assignment.num_gaussians != scene.len() {
        return Err(Error::input(format!(
            "assignment covers {} Gaussians, scene has {}",
            assignment.num_gaussians,
            scene.len()
        )));
    }
    Ok(())
}

/// Label 1 where the foreground subset's ρ exceeds `tau`.
pub fn render_binary_mask(scene: &GaussianScene, assignment: &Assignment, view: &CameraView, tau: f64) -> Result<RenderedMask> {
    if assignment.mode != AssignmentMode::Binary {
        return Err(Error::contract("render_binary_mask needs a binary assignment"));
    }
    check_tau(tau)?;
    check_scene(scene, assignment)?;
    view.validate()?;
    let members = assignment.member_mask(1);
    let splats = ViewSplats::project(scene, view).retain_members(&members);
    let out = render_subset_from_splats(scene, &splats, RenderConfig::default());
    Ok(RenderedMask {
        view_id: view.view_id,
        width: view.width,
        height: view.height,
        labels: out.alpha.iter().map(|&rho| (rho > tau) as u16).collect(),
        gamma: assignment.gamma,
        tau,
    })
}

/// Per pixel, among objects whose subset ρ exceeds `tau`, the one with the
/// smallest blended depth; depth ties go to the smaller object id.
pub fn render_scene_mask(scene: &GaussianScene, assignment: &Assignment, view: &CameraView, tau: f64) -> Result<RenderedMask> {
    if assignment.mode != AssignmentMode::Scene {
        return Err(Error::contract("render_scene_mask needs a scene assignment"));
    }
    check_tau(tau)?;
    check_scene(scene, assignment)?;
    view.validate()?;
    let all = ViewSplats::project(scene, view);
    let n_px = view.pixel_count();
    let mut labels = vec![0u16; n_px];
    let mut best_depth = vec![f64::INFINITY; n_px];
    for object in 1..assignment.num_objects {
        let members = assignment.member_mask(object);
        if !members.iter().any(|&m| m) {
            continue;
        }
        let out = render_subset_from_splats(scene, &all.retain_members(&members), RenderConfig::default());
        for px in 0..n_px {
            if out.alpha[px] > tau && out.depth[px] < best_depth[px] {
                best_depth[px] = out.depth[px];
                labels[px] = object as u16;
            }
        }
    }
    Ok(RenderedMask {
        view_id: view.view_id,
        width: view.width,
        height: view.height,
        labels,
        gamma: assignment.gamma,
        tau,
    })
}

/// Dispatches on the assignment's mode.
pub fn render_mask(scene: &GaussianScene, assignment: &Assignment, view: &CameraView, tau: f64) -> Result<RenderedMask> {
    match assignment.mode {
        AssignmentMode::Binary => render_binary_mask(scene, assignment, view, tau),
        AssignmentMode::Scene => render_scene_mask(scene, assignment, view, tau),
    }
}
