//! Lifting posed 2D label masks onto a 3D Gaussian splatting scene.
//!
//! The pipeline is:
//!
//! 1. [`projection`] turns each 3D Gaussian into a screen-space splat for a view.
//! 2. [`raster`] bins splats into 16×16 tiles and alpha-composites any
//!    per-Gaussian channel front to back.
//! 3. [`contribution`] reuses the same per-pixel walk to scatter every
//!    Gaussian's `α·T` weight into the row of the pixel's mask label.
//! 4. [`assign`] turns that matrix into a labeling with a single argmax per
//!    Gaussian, optionally biased towards background.
//! 5. [`mask_render`], [`prompt`] and [`edit`] consume the labeling.
//!
//! The crate is `no_std` + `alloc`. With the default `std` feature the tile
//! loops run on rayon; results are bit-identical either way.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod assign;
pub mod contribution;
pub mod edit;
pub mod error;
pub mod mask;
pub mod mask_render;
pub mod math;
pub mod metrics;
pub mod projection;
pub mod prompt;
pub mod raster;
pub mod scene;

mod par;

pub use assign::{assign_binary, assign_scene, brute_force_oracle, objective_value, Assignment, AssignmentMode};
pub use contribution::{accumulate_contributions, ContributionMatrix, MaskedView};
pub use edit::{extract_subset, remove_objects};
pub use error::{Error, Result};
pub use mask::LabelMask;
pub use mask_render::{render_binary_mask, render_scene_mask, RenderedMask, DEFAULT_TAU};
pub use projection::{evaluate_alpha, project_gaussian, Culled, ProjectedGaussian};
pub use prompt::{backproject_prompt, project_prompts_to_views, PointPrompt, PromptTarget};
pub use raster::{
    bin_gaussians_to_tiles, render_naive, render_property, render_subset_alpha_depth, Channel, RenderConfig,
    RenderOutput, TileBinning, ViewSplats,
};
pub use scene::{CameraView, Gaussian, GaussianScene};
