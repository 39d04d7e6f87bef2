//! Object extraction and removal.

use alloc::vec;
use alloc::vec::Vec;

use crate::assign::Assignment;
use crate::error::{Error, Result};
use crate::scene::GaussianScene;

fn union_mask(scene: &GaussianScene, assignment: &Assignment, object_ids: &[usize]) -> Result<Vec<bool>> {
    if assignment.num_gaussians != scene.len() {
        return Err(Error::input(alloc::format!(
            "assignment covers {} Gaussians, scene has {}",
            assignment.num_gaussians,
            scene.len()
        )));
    }
    for &id in object_ids {
        assignment.check_object(id)?;
    }
    let mut mask = vec![false; scene.len()];
    for &id in object_ids {
        for (i, m) in mask.iter_mut().enumerate() {
            *m |= assignment.is_member(id, i);
        }
    }
    Ok(mask)
}

fn select(scene: &GaussianScene, keep: impl Fn(usize) -> bool) -> (GaussianScene, Vec<usize>) {
    let kept: Vec<usize> = (0..scene.len()).filter(|&i| keep(i)).collect();
    let gaussians = kept.iter().map(|&i| scene.gaussians[i].clone()).collect();
    (GaussianScene::new(gaussians, scene.source_path.clone()), kept)
}

/// The union of the given objects' members, in original order, plus the
/// original index of every kept Gaussian.
pub fn extract_subset(scene: &GaussianScene, assignment: &Assignment, object_ids: &[usize]) -> Result<(GaussianScene, Vec<usize>)> {
    let mask = union_mask(scene, assignment, object_ids)?;
    Ok(select(scene, |i| mask[i]))
}

/// Everything except the given objects' members. Removed Gaussians are
/// deleted, not made transparent.
pub fn remove_objects(scene: &GaussianScene, assignment: &Assignment, object_ids: &[usize]) -> Result<(GaussianScene, Vec<usize>)> {
    let mask = union_mask(scene, assignment, object_ids)?;
    Ok(select(scene, |i| !mask[i]))
}
