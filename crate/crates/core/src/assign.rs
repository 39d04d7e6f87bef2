//! Closed-form label assignment from a contribution matrix.
//!
//! With `α` and `T` fixed by the reconstructed scene, the mean-absolute-error
//! objective between rendered labels and binary masks is
//! `C + Σ_i P_i (A[0][i] - A[1][i])`: each Gaussian can be decided on its own
//! by comparing two numbers. The background bias `γ` shifts that comparison
//! after L1-normalizing the column. Scene mode repeats the binary decision for
//! every object against the sum of all other rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::contribution::{ContributionMatrix, MaskedView};
use crate::error::{Error, Result};
use crate::par;
use crate::raster::{render_naive, Channel, RenderConfig};
use crate::scene::GaussianScene;

/// Columns whose total weight is below this are treated as unobserved.
pub const MIN_COLUMN_SUM: f64 = 1e-12;
/// Largest scene the exhaustive oracle will enumerate.
pub const ORACLE_MAX_GAUSSIANS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignmentMode {
    Binary,
    Scene,
}

impl AssignmentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignmentMode::Binary => "binary",
            AssignmentMode::Scene => "scene",
        }
    }
}

impl core::str::FromStr for AssignmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(AssignmentMode::Binary),
            "scene" => Ok(AssignmentMode::Scene),
            other => Err(Error::input(format!("unknown assignment mode `{other}`"))),
        }
    }
}

/// Per-Gaussian object membership.
///
/// Binary mode stores one 0/1 label per Gaussian. Scene mode stores an
/// `E × N` 0/1 grid whose row 0 is the complement of the union of the
/// object rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub mode: AssignmentMode,
    pub gamma: f64,
    pub num_objects: usize,
    pub num_gaussians: usize,
    membership: Vec<u8>,
}

impl Assignment {
    /// Rebuilds an assignment from its stored membership bytes.
    pub fn from_parts(mode: AssignmentMode, gamma: f64, num_objects: usize, num_gaussians: usize, membership: Vec<u8>) -> Result<Self> {
        let expected = match mode {
            AssignmentMode::Binary => {
                if num_objects != 2 {
                    return Err(Error::contract(format!("binary assignment with E = {num_objects}")));
                }
                num_gaussians
            }
            AssignmentMode::Scene => num_objects * num_gaussians,
        };
        if membership.len() != expected {
            return Err(Error::input(format!(
                "membership has {} bytes, expected {expected}",
                membership.len()
            )));
        }
        if membership.iter().any(|&b| b > 1) {
            return Err(Error::input("membership bytes must be 0 or 1"));
        }
        Ok(Self {
            mode,
            gamma,
            num_objects,
            num_gaussians,
            membership,
        })
    }

    /// Binary labels from a boolean foreground mask.
    pub fn binary_from_labels(labels: &[bool], gamma: f64) -> Self {
        Self {
            mode: AssignmentMode::Binary,
            gamma,
            num_objects: 2,
            num_gaussians: labels.len(),
            membership: labels.iter().map(|&b| b as u8).collect(),
        }
    }

    /// Stored bytes: `N` labels (binary) or `E` rows of `N` (scene).
    pub fn membership_bytes(&self) -> &[u8] {
        &self.membership
    }

    /// Binary-mode labels `P`. In scene mode, row 1.
    pub fn labels(&self) -> &[u8] {
        match self.mode {
            AssignmentMode::Binary => &self.membership,
            AssignmentMode::Scene => self.row(1),
        }
    }

    fn row(&self, object: usize) -> &[u8] {
        &self.membership[object * self.num_gaussians..(object + 1) * self.num_gaussians]
    }

    #[inline]
    pub fn is_member(&self, object: usize, gaussian: usize) -> bool {
        match self.mode {
            AssignmentMode::Binary => (self.membership[gaussian] == 1) == (object == 1),
            AssignmentMode::Scene => self.membership[object * self.num_gaussians + gaussian] == 1,
        }
    }

    pub fn member_mask(&self, object: usize) -> Vec<bool> {
        (0..self.num_gaussians).map(|i| self.is_member(object, i)).collect()
    }

    /// Members per object id, background included.
    pub fn member_counts(&self) -> Vec<usize> {
        (0..self.num_objects)
            .map(|e| (0..self.num_gaussians).filter(|&i| self.is_member(e, i)).count())
            .collect()
    }

    /// Gaussians belonging to some object other than background.
    pub fn foreground_mask(&self) -> Vec<bool> {
        match self.mode {
            AssignmentMode::Binary => self.membership.iter().map(|&b| b == 1).collect(),
            AssignmentMode::Scene => self.row(0).iter().map(|&b| b == 0).collect(),
        }
    }

    pub fn check_object(&self, object: usize) -> Result<()> {
        if object >= self.num_objects {
            return Err(Error::input(format!(
                "unknown object id {object} (assignment has {} objects)",
                self.num_objects
            )));
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&gamma) {
        return Err(Error::input(format!("gamma {gamma} outside [-1, 1]")));
    }
    Ok(())
}

/// Decision for one (object, rest) pair: normalize, bias the rest by `gamma`,
/// and claim only on a strict win. Ties and unobserved columns go to background.
#[inline]
fn claims(object: f64, rest: f64, total: f64, gamma: f64) -> bool {
    if !(total >= MIN_COLUMN_SUM) {
        return false;
    }
    object / total > rest / total + gamma
}

const COLUMN_CHUNK: usize = 1 << 14;

/// Binary labels `P_i` from a two-row matrix.
pub fn assign_binary(a: &ContributionMatrix, gamma: f64) -> Result<Assignment> {
    if a.num_objects != 2 {
        return Err(Error::contract(format!("binary assignment needs E = 2, got {}", a.num_objects)));
    }
    check_gamma(gamma)?;
    let n = a.num_gaussians;
    let (bg, fg) = (a.row(0), a.row(1));
    let chunks = par::map_indexed(n.div_ceil(COLUMN_CHUNK), |c| {
        let range = c * COLUMN_CHUNK..((c + 1) * COLUMN_CHUNK).min(n);
        range
            .map(|i| {
                // Same arithmetic as the scene path so E = 2 agrees bit for bit.
                let total = bg[i] as f64 + fg[i] as f64;
                let own = fg[i] as f64;
                claims(own, total - own, total, gamma) as u8
            })
            .collect::<Vec<u8>>()
    });
    Ok(Assignment {
        mode: AssignmentMode::Binary,
        gamma,
        num_objects: 2,
        num_gaussians: n,
        membership: chunks.concat(),
    })
}

/// Every object row against the sum of all other rows, in one pass over `A`.
pub fn assign_scene(a: &ContributionMatrix, gamma: f64) -> Result<Assignment> {
    let e = a.num_objects;
    if e < 2 {
        return Err(Error::contract(format!("scene assignment needs E >= 2, got {e}")));
    }
    check_gamma(gamma)?;
    let n = a.num_gaussians;
    let chunks = par::map_indexed(n.div_ceil(COLUMN_CHUNK), |c| {
        let start = c * COLUMN_CHUNK;
        let end = ((c + 1) * COLUMN_CHUNK).min(n);
        let width = end - start;
        let mut sums = vec![0.0f64; width];
        for obj in 0..e {
            for (s, v) in sums.iter_mut().zip(&a.row(obj)[start..end]) {
                *s += *v as f64;
            }
        }
        // rows[obj * width + k]
        let mut rows = vec![0u8; e * width];
        let mut any = vec![false; width];
        for obj in 1..e {
            let src = &a.row(obj)[start..end];
            let dst = &mut rows[obj * width..(obj + 1) * width];
            for k in 0..width {
                let own = src[k] as f64;
                let hit = claims(own, sums[k] - own, sums[k], gamma);
                dst[k] = hit as u8;
                any[k] |= hit;
            }
        }
        for k in 0..width {
            rows[k] = (!any[k]) as u8;
        }
        rows
    });
    let mut membership = vec![0u8; e * n];
    for (c, rows) in chunks.iter().enumerate() {
        let start = c * COLUMN_CHUNK;
        let width = rows.len() / e;
        for obj in 0..e {
            membership[obj * n + start..obj * n + start + width].copy_from_slice(&rows[obj * width..(obj + 1) * width]);
        }
    }
    Ok(Assignment {
        mode: AssignmentMode::Scene,
        gamma,
        num_objects: e,
        num_gaussians: n,
        membership,
    })
}

fn check_binary_masks(views: &[MaskedView]) -> Result<()> {
    for mv in views {
        mv.view.validate()?;
        if let Some(mask) = &mv.mask {
            mask.validate(&mv.view, 2)?;
        }
    }
    Ok(())
}

/// `Σ_views Σ_pixels |render(P) - M|` over masked views, rendered with the
/// naive renderer and no throughput cutoffs.
pub fn objective_value(scene: &GaussianScene, views: &[MaskedView], labels: &[u8]) -> Result<f64> {
    if labels.len() != scene.len() {
        return Err(Error::input(format!(
            "{} labels for {} Gaussians",
            labels.len(),
            scene.len()
        )));
    }
    check_binary_masks(views)?;
    let channel: Vec<f64> = labels.iter().map(|&p| p as f64).collect();
    let mut total = 0.0;
    for mv in views {
        let Some(mask) = &mv.mask else { continue };
        let out = render_naive(scene, &mv.view, Channel::Scalar(&channel), RenderConfig::exact())?;
        total += out
            .value
            .iter()
            .zip(&mask.labels)
            .map(|(r, &m)| (r - m as f64).abs())
            .sum::<f64>();
    }
    Ok(total)
}

/// Exhaustive minimizer of [`objective_value`] over all `2^N` labelings.
///
/// Per-pixel weights are taken from the naive renderer one unit channel at a
/// time, labelings are visited in Gray-code order so each step flips one
/// Gaussian, and the winner is rescored with [`objective_value`].
pub fn brute_force_oracle(scene: &GaussianScene, views: &[MaskedView]) -> Result<(Vec<u8>, f64)> {
    let n = scene.len();
    if n > ORACLE_MAX_GAUSSIANS {
        return Err(Error::Refused(format!(
            "exhaustive search over {n} Gaussians exceeds the cap of {ORACLE_MAX_GAUSSIANS}"
        )));
    }
    check_binary_masks(views)?;
    // Flattened masked pixels: target value and current rendered value.
    let mut target: Vec<f64> = Vec::new();
    // touches[i]: (pixel, weight) for Gaussian i
    let mut touches: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut unit = vec![0.0f64; n];
    for mv in views {
        let Some(mask) = &mv.mask else { continue };
        let base = target.len();
        target.extend(mask.labels.iter().map(|&m| m as f64));
        for i in 0..n {
            unit[i] = 1.0;
            let out = render_naive(scene, &mv.view, Channel::Scalar(&unit), RenderConfig::exact())?;
            unit[i] = 0.0;
            touches[i].extend(
                out.value
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != 0.0)
                    .map(|(px, w)| (base + px, *w)),
            );
        }
    }
    let mut rendered = vec![0.0f64; target.len()];
    let mut current: f64 = target.iter().map(|m| m.abs()).sum();
    let mut labels = vec![0u8; n];
    let mut best = (labels.clone(), current);
    for step in 1u64..(1u64 << n) {
        let flip = step.trailing_zeros() as usize;
        let sign = if labels[flip] == 0 { 1.0 } else { -1.0 };
        labels[flip] ^= 1;
        for &(px, w) in &touches[flip] {
            let before = (rendered[px] - target[px]).abs();
            rendered[px] += sign * w;
            current += (rendered[px] - target[px]).abs() - before;
        }
        if current < best.1 {
            best = (labels.clone(), current);
        }
    }
    let value = objective_value(scene, views, &best.0)?;
    Ok((best.0, value))
}
