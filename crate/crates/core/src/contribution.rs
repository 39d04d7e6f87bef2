//! Accumulation of the per-(label, Gaussian) contribution matrix.
//!
//! For every masked pixel the compositing walk is replayed and each
//! Gaussian's `α_i·T_i` is added to `A[label][i]`. Tiles are processed in
//! parallel into private sparse partials which are then folded into an `f64`
//! accumulator in tile order, so the result does not depend on scheduling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mask::LabelMask;
use crate::par;
use crate::raster::{bin_gaussians_to_tiles, tile_bounds, walk_pixel, RenderConfig, ViewSplats};
use crate::scene::{pixel_center, CameraView, GaussianScene};

/// A posed view and its label mask, if it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedView {
    pub view: CameraView,
    pub mask: Option<LabelMask>,
}

impl MaskedView {
    pub fn new(view: CameraView, mask: Option<LabelMask>) -> Self {
        Self { view, mask }
    }
}

/// Dense `E × N` matrix of accumulated blending weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionMatrix {
    pub num_objects: usize,
    pub num_gaussians: usize,
    pub values: Vec<f32>,
}

impl ContributionMatrix {
    pub fn zeros(num_objects: usize, num_gaussians: usize) -> Self {
        Self {
            num_objects,
            num_gaussians,
            values: vec![0.0; num_objects * num_gaussians],
        }
    }

    pub fn from_values(num_objects: usize, num_gaussians: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != num_objects * num_gaussians {
            return Err(Error::input(alloc::format!(
                "{} values for a {num_objects}x{num_gaussians} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::input(alloc::format!(
                "entry {i} is {} (must be finite and non-negative)",
                values[i]
            )));
        }
        Ok(Self {
            num_objects,
            num_gaussians,
            values,
        })
    }

    /// Builds a matrix from rows, one per object.
    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows have different lengths"));
        }
        Self::from_values(rows.len(), n, rows.concat())
    }

    #[inline]
    pub fn get(&self, object: usize, gaussian: usize) -> f32 {
        self.values[object * self.num_gaussians + gaussian]
    }

    pub fn row(&self, object: usize) -> &[f32] {
        &self.values[object * self.num_gaussians..(object + 1) * self.num_gaussians]
    }

    /// `Σ_e A[e][i]` in `f64`.
    #[inline]
    pub fn column_sum(&self, gaussian: usize) -> f64 {
        (0..self.num_objects).map(|e| self.get(e, gaussian) as f64).sum()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0f64; self.num_gaussians];
        for e in 0..self.num_objects {
            for (s, v) in sums.iter_mut().zip(self.row(e)) {
                *s += *v as f64;
            }
        }
        sums
    }

    /// Whether Gaussian `i` received any weight.
    pub fn observed(&self, gaussian: usize) -> bool {
        self.column_sum(gaussian) > 0.0
    }

    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            num_objects: self.num_objects,
            num_gaussians: self.num_gaussians,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Element-wise sum; shapes must match.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.num_objects != other.num_objects || self.num_gaussians != other.num_gaussians {
            return Err(Error::input("matrix shapes differ"));
        }
        Ok(Self {
            num_objects: self.num_objects,
            num_gaussians: self.num_gaussians,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Accumulates `A` with the default render cutoffs.
pub fn accumulate_contributions(scene: &GaussianScene, views: &[MaskedView], num_objects: usize) -> Result<ContributionMatrix> {
    accumulate_contributions_with(scene, views, num_objects, RenderConfig::default())
}

pub fn accumulate_contributions_with(
    scene: &GaussianScene,
    views: &[MaskedView],
    num_objects: usize,
    cfg: RenderConfig,
) -> Result<ContributionMatrix> {
    if num_objects == 0 || num_objects > u16::MAX as usize + 1 {
        return Err(Error::input(alloc::format!("object count {num_objects} out of range")));
    }
    for mv in views {
        mv.view.validate()?;
        if let Some(mask) = &mv.mask {
            mask.validate(&mv.view, num_objects)?;
        }
    }
    let n = scene.len();
    let mut acc = vec![0.0f64; num_objects * n];
    for mv in views {
        let Some(mask) = &mv.mask else { continue };
        for (gaussian, label, w) in accumulate_view(scene, &mv.view, mask, cfg) {
            acc[label as usize * n + gaussian as usize] += w;
        }
    }
    Ok(ContributionMatrix {
        num_objects,
        num_gaussians: n,
        values: acc.into_iter().map(|v| v as f32).collect(),
    })
}

/// Sparse `(gaussian, label, weight)` triples of one view, in tile order.
fn accumulate_view(scene: &GaussianScene, view: &CameraView, mask: &LabelMask, cfg: RenderConfig) -> Vec<(u32, u16, f64)> {
    let splats = ViewSplats::project(scene, view);
    let binning = bin_gaussians_to_tiles(&splats.splats, view);
    let partials = par::map_indexed(binning.num_tiles(), |t| {
        let list = binning.tile(t);
        if list.is_empty() {
            return Vec::new();
        }
        let (x0, y0, x1, y1) = tile_bounds(view, binning.tiles_x, t);
        let mut labels: Vec<u16> = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let l = mask.get(x, y);
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
        }
        labels.sort_unstable();
        let k = labels.len();
        // local[pos * k + row]: weight of list[pos] under labels[row]
        let mut local = vec![0.0f64; list.len() * k];
        for y in y0..=y1 {
            for x in x0..=x1 {
                let row = labels.binary_search(&mask.get(x, y)).unwrap_or_else(|_| unreachable!());
                walk_pixel(&splats.splats, list.iter().copied(), pixel_center(x, y), cfg, |pos, _, w| {
                    local[pos * k + row] += w;
                });
            }
        }
        let mut out = Vec::new();
        for (pos, &slot) in list.iter().enumerate() {
            let g = splats.splats[slot as usize].gaussian_index as u32;
            for (row, &label) in labels.iter().enumerate() {
                let w = local[pos * k + row];
                if w > 0.0 {
                    out.push((g, label, w));
                }
            }
        }
        out
    });
    partials.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{render_naive, Channel};
    use crate::scene::Gaussian;

    fn view() -> CameraView {
        CameraView::new(0, 24, 20, 30.0, 30.0, 12.0, 10.0)
    }

    #[test]
    fn single_gaussian_all_foreground_sums_weights() {
        let scene = GaussianScene::new(vec![Gaussian::isotropic([0.02, -0.01, 2.0], 0.2, 0.7).unwrap()], "");
        let v = view();
        let mask = LabelMask::filled(0, 24, 20, 1);
        let a = accumulate_contributions_with(&scene, &[MaskedView::new(v.clone(), Some(mask))], 2, RenderConfig::exact()).unwrap();
        // Oracle: sum of the naive renderer's per-pixel α·T.
        let naive = render_naive(&scene, &v, Channel::Scalar(&[1.0]), RenderConfig::exact()).unwrap();
        let expect: f64 = naive.value.iter().sum();
        assert!(expect > 1.0);
        assert!((a.get(1, 0) as f64 - expect).abs() < 1e-4 * expect);
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn background_mask_fills_row_zero() {
        let scene = GaussianScene::new(
            vec![
                Gaussian::isotropic([0.0, 0.0, 2.0], 0.2, 0.7).unwrap(),
                Gaussian::isotropic([0.1, 0.0, 3.0], 0.2, 0.7).unwrap(),
            ],
            "",
        );
        let mv = MaskedView::new(view(), Some(LabelMask::filled(0, 24, 20, 0)));
        let a = accumulate_contributions(&scene, &[mv], 3).unwrap();
        assert!(a.row(0).iter().all(|&v| v > 0.0));
        assert!(a.row(1).iter().chain(a.row(2)).all(|&v| v == 0.0));
    }

    #[test]
    fn unmasked_view_contributes_nothing() {
        let scene = GaussianScene::new(vec![Gaussian::isotropic([0.0, 0.0, 2.0], 0.2, 0.7).unwrap()], "");
        let a = accumulate_contributions(&scene, &[MaskedView::new(view(), None)], 2).unwrap();
        assert!(a.values.iter().all(|&v| v == 0.0));
        assert!(!a.observed(0));
    }

    #[test]
    fn errors_name_the_problem() {
        let scene = GaussianScene::new(vec![Gaussian::isotropic([0.0, 0.0, 2.0], 0.2, 0.7).unwrap()], "");
        let mut mask = LabelMask::filled(0, 24, 20, 0);
        mask.set(3, 4, 2);
        let err = accumulate_contributions(&scene, &[MaskedView::new(view(), Some(mask))], 2).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { x: 3, y: 4, label: 2, .. }));
        let wrong = LabelMask::filled(0, 10, 10, 0);
        let err = accumulate_contributions(&scene, &[MaskedView::new(view(), Some(wrong))], 2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn matrix_helpers() {
        let a = ContributionMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(a.column_sums(), vec![3.0, 0.0]);
        assert!(a.observed(0) && !a.observed(1));
        assert_eq!(a.scaled(2.0).get(1, 0), 4.0);
        assert!(ContributionMatrix::from_rows(&[vec![-1.0]]).is_err());
        assert!(ContributionMatrix::from_values(2, 2, vec![0.0; 3]).is_err());
    }
}
