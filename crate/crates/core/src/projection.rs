//! Projection of 3D Gaussians to screen-space splats.

use crate::math::{self, Sym2};
use crate::scene::{CameraView, Gaussian};

/// Added to the diagonal of every screen-space covariance, in px².
pub const COV2D_DILATION: f64 = 0.3;
/// Upper clamp on per-splat alpha.
pub const ALPHA_MAX: f64 = 0.99;
/// Alphas below this are skipped by the compositing walk (when enabled).
pub const ALPHA_MIN: f64 = 1.0 / 255.0;
/// Screen-space covariances with a determinant at or below this are dropped.
pub const MIN_COV_DET: f64 = 1e-12;
/// Footprint half-extent in standard deviations.
pub const EXTENT_SIGMAS: f64 = 3.0;

/// Inclusive pixel rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Whether the rect shares a pixel with `[x0, x1] × [y0, y1]`.
    #[inline]
    pub fn intersects(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> bool {
        self.x0 <= x1 && x0 <= self.x1 && self.y0 <= y1 && y0 <= self.y1
    }
}

/// A Gaussian as seen by one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGaussian {
    pub gaussian_index: usize,
    pub mean2d: [f64; 2],
    /// Dilated screen-space covariance.
    pub cov2d: Sym2,
    /// Inverse of `cov2d` (the conic).
    pub inv_cov2d: Sym2,
    /// Camera-space z of the centre.
    pub depth: f64,
    /// `ceil(3·sqrt(λ_max(cov2d)))`, in pixels.
    pub radius: u32,
    /// Pixels whose centres lie inside the `radius` box, clipped to the image.
    /// Alpha is zero outside it.
    pub rect: PixelRect,
    pub opacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Culled {
    /// Centre at or in front of the near plane.
    NearPlane,
    /// Footprint misses the image.
    OutsideImage,
    /// Screen-space covariance is not invertible.
    Degenerate,
}

/// Screen-space covariance `J·W·Σ·Wᵀ·Jᵀ` (without dilation) of a Gaussian
/// whose centre sits at camera-space `t`.
pub(crate) fn screen_covariance(g: &Gaussian, view: &CameraView, t: &[f64; 3]) -> Sym2 {
    let (x, y, z) = (t[0], t[1], t[2]);
    let iz = 1.0 / z;
    let j = [[view.fx * iz, 0.0, -view.fx * x * iz * iz], [0.0, view.fy * iz, -view.fy * y * iz * iz]];
    let w = view.rotation();
    // T = J·W, 2×3
    let mut tm = [[0.0; 3]; 2];
    for r in 0..2 {
        for c in 0..3 {
            tm[r][c] = j[r][0] * w[0][c] + j[r][1] * w[1][c] + j[r][2] * w[2][c];
        }
    }
    let sigma = g.covariance();
    let mut ts = [[0.0; 3]; 2];
    for r in 0..2 {
        for c in 0..3 {
            ts[r][c] = tm[r][0] * sigma[0][c] + tm[r][1] * sigma[1][c] + tm[r][2] * sigma[2][c];
        }
    }
    [math::dot(&ts[0], &tm[0]), math::dot(&ts[0], &tm[1]), math::dot(&ts[1], &tm[1])]
}

/// Projects Gaussian `index` into `view`.
pub fn project_gaussian(index: usize, g: &Gaussian, view: &CameraView) -> Result<ProjectedGaussian, Culled> {
    let t = view.to_camera(&g.center);
    if !(t[2] > view.near_clip) {
        return Err(Culled::NearPlane);
    }
    let mut cov = screen_covariance(g, view, &t);
    cov[0] += COV2D_DILATION;
    cov[2] += COV2D_DILATION;
    let inv = math::sym2_inverse(&cov, MIN_COV_DET).ok_or(Culled::Degenerate)?;
    let (lambda_max, _) = math::sym2_eigenvalues(&cov);
    let radius_f = math::ceil(EXTENT_SIGMAS * math::sqrt(lambda_max));
    let mean2d = view.project_camera_point(&t);
    if !radius_f.is_finite() || !mean2d[0].is_finite() || !mean2d[1].is_finite() {
        return Err(Culled::Degenerate);
    }
    // Pixel j is covered when |j + 0.5 - m| <= r.
    let lo_x = math::ceil(mean2d[0] - radius_f - 0.5);
    let hi_x = math::floor(mean2d[0] + radius_f - 0.5);
    let lo_y = math::ceil(mean2d[1] - radius_f - 0.5);
    let hi_y = math::floor(mean2d[1] + radius_f - 0.5);
    let (w, h) = (view.width as f64, view.height as f64);
    if hi_x < 0.0 || hi_y < 0.0 || lo_x > w - 1.0 || lo_y > h - 1.0 {
        return Err(Culled::OutsideImage);
    }
    let rect = PixelRect {
        x0: lo_x.max(0.0) as u32,
        y0: lo_y.max(0.0) as u32,
        x1: hi_x.min(w - 1.0) as u32,
        y1: hi_y.min(h - 1.0) as u32,
    };
    if rect.x0 > rect.x1 || rect.y0 > rect.y1 {
        return Err(Culled::OutsideImage);
    }
    Ok(ProjectedGaussian {
        gaussian_index: index,
        mean2d,
        cov2d: cov,
        inv_cov2d: inv,
        depth: t[2],
        radius: radius_f as u32,
        rect,
        opacity: g.opacity,
    })
}

/// `min(0.99, opacity · exp(-½ dᵀ Σ'⁻¹ d))` with `d = pixel - mean2d`; zero
/// when the pixel containing `pixel` lies outside the splat's footprint.
///
/// The 1/255 floor is applied by the compositing walk, not here.
#[inline]
pub fn evaluate_alpha(p: &ProjectedGaussian, pixel: [f64; 2], opacity: f64) -> f64 {
    if !(pixel[0] >= 0.0 && pixel[1] >= 0.0) {
        return 0.0;
    }
    let (px, py) = (math::floor(pixel[0]), math::floor(pixel[1]));
    if px > u32::MAX as f64 || py > u32::MAX as f64 || !p.rect.contains(px as u32, py as u32) {
        return 0.0;
    }
    let d = [pixel[0] - p.mean2d[0], pixel[1] - p.mean2d[1]];
    let power = -0.5 * math::sym2_quadratic(&p.inv_cov2d, d);
    let alpha = opacity * math::exp(power.min(0.0));
    alpha.min(ALPHA_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::pixel_center;

    fn view() -> CameraView {
        CameraView::new(0, 64, 48, 50.0, 55.0, 32.0, 24.0)
    }

    #[test]
    fn on_axis_projects_to_principal_point() {
        let g = Gaussian::isotropic([0.0, 0.0, 2.0], 0.1, 0.5).unwrap();
        let p = project_gaussian(7, &g, &view()).unwrap();
        assert_eq!(p.gaussian_index, 7);
        assert_eq!(p.mean2d, [32.0, 24.0]);
        assert_eq!(p.depth, 2.0);
        // Isotropic: fx²σ²/z² + 0.3 on x.
        assert!((p.cov2d[0] - (50.0f64 * 0.1 / 2.0).powi(2) - 0.3).abs() < 1e-12);
        assert!(p.cov2d[1].abs() < 1e-12);
        assert!((p.cov2d[2] - (55.0f64 * 0.1 / 2.0).powi(2) - 0.3).abs() < 1e-12);
        let expect_r = (3.0 * ((55.0f64 * 0.05).powi(2) + 0.3).sqrt()).ceil() as u32;
        assert_eq!(p.radius, expect_r);
    }

    #[test]
    fn behind_camera_is_culled() {
        for z in [0.0, -1.0, 0.005] {
            let g = Gaussian::isotropic([0.0, 0.0, z], 0.1, 0.5).unwrap();
            assert_eq!(project_gaussian(0, &g, &view()), Err(Culled::NearPlane));
        }
    }

    #[test]
    fn off_screen_is_culled() {
        let g = Gaussian::isotropic([10.0, 0.0, 2.0], 0.01, 0.5).unwrap();
        assert_eq!(project_gaussian(0, &g, &view()), Err(Culled::OutsideImage));
        let g = Gaussian::isotropic([0.0, -10.0, 2.0], 0.01, 0.5).unwrap();
        assert_eq!(project_gaussian(0, &g, &view()), Err(Culled::OutsideImage));
    }

    #[test]
    fn rect_matches_radius_box() {
        let g = Gaussian::isotropic([0.1, -0.05, 2.0], 0.05, 0.5).unwrap();
        let v = view();
        let p = project_gaussian(0, &g, &v).unwrap();
        let r = p.radius as f64;
        for y in 0..v.height {
            for x in 0..v.width {
                let c = pixel_center(x, y);
                let inside = (c[0] - p.mean2d[0]).abs() <= r && (c[1] - p.mean2d[1]).abs() <= r;
                assert_eq!(inside, p.rect.contains(x, y), "pixel {x},{y}");
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let g = Gaussian::isotropic([0.0, 0.0, 2.0], 0.2, 0.8).unwrap();
        let p = project_gaussian(0, &g, &view()).unwrap();
        assert_eq!(evaluate_alpha(&p, p.mean2d, 0.8), 0.8);
        assert_eq!(evaluate_alpha(&p, p.mean2d, 1.0), ALPHA_MAX);
        // Walk along x until dᵀΣ⁻¹d = 2 ln 2.
        let dx = (2.0 * core::f64::consts::LN_2 / p.inv_cov2d[0]).sqrt();
        let a = evaluate_alpha(&p, [p.mean2d[0] + dx, p.mean2d[1]], 1.0);
        assert!((a - 0.5).abs() < 1e-12, "{a}");
        // Outside the footprint.
        assert_eq!(evaluate_alpha(&p, [p.mean2d[0] + p.radius as f64 + 1.0, p.mean2d[1]], 1.0), 0.0);
    }
}
