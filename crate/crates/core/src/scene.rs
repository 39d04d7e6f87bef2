//! Gaussians, scenes and pinhole cameras.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, Mat3, Vec3};

/// Zeroth-order spherical harmonic basis constant.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;

/// Default near plane, in world units.
pub const DEFAULT_NEAR_CLIP: f64 = 0.01;

/// One anisotropic 3D Gaussian with activated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub center: Vec3,
    /// Unit quaternion `[w, x, y, z]`.
    pub rotation: [f64; 4],
    /// Per-axis standard deviations, strictly positive.
    pub scale: Vec3,
    /// In `[0, 1]`.
    pub opacity: f64,
    /// Raw degree-0 SH coefficients, used for previews only.
    pub color_dc: Option<Vec3>,
}

impl Gaussian {
    /// Builds a Gaussian, normalizing the quaternion and checking ranges.
    pub fn new(center: Vec3, rotation: [f64; 4], scale: Vec3, opacity: f64) -> Result<Self> {
        let qn = math::sqrt(rotation.iter().map(|v| v * v).sum());
        if !(qn > 0.0) || !qn.is_finite() {
            return Err(Error::input("quaternion has zero or non-finite norm"));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("center is not finite"));
        }
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::input(format!("scale {scale:?} must be finite and positive")));
        }
        if !(0.0..=1.0).contains(&opacity) {
            return Err(Error::input(format!("opacity {opacity} outside [0, 1]")));
        }
        Ok(Self {
            center,
            rotation: rotation.map(|v| v / qn),
            scale,
            opacity,
            color_dc: None,
        })
    }

    /// Isotropic Gaussian with identity rotation.
    pub fn isotropic(center: Vec3, sigma: f64, opacity: f64) -> Result<Self> {
        Self::new(center, [1.0, 0.0, 0.0, 0.0], [sigma; 3], opacity)
    }

    pub fn with_color_dc(mut self, color_dc: Vec3) -> Self {
        self.color_dc = Some(color_dc);
        self
    }

    pub fn rotation_matrix(&self) -> Mat3 {
        math::quat_to_mat(&self.rotation)
    }

    /// World-space covariance `R·diag(s)²·Rᵀ`.
    pub fn covariance(&self) -> Mat3 {
        math::covariance_3d(&self.rotation_matrix(), &self.scale)
    }

    pub fn max_scale(&self) -> f64 {
        self.scale[0].max(self.scale[1]).max(self.scale[2])
    }

    /// DC colour mapped to `[0, 1]` RGB; mid grey when no colour was loaded.
    pub fn preview_rgb(&self) -> Vec3 {
        match self.color_dc {
            Some(dc) => dc.map(|c| (0.5 + SH_C0 * c).clamp(0.0, 1.0)),
            None => [0.5; 3],
        }
    }
}

/// An ordered list of Gaussians; positions are the stable ids used by every
/// per-Gaussian buffer downstream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianScene {
    pub gaussians: Vec<Gaussian>,
    pub source_path: String,
}

impl GaussianScene {
    pub fn new(gaussians: Vec<Gaussian>, source_path: impl Into<String>) -> Self {
        Self {
            gaussians,
            source_path: source_path.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn opacities(&self) -> Vec<f64> {
        self.gaussians.iter().map(|g| g.opacity).collect()
    }
}

/// Undistorted pinhole camera. Camera space is x right, y down, z forward.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    pub view_id: u32,
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major rigid transform.
    pub world_to_camera: [[f64; 4]; 4],
    pub near_clip: f64,
}

impl CameraView {
    pub fn new(view_id: u32, width: u32, height: u32, fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        let mut world_to_camera = [[0.0; 4]; 4];
        for (i, row) in world_to_camera.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            view_id,
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            world_to_camera,
            near_clip: DEFAULT_NEAR_CLIP,
        }
    }

    pub fn with_pose(mut self, world_to_camera: [[f64; 4]; 4]) -> Self {
        self.world_to_camera = world_to_camera;
        self
    }

    /// Camera at `eye` looking at `target`; `up` is a world-space hint.
    pub fn look_at(mut self, eye: Vec3, target: Vec3, up: Vec3) -> Self {
        let forward = {
            let f = math::sub(&target, &eye);
            math::scale(&f, 1.0 / math::norm(&f))
        };
        // right × down = forward, with down opposite the up hint.
        let right = {
            let r = cross(&forward, &up);
            math::scale(&r, 1.0 / math::norm(&r))
        };
        let down = cross(&forward, &right);
        let rot = [right, down, forward];
        let t = math::scale(&math::mat3_vec(&rot, &eye), -1.0);
        let mut m = [[0.0; 4]; 4];
        for r in 0..3 {
            m[r][..3].copy_from_slice(&rot[r]);
            m[r][3] = t[r];
        }
        m[3][3] = 1.0;
        self.world_to_camera = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::input(format!("view {}: empty image size", self.view_id)));
        }
        if !(self.fx > 0.0) || !(self.fy > 0.0) {
            return Err(Error::input(format!("view {}: focal lengths must be positive", self.view_id)));
        }
        if !(self.near_clip > 0.0) {
            return Err(Error::input(format!("view {}: near clip must be positive", self.view_id)));
        }
        if self.world_to_camera.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("view {}: pose is not finite", self.view_id)));
        }
        let r = self.rotation();
        let rrt = math::mat3_mul(&r, &math::transpose(&r));
        for (i, row) in rrt.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > 1e-5 {
                    return Err(Error::input(format!(
                        "view {}: rotation block of world_to_camera is not orthonormal",
                        self.view_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rotation(&self) -> Mat3 {
        let m = &self.world_to_camera;
        [
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]
    }

    pub fn translation(&self) -> Vec3 {
        let m = &self.world_to_camera;
        [m[0][3], m[1][3], m[2][3]]
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let r = self.rotation();
        let t = self.translation();
        let q = math::mat3_vec(&r, p);
        [q[0] + t[0], q[1] + t[1], q[2] + t[2]]
    }

    /// World-space camera centre `-Rᵀ t`.
    pub fn center(&self) -> Vec3 {
        let rt = math::transpose(&self.rotation());
        math::scale(&math::mat3_vec(&rt, &self.translation()), -1.0)
    }

    /// Continuous image coordinates of a camera-space point with `z > 0`.
    /// Pixel `(j, k)` covers `[j, j+1) × [k, k+1)`, so its centre is `(j + 0.5, k + 0.5)`.
    pub fn project_camera_point(&self, p: &Vec3) -> [f64; 2] {
        [self.fx * p[0] / p[2] + self.cx, self.fy * p[1] / p[2] + self.cy]
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, pixel: [f64; 2]) -> bool {
        pixel[0] >= 0.0 && pixel[1] >= 0.0 && pixel[0] < self.width as f64 && pixel[1] < self.height as f64
    }
}

pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Centre of pixel `(x, y)` in continuous image coordinates.
#[inline]
pub fn pixel_center(x: u32, y: u32) -> [f64; 2] {
    [x as f64 + 0.5, y as f64 + 0.5]
}
