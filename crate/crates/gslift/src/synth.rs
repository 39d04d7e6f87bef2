//! Seeded synthetic scenes with known object membership and ground-truth masks.

use std::path::Path;
use std::str::FromStr;

use gslift_core::scene::SH_C0;
use gslift_core::{render_scene_mask, Assignment, AssignmentMode, CameraView, Gaussian, GaussianScene, LabelMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cameras::{write_cameras, CameraRecord};
use crate::error::Result;
use crate::formats::write_assignment;
use crate::masks::write_label_png;
use crate::ply::export_ply;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Two opaque spheres of tangent surfels, one above the other.
    TwoCluster,
    /// Three blobs of random anisotropic Gaussians that overlap in most views.
    Random,
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two-cluster" => Ok(Preset::TwoCluster),
            "random" => Ok(Preset::Random),
            other => Err(format!("unknown preset '{other}' (two-cluster | random)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub gaussians: usize,
    pub views: u32,
    pub preset: Preset,
    pub size: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            gaussians: 2000,
            views: 12,
            preset: Preset::TwoCluster,
            size: 128,
        }
    }
}

pub struct SynthScene {
    pub scene: GaussianScene,
    pub views: Vec<CameraView>,
    /// Object count including background.
    pub num_objects: usize,
    /// Scene-mode membership the scene was built from.
    pub truth: Assignment,
    /// Ground truth for every view: the depth-guided render of `truth` at
    /// the default τ, i.e. what a perfect 2D segmenter sees in the rendered image.
    pub gt: Vec<LabelMask>,
}

impl SynthScene {
    /// Input masks are given for even view ids only; odd ids are held out.
    pub fn is_masked(view_id: u32) -> bool {
        view_id.is_multiple_of(2)
    }

    /// Writes `scene.ply`, `cameras.json`, `masks/`, `gt/` and `truth.assign`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        export_ply(&self.scene, &dir.join("scene.ply"))?;
        let mut records = Vec::new();
        for (view, gt) in self.views.iter().zip(&self.gt) {
            let id = view.view_id;
            write_label_png(&dir.join("gt").join(format!("{id}.png")), gt.width, gt.height, &gt.labels)?;
            let mask_path = if Self::is_masked(id) {
                write_label_png(&dir.join("masks").join(format!("{id}.png")), gt.width, gt.height, &gt.labels)?;
                Some(format!("masks/{id}.png"))
            } else {
                None
            };
            records.push(CameraRecord::from_view(view, mask_path));
        }
        write_cameras(&dir.join("cameras.json"), &records)?;
        write_assignment(&dir.join("truth.assign"), &self.truth)
    }
}

const SPHERE_RADIUS: f64 = 0.35;
const SPHERE_OFFSET: f64 = 0.5;
const CAMERA_DISTANCE: f64 = 3.0;

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return p.map(|v| v / n);
        }
    }
}

/// Rotation taking the local z axis onto `n`, as [w, x, y, z].
fn quat_z_to(n: [f64; 3]) -> [f64; 4] {
    if n[2] < -1.0 + 1e-9 {
        return [0.0, 1.0, 0.0, 0.0];
    }
    // z × n = (-n_y, n_x, 0), w = 1 + z·n
    [1.0 + n[2], -n[1], n[0], 0.0]
}

fn dc_for(rgb: [f64; 3]) -> [f64; 3] {
    rgb.map(|c| (c - 0.5) / SH_C0)
}

fn ring_cameras(count: u32, size: u32) -> Vec<CameraView> {
    let f = 1.1 * size as f64;
    let c = size as f64 / 2.0;
    (0..count)
        .map(|k| {
            let azimuth = std::f64::consts::TAU * k as f64 / count as f64;
            let elevation: f64 = [0.3, 0.0, -0.2][k as usize % 3];
            let eye = [
                CAMERA_DISTANCE * elevation.cos() * azimuth.sin(),
                CAMERA_DISTANCE * elevation.sin(),
                CAMERA_DISTANCE * elevation.cos() * azimuth.cos(),
            ];
            CameraView::new(k, size, size, f, f, c, c).look_at(eye, [0.0; 3], [0.0, 1.0, 0.0])
        })
        .collect()
}

pub fn sphere_centers() -> [[f64; 3]; 2] {
    [[0.0, SPHERE_OFFSET, 0.0], [0.0, -SPHERE_OFFSET, 0.0]]
}

/// Label of the nearest sphere hit by each pixel-centre ray. Rendered
/// silhouettes are about a pixel wider because of the screen-space dilation.
pub fn sphere_silhouettes(view: &CameraView) -> LabelMask {
    let origin = view.center();
    let r = view.rotation();
    let mut mask = LabelMask::filled(view.view_id, view.width, view.height, 0);
    for y in 0..view.height {
        for x in 0..view.width {
            let d_cam = [(x as f64 + 0.5 - view.cx) / view.fx, (y as f64 + 0.5 - view.cy) / view.fy, 1.0];
            let mut d = [0.0; 3];
            for k in 0..3 {
                d[k] = (0..3).map(|j| r[j][k] * d_cam[j]).sum();
            }
            let mut best = (f64::INFINITY, 0u16);
            for (label, c) in sphere_centers().iter().enumerate() {
                let oc = [origin[0] - c[0], origin[1] - c[1], origin[2] - c[2]];
                let a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                let b = 2.0 * (oc[0] * d[0] + oc[1] * d[1] + oc[2] * d[2]);
                let cc = oc[0] * oc[0] + oc[1] * oc[1] + oc[2] * oc[2] - SPHERE_RADIUS * SPHERE_RADIUS;
                let disc = b * b - 4.0 * a * cc;
                if disc >= 0.0 {
                    let t = (-b - disc.sqrt()) / (2.0 * a);
                    if t > 0.0 && t < best.0 {
                        best = (t, label as u16 + 1);
                    }
                }
            }
            mask.set(x, y, best.1);
        }
    }
    mask
}

fn two_cluster(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<SynthScene> {
    let per = [cfg.gaussians.div_ceil(2), cfg.gaussians / 2];
    let colors = [[0.85, 0.3, 0.25], [0.25, 0.4, 0.85]];
    let mut gaussians = Vec::with_capacity(cfg.gaussians);
    let mut object = Vec::with_capacity(cfg.gaussians);
    for (k, c) in sphere_centers().iter().enumerate() {
        let spacing = SPHERE_RADIUS * (4.0 * std::f64::consts::PI / per[k].max(1) as f64).sqrt();
        let sigma_t = 0.65 * spacing;
        for _ in 0..per[k] {
            let n = unit_vector(rng);
            let p = [c[0] + SPHERE_RADIUS * n[0], c[1] + SPHERE_RADIUS * n[1], c[2] + SPHERE_RADIUS * n[2]];
            let g = Gaussian::new(p, quat_z_to(n), [sigma_t, sigma_t, 0.1 * sigma_t], 0.9)?.with_color_dc(dc_for(colors[k]));
            gaussians.push(g);
            object.push(k + 1);
        }
    }
    let scene = GaussianScene::new(gaussians, "synth:two-cluster");
    let views = ring_cameras(cfg.views, cfg.size);
    let truth = membership(&object, 3)?;
    let gt = render_truth(&scene, &truth, &views)?;
    Ok(SynthScene {
        scene,
        views,
        num_objects: 3,
        truth,
        gt,
    })
}

fn render_truth(scene: &GaussianScene, truth: &Assignment, views: &[CameraView]) -> Result<Vec<LabelMask>> {
    views
        .iter()
        .map(|v| {
            let m = render_scene_mask(scene, truth, v, gslift_core::DEFAULT_TAU)?;
            Ok(LabelMask::new(v.view_id, v.width, v.height, m.labels)?)
        })
        .collect()
}

fn membership(object: &[usize], num_objects: usize) -> Result<Assignment> {
    let n = object.len();
    let mut bytes = vec![0u8; num_objects * n];
    for (i, &o) in object.iter().enumerate() {
        bytes[o * n + i] = 1;
    }
    Ok(Assignment::from_parts(AssignmentMode::Scene, 0.0, num_objects, n, bytes)?)
}

fn random_blobs(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<SynthScene> {
    const BLOBS: usize = 3;
    let centers: Vec<[f64; 3]> = (0..BLOBS).map(|_| unit_vector(rng).map(|v| v * 0.45)).collect();
    let colors: Vec<[f64; 3]> = (0..BLOBS).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let mut gaussians = Vec::with_capacity(cfg.gaussians);
    let mut object = Vec::with_capacity(cfg.gaussians);
    for i in 0..cfg.gaussians {
        let k = i % BLOBS;
        let r = 0.2 * rng.gen::<f64>().cbrt();
        let p = unit_vector(rng).map(|v| v * r);
        let center = [centers[k][0] + p[0], centers[k][1] + p[1], centers[k][2] + p[2]];
        let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let q = if q.iter().all(|v: &f64| v.abs() < 1e-3) { [1.0, 0.0, 0.0, 0.0] } else { q };
        let s = [rng.gen_range(0.01..0.05), rng.gen_range(0.01..0.05), rng.gen_range(0.01..0.05)];
        gaussians.push(Gaussian::new(center, q, s, rng.gen_range(0.3..0.95))?.with_color_dc(dc_for(colors[k])));
        object.push(k + 1);
    }
    let scene = GaussianScene::new(gaussians, "synth:random");
    let truth = membership(&object, BLOBS + 1)?;
    let f = 1.1 * cfg.size as f64;
    let c = cfg.size as f64 / 2.0;
    let views: Vec<CameraView> = (0..cfg.views)
        .map(|k| {
            let mut dir = unit_vector(rng);
            if dir[1].abs() > 0.9 {
                dir = [dir[0] + 0.5, 0.0, dir[2] + 0.5];
            }
            CameraView::new(k, cfg.size, cfg.size, f, f, c, c).look_at(dir.map(|v| v * CAMERA_DISTANCE), [0.0; 3], [0.0, 1.0, 0.0])
        })
        .collect();
    let gt = render_truth(&scene, &truth, &views)?;
    Ok(SynthScene {
        scene,
        views,
        num_objects: BLOBS + 1,
        truth,
        gt,
    })
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthScene> {
    if cfg.gaussians < 2 || cfg.views == 0 || cfg.size == 0 {
        return Err(gslift_core::Error::Input("synth needs at least 2 Gaussians, 1 view and a non-empty image".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.preset {
        Preset::TwoCluster => two_cluster(cfg, &mut rng),
        Preset::Random => random_blobs(cfg, &mut rng),
    }
}
