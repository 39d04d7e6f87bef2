#![allow(dead_code)]

use gslift_core::{CameraView, Gaussian, GaussianScene, LabelMask, MaskedView};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_quaternion(rng: &mut TestRng) -> [f64; 4] {
    loop {
        let q: [f64; 4] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return q.map(|v| v / n);
        }
    }
}

/// `n` random anisotropic Gaussians inside a ball of radius `extent` around the origin.
pub fn random_scene(rng: &mut TestRng, n: usize, extent: f64, scale: (f64, f64)) -> GaussianScene {
    let gaussians = (0..n)
        .map(|_| {
            let center = loop {
                let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break p.map(|v| v * extent);
                }
            };
            let s = [rng.gen_range(scale.0..scale.1), rng.gen_range(scale.0..scale.1), rng.gen_range(scale.0..scale.1)];
            Gaussian::new(center, random_quaternion(rng), s, rng.gen_range(0.05..1.0)).unwrap()
        })
        .collect();
    GaussianScene::new(gaussians, "random")
}

/// Camera at distance `dist` from the origin in a random direction, looking at it.
pub fn random_view(rng: &mut TestRng, id: u32, width: u32, height: u32, dist: f64) -> CameraView {
    let dir = loop {
        let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        // keep away from the up axis so look_at is well conditioned
        if n > 0.2 && n <= 1.0 && (p[1] / n).abs() < 0.9 {
            break p.map(|v| v / n);
        }
    };
    let f = 0.9 * width.max(height) as f64;
    CameraView::new(id, width, height, f, f * rng.gen_range(0.9..1.1), width as f64 / 2.0, height as f64 / 2.0)
        .look_at(dir.map(|v| v * dist), [0.0; 3], [0.0, 1.0, 0.0])
}

/// Uniformly random labels in `0..num_objects`, spatially blocky so masks look like regions.
pub fn random_mask(rng: &mut TestRng, view: &CameraView, num_objects: u16, block: u32) -> LabelMask {
    let bx = view.width.div_ceil(block);
    let by = view.height.div_ceil(block);
    let blocks: Vec<u16> = (0..bx * by).map(|_| rng.gen_range(0..num_objects)).collect();
    let mut m = LabelMask::filled(view.view_id, view.width, view.height, 0);
    for y in 0..view.height {
        for x in 0..view.width {
            m.set(x, y, blocks[((y / block) * bx + x / block) as usize]);
        }
    }
    m
}

pub fn random_masked_views(rng: &mut TestRng, count: u32, size: u32, num_objects: u16) -> Vec<MaskedView> {
    (0..count)
        .map(|id| {
            let v = random_view(rng, id, size, size, 3.0);
            let block = rng.gen_range(2..6);
            let m = random_mask(rng, &v, num_objects, block);
            MaskedView::new(v, Some(m))
        })
        .collect()
}

/// Fibonacci-sphere points.
pub fn sphere_points(n: usize, radius: f64, center: [f64; 3]) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let th = golden * i as f64;
            [center[0] + radius * r * th.cos(), center[1] + radius * y, center[2] + radius * r * th.sin()]
        })
        .collect()
}

/// Two disjoint opaque balls of small isotropic Gaussians, stacked vertically.
/// Returns the scene and, per Gaussian, whether it belongs to the upper ball.
pub fn two_balls(rng: &mut TestRng, per_ball: usize) -> (GaussianScene, Vec<bool>) {
    let mut gaussians = Vec::new();
    let mut upper = Vec::new();
    for (cy, is_upper) in [(0.6, true), (-0.6, false)] {
        for _ in 0..per_ball {
            let p = loop {
                let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break p;
                }
            };
            let c = [0.3 * p[0], cy + 0.3 * p[1], 0.3 * p[2]];
            gaussians.push(Gaussian::isotropic(c, 0.04, 0.9).unwrap());
            upper.push(is_upper);
        }
    }
    (GaussianScene::new(gaussians, "two-balls"), upper)
}

pub fn ring_view(id: u32, size: u32, azimuth: f64, elevation: f64, dist: f64) -> CameraView {
    let eye = [dist * elevation.cos() * azimuth.sin(), dist * elevation.sin(), dist * elevation.cos() * azimuth.cos()];
    let f = 1.1 * size as f64;
    CameraView::new(id, size, size, f, f, size as f64 / 2.0, size as f64 / 2.0).look_at(eye, [0.0; 3], [0.0, 1.0, 0.0])
}

/// Two opaque spheres of small surface Gaussians side by side along x.
/// Returns the scene and, per Gaussian, whether it belongs to the left sphere.
pub fn surfel_spheres(per_sphere: usize, radius: f64, sigma: f64) -> (GaussianScene, Vec<bool>) {
    let mut gaussians = Vec::new();
    let mut left = Vec::new();
    for (cx, is_left) in [(-0.55, true), (0.55, false)] {
        for p in sphere_points(per_sphere, radius, [cx, 0.0, 0.0]) {
            gaussians.push(Gaussian::isotropic(p, sigma, 0.95).unwrap());
            left.push(is_left);
        }
    }
    (GaussianScene::new(gaussians, "spheres"), left)
}

pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 { 1.0 } else { inter as f64 / union as f64 }
}
