mod common;

use common::*;
use gslift_core::mask_render::render_mask;
use gslift_core::{
    assign_scene, project_gaussian, render_binary_mask, render_scene_mask, render_subset_alpha_depth, Assignment,
    AssignmentMode, CameraView, ContributionMatrix, Gaussian, GaussianScene, RenderConfig,
};
use rand::Rng;

/// Pixels whose centre lies inside some member's projected 3σ ellipse.
fn footprint(scene: &GaussianScene, members: &[bool], view: &CameraView) -> Vec<bool> {
    let splats: Vec<_> = scene
        .gaussians
        .iter()
        .enumerate()
        .filter(|(i, _)| members[*i])
        .filter_map(|(i, g)| project_gaussian(i, g, view).ok())
        .collect();
    let mut out = vec![false; view.pixel_count()];
    for y in 0..view.height {
        for x in 0..view.width {
            let c = [x as f64 + 0.5, y as f64 + 0.5];
            out[(y * view.width + x) as usize] = splats.iter().any(|p| {
                let d = [c[0] - p.mean2d[0], c[1] - p.mean2d[1]];
                let [a, b, e] = p.inv_cov2d;
                a * d[0] * d[0] + 2.0 * b * d[0] * d[1] + e * d[1] * d[1] <= 9.0
            });
        }
    }
    out
}

#[test]
fn cluster_mask_matches_analytic_footprint() {
    let (scene, left) = surfel_spheres(1500, 0.35, 0.01);
    let a = Assignment::binary_from_labels(&left, 0.0);
    for k in 0..6 {
        let view = ring_view(k, 128, 0.3 + k as f64 * 0.45, 0.2, 2.2);
        let m = render_binary_mask(&scene, &a, &view, 0.1).unwrap();
        let pred: Vec<bool> = m.labels.iter().map(|&l| l == 1).collect();
        let score = iou(&pred, &footprint(&scene, &left, &view));
        assert!(score >= 0.95, "view {k}: IoU {score}");
    }
}

#[test]
fn larger_tau_shrinks_mask() {
    let mut rng = rng(51);
    let scene = random_scene(&mut rng, 200, 0.7, (0.02, 0.2));
    let labels: Vec<bool> = (0..200).map(|_| rng.gen_bool(0.5)).collect();
    let a = Assignment::binary_from_labels(&labels, 0.0);
    let view = random_view(&mut rng, 0, 64, 64, 3.0);
    let taus = [0.01, 0.05, 0.1, 0.3, 0.6, 0.9, 0.99];
    let masks: Vec<Vec<u16>> = taus.iter().map(|&t| render_binary_mask(&scene, &a, &view, t).unwrap().labels).collect();
    for w in masks.windows(2) {
        assert!(w[1].iter().zip(&w[0]).all(|(hi, lo)| *hi <= *lo));
    }
    assert!(masks[0].iter().filter(|&&l| l == 1).count() > masks[6].iter().filter(|&&l| l == 1).count());
}

/// A faint object in front of an opaque one. Subset ρ ignores occlusion, so the
/// back object has the larger ρ everywhere; only depth picks the right label.
#[test]
fn depth_guidance_fixes_occlusion_holes() {
    let (mut scene, _) = surfel_spheres(1500, 0.4, 0.012);
    scene.gaussians.truncate(1500);
    for g in &mut scene.gaussians {
        g.center[0] += 0.55;
    }
    scene.gaussians.push(Gaussian::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.15, 0.15, 0.01], 0.5).unwrap());
    let n = scene.len();
    let mut membership = vec![0u8; 3 * n];
    for i in 0..n - 1 {
        membership[n + i] = 1;
    }
    membership[2 * n + n - 1] = 1;
    let a = Assignment::from_parts(AssignmentMode::Scene, 0.0, 3, n, membership).unwrap();
    let view = ring_view(0, 64, 0.0, 0.0, 3.0);

    let back = render_subset_alpha_depth(&scene, &view, &a.member_mask(1), RenderConfig::default()).unwrap();
    let front = render_subset_alpha_depth(&scene, &view, &a.member_mask(2), RenderConfig::default()).unwrap();
    let truth: Vec<u16> = (0..view.pixel_count())
        .map(|p| if front.alpha[p] > 0.1 { 2 } else if back.alpha[p] > 0.1 { 1 } else { 0 })
        .collect();
    let argmax: Vec<u16> = (0..view.pixel_count())
        .map(|p| {
            let (b, f) = (back.alpha[p], front.alpha[p]);
            if b.max(f) <= 0.1 { 0 } else if f > b { 2 } else { 1 }
        })
        .collect();
    let guided = render_scene_mask(&scene, &a, &view, 0.1).unwrap().labels;
    let wrong = |m: &[u16]| m.iter().zip(&truth).filter(|(x, y)| x != y).count();
    assert!(truth.iter().filter(|&&l| l == 2).count() > 50);
    assert!(wrong(&guided) < wrong(&argmax), "{} vs {}", wrong(&guided), wrong(&argmax));
    assert_eq!(wrong(&guided), 0);
}

#[test]
fn single_object_scene_matches_binary() {
    let mut rng = rng(52);
    for _ in 0..5 {
        let scene = random_scene(&mut rng, 150, 0.7, (0.02, 0.25));
        let values: Vec<f32> = (0..300).map(|_| rng.gen_range(0.0..1.0)).collect();
        let a = ContributionMatrix::from_values(2, 150, values).unwrap();
        let s = assign_scene(&a, 0.1).unwrap();
        let b = gslift_core::assign_binary(&a, 0.1).unwrap();
        let view = random_view(&mut rng, 0, 48, 48, 3.0);
        assert_eq!(
            render_mask(&scene, &s, &view, 0.1).unwrap().labels,
            render_mask(&scene, &b, &view, 0.1).unwrap().labels
        );
    }
}

#[test]
fn disjoint_clusters_get_their_own_labels() {
    let (scene, left) = surfel_spheres(800, 0.35, 0.012);
    let n = scene.len();
    let mut membership = vec![0u8; 3 * n];
    for (i, &l) in left.iter().enumerate() {
        membership[if l { n + i } else { 2 * n + i }] = 1;
    }
    let a = Assignment::from_parts(AssignmentMode::Scene, 0.0, 3, n, membership).unwrap();
    let view = ring_view(0, 96, 0.0, 0.0, 2.5);
    let m = render_scene_mask(&scene, &a, &view, 0.1).unwrap();
    // Left sphere projects left of centre.
    let count = |label: u16, left_half: bool| {
        (0..96 * 96).filter(|p| m.labels[*p] == label && ((p % 96) < 48) == left_half).count()
    };
    assert!(count(1, true) > 300 && count(2, false) > 300);
    assert_eq!(count(1, false) + count(2, true), 0);
}
