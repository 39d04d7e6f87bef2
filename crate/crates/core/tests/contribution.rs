mod common;

use common::*;
use gslift_core::contribution::accumulate_contributions_with;
use gslift_core::{
    accumulate_contributions, render_naive, Channel, ContributionMatrix, Gaussian, GaussianScene, LabelMask,
    MaskedView, RenderConfig,
};
use rand::seq::SliceRandom;

fn assert_close(a: &ContributionMatrix, b: &ContributionMatrix, tol: f64) {
    assert_eq!((a.num_objects, a.num_gaussians), (b.num_objects, b.num_gaussians));
    for (k, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
        assert!(((x - y) as f64).abs() <= tol, "entry {k}: {x} vs {y}");
    }
}

/// A[e][i] = Σ over pixels labeled e of the naive renderer's weight for Gaussian i,
/// with weights read off one unit channel at a time.
fn naive_matrix(scene: &GaussianScene, views: &[MaskedView], num_objects: usize, cfg: RenderConfig) -> Vec<f64> {
    let n = scene.len();
    let mut out = vec![0.0; num_objects * n];
    let mut unit = vec![0.0; n];
    for mv in views {
        let Some(mask) = &mv.mask else { continue };
        for i in 0..n {
            unit[i] = 1.0;
            let r = render_naive(scene, &mv.view, Channel::Scalar(&unit), cfg).unwrap();
            unit[i] = 0.0;
            for (w, &label) in r.value.iter().zip(&mask.labels) {
                out[label as usize * n + i] += w;
            }
        }
    }
    out
}

#[test]
fn matches_naive_per_pixel_scatter() {
    let mut rng = rng(31);
    for _ in 0..5 {
        let scene = random_scene(&mut rng, 25, 0.7, (0.03, 0.3));
        let views = random_masked_views(&mut rng, 3, 40, 4);
        for cfg in [RenderConfig::default(), RenderConfig::exact()] {
            let a = accumulate_contributions_with(&scene, &views, 4, cfg).unwrap();
            let oracle = naive_matrix(&scene, &views, 4, cfg);
            for (k, (x, y)) in a.values.iter().zip(&oracle).enumerate() {
                assert!((*x as f64 - y).abs() <= 1e-5 * (1.0 + y), "entry {k}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn single_gaussian_full_mask_row() {
    let scene = GaussianScene::new(vec![Gaussian::new([0.05, 0.02, 2.5], [0.9, 0.1, 0.3, 0.0], [0.3, 0.2, 0.1], 0.8).unwrap()], "");
    let view = ring_view(0, 48, 0.0, 0.0, 0.0).with_pose([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]);
    let views = [MaskedView::new(view.clone(), Some(LabelMask::filled(0, 48, 48, 1)))];
    let a = accumulate_contributions(&scene, &views, 2).unwrap();
    let naive = render_naive(&scene, &view, Channel::Scalar(&[1.0]), RenderConfig::default()).unwrap();
    let expect: f64 = naive.value.iter().sum();
    assert!(expect > 10.0);
    assert!((a.get(1, 0) as f64 - expect).abs() < 1e-5 * expect);
    assert_eq!(a.get(0, 0), 0.0);
}

#[test]
fn additive_over_views() {
    let mut rng = rng(32);
    let scene = random_scene(&mut rng, 60, 0.7, (0.03, 0.3));
    let views = random_masked_views(&mut rng, 5, 32, 3);
    let all = accumulate_contributions(&scene, &views, 3).unwrap();
    let first = accumulate_contributions(&scene, &views[..2], 3).unwrap();
    let rest = accumulate_contributions(&scene, &views[2..], 3).unwrap();
    assert_close(&all, &first.try_add(&rest).unwrap(), 1e-5);
}

#[test]
fn additive_over_mask_halves() {
    let mut rng = rng(33);
    let scene = random_scene(&mut rng, 60, 0.7, (0.03, 0.3));
    let mv = random_masked_views(&mut rng, 1, 40, 2).remove(0);
    let whole = accumulate_contributions(&scene, std::slice::from_ref(&mv), 3).unwrap();
    // Park the other half's pixels on spare label 2, then drop that row.
    let half = |left: bool| {
        let mut m = mv.mask.clone().unwrap();
        for y in 0..m.height {
            for x in 0..m.width {
                if (x < m.width / 2) != left {
                    m.set(x, y, 2);
                }
            }
        }
        let a = accumulate_contributions(&scene, &[MaskedView::new(mv.view.clone(), Some(m))], 3).unwrap();
        let mut rows: Vec<Vec<f32>> = (0..2).map(|e| a.row(e).to_vec()).collect();
        rows.push(vec![0.0; a.num_gaussians]);
        ContributionMatrix::from_rows(&rows).unwrap()
    };
    assert_close(&whole, &half(true).try_add(&half(false)).unwrap(), 1e-5);
}

#[test]
fn view_order_does_not_matter() {
    let mut rng = rng(34);
    let scene = random_scene(&mut rng, 80, 0.7, (0.03, 0.3));
    let mut views = random_masked_views(&mut rng, 6, 32, 4);
    let base = accumulate_contributions(&scene, &views, 4).unwrap();
    for _ in 0..3 {
        views.shuffle(&mut rng);
        assert_close(&base, &accumulate_contributions(&scene, &views, 4).unwrap(), 1e-5);
    }
}

#[test]
fn culled_everywhere_means_zero_column() {
    let mut rng = rng(35);
    let mut scene = random_scene(&mut rng, 30, 0.5, (0.03, 0.3));
    // Far outside every camera's frustum.
    scene.gaussians.push(Gaussian::isotropic([0.0, 500.0, 0.0], 0.1, 0.9).unwrap());
    let views = random_masked_views(&mut rng, 4, 32, 2);
    let a = accumulate_contributions(&scene, &views, 2).unwrap();
    assert!(!a.observed(30));
    assert!(a.row(0)[30] == 0.0 && a.row(1)[30] == 0.0);
}

#[test]
fn column_sums_bounded_by_masked_pixels() {
    let mut rng = rng(36);
    let scene = random_scene(&mut rng, 100, 0.5, (0.05, 0.4));
    let views = random_masked_views(&mut rng, 3, 32, 3);
    let a = accumulate_contributions(&scene, &views, 3).unwrap();
    let pixels = 3.0 * 32.0 * 32.0;
    let sums = a.column_sums();
    assert!(a.values.iter().all(|&v| v >= 0.0));
    assert!(sums.iter().all(|&s| s <= pixels));
    // Each pixel hands out at most 1 in total.
    assert!(sums.iter().sum::<f64>() <= pixels + 1e-3);
}

#[test]
fn deterministic_bits() {
    let mut rng = rng(37);
    let scene = random_scene(&mut rng, 150, 0.7, (0.03, 0.3));
    let views = random_masked_views(&mut rng, 3, 48, 3);
    assert_eq!(
        accumulate_contributions(&scene, &views, 3).unwrap(),
        accumulate_contributions(&scene, &views, 3).unwrap()
    );
}
