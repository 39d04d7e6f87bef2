use std::path::Path;

use gslift::ply::{encode_scene_ply, export_ply, load_scene_ply, parse_scene_ply};
use gslift::Error;
use gslift_core::Gaussian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STANDARD: [&str; 17] = [
    "x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3",
];

/// Minimal writer: float properties only, one row per vertex.
fn ply(props: &[&str], rows: &[Vec<f32>]) -> Vec<u8> {
    let mut out = format!("ply\nformat binary_little_endian 1.0\ncomment made by hand\nelement vertex {}\n", rows.len());
    for p in props {
        out += &format!("property float {p}\n");
    }
    out += "end_header\n";
    let mut bytes = out.into_bytes();
    for r in rows {
        assert_eq!(r.len(), props.len());
        r.iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes()));
    }
    bytes
}

fn parse(bytes: &[u8]) -> gslift::Result<gslift_core::GaussianScene> {
    parse_scene_ply(Path::new("mem.ply"), bytes)
}

#[test]
fn activations() {
    let row = vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
    let s = parse(&ply(&STANDARD, &[row])).unwrap();
    let g = &s.gaussians[0];
    assert_eq!(g.opacity, 0.5);
    assert_eq!(g.scale, [1.0, 1.0, 1.0]);
    assert_eq!(g.rotation, [1.0, 0.0, 0.0, 0.0]);
    assert_eq!(g.center, [1.0, 2.0, 3.0]);
    let dc = g.color_dc.unwrap();
    assert!((dc[1] - 0.2).abs() < 1e-7);

    let row = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, -1.0, 0.5, 0.0, 0.0, 3.0, 0.0, 4.0];
    let g = parse(&ply(&STANDARD, &[row])).unwrap().gaussians[0].clone();
    assert!((g.opacity - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-12);
    assert!((g.scale[0] - (-1.0f64).exp()).abs() < 1e-12 && (g.scale[1] - 0.5f64.exp()).abs() < 1e-7);
    assert_eq!(g.rotation, [0.0, 0.6, 0.0, 0.8]);
}

#[test]
fn optional_color_and_extra_properties() {
    let props = ["rot_3", "x", "junk", "y", "z", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2"];
    let row = vec![0.0, 1.0, 9.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let g = parse(&ply(&props, &[row])).unwrap().gaussians[0].clone();
    assert_eq!(g.center, [1.0, 2.0, 3.0]);
    assert!(g.color_dc.is_none());
}

#[test]
fn missing_property_is_named() {
    let props: Vec<&str> = STANDARD.iter().copied().filter(|p| *p != "scale_1").collect();
    let err = parse(&ply(&props, &[vec![0.0; 16]])).unwrap_err();
    assert!(matches!(err, Error::Format { .. }));
    assert!(err.to_string().contains("scale_1"), "{err}");
}

#[test]
fn non_finite_value_reports_vertex() {
    let mut rows = vec![vec![0.0f32; 17]; 5];
    rows.iter_mut().for_each(|r| r[13] = 1.0);
    rows[3][1] = f32::NAN;
    let err = parse(&ply(&STANDARD, &rows)).unwrap_err();
    assert!(matches!(err, Error::Data { .. }));
    assert!(err.to_string().contains("vertex 3"), "{err}");
    rows[3][1] = 0.0;
    rows[4][13] = 0.0;
    let err = parse(&ply(&STANDARD, &rows)).unwrap_err();
    assert!(err.to_string().contains("vertex 4"), "{err}");
}

#[test]
fn malformed_files() {
    let good = ply(&STANDARD, &[vec![0.0; 17]]);
    assert!(matches!(parse(&good[..good.len() - 3]), Err(Error::Format { .. })));
    let ascii = String::from_utf8_lossy(&good).replace("binary_little_endian", "ascii").into_bytes();
    assert!(matches!(parse(&ascii), Err(Error::Format { .. })));
    assert!(matches!(parse(b"not a ply"), Err(Error::Format { .. })));
    assert!(matches!(parse(&ply(&STANDARD, &[])), Err(Error::Data { .. })));
}

#[test]
fn skips_leading_fixed_size_elements_and_reads_doubles() {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\nelement camera 2\nproperty uchar a\nproperty double b\nelement vertex 1\n");
    for p in STANDARD {
        header += &format!("property double {p}\n");
    }
    header += "end_header\n";
    let mut bytes = header.into_bytes();
    bytes.extend(std::iter::repeat_n(7u8, 2 * 9));
    let mut row = [0.0f64; 17];
    row[0] = 0.125;
    row[13] = 1.0;
    row.iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes()));
    let g = parse(&bytes).unwrap().gaussians[0].clone();
    assert_eq!(g.center[0], 0.125);
}

fn random_file(seed: u64, n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|_| {
            let mut r: Vec<f32> = (0..17).map(|_| rng.gen_range(-3.0..3.0)).collect();
            r[9] = rng.gen_range(-8.0..8.0);
            r
        })
        .collect();
    ply(&STANDARD, &rows)
}

#[test]
fn export_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let original = parse(&random_file(5, 100)).unwrap();
    let path = dir.path().join("out.ply");
    export_ply(&original, &path).unwrap();
    let back = load_scene_ply(&path).unwrap();
    assert_eq!(back.len(), 100);
    for (a, b) in original.gaussians.iter().zip(&back.gaussians) {
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-6);
        assert!(close(&a.center, &b.center));
        assert!(close(&a.scale, &b.scale), "{:?} {:?}", a.scale, b.scale);
        assert!(close(&a.rotation, &b.rotation));
        assert!((a.opacity - b.opacity).abs() <= 1e-6);
        assert!(close(&a.color_dc.unwrap(), &b.color_dc.unwrap()));
    }
}

#[test]
fn exports_are_byte_identical() {
    let scene = parse(&random_file(6, 50)).unwrap();
    assert_eq!(encode_scene_ply(&scene), encode_scene_ply(&scene));
    let again = parse(&encode_scene_ply(&scene)).unwrap();
    assert_eq!(encode_scene_ply(&again), encode_scene_ply(&scene));
}

#[test]
fn extreme_opacity_survives_export() {
    let scene = gslift_core::GaussianScene::new(
        vec![
            Gaussian::isotropic([0.0; 3], 0.1, 1.0).unwrap(),
            Gaussian::isotropic([0.0; 3], 0.1, 0.0).unwrap(),
        ],
        "",
    );
    let back = parse(&encode_scene_ply(&scene)).unwrap();
    assert!((back.gaussians[0].opacity - 1.0).abs() < 1e-6);
    assert!(back.gaussians[1].opacity < 1e-6);
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_scene_ply(Path::new("/nonexistent/scene.ply")), Err(Error::Io { .. })));
}
