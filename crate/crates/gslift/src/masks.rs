//! Label masks as 16-bit grayscale PNG and 8-bit color previews.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use gslift_core::raster::render_view;
use gslift_core::{CameraView, Channel, GaussianScene, LabelMask, MaskedView, RenderConfig};

use crate::cameras::CameraSet;
use crate::error::{self, Error, Result};

fn encode_png(width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, width, height);
    enc.set_color(color);
    enc.set_depth(depth);
    let mut writer = enc.write_header().expect("in-memory PNG header");
    writer.write_image_data(data).expect("in-memory PNG data");
    writer.finish().expect("in-memory PNG end");
    out
}

/// Pixel value = label, big-endian 16-bit samples.
pub fn encode_label_png(width: u32, height: u32, labels: &[u16]) -> Vec<u8> {
    assert_eq!(labels.len(), width as usize * height as usize);
    let data: Vec<u8> = labels.iter().flat_map(|l| l.to_be_bytes()).collect();
    encode_png(width, height, png::ColorType::Grayscale, png::BitDepth::Sixteen, &data)
}

pub fn encode_rgb_png(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    encode_png(width, height, png::ColorType::Rgb, png::BitDepth::Eight, rgb)
}

/// Decodes a grayscale label PNG. 8-bit files are widened; anything else is refused.
pub fn decode_label_png(path: &Path, bytes: &[u8]) -> Result<(u32, u32, Vec<u16>)> {
    let bad = |e: png::DecodingError| Error::format(path, format!("PNG: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(bad)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "PNG too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    let buf = &buf[..info.buffer_size()];
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::format(path, format!("mask must be grayscale, found {:?}", info.color_type)));
    }
    let (w, h) = (info.width, info.height);
    let labels = match info.bit_depth {
        png::BitDepth::Sixteen => buf
            .chunks_exact(2 * w as usize)
            .flat_map(|row| row.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])))
            .collect(),
        png::BitDepth::Eight => buf.chunks_exact(w as usize).flatten().map(|&v| v as u16).collect(),
        other => return Err(Error::format(path, format!("unsupported mask bit depth {other:?}"))),
    };
    Ok((w, h, labels))
}

pub fn read_label_png(path: &Path) -> Result<(u32, u32, Vec<u16>)> {
    decode_label_png(path, &error::read(path)?)
}

pub fn write_label_png(path: &Path, width: u32, height: u32, labels: &[u16]) -> Result<()> {
    error::write(path, &encode_label_png(width, height, labels))
}

pub fn read_mask(path: &Path, view_id: u32) -> Result<LabelMask> {
    let (w, h, labels) = read_label_png(path)?;
    Ok(LabelMask::new(view_id, w, h, labels)?)
}

pub fn mask_file(dir: &Path, view_id: u32) -> PathBuf {
    dir.join(format!("{view_id}.png"))
}

/// Pairs every view with its mask. With a directory, `{view_id}.png` is used
/// and absent files mean no mask; otherwise each camera's `mask_path`.
pub fn load_masked_views(cameras: &CameraSet, masks_dir: Option<&Path>) -> Result<Vec<MaskedView>> {
    cameras
        .views
        .iter()
        .zip(&cameras.mask_paths)
        .map(|(view, listed)| {
            let path = match masks_dir {
                Some(dir) => Some(mask_file(dir, view.view_id)).filter(|p| p.exists()),
                None => listed.clone(),
            };
            let mask = path.map(|p| read_mask(&p, view.view_id)).transpose()?;
            Ok(MaskedView::new(view.clone(), mask))
        })
        .collect()
}

/// Masks found in a directory, keyed by the numeric file stem, sorted by id.
pub fn list_mask_dir(dir: &Path) -> Result<Vec<(u32, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        if let Some(id) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()) {
            out.push((id, path));
        }
    }
    out.sort();
    Ok(out)
}

/// DC-color render over black, 8-bit RGB.
pub fn render_preview(scene: &GaussianScene, view: &CameraView) -> Result<Vec<u8>> {
    let colors: Vec<[f64; 3]> = scene.gaussians.iter().map(|g| g.preview_rgb()).collect();
    let out = render_view(scene, view, Channel::Rgb(&colors), RenderConfig::default())?;
    let rgb: Vec<u8> = out.value.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    Ok(encode_rgb_png(view.width, view.height, &rgb))
}
