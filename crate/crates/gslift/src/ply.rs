//! Binary little-endian PLY in the layout written by 3DGS training code.
//!
//! Raw file values are pre-activation: opacity is a logit, scales are logs.

use std::io::Write as _;
use std::path::Path;

use gslift_core::math::{logit, sigmoid};
use gslift_core::{Gaussian, GaussianScene};

use crate::error::{self, Error, Result};

const REQUIRED: [&str; 11] = [
    "x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3",
];
const COLOR: [&str; 3] = ["f_dc_0", "f_dc_1", "f_dc_2"];
/// Opacity is clamped this far from 0 and 1 before taking the logit.
const OPACITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Element {
    name: String,
    count: usize,
    /// (name, type, byte offset); `None` type marks a list property.
    properties: Vec<(String, Option<Scalar>, usize)>,
    stride: usize,
}

struct Header {
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let end = b"end_header";
    let pos = bytes
        .windows(end.len())
        .position(|w| w == end)
        .ok_or_else(|| Error::format(path, "no end_header line"))?;
    let mut body_offset = pos + end.len();
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) != Some(&b'\n') {
        return Err(Error::format(path, "end_header is not followed by a newline"));
    }
    body_offset += 1;
    let text = std::str::from_utf8(&bytes[..pos]).map_err(|_| Error::format(path, "header is not UTF-8"))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("ply") {
        return Err(Error::format(path, "missing 'ply' magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    for line in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", kind, _] => {
                if *kind != "binary_little_endian" {
                    return Err(Error::format(path, format!("unsupported PLY format '{kind}', need binary_little_endian")));
                }
                format_seen = true;
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::format(path, format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    stride: 0,
                });
            }
            ["property", "list", _, _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::format(path, "property before any element"))?;
                el.properties.push((name.to_string(), None, el.stride));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::format(path, "property before any element"))?;
                let scalar = Scalar::parse(ty).ok_or_else(|| Error::format(path, format!("unknown property type '{ty}'")))?;
                el.properties.push((name.to_string(), Some(scalar), el.stride));
                el.stride += scalar.size();
            }
            _ => return Err(Error::format(path, format!("unrecognized header line '{line}'"))),
        }
    }
    if !format_seen {
        return Err(Error::format(path, "missing format line"));
    }
    Ok(Header { elements, body_offset })
}

/// Loads a scene, applying opacity, scale and quaternion activations.
pub fn load_scene_ply(path: &Path) -> Result<GaussianScene> {
    let bytes = error::read(path)?;
    parse_scene_ply(path, &bytes)
}

pub fn parse_scene_ply(path: &Path, bytes: &[u8]) -> Result<GaussianScene> {
    let header = parse_header(path, bytes)?;
    let mut offset = header.body_offset;
    let mut vertex = None;
    for el in &header.elements {
        if el.name == "vertex" {
            vertex = Some(el);
            break;
        }
        if el.properties.iter().any(|p| p.1.is_none()) {
            return Err(Error::format(path, format!("cannot skip list element '{}' before vertex", el.name)));
        }
        offset += el.count * el.stride;
    }
    let vertex = vertex.ok_or_else(|| Error::format(path, "no vertex element"))?;
    if vertex.properties.iter().any(|p| p.1.is_none()) {
        return Err(Error::format(path, "vertex element has a list property"));
    }
    let find = |name: &str| vertex.properties.iter().find(|p| p.0 == name).map(|p| (p.1.unwrap(), p.2));
    let mut required = Vec::with_capacity(REQUIRED.len());
    for name in REQUIRED {
        required.push(find(name).ok_or_else(|| Error::format(path, format!("missing vertex property '{name}'")))?);
    }
    let color: Option<Vec<(Scalar, usize)>> = COLOR.iter().map(|n| find(n)).collect();
    let needed = vertex.count * vertex.stride;
    if bytes.len() < offset + needed {
        return Err(Error::format(
            path,
            format!("vertex data truncated: need {needed} bytes, have {}", bytes.len().saturating_sub(offset)),
        ));
    }
    if vertex.count == 0 {
        return Err(Error::data(path, "scene has no Gaussians"));
    }
    let mut gaussians = Vec::with_capacity(vertex.count);
    for i in 0..vertex.count {
        let row = &bytes[offset + i * vertex.stride..offset + (i + 1) * vertex.stride];
        let mut raw = [0.0f64; 11];
        for (k, &(ty, at)) in required.iter().enumerate() {
            raw[k] = ty.read(&row[at..]);
            if !raw[k].is_finite() {
                return Err(Error::data(path, format!("vertex {i}: non-finite '{}'", REQUIRED[k])));
            }
        }
        let scale = [raw[4].exp(), raw[5].exp(), raw[6].exp()];
        let g = Gaussian::new([raw[0], raw[1], raw[2]], [raw[7], raw[8], raw[9], raw[10]], scale, sigmoid(raw[3]))
            .map_err(|e| Error::data(path, format!("vertex {i}: {e}")))?;
        let g = match &color {
            Some(c) => {
                let dc = [c[0].0.read(&row[c[0].1..]), c[1].0.read(&row[c[1].1..]), c[2].0.read(&row[c[2].1..])];
                if dc.iter().any(|v| !v.is_finite()) {
                    return Err(Error::data(path, format!("vertex {i}: non-finite 'f_dc'")));
                }
                g.with_color_dc(dc)
            }
            None => g,
        };
        gaussians.push(g);
    }
    Ok(GaussianScene::new(gaussians, path.display().to_string()))
}

/// Serializes with inverse activations. Normals are written as zeros and
/// higher SH bands are dropped; `f_dc_*` is written only when some Gaussian has a color.
pub fn encode_scene_ply(scene: &GaussianScene) -> Vec<u8> {
    let with_color = scene.gaussians.iter().any(|g| g.color_dc.is_some());
    let mut names = vec!["x", "y", "z", "nx", "ny", "nz"];
    if with_color {
        names.extend(COLOR);
    }
    names.extend(["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]);
    let mut out = Vec::with_capacity(256 + scene.len() * names.len() * 4);
    writeln!(out, "ply\nformat binary_little_endian 1.0\nelement vertex {}", scene.len()).unwrap();
    for n in &names {
        writeln!(out, "property float {n}").unwrap();
    }
    out.extend_from_slice(b"end_header\n");
    for g in &scene.gaussians {
        let mut row: Vec<f64> = vec![g.center[0], g.center[1], g.center[2], 0.0, 0.0, 0.0];
        if with_color {
            row.extend(g.color_dc.unwrap_or([0.0; 3]));
        }
        row.push(logit(g.opacity.clamp(OPACITY_EPS, 1.0 - OPACITY_EPS)));
        row.extend(g.scale.map(f64::ln));
        row.extend(g.rotation);
        for v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn export_ply(scene: &GaussianScene, path: &Path) -> Result<()> {
    error::write(path, &encode_scene_ply(scene))
}
