//! Binary handoff files: contribution matrix, assignment, float grids.

use std::path::Path;

use gslift_core::{Assignment, AssignmentMode, ContributionMatrix, RenderOutput};
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

pub const MATRIX_MAGIC: &[u8; 4] = b"FSA1";

pub fn encode_matrix(a: &ContributionMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + a.values.len() * 4);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(a.num_objects as u32).to_le_bytes());
    out.extend_from_slice(&(a.num_gaussians as u32).to_le_bytes());
    for v in &a.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(path: &Path, bytes: &[u8]) -> Result<ContributionMatrix> {
    if bytes.len() < 12 || &bytes[..4] != MATRIX_MAGIC {
        return Err(Error::format(path, "not a contribution matrix (bad magic)"));
    }
    let e = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expect = e.checked_mul(n).and_then(|c| c.checked_mul(4)).map(|c| c + 12);
    if expect != Some(bytes.len()) {
        return Err(Error::format(path, format!("matrix header says {e}x{n}, payload is {} bytes", bytes.len() - 12)));
    }
    let values = bytes[12..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    ContributionMatrix::from_values(e, n, values).map_err(|err| Error::data(path, err.to_string()))
}

pub fn write_matrix(path: &Path, a: &ContributionMatrix) -> Result<()> {
    error::write(path, &encode_matrix(a))
}

pub fn read_matrix(path: &Path) -> Result<ContributionMatrix> {
    decode_matrix(path, &error::read(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentHeader {
    mode: String,
    gamma: f64,
    #[serde(rename = "E")]
    e: usize,
    #[serde(rename = "N")]
    n: usize,
}

/// One JSON header line, then the membership bytes: N labels in binary
/// mode, E rows of N in scene mode.
pub fn encode_assignment(a: &Assignment) -> Vec<u8> {
    let header = AssignmentHeader {
        mode: a.mode.as_str().to_string(),
        gamma: a.gamma,
        e: a.num_objects,
        n: a.num_gaussians,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.extend_from_slice(a.membership_bytes());
    out
}

pub fn decode_assignment(path: &Path, bytes: &[u8]) -> Result<Assignment> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(path, "assignment header line missing"))?;
    let header: AssignmentHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::format(path, format!("assignment header: {e}")))?;
    let mode: AssignmentMode = header.mode.parse().map_err(|e: gslift_core::Error| Error::format(path, e.to_string()))?;
    Assignment::from_parts(mode, header.gamma, header.e, header.n, bytes[nl + 1..].to_vec())
        .map_err(|e| Error::data(path, e.to_string()))
}

pub fn write_assignment(path: &Path, a: &Assignment) -> Result<()> {
    error::write(path, &encode_assignment(a))
}

pub fn read_assignment(path: &Path) -> Result<Assignment> {
    decode_assignment(path, &error::read(path)?)
}

/// 8-byte header (width, height as LE u32), then f32 row-major.
pub fn encode_grid(width: u32, height: u32, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + values.len() * 4);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    for v in values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_grid(path: &Path, bytes: &[u8]) -> Result<(u32, u32, Vec<f32>)> {
    if bytes.len() < 8 {
        return Err(Error::format(path, "grid header truncated"));
    }
    let w = u32::from_le_bytes(bytes[..4].try_into().unwrap());
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if (bytes.len() - 8) as u64 != w as u64 * h as u64 * 4 {
        return Err(Error::format(path, format!("grid header says {w}x{h}, payload is {} bytes", bytes.len() - 8)));
    }
    Ok((w, h, bytes[8..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()))
}

/// Writes `{stem}.rho` and `{stem}.depth` for a render.
pub fn write_render_grids(dir: &Path, stem: &str, out: &RenderOutput) -> Result<()> {
    let (w, h) = (out.width, out.height);
    error::write(&dir.join(format!("{stem}.rho")), &encode_grid(w, h, &out.alpha))?;
    error::write(&dir.join(format!("{stem}.depth")), &encode_grid(w, h, &out.depth))
}
