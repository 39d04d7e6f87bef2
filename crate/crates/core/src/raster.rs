//! Tile-based front-to-back alpha compositing, plus a naive per-pixel
//! reference renderer used to cross-check it.
//!
//! Every pixel walks a depth-sorted splat list with transmittance `T = 1`,
//! adding `x_i·α_i·T` to the channel, `α_i·T` to the accumulated alpha `ρ`
//! and `depth_i·α_i·T` to the depth, then `T ← T·(1 - α_i)`. Because `α` and
//! `T` do not depend on the channel, the output is linear in it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::par;
use crate::projection::{evaluate_alpha, project_gaussian, Culled, ProjectedGaussian, ALPHA_MIN};
use crate::scene::{pixel_center, CameraView, GaussianScene};

pub const TILE_SIZE: u32 = 16;
/// The walk stops once transmittance drops below this (when enabled).
pub const TRANSMITTANCE_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderConfig {
    /// Stop a pixel's walk when `T < 1e-4`.
    pub early_termination: bool,
    /// Skip splats with `α < 1/255`.
    pub alpha_floor: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            early_termination: true,
            alpha_floor: true,
        }
    }
}

impl RenderConfig {
    /// Both throughput cutoffs disabled.
    pub const fn exact() -> Self {
        Self {
            early_termination: false,
            alpha_floor: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CullStats {
    pub near_plane: usize,
    pub outside_image: usize,
    pub degenerate: usize,
}

/// The splats of one view.
#[derive(Debug, Clone)]
pub struct ViewSplats {
    pub view: CameraView,
    /// Ascending by `gaussian_index`.
    pub splats: Vec<ProjectedGaussian>,
    pub culled: CullStats,
}

impl ViewSplats {
    pub fn project(scene: &GaussianScene, view: &CameraView) -> Self {
        let results = par::map_indexed(scene.len(), |i| project_gaussian(i, &scene.gaussians[i], view));
        let mut splats = Vec::with_capacity(results.len());
        let mut culled = CullStats::default();
        for r in results {
            match r {
                Ok(p) => splats.push(p),
                Err(Culled::NearPlane) => culled.near_plane += 1,
                Err(Culled::OutsideImage) => culled.outside_image += 1,
                Err(Culled::Degenerate) => culled.degenerate += 1,
            }
        }
        Self {
            view: view.clone(),
            splats,
            culled,
        }
    }

    /// Keeps only splats whose Gaussian is flagged in `members`.
    pub fn retain_members(&self, members: &[bool]) -> Self {
        Self {
            view: self.view.clone(),
            splats: self.splats.iter().filter(|p| members[p.gaussian_index]).cloned().collect(),
            culled: self.culled,
        }
    }
}

/// Per-tile splat lists, each sorted by ascending depth (ties by Gaussian index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileBinning {
    pub tiles_x: u32,
    pub tiles_y: u32,
    offsets: Vec<usize>,
    /// Positions into the splat slice the binning was built from.
    entries: Vec<u32>,
}

impl TileBinning {
    pub fn num_tiles(&self) -> usize {
        (self.tiles_x * self.tiles_y) as usize
    }

    /// Splat positions binned into tile `t` (row-major tile order).
    pub fn tile(&self, t: usize) -> &[u32] {
        &self.entries[self.offsets[t]..self.offsets[t + 1]]
    }

    pub fn tile_at(&self, tx: u32, ty: u32) -> &[u32] {
        self.tile((ty * self.tiles_x + tx) as usize)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total_entries(&self) -> usize {
        self.entries.len()
    }
}

/// Pixel bounds `(x0, y0, x1, y1)`, inclusive, of tile `t`.
pub fn tile_bounds(view: &CameraView, tiles_x: u32, t: usize) -> (u32, u32, u32, u32) {
    let tx = t as u32 % tiles_x;
    let ty = t as u32 / tiles_x;
    let x0 = tx * TILE_SIZE;
    let y0 = ty * TILE_SIZE;
    ((x0), (y0), (x0 + TILE_SIZE - 1).min(view.width - 1), (y0 + TILE_SIZE - 1).min(view.height - 1))
}

/// Bins every splat into each 16×16 tile its footprint touches.
pub fn bin_gaussians_to_tiles(splats: &[ProjectedGaussian], view: &CameraView) -> TileBinning {
    let tiles_x = view.width.div_ceil(TILE_SIZE);
    let tiles_y = view.height.div_ceil(TILE_SIZE);
    let num_tiles = (tiles_x * tiles_y) as usize;
    let tile_range = |p: &ProjectedGaussian| {
        (
            p.rect.x0 / TILE_SIZE,
            p.rect.y0 / TILE_SIZE,
            p.rect.x1 / TILE_SIZE,
            p.rect.y1 / TILE_SIZE,
        )
    };
    let mut offsets = vec![0usize; num_tiles + 1];
    for p in splats {
        let (tx0, ty0, tx1, ty1) = tile_range(p);
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                offsets[(ty * tiles_x + tx) as usize + 1] += 1;
            }
        }
    }
    for t in 0..num_tiles {
        offsets[t + 1] += offsets[t];
    }
    let mut cursor = offsets.clone();
    let mut entries = vec![0u32; offsets[num_tiles]];
    for (slot, p) in splats.iter().enumerate() {
        let (tx0, ty0, tx1, ty1) = tile_range(p);
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                let t = (ty * tiles_x + tx) as usize;
                entries[cursor[t]] = slot as u32;
                cursor[t] += 1;
            }
        }
    }
    for t in 0..num_tiles {
        entries[offsets[t]..offsets[t + 1]].sort_by(|&a, &b| depth_order(&splats[a as usize], &splats[b as usize]));
    }
    TileBinning {
        tiles_x,
        tiles_y,
        offsets,
        entries,
    }
}

#[inline]
pub(crate) fn depth_order(a: &ProjectedGaussian, b: &ProjectedGaussian) -> core::cmp::Ordering {
    a.depth
        .total_cmp(&b.depth)
        .then(a.gaussian_index.cmp(&b.gaussian_index))
}

/// Front-to-back compositing walk over `order` (positions into `splats`) for
/// one pixel. `visit(position_in_order, splat, weight)` is called with
/// `weight = α·T` for every splat that survives the cutoffs. Returns `ρ`.
#[inline]
pub(crate) fn walk_pixel<I, F>(splats: &[ProjectedGaussian], order: I, pixel: [f64; 2], cfg: RenderConfig, mut visit: F) -> f64
where
    I: IntoIterator<Item = u32>,
    F: FnMut(usize, &ProjectedGaussian, f64),
{
    let mut transmittance = 1.0f64;
    let mut rho = 0.0f64;
    for (pos, slot) in order.into_iter().enumerate() {
        let p = &splats[slot as usize];
        let alpha = evaluate_alpha(p, pixel, p.opacity);
        if alpha <= 0.0 || (cfg.alpha_floor && alpha < ALPHA_MIN) {
            continue;
        }
        let weight = alpha * transmittance;
        visit(pos, p, weight);
        rho += weight;
        transmittance *= 1.0 - alpha;
        if cfg.early_termination && transmittance < TRANSMITTANCE_MIN {
            break;
        }
    }
    rho
}

/// A per-Gaussian property to composite.
#[derive(Debug, Clone, Copy)]
pub enum Channel<'a> {
    /// Only ρ and depth.
    None,
    Scalar(&'a [f64]),
    Rgb(&'a [[f64; 3]]),
}

impl Channel<'_> {
    pub fn width(&self) -> usize {
        match self {
            Channel::None => 0,
            Channel::Scalar(_) => 1,
            Channel::Rgb(_) => 3,
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Channel::None => None,
            Channel::Scalar(v) => Some(v.len()),
            Channel::Rgb(v) => Some(v.len()),
        }
    }

    #[inline]
    fn add(&self, out: &mut [f64], gaussian: usize, weight: f64) {
        match self {
            Channel::None => {}
            Channel::Scalar(v) => out[0] += v[gaussian] * weight,
            Channel::Rgb(v) => {
                let c = &v[gaussian];
                out[0] += c[0] * weight;
                out[1] += c[1] * weight;
                out[2] += c[2] * weight;
            }
        }
    }
}

/// Row-major per-pixel render results.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub width: u32,
    pub height: u32,
    /// Components per pixel in `value` (0, 1 or 3).
    pub channels: usize,
    pub value: Vec<f64>,
    /// Accumulated alpha ρ.
    pub alpha: Vec<f64>,
    /// Blended depth normalized by ρ; zero where ρ = 0.
    pub depth: Vec<f64>,
}

impl RenderOutput {
    fn blank(width: u32, height: u32, channels: usize) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            channels,
            value: vec![0.0; n * channels],
            alpha: vec![0.0; n],
            depth: vec![0.0; n],
        }
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn alpha_at(&self, x: u32, y: u32) -> f64 {
        self.alpha[self.index(x, y)]
    }

    pub fn depth_at(&self, x: u32, y: u32) -> f64 {
        self.depth[self.index(x, y)]
    }

    pub fn value_at(&self, x: u32, y: u32) -> &[f64] {
        let i = self.index(x, y) * self.channels;
        &self.value[i..i + self.channels]
    }
}

fn check_channel(scene: &GaussianScene, channel: &Channel) -> Result<()> {
    match channel.len() {
        Some(n) if n != scene.len() => Err(Error::input(alloc::format!(
            "channel has {n} entries, scene has {} Gaussians",
            scene.len()
        ))),
        _ => Ok(()),
    }
}

/// Composites `channel` over the binned splats of one view.
pub fn render_property(
    scene: &GaussianScene,
    splats: &ViewSplats,
    binning: &TileBinning,
    channel: Channel,
    cfg: RenderConfig,
) -> Result<RenderOutput> {
    check_channel(scene, &channel)?;
    let view = &splats.view;
    let c = channel.width();
    let tiles = par::map_indexed(binning.num_tiles(), |t| {
        let (x0, y0, x1, y1) = tile_bounds(view, binning.tiles_x, t);
        let list = binning.tile(t);
        let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
        let mut value = vec![0.0; n * c];
        let mut alpha = vec![0.0; n];
        let mut depth = vec![0.0; n];
        let mut k = 0;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let mut d = 0.0;
                let out = &mut value[k * c..(k + 1) * c];
                let rho = walk_pixel(&splats.splats, list.iter().copied(), pixel_center(x, y), cfg, |_, p, w| {
                    channel.add(out, p.gaussian_index, w);
                    d += p.depth * w;
                });
                alpha[k] = rho;
                depth[k] = if rho > 0.0 { d / rho } else { 0.0 };
                k += 1;
            }
        }
        (value, alpha, depth)
    });
    let mut out = RenderOutput::blank(view.width, view.height, c);
    for (t, (value, alpha, depth)) in tiles.into_iter().enumerate() {
        let (x0, y0, x1, y1) = tile_bounds(view, binning.tiles_x, t);
        let mut k = 0;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let i = out.index(x, y);
                out.alpha[i] = alpha[k];
                out.depth[i] = depth[k];
                out.value[i * c..(i + 1) * c].copy_from_slice(&value[k * c..(k + 1) * c]);
                k += 1;
            }
        }
    }
    Ok(out)
}

/// Projects, bins and renders `channel` for one view.
pub fn render_view(scene: &GaussianScene, view: &CameraView, channel: Channel, cfg: RenderConfig) -> Result<RenderOutput> {
    check_channel(scene, &channel)?;
    let splats = ViewSplats::project(scene, view);
    let binning = bin_gaussians_to_tiles(&splats.splats, view);
    render_property(scene, &splats, &binning, channel, cfg)
}

/// ρ and depth of the Gaussians flagged in `member_mask`, rendered as if the
/// others did not exist.
pub fn render_subset_alpha_depth(
    scene: &GaussianScene,
    view: &CameraView,
    member_mask: &[bool],
    cfg: RenderConfig,
) -> Result<RenderOutput> {
    if member_mask.len() != scene.len() {
        return Err(Error::input(alloc::format!(
            "member mask has {} entries, scene has {} Gaussians",
            member_mask.len(),
            scene.len()
        )));
    }
    let splats = ViewSplats::project(scene, view).retain_members(member_mask);
    Ok(render_subset_from_splats(scene, &splats, cfg))
}

pub(crate) fn render_subset_from_splats(scene: &GaussianScene, splats: &ViewSplats, cfg: RenderConfig) -> RenderOutput {
    let binning = bin_gaussians_to_tiles(&splats.splats, &splats.view);
    // Channel::None never fails the length check.
    render_property(scene, splats, &binning, Channel::None, cfg).unwrap_or_else(|_| unreachable!())
}

/// Reference renderer: every pixel considers every projected Gaussian and
/// fully sorts the ones with nonzero alpha. No tiles, no shared lists.
pub fn render_naive(scene: &GaussianScene, view: &CameraView, channel: Channel, cfg: RenderConfig) -> Result<RenderOutput> {
    check_channel(scene, &channel)?;
    let splats: Vec<ProjectedGaussian> = scene
        .gaussians
        .iter()
        .enumerate()
        .filter_map(|(i, g)| project_gaussian(i, g, view).ok())
        .collect();
    let c = channel.width();
    let mut out = RenderOutput::blank(view.width, view.height, c);
    let mut hits: Vec<u32> = Vec::new();
    for y in 0..view.height {
        for x in 0..view.width {
            let pixel = pixel_center(x, y);
            hits.clear();
            hits.extend(
                splats
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| evaluate_alpha(p, pixel, p.opacity) > 0.0)
                    .map(|(s, _)| s as u32),
            );
            hits.sort_by(|&a, &b| depth_order(&splats[a as usize], &splats[b as usize]));
            let i = out.index(x, y);
            let mut d = 0.0;
            let value = &mut out.value[i * c..(i + 1) * c];
            let rho = walk_pixel(&splats, hits.iter().copied(), pixel, cfg, |_, p, w| {
                channel.add(value, p.gaussian_index, w);
                d += p.depth * w;
            });
            out.alpha[i] = rho;
            out.depth[i] = if rho > 0.0 { d / rho } else { 0.0 };
        }
    }
    Ok(out)
}
