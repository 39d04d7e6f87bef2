use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scene::CameraView;

/// Integer object-id map of one view; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    pub view_id: u32,
    pub width: u32,
    pub height: u32,
    /// Row-major, `width * height` entries.
    pub labels: Vec<u16>,
}

impl LabelMask {
    pub fn new(view_id: u32, width: u32, height: u32, labels: Vec<u16>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::input(alloc::format!(
                "mask for view {view_id} has {} labels for a {width}x{height} grid",
                labels.len()
            )));
        }
        Ok(Self {
            view_id,
            width,
            height,
            labels,
        })
    }

    pub fn filled(view_id: u32, width: u32, height: u32, label: u16) -> Self {
        Self {
            view_id,
            width,
            height,
            labels: vec![label; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: u16) {
        self.labels[y as usize * self.width as usize + x as usize] = label;
    }

    /// `max label + 1`.
    pub fn num_objects(&self) -> usize {
        self.labels.iter().copied().max().map_or(1, |m| m as usize + 1)
    }

    pub fn count(&self, label: u16) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Checks the mask against its view and a scene-wide object count.
    pub fn validate(&self, view: &CameraView, num_objects: usize) -> Result<()> {
        if self.width != view.width || self.height != view.height {
            return Err(Error::DimensionMismatch {
                view_id: view.view_id,
                mask_width: self.width,
                mask_height: self.height,
                view_width: view.width,
                view_height: view.height,
            });
        }
        if let Some(pos) = self.labels.iter().position(|&l| l as usize >= num_objects) {
            return Err(Error::LabelOutOfRange {
                view_id: view.view_id,
                x: (pos % self.width as usize) as u32,
                y: (pos / self.width as usize) as u32,
                label: self.labels[pos],
                num_objects,
            });
        }
        Ok(())
    }
}
