//! Mask agreement scores.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskScore {
    /// Mean IoU over non-background labels present in either mask; 1 when neither has any.
    pub iou: f64,
    /// Fraction of pixels with equal labels.
    pub accuracy: f64,
}

pub fn score_masks(pred: &[u16], gt: &[u16]) -> Result<MaskScore> {
    if pred.len() != gt.len() {
        return Err(Error::input(alloc::format!(
            "prediction has {} pixels, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    if gt.is_empty() {
        return Err(Error::input("empty masks"));
    }
    let equal = pred.iter().zip(gt).filter(|(p, g)| p == g).count();
    let mut labels: Vec<u16> = pred.iter().chain(gt).copied().filter(|&l| l != 0).collect();
    labels.sort_unstable();
    labels.dedup();
    let iou = if labels.is_empty() {
        1.0
    } else {
        let total: f64 = labels
            .iter()
            .map(|&l| {
                let (mut inter, mut union) = (0usize, 0usize);
                for (&p, &g) in pred.iter().zip(gt) {
                    let (a, b) = (p == l, g == l);
                    inter += (a && b) as usize;
                    union += (a || b) as usize;
                }
                inter as f64 / union as f64
            })
            .sum();
        total / labels.len() as f64
    };
    Ok(MaskScore {
        iou,
        accuracy: equal as f64 / gt.len() as f64,
    })
}

/// Means of per-view scores, in percent.
pub fn mean_scores(scores: &[MaskScore]) -> (f64, f64) {
    if scores.is_empty() {
        return (0.0, 0.0);
    }
    let n = scores.len() as f64;
    (
        100.0 * scores.iter().map(|s| s.iou).sum::<f64>() / n,
        100.0 * scores.iter().map(|s| s.accuracy).sum::<f64>() / n,
    )
}
