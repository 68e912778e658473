//! Opaque mask predictors. Externally trained models appear only through
//! precomputed mask directories (implemented in the companion crate); the two
//! built-in toy segmenters below make the routing pipeline runnable without
//! any external artifacts.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::edge::EdgeOp;
use crate::grid::{Image, Mask};

/// Failure to produce a mask for an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictError {
    pub detail: String,
}

impl fmt::Display for PredictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prediction failed: {}", self.detail)
    }
}

/// A segmentation mask provider. Implementations must be deterministic and
/// return a mask with the input image's dimensions. `image_id` is the
/// image's stem, which mask-directory predictors use as the lookup key; the
/// built-in segmenters ignore it.
pub trait Predictor {
    /// Short label used in logs and reports.
    fn id(&self) -> &str;

    fn predict(&self, image: &Image, image_id: &str) -> Result<Mask, PredictError>;
}

/// Otsu's threshold: maximizes between-class variance over the 256-bin
/// histogram. Returns `None` when the image has a single distinct intensity
/// (every split is degenerate). Foreground is the brighter class
/// (`intensity > threshold`).
pub fn otsu_threshold(image: &Image) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in image.data() {
        hist[p as usize] += 1;
    }
    let total = image.len() as f64;
    let weighted_total: f64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| k as f64 * c as f64)
        .sum();

    let mut best: Option<(f64, u8)> = None;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        if w0 == 0.0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0.0 {
            break;
        }
        let mu0 = sum0 / w0;
        let mu1 = (weighted_total - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        // Strict comparison keeps the lowest maximizing threshold.
        if best.map_or(true, |(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Otsu segmentation of the raw image; a constant image yields the empty
/// mask.
pub fn otsu_segment(image: &Image) -> Mask {
    match otsu_threshold(image) {
        Some(t) => Mask::from_threshold(image, t),
        None => Mask::empty(image.width(), image.height()),
    }
}

/// Fills enclosed background regions: background pixels not 4-connected to
/// the image border become foreground.
pub fn fill_holes(mask: &Mask) -> Mask {
    let w = mask.width();
    let h = mask.height();
    let mut outside = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    {
        let mut seed = |x: usize, y: usize, stack: &mut Vec<(usize, usize)>| {
            if !mask.get(x, y) && !outside[y * w + x] {
                outside[y * w + x] = true;
                stack.push((x, y));
            }
        };
        for x in 0..w {
            seed(x, 0, &mut stack);
            seed(x, h - 1, &mut stack);
        }
        for y in 0..h {
            seed(0, y, &mut stack);
            seed(w - 1, y, &mut stack);
        }
    }
    while let Some((x, y)) = stack.pop() {
        let mut visit = |nx: usize, ny: usize, stack: &mut Vec<(usize, usize)>| {
            let i = ny * w + nx;
            if !mask.get(nx, ny) && !outside[i] {
                outside[i] = true;
                stack.push((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y, &mut stack);
        }
        if x + 1 < w {
            visit(x + 1, y, &mut stack);
        }
        if y > 0 {
            visit(x, y - 1, &mut stack);
        }
        if y + 1 < h {
            visit(x, y + 1, &mut stack);
        }
    }
    Mask::from_fn(w, h, |x, y| mask.get(x, y) || !outside[y * w + x])
}

/// Edge-assisted segmentation: Otsu on the edge-enhanced image, then hole
/// filling. The enhanced image of a constant input is constant, so the
/// result is empty.
pub fn edge_assisted_segment(image: &Image, op: EdgeOp, scale: Option<f64>) -> Mask {
    fill_holes(&otsu_segment(&op.enhance(image, scale)))
}

/// Otsu thresholding of the raw image.
#[derive(Debug, Clone, Copy, Default)]
pub struct OtsuPredictor;

impl Predictor for OtsuPredictor {
    fn id(&self) -> &str {
        "otsu"
    }

    fn predict(&self, image: &Image, _image_id: &str) -> Result<Mask, PredictError> {
        Ok(otsu_segment(image))
    }
}

/// Otsu thresholding of the edge-enhanced image followed by hole filling.
#[derive(Debug, Clone, Copy)]
pub struct EdgeAssistedPredictor {
    pub op: EdgeOp,
    pub scale: Option<f64>,
}

impl Default for EdgeAssistedPredictor {
    fn default() -> Self {
        EdgeAssistedPredictor {
            op: EdgeOp::Kirsch,
            scale: None,
        }
    }
}

impl Predictor for EdgeAssistedPredictor {
    fn id(&self) -> &str {
        "edge-otsu"
    }

    fn predict(&self, image: &Image, _image_id: &str) -> Result<Mask, PredictError> {
        Ok(edge_assisted_segment(image, self.op, self.scale))
    }
}
