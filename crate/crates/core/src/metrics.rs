//! Segmentation quality metrics (DSC, NSD, combined performance score) and
//! the BCE + Dice + IoU training loss.

use core::fmt;

use crate::edt::{boundary, squared_edt};
use crate::grid::{Mask, ProbMap};

/// Default NSD boundary tolerance in pixels.
pub const DEFAULT_TAU: f64 = 2.0;
/// Smoothing constant in the Dice and IoU loss denominators.
pub const LOSS_SMOOTHING: f64 = 1.0;
/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the
/// cross-entropy.
pub const PROB_CLAMP: f64 = 1e-7;

/// Errors from metric computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    /// Prediction and ground truth have different shapes.
    DimensionMismatch,
    /// NSD tolerance is negative.
    NegativeTau,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::DimensionMismatch => {
                write!(f, "prediction and ground truth dimensions differ")
            }
            MetricError::NegativeTau => write!(f, "NSD tolerance must be non-negative"),
        }
    }
}

/// Per-image segmentation quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    /// Dice similarity coefficient in `[0, 1]`.
    pub dsc: f64,
    /// Normalized surface distance in `[0, 1]`.
    pub nsd: f64,
    /// `100 * (dsc + nsd) / 2`, the 0-100 performance score.
    pub perf: f64,
}

/// Additive loss components; `total` is always their exact sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub bce: f64,
    pub dice: f64,
    pub iou: f64,
    pub total: f64,
}

/// Dice similarity coefficient `2|P∩G| / (|P| + |G|)`. Two empty masks
/// score 1.0.
pub fn dsc(pred: &Mask, gt: &Mask) -> Result<f64, MetricError> {
    if !pred.same_shape(gt) {
        return Err(MetricError::DimensionMismatch);
    }
    let mut inter = 0usize;
    let mut p = 0usize;
    let mut g = 0usize;
    for (&a, &b) in pred.data().iter().zip(gt.data()) {
        p += a as usize;
        g += b as usize;
        inter += (a && b) as usize;
    }
    if p + g == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (p + g) as f64)
}

/// Normalized surface distance at tolerance `tau`: the fraction of boundary
/// pixels of each mask within Euclidean distance `tau` of the other mask's
/// boundary, pooled over both boundaries. Two empty masks score 1.0; exactly
/// one empty scores 0.0.
pub fn nsd(pred: &Mask, gt: &Mask, tau: f64) -> Result<f64, MetricError> {
    if !pred.same_shape(gt) {
        return Err(MetricError::DimensionMismatch);
    }
    if tau < 0.0 {
        return Err(MetricError::NegativeTau);
    }
    let p_empty = pred.count() == 0;
    let g_empty = gt.count() == 0;
    if p_empty && g_empty {
        return Ok(1.0);
    }
    if p_empty || g_empty {
        return Ok(0.0);
    }

    let bp = boundary(pred);
    let bg = boundary(gt);
    let dist_to_bg = squared_edt(&bg);
    let dist_to_bp = squared_edt(&bp);
    let tau2 = tau * tau;

    let mut hits = 0usize;
    let mut total = 0usize;
    for (i, &on) in bp.data().iter().enumerate() {
        if on {
            total += 1;
            hits += (dist_to_bg[i] <= tau2) as usize;
        }
    }
    for (i, &on) in bg.data().iter().enumerate() {
        if on {
            total += 1;
            hits += (dist_to_bp[i] <= tau2) as usize;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Combined score: DSC and NSD averaged onto a 0-100 scale.
pub fn perf(pred: &Mask, gt: &Mask, tau: f64) -> Result<Score, MetricError> {
    let dsc = dsc(pred, gt)?;
    let nsd = nsd(pred, gt, tau)?;
    Ok(Score {
        dsc,
        nsd,
        perf: 100.0 * (dsc + nsd) / 2.0,
    })
}

/// Unweighted sum of binary cross-entropy, Dice loss, and IoU loss against a
/// binary ground truth, with smoothing [`LOSS_SMOOTHING`] and probability
/// clamp [`PROB_CLAMP`].
pub fn loss(pred: &ProbMap, gt: &Mask) -> Result<LossValue, MetricError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricError::DimensionMismatch);
    }
    let n = gt.len() as f64;
    let mut bce_sum = 0.0;
    let mut inter = 0.0;
    let mut p_sum = 0.0;
    let mut g_sum = 0.0;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let g = if g { 1.0 } else { 0.0 };
        // The clamp only guards the logarithms; the overlap sums use the
        // prediction as-is.
        let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        bce_sum -= g * libm::log(pc) + (1.0 - g) * libm::log(1.0 - pc);
        inter += p * g;
        p_sum += p;
        g_sum += g;
    }
    let s = LOSS_SMOOTHING;
    let bce = bce_sum / n;
    let dice = 1.0 - (2.0 * inter + s) / (p_sum + g_sum + s);
    let iou = 1.0 - (inter + s) / (p_sum + g_sum - inter + s);
    Ok(LossValue {
        bce,
        dice,
        iou,
        total: bce + dice + iou,
    })
}
