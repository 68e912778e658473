//! Modality-level reporting: mean performances with absolute and relative
//! differences, per-feature regressions against the performance delta, and
//! the two meta-feature hypothesis summaries.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::features::Feature;
use crate::router::EvalRecord;
use crate::stats::{simple_ols, StatError};

/// Label of the image-count-weighted summary row.
pub const AGGREGATE_LABEL: &str = "Aggregated";

/// Significance level used for hypothesis flags.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Errors from report construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportError {
    NoRecords,
    /// `meta_perfs` must align one-to-one with `records`.
    MetaPerfLengthMismatch { records: usize, meta: usize },
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::NoRecords => write!(f, "cannot build a report from zero records"),
            ReportError::MetaPerfLengthMismatch { records, meta } => {
                write!(f, "{records} records but {meta} meta performances")
            }
        }
    }
}

/// Mean performances of one modality and the derived differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityReport {
    pub modality: String,
    pub n_images: usize,
    /// Mean raw-pipeline performance.
    pub perf_raw: f64,
    /// Mean edge-pipeline performance.
    pub perf_edge: f64,
    /// Mean routed-pipeline performance.
    pub perf_meta: f64,
    /// `perf_edge - perf_raw`.
    pub delta: f64,
    /// `delta / perf_raw`, in percent.
    pub delta_rel: f64,
    /// `perf_meta - max(perf_raw, perf_edge)`.
    pub delta_meta: f64,
    /// `delta_meta / max(perf_raw, perf_edge)`, in percent.
    pub delta_rel_meta: f64,
}

impl ModalityReport {
    /// Derives the four differences from mean performances.
    pub fn from_means(
        modality: String,
        n_images: usize,
        perf_raw: f64,
        perf_edge: f64,
        perf_meta: f64,
    ) -> Self {
        let delta = perf_edge - perf_raw;
        let best_constant = perf_raw.max(perf_edge);
        let delta_meta = perf_meta - best_constant;
        ModalityReport {
            modality,
            n_images,
            perf_raw,
            perf_edge,
            perf_meta,
            delta,
            delta_rel: 100.0 * delta / perf_raw,
            delta_meta,
            delta_rel_meta: 100.0 * delta_meta / best_constant,
        }
    }
}

/// Per-modality rows plus the final image-count-weighted aggregate row.
///
/// `meta_perfs[i]` is the routed pipeline's performance on `records[i]`.
pub fn modality_report(
    records: &[EvalRecord],
    meta_perfs: &[f64],
) -> Result<Vec<ModalityReport>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NoRecords);
    }
    if records.len() != meta_perfs.len() {
        return Err(ReportError::MetaPerfLengthMismatch {
            records: records.len(),
            meta: meta_perfs.len(),
        });
    }

    struct Acc {
        n: usize,
        raw: f64,
        edge: f64,
        meta: f64,
    }
    let mut groups: BTreeMap<&str, Acc> = BTreeMap::new();
    for (r, &m) in records.iter().zip(meta_perfs) {
        let acc = groups.entry(&r.modality).or_insert(Acc {
            n: 0,
            raw: 0.0,
            edge: 0.0,
            meta: 0.0,
        });
        acc.n += 1;
        acc.raw += r.perf_raw;
        acc.edge += r.perf_edge;
        acc.meta += m;
    }

    let total = records.len();
    let mut out = Vec::with_capacity(groups.len() + 1);
    let mut weighted = (0.0, 0.0, 0.0);
    for (modality, acc) in groups {
        let n = acc.n as f64;
        let row = ModalityReport::from_means(
            String::from(modality),
            acc.n,
            acc.raw / n,
            acc.edge / n,
            acc.meta / n,
        );
        // Weighting per-modality means by image count is the grand mean.
        weighted.0 += row.perf_raw * n;
        weighted.1 += row.perf_edge * n;
        weighted.2 += row.perf_meta * n;
        out.push(row);
    }
    out.push(ModalityReport::from_means(
        String::from(AGGREGATE_LABEL),
        total,
        weighted.0 / total as f64,
        weighted.1 / total as f64,
        weighted.2 / total as f64,
    ));
    Ok(out)
}

/// Regression of the per-image performance delta on one meta-feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub feature: Feature,
    /// OLS slope: delta points per feature unit.
    pub coefficient: f64,
    pub p_value: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE_LEVEL
    }
}

/// Simple OLS of `delta` on the chosen feature over the given records.
pub fn regress_feature(
    records: &[EvalRecord],
    feature: Feature,
) -> Result<RegressionResult, StatError> {
    let xs: Vec<f64> = records.iter().map(|r| feature.value(&r.features)).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.delta).collect();
    let fit = simple_ols(&xs, &ys)?;
    Ok(RegressionResult {
        feature,
        coefficient: fit.slope,
        p_value: fit.p_value,
        n: fit.n,
    })
}

/// Verdict on one "higher feature helps edge pre-training" hypothesis for
/// one modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Positive, significant coefficient.
    Supported,
    /// Negative, significant coefficient.
    Contradicted,
    /// Not significant.
    Inconclusive,
}

impl Support {
    fn from_regression(r: &RegressionResult) -> Self {
        if !r.significant() {
            Support::Inconclusive
        } else if r.coefficient > 0.0 {
            Support::Supported
        } else {
            Support::Contradicted
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Support::Supported => "supported",
            Support::Contradicted => "contradicted",
            Support::Inconclusive => "inconclusive",
        }
    }
}

/// Both regressions and hypothesis flags for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityHypotheses {
    pub modality: String,
    pub sigma: RegressionResult,
    pub entropy: RegressionResult,
    pub sigma_support: Support,
    pub entropy_support: Support,
}

/// Direction summary across modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSummary {
    pub per_modality: Vec<ModalityHypotheses>,
    /// True when significant sigma coefficients point both ways across
    /// modalities.
    pub sigma_divergent: bool,
    /// Same flag for entropy.
    pub entropy_divergent: bool,
}

/// Per modality, regresses the delta on each feature and flags whether the
/// corresponding hypothesis is supported, contradicted, or inconclusive.
pub fn hypothesis_check(records: &[EvalRecord]) -> Result<HypothesisSummary, StatError> {
    let mut by_modality: BTreeMap<&str, Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        by_modality.entry(&r.modality).or_default().push(r.clone());
    }
    let mut per_modality = Vec::with_capacity(by_modality.len());
    for (modality, group) in by_modality {
        let sigma = regress_feature(&group, Feature::Sigma)?;
        let entropy = regress_feature(&group, Feature::Entropy)?;
        per_modality.push(ModalityHypotheses {
            modality: String::from(modality),
            sigma_support: Support::from_regression(&sigma),
            entropy_support: Support::from_regression(&entropy),
            sigma,
            entropy,
        });
    }
    let divergent = |pick: fn(&ModalityHypotheses) -> Support| {
        per_modality.iter().any(|m| pick(m) == Support::Supported)
            && per_modality.iter().any(|m| pick(m) == Support::Contradicted)
    };
    Ok(HypothesisSummary {
        sigma_divergent: divergent(|m| m.sigma_support),
        entropy_divergent: divergent(|m| m.entropy_support),
        per_modality,
    })
}
