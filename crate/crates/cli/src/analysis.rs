//! Statistical analysis over evaluation records and the report artifacts:
//! `report.json` (full precision), `report.csv` (two-decimal table),
//! `ttests.csv`, and `regression.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use edgeroute_core::report::{
    hypothesis_check, modality_report, HypothesisSummary, ModalityReport, AGGREGATE_LABEL,
};
use edgeroute_core::router::EvalRecord;
use edgeroute_core::stats::{paired_ttest, TTestResult};
use serde::Serialize;

use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything the analysis computes.
pub struct Analysis {
    /// Table rows (per modality plus aggregate), present when meta
    /// performances were supplied.
    pub table: Option<Vec<ModalityReport>>,
    /// Per-modality paired t-tests on total-loss differences (edge - raw),
    /// plus a pooled row labeled like the aggregate.
    pub ttests: Vec<(String, TTestResult)>,
    pub hypotheses: HypothesisSummary,
}

/// Runs the statistics. T-tests and regressions use every record; the
/// performance table uses `holdout`: the records with routed performances.
pub fn analyze_records(
    all_records: &[EvalRecord],
    holdout: Option<(&[EvalRecord], &[f64])>,
) -> Result<Analysis> {
    if all_records.is_empty() {
        return Err(Error::data("no records to analyze"));
    }

    let mut by_modality: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in all_records {
        by_modality
            .entry(&r.modality)
            .or_default()
            .push(r.loss_edge.total - r.loss_raw.total);
    }
    let mut ttests = Vec::with_capacity(by_modality.len() + 1);
    for (modality, diffs) in &by_modality {
        let t = paired_ttest(diffs)
            .map_err(|e| Error::data(format!("t-test for {modality}: {e}")))?;
        ttests.push((modality.to_string(), t));
    }
    let pooled: Vec<f64> = all_records
        .iter()
        .map(|r| r.loss_edge.total - r.loss_raw.total)
        .collect();
    ttests.push((
        AGGREGATE_LABEL.to_string(),
        paired_ttest(&pooled).map_err(|e| Error::data(format!("pooled t-test: {e}")))?,
    ));

    let hypotheses = hypothesis_check(all_records)?;

    let table = match holdout {
        Some((records, meta_perfs)) => Some(modality_report(records, meta_perfs)?),
        None => None,
    };

    Ok(Analysis {
        table,
        ttests,
        hypotheses,
    })
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema_version: u32,
    tau: Option<f64>,
    table: Option<Vec<TableRow<'a>>>,
    ttests: Vec<TTestRow<'a>>,
    regressions: Vec<RegressionRow<'a>>,
    sigma_divergent: bool,
    entropy_divergent: bool,
}

#[derive(Serialize)]
struct TableRow<'a> {
    modality: &'a str,
    n_images: usize,
    perf_raw: f64,
    perf_edge: f64,
    delta: f64,
    delta_rel_pct: f64,
    perf_meta: f64,
    delta_meta: f64,
    delta_rel_meta_pct: f64,
}

#[derive(Serialize)]
struct TTestRow<'a> {
    modality: &'a str,
    n: usize,
    mean_diff: f64,
    ci_low: f64,
    ci_high: f64,
    t_stat: f64,
    p_value: f64,
}

#[derive(Serialize)]
struct RegressionRow<'a> {
    modality: &'a str,
    feature: &'a str,
    coefficient: f64,
    p_value: f64,
    n: usize,
    significant: bool,
    hypothesis: &'a str,
}

fn regression_rows(analysis: &Analysis) -> Vec<RegressionRow<'_>> {
    let mut rows = Vec::new();
    for m in &analysis.hypotheses.per_modality {
        for (reg, support) in [
            (&m.sigma, m.sigma_support),
            (&m.entropy, m.entropy_support),
        ] {
            rows.push(RegressionRow {
                modality: &m.modality,
                feature: reg.feature.name(),
                coefficient: reg.coefficient,
                p_value: reg.p_value,
                n: reg.n,
                significant: reg.significant(),
                hypothesis: support.name(),
            });
        }
    }
    rows
}

/// Writes all analysis artifacts into `out_dir` and returns their paths.
pub fn write_analysis(out_dir: &Path, tau: Option<f64>, analysis: &Analysis) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    // report.json, full precision.
    let json_path = out_dir.join("report.json");
    let report = ReportJson {
        schema_version: REPORT_SCHEMA_VERSION,
        tau,
        table: analysis.table.as_ref().map(|rows| {
            rows.iter()
                .map(|r| TableRow {
                    modality: &r.modality,
                    n_images: r.n_images,
                    perf_raw: r.perf_raw,
                    perf_edge: r.perf_edge,
                    delta: r.delta,
                    delta_rel_pct: r.delta_rel,
                    perf_meta: r.perf_meta,
                    delta_meta: r.delta_meta,
                    delta_rel_meta_pct: r.delta_rel_meta,
                })
                .collect()
        }),
        ttests: analysis
            .ttests
            .iter()
            .map(|(modality, t)| TTestRow {
                modality,
                n: t.n,
                mean_diff: t.mean_diff,
                ci_low: t.ci_low,
                ci_high: t.ci_high,
                t_stat: t.t_stat,
                p_value: t.p_value,
            })
            .collect(),
        regressions: regression_rows(analysis),
        sigma_divergent: analysis.hypotheses.sigma_divergent,
        entropy_divergent: analysis.hypotheses.entropy_divergent,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);

    // report.csv: the table with two-decimal formatting.
    if let Some(rows) = &analysis.table {
        let path = out_dir.join("report.csv");
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
        let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
        w.write_record([
            "modality",
            "n_images",
            "perf_raw",
            "perf_edge",
            "delta",
            "delta_rel_pct",
            "perf_meta",
            "delta_meta",
            "delta_rel_meta_pct",
        ])
        .map_err(io_err)?;
        for r in rows {
            w.write_record([
                r.modality.as_str(),
                &r.n_images.to_string(),
                &format!("{:.2}", r.perf_raw),
                &format!("{:.2}", r.perf_edge),
                &format!("{:+.2}", r.delta),
                &format!("{:+.2}", r.delta_rel),
                &format!("{:.2}", r.perf_meta),
                &format!("{:+.2}", r.delta_meta),
                &format!("{:+.2}", r.delta_rel_meta),
            ])
            .map_err(io_err)?;
        }
        w.flush()
            .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))?;
        written.push(path);
    }

    // ttests.csv, full precision.
    let path = out_dir.join("ttests.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record(["modality", "n", "mean_diff", "ci_low", "ci_high", "t_stat", "p_value"])
        .map_err(io_err)?;
    for (modality, t) in &analysis.ttests {
        w.write_record([
            modality.as_str(),
            &t.n.to_string(),
            &format!("{}", t.mean_diff),
            &format!("{}", t.ci_low),
            &format!("{}", t.ci_high),
            &format!("{}", t.t_stat),
            &format!("{}", t.p_value),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))?;
    written.push(path);

    // regression.csv.
    let path = out_dir.join("regression.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record([
        "modality",
        "feature",
        "coefficient",
        "p_value",
        "n",
        "significant",
        "hypothesis",
    ])
    .map_err(io_err)?;
    for r in regression_rows(analysis) {
        w.write_record([
            r.modality,
            r.feature,
            &format!("{}", r.coefficient),
            &format!("{}", r.p_value),
            &r.n.to_string(),
            if r.significant { "1" } else { "0" },
            r.hypothesis,
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))?;
    written.push(path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use edgeroute_core::features::FeatureVector;
    use edgeroute_core::metrics::LossValue;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    fn synth_records() -> Vec<EvalRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut out = Vec::new();
        for modality in ["alpha", "beta"] {
            for i in 0..20 {
                let raw = rng.gen_range(20.0..80.0);
                let edge = rng.gen_range(20.0..80.0);
                out.push(EvalRecord::new(
                    format!("{modality}-{i}"),
                    modality.to_string(),
                    FeatureVector {
                        sigma: rng.gen_range(1.0..100.0),
                        entropy: rng.gen_range(0.5..7.5),
                    },
                    raw,
                    edge,
                    LossValue {
                        bce: rng.gen_range(0.0..1.0),
                        dice: 0.1,
                        iou: 0.1,
                        total: 0.0,
                    },
                    LossValue {
                        bce: rng.gen_range(0.0..1.0),
                        dice: 0.1,
                        iou: 0.1,
                        total: 0.0,
                    },
                ));
            }
        }
        out
    }

    #[test]
    fn analysis_writes_all_artifacts() {
        let records = synth_records();
        let metas: Vec<f64> = records.iter().map(|r| r.perf_raw.max(r.perf_edge)).collect();
        let analysis = analyze_records(&records, Some((&records, &metas))).unwrap();
        assert_eq!(analysis.ttests.len(), 3); // two modalities + pooled
        let table = analysis.table.as_ref().unwrap();
        assert_eq!(table.len(), 3); // two modalities + aggregate
        assert_eq!(table.last().unwrap().modality, AGGREGATE_LABEL);

        let dir = tempdir().unwrap();
        let written = write_analysis(dir.path(), Some(2.0), &analysis).unwrap();
        assert_eq!(written.len(), 4);
        let json = fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"table\""));
        let csv_text = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv_text.starts_with("modality,n_images,"));
        assert!(fs::read_to_string(dir.path().join("ttests.csv"))
            .unwrap()
            .contains(AGGREGATE_LABEL));
        assert!(fs::read_to_string(dir.path().join("regression.csv"))
            .unwrap()
            .contains("entropy"));
    }

    #[test]
    fn analysis_without_meta_omits_table() {
        let records = synth_records();
        let analysis = analyze_records(&records, None).unwrap();
        assert!(analysis.table.is_none());
        let dir = tempdir().unwrap();
        let written = write_analysis(dir.path(), None, &analysis).unwrap();
        // report.json, ttests.csv, regression.csv; no report.csv.
        assert_eq!(written.len(), 3);
        assert!(!dir.path().join("report.csv").exists());
    }
}
