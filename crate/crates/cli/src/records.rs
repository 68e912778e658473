//! Evaluation records: building them from a manifest plus two predictors,
//! and the CSV schemas for records, features, scores, and meta decisions.

use std::path::Path;

use edgeroute_core::features::{extract_features, FeatureVector};
use edgeroute_core::grid::ProbMap;
use edgeroute_core::metrics::{loss, perf, LossValue};
use edgeroute_core::predict::Predictor;
use edgeroute_core::router::{EvalRecord, Selection};

use crate::error::{Error, Result};
use crate::imageio::{load_image, load_mask};
use crate::manifest::DatasetManifest;

/// Which split a record came from, carried through `records.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Holdout,
    All,
}

impl SplitTag {
    pub fn name(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Holdout => "holdout",
            SplitTag::All => "all",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "train" => Ok(SplitTag::Train),
            "holdout" => Ok(SplitTag::Holdout),
            "all" => Ok(SplitTag::All),
            other => Err(Error::Usage(format!(
                "unknown split {other:?}; expected train, holdout, or all"
            ))),
        }
    }
}

/// One evaluated image per manifest entry: features from the raw image and
/// the performance plus loss of both pipelines. Any per-image failure aborts
/// with that image's id in the message.
pub fn build_eval_records(
    manifest: &DatasetManifest,
    raw_pred: &dyn Predictor,
    edge_pred: &dyn Predictor,
    tau: f64,
) -> Result<Vec<EvalRecord>> {
    let mut records = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let id = entry.id();
        let with_id = |e: Error| Error::data(format!("{id}: {e}"));
        let image = load_image(&manifest.image_path(entry)).map_err(with_id)?;
        let gt = load_mask(&manifest.gt_path(entry)).map_err(with_id)?;
        let features = extract_features(&image);

        let mask_raw = raw_pred.predict(&image, &id).map_err(|e| with_id(e.into()))?;
        let mask_edge = edge_pred.predict(&image, &id).map_err(|e| with_id(e.into()))?;

        let score_raw = perf(&mask_raw, &gt, tau).map_err(|e| with_id(e.into()))?;
        let score_edge = perf(&mask_edge, &gt, tau).map_err(|e| with_id(e.into()))?;
        let loss_raw = loss(&ProbMap::from_mask(&mask_raw), &gt).map_err(|e| with_id(e.into()))?;
        let loss_edge =
            loss(&ProbMap::from_mask(&mask_edge), &gt).map_err(|e| with_id(e.into()))?;

        records.push(EvalRecord::new(
            id,
            entry.modality.clone(),
            features,
            score_raw.perf,
            score_edge.perf,
            loss_raw,
            loss_edge,
        ));
    }
    Ok(records)
}

const RECORD_HEADER: [&str; 17] = [
    "image",
    "modality",
    "split",
    "sigma",
    "entropy",
    "perf_raw",
    "perf_edge",
    "delta",
    "label",
    "bce_raw",
    "dice_raw",
    "iou_raw",
    "total_raw",
    "bce_edge",
    "dice_edge",
    "iou_edge",
    "total_edge",
];

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes records with their split tags. Floats keep full precision.
pub fn save_records(
    path: &Path,
    records: &[(SplitTag, &EvalRecord)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record(RECORD_HEADER).map_err(io_err)?;
    for (split, r) in records {
        w.write_record([
            r.image_id.as_str(),
            r.modality.as_str(),
            split.name(),
            &fmt(r.features.sigma),
            &fmt(r.features.entropy),
            &fmt(r.perf_raw),
            &fmt(r.perf_edge),
            &fmt(r.delta),
            if r.label() { "1" } else { "0" },
            &fmt(r.loss_raw.bce),
            &fmt(r.loss_raw.dice),
            &fmt(r.loss_raw.iou),
            &fmt(r.loss_raw.total),
            &fmt(r.loss_edge.bce),
            &fmt(r.loss_edge.dice),
            &fmt(r.loss_edge.iou),
            &fmt(r.loss_edge.total),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))
}

/// Reads records, optionally keeping only one split.
pub fn load_records(path: &Path, filter: SplitTag) -> Result<Vec<EvalRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::data(format!("cannot open records {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, format!("missing column {name}")))
    };
    let c_image = col("image")?;
    let c_modality = col("modality")?;
    let c_split = headers.iter().position(|h| h == "split");
    let c_sigma = col("sigma")?;
    let c_entropy = col("entropy")?;
    let c_perf_raw = col("perf_raw")?;
    let c_perf_edge = col("perf_edge")?;
    let losses = [
        col("bce_raw")?,
        col("dice_raw")?,
        col("iou_raw")?,
        col("bce_edge")?,
        col("dice_edge")?,
        col("iou_edge")?,
    ];

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 2)))?;
        if let (Some(c), SplitTag::Train | SplitTag::Holdout) = (c_split, filter) {
            if row.get(c) != Some(filter.name()) {
                continue;
            }
        }
        let num = |c: usize| -> Result<f64> {
            row.get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(path, format!("row {}: bad number", i + 2)))
        };
        let text = |c: usize| row.get(c).unwrap_or("").to_string();
        let lv = |bce: f64, dice: f64, iou: f64| LossValue {
            bce,
            dice,
            iou,
            total: bce + dice + iou,
        };
        out.push(EvalRecord::new(
            text(c_image),
            text(c_modality),
            FeatureVector {
                sigma: num(c_sigma)?,
                entropy: num(c_entropy)?,
            },
            num(c_perf_raw)?,
            num(c_perf_edge)?,
            lv(num(losses[0])?, num(losses[1])?, num(losses[2])?),
            lv(num(losses[3])?, num(losses[4])?, num(losses[5])?),
        ));
    }
    Ok(out)
}

/// Writes `features.csv`: `image,modality,sigma,entropy`.
pub fn save_features(path: &Path, rows: &[(String, String, FeatureVector)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record(["image", "modality", "sigma", "entropy"])
        .map_err(io_err)?;
    for (image, modality, fv) in rows {
        w.write_record([image.as_str(), modality.as_str(), &fmt(fv.sigma), &fmt(fv.entropy)])
            .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))
}

/// One `scores.csv` row: quality and loss of one predictor on one image.
pub struct ScoreRow {
    pub image: String,
    pub modality: String,
    pub dsc: f64,
    pub nsd: f64,
    pub perf: f64,
    pub loss: LossValue,
}

/// Writes `scores.csv`:
/// `image,modality,dsc,nsd,perf,bce,dice_loss,iou_loss,total_loss`.
pub fn save_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record([
        "image",
        "modality",
        "dsc",
        "nsd",
        "perf",
        "bce",
        "dice_loss",
        "iou_loss",
        "total_loss",
    ])
    .map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.image.as_str(),
            r.modality.as_str(),
            &fmt(r.dsc),
            &fmt(r.nsd),
            &fmt(r.perf),
            &fmt(r.loss.bce),
            &fmt(r.loss.dice),
            &fmt(r.loss.iou),
            &fmt(r.loss.total),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))
}

/// One routed-inference decision with the realized performance.
pub struct MetaRow {
    pub image: String,
    pub modality: String,
    pub selection: Selection,
    pub perf_meta: f64,
}

/// Writes `meta.csv`: `image,modality,selection,perf_meta`.
pub fn save_meta(path: &Path, rows: &[MetaRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", path.display()));
    w.write_record(["image", "modality", "selection", "perf_meta"])
        .map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.image.as_str(),
            r.modality.as_str(),
            match r.selection {
                Selection::Raw => "raw",
                Selection::Edge => "edge",
            },
            &fmt(r.perf_meta),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", path.display())))
}

/// Reads `meta.csv` back as `(image, modality, perf_meta)` rows.
pub fn load_meta(path: &Path) -> Result<Vec<(String, String, f64)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::data(format!("cannot open meta {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 2)))?;
        let image = row.get(0).unwrap_or("").to_string();
        let modality = row.get(1).unwrap_or("").to_string();
        let perf: f64 = row
            .get(3)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, format!("row {}: bad perf_meta", i + 2)))?;
        out.push((image, modality, perf));
    }
    Ok(out)
}
