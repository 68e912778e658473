//! The end-to-end pipeline: ingest (manifest or synthetic generation),
//! stratified split, evaluation of both pipelines, router training on the
//! training split, routed inference on the holdout, and the analysis
//! reports. Every stage failure is tagged with its stage name; an aborted
//! run leaves a `.partial` marker in the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use edgeroute_core::edge::EdgeOp;
use edgeroute_core::features::extract_features;
use edgeroute_core::metrics::perf;
use edgeroute_core::router::{meta_predict, train_router, RoutingRule};
use serde::Deserialize;

use crate::analysis::{analyze_records, write_analysis};
use crate::error::{Error, Result};
use crate::imageio::{load_image, load_mask, save_mask_png};
use crate::manifest::DatasetManifest;
use crate::predictors::PredictorSpec;
use crate::records::{build_eval_records, save_meta, save_records, MetaRow, SplitTag};
use crate::rulefile::save_rule;
use crate::synthgen::{generate_into, ModalitySpec};

pub const PIPELINE_SCHEMA_VERSION: u32 = 1;
pub const PARTIAL_MARKER: &str = ".partial";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub predictors: PredictorSection,
    #[serde(default)]
    pub edge: EdgeSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Existing dataset manifest; mutually exclusive with `synth`.
    pub manifest: Option<PathBuf>,
    /// Synthetic modalities to generate; mutually exclusive with `manifest`.
    pub synth: Option<Vec<ModalitySpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    /// Fraction of each modality used to train the router.
    pub router_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            router_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    pub raw: String,
    pub edge: String,
}

impl Default for PredictorSection {
    fn default() -> Self {
        PredictorSection {
            raw: "otsu".to_string(),
            edge: "edge-otsu".to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSection {
    pub op: String,
    pub scale: Option<f64>,
}

impl Default for EdgeSection {
    fn default() -> Self {
        EdgeSection {
            op: "kirsch".to_string(),
            scale: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub tau: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection { tau: 2.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

pub fn parse_edge_op(name: &str) -> Result<EdgeOp> {
    match name {
        "kirsch" => Ok(EdgeOp::Kirsch),
        "sobel" => Ok(EdgeOp::Sobel),
        "prewitt" => Ok(EdgeOp::Prewitt),
        other => Err(Error::Usage(format!(
            "unknown edge operator {other:?}; expected kirsch, sobel, or prewitt"
        ))),
    }
}

/// Loads and validates a pipeline config. Relative paths inside the config
/// resolve against the config file's directory.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: PipelineConfig =
        toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if cfg.schema_version != PIPELINE_SCHEMA_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported config schema version {}", cfg.schema_version),
        ));
    }
    match (&cfg.dataset.manifest, &cfg.dataset.synth) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage(
                "dataset.manifest and dataset.synth are mutually exclusive".to_string(),
            ))
        }
        (None, None) => {
            return Err(Error::Usage(
                "config needs dataset.manifest or at least one [[dataset.synth]] block".to_string(),
            ))
        }
        _ => {}
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    if let Some(m) = &mut cfg.dataset.manifest {
        if m.is_relative() {
            *m = base.join(&*m);
        }
    }
    if cfg.output.dir.is_relative() {
        cfg.output.dir = base.join(&cfg.output.dir);
    }
    parse_edge_op(&cfg.edge.op)?;
    Ok(cfg)
}

/// Artifact paths of a completed pipeline run.
#[derive(Debug)]
pub struct PipelineRun {
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the full pipeline for a config file; `out_override` replaces the
/// config's output directory.
pub fn run_pipeline(config_path: &Path, out_override: Option<&Path>) -> Result<PipelineRun> {
    let mut cfg = load_config(config_path).map_err(|e| e.in_stage("config"))?;
    if let Some(out) = out_override {
        cfg.output.dir = out.to_path_buf();
    }
    let out_dir = cfg.output.dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e).in_stage("config"))?;
    let marker = out_dir.join(PARTIAL_MARKER);
    fs::write(&marker, "pipeline in progress\n").map_err(|e| Error::io(&marker, e))?;

    let run = run_stages(&cfg, &out_dir)?;
    fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    Ok(run)
}

fn run_stages(cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineRun> {
    let mut artifacts = Vec::new();
    let edge_op = parse_edge_op(&cfg.edge.op)?;

    // ingest: load or generate the dataset.
    let manifest = (|| -> Result<DatasetManifest> {
        match (&cfg.dataset.manifest, &cfg.dataset.synth) {
            (Some(path), None) => DatasetManifest::load(path),
            (None, Some(specs)) => {
                let dataset_dir = out_dir.join("dataset");
                let manifest = generate_into(specs, &dataset_dir)?;
                artifacts.push(dataset_dir.join("manifest.csv"));
                Ok(manifest)
            }
            _ => Err(Error::Internal("dataset section already validated".to_string())),
        }
    })()
    .map_err(|e| e.in_stage("ingest"))?;

    // split: router-training vs holdout manifests.
    let (train, holdout) = (|| -> Result<_> {
        let (train, holdout) =
            manifest.stratified_split(cfg.split.router_fraction, cfg.split.seed)?;
        let train_path = out_dir.join("train_manifest.csv");
        let holdout_path = out_dir.join("holdout_manifest.csv");
        train.save(&train_path)?;
        holdout.save(&holdout_path)?;
        artifacts.push(train_path);
        artifacts.push(holdout_path);
        Ok((train, holdout))
    })()
    .map_err(|e| e.in_stage("split"))?;

    // evaluate: both pipelines on both splits.
    let (records_train, records_holdout) = (|| -> Result<_> {
        let raw_pred =
            PredictorSpec::parse(&cfg.predictors.raw).build(&manifest, edge_op, cfg.edge.scale)?;
        let edge_pred =
            PredictorSpec::parse(&cfg.predictors.edge).build(&manifest, edge_op, cfg.edge.scale)?;
        let records_train =
            build_eval_records(&train, raw_pred.as_ref(), edge_pred.as_ref(), cfg.metrics.tau)?;
        let records_holdout = build_eval_records(
            &holdout,
            raw_pred.as_ref(),
            edge_pred.as_ref(),
            cfg.metrics.tau,
        )?;
        let records_path = out_dir.join("records.csv");
        let tagged: Vec<_> = records_train
            .iter()
            .map(|r| (SplitTag::Train, r))
            .chain(records_holdout.iter().map(|r| (SplitTag::Holdout, r)))
            .collect();
        save_records(&records_path, &tagged)?;
        artifacts.push(records_path);
        Ok((records_train, records_holdout))
    })()
    .map_err(|e| e.in_stage("evaluate"))?;

    // route-train: discrete optimization on the training split.
    let rule = (|| -> Result<RoutingRule> {
        let rule = train_router(&records_train)?;
        let rule_path = out_dir.join("rule.json");
        save_rule(&rule_path, &rule)?;
        artifacts.push(rule_path);
        Ok(rule)
    })()
    .map_err(|e| e.in_stage("route-train"))?;

    // route-apply: routed inference on the holdout.
    let meta_perfs = (|| -> Result<Vec<f64>> {
        let raw_pred =
            PredictorSpec::parse(&cfg.predictors.raw).build(&holdout, edge_op, cfg.edge.scale)?;
        let edge_pred =
            PredictorSpec::parse(&cfg.predictors.edge).build(&holdout, edge_op, cfg.edge.scale)?;
        let masks_dir = out_dir.join("meta_masks");
        fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;

        let mut meta_rows = Vec::with_capacity(holdout.entries.len());
        let mut perfs = Vec::with_capacity(holdout.entries.len());
        for entry in &holdout.entries {
            let id = entry.id();
            let with_id = |e: Error| Error::data(format!("{id}: {e}"));
            let image = load_image(&holdout.image_path(entry)).map_err(with_id)?;
            let gt = load_mask(&holdout.gt_path(entry)).map_err(with_id)?;
            let mask = meta_predict(
                &rule,
                raw_pred.as_ref(),
                edge_pred.as_ref(),
                &image,
                &id,
                &entry.modality,
            )
            .map_err(|e| with_id(e.into()))?;
            save_mask_png(&masks_dir.join(format!("{id}.png")), &mask)?;
            let score = perf(&mask, &gt, cfg.metrics.tau).map_err(|e| with_id(e.into()))?;
            let selection = rule.route(&entry.modality, &extract_features(&image));
            perfs.push(score.perf);
            meta_rows.push(MetaRow {
                image: id,
                modality: entry.modality.clone(),
                selection,
                perf_meta: score.perf,
            });
        }
        let meta_path = out_dir.join("meta.csv");
        save_meta(&meta_path, &meta_rows)?;
        artifacts.push(meta_path);
        Ok(perfs)
    })()
    .map_err(|e| e.in_stage("route-apply"))?;

    // analyze: statistics over all records, performance table on the holdout.
    (|| -> Result<()> {
        let all: Vec<_> = records_train
            .iter()
            .chain(&records_holdout)
            .cloned()
            .collect();
        let analysis = analyze_records(&all, Some((&records_holdout, &meta_perfs)))?;
        let written = write_analysis(out_dir, Some(cfg.metrics.tau), &analysis)?;
        artifacts.extend(written);
        Ok(())
    })()
    .map_err(|e| e.in_stage("analyze"))?;

    Ok(PipelineRun {
        out_dir: out_dir.to_path_buf(),
        artifacts,
    })
}
