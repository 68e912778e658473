//! Command-line interface: subcommands for each pipeline stage plus the
//! end-to-end `pipeline` driver.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use edgeroute_core::features::extract_features;
use edgeroute_core::grid::ProbMap;
use edgeroute_core::metrics::{loss, perf};
use edgeroute_core::router::{train_router, Selection};

use crate::error::{Error, Result};
use crate::imageio::{load_image, load_mask, save_image, save_mask_png};
use crate::manifest::DatasetManifest;
use crate::pipeline::{parse_edge_op, run_pipeline};
use crate::predictors::PredictorSpec;
use crate::records::{load_meta, load_records, save_features, save_scores, ScoreRow, SplitTag};
use crate::rulefile::{load_rule, save_rule};
use crate::synthgen::{generate_into, load_synth_file};

#[derive(Parser)]
#[command(
    name = "edgeroute",
    version,
    about = "Edge-enhanced segmentation routing: enhancement, metrics, routing, analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Apply an edge operator to one image or to every image in a manifest
    Enhance {
        /// kirsch, sobel, or prewitt
        #[arg(long)]
        op: String,
        /// Linear output scale; defaults to the operator's full-range scale
        #[arg(long)]
        scale: Option<f64>,
        /// Input image (.pgm/.png) or manifest (.csv)
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory; filenames mirror the sources
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute meta-features (sigma, entropy) for every manifest image
    Features {
        /// Dataset manifest
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV (image,modality,sigma,entropy)
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against ground truth
    Score {
        /// Predictor: otsu, edge-otsu, pred_raw, pred_edge, or a mask directory
        #[arg(long)]
        pred: String,
        /// Dataset manifest with ground-truth masks
        #[arg(long)]
        gt: PathBuf,
        /// NSD tolerance in pixels
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        /// Output CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the routing rule from an evaluation records CSV
    RouteTrain {
        #[arg(long)]
        records: PathBuf,
        /// Use only rows with this split tag: train, holdout, or all
        #[arg(long, default_value = "all")]
        split: String,
        /// Output rule JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Route every manifest image and write the selected predictor's mask
    RouteApply {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Raw-pipeline predictor spec
        #[arg(long)]
        raw: String,
        /// Edge-pipeline predictor spec
        #[arg(long)]
        edge: String,
        /// Output directory for masks and routing.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistical reports from an evaluation records CSV
    Analyze {
        #[arg(long)]
        records: PathBuf,
        /// meta.csv with routed per-image performances (enables the table)
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset with ground truth
    Synth {
        /// Synth spec TOML
        #[arg(long)]
        spec: PathBuf,
        /// Output directory (images/, masks/, manifest.csv)
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline from a config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enhance {
            op,
            scale,
            input,
            out,
        } => enhance(&op, scale, &input, &out),
        Command::Features { input, out } => features(&input, &out),
        Command::Score { pred, gt, tau, out } => score(&pred, &gt, tau, &out),
        Command::RouteTrain {
            records,
            split,
            out,
        } => route_train(&records, &split, &out),
        Command::RouteApply {
            rule,
            input,
            raw,
            edge,
            out,
        } => route_apply(&rule, &input, &raw, &edge, &out),
        Command::Analyze { records, meta, out } => analyze(&records, meta.as_deref(), &out),
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::Pipeline { config, out } => {
            let run = run_pipeline(&config, out.as_deref())?;
            println!("pipeline complete: {}", run.out_dir.display());
            for artifact in run.artifacts {
                println!("  {}", artifact.display());
            }
            Ok(())
        }
    }
}

fn is_manifest(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("csv")
}

fn enhance(op: &str, scale: Option<f64>, input: &Path, out: &Path) -> Result<()> {
    let op = parse_edge_op(op)?;
    if let Some(s) = scale {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Usage(format!("scale must be positive, got {s}")));
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let sources: Vec<PathBuf> = if is_manifest(input) {
        let manifest = DatasetManifest::load(input)?;
        manifest
            .entries
            .iter()
            .map(|e| manifest.image_path(e))
            .collect()
    } else {
        vec![input.to_path_buf()]
    };
    for source in sources {
        let image = load_image(&source)?;
        let enhanced = op.enhance(&image, scale);
        let name = source
            .file_name()
            .ok_or_else(|| Error::Usage(format!("no filename in {}", source.display())))?;
        save_image(&out.join(name), &enhanced)?;
    }
    Ok(())
}

fn features(input: &Path, out: &Path) -> Result<()> {
    let manifest = DatasetManifest::load(input)?;
    let mut rows = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let image = load_image(&manifest.image_path(entry))?;
        rows.push((entry.id(), entry.modality.clone(), extract_features(&image)));
    }
    save_features(out, &rows)
}

fn score(pred: &str, gt: &Path, tau: f64, out: &Path) -> Result<()> {
    if tau < 0.0 {
        return Err(Error::Usage(format!("tau must be non-negative, got {tau}")));
    }
    let manifest = DatasetManifest::load(gt)?;
    let predictor = PredictorSpec::parse(pred).build(
        &manifest,
        edgeroute_core::edge::EdgeOp::Kirsch,
        None,
    )?;
    let mut rows = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let id = entry.id();
        let with_id = |e: Error| Error::data(format!("{id}: {e}"));
        let image = load_image(&manifest.image_path(entry)).map_err(with_id)?;
        let gt_mask = load_mask(&manifest.gt_path(entry)).map_err(with_id)?;
        let mask = predictor
            .predict(&image, &id)
            .map_err(|e| with_id(e.into()))?;
        let s = perf(&mask, &gt_mask, tau).map_err(|e| with_id(e.into()))?;
        let l = loss(&ProbMap::from_mask(&mask), &gt_mask).map_err(|e| with_id(e.into()))?;
        rows.push(ScoreRow {
            image: id,
            modality: entry.modality.clone(),
            dsc: s.dsc,
            nsd: s.nsd,
            perf: s.perf,
            loss: l,
        });
    }
    save_scores(out, &rows)
}

fn route_train(records_path: &Path, split: &str, out: &Path) -> Result<()> {
    let split = SplitTag::parse(split)?;
    let records = load_records(records_path, split)?;
    let rule = train_router(&records)?;
    save_rule(out, &rule)?;
    println!("trained {} modality rules -> {}", rule.rules().len(), out.display());
    Ok(())
}

fn route_apply(rule_path: &Path, input: &Path, raw: &str, edge: &str, out: &Path) -> Result<()> {
    let rule = load_rule(rule_path)?;
    let manifest = DatasetManifest::load(input)?;
    let edge_op = edgeroute_core::edge::EdgeOp::Kirsch;
    let raw_pred = PredictorSpec::parse(raw).build(&manifest, edge_op, None)?;
    let edge_pred = PredictorSpec::parse(edge).build(&manifest, edge_op, None)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let routing_path = out.join("routing.csv");
    let mut w = csv::Writer::from_path(&routing_path)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", routing_path.display())))?;
    let io_err = |e: csv::Error| Error::data(format!("writing {}: {e}", routing_path.display()));
    w.write_record(["image", "modality", "sigma", "entropy", "selection"])
        .map_err(io_err)?;
    for entry in &manifest.entries {
        let id = entry.id();
        let with_id = |e: Error| Error::data(format!("{id}: {e}"));
        let image = load_image(&manifest.image_path(entry)).map_err(with_id)?;
        let fv = extract_features(&image);
        let selection = rule.route(&entry.modality, &fv);
        let mask = match selection {
            Selection::Raw => raw_pred.predict(&image, &id),
            Selection::Edge => edge_pred.predict(&image, &id),
        }
        .map_err(|e| with_id(e.into()))?;
        save_mask_png(&out.join(format!("{id}.png")), &mask)?;
        w.write_record([
            id.as_str(),
            entry.modality.as_str(),
            &format!("{}", fv.sigma),
            &format!("{}", fv.entropy),
            match selection {
                Selection::Raw => "raw",
                Selection::Edge => "edge",
            },
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::data(format!("flushing {}: {e}", routing_path.display())))
}

fn analyze(records_path: &Path, meta: Option<&Path>, out: &Path) -> Result<()> {
    let records = load_records(records_path, SplitTag::All)?;
    let meta_rows = meta.map(load_meta).transpose()?;
    let holdout = match &meta_rows {
        Some(rows) => {
            let mut subset = Vec::with_capacity(rows.len());
            let mut perfs = Vec::with_capacity(rows.len());
            for (image, _, perf_meta) in rows {
                let record = records
                    .iter()
                    .find(|r| &r.image_id == image)
                    .ok_or_else(|| {
                        Error::data(format!("meta row {image} has no matching record"))
                    })?;
                subset.push(record.clone());
                perfs.push(*perf_meta);
            }
            Some((subset, perfs))
        }
        None => None,
    };
    let analysis = crate::analysis::analyze_records(
        &records,
        holdout.as_ref().map(|(r, p)| (r.as_slice(), p.as_slice())),
    )?;
    crate::analysis::write_analysis(out, None, &analysis)?;
    Ok(())
}

fn synth(spec: &Path, out: &Path) -> Result<()> {
    let file = load_synth_file(spec)?;
    let manifest = generate_into(&file.modalities, out)?;
    println!(
        "generated {} images across {} modalities -> {}",
        manifest.entries.len(),
        manifest.modalities().len(),
        out.display()
    );
    Ok(())
}
