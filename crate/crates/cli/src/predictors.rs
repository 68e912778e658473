//! Predictor sources for the CLI: the built-in segmenters, precomputed mask
//! directories keyed by image stem, and per-entry manifest columns.

use std::collections::BTreeMap;
use std::path::PathBuf;

use edgeroute_core::edge::EdgeOp;
use edgeroute_core::grid::{Image, Mask};
use edgeroute_core::predict::{
    EdgeAssistedPredictor, OtsuPredictor, PredictError, Predictor,
};

use crate::error::{Error, Result};
use crate::imageio::load_mask;
use crate::manifest::DatasetManifest;

/// Which manifest column provides a precomputed mask path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredColumn {
    Raw,
    Edge,
}

/// A predictor specification as given on the command line or in a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictorSpec {
    /// Built-in Otsu segmenter on the raw image.
    Otsu,
    /// Built-in Otsu-on-edge-image segmenter with hole filling.
    EdgeOtsu,
    /// Directory of `<image-stem>.png` masks.
    Dir(PathBuf),
    /// Per-entry mask paths from the manifest.
    Column(PredColumn),
}

impl PredictorSpec {
    /// `otsu`, `edge-otsu`, `pred_raw`, `pred_edge`, or a directory path.
    pub fn parse(text: &str) -> PredictorSpec {
        match text {
            "otsu" => PredictorSpec::Otsu,
            "edge-otsu" => PredictorSpec::EdgeOtsu,
            "pred_raw" => PredictorSpec::Column(PredColumn::Raw),
            "pred_edge" => PredictorSpec::Column(PredColumn::Edge),
            path => PredictorSpec::Dir(PathBuf::from(path)),
        }
    }

    /// Builds the predictor. Column specs are resolved against the manifest
    /// up front so every entry must carry the column.
    pub fn build(
        &self,
        manifest: &DatasetManifest,
        edge_op: EdgeOp,
        edge_scale: Option<f64>,
    ) -> Result<Box<dyn Predictor>> {
        match self {
            PredictorSpec::Otsu => Ok(Box::new(OtsuPredictor)),
            PredictorSpec::EdgeOtsu => Ok(Box::new(EdgeAssistedPredictor {
                op: edge_op,
                scale: edge_scale,
            })),
            PredictorSpec::Dir(dir) => {
                if !dir.is_dir() {
                    return Err(Error::data(format!(
                        "predictor directory does not exist: {}",
                        dir.display()
                    )));
                }
                Ok(Box::new(MaskDirPredictor { dir: dir.clone() }))
            }
            PredictorSpec::Column(which) => {
                let mut masks = BTreeMap::new();
                for entry in &manifest.entries {
                    let path = match which {
                        PredColumn::Raw => manifest.pred_raw_path(entry),
                        PredColumn::Edge => manifest.pred_edge_path(entry),
                    };
                    let Some(path) = path else {
                        return Err(Error::data(format!(
                            "manifest entry {} lacks the {} column",
                            entry.id(),
                            match which {
                                PredColumn::Raw => "pred_raw",
                                PredColumn::Edge => "pred_edge",
                            }
                        )));
                    };
                    masks.insert(entry.id(), path);
                }
                Ok(Box::new(MaskMapPredictor {
                    id: match which {
                        PredColumn::Raw => "pred_raw",
                        PredColumn::Edge => "pred_edge",
                    },
                    masks,
                }))
            }
        }
    }
}

fn load_checked(path: &PathBuf, image: &Image, image_id: &str) -> std::result::Result<Mask, PredictError> {
    let mask = load_mask(path).map_err(|e| PredictError {
        detail: format!("{image_id}: {e}"),
    })?;
    if mask.width() != image.width() || mask.height() != image.height() {
        return Err(PredictError {
            detail: format!(
                "{image_id}: stored mask is {}x{}, image is {}x{}",
                mask.width(),
                mask.height(),
                image.width(),
                image.height()
            ),
        });
    }
    Ok(mask)
}

/// Masks stored as `<dir>/<image-stem>.png`.
struct MaskDirPredictor {
    dir: PathBuf,
}

impl Predictor for MaskDirPredictor {
    fn id(&self) -> &str {
        "precomputed"
    }

    fn predict(&self, image: &Image, image_id: &str) -> std::result::Result<Mask, PredictError> {
        let path = self.dir.join(format!("{image_id}.png"));
        if !path.is_file() {
            return Err(PredictError {
                detail: format!("no precomputed mask for {image_id} at {}", path.display()),
            });
        }
        load_checked(&path, image, image_id)
    }
}

/// Masks from explicit per-image paths (manifest columns).
struct MaskMapPredictor {
    id: &'static str,
    masks: BTreeMap<String, PathBuf>,
}

impl Predictor for MaskMapPredictor {
    fn id(&self) -> &str {
        self.id
    }

    fn predict(&self, image: &Image, image_id: &str) -> std::result::Result<Mask, PredictError> {
        let path = self.masks.get(image_id).ok_or_else(|| PredictError {
            detail: format!("no mask path recorded for {image_id}"),
        })?;
        load_checked(path, image, image_id)
    }
}

/// Runs a predictor over every manifest entry in order. Per-image failures
/// do not abort the batch; they are returned alongside the successes.
pub fn predict_batch(
    predictor: &dyn Predictor,
    manifest: &DatasetManifest,
) -> Result<(Vec<(String, Mask)>, Vec<(String, PredictError)>)> {
    let mut masks = Vec::new();
    let mut failures = Vec::new();
    for entry in &manifest.entries {
        let id = entry.id();
        let image = match crate::imageio::load_image(&manifest.image_path(entry)) {
            Ok(img) => img,
            Err(e) => {
                failures.push((
                    id,
                    PredictError {
                        detail: e.to_string(),
                    },
                ));
                continue;
            }
        };
        match predictor.predict(&image, &id) {
            Ok(mask) => masks.push((id, mask)),
            Err(e) => failures.push((id, e)),
        }
    }
    Ok((masks, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::{save_mask_png, save_pgm};
    use std::fs;
    use tempfile::tempdir;

    fn tiny_dataset(dir: &std::path::Path, n: usize) -> DatasetManifest {
        let mut rows = String::from("image,gt,modality\n");
        for i in 0..n {
            let img = Image::from_fn(4, 4, |x, _| if x < 2 { 10 } else { 240 });
            save_pgm(&dir.join(format!("img{i}.pgm")), &img).unwrap();
            let gt = Mask::from_fn(4, 4, |x, _| x >= 2);
            save_mask_png(&dir.join(format!("gt{i}.png")), &gt).unwrap();
            rows.push_str(&format!("img{i}.pgm,gt{i}.png,us\n"));
        }
        let path = dir.join("manifest.csv");
        fs::write(&path, rows).unwrap();
        DatasetManifest::load(&path).unwrap()
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(PredictorSpec::parse("otsu"), PredictorSpec::Otsu);
        assert_eq!(PredictorSpec::parse("edge-otsu"), PredictorSpec::EdgeOtsu);
        assert_eq!(
            PredictorSpec::parse("pred_raw"),
            PredictorSpec::Column(PredColumn::Raw)
        );
        assert_eq!(
            PredictorSpec::parse("masks/"),
            PredictorSpec::Dir(PathBuf::from("masks/"))
        );
    }

    #[test]
    fn dir_predictor_returns_stored_mask_verbatim() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 1);
        let masks_dir = dir.path().join("masks");
        fs::create_dir(&masks_dir).unwrap();
        let stored = Mask::from_fn(4, 4, |x, y| x == y);
        save_mask_png(&masks_dir.join("img0.png"), &stored).unwrap();

        let pred = PredictorSpec::Dir(masks_dir)
            .build(&manifest, EdgeOp::Kirsch, None)
            .unwrap();
        let image = crate::imageio::load_image(&manifest.image_path(&manifest.entries[0])).unwrap();
        let out = pred.predict(&image, "img0").unwrap();
        assert_eq!(out, stored);
    }

    #[test]
    fn batch_reports_failures_and_continues() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 3);
        let masks_dir = dir.path().join("masks");
        fs::create_dir(&masks_dir).unwrap();
        // Masks for entries 0 and 2 only.
        let m = Mask::from_fn(4, 4, |x, _| x >= 2);
        save_mask_png(&masks_dir.join("img0.png"), &m).unwrap();
        save_mask_png(&masks_dir.join("img2.png"), &m).unwrap();

        let pred = PredictorSpec::Dir(masks_dir)
            .build(&manifest, EdgeOp::Kirsch, None)
            .unwrap();
        let (ok, failed) = predict_batch(pred.as_ref(), &manifest).unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok[0].0, "img0");
        assert_eq!(ok[1].0, "img2");
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].0, "img1");
        assert!(failed[0].1.detail.contains("no precomputed mask"));

        // Determinism: an identical run gives identical output.
        let (ok2, failed2) = predict_batch(pred.as_ref(), &manifest).unwrap();
        assert_eq!(ok, ok2);
        assert_eq!(failed.len(), failed2.len());
    }

    #[test]
    fn empty_manifest_batch_is_empty() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "image,gt,modality\n").unwrap();
        let manifest = DatasetManifest::load(&path).unwrap();
        let (ok, failed) = predict_batch(&OtsuPredictor, &manifest).unwrap();
        assert!(ok.is_empty() && failed.is_empty());
    }

    #[test]
    fn mismatched_mask_shape_is_an_error() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 1);
        let masks_dir = dir.path().join("masks");
        fs::create_dir(&masks_dir).unwrap();
        save_mask_png(
            &masks_dir.join("img0.png"),
            &Mask::from_fn(2, 2, |_, _| true),
        )
        .unwrap();
        let pred = PredictorSpec::Dir(masks_dir)
            .build(&manifest, EdgeOp::Kirsch, None)
            .unwrap();
        let image = crate::imageio::load_image(&manifest.image_path(&manifest.entries[0])).unwrap();
        let err = pred.predict(&image, "img0").unwrap_err();
        assert!(err.detail.contains("2x2"));
    }
}
