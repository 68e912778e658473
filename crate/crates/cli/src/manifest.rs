//! Dataset manifests: a CSV with header `image,gt,modality[,pred_raw,pred_edge]`.
//! Relative paths resolve against the manifest's directory; referenced files
//! must exist at load time.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use edgeroute_core::split::stratified_split_indices;

use crate::error::{Error, Result};

/// One dataset row. `image`/`gt`/`pred_*` keep the raw CSV strings so a
/// saved manifest round-trips byte-identically; the `*_path` accessors
/// resolve them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: String,
    pub gt: String,
    pub modality: String,
    pub pred_raw: Option<String>,
    pub pred_edge: Option<String>,
}

impl ManifestEntry {
    /// Image id: the image file stem.
    pub fn id(&self) -> String {
        Path::new(&self.image)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.image.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    /// Directory that relative entry paths resolve against.
    pub dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

fn resolve(dir: &Path, raw: &str) -> PathBuf {
    let p = Path::new(raw);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

impl DatasetManifest {
    pub fn image_path(&self, entry: &ManifestEntry) -> PathBuf {
        resolve(&self.dir, &entry.image)
    }

    pub fn gt_path(&self, entry: &ManifestEntry) -> PathBuf {
        resolve(&self.dir, &entry.gt)
    }

    pub fn pred_raw_path(&self, entry: &ManifestEntry) -> Option<PathBuf> {
        entry.pred_raw.as_ref().map(|p| resolve(&self.dir, p))
    }

    pub fn pred_edge_path(&self, entry: &ManifestEntry) -> Option<PathBuf> {
        entry.pred_edge.as_ref().map(|p| resolve(&self.dir, p))
    }

    pub fn modalities(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.modality.as_str()).collect()
    }

    /// Parses and validates a manifest CSV. Every referenced file must
    /// exist; modality tags must be non-empty.
    pub fn load(path: &Path) -> Result<Self> {
        let dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::data(format!("cannot open manifest {}: {e}", path.display())))?;

        let headers = reader
            .headers()
            .map_err(|e| Error::format(path, format!("bad manifest header: {e}")))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(c_image), Some(c_gt), Some(c_modality)) =
            (col("image"), col("gt"), col("modality"))
        else {
            return Err(Error::format(
                path,
                "manifest header must contain image,gt,modality",
            ));
        };
        let c_pred_raw = col("pred_raw");
        let c_pred_edge = col("pred_edge");

        let mut entries = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 2)))?;
            let field = |c: usize| row.get(c).unwrap_or("").to_string();
            let optional = |c: Option<usize>| {
                c.map(|c| field(c)).filter(|s| !s.is_empty())
            };
            let entry = ManifestEntry {
                image: field(c_image),
                gt: field(c_gt),
                modality: field(c_modality),
                pred_raw: optional(c_pred_raw),
                pred_edge: optional(c_pred_edge),
            };
            if entry.image.is_empty() || entry.gt.is_empty() {
                return Err(Error::format(path, format!("row {}: empty path", i + 2)));
            }
            if entry.modality.is_empty() {
                return Err(Error::format(path, format!("row {}: empty modality", i + 2)));
            }
            entries.push(entry);
        }

        let manifest = DatasetManifest { dir, entries };
        for entry in &manifest.entries {
            let mut required = vec![manifest.image_path(entry), manifest.gt_path(entry)];
            required.extend(manifest.pred_raw_path(entry));
            required.extend(manifest.pred_edge_path(entry));
            for p in required {
                if !p.is_file() {
                    return Err(Error::format(
                        path,
                        format!("referenced file does not exist: {}", p.display()),
                    ));
                }
            }
        }
        Ok(manifest)
    }

    /// Writes the manifest. The predictor columns are included when any
    /// entry carries them.
    pub fn save(&self, path: &Path) -> Result<()> {
        let with_preds = self
            .entries
            .iter()
            .any(|e| e.pred_raw.is_some() || e.pred_edge.is_some());
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| Error::data(format!("cannot write manifest {}: {e}", path.display())))?;
        let header: &[&str] = if with_preds {
            &["image", "gt", "modality", "pred_raw", "pred_edge"]
        } else {
            &["image", "gt", "modality"]
        };
        writer
            .write_record(header)
            .and_then(|_| {
                for e in &self.entries {
                    if with_preds {
                        writer.write_record([
                            e.image.as_str(),
                            e.gt.as_str(),
                            e.modality.as_str(),
                            e.pred_raw.as_deref().unwrap_or(""),
                            e.pred_edge.as_deref().unwrap_or(""),
                        ])?;
                    } else {
                        writer.write_record([
                            e.image.as_str(),
                            e.gt.as_str(),
                            e.modality.as_str(),
                        ])?;
                    }
                }
                writer.flush().map_err(csv::Error::from)
            })
            .map_err(|e| Error::data(format!("writing manifest {}: {e}", path.display())))
    }

    /// Stratified split: per modality, `ceil(fraction * count)` entries go
    /// to the first manifest. Deterministic for a fixed seed.
    pub fn stratified_split(&self, fraction: f64, seed: u64) -> Result<(Self, Self)> {
        let labels: Vec<&str> = self.entries.iter().map(|e| e.modality.as_str()).collect();
        let (first, second) = stratified_split_indices(&labels, fraction, seed)?;
        let pick = |indices: &[usize]| DatasetManifest {
            dir: self.dir.clone(),
            entries: indices.iter().map(|&i| self.entries[i].clone()).collect(),
        };
        Ok((pick(&first), pick(&second)))
    }
}
