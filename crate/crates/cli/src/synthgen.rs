//! Synthetic dataset generation: TOML modality specs, PNG image/mask output,
//! and a manifest tying them together.

use std::fs;
use std::path::Path;

use edgeroute_core::synth::{generate_dataset, Background, ShapeFamily, SynthSpec};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::imageio::{save_mask_png, save_png};
use crate::manifest::{DatasetManifest, ManifestEntry};

/// Top-level synth spec file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub schema_version: u32,
    pub modalities: Vec<ModalitySpec>,
}

/// One synthetic modality, mirroring the core spec.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalitySpec {
    pub name: String,
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    pub family: String,
    pub background: BackgroundSpec,
    pub contrast: i32,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackgroundSpec {
    Flat { level: u8 },
    GaussianNoise { level: u8, sigma: f64 },
    Gradient { low: u8, high: u8 },
}

impl ModalitySpec {
    pub fn to_core(&self) -> Result<SynthSpec> {
        let family = match self.family.as_str() {
            "disks" => ShapeFamily::Disks,
            "rectangles" => ShapeFamily::Rectangles,
            "blobs" => ShapeFamily::Blobs,
            other => {
                return Err(Error::data(format!(
                    "unknown shape family {other:?}; expected disks, rectangles, or blobs"
                )))
            }
        };
        let background = match self.background {
            BackgroundSpec::Flat { level } => Background::Flat { level },
            BackgroundSpec::GaussianNoise { level, sigma } => {
                Background::GaussianNoise { level, sigma }
            }
            BackgroundSpec::Gradient { low, high } => Background::Gradient { low, high },
        };
        if self.n_images < 1 {
            return Err(Error::data(format!(
                "modality {:?} needs at least one image",
                self.name
            )));
        }
        Ok(SynthSpec {
            modality: self.name.clone(),
            n_images: self.n_images,
            width: self.width,
            height: self.height,
            family,
            background,
            contrast: self.contrast,
            seed: self.seed,
        })
    }
}

/// Parses a synth spec TOML file.
pub fn load_synth_file(path: &Path) -> Result<SynthFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SynthFile = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if file.modalities.is_empty() {
        return Err(Error::format(path, "no modalities declared"));
    }
    Ok(file)
}

/// Generates every modality into `out_dir` (`images/`, `masks/`,
/// `manifest.csv`) and returns the loaded manifest.
pub fn generate_into(specs: &[ModalitySpec], out_dir: &Path) -> Result<DatasetManifest> {
    let images_dir = out_dir.join("images");
    let masks_dir = out_dir.join("masks");
    fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;
    fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;

    let mut entries = Vec::new();
    // Several blocks may share one modality name (mixed populations); keep
    // the per-name numbering continuous so stems stay unique.
    let mut next_index: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for spec in specs {
        let core_spec = spec.to_core()?;
        let offset = *next_index.get(spec.name.as_str()).unwrap_or(&0);
        for (i, (image, mask)) in generate_dataset(&core_spec).iter().enumerate() {
            let stem = format!("{}_{:03}", spec.name, offset + i);
            let image_rel = format!("images/{stem}.png");
            let mask_rel = format!("masks/{stem}.png");
            save_png(&out_dir.join(&image_rel), image)?;
            save_mask_png(&out_dir.join(&mask_rel), mask)?;
            entries.push(ManifestEntry {
                image: image_rel,
                gt: mask_rel,
                modality: spec.name.clone(),
                pred_raw: None,
                pred_edge: None,
            });
        }
        next_index.insert(spec.name.as_str(), offset + core_spec.n_images);
    }
    let manifest = DatasetManifest {
        dir: out_dir.to_path_buf(),
        entries,
    };
    manifest.save(&out_dir.join("manifest.csv"))?;
    Ok(manifest)
}
