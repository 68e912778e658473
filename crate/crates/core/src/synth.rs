//! Synthetic image/mask generation with analytic ground truth. Background
//! texture and contrast knobs shape the sigma/entropy population of each
//! modality, so routing experiments have controllable signal.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::grid::{Image, Mask};

/// Foreground shape family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFamily {
    Disks,
    Rectangles,
    /// Union of a few overlapping disks.
    Blobs,
}

/// Background texture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    Flat { level: u8 },
    /// Flat level plus per-pixel gaussian noise on background pixels.
    GaussianNoise { level: u8, sigma: f64 },
    /// Horizontal linear ramp from `low` (left) to `high` (right).
    Gradient { low: u8, high: u8 },
}

/// One synthetic modality: `n_images` image/mask pairs drawn from a seeded
/// generator. Equal specs and seeds give identical datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub modality: String,
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    pub family: ShapeFamily,
    pub background: Background,
    /// Intensity offset of the foreground over the local background.
    pub contrast: i32,
    pub seed: u64,
}

fn clamp_u8(v: f64) -> u8 {
    let r = libm::round(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

fn sample_mask(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Mask {
    let w = spec.width;
    let h = spec.height;
    let min_dim = w.min(h) as f64;
    match spec.family {
        ShapeFamily::Disks => {
            let cx = rng.gen_range(0.3..0.7) * w as f64;
            let cy = rng.gen_range(0.3..0.7) * h as f64;
            let r = rng.gen_range(0.12..0.26) * min_dim;
            disk_mask(w, h, &[(cx, cy, r)])
        }
        ShapeFamily::Rectangles => {
            let x0 = rng.gen_range(0.15..0.45) * w as f64;
            let y0 = rng.gen_range(0.15..0.45) * h as f64;
            let bw = rng.gen_range(0.2..0.4) * w as f64;
            let bh = rng.gen_range(0.2..0.4) * h as f64;
            Mask::from_fn(w, h, |x, y| {
                let xf = x as f64;
                let yf = y as f64;
                xf >= x0 && xf < x0 + bw && yf >= y0 && yf < y0 + bh
            })
        }
        ShapeFamily::Blobs => {
            let n = rng.gen_range(3..=5);
            let cx = rng.gen_range(0.35..0.65) * w as f64;
            let cy = rng.gen_range(0.35..0.65) * h as f64;
            let mut disks = Vec::with_capacity(n);
            for _ in 0..n {
                let dx = rng.gen_range(-0.12..0.12) * w as f64;
                let dy = rng.gen_range(-0.12..0.12) * h as f64;
                let r = rng.gen_range(0.08..0.16) * min_dim;
                disks.push((cx + dx, cy + dy, r));
            }
            disk_mask(w, h, &disks)
        }
    }
}

fn disk_mask(w: usize, h: usize, disks: &[(f64, f64, f64)]) -> Mask {
    Mask::from_fn(w, h, |x, y| {
        disks.iter().any(|&(cx, cy, r)| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            dx * dx + dy * dy <= r * r
        })
    })
}

fn render(spec: &SynthSpec, mask: &Mask, rng: &mut ChaCha8Rng) -> Image {
    let w = spec.width;
    let h = spec.height;
    // Base background field without noise.
    let base = |x: usize| -> f64 {
        match spec.background {
            Background::Flat { level } | Background::GaussianNoise { level, .. } => f64::from(level),
            Background::Gradient { low, high } => {
                let t = if w > 1 { x as f64 / (w - 1) as f64 } else { 0.0 };
                f64::from(low) + t * (f64::from(high) - f64::from(low))
            }
        }
    };
    let noise = match spec.background {
        Background::GaussianNoise { sigma, .. } if sigma > 0.0 => {
            Some(Normal::new(0.0, sigma).expect("sigma is positive and finite"))
        }
        _ => None,
    };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut v = base(x);
            if mask.get(x, y) {
                v += f64::from(spec.contrast);
            } else if let Some(n) = &noise {
                v += n.sample(rng);
            }
            data.push(clamp_u8(v));
        }
    }
    Image::new(w, h, data).expect("buffer sized to dimensions")
}

/// Generates the spec's image/mask pairs. One sequential seeded generator
/// drives all sampling, so equal specs produce byte-identical datasets.
pub fn generate_dataset(spec: &SynthSpec) -> Vec<(Image, Mask)> {
    assert!(spec.n_images >= 1, "a dataset needs at least one image");
    assert!(
        spec.width >= 8 && spec.height >= 8,
        "synthetic images need at least 8x8 pixels"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.n_images)
        .map(|_| {
            let mask = sample_mask(spec, &mut rng);
            let image = render(spec, &mask, &mut rng);
            (image, mask)
        })
        .collect()
}
