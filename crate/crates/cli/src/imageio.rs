//! Image and mask file I/O: binary PGM (P5, maxval 255) and 8-bit PNG
//! (grayscale or RGB). RGB inputs are collapsed with BT.601 luma; mask files
//! binarize at the 127/128 split.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use edgeroute_core::grid::{luma, Image, Mask};
use image::{ColorType, DynamicImage};

use crate::error::{Error, Result};

/// Binarization threshold for mask files: intensity > 127 is foreground.
pub const MASK_THRESHOLD: u8 = 127;

fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<Image> {
    let mut pos = 2; // past the "P5" magic
    let mut fields = [0usize; 3]; // width, height, maxval

    for field in fields.iter_mut() {
        // Skip whitespace and `#` comment lines between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::format(path, "truncated PGM header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(Error::format(path, "malformed PGM header token"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are ASCII");
        *field = text
            .parse()
            .map_err(|_| Error::format(path, "PGM header value out of range"))?;
    }

    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::format(
            path,
            format!("unsupported PGM maxval {maxval}, only 255 (8-bit) is supported"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero PGM dimensions"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(path, "missing PGM raster separator")),
    }
    let expected = width * height;
    let raster = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| Error::format(path, "PGM raster shorter than header implies"))?;
    Ok(Image::new(width, height, raster.to_vec()).expect("validated dimensions"))
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<Image> {
    let decoded = image::load_from_memory(bytes)
        .map_err(|e| Error::format(path, format!("PNG decode: {e}")))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::format(path, "zero PNG dimensions"));
    }
    match decoded {
        DynamicImage::ImageLuma8(gray) => {
            Ok(Image::new(w, h, gray.into_raw()).expect("luma8 buffer matches dimensions"))
        }
        DynamicImage::ImageRgb8(rgb) => {
            let data = rgb.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect();
            Ok(Image::new(w, h, data).expect("one luma byte per pixel"))
        }
        other => Err(Error::format(
            path,
            format!(
                "unsupported PNG pixel format {:?}; only 8-bit grayscale or RGB",
                other.color()
            ),
        )),
    }
}

/// Loads a PGM (P5) or PNG (8-bit gray or RGB) file as a grayscale image.
/// The format is sniffed from the file's magic bytes.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match bytes.get(..2) {
        Some(b"P5") => decode_pgm(path, &bytes),
        Some([0x89, b'P']) => decode_png(path, &bytes),
        _ => Err(Error::format(path, "not a P5 PGM or PNG file")),
    }
}

/// Loads a mask file: decoded as an image, then binarized at
/// [`MASK_THRESHOLD`].
pub fn load_mask(path: &Path) -> Result<Mask> {
    let image = load_image(path)?;
    Ok(Mask::from_threshold(&image, MASK_THRESHOLD))
}

/// Writes an image as binary PGM (P5, maxval 255).
pub fn save_pgm(path: &Path, image: &Image) -> Result<()> {
    let mut out = Vec::with_capacity(image.len() + 32);
    write!(out, "P5\n{} {}\n255\n", image.width(), image.height()).expect("in-memory write");
    out.extend_from_slice(image.data());
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes an image as 8-bit grayscale PNG.
pub fn save_png(path: &Path, image: &Image) -> Result<()> {
    image::save_buffer(
        path,
        image.data(),
        image.width() as u32,
        image.height() as u32,
        ColorType::L8,
    )
    .map_err(|e| Error::format(path, format!("PNG encode: {e}")))
}

/// Writes an image, picking the format from the extension (`.pgm` or `.png`).
pub fn save_image(path: &Path, image: &Image) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => save_pgm(path, image),
        Some("png") => save_png(path, image),
        other => Err(Error::format(
            path,
            format!("unsupported output extension {other:?}; use .pgm or .png"),
        )),
    }
}

/// Writes a mask as a 0/255 grayscale PNG.
pub fn save_mask_png(path: &Path, mask: &Mask) -> Result<()> {
    let image = Image::new(
        mask.width(),
        mask.height(),
        mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect(),
    )
    .expect("mask dimensions are valid");
    save_png(path, &image)
}
