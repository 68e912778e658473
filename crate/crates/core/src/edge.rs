//! Edge-enhancement operators: Kirsch compass filtering plus Sobel and
//! Prewitt gradient magnitude.
//!
//! All operators use replicate padding so the output has the source image's
//! shape, accumulate in signed 32-bit integers, and map responses to
//! `[0, 255]` through a fixed linear scale followed by rounding and clamping.
//! The scale is fixed (not per-image) so meta-features of enhanced images
//! stay comparable across a dataset.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::grid::Image;

/// Fixed Kirsch output scale. The largest possible compass response is
/// `3 * 5 * 255 = 3825`, so `1/15` maps the full response range onto
/// `[0, 255]` exactly.
pub const KIRSCH_SCALE: f64 = 1.0 / 15.0;

/// Fixed Sobel output scale; the largest gradient magnitude is
/// `4 * 255 * sqrt(2)`.
pub const SOBEL_SCALE: f64 = 1.0 / (4.0 * SQRT_2);

/// Fixed Prewitt output scale; the largest gradient magnitude is
/// `3 * 255 * sqrt(2)`.
pub const PREWITT_SCALE: f64 = 1.0 / (3.0 * SQRT_2);

/// Sobel horizontal-derivative stencil (row-major 3x3).
pub const SOBEL_X: [i32; 9] = [-1, 0, 1, -2, 0, 2, -1, 0, 1];
/// Sobel vertical-derivative stencil.
pub const SOBEL_Y: [i32; 9] = [-1, -2, -1, 0, 0, 0, 1, 2, 1];
/// Prewitt horizontal-derivative stencil.
pub const PREWITT_X: [i32; 9] = [-1, 0, 1, -1, 0, 1, -1, 0, 1];
/// Prewitt vertical-derivative stencil.
pub const PREWITT_Y: [i32; 9] = [-1, -1, -1, 0, 0, 0, 1, 1, 1];

/// The eight 3x3 compass kernels: one base kernel and its seven 45-degree
/// ring rotations. Every kernel's coefficients sum to zero.
pub fn kirsch_kernels() -> [[i32; 9]; 8] {
    // Flat indices of the 3x3 ring, clockwise from the top-left corner.
    const RING: [usize; 8] = [0, 1, 2, 5, 8, 7, 6, 3];
    const BASE_RING: [i32; 8] = [5, 5, 5, -3, -3, -3, -3, -3];
    let mut kernels = [[0i32; 9]; 8];
    for (step, kernel) in kernels.iter_mut().enumerate() {
        for i in 0..8 {
            kernel[RING[(i + step) % 8]] = BASE_RING[i];
        }
    }
    kernels
}

/// Available edge operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOp {
    Kirsch,
    Sobel,
    Prewitt,
}

impl EdgeOp {
    pub fn name(self) -> &'static str {
        match self {
            EdgeOp::Kirsch => "kirsch",
            EdgeOp::Sobel => "sobel",
            EdgeOp::Prewitt => "prewitt",
        }
    }

    /// The operator's full-range scale constant.
    pub fn default_scale(self) -> f64 {
        match self {
            EdgeOp::Kirsch => KIRSCH_SCALE,
            EdgeOp::Sobel => SOBEL_SCALE,
            EdgeOp::Prewitt => PREWITT_SCALE,
        }
    }

    /// Applies the operator with the given scale (`None` for the default).
    pub fn enhance(self, image: &Image, scale: Option<f64>) -> Image {
        let scale = scale.unwrap_or_else(|| self.default_scale());
        match self {
            EdgeOp::Kirsch => kirsch_enhance(image, scale),
            EdgeOp::Sobel => sobel_enhance(image, scale),
            EdgeOp::Prewitt => prewitt_enhance(image, scale),
        }
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    let r = libm::round(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// Calls `f(index, neighborhood)` for every pixel with its replicate-padded
/// 3x3 neighborhood in row-major order.
fn for_each_neighborhood(image: &Image, mut f: impl FnMut(usize, &[i32; 9])) {
    let w = image.width();
    let h = image.height();
    let data = image.data();
    let mut nb = [0i32; 9];
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = if y + 1 < h { y + 1 } else { h - 1 };
        let rows = [ym * w, y * w, yp * w];
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = if x + 1 < w { x + 1 } else { w - 1 };
            for (r, &row) in rows.iter().enumerate() {
                nb[r * 3] = i32::from(data[row + xm]);
                nb[r * 3 + 1] = i32::from(data[row + x]);
                nb[r * 3 + 2] = i32::from(data[row + xp]);
            }
            f(y * w + x, &nb);
        }
    }
}

#[inline]
fn dot9(a: &[i32; 9], b: &[i32; 9]) -> i32 {
    let mut s = 0;
    for i in 0..9 {
        s += a[i] * b[i];
    }
    s
}

/// Raw Kirsch response map: per pixel, the maximum of the eight compass
/// convolutions. Always non-negative (the eight responses sum to zero).
pub fn kirsch_response(image: &Image) -> Vec<i32> {
    let kernels = kirsch_kernels();
    let mut out = Vec::with_capacity(image.len());
    for_each_neighborhood(image, |_, nb| {
        let mut best = i32::MIN;
        for k in &kernels {
            let s = dot9(k, nb);
            if s > best {
                best = s;
            }
        }
        out.push(best);
    });
    out
}

/// Kirsch compass enhancement: maximum of the eight compass convolutions,
/// scaled and clamped to `[0, 255]`.
pub fn kirsch_enhance(image: &Image, scale: f64) -> Image {
    let raw = kirsch_response(image);
    let data = raw.iter().map(|&r| quantize(f64::from(r) * scale)).collect();
    Image::new(image.width(), image.height(), data).expect("same shape as input")
}

fn gradients(image: &Image, kx: &[i32; 9], ky: &[i32; 9]) -> (Vec<i32>, Vec<i32>) {
    let mut gx = Vec::with_capacity(image.len());
    let mut gy = Vec::with_capacity(image.len());
    for_each_neighborhood(image, |_, nb| {
        gx.push(dot9(kx, nb));
        gy.push(dot9(ky, nb));
    });
    (gx, gy)
}

/// Raw Sobel derivative maps `(gx, gy)`.
pub fn sobel_gradients(image: &Image) -> (Vec<i32>, Vec<i32>) {
    gradients(image, &SOBEL_X, &SOBEL_Y)
}

/// Raw Prewitt derivative maps `(gx, gy)`.
pub fn prewitt_gradients(image: &Image) -> (Vec<i32>, Vec<i32>) {
    gradients(image, &PREWITT_X, &PREWITT_Y)
}

fn magnitude_image(image: &Image, gx: Vec<i32>, gy: Vec<i32>, scale: f64) -> Image {
    let data = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| {
            let m = libm::sqrt(f64::from(x) * f64::from(x) + f64::from(y) * f64::from(y));
            quantize(m * scale)
        })
        .collect();
    Image::new(image.width(), image.height(), data).expect("same shape as input")
}

/// Sobel gradient magnitude `sqrt(gx^2 + gy^2)`, scaled and clamped.
pub fn sobel_enhance(image: &Image, scale: f64) -> Image {
    let (gx, gy) = sobel_gradients(image);
    magnitude_image(image, gx, gy, scale)
}

/// Prewitt gradient magnitude, scaled and clamped.
pub fn prewitt_enhance(image: &Image, scale: f64) -> Image {
    let (gx, gy) = prewitt_gradients(image);
    magnitude_image(image, gx, gy, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Independent oracle: the eight compass kernels transcribed literally
    // (not generated), evaluated by explicit clamped indexing.
    const ORACLE_KERNELS: [[i32; 9]; 8] = [
        [5, 5, 5, -3, 0, -3, -3, -3, -3],    // N
        [5, 5, -3, 5, 0, -3, -3, -3, -3],    // NW
        [5, -3, -3, 5, 0, -3, 5, -3, -3],    // W
        [-3, -3, -3, 5, 0, -3, 5, 5, -3],    // SW
        [-3, -3, -3, -3, 0, -3, 5, 5, 5],    // S
        [-3, -3, -3, -3, 0, 5, -3, 5, 5],    // SE
        [-3, -3, 5, -3, 0, 5, -3, -3, 5],    // E
        [-3, 5, 5, -3, 0, 5, -3, -3, -3],    // NE
    ];

    fn oracle_pixel(image: &Image, x: usize, y: usize) -> i32 {
        let at = |dx: i32, dy: i32| -> i32 {
            let xx = (x as i32 + dx).clamp(0, image.width() as i32 - 1) as usize;
            let yy = (y as i32 + dy).clamp(0, image.height() as i32 - 1) as usize;
            i32::from(image.get(xx, yy))
        };
        let nb = [
            at(-1, -1),
            at(0, -1),
            at(1, -1),
            at(-1, 0),
            at(0, 0),
            at(1, 0),
            at(-1, 1),
            at(0, 1),
            at(1, 1),
        ];
        ORACLE_KERNELS
            .iter()
            .map(|k| k.iter().zip(&nb).map(|(a, b)| a * b).sum())
            .max()
            .unwrap()
    }

    #[test]
    fn kernels_are_zero_sum_rotation_orbit() {
        let kernels = kirsch_kernels();
        assert_eq!(kernels.len(), 8);
        for k in &kernels {
            assert_eq!(k.iter().sum::<i32>(), 0, "kernel must be zero-sum");
            assert_eq!(k[4], 0, "center coefficient is zero");
        }
        // All eight are distinct and the set equals the hand-transcribed one.
        let mut generated: vec::Vec<[i32; 9]> = kernels.to_vec();
        let mut oracle: vec::Vec<[i32; 9]> = ORACLE_KERNELS.to_vec();
        generated.sort();
        generated.dedup();
        assert_eq!(generated.len(), 8);
        oracle.sort();
        assert_eq!(generated, oracle);
    }

    #[test]
    fn constant_images_give_zero_response() {
        for level in [0u8, 100, 255] {
            let img = Image::constant(7, 5, level);
            assert!(kirsch_enhance(&img, KIRSCH_SCALE)
                .data()
                .iter()
                .all(|&p| p == 0));
            assert!(sobel_enhance(&img, SOBEL_SCALE).data().iter().all(|&p| p == 0));
            assert!(prewitt_enhance(&img, PREWITT_SCALE)
                .data()
                .iter()
                .all(|&p| p == 0));
        }
    }

    #[test]
    fn step_edge_center_response() {
        // Left column 0, right two columns 255. The strongest compass
        // orientation at the center scores 2295 = 15 * 153.
        let img = Image::new(3, 3, vec![0, 255, 255, 0, 255, 255, 0, 255, 255]).unwrap();
        assert_eq!(oracle_pixel(&img, 1, 1), 2295);
        let raw = kirsch_response(&img);
        assert_eq!(raw[4], 2295);
        let out = kirsch_enhance(&img, KIRSCH_SCALE);
        assert_eq!(out.get(1, 1), 153);
    }

    #[test]
    fn matches_bruteforce_oracle_on_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let img = Image::from_fn(8, 8, |_, _| rng.gen::<u8>());
            let raw = kirsch_response(&img);
            for y in 0..8 {
                for x in 0..8 {
                    assert_eq!(raw[y * 8 + x], oracle_pixel(&img, x, y));
                }
            }
        }
    }

    #[test]
    fn kirsch_commutes_with_quarter_rotation() {
        // A 5x5 vertical step, then random images: enhancing the rotated
        // image equals rotating the enhanced image, exactly.
        let step = Image::from_fn(5, 5, |x, _| if x < 2 { 0 } else { 255 });
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut cases = vec![step];
        for _ in 0..20 {
            cases.push(Image::from_fn(6, 9, |_, _| rng.gen::<u8>()));
        }
        for img in &cases {
            let a = kirsch_enhance(&img.rotate90(), KIRSCH_SCALE);
            let b = kirsch_enhance(img, KIRSCH_SCALE).rotate90();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sobel_ramp_response() {
        // Unit horizontal ramp: |gx| = 8 at interior pixels, gy = 0.
        let img = Image::from_fn(6, 4, |x, _| x as u8);
        let (gx, gy) = sobel_gradients(&img);
        for y in 1..3 {
            for x in 1..5 {
                assert_eq!(gx[y * 6 + x], 8);
                assert_eq!(gy[y * 6 + x], 0);
            }
        }
    }

    #[test]
    fn prewitt_ramp_response() {
        let img = Image::from_fn(6, 4, |x, _| x as u8);
        let (gx, gy) = prewitt_gradients(&img);
        for y in 1..3 {
            for x in 1..5 {
                assert_eq!(gx[y * 6 + x], 6);
                assert_eq!(gy[y * 6 + x], 0);
            }
        }
    }

    #[test]
    fn sobel_rotation_swaps_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let img = Image::from_fn(7, 7, |_, _| rng.gen::<u8>());
        let a = sobel_enhance(&img.rotate90(), SOBEL_SCALE);
        let b = sobel_enhance(&img, SOBEL_SCALE).rotate90();
        assert_eq!(a, b);
    }

    #[test]
    fn prewitt_gx_antisymmetric_on_mirrored_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let img = Image::from_fn(8, 5, |_, _| rng.gen::<u8>());
        let mirrored = Image::from_fn(8, 5, |x, y| img.get(7 - x, y));
        let (gx, _) = prewitt_gradients(&img);
        let (gx_m, _) = prewitt_gradients(&mirrored);
        for y in 0..5 {
            for x in 0..8 {
                assert_eq!(gx[y * 8 + x], -gx_m[y * 8 + (7 - x)]);
            }
        }
    }

    #[test]
    fn constant_offset_leaves_responses_unchanged() {
        // Zero-sum kernels: adding +40 to every pixel (no clipping) changes
        // nothing.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let img = Image::from_fn(9, 6, |_, _| rng.gen_range(0..200u8));
        let shifted = Image::from_fn(9, 6, |x, y| img.get(x, y) + 40);
        assert_eq!(kirsch_response(&img), kirsch_response(&shifted));
        assert_eq!(sobel_gradients(&img), sobel_gradients(&shifted));
        assert_eq!(prewitt_gradients(&img), prewitt_gradients(&shifted));
    }

    #[test]
    fn output_shape_matches_input() {
        let img = Image::from_fn(11, 3, |x, y| (x * y) as u8);
        for op in [EdgeOp::Kirsch, EdgeOp::Sobel, EdgeOp::Prewitt] {
            let out = op.enhance(&img, None);
            assert_eq!(out.width(), 11);
            assert_eq!(out.height(), 3);
        }
    }
}
