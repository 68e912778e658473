//! Row-major pixel grids: 8-bit grayscale images, binary masks, and
//! per-pixel probability maps.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors from grid construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    /// Width or height is zero.
    EmptyDimensions,
    /// Buffer length does not equal `width * height`.
    LengthMismatch { expected: usize, actual: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EmptyDimensions => write!(f, "width and height must be at least 1"),
            GridError::LengthMismatch { expected, actual } => {
                write!(f, "buffer holds {actual} values, dimensions need {expected}")
            }
        }
    }
}

macro_rules! grid_common {
    ($name:ident, $elem:ty) => {
        impl $name {
            /// Wraps a row-major buffer, validating `width * height == data.len()`.
            pub fn new(width: usize, height: usize, data: Vec<$elem>) -> Result<Self, GridError> {
                if width == 0 || height == 0 {
                    return Err(GridError::EmptyDimensions);
                }
                let expected = width * height;
                if data.len() != expected {
                    return Err(GridError::LengthMismatch {
                        expected,
                        actual: data.len(),
                    });
                }
                Ok(Self {
                    width,
                    height,
                    data,
                })
            }

            /// Builds a grid by evaluating `f(x, y)` at every pixel.
            pub fn from_fn(
                width: usize,
                height: usize,
                mut f: impl FnMut(usize, usize) -> $elem,
            ) -> Self {
                assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
                let mut data = Vec::with_capacity(width * height);
                for y in 0..height {
                    for x in 0..width {
                        data.push(f(x, y));
                    }
                }
                Self {
                    width,
                    height,
                    data,
                }
            }

            pub fn width(&self) -> usize {
                self.width
            }

            pub fn height(&self) -> usize {
                self.height
            }

            /// Number of pixels (`width * height`).
            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            pub fn data(&self) -> &[$elem] {
                &self.data
            }

            pub fn into_data(self) -> Vec<$elem> {
                self.data
            }

            /// True when `other` has the same width and height.
            pub fn same_shape(&self, other: &Self) -> bool {
                self.width == other.width && self.height == other.height
            }

            #[inline]
            pub fn get(&self, x: usize, y: usize) -> $elem {
                debug_assert!(x < self.width && y < self.height);
                self.data[y * self.width + x]
            }

            #[inline]
            pub fn set(&mut self, x: usize, y: usize, value: $elem) {
                debug_assert!(x < self.width && y < self.height);
                self.data[y * self.width + x] = value;
            }
        }
    };
}

/// 2-D 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

grid_common!(Image, u8);

impl Image {
    /// All pixels set to `value`.
    pub fn constant(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Counter-clockwise 90-degree rotation; pixel (x, y) moves to
    /// (y, width - 1 - x) in the rotated frame.
    pub fn rotate90(&self) -> Image {
        Image::from_fn(self.height, self.width, |x, y| {
            self.get(self.width - 1 - y, x)
        })
    }
}

/// Binary segmentation mask with the same layout as [`Image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

grid_common!(Mask, bool);

impl Mask {
    /// All-background mask.
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        Mask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Mask of pixels strictly brighter than `threshold`.
    pub fn from_threshold(image: &Image, threshold: u8) -> Self {
        Mask {
            width: image.width,
            height: image.height,
            data: image.data.iter().map(|&p| p > threshold).collect(),
        }
    }
}

/// Per-pixel probabilities in `[0, 1]`, used as soft predictions in loss
/// computations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

grid_common!(ProbMap, f64);

impl ProbMap {
    /// Hard 0/1 probabilities from a binary mask.
    pub fn from_mask(mask: &Mask) -> Self {
        ProbMap {
            width: mask.width,
            height: mask.height,
            data: mask.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// ITU-R BT.601 luma: `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    let y = libm::round(y);
    if y >= 255.0 {
        255
    } else if y <= 0.0 {
        0
    } else {
        y as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_validates_length() {
        assert!(Image::new(2, 2, vec![0, 1, 2, 3]).is_ok());
        assert_eq!(
            Image::new(2, 2, vec![0, 1, 2]),
            Err(GridError::LengthMismatch {
                expected: 4,
                actual: 3
            })
        );
        assert_eq!(
            Image::new(0, 2, vec![]),
            Err(GridError::EmptyDimensions)
        );
    }

    #[test]
    fn rotate90_moves_pixels() {
        // 2x3:
        // 1 2
        // 3 4
        // 5 6
        let img = Image::new(2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let rot = img.rotate90();
        assert_eq!(rot.width(), 3);
        assert_eq!(rot.height(), 2);
        // CCW: right column becomes top row.
        assert_eq!(rot.data(), &[2, 4, 6, 1, 3, 5]);
        // Four rotations restore the original.
        let back = rot.rotate90().rotate90().rotate90();
        assert_eq!(back, img);
    }

    #[test]
    fn luma_matches_bt601() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        // 0.299*100 + 0.587*200 + 0.114*50 = 29.9 + 117.4 + 5.7 = 153.0
        assert_eq!(luma(100, 200, 50), 153);
        // Gray input is unchanged (weights sum to 1).
        for v in [0u8, 1, 17, 127, 128, 254, 255] {
            assert_eq!(luma(v, v, v), v);
        }
    }

    #[test]
    fn mask_count_and_threshold() {
        let img = Image::new(2, 2, vec![0, 127, 128, 255]).unwrap();
        let m = Mask::from_threshold(&img, 127);
        assert_eq!(m.data(), &[false, false, true, true]);
        assert_eq!(m.count(), 2);
    }
}
