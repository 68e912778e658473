//! Image meta-features: intensity standard deviation and histogram entropy.
//!
//! Both statistics are computed on the raw (never edge-enhanced) image and
//! together form the feature vector the router decides on.

use crate::grid::Image;

/// Meta-feature vector of one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// Population standard deviation of pixel intensities, in intensity units.
    pub sigma: f64,
    /// Shannon entropy of the 256-bin intensity histogram, in bits.
    pub entropy: f64,
}

/// Which meta-feature a rule or regression refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Feature {
    Sigma,
    Entropy,
}

impl Feature {
    pub const ALL: [Feature; 2] = [Feature::Sigma, Feature::Entropy];

    pub fn value(self, features: &FeatureVector) -> f64 {
        match self {
            Feature::Sigma => features.sigma,
            Feature::Entropy => features.entropy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Sigma => "sigma",
            Feature::Entropy => "entropy",
        }
    }
}

fn histogram(image: &Image) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in image.data() {
        hist[p as usize] += 1;
    }
    hist
}

/// Population standard deviation of pixel intensities (divisor `m * n`,
/// not `m * n - 1`).
pub fn std_dev(image: &Image) -> f64 {
    let hist = histogram(image);
    let n = image.len() as f64;
    let sum: u64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| k as u64 * c)
        .sum();
    let mean = sum as f64 / n;
    let mut var = 0.0;
    for (k, &c) in hist.iter().enumerate() {
        if c > 0 {
            let d = k as f64 - mean;
            var += c as f64 * d * d;
        }
    }
    libm::sqrt(var / n)
}

/// Shannon entropy of the 256-bin intensity histogram, in bits. Empty bins
/// contribute zero.
pub fn entropy(image: &Image) -> f64 {
    let hist = histogram(image);
    let n = image.len() as f64;
    let mut h = 0.0;
    for &c in hist.iter() {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * libm::log2(p);
        }
    }
    h
}

/// Computes both meta-features of the raw image.
pub fn extract_features(image: &Image) -> FeatureVector {
    FeatureVector {
        sigma: std_dev(image),
        entropy: entropy(image),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Independent oracles: direct per-pixel evaluation of the defining
    // formulas, no histogram.
    fn std_dev_oracle(image: &Image) -> f64 {
        let n = image.len() as f64;
        let mean = image.data().iter().map(|&p| f64::from(p)).sum::<f64>() / n;
        let ss = image
            .data()
            .iter()
            .map(|&p| {
                let d = f64::from(p) - mean;
                d * d
            })
            .sum::<f64>();
        libm::sqrt(ss / n)
    }

    fn entropy_oracle(image: &Image) -> f64 {
        let n = image.len() as f64;
        let mut counts = [0u32; 256];
        for &p in image.data() {
            counts[p as usize] += 1;
        }
        -counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = f64::from(c) / n;
                p * libm::log2(p)
            })
            .sum::<f64>()
    }

    #[test]
    fn constant_image_has_zero_features() {
        let img = Image::constant(5, 4, 100);
        let fv = extract_features(&img);
        assert_eq!(fv.sigma, 0.0);
        assert_eq!(fv.entropy, 0.0);
    }

    #[test]
    fn two_level_fixture() {
        // [0, 0, 255, 255]: sigma = 127.5, entropy = 1 bit.
        let img = Image::new(2, 2, vec![0, 0, 255, 255]).unwrap();
        let fv = extract_features(&img);
        assert_eq!(fv.sigma, 127.5);
        assert_eq!(fv.entropy, 1.0);
    }

    #[test]
    fn std_dev_hand_evaluated() {
        // [10, 20, 30, 40]: mean 25, variance (225+25+25+225)/4 = 125.
        let img = Image::new(4, 1, vec![10, 20, 30, 40]).unwrap();
        assert_relative_eq!(std_dev(&img), libm::sqrt(125.0), max_relative = 1e-12);
    }

    #[test]
    fn entropy_hand_evaluated() {
        // [0, 0, 0, 255]: -(3/4 log2 3/4 + 1/4 log2 1/4).
        let img = Image::new(4, 1, vec![0, 0, 0, 255]).unwrap();
        let expected = -(0.75 * libm::log2(0.75) + 0.25 * libm::log2(0.25));
        assert_relative_eq!(entropy(&img), expected, max_relative = 1e-12);
        assert_relative_eq!(entropy(&img), 0.8112781244591328, max_relative = 1e-12);
    }

    #[test]
    fn matches_oracles_on_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let img = Image::from_fn(16, 16, |_, _| rng.gen::<u8>());
            assert_relative_eq!(std_dev(&img), std_dev_oracle(&img), max_relative = 1e-9);
            assert_relative_eq!(entropy(&img), entropy_oracle(&img), max_relative = 1e-9);
        }
    }

    #[test]
    fn invariant_under_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let img = Image::from_fn(8, 8, |_, _| rng.gen::<u8>());
        let mut shuffled: Vec<u8> = img.data().to_vec();
        // Deterministic scramble: rotate and interleave.
        shuffled.rotate_left(17);
        shuffled.reverse();
        let img2 = Image::new(8, 8, shuffled).unwrap();
        assert_eq!(std_dev(&img), std_dev(&img2));
        assert_eq!(entropy(&img), entropy(&img2));
    }

    #[test]
    fn std_dev_scales_affinely() {
        // x -> 3x + 10 without clipping: sigma triples.
        let img = Image::new(4, 1, vec![10, 20, 30, 40]).unwrap();
        let mapped = Image::new(4, 1, vec![40, 70, 100, 130]).unwrap();
        assert_relative_eq!(std_dev(&mapped), 3.0 * std_dev(&img), max_relative = 1e-12);
        // Entropy is invariant under the bijective relabeling.
        assert_eq!(entropy(&img), entropy(&mapped));
    }

    #[test]
    fn entropy_bounded_by_distinct_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let img = Image::from_fn(12, 12, |_, _| rng.gen_range(0..5u8) * 50);
            let distinct = {
                let mut seen = [false; 256];
                for &p in img.data() {
                    seen[p as usize] = true;
                }
                seen.iter().filter(|&&s| s).count()
            };
            let h = entropy(&img);
            assert!(h >= 0.0);
            assert!(h <= libm::log2(distinct as f64) + 1e-12);
            assert!(h <= 8.0);
        }
    }

    #[test]
    fn feature_accessors() {
        let fv = FeatureVector {
            sigma: 2.0,
            entropy: 5.0,
        };
        assert_eq!(Feature::Sigma.value(&fv), 2.0);
        assert_eq!(Feature::Entropy.value(&fv), 5.0);
        assert_eq!(Feature::Sigma.name(), "sigma");
    }
}
