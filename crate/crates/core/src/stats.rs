//! Paired t-test and simple ordinary least squares, backed by a
//! regularized-incomplete-beta implementation of the Student-t CDF.

use core::fmt;

/// Errors from statistical routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatError {
    /// Fewer samples than the test needs.
    SampleTooSmall { needed: usize, got: usize },
    /// Regression predictor takes a single value.
    ConstantPredictor,
}

impl fmt::Display for StatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatError::SampleTooSmall { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            StatError::ConstantPredictor => {
                write!(f, "predictor is constant; regression is degenerate")
            }
        }
    }
}

/// Two-sided paired t-test summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub mean_diff: f64,
    /// 95% confidence interval for the mean difference.
    pub ci_low: f64,
    pub ci_high: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Simple OLS fit of `y` on one predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub t_stat: f64,
    /// Two-sided p-value for slope = 0, df = n - 2.
    pub p_value: f64,
    pub n: usize,
}

// Lanczos approximation (g = 7, n = 9), canonical coefficients.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn ln_gamma(x: f64) -> f64 {
    // Values below 0.5 are not needed here (arguments are a, b, a+b with
    // a, b > 0.25), but the reflection keeps the function total.
    if x < 0.5 {
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(acc)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn betainc_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log(1.0 - x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of Student's t distribution with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    let tail = 0.5 * betainc_reg(0.5 * df, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided p-value for a t statistic.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    betainc_reg(0.5 * df, 0.5, df / (df + t * t))
}

/// Upper quantile of Student's t: the value `q` with `P(T <= q) = p`.
/// Bisection on the CDF; plenty accurate for confidence intervals.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile probability must be in (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + libm::fabs(lo)) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided paired t-test on per-item differences, with a 95% confidence
/// interval from the t distribution (df = n - 1). A zero-variance sample
/// degenerates to `p = 1` with a point interval.
pub fn paired_ttest(diffs: &[f64]) -> Result<TTestResult, StatError> {
    let n = diffs.len();
    if n < 2 {
        return Err(StatError::SampleTooSmall { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>();
    let var = ss / (nf - 1.0);
    if var == 0.0 {
        return Ok(TTestResult {
            mean_diff: mean,
            ci_low: mean,
            ci_high: mean,
            t_stat: 0.0,
            p_value: 1.0,
            n,
        });
    }
    let se = libm::sqrt(var / nf);
    let t = mean / se;
    let df = nf - 1.0;
    let p = t_two_sided_p(t, df);
    let margin = t_quantile(0.975, df) * se;
    Ok(TTestResult {
        mean_diff: mean,
        ci_low: mean - margin,
        ci_high: mean + margin,
        t_stat: t,
        p_value: p,
        n,
    })
}

/// Simple OLS of `y` on `x` with the closed-form slope
/// `sum((x - mx)(y - my)) / sum((x - mx)^2)` and a t-test on the slope.
/// A residual-free fit reports `p = 0` for a non-zero slope.
pub fn simple_ols(x: &[f64], y: &[f64]) -> Result<OlsFit, StatError> {
    let n = x.len();
    assert_eq!(n, y.len(), "predictor and response lengths differ");
    if n < 3 {
        return Err(StatError::SampleTooSmall { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx = x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>();
    if sxx == 0.0 {
        return Err(StatError::ConstantPredictor);
    }
    let sxy = x
        .iter()
        .zip(y)
        .map(|(xv, yv)| (xv - mx) * (yv - my))
        .sum::<f64>();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = x
        .iter()
        .zip(y)
        .map(|(xv, yv)| {
            let r = yv - (intercept + slope * xv);
            r * r
        })
        .sum::<f64>();
    let df = nf - 2.0;
    let sigma2 = ssr / df;
    let slope_se = libm::sqrt(sigma2 / sxx);
    let (t, p) = if slope_se == 0.0 {
        // Residual-free fit: infinitely significant unless the slope itself
        // is zero.
        if slope == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let t = slope / slope_se;
        (t, t_two_sided_p(t, df))
    };
    Ok(OlsFit {
        slope,
        intercept,
        slope_se,
        t_stat: t,
        p_value: p,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn t_cdf_matches_reference_values() {
        // Reference values computed with scipy.stats.t.cdf.
        let cases = [
            (0.5, 1.0, 0.6475836176504333),
            (1.0, 2.0, 0.7886751345948129),
            (2.0, 4.0, 0.9419417382415922),
            (4.242640687119285, 4.0, 0.9933822002181586),
            (-1.5, 7.0, 0.08864924349498501),
            (3.3, 29.0, 0.9987165428853957),
            (0.0, 5.0, 0.5),
            (10.0, 3.0, 0.9989358004707929),
            (-6.5, 12.0, 1.4682517843374038e-5),
            (2.116, 19.0, 0.9761130158046878),
        ];
        for (t, df, expected) in cases {
            assert_abs_diff_eq!(t_cdf(t, df), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        for (p, df) in [(0.975, 4.0), (0.9, 12.0), (0.025, 7.0), (0.6, 2.0)] {
            let q = t_quantile(p, df);
            assert_abs_diff_eq!(t_cdf(q, df), p, epsilon = 1e-9);
        }
        // scipy.stats.t.ppf(0.975, 4)
        assert_abs_diff_eq!(t_quantile(0.975, 4.0), 2.7764451051977987, epsilon = 1e-8);
    }

    #[test]
    fn paired_ttest_textbook_fixture() {
        // diffs 1..5: mean 3, sd sqrt(2.5), t = 4.2426, df 4.
        let r = paired_ttest(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.n, 5);
        assert_relative_eq!(r.mean_diff, 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.t_stat, 4.242640687119285, max_relative = 1e-12);
        // scipy: p = 0.013235599563682695
        assert_abs_diff_eq!(r.p_value, 0.013235599563682695, epsilon = 1e-10);
        // scipy CI: [1.036756838522439, 4.9632431614775605]
        assert_abs_diff_eq!(r.ci_low, 1.036756838522439, epsilon = 1e-7);
        assert_abs_diff_eq!(r.ci_high, 4.9632431614775605, epsilon = 1e-7);
        assert!(r.ci_low <= r.mean_diff && r.mean_diff <= r.ci_high);
    }

    #[test]
    fn paired_ttest_zero_diffs() {
        let r = paired_ttest(&[0.0; 6]).unwrap();
        assert_eq!(r.mean_diff, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!((r.ci_low, r.ci_high), (0.0, 0.0));
    }

    #[test]
    fn paired_ttest_negation_symmetry() {
        let diffs = [0.3, -1.2, 2.5, 0.9, -0.4, 1.8];
        let a = paired_ttest(&diffs).unwrap();
        let negated: Vec<f64> = diffs.iter().map(|d| -d).collect();
        let b = paired_ttest(&negated).unwrap();
        assert_eq!(b.mean_diff, -a.mean_diff);
        assert_eq!(b.p_value, a.p_value);
        assert_relative_eq!(b.ci_low, -a.ci_high, max_relative = 1e-12);
        assert_relative_eq!(b.ci_high, -a.ci_low, max_relative = 1e-12);
    }

    #[test]
    fn paired_ttest_needs_two_samples() {
        assert_eq!(
            paired_ttest(&[1.0]),
            Err(StatError::SampleTooSmall { needed: 2, got: 1 })
        );
    }

    #[test]
    fn ols_exact_three_point_line() {
        // (1,1), (2,3), (3,5): slope 2, perfect fit.
        let fit = simple_ols(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(fit.slope, 2.0);
        assert_eq!(fit.intercept, -1.0);
        assert_eq!(fit.p_value, 0.0);
    }

    #[test]
    fn ols_matches_scipy_fixture() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.1, 2.9, 4.2, 4.8, 6.1, 6.9];
        let fit = simple_ols(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 0.9771428571428572, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 1.08, max_relative = 1e-9);
        assert_relative_eq!(fit.slope_se, 0.0397953950776694, max_relative = 1e-9);
        assert_abs_diff_eq!(fit.p_value, 1.632537856614171e-5, epsilon = 1e-12);
    }

    #[test]
    fn ols_closed_form_slope_property() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let y: Vec<f64> = x.iter().map(|v| 1.5 * v + rng.gen_range(-1.0..1.0)).collect();
            let fit = simple_ols(&x, &y).unwrap();
            let mx = x.iter().sum::<f64>() / 20.0;
            let my = y.iter().sum::<f64>() / 20.0;
            let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
            assert_relative_eq!(fit.slope, num / den, max_relative = 1e-9);
        }
    }

    #[test]
    fn ols_rejects_degenerate_input() {
        assert_eq!(
            simple_ols(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatError::SampleTooSmall { needed: 3, got: 2 })
        );
        assert_eq!(
            simple_ols(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatError::ConstantPredictor)
        );
    }
}
