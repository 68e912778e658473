//! Exact Euclidean distance transform and mask boundary extraction.
//!
//! The transform is the two-pass lower-envelope-of-parabolas method applied
//! per column then per row, which gives exact squared Euclidean distances to
//! the nearest seed pixel. Squared distances are kept as `f64` (integers for
//! integer grids) so callers can compare against a squared tolerance without
//! rounding.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Mask;

const INF: f64 = f64::MAX / 4.0;

/// 1-D squared distance transform of sampled function `f`, writing into `d`.
/// `v` and `z` are scratch buffers of length `n` and `n + 1`.
fn dt1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        if f[q] >= INF && f[v[k]] >= INF {
            // Both parabolas are at infinity; keep the earlier site.
            continue;
        }
        loop {
            let p = v[k];
            // Intersection of the parabolas rooted at p and q.
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        d[q] = dq * dq + f[v[k]];
    }
}

/// Exact squared Euclidean distance from every pixel to the nearest `true`
/// pixel of `seeds`. Pixels of an all-false mask get a huge sentinel value
/// (greater than any achievable squared distance).
pub fn squared_edt(seeds: &Mask) -> Vec<f64> {
    let w = seeds.width();
    let h = seeds.height();
    let mut grid: Vec<f64> = seeds
        .data()
        .iter()
        .map(|&s| if s { 0.0 } else { INF })
        .collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    // Columns.
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        dt1d(&f[..h], &mut d[..h], &mut v[..h], &mut z[..h + 1]);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    // Rows.
    for y in 0..h {
        let row = &mut grid[y * w..(y + 1) * w];
        f[..w].copy_from_slice(row);
        dt1d(&f[..w], &mut d[..w], &mut v[..w], &mut z[..w + 1]);
        row.copy_from_slice(&d[..w]);
    }
    grid
}

/// Boundary of a mask under 4-connectivity: foreground pixels with at least
/// one background 4-neighbor, where the image border counts as background.
pub fn boundary(mask: &Mask) -> Mask {
    let w = mask.width();
    let h = mask.height();
    Mask::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        x == 0
            || y == 0
            || x == w - 1
            || y == h - 1
            || !mask.get(x - 1, y)
            || !mask.get(x + 1, y)
            || !mask.get(x, y - 1)
            || !mask.get(x, y + 1)
    })
}
