//! Global Otsu thresholding of scanned pages.

use num_bigint::BigUint;

use crate::image::{BinaryImage, GrayImage};

/// 256-bin intensity histogram.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.grid() {
        hist[v as usize] += 1;
    }
    hist
}

/// Otsu threshold of `img`. See [`otsu_threshold_hist`].
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    otsu_threshold_hist(&histogram(img))
}

/// Threshold `t` maximizing the between-class variance when the dark
/// class is `intensity <= t`.
///
/// Scores are compared exactly. With `n0, n1` the class sizes, `N` the
/// total count, `S` the total intensity and `s0` the dark-class intensity,
/// `N^2 * sigma_B^2(t) = (s0*N - S*n0)^2 / (n0*n1)`, which is a rational of
/// integers, so ties are genuine ties. Among tied maxima the smallest `t`
/// wins. A histogram with a single populated level yields that level.
///
/// # Panics
///
/// Panics on an empty histogram.
pub fn otsu_threshold_hist(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    assert!(total > 0, "otsu threshold of an empty histogram");
    let sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();

    let (n, s) = (total as u128, sum);
    let mut n0: u128 = 0;
    let mut s0: u128 = 0;
    // Best score as the fraction num / den; starts at zero.
    let mut best: Option<(u8, BigUint, BigUint)> = None;
    for t in 0..=255u8 {
        n0 += hist[t as usize] as u128;
        s0 += t as u128 * hist[t as usize] as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let a = s0 * n;
        let b = s * n0;
        let d = BigUint::from(a.abs_diff(b));
        let num = &d * &d;
        let den = BigUint::from(n0) * BigUint::from(n1);
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => &num * bd > bn * &den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    match best {
        Some((t, _, _)) => t,
        // Only one populated level: no split separates anything.
        None => hist.iter().position(|&c| c > 0).unwrap() as u8,
    }
}

/// Maps `intensity <= t` to black (1).
pub fn binarize(img: &GrayImage, t: u8) -> BinaryImage {
    let grid = img.grid().iter().map(|&v| (v <= t) as u8).collect();
    BinaryImage::from_grid(img.width(), img.height(), grid).expect("same dimensions")
}
