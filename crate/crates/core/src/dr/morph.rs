//! Thresholding and square-element morphology.
//!
//! Pixels outside the image are ignored: erosion and dilation take the
//! minimum / maximum over the in-bounds part of the window only.

use alloc::vec::Vec;

use super::image::{BinaryImage, RasterImage};
use crate::{Error, Result};

/// `1` where the channel-mean intensity is at least `threshold`.
pub fn binarize(img: &RasterImage, threshold: f64) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain { name: "threshold", value: threshold, domain: "[0, 1]" });
    }
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(img.gray(x, y) >= threshold);
        }
    }
    BinaryImage::new(w, h, data)
}

/// Sliding window of half-width `r` along one axis, combined with `op`
/// (`&&` for erosion, `||` for dilation).
fn pass(b: &BinaryImage, r: usize, horizontal: bool, erode: bool) -> BinaryImage {
    let (w, h) = (b.width(), b.height());
    let mut out = BinaryImage::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            let (pos, len) = if horizontal { (x, w) } else { (y, h) };
            let lo = pos.saturating_sub(r);
            let hi = (pos + r).min(len - 1);
            let mut acc = erode;
            for k in lo..=hi {
                let v = if horizontal { b.get(k, y) } else { b.get(x, k) };
                if erode {
                    acc &= v;
                } else {
                    acc |= v;
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}

pub fn erode(b: &BinaryImage, radius: usize) -> BinaryImage {
    pass(&pass(b, radius, true, true), radius, false, true)
}

pub fn dilate(b: &BinaryImage, radius: usize) -> BinaryImage {
    pass(&pass(b, radius, true, false), radius, false, false)
}

/// Erosion then dilation.
pub fn morph_open(b: &BinaryImage, radius: usize) -> BinaryImage {
    dilate(&erode(b, radius), radius)
}

/// Dilation then erosion.
pub fn morph_close(b: &BinaryImage, radius: usize) -> BinaryImage {
    erode(&dilate(b, radius), radius)
}
