//! The 81-dimensional candidate descriptor.
//!
//! Features are computed on a local crop around the candidate (bounding box
//! plus a fixed margin, edge-replicated outside the image), so they depend
//! only on the candidate and its neighbourhood, not on its position.
//!
//! Conventions: perimeter counts exposed pixel edges (a single pixel has
//! perimeter 4), compactness is `16·area/perimeter²` (1 for any axis-aligned
//! square), standard deviations are population deviations, the surround ring
//! is every non-region pixel within Chebyshev distance 2, and a region with no
//! interior pixels reports zero interior gradient statistics.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::components::LesionCandidate;
use super::image::RasterImage;
use crate::math;
use crate::{Error, Result};

pub const FEATURE_DIM: usize = 81;

/// Gaussian smoothing scales of the derivative group, in pixels.
pub const DERIVATIVE_SCALES: [f64; 3] = [0.0, 1.0, 2.0];
const RING: usize = 2;
const MARGIN: usize = 10;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    // structural
    "area",
    "perimeter",
    "compactness",
    "bbox_width",
    "bbox_height",
    "bbox_aspect",
    "extent",
    "centroid_x_in_bbox",
    "centroid_y_in_bbox",
    "mu20",
    "mu02",
    "mu11",
    "major_axis",
    "minor_axis",
    "eccentricity",
    "orientation",
    "equivalent_diameter",
    "radial_mean",
    "radial_std",
    "radial_max",
    "hu1",
    "hu2",
    "hu3",
    "hu4",
    "boundary_pixels",
    "boundary_fraction",
    "mean_run_length",
    // color
    "r_mean",
    "g_mean",
    "b_mean",
    "r_std",
    "g_std",
    "b_std",
    "r_min",
    "g_min",
    "b_min",
    "r_max",
    "g_max",
    "b_max",
    "r_ring_mean",
    "g_ring_mean",
    "b_ring_mean",
    "r_contrast",
    "g_contrast",
    "b_contrast",
    "gray_p10",
    "gray_p25",
    "gray_p50",
    "gray_p75",
    "gray_p90",
    "ring_gray_std",
    "ring_gray_min",
    "ring_gray_max",
    "gray_contrast_ratio",
    // derivative, three smoothing scales
    "s0_boundary_grad_mean",
    "s0_boundary_grad_std",
    "s0_boundary_grad_max",
    "s0_interior_grad_mean",
    "s0_interior_grad_std",
    "s0_interior_grad_max",
    "s0_ring_grad_mean",
    "s0_laplacian_mean",
    "s0_laplacian_std",
    "s1_boundary_grad_mean",
    "s1_boundary_grad_std",
    "s1_boundary_grad_max",
    "s1_interior_grad_mean",
    "s1_interior_grad_std",
    "s1_interior_grad_max",
    "s1_ring_grad_mean",
    "s1_laplacian_mean",
    "s1_laplacian_std",
    "s2_boundary_grad_mean",
    "s2_boundary_grad_std",
    "s2_boundary_grad_max",
    "s2_interior_grad_mean",
    "s2_interior_grad_std",
    "s2_interior_grad_max",
    "s2_ring_grad_mean",
    "s2_laplacian_mean",
    "s2_laplacian_std",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub candidate_id: usize,
}

/// Local window around a candidate.
struct Crop {
    w: usize,
    h: usize,
    rgb: [Vec<f64>; 3],
    gray: Vec<f64>,
    region: Vec<bool>,
}

impl Crop {
    fn new(img: &RasterImage, cand: &LesionCandidate) -> Self {
        let (x0, y0, x1, y1) = cand.bbox;
        let w = x1 - x0 + 1 + 2 * MARGIN;
        let h = y1 - y0 + 1 + 2 * MARGIN;
        let (iw, ih) = (img.width() as isize, img.height() as isize);
        let mut rgb = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
        let mut gray = vec![0.0; w * h];
        for cy in 0..h {
            for cx in 0..w {
                let ix = (x0 as isize + cx as isize - MARGIN as isize).clamp(0, iw - 1) as usize;
                let iy = (y0 as isize + cy as isize - MARGIN as isize).clamp(0, ih - 1) as usize;
                let p = img.rgb(ix, iy);
                for c in 0..3 {
                    rgb[c][cy * w + cx] = p[c];
                }
                gray[cy * w + cx] = img.gray(ix, iy);
            }
        }
        let mut region = vec![false; w * h];
        for &(x, y) in &cand.pixels {
            region[(y - y0 + MARGIN) * w + (x - x0 + MARGIN)] = true;
        }
        Crop { w, h, rgb, gray, region }
    }

    fn at(&self, plane: &[f64], x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        plane[y * self.w + x]
    }

    fn in_region(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.w
            && (y as usize) < self.h
            && self.region[y as usize * self.w + x as usize]
    }

    /// Region pixels with at least one 4-neighbour outside the region.
    fn boundary(&self) -> Vec<bool> {
        let mut out = vec![false; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                if self.in_region(x, y)
                    && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !self.in_region(x + dx, y + dy))
                {
                    out[y as usize * self.w + x as usize] = true;
                }
            }
        }
        out
    }

    fn ring(&self) -> Vec<bool> {
        let r = RING as isize;
        let mut out = vec![false; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                if self.in_region(x, y) {
                    continue;
                }
                'search: for dy in -r..=r {
                    for dx in -r..=r {
                        if self.in_region(x + dx, y + dy) {
                            out[y as usize * self.w + x as usize] = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        out
    }

    fn smoothed(&self, sigma: f64) -> Vec<f64> {
        if sigma <= 0.0 {
            return self.gray.clone();
        }
        let rad = math::ceil(3.0 * sigma) as isize;
        let kernel: Vec<f64> = (-rad..=rad).map(|k| math::exp(-((k * k) as f64) / (2.0 * sigma * sigma))).collect();
        let norm: f64 = kernel.iter().sum();
        let mut tmp = vec![0.0; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                let mut acc = 0.0;
                for (i, k) in (-rad..=rad).enumerate() {
                    acc += kernel[i] * self.at(&self.gray, x + k, y);
                }
                tmp[y as usize * self.w + x as usize] = acc / norm;
            }
        }
        let mut out = vec![0.0; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                let mut acc = 0.0;
                for (i, k) in (-rad..=rad).enumerate() {
                    acc += kernel[i] * self.at(&tmp, x, y + k);
                }
                out[y as usize * self.w + x as usize] = acc / norm;
            }
        }
        out
    }

    fn sobel(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                let v = |dx: isize, dy: isize| self.at(p, x + dx, y + dy);
                let gx = (v(1, -1) + 2.0 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2.0 * v(-1, 0) + v(-1, 1));
                let gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
                out[y as usize * self.w + x as usize] = math::sqrt(gx * gx + gy * gy);
            }
        }
        out
    }

    fn laplacian(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.w * self.h];
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                let v = |dx: isize, dy: isize| self.at(p, x + dx, y + dy);
                out[y as usize * self.w + x as usize] = v(1, 0) + v(-1, 0) + v(0, 1) + v(0, -1) - 4.0 * v(0, 0);
            }
        }
        out
    }
}

fn select(plane: &[f64], mask: &[bool]) -> Vec<f64> {
    plane.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect()
}

/// `(mean, population std, min, max)`; zeros for an empty set.
fn stats(v: &[f64]) -> (f64, f64, f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let m = math::mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (m, math::sqrt(var), lo, hi)
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let k = math::floor(pos) as usize;
    let frac = pos - k as f64;
    if k + 1 < sorted.len() {
        sorted[k] + frac * (sorted[k + 1] - sorted[k])
    } else {
        sorted[k]
    }
}

fn structural(cand: &LesionCandidate, crop: &Crop, out: &mut Vec<f64>) {
    let (x0, y0, x1, y1) = cand.bbox;
    let a = cand.area() as f64;
    let pts: Vec<(f64, f64)> = cand.pixels.iter().map(|&(x, y)| ((x - x0) as f64, (y - y0) as f64)).collect();
    let (cx, cy) = (pts.iter().map(|p| p.0).sum::<f64>() / a, pts.iter().map(|p| p.1).sum::<f64>() / a);
    let mu = |p: i32, q: i32| -> f64 {
        pts.iter().map(|&(x, y)| math::powf(x - cx, p as f64) * math::powf(y - cy, q as f64)).sum()
    };
    let (m20, m02, m11) = (mu(2, 0) / a, mu(0, 2) / a, mu(1, 1) / a);
    let eta = |p: i32, q: i32| mu(p, q) / math::powf(a, 1.0 + (p + q) as f64 / 2.0);
    let (e20, e02, e11) = (eta(2, 0), eta(0, 2), eta(1, 1));
    let (e30, e03, e21, e12) = (eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2));

    let mut perimeter = 0usize;
    let mut boundary = 0usize;
    for y in 0..crop.h as isize {
        for x in 0..crop.w as isize {
            if !crop.in_region(x, y) {
                continue;
            }
            let exposed =
                [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().filter(|(dx, dy)| !crop.in_region(x + dx, y + dy)).count();
            perimeter += exposed;
            boundary += (exposed > 0) as usize;
        }
    }
    let p = perimeter as f64;
    let bw = (x1 - x0 + 1) as f64;
    let bh = (y1 - y0 + 1) as f64;
    let half = (m20 + m02) / 2.0;
    let root = math::sqrt(((m20 - m02) / 2.0) * ((m20 - m02) / 2.0) + m11 * m11);
    let (l1, l2) = (half + root, (half - root).max(0.0));
    let radial: Vec<f64> = pts.iter().map(|&(x, y)| math::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy))).collect();
    let (r_mean, r_std, _, r_max) = stats(&radial);
    let mut runs = 0usize;
    for (k, &(x, y)) in cand.pixels.iter().enumerate() {
        let continues = k > 0 && cand.pixels[k - 1] == (x.wrapping_sub(1), y);
        runs += (!continues) as usize;
    }

    out.extend_from_slice(&[
        a,
        p,
        16.0 * a / (p * p),
        bw,
        bh,
        bw / bh,
        a / (bw * bh),
        (cx + 0.5) / bw,
        (cy + 0.5) / bh,
        m20,
        m02,
        m11,
        4.0 * math::sqrt(l1),
        4.0 * math::sqrt(l2),
        if l1 > 0.0 { math::sqrt(1.0 - l2 / l1) } else { 0.0 },
        0.5 * math::atan2(2.0 * m11, m20 - m02),
        math::sqrt(4.0 * a / core::f64::consts::PI),
        r_mean,
        r_std,
        r_max,
        e20 + e02,
        (e20 - e02) * (e20 - e02) + 4.0 * e11 * e11,
        (e30 - 3.0 * e12) * (e30 - 3.0 * e12) + (3.0 * e21 - e03) * (3.0 * e21 - e03),
        (e30 + e12) * (e30 + e12) + (e21 + e03) * (e21 + e03),
        boundary as f64,
        boundary as f64 / a,
        a / runs as f64,
    ]);
}

fn color(crop: &Crop, ring: &[bool], out: &mut Vec<f64>) {
    let inside: Vec<[f64; 4]> = (0..3)
        .map(|c| {
            let s = stats(&select(&crop.rgb[c], &crop.region));
            [s.0, s.1, s.2, s.3]
        })
        .collect();
    let ring_mean: Vec<f64> = (0..3).map(|c| stats(&select(&crop.rgb[c], ring)).0).collect();
    for k in 0..4 {
        out.extend(inside.iter().map(|row| row[k]));
    }
    out.extend_from_slice(&ring_mean);
    for c in 0..3 {
        out.push(inside[c][0] - ring_mean[c]);
    }
    let mut g = select(&crop.gray, &crop.region);
    g.sort_by(f64::total_cmp);
    for q in [0.10, 0.25, 0.50, 0.75, 0.90] {
        out.push(quantile(&g, q));
    }
    let (rg_mean, rg_std, rg_min, rg_max) = stats(&select(&crop.gray, ring));
    let g_mean = math::mean(&g);
    out.extend_from_slice(&[rg_std, rg_min, rg_max, (g_mean - rg_mean) / (g_mean + rg_mean + 1e-6)]);
}

fn derivative(crop: &Crop, ring: &[bool], out: &mut Vec<f64>) {
    let boundary = crop.boundary();
    let interior: Vec<bool> = crop.region.iter().zip(&boundary).map(|(&r, &b)| r && !b).collect();
    for sigma in DERIVATIVE_SCALES {
        let s = crop.smoothed(sigma);
        let grad = crop.sobel(&s);
        let lap = crop.laplacian(&s);
        let (bm, bs, _, bx) = stats(&select(&grad, &boundary));
        let (im, is, _, ix) = stats(&select(&grad, &interior));
        let (rm, _, _, _) = stats(&select(&grad, ring));
        let (lm, ls, _, _) = stats(&select(&lap, &crop.region));
        out.extend_from_slice(&[bm, bs, bx, im, is, ix, rm, lm, ls]);
    }
}

/// The 81 raw (unnormalized) features of one candidate.
pub fn extract_features(img: &RasterImage, cand: &LesionCandidate) -> Result<FeatureVector> {
    if cand.pixels.is_empty() {
        return Err(Error::InvalidInput("candidate has no pixels".into()));
    }
    if cand.pixels.iter().any(|&(x, y)| x >= img.width() || y >= img.height()) {
        return Err(Error::InvalidInput("candidate lies outside the image".into()));
    }
    let crop = Crop::new(img, cand);
    let ring = crop.ring();
    let mut values = Vec::with_capacity(FEATURE_DIM);
    structural(cand, &crop, &mut values);
    color(&crop, &ring, &mut values);
    derivative(&crop, &ring, &mut values);
    debug_assert_eq!(values.len(), FEATURE_DIM);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    Ok(FeatureVector { values, candidate_id: cand.id })
}

/// Per-dimension min/max scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[&[f64]]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let dim = first.len();
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            for (k, &v) in r.iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Ok(Normalizer { min, max })
    }

    /// Scales into `[0, 1]`, clamping values outside the fitted range;
    /// constant dimensions map to 0.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.min.len() {
            return Err(Error::DimensionMismatch { expected: self.min.len(), got: v.len() });
        }
        Ok(v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect())
    }
}
