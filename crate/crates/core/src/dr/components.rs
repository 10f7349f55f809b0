//! 8-connected component labeling.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::image::BinaryImage;

/// Which detector produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassHint {
    Bright,
    Red,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionCandidate {
    /// Position in the detector's output order.
    pub id: usize,
    /// `(x, y)` pixels in raster order.
    pub pixels: Vec<(usize, usize)>,
    pub class_hint: ClassHint,
    /// Inclusive `(x0, y0, x1, y1)`.
    pub bbox: (usize, usize, usize, usize),
}

impl LesionCandidate {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Builds a candidate from a non-empty pixel list.
    pub fn from_pixels(id: usize, mut pixels: Vec<(usize, usize)>, class_hint: ClassHint) -> Option<Self> {
        if pixels.is_empty() {
            return None;
        }
        pixels.sort_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let mut bbox = (usize::MAX, usize::MAX, 0, 0);
        for &(x, y) in &pixels {
            bbox = (bbox.0.min(x), bbox.1.min(y), bbox.2.max(x), bbox.3.max(y));
        }
        Some(LesionCandidate { id, pixels, class_hint, bbox })
    }
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Components ordered by their first pixel in raster order (top-left first).
pub fn connected_components(b: &BinaryImage) -> Vec<LesionCandidate> {
    let (w, h) = (b.width(), b.height());
    let mut parent: Vec<usize> = (0..w * h).collect();
    for y in 0..h {
        for x in 0..w {
            if !b.get(x, y) {
                continue;
            }
            let k = y * w + x;
            // already-visited neighbours: W, NW, N, NE
            let mut nb = [None; 4];
            if x > 0 {
                nb[0] = Some((x - 1, y));
            }
            if y > 0 {
                if x > 0 {
                    nb[1] = Some((x - 1, y - 1));
                }
                nb[2] = Some((x, y - 1));
                if x + 1 < w {
                    nb[3] = Some((x + 1, y - 1));
                }
            }
            for (u, v) in nb.into_iter().flatten() {
                if b.get(u, v) {
                    let (ra, rb) = (find(&mut parent, k), find(&mut parent, v * w + u));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut slot = vec![usize::MAX; w * h];
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !b.get(x, y) {
                continue;
            }
            let r = find(&mut parent, y * w + x);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push((x, y));
        }
    }
    groups
        .into_iter()
        .enumerate()
        .filter_map(|(id, px)| LesionCandidate::from_pixels(id, px, ClassHint::Unknown))
        .collect()
}
