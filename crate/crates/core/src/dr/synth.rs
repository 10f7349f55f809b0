//! Synthetic fundus-like images with planted lesions, the candidate
//! detector, and a linearly separable 81-dimensional test set.
//!
//! Images have a warm vignetted background with mild texture and noise.
//! Lesions are round blobs: small sharp hard exudates and larger fuzzy soft
//! exudates (bright), tiny microaneurysms and larger hemorrhages (red).
//! Distractors are short elongated streaks, bright or dark, each mimicking
//! one lesion type; they give the classifier realistic negatives.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::components::{connected_components, ClassHint, LesionCandidate};
use super::image::RasterImage;
use super::metrics::LesionType;
use super::mlp::{Sample, N_IN};
use super::morph::{binarize, morph_close, morph_open};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    /// RGB when true, gray otherwise.
    pub color: bool,
    pub lesions_per_image: usize,
    pub distractors_per_image: usize,
    /// Range of the bright-lesion intensity.
    pub bright_intensity: (f64, f64),
    /// Range of the red-lesion blending strength.
    pub red_intensity: (f64, f64),
    /// Amplitude of the smooth background texture.
    pub texture: f64,
    /// Standard deviation of per-pixel noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_images: 12,
            width: 128,
            height: 128,
            color: true,
            lesions_per_image: 6,
            distractors_per_image: 6,
            bright_intensity: (0.75, 0.95),
            red_intensity: (0.8, 1.0),
            texture: 0.03,
            noise: 0.02,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 40 || self.height < 40 {
            return Err(Error::InvalidInput("synthetic images need at least 40x40 pixels".into()));
        }
        let ranges = [self.bright_intensity, self.red_intensity];
        if ranges.iter().any(|&(lo, hi)| !(0.0 <= lo && lo <= hi && hi <= 1.0)) {
            return Err(Error::InvalidInput("intensity ranges must satisfy 0 <= lo <= hi <= 1".into()));
        }
        if !(self.noise >= 0.0 && self.texture >= 0.0) {
            return Err(Error::InvalidInput("noise and texture must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObjectKind {
    Lesion(LesionType),
    /// A non-lesion streak resembling the given lesion type.
    Distractor(LesionType),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedObject {
    pub kind: ObjectKind,
    pub center: (f64, f64),
    /// Pixels where the object dominates the background.
    pub pixels: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticImage {
    pub image: RasterImage,
    pub objects: Vec<PlantedObject>,
}

const BACKGROUND: [f64; 3] = [0.55, 0.28, 0.14];
const BORDER: f64 = 12.0;

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Blend weight of a pixel for a shape, in `[0, 1]`.
enum Shape {
    Disc { r: f64, soft: f64 },
    Segment { half_len: f64, half_width: f64, dir: (f64, f64) },
}

impl Shape {
    fn extent(&self) -> f64 {
        match *self {
            Shape::Disc { r, .. } => r + 1.0,
            Shape::Segment { half_len, half_width, .. } => half_len + half_width + 1.0,
        }
    }

    fn alpha(&self, dx: f64, dy: f64) -> f64 {
        match *self {
            Shape::Disc { r, soft } => {
                let d = math::sqrt(dx * dx + dy * dy);
                if soft <= 0.0 {
                    (d <= r) as u8 as f64
                } else {
                    ((r - d) / soft).clamp(0.0, 1.0)
                }
            }
            Shape::Segment { half_len, half_width, dir } => {
                let along = dx * dir.0 + dy * dir.1;
                let across = -dx * dir.1 + dy * dir.0;
                (along.abs() <= half_len && across.abs() <= half_width) as u8 as f64
            }
        }
    }
}

fn render(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<SyntheticImage> {
    let (w, h) = (spec.width, spec.height);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let rmax = math::sqrt(cx * cx + cy * cy);
    let phase = uniform(rng, (0.0, core::f64::consts::TAU));
    let mut rgb = vec![[0.0; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = (x as f64, y as f64);
            let r = math::sqrt((fx - cx) * (fx - cx) + (fy - cy) * (fy - cy)) / rmax;
            let vignette = 1.0 - 0.15 * r * r;
            let tex = spec.texture * libm::sin(fx / 9.0 + phase) * libm::cos(fy / 13.0 - phase);
            for c in 0..3 {
                rgb[y * w + x][c] = BACKGROUND[c] * vignette + tex;
            }
        }
    }

    let mut kinds = Vec::new();
    for k in 0..spec.lesions_per_image {
        kinds.push(ObjectKind::Lesion(LesionType::ALL[rng.random_range(0..4)]));
        let _ = k;
    }
    for k in 0..spec.distractors_per_image {
        kinds.push(ObjectKind::Distractor(LesionType::ALL[k % 4]));
    }

    let mut objects: Vec<PlantedObject> = Vec::new();
    let mut placed: Vec<((f64, f64), f64)> = Vec::new();
    for kind in kinds {
        let (shape, color, strength) = match kind {
            ObjectKind::Lesion(LesionType::HardExudate) => {
                let i = uniform(rng, spec.bright_intensity);
                (Shape::Disc { r: uniform(rng, (2.0, 3.5)), soft: 0.0 }, [i, 0.95 * i, 0.6 * i], 1.0)
            }
            ObjectKind::Lesion(LesionType::SoftExudate) => {
                let i = uniform(rng, spec.bright_intensity);
                let r = uniform(rng, (4.0, 6.5));
                (Shape::Disc { r, soft: 0.5 * r }, [0.95 * i, 0.9 * i, 0.75 * i], 0.9)
            }
            ObjectKind::Lesion(LesionType::Microaneurysm) => {
                let s = uniform(rng, spec.red_intensity);
                (Shape::Disc { r: uniform(rng, (1.5, 2.3)), soft: 0.0 }, [0.28, 0.05, 0.04], s)
            }
            ObjectKind::Lesion(LesionType::Hemorrhage) => {
                let s = uniform(rng, spec.red_intensity);
                let r = uniform(rng, (3.0, 6.0));
                (Shape::Disc { r, soft: 0.3 * r }, [0.25, 0.04, 0.03], s)
            }
            ObjectKind::Distractor(t) => {
                let angle = uniform(rng, (0.0, core::f64::consts::PI));
                let shape = Shape::Segment {
                    half_len: uniform(rng, (5.0, 9.0)),
                    half_width: 2.0,
                    dir: (libm::cos(angle), libm::sin(angle)),
                };
                if t.is_bright() {
                    let i = uniform(rng, spec.bright_intensity);
                    (shape, [0.9 * i, 0.9 * i, 0.8 * i], 1.0)
                } else {
                    (shape, [0.3, 0.06, 0.05], uniform(rng, spec.red_intensity))
                }
            }
        };
        let ext = shape.extent();
        // rejection sampling for a free spot; give up quietly after a bounded search
        let mut spot = None;
        for _ in 0..200 {
            let px = uniform(rng, (BORDER + ext, w as f64 - BORDER - ext));
            let py = uniform(rng, (BORDER + ext, h as f64 - BORDER - ext));
            let clear = placed.iter().all(|&((qx, qy), qe)| {
                let d = math::sqrt((px - qx) * (px - qx) + (py - qy) * (py - qy));
                d > ext + qe + 6.0
            });
            if clear {
                spot = Some((libm::round(px), libm::round(py)));
                break;
            }
        }
        let Some((px, py)) = spot else { continue };
        placed.push(((px, py), ext));
        let mut pixels = Vec::new();
        let e = math::ceil(ext) as isize;
        for dy in -e..=e {
            for dx in -e..=e {
                let a = shape.alpha(dx as f64, dy as f64) * strength;
                if a <= 0.0 {
                    continue;
                }
                let (x, y) = ((px as isize + dx) as usize, (py as isize + dy) as usize);
                let p = &mut rgb[y * w + x];
                for c in 0..3 {
                    p[c] = p[c] * (1.0 - a) + color[c] * a;
                }
                if a >= 0.5 {
                    pixels.push((x, y));
                }
            }
        }
        objects.push(PlantedObject { kind, center: (px, py), pixels });
    }

    let channels = if spec.color { 3 } else { 1 };
    let mut data = Vec::with_capacity(w * h * channels);
    for p in &rgb {
        let noisy: Vec<f64> = (0..3)
            .map(|c| {
                let z: f64 = StandardNormal.sample(rng);
                (p[c] + spec.noise * z).clamp(0.0, 1.0)
            })
            .collect();
        if spec.color {
            data.extend_from_slice(&noisy);
        } else {
            data.push((noisy[0] + noisy[1] + noisy[2]) / 3.0);
        }
    }
    Ok(SyntheticImage { image: RasterImage::new(w, h, channels, data)?, objects })
}

/// Deterministic set of synthetic images.
pub fn synth_images(spec: &SynthSpec) -> Result<Vec<SyntheticImage>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.n_images).map(|_| render(spec, &mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Channel-mean level above which a pixel is bright.
    pub bright_threshold: f64,
    /// Darkness (`1 −` green, or `1 −` gray) above which a pixel is red.
    pub red_threshold: f64,
    pub se_radius: usize,
    pub min_area: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { bright_threshold: 0.5, red_threshold: 0.82, se_radius: 1, min_area: 4 }
    }
}

/// Bright candidates first, then red, each in raster order; ids are positions.
pub fn detect_candidates(img: &RasterImage, det: &DetectorConfig) -> Result<Vec<LesionCandidate>> {
    let darkness = if img.channels() == 3 { img.channel(1)?.inverted() } else { img.inverted() };
    let maps = [
        (binarize(img, det.bright_threshold)?, ClassHint::Bright),
        (binarize(&darkness, det.red_threshold)?, ClassHint::Red),
    ];
    let mut out = Vec::new();
    for (b, hint) in maps {
        let cleaned = morph_close(&morph_open(&b, det.se_radius), det.se_radius);
        for mut c in connected_components(&cleaned) {
            if c.area() >= det.min_area {
                c.id = out.len();
                c.class_hint = hint;
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCandidate {
    pub candidate: LesionCandidate,
    pub label: bool,
    pub lesion_type: LesionType,
}

/// Labels each candidate by the planted object covering most of its pixels.
/// Candidates touching no object are non-lesions typed by their detector.
pub fn label_candidates(img: &SyntheticImage, det: &DetectorConfig) -> Result<Vec<LabeledCandidate>> {
    let w = img.image.width();
    let mut owner = vec![usize::MAX; w * img.image.height()];
    for (k, o) in img.objects.iter().enumerate() {
        for &(x, y) in &o.pixels {
            owner[y * w + x] = k;
        }
    }
    let cands = detect_candidates(&img.image, det)?;
    Ok(cands
        .into_iter()
        .map(|c| {
            let mut votes = vec![0usize; img.objects.len()];
            for &(x, y) in &c.pixels {
                if let Some(v) = votes.get_mut(owner[y * w + x]) {
                    *v += 1;
                }
            }
            let best = (0..votes.len()).filter(|&k| votes[k] > 0).max_by_key(|&k| (votes[k], usize::MAX - k));
            let (label, lesion_type) = match best.map(|k| img.objects[k].kind) {
                Some(ObjectKind::Lesion(t)) => (true, t),
                Some(ObjectKind::Distractor(t)) => (false, t),
                None if c.class_hint == ClassHint::Bright => (false, LesionType::HardExudate),
                None => (false, LesionType::Microaneurysm),
            };
            LabeledCandidate { candidate: c, label, lesion_type }
        })
        .collect())
}

/// `n` points uniform in `[0, 1]^81`, labeled by a random hyperplane
/// through the cube center; points closer than `margin` to the plane are
/// redrawn. Lesion types cycle through the four kinds.
pub fn separable_dataset(n: usize, seed: u64, margin: f64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..N_IN).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = math::sqrt(u.iter().map(|v| v * v).sum());
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: Vec<f64> = (0..N_IN).map(|_| rng.random::<f64>()).collect();
        let s: f64 = x.iter().zip(&u).map(|(xi, ui)| (xi - 0.5) * ui).sum::<f64>() / norm;
        if s.abs() < margin {
            continue;
        }
        let k = out.len();
        out.push(Sample { features: x, label: s > 0.0, lesion_type: LesionType::ALL[k % 4] });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_objects_are_recovered_without_noise() {
        let spec = SynthSpec { noise: 0.0, n_images: 4, seed: 21, ..Default::default() };
        for img in synth_images(&spec).unwrap() {
            let labeled = label_candidates(&img, &DetectorConfig::default()).unwrap();
            let lesions = img.objects.iter().filter(|o| matches!(o.kind, ObjectKind::Lesion(_))).count();
            assert_eq!(labeled.iter().filter(|c| c.label).count(), lesions);
            assert_eq!(labeled.len(), img.objects.len());
            for c in &labeled {
                let hint_bright = c.candidate.class_hint == ClassHint::Bright;
                assert_eq!(hint_bright, c.lesion_type.is_bright());
            }
        }
    }

    #[test]
    fn no_lesions_means_no_positive_labels() {
        let spec = SynthSpec { lesions_per_image: 0, n_images: 2, ..Default::default() };
        for img in synth_images(&spec).unwrap() {
            assert!(label_candidates(&img, &DetectorConfig::default()).unwrap().iter().all(|c| !c.label));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let spec = SynthSpec { n_images: 2, ..Default::default() };
        assert_eq!(synth_images(&spec).unwrap(), synth_images(&spec).unwrap());
        let gray = SynthSpec { color: false, ..spec };
        assert_eq!(synth_images(&gray).unwrap()[0].image.channels(), 1);
    }

    #[test]
    fn separable_set_passes_perceptron_oracle() {
        let data = separable_dataset(300, 8, 0.05);
        // perceptron convergence certifies linear separability
        let mut w = vec![0.0; N_IN + 1];
        let mut converged = false;
        for _ in 0..2000 {
            let mut mistakes = 0;
            for s in &data {
                let y = if s.label { 1.0 } else { -1.0 };
                let a: f64 = w[N_IN] + s.features.iter().zip(&w).map(|(x, wi)| x * wi).sum::<f64>();
                if y * a <= 0.0 {
                    mistakes += 1;
                    for (wi, x) in w.iter_mut().zip(&s.features) {
                        *wi += y * x;
                    }
                    w[N_IN] += y;
                }
            }
            if mistakes == 0 {
                converged = true;
                break;
            }
        }
        assert!(converged);
        let pos = data.iter().filter(|s| s.label).count();
        assert!(pos > 90 && pos < 210);
    }
}
