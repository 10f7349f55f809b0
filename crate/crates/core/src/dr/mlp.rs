//! 81×16×2 perceptron trained with sign (Manhattan) updates.
//!
//! Each layer carries its bias as an extra input row fed with a constant 1.
//! Weights live in `[-1, 1]`, either as plain floats or as differential
//! conductance pairs on a crossbar (layer 1: 82×32 cells, layer 2: 17×4;
//! pair `j` occupies columns `2j` (+) and `2j+1` (−)). In device mode the
//! forward pass goes through [`CrossbarArray::read_mvm`] with inputs applied as
//! read voltages, and every weight with a non-zero gradient receives exactly
//! one pulse per batch: a potentiation of the positive cell to raise it or of
//! the negative cell to lower it (a depression of the partner when that cell
//! is dead). Because cells mostly grow, a pair whose cells have both passed
//! the refresh level is reprogrammed to its canonical form after the batch.
//!
//! Saturating conductance steps pull pair weights toward zero whenever the
//! gradient sign is noisy, so two knobs keep device training on par with
//! float training: a per-layer gain between stored and network weights, and
//! a dead zone that silences gradients small relative to the layer maximum.

use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::LesionType;
use crate::crossbar::{ConductanceUpdateModel, CrossbarArray};
use crate::math;
use crate::variation::{sample_array, VariationModel};
use crate::{Error, Result};

pub const N_IN: usize = 81;
pub const N_HID: usize = 16;
pub const N_OUT: usize = 2;
/// Layer-1 weight rows including the bias row.
const R1: usize = N_IN + 1;
/// Layer-2 weight rows including the bias row.
const R2: usize = N_HID + 1;
/// Network weight per unit stored weight, per layer.
pub const DEFAULT_GAIN: [f64; 2] = [4.0, 4.0];
/// Per-pulse fraction of the arrays used for device training.
pub const DEVICE_ALPHA: f64 = 0.01;

/// Array variation for device training: the default statistics with a
/// finer-grained update model (`alpha = DEVICE_ALPHA`).
pub fn device_variation(seed: u64) -> VariationModel {
    let update_model = ConductanceUpdateModel {
        alpha_p: DEVICE_ALPHA,
        alpha_d: DEVICE_ALPHA,
        n_levels_hint: 300,
        ..Default::default()
    };
    VariationModel { seed, update_model, ..Default::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// `true` for a lesion.
    pub label: bool,
    pub lesion_type: LesionType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainMode {
    Float,
    Device,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Fixed weight step of the float-mode sign update.
    pub float_step: f64,
    /// Lesion iff `P(lesion) ≥ confidence`.
    pub confidence: f64,
    /// Shuffling seed.
    pub seed: u64,
    /// Stop once training accuracy reaches this value.
    pub target_accuracy: Option<f64>,
    /// Dead zone of the sign function, as a fraction of the largest
    /// gradient magnitude in the layer; smaller gradients give no update.
    pub sign_threshold: f64,
    /// A device pair is reprogrammed once both cells sit above this
    /// fraction of the conductance span.
    pub refresh_level: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || !(self.float_step > 0.0)
            || !(0.0..1.0).contains(&self.sign_threshold)
            || !(0.0..1.0).contains(&self.refresh_level)
        {
            return Err(Error::InvalidParams(
                "need batch_size >= 1, float_step > 0, sign_threshold and refresh_level in [0, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Domain { name: "confidence", value: self.confidence, domain: "[0, 1]" });
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 16,
            float_step: 0.01,
            confidence: 0.75,
            seed: 0,
            target_accuracy: None,
            sign_threshold: 0.5,
            refresh_level: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Backend {
    Float { w1: Vec<f64>, w2: Vec<f64> },
    Device { l1: CrossbarArray, l2: CrossbarArray, v_read: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    backend: Backend,
    /// Per-layer scale from stored weight units to network weights.
    gain: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub mode: TrainMode,
    pub log: Vec<EpochLog>,
    pub final_loss: f64,
    pub final_accuracy: f64,
    /// First epoch (one-based) at which `target_accuracy` was reached.
    pub reached_target_at: Option<usize>,
    pub pulses: u64,
    /// Pulses lost on pairs whose cells are both dead.
    pub skipped_pulses: u64,
    /// Pair reprogrammings after both cells drifted above mid-range.
    pub refreshes: u64,
}

/// Hidden activations (with trailing bias 1) and output probabilities.
struct Forward {
    h: [f64; R2],
    p: [f64; N_OUT],
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

fn softmax(z: [f64; N_OUT]) -> [f64; N_OUT] {
    let m = z[0].max(z[1]);
    let e = [math::exp(z[0] - m), math::exp(z[1] - m)];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

fn output(h: [f64; R2], z2: [f64; N_OUT]) -> Forward {
    Forward { h, p: softmax(z2) }
}

fn forward_float(w1: &[f64], w2: &[f64], x: &[f64]) -> Forward {
    let mut h = [1.0; R2];
    for (j, hj) in h.iter_mut().take(N_HID).enumerate() {
        let mut z = w1[N_IN * N_HID + j];
        for (i, &xi) in x.iter().enumerate() {
            z += xi * w1[i * N_HID + j];
        }
        *hj = sigmoid(z);
    }
    let mut z2 = [0.0; N_OUT];
    for (k, zk) in z2.iter_mut().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            *zk += hj * w2[j * N_OUT + k];
        }
    }
    output(h, z2)
}

/// Mean cross-entropy and its gradient over `batch`.
fn loss_and_grad(w1: &[f64], w2: &[f64], batch: &[&Sample]) -> (f64, Vec<f64>, Vec<f64>) {
    let mut g1 = vec![0.0; R1 * N_HID];
    let mut g2 = vec![0.0; R2 * N_OUT];
    let mut loss = 0.0;
    for s in batch {
        let f = forward_float(w1, w2, &s.features);
        let y = s.label as usize;
        loss -= math::ln(f.p[y].max(1e-300));
        let dz2 = [f.p[0] - (y == 0) as u8 as f64, f.p[1] - (y == 1) as u8 as f64];
        for j in 0..R2 {
            for k in 0..N_OUT {
                g2[j * N_OUT + k] += f.h[j] * dz2[k];
            }
        }
        for j in 0..N_HID {
            let dh = w2[j * N_OUT] * dz2[0] + w2[j * N_OUT + 1] * dz2[1];
            let dz1 = dh * f.h[j] * (1.0 - f.h[j]);
            for (i, &xi) in s.features.iter().enumerate() {
                g1[i * N_HID + j] += xi * dz1;
            }
            g1[N_IN * N_HID + j] += dz1;
        }
    }
    let n = batch.len() as f64;
    g1.iter_mut().chain(g2.iter_mut()).for_each(|g| *g /= n);
    (loss / n, g1, g2)
}

fn check_dims(a: &CrossbarArray, rows: usize, cols: usize) -> Result<()> {
    if a.rows() != rows || a.cols() != cols {
        return Err(Error::InvalidInput(alloc::format!(
            "array is {}x{}, layer needs {rows}x{cols}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..=scale)).collect()
}

impl Mlp {
    /// Float weights drawn uniformly from `[-init_scale, init_scale]`.
    pub fn new_float(seed: u64, init_scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = random_weights(&mut rng, R1 * N_HID, init_scale);
        let w2 = random_weights(&mut rng, R2 * N_OUT, init_scale);
        Mlp { backend: Backend::Float { w1, w2 }, gain: DEFAULT_GAIN }
    }

    pub fn from_weights(w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        if w1.len() != R1 * N_HID {
            return Err(Error::DimensionMismatch { expected: R1 * N_HID, got: w1.len() });
        }
        if w2.len() != R2 * N_OUT {
            return Err(Error::DimensionMismatch { expected: R2 * N_OUT, got: w2.len() });
        }
        if w1.iter().chain(&w2).any(|w| !(w.abs() <= 1.0)) {
            return Err(Error::InvalidInput("weights must lie in [-1, 1]".into()));
        }
        Ok(Mlp { backend: Backend::Float { w1, w2 }, gain: DEFAULT_GAIN })
    }

    /// Crossbar-backed network initialized to the same draw as
    /// [`Mlp::new_float`] with this seed, quantized to reachable levels.
    pub fn new_device(seed: u64, init_scale: f64, l1: CrossbarArray, l2: CrossbarArray, v_read: f64) -> Result<Self> {
        check_dims(&l1, R1, 2 * N_HID)?;
        check_dims(&l2, R2, 2 * N_OUT)?;
        if !(v_read > 0.0 && v_read.is_finite()) {
            return Err(Error::InvalidInput("read voltage must be > 0".into()));
        }
        let (w1, w2) = match Mlp::new_float(seed, init_scale).backend {
            Backend::Float { w1, w2 } => (w1, w2),
            Backend::Device { .. } => unreachable!(),
        };
        let (mut l1, mut l2) = (l1, l2);
        for (arr, w, cols) in [(&mut l1, &w1, N_HID), (&mut l2, &w2, N_OUT)] {
            for (k, &wk) in w.iter().enumerate() {
                let (r, c) = (k / cols, k % cols);
                arr.write_weight((r, 2 * c), (r, 2 * c + 1), wk)?;
            }
        }
        Ok(Mlp { backend: Backend::Device { l1, l2, v_read }, gain: DEFAULT_GAIN })
    }

    /// Crossbar-backed network on two arrays sampled from `variation`.
    pub fn new_sampled(seed: u64, init_scale: f64, variation: &VariationModel, v_read: f64) -> Result<Self> {
        let m1 = VariationModel { seed: variation.seed, ..variation.clone() };
        let m2 = VariationModel { seed: variation.seed.wrapping_add(1), ..variation.clone() };
        let l1 = sample_array(&m1, R1, 2 * N_HID)?.array;
        let l2 = sample_array(&m2, R2, 2 * N_OUT)?.array;
        Mlp::new_device(seed, init_scale, l1, l2, v_read)
    }

    /// Checks shapes and ranges, e.g. after deserializing a saved model.
    pub fn validate(&self) -> Result<()> {
        if !self.gain.iter().all(|g| *g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParams("layer gains must be positive".into()));
        }
        match &self.backend {
            Backend::Float { w1, w2 } => {
                Mlp::from_weights(w1.clone(), w2.clone())?;
            }
            Backend::Device { l1, l2, v_read } => {
                l1.validate()?;
                l2.validate()?;
                check_dims(l1, R1, 2 * N_HID)?;
                check_dims(l2, R2, 2 * N_OUT)?;
                if !(*v_read > 0.0 && v_read.is_finite()) {
                    return Err(Error::InvalidInput("read voltage must be > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> TrainMode {
        match self.backend {
            Backend::Float { .. } => TrainMode::Float,
            Backend::Device { .. } => TrainMode::Device,
        }
    }

    /// Sets the per-layer gains (both must be positive).
    pub fn with_gain(mut self, gain: [f64; 2]) -> Result<Self> {
        if !gain.iter().all(|g| *g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParams("layer gains must be positive".into()));
        }
        self.gain = gain;
        Ok(self)
    }

    pub fn gain(&self) -> [f64; 2] {
        self.gain
    }

    /// Network weights: stored weights times the layer gain.
    pub fn effective_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let (mut w1, mut w2) = self.weights();
        w1.iter_mut().for_each(|w| *w *= self.gain[0]);
        w2.iter_mut().for_each(|w| *w *= self.gain[1]);
        (w1, w2)
    }

    /// Stored weights in `[-1, 1]`, row-major `(82×16, 17×2)`.
    pub fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.backend {
            Backend::Float { w1, w2 } => (w1.clone(), w2.clone()),
            Backend::Device { l1, l2, .. } => (pair_weights(l1), pair_weights(l2)),
        }
    }

    pub fn arrays(&self) -> Option<(&CrossbarArray, &CrossbarArray)> {
        match &self.backend {
            Backend::Float { .. } => None,
            Backend::Device { l1, l2, .. } => Some((l1, l2)),
        }
    }

    fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != N_IN {
            return Err(Error::DimensionMismatch { expected: N_IN, got: x.len() });
        }
        Ok(match &self.backend {
            Backend::Float { .. } => {
                let (w1, w2) = self.effective_weights();
                forward_float(&w1, &w2, x)
            }
            Backend::Device { l1, l2, v_read } => {
                let mut v: Vec<f64> = x.iter().map(|xi| xi * v_read).collect();
                v.push(*v_read);
                let i1 = l1.read_mvm(&v)?;
                let scale = l1.span() * v_read / self.gain[0];
                let mut h = [1.0; R2];
                for (j, hj) in h.iter_mut().take(N_HID).enumerate() {
                    *hj = sigmoid((i1[2 * j] - i1[2 * j + 1]) / scale);
                }
                let v2: Vec<f64> = h.iter().map(|hj| hj * v_read).collect();
                let i2 = l2.read_mvm(&v2)?;
                let scale = l2.span() * v_read / self.gain[1];
                output(h, [(i2[0] - i2[1]) / scale, (i2[2] - i2[3]) / scale])
            }
        })
    }

    /// Softmax probability of the lesion class.
    pub fn lesion_probability(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.p[1])
    }

    /// Mean cross-entropy and the fraction classified correctly.
    pub fn loss_accuracy(&self, data: &[Sample], confidence: f64) -> Result<(f64, f64)> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (mut loss, mut correct) = (0.0, 0usize);
        for s in data {
            let f = self.forward(&s.features)?;
            loss -= math::ln(f.p[s.label as usize].max(1e-300));
            correct += ((f.p[1] >= confidence) == s.label) as usize;
        }
        Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
    }

    /// Mean loss and gradient with respect to the network weights.
    pub fn gradient(&self, batch: &[&Sample]) -> (f64, Vec<f64>, Vec<f64>) {
        let (w1, w2) = self.effective_weights();
        loss_and_grad(&w1, &w2, batch)
    }

    /// Sign-rule training; zero epochs leave the model untouched.
    pub fn train(&mut self, data: &[Sample], cfg: &TrainConfig) -> Result<TrainingReport> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(s) = data.iter().find(|s| s.features.len() != N_IN) {
            return Err(Error::DimensionMismatch { expected: N_IN, got: s.features.len() });
        }
        if data.iter().any(|s| s.features.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput("feature values must be finite".into()));
        }
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut log = Vec::new();
        let (mut pulses, mut skipped, mut refreshes) = (0u64, 0u64, 0u64);
        let mut reached = None;
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.batch_size) {
                let batch: Vec<&Sample> = chunk.iter().map(|&k| &data[k]).collect();
                let (_, mut g1, mut g2) = self.gradient(&batch);
                dead_zone(&mut g1, cfg.sign_threshold);
                dead_zone(&mut g2, cfg.sign_threshold);
                let (p, s, f) = self.apply_sign_update(&g1, &g2, cfg)?;
                pulses += p;
                skipped += s;
                refreshes += f;
            }
            let (loss, accuracy) = self.loss_accuracy(data, cfg.confidence)?;
            log.push(EpochLog { epoch, loss, accuracy });
            if cfg.target_accuracy.is_some_and(|t| accuracy >= t) {
                reached = Some(epoch);
                break;
            }
        }
        let (final_loss, final_accuracy) = self.loss_accuracy(data, cfg.confidence)?;
        Ok(TrainingReport {
            mode: self.mode(),
            log,
            final_loss,
            final_accuracy,
            reached_target_at: reached,
            pulses,
            skipped_pulses: skipped,
            refreshes,
        })
    }

    /// Returns `(pulses, pulses on dead cells, pairs refreshed)`; float mode
    /// reports zeros.
    fn apply_sign_update(&mut self, g1: &[f64], g2: &[f64], cfg: &TrainConfig) -> Result<(u64, u64, u64)> {
        match &mut self.backend {
            Backend::Float { w1, w2 } => {
                for (w, g) in w1.iter_mut().zip(g1).chain(w2.iter_mut().zip(g2)) {
                    if *g != 0.0 {
                        *w = (*w - cfg.float_step * g.signum()).clamp(-1.0, 1.0);
                    }
                }
                Ok((0, 0, 0))
            }
            Backend::Device { l1, l2, .. } => {
                let mut counts = (0, 0, 0);
                for (arr, g, cols) in [(l1, g1, N_HID), (l2, g2, N_OUT)] {
                    for (k, &gk) in g.iter().enumerate() {
                        if gk == 0.0 {
                            continue;
                        }
                        let skipped = pulse_pair(arr, k / cols, k % cols, gk < 0.0)?;
                        counts.0 += 1;
                        counts.1 += skipped as u64;
                    }
                    counts.2 += refresh_pairs(arr, cfg.refresh_level)?;
                }
                Ok(counts)
            }
        }
    }
}

/// Zeroes gradients at or below `frac` of the largest magnitude.
fn dead_zone(g: &mut [f64], frac: f64) {
    if frac <= 0.0 {
        return;
    }
    let cut = frac * g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    g.iter_mut().filter(|x| x.abs() <= cut).for_each(|x| *x = 0.0);
}

fn pair_weights(a: &CrossbarArray) -> Vec<f64> {
    let pairs = a.cols() / 2;
    let mut w = Vec::with_capacity(a.rows() * pairs);
    let g = a.conductances();
    for r in 0..a.rows() {
        for c in 0..pairs {
            w.push((g[r * a.cols() + 2 * c] - g[r * a.cols() + 2 * c + 1]) / a.span());
        }
    }
    w
}

/// One pulse on the pair of weight `(r, c)`: potentiate the positive cell
/// to raise the weight or the negative cell to lower it. If that cell is
/// dead, the partner cell is depressed instead. Returns whether the pulse was
/// lost because both cells are dead.
fn pulse_pair(a: &mut CrossbarArray, r: usize, c: usize, increase: bool) -> Result<bool> {
    let (grow, shrink) = if increase { (2 * c, 2 * c + 1) } else { (2 * c + 1, 2 * c) };
    if a.is_functional(r, grow)? {
        Ok(a.potentiate(r, grow, 1)?.skipped)
    } else {
        Ok(a.depress(r, shrink, 1)?.skipped)
    }
}

/// Reprograms every pair whose two cells both sit above `level` of the span
/// to the canonical encoding of its current weight. Returns the number of
/// pairs refreshed.
fn refresh_pairs(a: &mut CrossbarArray, level: f64) -> Result<u64> {
    let mid = a.g_min() + level * a.span();
    let mut n = 0;
    for r in 0..a.rows() {
        for c in 0..a.cols() / 2 {
            let (pos, neg) = ((r, 2 * c), (r, 2 * c + 1));
            if a.get(pos.0, pos.1)? > mid && a.get(neg.0, neg.1)? > mid {
                let w = a.read_weight(pos, neg)?;
                a.write_weight(pos, neg, w)?;
                n += 1;
            }
        }
    }
    Ok(n)
}
