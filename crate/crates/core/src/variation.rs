//! Device-to-device variation across a printed array.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::crossbar::{ConductanceUpdateModel, CrossbarArray};
use crate::device::{DeviceParams, Preset};
use crate::math;
use crate::protocol::trial_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationModel {
    pub yield_p: f64,
    pub onoff_decades_mean: f64,
    pub onoff_decades_sigma: f64,
    pub v_set_mean: f64,
    pub v_set_sigma: f64,
    pub v_reset_mean: f64,
    pub v_reset_sigma: f64,
    pub seed: u64,
    /// Template update curve for the synaptic crossbar.
    pub update_model: ConductanceUpdateModel,
    /// Number of distinct update curves assigned round-robin to cells.
    pub n_update_models: usize,
    /// Log-normal spread of the per-curve `alpha_p`/`alpha_d`.
    pub alpha_sigma: f64,
}

impl Default for VariationModel {
    fn default() -> Self {
        VariationModel {
            yield_p: 0.93,
            onoff_decades_mean: 5.5,
            onoff_decades_sigma: 0.3,
            v_set_mean: 0.29,
            v_set_sigma: 0.10,
            v_reset_mean: -0.44,
            v_reset_sigma: 0.20,
            seed: 0,
            update_model: ConductanceUpdateModel::default(),
            n_update_models: 9,
            alpha_sigma: 0.2,
        }
    }
}

impl VariationModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.yield_p) {
            return Err(Error::Domain { name: "yield_p", value: self.yield_p, domain: "[0, 1]" });
        }
        for (name, s) in [
            ("onoff_decades_sigma", self.onoff_decades_sigma),
            ("v_set_sigma", self.v_set_sigma),
            ("v_reset_sigma", self.v_reset_sigma),
            ("alpha_sigma", self.alpha_sigma),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Domain { name, value: s, domain: ">= 0" });
            }
        }
        if !(self.onoff_decades_mean > 0.0 && self.v_set_mean > 0.0 && self.v_reset_mean < 0.0) {
            return Err(Error::InvalidParams("need onoff_decades_mean > 0 and v_set_mean > 0 > v_reset_mean".into()));
        }
        if self.n_update_models == 0 {
            return Err(Error::InvalidParams("n_update_models must be >= 1".into()));
        }
        self.update_model.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDevice {
    pub row: usize,
    pub col: usize,
    pub functional: bool,
    pub onoff_decades: f64,
    pub params: DeviceParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayStats {
    pub cells: usize,
    pub functional: usize,
    pub yield_fraction: f64,
    pub decades_mean: f64,
    pub decades_std: f64,
    /// Fraction of functional cells with more than five decades ON/OFF.
    pub fraction_above_5_decades: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySample {
    pub array: CrossbarArray,
    /// Row-major, one entry per cell.
    pub devices: Vec<SampledDevice>,
    pub stats: ArrayStats,
}

/// Smallest ON/OFF span a sampled device may have.
const MIN_DECADES: f64 = 0.1;

/// Draws a `rows × cols` array. Draw order is fixed (update curves first,
/// then cells in row-major order), so one seed always gives one array.
pub fn sample_array(model: &VariationModel, rows: usize, cols: usize) -> Result<ArraySample> {
    model.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("array needs rows, cols >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let mut models = Vec::with_capacity(model.n_update_models);
    for _ in 0..model.n_update_models {
        let (zp, zd) = (normal(&mut rng), normal(&mut rng));
        let mut m = model.update_model.clone();
        if m.measured_curve.is_none() {
            m.alpha_p = (m.alpha_p * math::exp(model.alpha_sigma * zp)).clamp(1e-3, 0.5);
            m.alpha_d = (m.alpha_d * math::exp(model.alpha_sigma * zd)).clamp(1e-3, 0.5);
        }
        models.push(m);
    }

    let base = Preset::Nonvolatile1mA.params();
    let floor = base.read_voltage + 0.01;
    let mut devices = Vec::with_capacity(rows * cols);
    let mut functional = Vec::with_capacity(rows * cols);
    for k in 0..rows * cols {
        let alive = rng.random::<f64>() < model.yield_p;
        let decades = (model.onoff_decades_mean + model.onoff_decades_sigma * normal(&mut rng)).max(MIN_DECADES);
        let v_set = (model.v_set_mean + model.v_set_sigma * normal(&mut rng)).max(floor);
        let v_reset = (model.v_reset_mean + model.v_reset_sigma * normal(&mut rng)).min(-floor);
        let params = DeviceParams {
            v_set_nominal: v_set,
            v_reset_nominal: v_reset,
            g_on_cap: base.g_off * math::powf(10.0, decades),
            seed: trial_seed(model.seed, k),
            ..base
        };
        functional.push(alive);
        devices.push(SampledDevice { row: k / cols, col: k % cols, functional: alive, onoff_decades: decades, params });
    }
    let model_of = (0..rows * cols).map(|k| k % model.n_update_models).collect();
    let array = CrossbarArray::new(rows, cols, functional, models, model_of)?;
    let stats = array_stats(&devices);
    Ok(ArraySample { array, devices, stats })
}

pub fn array_stats(devices: &[SampledDevice]) -> ArrayStats {
    let decades: Vec<f64> = devices.iter().filter(|d| d.functional).map(|d| d.onoff_decades).collect();
    let n = decades.len();
    ArrayStats {
        cells: devices.len(),
        functional: n,
        yield_fraction: if devices.is_empty() { 0.0 } else { n as f64 / devices.len() as f64 },
        decades_mean: if n == 0 { 0.0 } else { math::mean(&decades) },
        decades_std: math::sample_std(&decades),
        fraction_above_5_decades: if n == 0 {
            0.0
        } else {
            decades.iter().filter(|&&d| d > 5.0).count() as f64 / n as f64
        },
    }
}
