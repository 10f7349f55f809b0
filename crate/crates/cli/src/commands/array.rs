//! Printed-array sampling.

use memristim_core::crossbar::ConductanceUpdateModel;
use memristim_core::variation::{sample_array as draw, ArrayStats, VariationModel};
use serde::Serialize;

use super::invalid;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::{num, read_curve, OutDir};

/// Variation model from the variation keys; the seed is the run seed.
pub fn variation(cfg: &RunConfig) -> CliResult<VariationModel> {
    let update_model = match cfg.path("curve") {
        Some(path) => ConductanceUpdateModel::from_curve(read_curve(&path)?).map_err(invalid)?,
        None => {
            let alpha = cfg.f64("alpha")?;
            ConductanceUpdateModel {
                g_min: cfg.f64("g_min")?,
                g_max: cfg.f64("g_max")?,
                alpha_p: alpha,
                alpha_d: alpha,
                // about three e-folds of the curve
                n_levels_hint: if alpha > 0.0 { (3.0 / alpha).round() as usize } else { 0 },
                measured_curve: None,
            }
        }
    };
    let model = VariationModel {
        yield_p: cfg.f64("yield_p")?,
        onoff_decades_mean: cfg.f64("decades_mean")?,
        onoff_decades_sigma: cfg.f64("decades_sigma")?,
        v_set_mean: cfg.f64("v_set_mean")?,
        v_set_sigma: cfg.f64("v_set_sigma")?,
        v_reset_mean: cfg.f64("v_reset_mean")?,
        v_reset_sigma: cfg.f64("v_reset_sigma")?,
        seed: cfg.seed(),
        update_model,
        n_update_models: cfg.usize("n_update_models")?,
        alpha_sigma: cfg.f64("alpha_sigma")?,
    };
    model.validate().map_err(invalid)?;
    Ok(model)
}

#[derive(Serialize)]
struct StatsReport {
    rows: usize,
    cols: usize,
    model: VariationModel,
    #[serde(flatten)]
    stats: ArrayStats,
    /// Alpha of each distinct update curve, in assignment order.
    update_alphas: Vec<(f64, f64)>,
}

pub fn sample_array(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let model = variation(cfg)?;
    let (rows, cols) = (cfg.usize("rows")?, cfg.usize("cols")?);
    if rows == 0 || cols == 0 {
        return Err(crate::error::CliError::Config("keys `rows` and `cols` must be >= 1".into()));
    }
    let s = draw(&model, rows, cols)?;
    let n_models = model.n_update_models;
    let device_rows = s.devices.iter().enumerate().map(|(k, d)| {
        [
            d.row.to_string(),
            d.col.to_string(),
            d.functional.to_string(),
            num(d.onoff_decades),
            num(d.params.v_set_nominal),
            num(d.params.v_reset_nominal),
            num(d.params.g_on_cap),
            (k % n_models).to_string(),
        ]
    });
    out.write_csv(
        "devices.csv",
        &["row", "col", "functional", "onoff_decades", "v_set", "v_reset", "g_on_cap", "update_model"],
        device_rows,
    )?;
    let g = s.array.conductances();
    let g_rows = s.devices.iter().zip(g).map(|(d, g)| [d.row.to_string(), d.col.to_string(), num(*g)]);
    out.write_csv("conductance.csv", &["row", "col", "conductance_S"], g_rows)?;
    let report = StatsReport {
        rows,
        cols,
        update_alphas: s.array.models().iter().map(|m| (m.alpha_p, m.alpha_d)).collect(),
        model,
        stats: s.stats,
    };
    out.write_report("stats.json", "sample-array", &report)
}
