//! Time-temperature indicator scenarios.

use memristim_core::device::DeviceParams;
use memristim_core::tti::{run_scenario, ScenarioReport, TtiConfig, T_OK, T_SPOIL, T_WARN};
use serde::Serialize;

use super::invalid;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{num, read_profile, OutDir};

/// Seconds between samples of a built-in profile.
const BUILTIN_STEP_S: f64 = 60.0;

/// `"4:0.3,15:0.8"` → `[(4, 0.3), (15, 0.8)]`.
fn parse_temp_map(text: &str) -> CliResult<Vec<(f64, f64)>> {
    text.split(',')
        .map(|pair| {
            let parsed = pair.split_once(':').and_then(|(t, v)| Some((t.trim().parse().ok()?, v.trim().parse().ok()?)));
            parsed.ok_or_else(|| CliError::Config(format!("key `temp_map`: expected `temp:volts`, got `{pair}`")))
        })
        .collect()
}

/// Built-in storage histories: `ok` stays cold; `warn` and `spoil` warm up
/// to the warning or spoilage temperature for a while and then cool down.
pub fn builtin_profile(name: &str, samples: usize) -> Vec<(f64, f64)> {
    let phases: &[f64] = match name {
        "warn" => &[T_OK, T_WARN, T_OK],
        "spoil" => &[T_OK, T_SPOIL, T_OK],
        _ => &[T_OK, T_OK, T_OK],
    };
    phases
        .iter()
        .flat_map(|&temp| std::iter::repeat_n(temp, samples))
        .enumerate()
        .map(|(k, temp)| (k as f64 * BUILTIN_STEP_S, temp))
        .collect()
}

#[derive(Serialize)]
struct TtiRun<'a> {
    profile: &'a str,
    samples: usize,
    config: TtiConfig,
    params: DeviceParams,
    #[serde(flatten)]
    report: ScenarioReport,
}

pub fn tti(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let config = TtiConfig {
        temp_to_volts: parse_temp_map(cfg.text("temp_map"))?,
        pulse_width: cfg.f64("pulse_width")?,
        gap_width: cfg.f64("gap_width")?,
        gap_amplitude: cfg.f64("gap_amplitude")?,
        i_fire: cfg.f64("i_fire")?,
        cc: cfg.f64("cc")?,
        pulses_per_train: cfg.usize("pulses_per_train")?,
        inter_train_idle: cfg.f64("inter_train_idle")?,
        ..TtiConfig::default()
    };
    config.validate().map_err(invalid)?;
    let (label, series) = match cfg.path("profile") {
        Some(path) => (cfg.text("profile"), read_profile(&path)?),
        None => (cfg.text("builtin"), builtin_profile(cfg.text("builtin"), cfg.usize("samples")?)),
    };
    let report = run_scenario(&series, &config, &p)?;
    let rows = report.timeline.iter().map(|s| {
        [num(s.t_s), num(s.temp_c), num(s.volts), format!("{:?}", s.led), s.firing_events.to_string(), num(s.w)]
    });
    out.write_csv("led_timeline.csv", &["t_s", "temp_C", "volts", "led", "firing_events", "w"], rows)?;
    let run = TtiRun { profile: label, samples: series.len(), config, params: p, report };
    out.write_report("report.json", "tti", &run)
}
