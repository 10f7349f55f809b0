//! Single-device commands: sweeps, endurance, pulse trains, LIF, firing
//! ratio and plasticity.

use memristim_core::device::{DeviceParams, DeviceState, TracePoint};
use memristim_core::protocol::{
    firing_ratio as run_firing_ratio, run_lif_cycle, run_plasticity, run_pulse_train, FiringRatioRow, FiringReport,
    LifReport, PlasticityReport, PulseTrain,
};
use memristim_core::sweep::{
    extract_switching_metrics, run_endurance, run_iv_sweep, CycleRecord, SweepSpec, SwitchingMetrics,
};
use serde::Serialize;

use super::{invalid, positive, pulse_train};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{num, opt_num, OutDir};

const TRACE_HEADER: [&str; 5] = ["t", "v", "i", "w", "g"];

fn trace_rows(trace: &[TracePoint]) -> impl Iterator<Item = [String; 5]> + '_ {
    trace.iter().map(|p| [num(p.t), num(p.v), num(p.i), num(p.w), num(p.g)])
}

fn sweep_spec(cfg: &RunConfig) -> CliResult<SweepSpec> {
    let spec = SweepSpec::bipolar(
        cfg.f64("v_pos")?,
        cfg.f64("v_neg")?,
        positive(cfg, "leg_time")?,
        cfg.usize("points_per_leg")?,
    );
    spec.validate().map_err(invalid)?;
    Ok(spec)
}

fn cycles(cfg: &RunConfig) -> CliResult<usize> {
    match cfg.usize("cycles")? {
        0 => Err(CliError::Config("key `cycles` must be >= 1".into())),
        n => Ok(n),
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    preset: &'a str,
    cc: f64,
    params: DeviceParams,
    /// Metrics of the first sweep.
    #[serde(flatten)]
    first: SwitchingMetrics,
    per_cycle: Vec<SwitchingMetrics>,
}

pub fn sweep(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let cc = positive(cfg, "cc")?;
    let spec = sweep_spec(cfg)?;
    let mut state = DeviceState::new(&p);
    let mut trace = Vec::new();
    let mut per_cycle = Vec::new();
    for k in 0..cycles(cfg)? {
        let t = run_iv_sweep(&mut state, &spec, cc, &p)?;
        per_cycle.push(extract_switching_metrics(&t, &p));
        // the first point of a later sweep repeats the last of the previous one
        trace.extend_from_slice(if k == 0 { &t[..] } else { &t[1..] });
    }
    out.write_csv("trace.csv", &TRACE_HEADER, trace_rows(&trace))?;
    let report = SweepReport { preset: cfg.text("preset"), cc, params: p, first: per_cycle[0].clone(), per_cycle };
    out.write_report("metrics.json", "sweep", &report)
}

#[derive(Serialize)]
struct Spread {
    n: usize,
    mean: Option<f64>,
    std: Option<f64>,
}

fn spread(xs: impl Iterator<Item = f64>) -> Spread {
    let xs: Vec<f64> = xs.collect();
    let n = xs.len();
    let mean = (n > 0).then(|| xs.iter().sum::<f64>() / n as f64);
    let std = mean.filter(|_| n > 1).map(|m| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    Spread { n, mean, std }
}

#[derive(Serialize)]
struct EnduranceSummary<'a> {
    preset: &'a str,
    cc: f64,
    cycles: usize,
    successes: usize,
    success_fraction: f64,
    passed: bool,
    v_set: Spread,
    v_reset: Spread,
}

pub fn endurance(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let cc = positive(cfg, "cc")?;
    let spec = sweep_spec(cfg)?;
    let mut state = DeviceState::new(&p);
    let rep = run_endurance(&mut state, &spec, cycles(cfg)?, cc, &p)?;
    let rows = rep.per_cycle.iter().enumerate().map(|(k, c): (usize, &CycleRecord)| {
        [
            (k + 1).to_string(),
            c.set_detected.to_string(),
            c.reset_detected.to_string(),
            opt_num(c.v_set),
            opt_num(c.v_reset),
            opt_num(c.on_off_ratio),
            c.success.to_string(),
        ]
    });
    out.write_csv(
        "cycles.csv",
        &["cycle", "set_detected", "reset_detected", "v_set", "v_reset", "on_off_ratio", "success"],
        rows,
    )?;
    let summary = EnduranceSummary {
        preset: cfg.text("preset"),
        cc,
        cycles: rep.cycles,
        successes: rep.successes,
        success_fraction: rep.success_fraction,
        passed: rep.passed(),
        v_set: spread(rep.per_cycle.iter().filter_map(|c| c.v_set)),
        v_reset: spread(rep.per_cycle.iter().filter_map(|c| c.v_reset)),
    };
    out.write_report("report.json", "endurance", &summary)
}

#[derive(Serialize)]
struct PulseReport<'a> {
    preset: &'a str,
    cc: f64,
    i_fire: f64,
    train: PulseTrain,
    params: DeviceParams,
    #[serde(flatten)]
    firing: FiringReport,
    w_final: f64,
}

pub fn pulse(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let (cc, i_fire) = (positive(cfg, "cc")?, positive(cfg, "i_fire")?);
    let train = pulse_train(cfg)?;
    let mut state = DeviceState::with_filament(&p, cfg.f64("initial_w")?).map_err(invalid)?;
    let (trace, firing) = run_pulse_train(&mut state, &train, cc, &p, i_fire)?;
    out.write_csv("trace.csv", &TRACE_HEADER, trace_rows(&trace))?;
    let report = PulseReport { preset: cfg.text("preset"), cc, i_fire, train, params: p, firing, w_final: state.w };
    out.write_report("report.json", "pulse", &report)
}

#[derive(Serialize)]
struct LifRun<'a> {
    preset: &'a str,
    cc: f64,
    i_fire: f64,
    t_recover: f64,
    train: PulseTrain,
    params: DeviceParams,
    cycles: Vec<LifReport>,
}

pub fn lif(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let (cc, i_fire) = (positive(cfg, "cc")?, positive(cfg, "i_fire")?);
    let t_recover = cfg.f64("t_recover")?;
    let train = pulse_train(cfg)?;
    let mut state = DeviceState::with_filament(&p, cfg.f64("initial_w")?).map_err(invalid)?;
    let reports = (0..cycles(cfg)?)
        .map(|_| run_lif_cycle(&mut state, &train, cc, &p, i_fire, t_recover))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = reports.iter().enumerate().map(|(k, r)| {
        [
            (k + 1).to_string(),
            r.firing.fired.to_string(),
            r.firing.firing_pulse_index.map(|i| i.to_string()).unwrap_or_default(),
            r.firing.firing_events.to_string(),
            num(r.firing.i_max),
            num(r.w_after_train),
            r.recovered.to_string(),
            opt_num(r.recovery_time),
            num(r.w_after_recovery),
        ]
    });
    out.write_csv(
        "cycles.csv",
        &[
            "cycle",
            "fired",
            "firing_pulse_index",
            "firing_events",
            "i_max",
            "w_after_train",
            "recovered",
            "recovery_time",
            "w_after_recovery",
        ],
        rows,
    )?;
    let run = LifRun { preset: cfg.text("preset"), cc, i_fire, t_recover, train, params: p, cycles: reports };
    out.write_report("report.json", "lif", &run)
}

#[derive(Serialize)]
struct FiringRatioSummary<'a> {
    preset: &'a str,
    cc: f64,
    i_fire: f64,
    trials: usize,
    pulses_per_trial: usize,
    template: PulseTrain,
    params: DeviceParams,
    /// Mean ratio never falls as the width grows (widths in the given order).
    means_non_decreasing: bool,
    rows: Vec<FiringRatioRow>,
}

pub fn firing_ratio(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let (cc, i_fire) = (positive(cfg, "cc")?, positive(cfg, "i_fire")?);
    let widths = cfg.f64_list("widths");
    if widths.is_empty() || !widths.iter().all(|w| *w > 0.0) {
        return Err(CliError::Config("key `widths` needs one or more positive widths".into()));
    }
    let (trials, pulses) = (cfg.usize("trials")?, cfg.usize("n_pulses")?);
    let template = PulseTrain {
        n_pulses: pulses,
        pulse_width: widths[0],
        pulse_amplitude: cfg.f64("pulse_amplitude")?,
        gap_width: cfg.f64("gap_width")?,
        gap_amplitude: cfg.f64("gap_amplitude")?,
    };
    template.validate().map_err(invalid)?;
    if trials == 0 {
        return Err(CliError::Config("key `trials` must be >= 1".into()));
    }
    let rows = run_firing_ratio(&p, &template, &widths, trials, pulses, cc, i_fire)?;
    let csv_rows = rows
        .iter()
        .flat_map(|r| r.ratios.iter().enumerate().map(move |(k, x)| [num(r.pulse_width), k.to_string(), num(*x)]));
    out.write_csv("ratios.csv", &["pulse_width", "trial", "ratio"], csv_rows)?;
    let summary = FiringRatioSummary {
        preset: cfg.text("preset"),
        cc,
        i_fire,
        trials,
        pulses_per_trial: pulses,
        template,
        params: p,
        means_non_decreasing: rows.windows(2).all(|w| w[1].mean >= w[0].mean),
        rows,
    };
    out.write_report("summary.json", "firing-ratio", &summary)
}

#[derive(Serialize)]
struct PlasticityRun<'a> {
    preset: &'a str,
    kind: &'a str,
    cc: f64,
    train: PulseTrain,
    params: DeviceParams,
    #[serde(flatten)]
    report: PlasticityReport,
}

pub fn plasticity(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let p = cfg.device_params()?;
    let cc = positive(cfg, "cc")?;
    let train = pulse_train(cfg)?;
    let mut state = DeviceState::with_filament(&p, 0.0).map_err(invalid)?;
    let report = run_plasticity(&mut state, &train, cc, &p)?;
    let rows = report.gap_conductance.iter().enumerate().map(|(k, g)| [(k + 1).to_string(), num(*g)]);
    out.write_csv("gap_conductance.csv", &["pulse", "conductance_S"], rows)?;
    let run = PlasticityRun { preset: cfg.text("preset"), kind: cfg.text("kind"), cc, train, params: p, report };
    out.write_report("report.json", "plasticity", &run)
}
