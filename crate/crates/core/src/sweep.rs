//! Piecewise-linear I-V sweeps, switching metrics and endurance cycling.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::device::{advance, observe, DeviceParams, DeviceState, TracePoint};
use crate::math;
use crate::{Error, Result};

/// Current ratio between consecutive sweep points that counts as a switching event.
pub const JUMP_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `(t, v)` corners of the voltage path, times strictly increasing.
    pub vertices: Vec<(f64, f64)>,
    pub points_per_segment: usize,
}

impl SweepSpec {
    /// `0 → +v_pos → 0 → −v_neg → 0`, each leg taking `leg_time`.
    pub fn bipolar(v_pos: f64, v_neg: f64, leg_time: f64, points_per_segment: usize) -> Self {
        SweepSpec {
            vertices: alloc::vec![
                (0.0, 0.0),
                (leg_time, v_pos),
                (2.0 * leg_time, 0.0),
                (3.0 * leg_time, -v_neg),
                (4.0 * leg_time, 0.0),
            ],
            points_per_segment,
        }
    }

    /// `0 → +v_pos → 0`.
    pub fn unipolar(v_pos: f64, leg_time: f64, points_per_segment: usize) -> Self {
        SweepSpec { vertices: alloc::vec![(0.0, 0.0), (leg_time, v_pos), (2.0 * leg_time, 0.0)], points_per_segment }
    }

    /// ±1.2 V in 5 mV steps, 60 ms per leg.
    pub fn standard() -> Self {
        SweepSpec::bipolar(1.2, 1.2, 60e-3, 240)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::InvalidInput("sweep needs at least two vertices".into()));
        }
        if self.points_per_segment == 0 {
            return Err(Error::InvalidInput("points_per_segment must be >= 1".into()));
        }
        for (t, v) in &self.vertices {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::InvalidInput("sweep vertices must be finite".into()));
            }
        }
        if self.vertices.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput("sweep times must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Runs a sweep and returns one trace point per sweep point (plus the start).
///
/// Between sweep points the device is sub-stepped at no more than
/// `params.dt_max()`; the voltage is linearly interpolated and each sub-step
/// sees the voltage at its start.
pub fn run_iv_sweep(
    state: &mut DeviceState,
    sweep: &SweepSpec,
    cc: f64,
    params: &DeviceParams,
) -> Result<Vec<TracePoint>> {
    run_iv_sweep_dt(state, sweep, cc, params, params.dt_max())
}

/// [`run_iv_sweep`] with an explicit sub-step bound `dt ≤ dt_max`.
pub fn run_iv_sweep_dt(
    state: &mut DeviceState,
    sweep: &SweepSpec,
    cc: f64,
    params: &DeviceParams,
    dt_max: f64,
) -> Result<Vec<TracePoint>> {
    sweep.validate()?;
    params.validate()?;
    if !(cc > 0.0) {
        return Err(Error::InvalidInput(format!("compliance must be positive, got {cc}")));
    }
    let n = sweep.points_per_segment;
    let mut trace = Vec::with_capacity((sweep.vertices.len() - 1) * n + 1);
    trace.push(observe(state, sweep.vertices[0].1, cc, params));
    if !(dt_max > 0.0 && dt_max <= params.dt_max() * (1.0 + 1e-9)) {
        return Err(Error::InvalidInput(format!("sub-step {dt_max} outside (0, dt_max]")));
    }
    for seg in sweep.vertices.windows(2) {
        let (t0, v0) = seg[0];
        let (t1, v1) = seg[1];
        let h = (t1 - t0) / n as f64;
        let sub = math::ceil(h / dt_max - 1e-9).max(1.0) as usize;
        let dt = h / sub as f64;
        let mut v_prev = v0;
        for k in 1..=n {
            let v_k = v0 + (v1 - v0) * (k as f64 / n as f64);
            for j in 0..sub {
                let v = v_prev + (v_k - v_prev) * (j as f64 / sub as f64);
                advance(state, v, cc, dt, params);
            }
            trace.push(observe(state, v_k, cc, params));
            v_prev = v_k;
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingMetrics {
    /// `false` when no SET jump was found; the device counts as failed.
    pub switched: bool,
    /// Voltage of the last sweep point before the SET jump.
    pub v_set: Option<f64>,
    /// Voltage of the last sweep point before the RESET drop.
    pub v_reset: Option<f64>,
    pub on_off_ratio: Option<f64>,
    pub turn_on_slope_mv_per_decade: Option<f64>,
    /// `V·I` at the last point before the SET jump, watts.
    pub set_power: Option<f64>,
}

fn closest_to(trace: &[TracePoint], idx: impl Iterator<Item = usize>, v: f64) -> Option<usize> {
    idx.min_by(|&a, &b| {
        let da = (trace[a].v - v).abs();
        let db = (trace[b].v - v).abs();
        da.partial_cmp(&db).unwrap_or(core::cmp::Ordering::Equal)
    })
}

/// Locates SET/RESET events in a bipolar sweep trace.
pub fn extract_switching_metrics(trace: &[TracePoint], params: &DeviceParams) -> SwitchingMetrics {
    let mut m = SwitchingMetrics {
        switched: false,
        v_set: None,
        v_reset: None,
        on_off_ratio: None,
        turn_on_slope_mv_per_decade: None,
        set_power: None,
    };
    let set_idx = (1..trace.len()).find(|&k| {
        let (a, b) = (&trace[k - 1], &trace[k]);
        a.v > 0.0 && b.v > a.v && a.i.abs() > 0.0 && b.i.abs() >= JUMP_RATIO * a.i.abs()
    });
    let Some(k) = set_idx else {
        return m;
    };
    let (a, b) = (&trace[k - 1], &trace[k]);
    m.switched = true;
    m.v_set = Some(a.v);
    m.set_power = Some(a.v * a.i.abs());
    let decades = math::log10(b.i.abs() / a.i.abs());
    m.turn_on_slope_mv_per_decade = Some(1e3 * (b.v - a.v) / decades);

    let read = params.read_voltage;
    // pre-SET read on the rising branch, post-SET read on the falling positive branch
    let pre = closest_to(trace, (1..k).filter(|&j| trace[j].v > 0.0 && trace[j].v >= trace[j - 1].v), read);
    let post =
        closest_to(trace, (k + 1..trace.len()).filter(|&j| trace[j].v > 0.0 && trace[j].v < trace[j - 1].v), read);
    if let (Some(p), Some(q)) = (pre, post) {
        if trace[p].i.abs() > 0.0 {
            m.on_off_ratio = Some(trace[q].i.abs() / trace[p].i.abs());
        }
    }
    m.v_reset = (k + 1..trace.len())
        .find(|&j| {
            let (a, b) = (&trace[j - 1], &trace[j]);
            a.v < 0.0 && b.v < a.v && b.i.abs() * JUMP_RATIO <= a.i.abs()
        })
        .map(|j| trace[j - 1].v);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub set_detected: bool,
    pub reset_detected: bool,
    pub v_set: Option<f64>,
    pub v_reset: Option<f64>,
    pub on_off_ratio: Option<f64>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnduranceReport {
    pub cycles: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub per_cycle: Vec<CycleRecord>,
}

/// Fraction of cycles that must switch for an endurance run to pass.
pub const ENDURANCE_PASS_FRACTION: f64 = 0.99;

impl EnduranceReport {
    pub fn passed(&self) -> bool {
        self.success_fraction >= ENDURANCE_PASS_FRACTION
    }
}

/// Repeats `sweep` for `cycles` SET/RESET cycles.
///
/// A cycle succeeds when both a SET jump and a RESET drop are found and the
/// read ON/OFF ratio across the cycle is at least [`JUMP_RATIO`].
pub fn run_endurance(
    state: &mut DeviceState,
    sweep: &SweepSpec,
    cycles: usize,
    cc: f64,
    params: &DeviceParams,
) -> Result<EnduranceReport> {
    if cycles == 0 {
        return Err(Error::InvalidInput("endurance needs at least one cycle".into()));
    }
    let mut per_cycle = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let trace = run_iv_sweep(state, sweep, cc, params)?;
        let m = extract_switching_metrics(&trace, params);
        let reset_detected = m.v_reset.is_some();
        let success = m.switched && reset_detected && m.on_off_ratio.is_some_and(|r| r >= JUMP_RATIO);
        per_cycle.push(CycleRecord {
            set_detected: m.switched,
            reset_detected,
            v_set: m.v_set,
            v_reset: m.v_reset,
            on_off_ratio: m.on_off_ratio,
            success,
        });
    }
    let successes = per_cycle.iter().filter(|c| c.success).count();
    Ok(EnduranceReport { cycles, successes, success_fraction: successes as f64 / cycles as f64, per_cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{hold, Preset, Regime};
    use approx::assert_relative_eq;

    fn run(preset: Preset, jitter: bool, cc: f64) -> (DeviceState, Vec<TracePoint>, DeviceParams) {
        let mut p = preset.params();
        if !jitter {
            p = p.without_jitter();
        }
        let mut s = DeviceState::new(&p);
        let tr = run_iv_sweep(&mut s, &SweepSpec::standard(), cc, &p).unwrap();
        (s, tr, p)
    }

    #[test]
    fn nonvolatile_sweep_sets_at_nominal_threshold() {
        let (s, tr, p) = run(Preset::Nonvolatile1mA, false, 1e-3);
        let m = extract_switching_metrics(&tr, &p);
        assert!(m.switched);
        assert!((m.v_set.unwrap() - 0.29).abs() <= 0.01, "{:?}", m.v_set);
        assert!(m.on_off_ratio.unwrap() >= 1e5, "{:?}", m.on_off_ratio);
        assert!(m.v_reset.unwrap() <= -0.43);
        assert_eq!(s.regime, Regime::Volatile);
    }

    #[test]
    fn volatile_sweep_returns_to_hrs() {
        let (mut s, tr, p) = run(Preset::Volatile10uA, false, 1e-5);
        let m = extract_switching_metrics(&tr, &p);
        assert!(m.switched);
        assert!(tr.iter().all(|t| t.i.abs() <= 1e-5));
        hold(&mut s, 0.0, 10.0 * p.tau_relax, 1e-5, p.dt_max(), &p, |_| {}).unwrap();
        let read = crate::device::observe(&s, p.read_voltage, 1e-5, &p);
        assert_relative_eq!(read.i, p.g_off * p.read_voltage, max_relative = 1e-3);
    }

    #[test]
    fn pinched_hysteresis() {
        let (_, tr, _) = run(Preset::Nonvolatile1mA, true, 1e-3);
        for tp in tr.iter().filter(|t| t.v == 0.0) {
            assert_eq!(tp.i, 0.0);
        }
    }

    #[test]
    fn bdt_device_does_not_switch_below_forming() {
        let p = Preset::BdtTreated.params().without_jitter();
        let mut s = DeviceState::new(&p);
        let sweep = SweepSpec::bipolar(1.0, 1.0, 60e-3, 200);
        let tr = run_iv_sweep(&mut s, &sweep, 1e-3, &p).unwrap();
        for tp in &tr {
            assert_relative_eq!(tp.i, p.g_off * tp.v, max_relative = 1e-12);
        }
        assert!(!extract_switching_metrics(&tr, &p).switched);
    }

    #[test]
    fn flat_ohmic_trace_is_non_switching() {
        let p = DeviceParams::default();
        let tr: Vec<TracePoint> = (0..50)
            .map(|k| {
                let v = k as f64 * 0.02;
                TracePoint { t: k as f64, v, i: 1e-6 * v, w: 0.0, g: 1e-6 }
            })
            .collect();
        let m = extract_switching_metrics(&tr, &p);
        assert!(!m.switched);
        assert_eq!(m.v_set, None);
    }

    #[test]
    fn set_voltage_statistics_follow_jitter() {
        let p = Preset::Nonvolatile1mA.params();
        let p = DeviceParams { seed: 7, ..p };
        let mut s = DeviceState::new(&p);
        let mut vs = Vec::new();
        for _ in 0..50 {
            let tr = run_iv_sweep(&mut s, &SweepSpec::standard(), 1e-3, &p).unwrap();
            vs.push(extract_switching_metrics(&tr, &p).v_set.unwrap());
        }
        let std = math::sample_std(&vs);
        assert!((std - 0.10).abs() <= 0.03, "std {std}");
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let p = DeviceParams::default();
        let mut s = DeviceState::new(&p);
        let sweep = SweepSpec { vertices: alloc::vec![(0.0, 0.0)], points_per_segment: 10 };
        assert!(run_iv_sweep(&mut s, &sweep, 1e-3, &p).is_err());
        let sweep = SweepSpec { vertices: alloc::vec![(0.0, 0.0), (0.0, 1.0)], points_per_segment: 10 };
        assert!(run_iv_sweep(&mut s, &sweep, 1e-3, &p).is_err());
    }

    #[test]
    fn endurance_single_cycle() {
        let p = Preset::Nonvolatile1mA.params();
        let mut s = DeviceState::new(&p);
        let r = run_endurance(&mut s, &SweepSpec::standard(), 1, 1e-3, &p).unwrap();
        assert_eq!(r.successes, 1);
    }

    #[test]
    fn endurance_fails_when_sweep_stays_below_threshold() {
        // narrower jitter so the threshold floor is v_set − 3σ = 0.14 V
        let p = DeviceParams { v_set_sigma: 0.05, ..Preset::Nonvolatile1mA.params() };
        let sweep = SweepSpec::bipolar(0.13, 1.2, 60e-3, 240);
        let mut s = DeviceState::new(&p);
        let r = run_endurance(&mut s, &sweep, 100, 1e-3, &p).unwrap();
        assert_eq!(r.successes, 0);
        // at the nominal 0.10 V σ the bound v_set − 3σ is negative; the read-level floor applies
        let p = Preset::Nonvolatile1mA.params();
        let sweep = SweepSpec::bipolar(p.read_voltage, 1.2, 60e-3, 240);
        let mut s = DeviceState::new(&p);
        let r = run_endurance(&mut s, &sweep, 100, 1e-3, &p).unwrap();
        assert_eq!(r.successes, 0);
    }

    #[test]
    fn dt_refinement_converges() {
        // same protocol with a 10x finer sweep sub-step
        for preset in [Preset::Nonvolatile1mA, Preset::Volatile10uA] {
            let p = preset.params().without_jitter();
            let cc = preset.default_cc();
            let sweep = SweepSpec::unipolar(1.2, 60e-3, 240);
            let mut a = DeviceState::new(&p);
            run_iv_sweep_dt(&mut a, &sweep, cc, &p, p.dt_max()).unwrap();
            let mut b = DeviceState::new(&p);
            run_iv_sweep_dt(&mut b, &sweep, cc, &p, p.dt_max() / 10.0).unwrap();
            assert!((a.w - b.w).abs() <= 0.01 * a.w.max(b.w) + 1e-9, "{} vs {}", a.w, b.w);
        }
    }
}
