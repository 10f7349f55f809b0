//! Pulse-train protocols: integrate-and-fire, firing ratio and plasticity.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::device::{advance, observe, DeviceParams, DeviceState, Regime, TracePoint};
use crate::math;
use crate::{Error, Result};

/// Current that counts as a firing event.
pub const DEFAULT_I_FIRE: f64 = 1e-6;
/// Sub-steps per pulse or gap, at minimum.
const STEPS_PER_PHASE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub n_pulses: usize,
    pub pulse_width: f64,
    pub pulse_amplitude: f64,
    pub gap_width: f64,
    /// Bias held between pulses, normally the read level.
    pub gap_amplitude: f64,
}

impl PulseTrain {
    /// `(0.1 ms, 1 V; 0.1 ms, 0.1 V)`, the integrate-and-fire stimulus.
    pub fn lif_nominal(n_pulses: usize) -> Self {
        PulseTrain { n_pulses, pulse_width: 0.1e-3, pulse_amplitude: 1.0, gap_width: 0.1e-3, gap_amplitude: 0.1 }
    }

    /// `(15 ms, 2.5 V; 10 ms, 0.1 V)`.
    pub fn stp_nominal(n_pulses: usize) -> Self {
        PulseTrain { n_pulses, pulse_width: 15e-3, pulse_amplitude: 2.5, gap_width: 10e-3, gap_amplitude: 0.1 }
    }

    /// `(20 ms, 3.5 V; 10 ms, 0.1 V)`.
    pub fn ltp_nominal(n_pulses: usize) -> Self {
        PulseTrain { n_pulses, pulse_width: 20e-3, pulse_amplitude: 3.5, gap_width: 10e-3, gap_amplitude: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(Error::InvalidInput("pulse train needs n_pulses >= 1".into()));
        }
        if !(self.pulse_width > 0.0 && self.gap_width > 0.0) {
            return Err(Error::InvalidInput("pulse and gap widths must be > 0".into()));
        }
        let vals = [self.pulse_width, self.gap_width, self.pulse_amplitude, self.gap_amplitude];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("pulse train values must be finite".into()));
        }
        Ok(())
    }

    /// Step bound: `dt_max` and at least 20 steps per pulse and per gap.
    pub fn dt(&self, params: &DeviceParams) -> f64 {
        params.dt_max().min(self.pulse_width / STEPS_PER_PHASE).min(self.gap_width / STEPS_PER_PHASE)
    }

    pub fn duration(&self) -> f64 {
        self.n_pulses as f64 * (self.pulse_width + self.gap_width)
    }
}

/// Which part of a train a trace point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Zero-based pulse index.
    Pulse(usize),
    Gap(usize),
}

fn phase_steps(width: f64, dt: f64) -> (usize, f64) {
    let n = math::ceil(width / dt - 1e-9).max(1.0) as usize;
    (n, width / n as f64)
}

/// Drives `train` through the device, reporting every step to `obs`.
pub fn drive_train<F: FnMut(Phase, &TracePoint)>(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
    dt: f64,
    mut obs: F,
) -> Result<()> {
    train.validate()?;
    params.validate()?;
    if !(cc > 0.0) {
        return Err(Error::InvalidInput(format!("compliance must be positive, got {cc}")));
    }
    if !(dt > 0.0 && dt <= params.dt_max() * (1.0 + 1e-9)) {
        return Err(Error::InvalidInput(format!("dt = {dt} outside (0, dt_max]")));
    }
    let (np, hp) = phase_steps(train.pulse_width, dt);
    let (ng, hg) = phase_steps(train.gap_width, dt);
    for k in 0..train.n_pulses {
        for _ in 0..np {
            advance(state, train.pulse_amplitude, cc, hp, params);
            obs(Phase::Pulse(k), &observe(state, train.pulse_amplitude, cc, params));
        }
        for _ in 0..ng {
            advance(state, train.gap_amplitude, cc, hg, params);
            obs(Phase::Gap(k), &observe(state, train.gap_amplitude, cc, params));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringReport {
    pub fired: bool,
    /// One-based index of the first pulse whose current reached `i_fire`.
    pub firing_pulse_index: Option<usize>,
    /// Number of pulses during which the current reached `i_fire`.
    pub firing_events: usize,
    pub i_max: f64,
    pub post_train_regime: Regime,
}

struct FiringTracker {
    i_fire: f64,
    first: Option<usize>,
    events: usize,
    last_counted: Option<usize>,
    i_max: f64,
}

impl FiringTracker {
    fn new(i_fire: f64) -> Self {
        FiringTracker { i_fire, first: None, events: 0, last_counted: None, i_max: 0.0 }
    }

    fn see(&mut self, phase: Phase, tp: &TracePoint) {
        self.i_max = self.i_max.max(tp.i.abs());
        if let Phase::Pulse(k) = phase {
            if tp.i.abs() >= self.i_fire && self.last_counted != Some(k) {
                self.last_counted = Some(k);
                self.events += 1;
                self.first.get_or_insert(k + 1);
            }
        }
    }

    fn report(self, regime: Regime) -> FiringReport {
        FiringReport {
            fired: self.first.is_some(),
            firing_pulse_index: self.first,
            firing_events: self.events,
            i_max: self.i_max,
            post_train_regime: regime,
        }
    }
}

/// Runs a pulse train, returning the full trace and the firing summary.
pub fn run_pulse_train(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
    i_fire: f64,
) -> Result<(Vec<TracePoint>, FiringReport)> {
    run_pulse_train_dt(state, train, cc, params, i_fire, train.dt(params))
}

pub fn run_pulse_train_dt(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
    i_fire: f64,
    dt: f64,
) -> Result<(Vec<TracePoint>, FiringReport)> {
    let mut trace = Vec::new();
    let mut fire = FiringTracker::new(i_fire);
    trace.push(observe(state, 0.0, cc, params));
    drive_train(state, train, cc, params, dt, |ph, tp| {
        fire.see(ph, tp);
        trace.push(*tp);
    })?;
    Ok((trace, fire.report(state.regime)))
}

/// Firing summary only; nothing is buffered.
pub fn fire_train(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
    i_fire: f64,
) -> Result<FiringReport> {
    let mut fire = FiringTracker::new(i_fire);
    drive_train(state, train, cc, params, train.dt(params), |ph, tp| fire.see(ph, tp))?;
    Ok(fire.report(state.regime))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifReport {
    pub firing: FiringReport,
    pub recovered: bool,
    /// Time after the train until `w < 0.01·w_crit`, if reached.
    pub recovery_time: Option<f64>,
    pub w_after_train: f64,
    pub w_after_recovery: f64,
}

/// One integrate-and-fire cycle: the train, then `t_recover` at the read level.
pub fn run_lif_cycle(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
    i_fire: f64,
    t_recover: f64,
) -> Result<LifReport> {
    if state.regime == Regime::NonVolatile {
        return Err(Error::Protocol("integrate-and-fire needs a volatile device; filament is stable".into()));
    }
    if !(t_recover >= 0.0) {
        return Err(Error::InvalidInput(format!("t_recover must be >= 0, got {t_recover}")));
    }
    let firing = fire_train(state, train, cc, params, i_fire)?;
    let w_after_train = state.w;
    let target = 1e-2 * params.w_crit;
    let t0 = state.t;
    let mut recovery_time = (state.w < target).then_some(0.0);
    if t_recover > 0.0 {
        let (n, h) = phase_steps(t_recover, train.dt(params));
        for _ in 0..n {
            advance(state, params.read_voltage, cc, h, params);
            if recovery_time.is_none() && state.w < target {
                recovery_time = Some(state.t - t0);
            }
        }
    }
    Ok(LifReport { firing, recovered: state.w < target, recovery_time, w_after_train, w_after_recovery: state.w })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringRatioRow {
    pub pulse_width: f64,
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Seed for trial `k` of a batch derived from `base`.
pub fn trial_seed(base: u64, k: usize) -> u64 {
    base ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Firing ratio per pulse width.
///
/// Every trial starts from a fresh formed device seeded with
/// [`trial_seed`]; the same seeds are reused across widths.
pub fn firing_ratio(
    params: &DeviceParams,
    template: &PulseTrain,
    widths: &[f64],
    trials: usize,
    pulses_per_trial: usize,
    cc: f64,
    i_fire: f64,
) -> Result<Vec<FiringRatioRow>> {
    if trials == 0 || pulses_per_trial == 0 {
        return Err(Error::InvalidInput("trials and pulses_per_trial must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(widths.len());
    for &width in widths {
        let train = PulseTrain { n_pulses: pulses_per_trial, pulse_width: width, ..*template };
        train.validate()?;
        let mut ratios = Vec::with_capacity(trials);
        for k in 0..trials {
            let p = DeviceParams { seed: trial_seed(params.seed, k), ..*params };
            let mut s = DeviceState::with_filament(&p, 0.0)?;
            let rep = fire_train(&mut s, &train, cc, &p, i_fire)?;
            ratios.push(rep.firing_events as f64 / pulses_per_trial as f64);
        }
        rows.push(FiringRatioRow {
            pulse_width: width,
            mean: math::mean(&ratios),
            std: math::sample_std(&ratios),
            min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ratios,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlasticityOutcome {
    /// Read conductance rose during the train and relaxed back afterwards.
    Stp,
    /// Filament ended the train stable.
    Ltp,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityReport {
    pub outcome: PlasticityOutcome,
    pub baseline_conductance: f64,
    /// Conductance at the end of each gap.
    pub gap_conductance: Vec<f64>,
    /// R² of a straight line through the ramp portion of `gap_conductance`.
    pub linearity_r2: Option<f64>,
    pub ramp: (usize, usize),
    pub w_end_of_train: f64,
    pub post_train_regime: Regime,
    /// Read conductance after idling `10·tau_relax` at the read level.
    pub conductance_after_decay: f64,
}

/// Relative margin used to call a read conductance "risen" or "back at baseline".
pub const BASELINE_TOLERANCE: f64 = 0.01;

/// Runs a plasticity train and classifies it as STP, LTP or neither.
pub fn run_plasticity(
    state: &mut DeviceState,
    train: &PulseTrain,
    cc: f64,
    params: &DeviceParams,
) -> Result<PlasticityReport> {
    let baseline = state.conductance(params);
    let mut gap_g = Vec::with_capacity(train.n_pulses);
    let (ng, _) = phase_steps(train.gap_width, train.dt(params));
    let mut gap_step = 0usize;
    drive_train(state, train, cc, params, train.dt(params), |ph, tp| {
        if let Phase::Gap(_) = ph {
            gap_step += 1;
            if gap_step == ng {
                gap_g.push(tp.g);
                gap_step = 0;
            }
        }
    })?;
    let w_end = state.w;
    let regime = state.regime;
    let decay = 10.0 * params.tau_relax;
    let (n, h) = phase_steps(decay, params.dt_max());
    for _ in 0..n {
        advance(state, params.read_voltage, cc, h, params);
    }
    let after = state.conductance(params);

    let ltp = w_end >= params.w_crit;
    let rose = gap_g.iter().any(|&g| g > baseline * (1.0 + BASELINE_TOLERANCE));
    let back = after <= baseline * (1.0 + BASELINE_TOLERANCE);
    let outcome = if ltp {
        PlasticityOutcome::Ltp
    } else if rose && back {
        PlasticityOutcome::Stp
    } else {
        PlasticityOutcome::None
    };

    // LTP ramps are measured from the first stable gap; either ramp ends once
    // the read conductance is within 1% of its maximum.
    let start = if ltp {
        let mut w = 0usize;
        let lnspan = params.ln_span();
        let g_crit = params.g_off * math::exp(params.w_crit * lnspan);
        while w < gap_g.len() && gap_g[w] < g_crit {
            w += 1;
        }
        w.min(gap_g.len().saturating_sub(1))
    } else {
        0
    };
    let (ramp, r2) = if gap_g.is_empty() {
        ((0, 0), None)
    } else {
        let peak = gap_g[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let end = (start..gap_g.len()).find(|&k| gap_g[k] >= 0.99 * peak).unwrap_or(gap_g.len() - 1);
        ((start, end), math::linear_r2(&gap_g[start..=end]))
    };
    Ok(PlasticityReport {
        outcome,
        baseline_conductance: baseline,
        gap_conductance: gap_g,
        linearity_r2: r2,
        ramp,
        w_end_of_train: w_end,
        post_train_regime: regime,
        conductance_after_decay: after,
    })
}

/// Closed-form single-pulse bookkeeping for an unclamped, sub-`w_crit`
/// filament with jitter off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakAnalysis {
    /// `1 − w` is multiplied by this over one pulse.
    pub pulse_factor: f64,
    /// `w` is multiplied by this over one gap.
    pub gap_factor: f64,
    /// Limit of the post-pulse filament strength over an infinite train.
    pub fixed_point: f64,
    /// Filament strength at which the pulse current reaches `i_fire`.
    pub fire_level: f64,
}

impl LeakAnalysis {
    /// The post-pulse sequence rises monotonically to `fixed_point` from a
    /// relaxed start, so a fixed point below the firing level means no
    /// train of any length fires.
    pub fn never_fires(&self) -> bool {
        self.fixed_point < self.fire_level
    }
}

pub fn analyze_train(train: &PulseTrain, params: &DeviceParams, i_fire: f64) -> LeakAnalysis {
    let v = train.pulse_amplitude;
    let pulse_factor = if v > 0.0 && v >= params.v_set_nominal {
        let rate = params.k_growth * math::exp((v - params.v_set_nominal) / params.v0_growth);
        math::exp(-rate * train.pulse_width)
    } else {
        1.0
    };
    let gap_factor = if train.gap_amplitude.abs() <= params.read_voltage {
        math::exp(-train.gap_width / params.tau_relax)
    } else {
        1.0
    };
    let fixed_point = if pulse_factor >= 1.0 { 0.0 } else { (1.0 - pulse_factor) / (1.0 - pulse_factor * gap_factor) };
    LeakAnalysis {
        pulse_factor,
        gap_factor,
        fixed_point,
        fire_level: if v > 0.0 { params.w_for_current(i_fire, v) } else { f64::INFINITY },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifCalibration {
    /// Smallest growth rate that fires by the target pulse.
    pub k_low: f64,
    /// Smallest growth rate that fires one pulse earlier.
    pub k_high: f64,
    /// Geometric midpoint of the window.
    pub k_growth: f64,
}

fn first_fire(params: &DeviceParams, train: &PulseTrain, cc: f64, i_fire: f64) -> Result<Option<usize>> {
    let mut s = DeviceState::with_filament(params, 0.0)?;
    Ok(fire_train(&mut s, train, cc, params, i_fire)?.firing_pulse_index)
}

/// Bisects `k_growth` (in log space, jitter off) for the window in which
/// `train` first fires exactly on pulse `target`.
pub fn calibrate_lif_growth(
    params: &DeviceParams,
    train: &PulseTrain,
    cc: f64,
    i_fire: f64,
    target: usize,
) -> Result<LifCalibration> {
    if target < 2 || target > train.n_pulses {
        return Err(Error::InvalidInput(format!("target pulse {target} must lie in 2..={}", train.n_pulses)));
    }
    let base = params.without_jitter();
    let fires_by = |k: f64, idx: usize| -> Result<bool> {
        let p = DeviceParams { k_growth: k, ..base };
        Ok(first_fire(&p, train, cc, i_fire)?.is_some_and(|f| f <= idx))
    };
    let boundary = |idx: usize| -> Result<f64> {
        let (mut lo, mut hi) = (-6.0f64, 12.0f64);
        if fires_by(math::powf(10.0, lo), idx)? || !fires_by(math::powf(10.0, hi), idx)? {
            return Err(Error::Protocol(format!("cannot bracket firing at pulse {idx}")));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fires_by(math::powf(10.0, mid), idx)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(math::powf(10.0, hi))
    };
    let k_low = boundary(target)?;
    let k_high = boundary(target - 1)?;
    Ok(LifCalibration { k_low, k_high, k_growth: math::sqrt(k_low * k_high) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{Preset, LIF_K_GROWTH};

    fn lif() -> DeviceParams {
        Preset::LifCalibrated.params().without_jitter()
    }

    fn fresh(p: &DeviceParams) -> DeviceState {
        DeviceState::with_filament(p, 0.0).unwrap()
    }

    #[test]
    fn calibrated_neuron_fires_on_fifth_pulse() {
        let p = lif();
        let mut s = fresh(&p);
        let (_, rep) = run_pulse_train(&mut s, &PulseTrain::lif_nominal(10), 1e-5, &p, DEFAULT_I_FIRE).unwrap();
        assert_eq!(rep.firing_pulse_index, Some(5));
        assert_eq!(rep.post_train_regime, Regime::Volatile);
    }

    #[test]
    fn frozen_growth_constant_matches_calibration() {
        let p = lif();
        let cal = calibrate_lif_growth(&p, &PulseTrain::lif_nominal(10), 1e-5, DEFAULT_I_FIRE, 5).unwrap();
        assert!(cal.k_low < LIF_K_GROWTH && LIF_K_GROWTH < cal.k_high, "{cal:?}");
        assert!((cal.k_growth - LIF_K_GROWTH).abs() / LIF_K_GROWTH < 0.01, "{cal:?}");
    }

    #[test]
    fn zero_amplitude_never_fires() {
        let p = lif();
        let mut s = fresh(&p);
        let train = PulseTrain { pulse_amplitude: 0.0, gap_amplitude: 0.0, ..PulseTrain::lif_nominal(10) };
        let (tr, rep) = run_pulse_train(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE).unwrap();
        assert!(!rep.fired);
        assert!(tr.iter().all(|t| t.i == 0.0));
    }

    #[test]
    fn firing_index_independent_of_dt() {
        let p = lif();
        let train = PulseTrain::lif_nominal(10);
        let dt = train.dt(&p);
        let mut a = fresh(&p);
        let (_, ra) = run_pulse_train_dt(&mut a, &train, 1e-5, &p, DEFAULT_I_FIRE, dt).unwrap();
        let mut b = fresh(&p);
        let (_, rb) = run_pulse_train_dt(&mut b, &train, 1e-5, &p, DEFAULT_I_FIRE, dt / 10.0).unwrap();
        assert_eq!(ra.firing_pulse_index, rb.firing_pulse_index);
        assert!((a.w - b.w).abs() <= 0.01 * a.w.max(b.w));
    }

    #[test]
    fn lif_cycle_recovers_and_refires() {
        let p = lif();
        let mut s = fresh(&p);
        let train = PulseTrain::lif_nominal(10);
        let first = run_lif_cycle(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE, 10.0 * p.tau_relax).unwrap();
        assert!(first.firing.fired && first.recovered);
        assert!(first.recovery_time.unwrap() <= 10.0 * p.tau_relax);
        let second = run_lif_cycle(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE, 10.0 * p.tau_relax).unwrap();
        let (a, b) = (first.firing.firing_pulse_index.unwrap(), second.firing.firing_pulse_index.unwrap());
        assert!(a.abs_diff(b) <= 1);
    }

    #[test]
    fn weak_train_recovers_trivially() {
        let p = lif();
        let mut s = fresh(&p);
        let train = PulseTrain { pulse_amplitude: 0.3, ..PulseTrain::lif_nominal(10) };
        let r = run_lif_cycle(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE, 10.0 * p.tau_relax).unwrap();
        assert!(!r.firing.fired && r.recovered);
    }

    #[test]
    fn lif_rejects_stable_filament() {
        let p = lif();
        let mut s = DeviceState::with_filament(&p, 0.9).unwrap();
        let r = run_lif_cycle(&mut s, &PulseTrain::lif_nominal(10), 1e-5, &p, DEFAULT_I_FIRE, 1e-3);
        assert!(matches!(r, Err(Error::Protocol(_))));
    }

    #[test]
    fn firing_index_monotone_in_amplitude_and_width() {
        let p = lif();
        let idx = |amp: f64, width: f64| {
            let mut s = fresh(&p);
            let train = PulseTrain { pulse_amplitude: amp, pulse_width: width, ..PulseTrain::lif_nominal(40) };
            fire_train(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE).unwrap().firing_pulse_index.unwrap_or(usize::MAX)
        };
        let amps = [0.8, 0.9, 1.0, 1.1, 1.3];
        for w in amps.windows(2) {
            assert!(idx(w[1], 0.1e-3) <= idx(w[0], 0.1e-3));
        }
        let widths = [0.05e-3, 0.1e-3, 0.2e-3, 0.3e-3, 0.4e-3];
        for w in widths.windows(2) {
            assert!(idx(1.0, w[1]) <= idx(1.0, w[0]));
        }
    }

    #[test]
    fn leak_dominated_train_never_fires() {
        let p = lif();
        // shrink the pulse until the closed-form fixed point sits below the firing level
        let mut train = PulseTrain::lif_nominal(2000);
        train.pulse_width = 0.1e-3;
        while !analyze_train(&train, &p, DEFAULT_I_FIRE).never_fires() {
            train.pulse_width *= 0.8;
        }
        let mut s = fresh(&p);
        let rep = fire_train(&mut s, &train, 1e-5, &p, DEFAULT_I_FIRE).unwrap();
        assert!(!rep.fired, "{:?}", analyze_train(&train, &p, DEFAULT_I_FIRE));
        // and the analysis agrees with simulation on the nominal train
        assert!(!analyze_train(&PulseTrain::lif_nominal(10), &p, DEFAULT_I_FIRE).never_fires());
    }

    #[test]
    fn firing_ratio_is_monotone_and_reproducible() {
        let p = Preset::LifCalibrated.params();
        let template = PulseTrain::lif_nominal(100);
        let widths = [0.1e-3, 0.2e-3, 0.3e-3, 0.4e-3];
        let rows = firing_ratio(&p, &template, &widths, 10, 100, 1e-5, DEFAULT_I_FIRE).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].mean >= w[0].mean, "{} -> {}", w[0].mean, w[1].mean);
        }
        let again = firing_ratio(&p, &template, &widths, 10, 100, 1e-5, DEFAULT_I_FIRE).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn vanishing_width_never_fires() {
        let p = Preset::LifCalibrated.params();
        let rows = firing_ratio(&p, &PulseTrain::lif_nominal(100), &[1e-6], 3, 100, 1e-5, DEFAULT_I_FIRE).unwrap();
        assert_eq!(rows[0].mean, 0.0);
    }

    #[test]
    fn stp_and_ltp_dichotomy() {
        let p = Preset::Synapse5mA.params().without_jitter();
        let mut s = fresh(&p);
        let stp = run_plasticity(&mut s, &PulseTrain::stp_nominal(40), 5e-3, &p).unwrap();
        assert_eq!(stp.outcome, PlasticityOutcome::Stp);
        assert!(stp.gap_conductance.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(stp.post_train_regime, Regime::Volatile);

        let mut s = fresh(&p);
        let ltp = run_plasticity(&mut s, &PulseTrain::ltp_nominal(40), 5e-3, &p).unwrap();
        assert_eq!(ltp.outcome, PlasticityOutcome::Ltp);
        assert_eq!(ltp.post_train_regime, Regime::NonVolatile);
        assert!(ltp.conductance_after_decay >= *ltp.gap_conductance.last().unwrap());
        assert!(ltp.linearity_r2.unwrap() >= 0.9, "{:?}", ltp.linearity_r2);
    }

    #[test]
    fn read_only_train_is_flat() {
        let p = Preset::Synapse5mA.params().without_jitter();
        let mut s = fresh(&p);
        let train = PulseTrain { pulse_amplitude: 0.1, ..PulseTrain::stp_nominal(10) };
        let r = run_plasticity(&mut s, &train, 5e-3, &p).unwrap();
        assert_eq!(r.outcome, PlasticityOutcome::None);
        assert!(r.gap_conductance.iter().all(|&g| g == r.baseline_conductance));
    }
}
