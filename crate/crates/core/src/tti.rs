//! Tri-mode time-temperature indicator driven by a volatile memristor.
//!
//! Each temperature sample becomes one burst of identical pulses whose
//! amplitude follows a piecewise-linear temperature-to-voltage map. Bursts
//! are separated by an idle at the read level. The LED is off while the
//! device stays quiet, flashes when a burst produces firing events on a
//! volatile filament, and turns solid (and stays solid) once the filament
//! becomes stable.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::device::{advance, DeviceParams, DeviceState, Regime};
use crate::protocol::{fire_train, PulseTrain, DEFAULT_I_FIRE};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtiConfig {
    /// `(°C, V)` calibration points, strictly increasing in both.
    pub temp_to_volts: Vec<(f64, f64)>,
    pub pulse_width: f64,
    pub gap_width: f64,
    pub gap_amplitude: f64,
    pub i_fire: f64,
    pub cc: f64,
    /// Pulses in one burst.
    pub pulses_per_train: usize,
    /// Bursts in a canonical stimulus.
    pub repetitions: usize,
    /// Idle at the read level after every burst, seconds.
    pub inter_train_idle: f64,
}

/// Storage-safe, warning and spoilage temperatures of the default map.
pub const T_OK: f64 = 4.0;
pub const T_WARN: f64 = 15.0;
pub const T_SPOIL: f64 = 30.0;

impl Default for TtiConfig {
    fn default() -> Self {
        TtiConfig {
            temp_to_volts: alloc::vec![(T_OK, 0.3), (T_WARN, 0.8), (T_SPOIL, 1.5)],
            pulse_width: 0.2e-3,
            gap_width: 0.1e-3,
            gap_amplitude: 0.1,
            i_fire: DEFAULT_I_FIRE,
            cc: 1e-3,
            pulses_per_train: 100,
            repetitions: 10,
            inter_train_idle: 1.0,
        }
    }
}

impl TtiConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.temp_to_volts;
        if m.is_empty() {
            return Err(Error::InvalidParams("temperature map needs at least one point".into()));
        }
        if m.iter().any(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::InvalidParams("temperature map must be finite".into()));
        }
        if m.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::InvalidParams("temperature map must be strictly increasing".into()));
        }
        if self.pulses_per_train == 0 || self.repetitions == 0 {
            return Err(Error::InvalidParams("pulses_per_train and repetitions must be >= 1".into()));
        }
        if !(self.inter_train_idle >= 0.0 && self.cc > 0.0 && self.i_fire > 0.0) {
            return Err(Error::InvalidParams("need inter_train_idle >= 0, cc > 0, i_fire > 0".into()));
        }
        self.train(0.0).validate()
    }

    /// Linear interpolation between calibration points, clamped at the ends.
    pub fn volts_for(&self, temp_c: f64) -> f64 {
        let m = &self.temp_to_volts;
        let (first, last) = (m[0], m[m.len() - 1]);
        if temp_c <= first.0 {
            return first.1;
        }
        if temp_c >= last.0 {
            return last.1;
        }
        let k = m.windows(2).position(|w| temp_c <= w[1].0).unwrap_or(m.len() - 2);
        let ((t0, v0), (t1, v1)) = (m[k], m[k + 1]);
        v0 + (v1 - v0) * (temp_c - t0) / (t1 - t0)
    }

    /// One burst at the given amplitude.
    pub fn train(&self, amplitude: f64) -> PulseTrain {
        PulseTrain {
            n_pulses: self.pulses_per_train,
            pulse_width: self.pulse_width,
            pulse_amplitude: amplitude,
            gap_width: self.gap_width,
            gap_amplitude: self.gap_amplitude,
        }
    }

    /// The canonical stimulus: `repetitions` bursts at one amplitude.
    pub fn canonical(&self, amplitude: f64) -> Vec<PulseTrain> {
        alloc::vec![self.train(amplitude); self.repetitions]
    }
}

/// One burst per `(t_s, °C)` sample.
pub fn temp_to_pulses(series: &[(f64, f64)], config: &TtiConfig) -> Result<Vec<PulseTrain>> {
    config.validate()?;
    for (k, &(t, temp)) in series.iter().enumerate() {
        if !(t.is_finite() && temp.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite profile sample at row {k}")));
        }
    }
    if let Some(k) = series.windows(2).position(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInput(format!(
            "profile time must increase strictly; row {} is not after row {k}",
            k + 1
        )));
    }
    Ok(series.iter().map(|&(_, temp)| config.train(config.volts_for(temp))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Led {
    Off,
    Flash,
    Solid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TtiEventKind {
    /// A burst produced firing events.
    Fire,
    /// The filament became stable; the LED is latched on.
    Latch,
    /// The LED went dark again after flashing.
    Revert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtiEvent {
    /// Index of the burst since the indicator was armed.
    pub burst: usize,
    /// Device time at the end of the burst.
    pub t: f64,
    pub kind: TtiEventKind,
    pub firing_events: usize,
}

#[derive(Debug, Clone)]
pub struct TtiState {
    pub device: DeviceState,
    pub led: Led,
    pub latched: bool,
    pub events: Vec<TtiEvent>,
    pub bursts: usize,
}

impl TtiState {
    /// A relaxed, formed device with the LED off.
    pub fn new(params: &DeviceParams) -> Result<Self> {
        Ok(TtiState {
            device: DeviceState::with_filament(params, 0.0)?,
            led: Led::Off,
            latched: false,
            events: Vec::new(),
            bursts: 0,
        })
    }
}

/// Summary of one burst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstOutcome {
    pub amplitude: f64,
    pub firing_events: usize,
    pub led: Led,
    pub regime: Regime,
}

fn idle(state: &mut DeviceState, duration: f64, cc: f64, params: &DeviceParams) {
    if duration <= 0.0 {
        return;
    }
    let n = crate::math::ceil(duration / params.dt_max() - 1e-9).max(1.0) as usize;
    let h = duration / n as f64;
    for _ in 0..n {
        advance(state, params.read_voltage, cc, h, params);
    }
}

/// Runs the bursts through the indicator, each followed by the idle.
pub fn step_tti(
    state: &mut TtiState,
    trains: &[PulseTrain],
    config: &TtiConfig,
    params: &DeviceParams,
) -> Result<Vec<BurstOutcome>> {
    config.validate()?;
    let mut out = Vec::with_capacity(trains.len());
    for train in trains {
        let rep = fire_train(&mut state.device, train, config.cc, params, config.i_fire)?;
        let burst = state.bursts;
        state.bursts += 1;
        let t = state.device.t;
        let ev = |kind| TtiEvent { burst, t, kind, firing_events: rep.firing_events };
        if rep.firing_events > 0 {
            state.events.push(ev(TtiEventKind::Fire));
        }
        let led = if state.latched {
            Led::Solid
        } else if rep.post_train_regime == Regime::NonVolatile {
            state.latched = true;
            state.events.push(ev(TtiEventKind::Latch));
            Led::Solid
        } else if rep.firing_events > 0 {
            Led::Flash
        } else {
            if state.led == Led::Flash {
                state.events.push(ev(TtiEventKind::Revert));
            }
            Led::Off
        };
        state.led = led;
        idle(&mut state.device, config.inter_train_idle, config.cc, params);
        out.push(BurstOutcome {
            amplitude: train.pulse_amplitude,
            firing_events: rep.firing_events,
            led,
            regime: state.device.regime,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedSample {
    pub t_s: f64,
    pub temp_c: f64,
    pub volts: f64,
    pub led: Led,
    pub firing_events: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub timeline: Vec<LedSample>,
    pub events: Vec<TtiEvent>,
    pub final_led: Led,
    pub latched: bool,
}

/// End-to-end run of a temperature profile, one burst per sample.
pub fn run_scenario(series: &[(f64, f64)], config: &TtiConfig, params: &DeviceParams) -> Result<ScenarioReport> {
    let trains = temp_to_pulses(series, config)?;
    let mut state = TtiState::new(params)?;
    let mut timeline = Vec::with_capacity(series.len());
    for (&(t_s, temp_c), train) in series.iter().zip(&trains) {
        let o = step_tti(&mut state, core::slice::from_ref(train), config, params)?[0];
        timeline.push(LedSample {
            t_s,
            temp_c,
            volts: o.amplitude,
            led: o.led,
            firing_events: o.firing_events,
            w: state.device.w,
        });
    }
    Ok(ScenarioReport { timeline, events: state.events, final_led: state.led, latched: state.latched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Preset;
    use crate::protocol::analyze_train;

    fn lif() -> DeviceParams {
        Preset::LifCalibrated.params().without_jitter()
    }

    fn run(amplitude: f64, cfg: &TtiConfig, p: &DeviceParams) -> (TtiState, Vec<BurstOutcome>) {
        let mut s = TtiState::new(p).unwrap();
        let o = step_tti(&mut s, &cfg.canonical(amplitude), cfg, p).unwrap();
        (s, o)
    }

    #[test]
    fn temperature_map() {
        let c = TtiConfig::default();
        assert_eq!(c.volts_for(T_OK), 0.3);
        assert_eq!(c.volts_for(T_SPOIL), 1.5);
        assert_eq!(c.volts_for(-20.0), 0.3);
        assert_eq!(c.volts_for(80.0), 1.5);
        assert!((c.volts_for(9.5) - 0.55).abs() < 1e-12);
        let trains = temp_to_pulses(&[(0.0, T_OK), (1.0, T_OK)], &c).unwrap();
        assert!(trains.iter().all(|t| t.pulse_amplitude == 0.3));
        assert!(temp_to_pulses(&[], &c).unwrap().is_empty());
        assert!(temp_to_pulses(&[(1.0, 4.0), (0.5, 4.0)], &c).is_err());
        let bad = TtiConfig { temp_to_volts: alloc::vec![(0.0, 1.0), (10.0, 0.5)], ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn three_canonical_trains() {
        let (p, c) = (lif(), TtiConfig::default());
        let (s, o) = run(0.3, &c, &p);
        assert_eq!(s.led, Led::Off);
        assert!(o.iter().all(|b| b.firing_events == 0));

        let (s, o) = run(0.8, &c, &p);
        assert_eq!(s.led, Led::Flash);
        assert!(o.iter().all(|b| b.firing_events > 0 && b.regime == Regime::Volatile));
        assert!(!s.latched);

        let (mut s, _) = run(1.5, &c, &p);
        assert_eq!(s.led, Led::Solid);
        assert!(s.latched);
        // cooling and any later input keep it latched
        for amp in [0.3, 0.0, 0.8, 1.5] {
            let o = step_tti(&mut s, &c.canonical(amp), &c, &p).unwrap();
            assert!(o.iter().all(|b| b.led == Led::Solid));
        }
    }

    #[test]
    fn flash_reverts_after_cooling() {
        let (p, c) = (lif(), TtiConfig::default());
        let profile = [(0.0, T_OK), (60.0, T_WARN), (120.0, T_WARN), (180.0, T_OK), (240.0, T_OK)];
        let r = run_scenario(&profile, &c, &p).unwrap();
        let leds: Vec<Led> = r.timeline.iter().map(|s| s.led).collect();
        assert_eq!(leds, [Led::Off, Led::Flash, Led::Flash, Led::Off, Led::Off]);
        assert!(r.events.iter().any(|e| e.kind == TtiEventKind::Revert));
        assert!(!r.latched);
    }

    #[test]
    fn spoilage_latches_through_cooling() {
        let (p, c) = (lif(), TtiConfig::default());
        let profile = [(0.0, T_OK), (60.0, 35.0), (120.0, T_OK), (180.0, -5.0)];
        let r = run_scenario(&profile, &c, &p).unwrap();
        let leds: Vec<Led> = r.timeline.iter().map(|s| s.led).collect();
        assert_eq!(leds, [Led::Off, Led::Solid, Led::Solid, Led::Solid]);
        assert_eq!(r.events.iter().filter(|e| e.kind == TtiEventKind::Latch).count(), 1);
    }

    #[test]
    fn ok_profile_stays_off_and_is_deterministic() {
        let (p, c) = (Preset::LifCalibrated.params(), TtiConfig::default());
        let profile: Vec<(f64, f64)> = (0..6).map(|k| (k as f64 * 10.0, T_OK - 2.0 + k as f64 * 0.5)).collect();
        let a = run_scenario(&profile, &c, &p).unwrap();
        assert!(a.timeline.iter().all(|s| s.led == Led::Off));
        assert_eq!(a, run_scenario(&profile, &c, &p).unwrap());
        assert!(run_scenario(&[], &c, &p).unwrap().timeline.is_empty());
    }

    #[test]
    fn flash_threshold_below_solid_threshold() {
        let p = lif();
        let c = TtiConfig { repetitions: 1, inter_train_idle: 10e-3, ..TtiConfig::default() };
        let first = |want: Led| (1..=40).map(|k| k as f64 * 0.05).find(|&a| run(a, &c, &p).0.led == want).unwrap();
        let (flash, solid) = (first(Led::Flash), first(Led::Solid));
        assert!(flash < solid, "flash {flash} solid {solid}");
    }

    #[test]
    fn graphene_electrodes_lower_flash_threshold() {
        let p = Preset::GrapheneBe.params().without_jitter();
        let c = TtiConfig::default();
        assert_eq!(run(0.40, &c, &p).0.led, Led::Flash);
        assert_eq!(run(0.35, &c, &p).0.led, Led::Off);
        assert_eq!(run(0.40, &c, &lif()).0.led, Led::Off);
    }

    #[test]
    fn leak_dominated_bursts_stay_off() {
        let p = lif();
        let base = TtiConfig { repetitions: 2, inter_train_idle: 5e-3, ..TtiConfig::default() };
        for (amp, width) in [(0.5, 0.2e-3), (0.6, 0.1e-3), (0.7, 0.02e-3), (1.0, 0.005e-3)] {
            let c = TtiConfig { pulse_width: width, ..base.clone() };
            let a = analyze_train(&c.train(amp), &p, c.i_fire);
            assert!(a.never_fires(), "{amp} V {width} s: {a:?}");
            assert_eq!(run(amp, &c, &p).0.led, Led::Off);
        }
    }
}
