//! Single-device filament dynamics.
//!
//! The device is described by one scalar filament strength `w ∈ [0, 1]`.
//! Conductance is log-linear in `w` between `g_off` and `g_on_cap`. Positive
//! bias above the (jittered) SET threshold grows the filament, negative bias
//! below the RESET threshold ruptures it, and a filament weaker than `w_crit`
//! dissolves spontaneously with time constant `tau_relax` when the bias is at
//! or below the read level. Growth past `w_crit` needs at least `i_stab` of
//! current, which the compliance clamp denies at low CC: that gate is what
//! makes the compliance current select the volatile or non-volatile regime.
//!
//! Each step uses rates frozen at the start of the step and integrates the
//! resulting linear relaxations exactly, so `w` stays in `[0, 1]` for any
//! step size.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Threshold comparisons tolerate this much round-off in the applied voltage.
const V_EPS: f64 = 1e-12;
/// Jittered thresholds never come closer to zero than `read_voltage + JITTER_MARGIN`.
const JITTER_MARGIN: f64 = 0.01;
/// Jitter is clipped to this many standard deviations.
const JITTER_CLIP_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub v_set_nominal: f64,
    pub v_set_sigma: f64,
    pub v_reset_nominal: f64,
    pub v_reset_sigma: f64,
    pub g_off: f64,
    pub g_on_cap: f64,
    pub w_crit: f64,
    pub i_stab: f64,
    pub tau_relax: f64,
    /// Growth rate at the SET threshold, 1/s.
    pub k_growth: f64,
    pub v0_growth: f64,
    /// Rupture rate at the RESET threshold, 1/s.
    pub k_rupture: f64,
    pub forming_voltage: f64,
    pub read_voltage: f64,
    pub seed: u64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Preset::Nonvolatile1mA.params()
    }
}

/// Names accepted by [`DeviceParams::set_field`], in serialization order.
pub const PARAM_FIELDS: [&str; 15] = [
    "v_set_nominal",
    "v_set_sigma",
    "v_reset_nominal",
    "v_reset_sigma",
    "g_off",
    "g_on_cap",
    "w_crit",
    "i_stab",
    "tau_relax",
    "k_growth",
    "v0_growth",
    "k_rupture",
    "forming_voltage",
    "read_voltage",
    "seed",
];

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let all_finite = [
            self.v_set_nominal,
            self.v_set_sigma,
            self.v_reset_nominal,
            self.v_reset_sigma,
            self.g_off,
            self.g_on_cap,
            self.w_crit,
            self.i_stab,
            self.tau_relax,
            self.k_growth,
            self.v0_growth,
            self.k_rupture,
            self.forming_voltage,
            self.read_voltage,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return bad("all parameters must be finite");
        }
        if self.g_off <= 0.0 {
            return bad("g_off must be > 0");
        }
        if self.g_on_cap <= self.g_off {
            return bad("g_on_cap must exceed g_off");
        }
        if !(self.w_crit > 0.0 && self.w_crit < 1.0) {
            return bad("w_crit must lie in (0, 1)");
        }
        if self.tau_relax <= 0.0 {
            return bad("tau_relax must be > 0");
        }
        if !(self.v_set_nominal > 0.0 && self.v_reset_nominal < 0.0) {
            return bad("need v_set_nominal > 0 > v_reset_nominal");
        }
        if self.v_set_sigma < 0.0 || self.v_reset_sigma < 0.0 {
            return bad("jitter sigmas must be >= 0");
        }
        if self.k_growth < 0.0 || self.k_rupture < 0.0 || self.v0_growth <= 0.0 {
            return bad("rates must be >= 0 and v0_growth > 0");
        }
        if self.i_stab <= 0.0 || self.read_voltage < 0.0 || self.forming_voltage < 0.0 {
            return bad("i_stab must be > 0; read and forming voltages >= 0");
        }
        Ok(())
    }

    /// Same device with cycle-to-cycle jitter switched off.
    pub fn without_jitter(mut self) -> Self {
        self.v_set_sigma = 0.0;
        self.v_reset_sigma = 0.0;
        self
    }

    /// Largest integration step allowed for this device.
    pub fn dt_max(&self) -> f64 {
        self.tau_relax / 100.0
    }

    /// Natural log of the ON/OFF conductance span.
    #[inline]
    pub fn ln_span(&self) -> f64 {
        math::ln(self.g_on_cap / self.g_off)
    }

    /// Filament strength at which `g(w)·|v| = i`, clipped to `[0, 1]`.
    pub fn w_for_current(&self, i: f64, v: f64) -> f64 {
        let v = v.abs();
        if v <= 0.0 {
            return 1.0;
        }
        (math::ln(i / (v * self.g_off)) / self.ln_span()).clamp(0.0, 1.0)
    }

    pub fn get_field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "v_set_nominal" => self.v_set_nominal,
            "v_set_sigma" => self.v_set_sigma,
            "v_reset_nominal" => self.v_reset_nominal,
            "v_reset_sigma" => self.v_reset_sigma,
            "g_off" => self.g_off,
            "g_on_cap" => self.g_on_cap,
            "w_crit" => self.w_crit,
            "i_stab" => self.i_stab,
            "tau_relax" => self.tau_relax,
            "k_growth" => self.k_growth,
            "v0_growth" => self.v0_growth,
            "k_rupture" => self.k_rupture,
            "forming_voltage" => self.forming_voltage,
            "read_voltage" => self.read_voltage,
            "seed" => self.seed as f64,
            _ => return None,
        })
    }

    /// Sets a field by name; `seed` must be a non-negative integer.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "v_set_nominal" => &mut self.v_set_nominal,
            "v_set_sigma" => &mut self.v_set_sigma,
            "v_reset_nominal" => &mut self.v_reset_nominal,
            "v_reset_sigma" => &mut self.v_reset_sigma,
            "g_off" => &mut self.g_off,
            "g_on_cap" => &mut self.g_on_cap,
            "w_crit" => &mut self.w_crit,
            "i_stab" => &mut self.i_stab,
            "tau_relax" => &mut self.tau_relax,
            "k_growth" => &mut self.k_growth,
            "v0_growth" => &mut self.v0_growth,
            "k_rupture" => &mut self.k_rupture,
            "forming_voltage" => &mut self.forming_voltage,
            "read_voltage" => &mut self.read_voltage,
            "seed" => {
                if value < 0.0 || crate::math::floor(value) != value || value > u64::MAX as f64 {
                    return Err(Error::InvalidParams(format!("seed must be a non-negative integer, got {value}")));
                }
                self.seed = value as u64;
                return Ok(());
            }
            _ => return Err(Error::InvalidParams(format!("unknown device parameter `{name}`"))),
        };
        *slot = value;
        Ok(())
    }
}

/// Shipped parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Au bottom electrode, characterized under 1 mA compliance.
    Nonvolatile1mA,
    /// Same device characterized under 10 µA compliance.
    Volatile10uA,
    /// Volatile device whose OFF conductance dissipates 50 pW at 0.40 V.
    Volatile50pW,
    /// Dithiol-treated film: sulfur vacancies healed, needs ~9 V forming.
    BdtTreated,
    /// Printed graphene bottom electrode: volatile only, lower thresholds.
    GrapheneBe,
    /// Volatile neuron whose kinetics fire on the 5th (0.1 ms, 1 V) pulse.
    LifCalibrated,
    /// Slow-kinetics synapse used for the STP/LTP trains under 5 mA.
    Synapse5mA,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Nonvolatile1mA,
        Preset::Volatile10uA,
        Preset::Volatile50pW,
        Preset::BdtTreated,
        Preset::GrapheneBe,
        Preset::LifCalibrated,
        Preset::Synapse5mA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Nonvolatile1mA => "nonvolatile-1mA",
            Preset::Volatile10uA => "volatile-10uA",
            Preset::Volatile50pW => "volatile-50pW",
            Preset::BdtTreated => "bdt-treated",
            Preset::GrapheneBe => "graphene-be",
            Preset::LifCalibrated => "lif-calibrated",
            Preset::Synapse5mA => "synapse-5mA",
        }
    }

    /// Compliance current the preset is characterized under.
    pub fn default_cc(self) -> f64 {
        match self {
            Preset::Nonvolatile1mA | Preset::BdtTreated => 1e-3,
            Preset::Volatile10uA | Preset::Volatile50pW | Preset::GrapheneBe => 1e-5,
            Preset::LifCalibrated => 1e-5,
            Preset::Synapse5mA => 5e-3,
        }
    }

    pub fn params(self) -> DeviceParams {
        let base = DeviceParams {
            v_set_nominal: 0.29,
            v_set_sigma: 0.10,
            v_reset_nominal: -0.44,
            v_reset_sigma: 0.20,
            g_off: 1e-9,
            g_on_cap: 1e-2,
            // g(w_crit) = 1e-4 S, so 1 mA compliance stabilizes the filament above 1.0 V.
            w_crit: 0.71,
            i_stab: 1e-4,
            tau_relax: 50e-3,
            k_growth: 5e4,
            v0_growth: 0.1,
            k_rupture: 5e4,
            forming_voltage: 0.0,
            read_voltage: 0.1,
            seed: 0,
        };
        let volatile = DeviceParams { v_set_nominal: 0.40, v_set_sigma: 0.19, ..base };
        match self {
            Preset::Nonvolatile1mA => base,
            Preset::Volatile10uA => volatile,
            // 0.40² V² × 312.5 pS = 50 pW
            Preset::Volatile50pW => DeviceParams { g_off: 312.5e-12, ..volatile },
            Preset::BdtTreated => DeviceParams { forming_voltage: 9.0, v_set_nominal: 1.0, g_on_cap: 1e-7, ..base },
            Preset::GrapheneBe => DeviceParams {
                v_set_nominal: 0.30,
                v_set_sigma: 0.10,
                tau_relax: 1e-3,
                k_growth: GRAPHENE_K_GROWTH,
                v0_growth: 0.25,
                // no current the circuit can deliver stabilizes the filament
                i_stab: 1.0,
                ..volatile
            },
            Preset::LifCalibrated => {
                DeviceParams { tau_relax: 1e-3, k_growth: LIF_K_GROWTH, v0_growth: 0.25, ..volatile }
            }
            Preset::Synapse5mA => {
                DeviceParams { tau_relax: 1.0, k_growth: 0.225, v0_growth: 1.0, i_stab: 3e-4, ..volatile }
            }
        }
    }
}

/// Output of [`crate::protocol::calibrate_lif_growth`] on the nominal train, frozen.
pub const LIF_K_GROWTH: f64 = 139.0;
/// Places the graphene-electrode flash threshold between 0.375 V and 0.40 V.
pub const GRAPHENE_K_GROWTH: f64 = 331.0;

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown preset `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Pristine,
    Volatile,
    NonVolatile,
}

#[derive(Debug, Clone)]
pub struct DeviceState {
    pub w: f64,
    pub formed: bool,
    pub regime: Regime,
    pub t: f64,
    rng: ChaCha8Rng,
    v_set_eff: f64,
    v_reset_eff: f64,
    pos_armed: bool,
    neg_armed: bool,
}

impl DeviceState {
    /// Pristine, unformed device at `t = 0`.
    pub fn new(params: &DeviceParams) -> Self {
        DeviceState {
            w: 0.0,
            formed: false,
            regime: Regime::Pristine,
            t: 0.0,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            v_set_eff: params.v_set_nominal,
            v_reset_eff: params.v_reset_nominal,
            pos_armed: true,
            neg_armed: true,
        }
    }

    /// Formed device with the given filament strength.
    pub fn with_filament(params: &DeviceParams, w: f64) -> Result<Self> {
        check_w(w)?;
        let mut s = DeviceState::new(params);
        s.w = w;
        s.formed = true;
        s.regime = classify_regime(&s, params);
        Ok(s)
    }

    /// SET threshold in force for the current positive excursion.
    pub fn v_set_effective(&self) -> f64 {
        self.v_set_eff
    }

    pub fn v_reset_effective(&self) -> f64 {
        self.v_reset_eff
    }

    pub fn conductance(&self, params: &DeviceParams) -> f64 {
        if self.formed {
            g_of(self.w, params)
        } else {
            params.g_off
        }
    }

    fn draw(&mut self, nominal: f64, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return nominal;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        nominal + sigma * z.clamp(-JITTER_CLIP_SIGMA, JITTER_CLIP_SIGMA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub v: f64,
    pub i: f64,
    pub w: f64,
    pub g: f64,
}

fn check_w(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain { name: "w", value: w, domain: "[0, 1]" });
    }
    Ok(())
}

#[inline]
fn g_of(w: f64, params: &DeviceParams) -> f64 {
    params.g_off * math::exp(w * params.ln_span())
}

/// Conductance of a formed filament of strength `w`.
pub fn conductance_of(w: f64, params: &DeviceParams) -> Result<f64> {
    check_w(w)?;
    Ok(g_of(w, params))
}

#[inline]
fn clamp_current(g: f64, v: f64, cc: f64) -> f64 {
    let mag = (g * v.abs()).min(cc);
    if v > 0.0 {
        mag
    } else if v < 0.0 {
        -mag
    } else {
        0.0
    }
}

pub fn classify_regime(state: &DeviceState, params: &DeviceParams) -> Regime {
    if !state.formed {
        Regime::Pristine
    } else if state.w >= params.w_crit {
        Regime::NonVolatile
    } else {
        Regime::Volatile
    }
}

/// Trace point for the current state under bias `v`, without advancing time.
pub fn observe(state: &DeviceState, v: f64, cc: f64, params: &DeviceParams) -> TracePoint {
    let g = state.conductance(params);
    TracePoint { t: state.t, v, i: clamp_current(g, v, cc), w: state.w, g }
}

/// Advances the device by one step of length `dt` under bias `v` and compliance `cc`.
pub fn step(state: &mut DeviceState, v: f64, cc: f64, dt: f64, params: &DeviceParams) -> Result<TracePoint> {
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("applied voltage is not finite: {v}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if dt > params.dt_max() * (1.0 + 1e-9) {
        return Err(Error::InvalidInput(format!("dt = {dt} exceeds dt_max = {}", params.dt_max())));
    }
    if !(cc > 0.0) {
        return Err(Error::InvalidInput(format!("compliance must be positive, got {cc}")));
    }
    advance(state, v, cc, dt, params);
    Ok(observe(state, v, cc, params))
}

/// Unchecked core of [`step`]; callers guarantee finite inputs.
pub(crate) fn advance(state: &mut DeviceState, v: f64, cc: f64, dt: f64, params: &DeviceParams) {
    let read = params.read_voltage;
    if !state.formed {
        if v != 0.0 && v.abs() + V_EPS >= params.forming_voltage {
            state.formed = true;
        } else {
            state.t += dt;
            return;
        }
    }

    // new jitter draws at the start of each excursion beyond the read level
    if v > read {
        if state.pos_armed {
            let lo = read + JITTER_MARGIN;
            state.v_set_eff = state.draw(params.v_set_nominal, params.v_set_sigma).max(lo);
            state.pos_armed = false;
        }
    } else {
        state.pos_armed = true;
    }
    if v < -read {
        if state.neg_armed {
            let hi = -(read + JITTER_MARGIN);
            state.v_reset_eff = state.draw(params.v_reset_nominal, params.v_reset_sigma).min(hi);
            state.neg_armed = false;
        }
    } else {
        state.neg_armed = true;
    }

    let w = state.w;
    let g = g_of(w, params);
    let drive = g * v.abs();

    let w_new = if v > 0.0 && v + V_EPS >= state.v_set_eff {
        if drive >= cc {
            // clamped: the compliance supplies no further ions
            w
        } else {
            let rate = params.k_growth * math::exp((v - state.v_set_eff) / params.v0_growth);
            let mut wn = 1.0 - (1.0 - w) * math::exp(-rate * dt);
            wn = wn.min(params.w_for_current(cc, v).max(w));
            if w < params.w_crit && wn >= params.w_crit && drive < params.i_stab {
                // compliance gate: filament stays just short of the stable size
                wn = params.w_crit * (1.0 - 1e-9);
            }
            wn
        }
    } else if v < 0.0 && v - V_EPS <= state.v_reset_eff {
        let rate = params.k_rupture * math::exp((state.v_reset_eff - v) / params.v0_growth);
        w * math::exp(-rate * dt)
    } else if v.abs() <= read + V_EPS && w < params.w_crit {
        w * math::exp(-dt / params.tau_relax)
    } else {
        w
    };

    state.w = w_new.clamp(0.0, 1.0);
    state.t += dt;
    state.regime = classify_regime(state, params);
}

/// Holds a constant bias for `duration`, stepping at no more than `dt`.
///
/// `dt` is shrunk so an integer number of steps spans `duration` exactly.
pub fn hold<F: FnMut(&TracePoint)>(
    state: &mut DeviceState,
    v: f64,
    duration: f64,
    cc: f64,
    dt: f64,
    params: &DeviceParams,
    mut obs: F,
) -> Result<()> {
    if duration < 0.0 || !duration.is_finite() {
        return Err(Error::InvalidInput(format!("hold duration must be >= 0, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(());
    }
    let n = math::ceil(duration / dt - 1e-9).max(1.0) as u64;
    let h = duration / n as f64;
    for _ in 0..n {
        let p = step(state, v, cc, h, params)?;
        obs(&p);
    }
    Ok(())
}

/// All preset names, for error messages.
pub fn preset_names() -> Vec<String> {
    Preset::ALL.iter().map(|p| p.name().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nominal() -> DeviceParams {
        Preset::Nonvolatile1mA.params().without_jitter()
    }

    #[test]
    fn conductance_endpoints_and_midpoint() {
        let p = nominal();
        assert_relative_eq!(conductance_of(0.0, &p).unwrap(), 1e-9, max_relative = 1e-12);
        assert_relative_eq!(conductance_of(1.0, &p).unwrap(), 1e-2, max_relative = 1e-12);
        // geometric mean of the endpoints
        let mid = libm::sqrt(1e-9 * 1e-2);
        assert_relative_eq!(conductance_of(0.5, &p).unwrap(), mid, max_relative = 1e-12);
        assert_relative_eq!(mid, 3.1623e-6, max_relative = 1e-4);
    }

    #[test]
    fn conductance_rejects_out_of_domain() {
        let p = nominal();
        assert!(matches!(conductance_of(-0.1, &p), Err(Error::Domain { .. })));
        assert!(matches!(conductance_of(1.5, &p), Err(Error::Domain { .. })));
    }

    #[test]
    fn zero_bias_gives_zero_current() {
        let p = nominal();
        let mut s = DeviceState::with_filament(&p, 0.8).unwrap();
        let tp = step(&mut s, 0.0, 1e-3, 1e-4, &p).unwrap();
        assert_eq!(tp.i, 0.0);
    }

    #[test]
    fn step_rejects_bad_inputs() {
        let p = nominal();
        let mut s = DeviceState::new(&p);
        assert!(step(&mut s, f64::NAN, 1e-3, 1e-4, &p).is_err());
        assert!(step(&mut s, 0.1, 0.0, 1e-4, &p).is_err());
        assert!(step(&mut s, 0.1, 1e-3, 0.0, &p).is_err());
        assert!(step(&mut s, 0.1, 1e-3, 1.0, &p).is_err());
    }

    #[test]
    fn relaxation_matches_closed_form() {
        let p = nominal();
        let mut s = DeviceState::with_filament(&p, 0.3).unwrap();
        let n = 100;
        let dt = p.tau_relax / n as f64;
        for _ in 0..n {
            step(&mut s, 0.0, 1e-3, dt, &p).unwrap();
        }
        // oracle: w(t) = w0 exp(-t / tau)
        let expected = 0.3 * (-1.0f64).exp();
        assert_relative_eq!(s.w, expected, max_relative = 1e-2);
    }

    #[test]
    fn retention_above_w_crit_under_read_bias() {
        let p = nominal();
        let w0 = p.w_crit + 1e-3;
        let mut s = DeviceState::with_filament(&p, w0).unwrap();
        hold(&mut s, p.read_voltage, 5000.0, 1e-3, p.dt_max(), &p, |_| {}).unwrap();
        assert_eq!(s.w, w0);
        assert_eq!(s.regime, Regime::NonVolatile);
    }

    #[test]
    fn regime_classification() {
        let p = nominal();
        let fresh = DeviceState::new(&p);
        assert_eq!(classify_regime(&fresh, &p), Regime::Pristine);
        let nv = DeviceState::with_filament(&p, 0.9).unwrap();
        assert_eq!(classify_regime(&nv, &p), Regime::NonVolatile);
        let vol = DeviceState::with_filament(&p, 0.2).unwrap();
        assert_eq!(classify_regime(&vol, &p), Regime::Volatile);
    }

    #[test]
    fn compliance_gate_blocks_stabilization_at_low_cc() {
        let p = nominal();
        let mut s = DeviceState::new(&p);
        hold(&mut s, 1.0, 5e-3, 1e-5, p.dt_max(), &p, |_| {}).unwrap();
        assert!(s.w < p.w_crit);
        assert_eq!(s.regime, Regime::Volatile);
        let mut s = DeviceState::new(&p);
        hold(&mut s, 1.2, 5e-3, 1e-3, p.dt_max(), &p, |_| {}).unwrap();
        assert_eq!(s.regime, Regime::NonVolatile);
        // ON conductance settles where the compliance clamps the current
        assert_relative_eq!(s.conductance(&p) * 1.2, 1e-3, max_relative = 1e-9);
    }

    #[test]
    fn unformed_device_is_ohmic_at_g_off() {
        let p = Preset::BdtTreated.params().without_jitter();
        let mut s = DeviceState::new(&p);
        let tp = step(&mut s, 1.0, 1e-3, 1e-4, &p).unwrap();
        assert!(!s.formed);
        assert_relative_eq!(tp.i, p.g_off * 1.0, max_relative = 1e-12);
        step(&mut s, 9.0, 1e-3, 1e-4, &p).unwrap();
        assert!(s.formed);
    }

    #[test]
    fn presets_are_valid_and_round_trip_by_name() {
        for preset in Preset::ALL {
            preset.params().validate().unwrap();
            assert_eq!(preset.name().parse::<Preset>().unwrap(), preset);
        }
        assert!("no-such".parse::<Preset>().is_err());
    }

    #[test]
    fn fifty_picowatt_preset() {
        let p = Preset::Volatile50pW.params();
        let power = 0.40 * 0.40 * p.g_off;
        assert_relative_eq!(power, 50e-12, max_relative = 1e-12);
    }

    #[test]
    fn set_field_round_trip() {
        let mut p = DeviceParams::default();
        for (k, name) in PARAM_FIELDS.iter().enumerate() {
            p.set_field(name, k as f64 + 1.0).unwrap();
            assert_eq!(p.get_field(name), Some(k as f64 + 1.0));
        }
        assert!(p.set_field("bogus", 1.0).is_err());
        assert!(p.set_field("seed", 1.5).is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let p = Preset::Volatile10uA.params();
        let draws = |seed| {
            let p = DeviceParams { seed, ..p };
            let mut s = DeviceState::new(&p);
            let mut out = Vec::new();
            for _ in 0..5 {
                step(&mut s, 0.5, 1e-5, 1e-4, &p).unwrap();
                out.push(s.v_set_effective());
                step(&mut s, 0.0, 1e-5, 1e-4, &p).unwrap();
            }
            out
        };
        assert_eq!(draws(3), draws(3));
        assert_ne!(draws(3), draws(4));
    }

    fn waveform() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-3.0f64..3.0, 1e-6f64..4e-4), 1..200)
    }

    proptest! {
        #[test]
        fn state_stays_bounded_and_current_clamped(
            wave in waveform(),
            cc in prop::sample::select(vec![1e-5, 1e-3, 5e-3]),
            seed in 0u64..1000,
        ) {
            let p = DeviceParams { seed, ..Preset::Volatile10uA.params() };
            let mut s = DeviceState::new(&p);
            for (v, dt) in wave {
                let tp = step(&mut s, v, cc, dt, &p).unwrap();
                prop_assert!((0.0..=1.0).contains(&tp.w));
                prop_assert!(tp.i.abs() <= cc * (1.0 + 1e-12));
                if v == 0.0 { prop_assert_eq!(tp.i, 0.0); }
                prop_assert_eq!(s.regime == Regime::NonVolatile, s.w >= p.w_crit);
            }
        }

        #[test]
        fn growth_is_monotone_above_threshold(v in 0.35f64..2.0, n in 1usize..200) {
            let p = nominal();
            let mut s = DeviceState::new(&p);
            let mut last = 0.0;
            for _ in 0..n {
                step(&mut s, v, 1.0, 1e-5, &p).unwrap();
                prop_assert!(s.w >= last);
                last = s.w;
            }
        }

        #[test]
        fn volatile_filament_relaxes(w0 in 0.0f64..0.70) {
            let p = nominal();
            let mut s = DeviceState::with_filament(&p, w0).unwrap();
            hold(&mut s, 0.0, 10.0 * p.tau_relax, 1e-3, p.dt_max(), &p, |_| {}).unwrap();
            prop_assert!(s.w < 1e-3);
        }

        #[test]
        fn stable_filament_never_decays_at_rest(w0 in 0.71f64..1.0, v in 0.0f64..0.1) {
            let p = nominal();
            let mut s = DeviceState::with_filament(&p, w0).unwrap();
            hold(&mut s, v, 2.0, 1e-3, p.dt_max(), &p, |_| {}).unwrap();
            prop_assert!(s.w >= w0);
        }
    }
}
