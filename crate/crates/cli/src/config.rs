//! Flat `key = value` run configuration.
//!
//! Every command declares a schema of keys with defaults. A run is built from
//! the defaults, then the config file, then `--key value` overrides on the
//! command line, then the global `--seed` / `--preset` flags. Device
//! parameters can be overridden one by one through `device.<field>` keys.
//! After [`RunConfig::resolve`] every value is concrete, and
//! [`RunConfig::to_text`] writes a file that parses back to the same run.

use std::fmt::Write as _;
use std::path::PathBuf;

use memristim_core::device::{DeviceParams, Preset, PARAM_FIELDS};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text,
    /// Comma-separated floats.
    FloatList,
    Choice(&'static [&'static str]),
}

/// One configuration key. A non-numeric default on a numeric key (`auto`,
/// `none`, `preset`) is a placeholder the command fills in or treats as unset.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, kind, default, help }
}

const PRESETS: &[&str] = &[
    "nonvolatile-1mA",
    "volatile-10uA",
    "volatile-50pW",
    "bdt-treated",
    "graphene-be",
    "lif-calibrated",
    "synapse-5mA",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Pulse,
    Lif,
    FiringRatio,
    Plasticity,
    Endurance,
    SampleArray,
    TrainDr,
    EvalDr,
    SynthData,
    Tti,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Sweep,
        Command::Pulse,
        Command::Lif,
        Command::FiringRatio,
        Command::Plasticity,
        Command::Endurance,
        Command::SampleArray,
        Command::TrainDr,
        Command::EvalDr,
        Command::SynthData,
        Command::Tti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Pulse => "pulse",
            Command::Lif => "lif",
            Command::FiringRatio => "firing-ratio",
            Command::Plasticity => "plasticity",
            Command::Endurance => "endurance",
            Command::SampleArray => "sample-array",
            Command::TrainDr => "train-dr",
            Command::EvalDr => "eval-dr",
            Command::SynthData => "synth-data",
            Command::Tti => "tti",
        }
    }

    /// Preset used when none is given; `None` for commands without a device.
    pub fn default_preset(self) -> Option<&'static str> {
        match self {
            Command::Sweep | Command::Endurance => Some("nonvolatile-1mA"),
            Command::Pulse | Command::Lif | Command::FiringRatio | Command::Tti => Some("lif-calibrated"),
            Command::Plasticity => Some("synapse-5mA"),
            Command::SampleArray | Command::TrainDr | Command::EvalDr | Command::SynthData => None,
        }
    }

    /// Command-specific keys (without `seed`, `preset` and `device.*`).
    pub fn keys(self) -> Vec<KeySpec> {
        use Kind::*;
        let sweep = [
            key("cc", Float, "auto", "compliance current, A (auto: the preset's)"),
            key("jitter", Bool, "true", "draw SET/RESET thresholds per excursion"),
            key("v_pos", Float, "1.2", "positive sweep apex, V"),
            key("v_neg", Float, "1.2", "negative sweep apex magnitude, V"),
            key("leg_time", Float, "0.06", "duration of each sweep leg, s"),
            key("points_per_leg", Int, "240", "trace points per leg"),
        ];
        let train = |n: &'static str| {
            [
                key("cc", Float, "auto", "compliance current, A (auto: the preset's)"),
                key("jitter", Bool, "false", "draw SET/RESET thresholds per excursion"),
                key("initial_w", Float, "0", "filament strength of the formed device at t = 0"),
                key("n_pulses", Int, n, "pulses in the train"),
                key("pulse_width", Float, "1e-4", "s"),
                key("pulse_amplitude", Float, "1.0", "V"),
                key("gap_width", Float, "1e-4", "s"),
                key("gap_amplitude", Float, "0.1", "bias between pulses, V"),
                key("i_fire", Float, "1e-6", "firing current threshold, A"),
            ]
        };
        let detector = [
            key("bright_threshold", Float, "0.5", "channel-mean level of bright candidates"),
            key("red_threshold", Float, "0.82", "inverted-green level of red candidates"),
            key("se_radius", Int, "1", "opening radius of the candidate masks, px"),
            key("min_area", Int, "4", "smallest candidate kept, px"),
        ];
        let dataset = [
            key("manifest", Text, "", "dataset manifest CSV (image,candidate_id,label,lesion_type)"),
            key("features", Text, "", "feature-vector CSV, used instead of a manifest"),
        ];
        let mut keys: Vec<KeySpec> = Vec::new();
        match self {
            Command::Sweep => {
                keys.extend(sweep);
                keys.push(key("cycles", Int, "1", "back-to-back bipolar sweeps"));
            }
            Command::Endurance => {
                keys.extend(sweep);
                keys.push(key("cycles", Int, "2500", "SET/RESET cycles"));
            }
            Command::Pulse => keys.extend(train("10")),
            Command::Lif => {
                keys.extend(train("10"));
                keys.push(key("cycles", Int, "2", "train + recovery cycles"));
                keys.push(key("t_recover", Float, "auto", "idle after each train, s (auto: 10 tau_relax)"));
            }
            Command::FiringRatio => {
                keys.extend(train("100"));
                keys.retain(|k| k.name != "pulse_width" && k.name != "initial_w" && k.name != "jitter");
                keys.push(key("jitter", Bool, "true", "draw SET/RESET thresholds per excursion"));
                keys.push(key("widths", FloatList, "5e-5,1e-4,2e-4,3e-4,4e-4", "pulse widths, s"));
                keys.push(key("trials", Int, "20", "trains per width"));
            }
            Command::Plasticity => {
                keys.extend([
                    key("cc", Float, "auto", "compliance current, A (auto: the preset's)"),
                    key("jitter", Bool, "false", "draw SET/RESET thresholds per excursion"),
                    key("kind", Choice(&["stp", "ltp"]), "stp", "nominal train the auto values follow"),
                    key("n_pulses", Int, "40", "pulses in the train"),
                    key("pulse_width", Float, "auto", "s (stp: 15 ms, ltp: 20 ms)"),
                    key("pulse_amplitude", Float, "auto", "V (stp: 2.5 V, ltp: 3.5 V)"),
                    key("gap_width", Float, "10e-3", "s"),
                    key("gap_amplitude", Float, "0.1", "read bias between pulses, V"),
                ]);
            }
            Command::SampleArray => {
                keys.extend([key("rows", Int, "16", "array rows"), key("cols", Int, "65", "array columns")]);
                keys.extend(variation_keys("0.05"));
            }
            Command::SynthData => {
                keys.extend([
                    key("dataset", Choice(&["images", "separable"]), "images", "fundus-like images or plain vectors"),
                    key("n_images", Int, "12", "images to render"),
                    key("width", Int, "128", "px"),
                    key("height", Int, "128", "px"),
                    key("color", Bool, "true", "RGB (PPM) or gray (PGM)"),
                    key("lesions_per_image", Int, "6", "planted lesions"),
                    key("distractors_per_image", Int, "6", "planted non-lesion blobs"),
                    key("bright_min", Float, "0.75", "bright-blob intensity range"),
                    key("bright_max", Float, "0.95", ""),
                    key("red_min", Float, "0.8", "red-blob darkening range"),
                    key("red_max", Float, "1.0", ""),
                    key("texture", Float, "0.03", "background texture amplitude"),
                    key("noise", Float, "0.02", "pixel noise sigma"),
                    key("n_samples", Int, "600", "vectors of the separable set"),
                    key("margin", Float, "0.05", "half-width of the empty band around the separating plane"),
                ]);
                keys.extend(detector);
            }
            Command::TrainDr => {
                keys.extend(dataset);
                keys.extend([
                    key("mode", Choice(&["float", "device"]), "float", "plain weights or crossbar pairs"),
                    key("epochs", Int, "1000", "passes over the training split"),
                    key("batch_size", Int, "16", "samples per update"),
                    key("float_step", Float, "0.01", "weight step of the float sign rule"),
                    key("confidence", Float, "0.75", "lesion iff P(lesion) >= confidence"),
                    key(
                        "sign_threshold",
                        Float,
                        "0.5",
                        "dead zone of the sign rule, fraction of the layer's largest gradient",
                    ),
                    key(
                        "refresh_level",
                        Float,
                        "0.5",
                        "reprogram a pair once both cells pass this fraction of the span",
                    ),
                    key("target_accuracy", Float, "none", "stop once training accuracy reaches this"),
                    key("gain_1", Float, "4", "network weight per stored weight, hidden layer"),
                    key("gain_2", Float, "4", "network weight per stored weight, output layer"),
                    key("init_scale", Float, "0.1", "initial weights uniform in [-s, s]"),
                    key("v_read", Float, "0.1", "read voltage of a unit input, V"),
                    key("test_fraction", Float, "0.0", "fraction held out for testing"),
                ]);
                keys.extend(variation_keys("0.01"));
                keys.extend(detector);
            }
            Command::EvalDr => {
                keys.push(key("model", Text, "", "model JSON written by train-dr"));
                keys.extend(dataset);
                keys.push(key("confidence", Float, "0.75", "lesion iff P(lesion) >= confidence"));
                keys.extend(detector);
            }
            Command::Tti => {
                keys.extend([
                    key("jitter", Bool, "false", "draw SET/RESET thresholds per excursion"),
                    key("profile", Text, "", "temperature profile CSV (t_s,temp_C); empty: built-in"),
                    key("builtin", Choice(&["ok", "warn", "spoil"]), "ok", "built-in profile when no CSV is given"),
                    key("samples", Int, "10", "samples per phase of the built-in profile"),
                    key("cc", Float, "1e-3", "compliance current, A"),
                    key("pulses_per_train", Int, "100", "pulses per burst"),
                    key("pulse_width", Float, "2e-4", "s"),
                    key("gap_width", Float, "1e-4", "s"),
                    key("gap_amplitude", Float, "0.1", "V"),
                    key("i_fire", Float, "1e-6", "firing current threshold, A"),
                    key("inter_train_idle", Float, "1.0", "read-level idle after each burst, s"),
                    key("temp_map", Text, "4:0.3,15:0.8,30:1.5", "temperature (C) to amplitude (V) anchors"),
                ]);
            }
        }
        keys
    }
}

fn variation_keys(alpha: &'static str) -> Vec<KeySpec> {
    use Kind::*;
    vec![
        key("yield_p", Float, "0.93", "probability that a cell works"),
        key("decades_mean", Float, "5.5", "mean ON/OFF ratio, decades"),
        key("decades_sigma", Float, "0.3", ""),
        key("v_set_mean", Float, "0.29", "V"),
        key("v_set_sigma", Float, "0.10", "V"),
        key("v_reset_mean", Float, "-0.44", "V"),
        key("v_reset_sigma", Float, "0.20", "V"),
        key("n_update_models", Int, "9", "distinct update curves, assigned round-robin"),
        key("alpha", Float, alpha, "mean per-pulse fraction of the update curves"),
        key("alpha_sigma", Float, "0.2", "log-normal spread of alpha between curves"),
        key("g_min", Float, "1e-6", "S"),
        key("g_max", Float, "1e-4", "S"),
        key("curve", Text, "", "measured update curve CSV (pulse_index,conductance_S); overrides the synthetic one"),
    ]
}

impl std::str::FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command `{s}`")))
    }
}

const DEVICE_PREFIX: &str = "device.";

/// Device fields settable through `device.<field>`; the seed always follows
/// the run seed.
fn device_fields() -> impl Iterator<Item = &'static str> {
    PARAM_FIELDS.into_iter().filter(|f| *f != "seed")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `(key, value)` in schema order: `seed`, `preset`, command keys, `device.*`.
    entries: Vec<(String, String)>,
}

fn check_value(spec: &KeySpec, value: &str) -> CliResult<()> {
    let bad = |what: &str| Err(CliError::Config(format!("key `{}`: expected {what}, got `{value}`", spec.name)));
    if value == spec.default {
        return Ok(());
    }
    match spec.kind {
        Kind::Float => match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(()),
            _ => bad("a finite number"),
        },
        Kind::Int => value.parse::<u64>().map(|_| ()).or_else(|_| bad("a non-negative integer")),
        Kind::Bool => value.parse::<bool>().map(|_| ()).or_else(|_| bad("true or false")),
        Kind::Text => Ok(()),
        Kind::FloatList => {
            if value.split(',').all(|x| x.trim().parse::<f64>().is_ok_and(f64::is_finite)) {
                Ok(())
            } else {
                bad("comma-separated numbers")
            }
        }
        Kind::Choice(options) => {
            if options.contains(&value) {
                Ok(())
            } else {
                bad(&format!("one of {}", options.join(", ")))
            }
        }
    }
}

/// Numbers in the shortest text that parses back exactly; the rest as given.
fn canonical(spec: &KeySpec, value: &str) -> String {
    match spec.kind {
        _ if value == spec.default => value.to_string(),
        Kind::Float => value.parse().map(fmt_f64).unwrap_or_else(|_| value.to_string()),
        Kind::Int => value.parse::<u64>().map(|v| v.to_string()).unwrap_or_else(|_| value.to_string()),
        Kind::FloatList => {
            value.split(',').filter_map(|x| x.trim().parse().ok()).map(fmt_f64).collect::<Vec<_>>().join(",")
        }
        _ => value.to_string(),
    }
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored; a key may appear once.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(CliError::Config(format!("line {}: key `{k}` given twice", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// All defaults; `device.*` entries hold the placeholder `preset`.
    pub fn defaults(command: Command) -> Self {
        let mut entries = vec![("seed".to_string(), "0".to_string())];
        if let Some(p) = command.default_preset() {
            entries.push(("preset".into(), p.into()));
        }
        entries.extend(command.keys().iter().map(|k| (k.name.to_string(), k.default.to_string())));
        if command.default_preset().is_some() {
            entries.extend(device_fields().map(|f| (format!("{DEVICE_PREFIX}{f}"), "preset".to_string())));
        }
        RunConfig { command, entries }
    }

    /// Builds a run from layered `(key, value)` sources, later layers winning.
    pub fn from_layers<'a>(
        command: Command,
        layers: impl IntoIterator<Item = &'a [(String, String)]>,
    ) -> CliResult<Self> {
        let mut cfg = RunConfig::defaults(command);
        for layer in layers {
            for (k, v) in layer {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Parses config text for `command` with defaults applied.
    pub fn parse(command: Command, text: &str) -> CliResult<Self> {
        let pairs = parse_pairs(text)?;
        RunConfig::from_layers(command, [pairs.as_slice()])
    }

    fn spec(&self, name: &str) -> CliResult<KeySpec> {
        if name == "seed" {
            return Ok(key("seed", Kind::Int, "0", ""));
        }
        if name == "preset" {
            if self.command.default_preset().is_none() {
                return Err(CliError::Config(format!("`{}` takes no preset", self.command.name())));
            }
            return Ok(key("preset", Kind::Choice(PRESETS), "", ""));
        }
        if let Some(field) = name.strip_prefix(DEVICE_PREFIX) {
            if self.command.default_preset().is_some() && device_fields().any(|f| f == field) {
                return Ok(key("device", Kind::Float, "preset", ""));
            }
        }
        self.command
            .keys()
            .into_iter()
            .find(|k| k.name == name)
            .ok_or_else(|| CliError::Config(format!("unknown key `{name}` for command `{}`", self.command.name())))
    }

    /// Sets one key; hyphens in the key are read as underscores.
    pub fn set(&mut self, name: &str, value: &str) -> CliResult<()> {
        let name = name.replace('-', "_");
        let spec = self.spec(&name)?;
        if spec.name == "preset" && !PRESETS.contains(&value) {
            return Err(CliError::Config(format!("unknown preset `{value}` (known: {})", PRESETS.join(", "))));
        }
        check_value(&spec, value)?;
        let slot = self.entries.iter_mut().find(|(k, _)| *k == name).expect("schema and entries agree");
        slot.1 = canonical(&spec, value);
        Ok(())
    }

    pub fn raw(&self, name: &str) -> &str {
        self.entries
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("no key `{name}` for `{}`", self.command.name()))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn f64(&self, name: &str) -> CliResult<f64> {
        let v = self.raw(name);
        v.parse().map_err(|_| CliError::Config(format!("key `{name}` has no numeric value (`{v}`)")))
    }

    /// `None` when the key still holds its placeholder.
    pub fn opt_f64(&self, name: &str) -> Option<f64> {
        self.raw(name).parse().ok()
    }

    pub fn u64(&self, name: &str) -> CliResult<u64> {
        let v = self.raw(name);
        v.parse().map_err(|_| CliError::Config(format!("key `{name}` is not an integer (`{v}`)")))
    }

    pub fn usize(&self, name: &str) -> CliResult<usize> {
        usize::try_from(self.u64(name)?).map_err(|_| CliError::Config(format!("key `{name}` is too large")))
    }

    pub fn bool(&self, name: &str) -> bool {
        self.raw(name) == "true"
    }

    pub fn text(&self, name: &str) -> &str {
        self.raw(name)
    }

    pub fn path(&self, name: &str) -> Option<PathBuf> {
        let v = self.raw(name);
        (!v.is_empty()).then(|| PathBuf::from(v))
    }

    pub fn f64_list(&self, name: &str) -> Vec<f64> {
        self.raw(name).split(',').filter_map(|x| x.trim().parse().ok()).collect()
    }

    pub fn seed(&self) -> u64 {
        self.raw("seed").parse().expect("seed is validated")
    }

    pub fn preset(&self) -> Option<Preset> {
        self.command.default_preset().map(|_| self.raw("preset").parse().expect("preset is validated"))
    }

    /// Fills every placeholder the command can decide up front: device
    /// fields from the preset, preset compliance, and the nominal train of a
    /// plasticity run.
    pub fn resolve(mut self) -> CliResult<Self> {
        if let Some(preset) = self.preset() {
            let base = preset.params();
            for f in device_fields() {
                let k = format!("{DEVICE_PREFIX}{f}");
                if self.raw(&k) == "preset" {
                    let v = base.get_field(f).expect("known field");
                    self.set(&k, &fmt_f64(v))?;
                }
            }
            if self.command.keys().iter().any(|k| k.name == "cc") && self.raw("cc") == "auto" {
                self.set("cc", &fmt_f64(preset.default_cc()))?;
            }
        }
        if self.command == Command::Plasticity {
            let ltp = self.raw("kind") == "ltp";
            for (k, stp, ltp_v) in [("pulse_width", 15e-3, 20e-3), ("pulse_amplitude", 2.5, 3.5)] {
                if self.raw(k) == "auto" {
                    self.set(k, &fmt_f64(if ltp { ltp_v } else { stp }))?;
                }
            }
        }
        if self.command == Command::Lif && self.raw("t_recover") == "auto" {
            let tau = self.f64("device.tau_relax")?;
            self.set("t_recover", &fmt_f64(10.0 * tau))?;
        }
        Ok(self)
    }

    /// Effective device parameters: preset, field overrides, run seed, jitter switch.
    pub fn device_params(&self) -> CliResult<DeviceParams> {
        let preset =
            self.preset().ok_or_else(|| CliError::Config(format!("`{}` has no device", self.command.name())))?;
        let mut p = preset.params();
        for f in device_fields() {
            if let Some(v) = self.opt_f64(&format!("{DEVICE_PREFIX}{f}")) {
                p.set_field(f, v).map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        p.seed = self.seed();
        if self.command.keys().iter().any(|k| k.name == "jitter") && !self.bool("jitter") {
            p = p.without_jitter();
        }
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }

    /// `key = value` lines of every entry, in schema order.
    pub fn to_text(&self) -> String {
        let mut s = format!("# memristim {}\n", self.command.name());
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_is_all_defaults() {
        for c in Command::ALL {
            let cfg = RunConfig::parse(c, "").unwrap();
            assert_eq!(cfg, RunConfig::defaults(c));
            for k in c.keys() {
                assert_eq!(cfg.raw(k.name), k.default);
            }
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse(Command::Sweep, "cc = 1e-3\nbogus_key = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn malformed_lines_and_values_are_rejected() {
        assert!(RunConfig::parse(Command::Sweep, "cc 1e-3").is_err());
        assert!(RunConfig::parse(Command::Sweep, "cc = fast").is_err());
        assert!(RunConfig::parse(Command::Sweep, "cycles = -1").is_err());
        assert!(RunConfig::parse(Command::Sweep, "cc = 1e-3\ncc = 2e-3").is_err());
        assert!(RunConfig::parse(Command::Sweep, "preset = nope").unwrap_err().to_string().contains("nope"));
        assert!(RunConfig::parse(Command::SampleArray, "preset = lif-calibrated").is_err());
        assert!(RunConfig::parse(Command::Sweep, "device.seed = 3").is_err());
    }

    #[test]
    fn comments_and_hyphens() {
        let cfg = RunConfig::parse(Command::Pulse, "# header\npulse-width = 2e-4 # wider\n\n").unwrap();
        assert_eq!(cfg.f64("pulse_width").unwrap(), 2e-4);
    }

    #[test]
    fn numbers_are_stored_canonically() {
        let cfg = RunConfig::parse(Command::FiringRatio, "cc = 1E-3\nn_pulses = 007\nwidths = 1e-4, 2.0e-4").unwrap();
        assert_eq!(cfg.raw("cc"), "0.001");
        assert_eq!(cfg.raw("n_pulses"), "7");
        assert_eq!(cfg.raw("widths"), "0.0001,0.0002");
    }

    #[test]
    fn resolve_fills_placeholders() {
        let cfg = RunConfig::parse(Command::Sweep, "preset = volatile-10uA").unwrap().resolve().unwrap();
        assert_eq!(cfg.f64("cc").unwrap(), 1e-5);
        assert_eq!(cfg.f64("device.v_set_nominal").unwrap(), 0.40);
        let cfg = RunConfig::parse(Command::Plasticity, "kind = ltp").unwrap().resolve().unwrap();
        assert_eq!(cfg.f64("pulse_amplitude").unwrap(), 3.5);
        assert_eq!(cfg.f64("pulse_width").unwrap(), 20e-3);
        let cfg = RunConfig::parse(Command::Lif, "").unwrap().resolve().unwrap();
        assert!((cfg.f64("t_recover").unwrap() - 10e-3).abs() < 1e-15);
    }

    #[test]
    fn device_overrides_apply() {
        let cfg = RunConfig::parse(Command::Pulse, "device.tau_relax = 2e-3\nseed = 9\njitter = true")
            .unwrap()
            .resolve()
            .unwrap();
        let p = cfg.device_params().unwrap();
        assert_eq!(p.tau_relax, 2e-3);
        assert_eq!(p.seed, 9);
        assert!(p.v_set_sigma > 0.0);
        let bad = RunConfig::parse(Command::Pulse, "device.w_crit = 2").unwrap().resolve().unwrap();
        assert!(matches!(bad.device_params(), Err(CliError::Config(_))));
    }

    #[test]
    fn effective_text_lists_every_value_and_parses_back() {
        for c in Command::ALL {
            let cfg = RunConfig::parse(c, "seed = 4").unwrap().resolve().unwrap();
            let text = cfg.to_text();
            for (k, v) in cfg.entries() {
                assert!(text.contains(&format!("{k} = {v}\n")));
            }
            let again = RunConfig::parse(c, &text).unwrap().resolve().unwrap();
            assert_eq!(again, cfg);
        }
    }

    proptest! {
        #[test]
        fn numeric_values_round_trip(
            cc in 1e-9f64..1.0,
            width in 1e-6f64..1e-2,
            n in 1u64..100_000,
            seed in any::<u64>(),
        ) {
            let text = format!("cc = {}\npulse_width = {}\nn_pulses = {n}\nseed = {seed}\n", fmt_f64(cc), fmt_f64(width));
            let cfg = RunConfig::parse(Command::Pulse, &text).unwrap().resolve().unwrap();
            let again = RunConfig::parse(Command::Pulse, &cfg.to_text()).unwrap();
            prop_assert_eq!(again.f64("cc").unwrap(), cc);
            prop_assert_eq!(again.f64("pulse_width").unwrap(), width);
            prop_assert_eq!(again.u64("n_pulses").unwrap(), n);
            prop_assert_eq!(again.seed(), seed);
        }
    }
}
