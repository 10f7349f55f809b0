//! Command-line surface: global flags, the verb and `--key value` overrides.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_pairs, Command, KeySpec, RunConfig};
use crate::error::{CliError, CliResult};

/// Default output directory when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT: &str = "memristim-out";
/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MEMRISTIM_OUT";

#[derive(Debug, Parser)]
#[command(name = "memristim", version, about = "Filamentary memristor simulator")]
#[command(after_help = "Command keys are set in the config file or as `--key value` after the command; \
                        `memristim <command> --keys` lists them.")]
pub struct Cli {
    /// Flat `key = value` file with the run's settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    /// Device preset; overrides the config file.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, clap::Args)]
pub struct Overrides {
    /// `--key value` or `--key=value` pairs.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    pub args: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Bipolar I-V sweep.
    Sweep(Overrides),
    /// Single pulse train with the full trace.
    Pulse(Overrides),
    /// Integrate-and-fire cycles with recovery.
    Lif(Overrides),
    /// Firing ratio over pulse widths.
    FiringRatio(Overrides),
    /// Short- or long-term potentiation train.
    Plasticity(Overrides),
    /// Repeated SET/RESET sweeps.
    Endurance(Overrides),
    /// Printed-array variation sample.
    SampleArray(Overrides),
    /// Train the lesion classifier.
    TrainDr(Overrides),
    /// Score a trained classifier.
    EvalDr(Overrides),
    /// Synthetic fundus images or separable vectors.
    SynthData(Overrides),
    /// Time-temperature indicator scenario.
    Tti(Overrides),
}

impl Verb {
    pub fn split(&self) -> (Command, &[String]) {
        let (c, o) = match self {
            Verb::Sweep(o) => (Command::Sweep, o),
            Verb::Pulse(o) => (Command::Pulse, o),
            Verb::Lif(o) => (Command::Lif, o),
            Verb::FiringRatio(o) => (Command::FiringRatio, o),
            Verb::Plasticity(o) => (Command::Plasticity, o),
            Verb::Endurance(o) => (Command::Endurance, o),
            Verb::SampleArray(o) => (Command::SampleArray, o),
            Verb::TrainDr(o) => (Command::TrainDr, o),
            Verb::EvalDr(o) => (Command::EvalDr, o),
            Verb::SynthData(o) => (Command::SynthData, o),
            Verb::Tti(o) => (Command::Tti, o),
        };
        (c, &o.args)
    }
}

/// Splits `--key value` / `--key=value` tokens into pairs.
pub fn parse_overrides(args: &[String]) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(tok) = it.next() {
        let key =
            tok.strip_prefix("--").ok_or_else(|| CliError::Config(format!("expected `--key value`, got `{tok}`")))?;
        let (k, v) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::Config(format!("`--{key}` needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        out.push((k, v));
    }
    Ok(out)
}

/// A fully resolved run: where to write, and what.
#[derive(Debug)]
pub struct Plan {
    pub out: PathBuf,
    pub config: RunConfig,
}

impl Cli {
    /// Layers defaults, the config file, verb overrides and global flags.
    pub fn plan(&self) -> CliResult<Plan> {
        let (command, args) = self.verb.split();
        let file = match &self.config {
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                parse_pairs(&text).map_err(|e| match e {
                    CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                    other => other,
                })?
            }
            None => Vec::new(),
        };
        let cli = parse_overrides(args)?;
        let mut global = Vec::new();
        if let Some(s) = self.seed {
            global.push(("seed".to_string(), s.to_string()));
        }
        if let Some(p) = &self.preset {
            global.push(("preset".to_string(), p.clone()));
        }
        let config =
            RunConfig::from_layers(command, [file.as_slice(), cli.as_slice(), global.as_slice()])?.resolve()?;
        Ok(Plan { out: self.out.clone(), config })
    }
}

/// Lines describing a command's keys, for `--keys`.
pub fn key_help(command: Command) -> String {
    let mut keys: Vec<KeySpec> = command.keys();
    keys.sort_by_key(|k| k.name);
    let width = keys.iter().map(|k| k.name.len()).max().unwrap_or(0);
    let mut s = format!("keys of `{}` (default in brackets):\n", command.name());
    s.push_str(&format!("  {:width$}  [0] run seed\n", "seed"));
    if let Some(p) = command.default_preset() {
        s.push_str(&format!("  {:width$}  [{p}] device preset\n", "preset"));
        s.push_str(&format!("  {:width$}  [preset] any device parameter, e.g. device.tau_relax\n", "device.*"));
    }
    for k in keys {
        s.push_str(&format!("  {:width$}  [{}] {}\n", k.name, k.default, k.help));
    }
    s
}
