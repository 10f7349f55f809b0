//! One function per command: read the resolved config, run, write artifacts.

mod array;
mod device;
mod dr;
mod tti;

use memristim_core::protocol::PulseTrain;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::OutDir;

pub fn dispatch(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    match cfg.command {
        Command::Sweep => device::sweep(cfg, out),
        Command::Endurance => device::endurance(cfg, out),
        Command::Pulse => device::pulse(cfg, out),
        Command::Lif => device::lif(cfg, out),
        Command::FiringRatio => device::firing_ratio(cfg, out),
        Command::Plasticity => device::plasticity(cfg, out),
        Command::SampleArray => array::sample_array(cfg, out),
        Command::SynthData => dr::synth_data(cfg, out),
        Command::TrainDr => dr::train_dr(cfg, out),
        Command::EvalDr => dr::eval_dr(cfg, out),
        Command::Tti => tti::tti(cfg, out),
    }
}

/// Rejected input values are configuration errors, not runtime failures.
fn invalid(e: memristim_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Pulse train from the `n_pulses`, `pulse_*` and `gap_*` keys.
fn pulse_train(cfg: &RunConfig) -> CliResult<PulseTrain> {
    let train = PulseTrain {
        n_pulses: cfg.usize("n_pulses")?,
        pulse_width: cfg.f64("pulse_width")?,
        pulse_amplitude: cfg.f64("pulse_amplitude")?,
        gap_width: cfg.f64("gap_width")?,
        gap_amplitude: cfg.f64("gap_amplitude")?,
    };
    train.validate().map_err(invalid)?;
    Ok(train)
}

fn positive(cfg: &RunConfig, name: &str) -> CliResult<f64> {
    let v = cfg.f64(name)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("key `{name}` must be > 0, got {v}")))
    }
}
