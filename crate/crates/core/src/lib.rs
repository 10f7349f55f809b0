//! Behavioral simulation of Ag/MoS₂ filamentary memristors.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO. It covers:
//!
//! * [`device`]: a single-state-variable filament model with compliance-gated
//!   volatile / non-volatile switching, spontaneous relaxation and rupture.
//! * [`sweep`] and [`protocol`]: I-V sweeps, endurance cycling, pulse trains,
//!   leaky integrate-and-fire runs, firing-ratio statistics and STP/LTP.
//! * [`variation`] and [`crossbar`]: printed-array statistics and a
//!   pulse-programmed conductance matrix with differential-pair weights.
//! * [`dr`]: lesion candidate extraction, 81-dimensional features and an
//!   81×16×2 MLP trained with sign (Manhattan) updates, optionally through
//!   the crossbar.
//! * [`tti`]: a tri-mode time-temperature indicator driven by the device.
//!
//! ```
//! use memristim_core::device::{DeviceState, Preset};
//! use memristim_core::sweep::{extract_switching_metrics, run_iv_sweep, SweepSpec};
//!
//! let preset = Preset::Nonvolatile1mA;
//! let p = preset.params();
//! let mut dev = DeviceState::new(&p);
//! let trace = run_iv_sweep(&mut dev, &SweepSpec::standard(), preset.default_cc(), &p)?;
//! let m = extract_switching_metrics(&trace, &p);
//! assert!(m.on_off_ratio.unwrap() > 1e5);
//! # Ok::<(), memristim_core::Error>(())
//! ```
#![cfg_attr(not(test), no_std)]
// Parameter checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod crossbar;
pub mod device;
pub mod dr;
mod error;
pub(crate) mod math;
pub mod protocol;
pub mod sweep;
pub mod tti;
pub mod variation;

pub use error::{Error, Result};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
