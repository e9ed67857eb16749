//! Bias-temperature-instability (BTI) aging toolkit.
//!
//! The crate is organised around four pieces that can be used on their own
//! or chained together:
//!
//! - [`waveform`] builds DC stress/relax and AC (pulsed) gate-bias schedules.
//!   AC schedules are stored as a cycle template plus a repeat count, so a
//!   10 MHz run over 10³ s of cumulative stress never materialises its ~10¹⁰
//!   cycles.
//! - [`trapsim`] forward-simulates the threshold-voltage shift of an ensemble
//!   of independent two-state charge traps under any [`waveform::Waveform`].
//! - [`models`] and [`fitting`] hold the closed-form empirical NBTI models
//!   (power law in field and time, the log duty-cycle charge-trapping model,
//!   universal relaxation) and deterministic estimators for them.
//! - [`analysis`] turns degradation traces into time-to-failure projections,
//!   peak/recovery metrics, ambient-drift CDF summaries and D_it estimates.
//!
//! [`io`] and [`cli`] provide the CSV schemas, the run-config grammar and the
//! `bti` command-line front end.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod fitting;
pub mod io;
pub mod models;
pub mod numeric;
pub mod trapsim;
pub mod waveform;

pub use analysis::{DegradationTrace, TraceSample, TtfReport};
pub use models::{DeviceParams, DutyCycleLogModel, PowerLawModel, UniversalRelaxModel};
pub use trapsim::{Trap, TrapEnsemble};
pub use waveform::{Phase, Waveform};

/// Version string embedded in every output file header.
pub const TOOL_VERSION: &str = concat!("bti-aging ", env!("CARGO_PKG_VERSION"));
