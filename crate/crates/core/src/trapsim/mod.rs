//! Charge-trap ensemble simulation of BTI threshold-voltage shift.
//!
//! Every trap is an independent two-state (empty/filled) system. Under
//! stress an accessible trap fills with time constant `tau_c`; under relax it
//! empties with `tau_e`; reads leave it untouched. A filled trap shifts the
//! threshold voltage by `-eta`, so `ΔV_T(t) = −Σ ηᵢ pᵢ(t)` where `pᵢ` is the
//! fill probability.
//!
//! Each bias segment acts on `p` as an exact affine map
//! `p ← e^{−λ} p + β` (see [`SegmentMap`]). AC cycles compose two such maps and
//! repeat the result in closed form, so simulation cost scales with the
//! number of samples, not the number of cycles.

mod ensemble;
mod kinetics;
mod simulate;

pub use ensemble::{gen_ensemble, gen_populations, sample_population, EnsembleGenSpec};
pub use kinetics::{effective_rates, step_segment, OccupancyState, Rates, SegmentMap};
pub use simulate::{simulate, simulate_with, SimOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;

/// Default reference temperature for trap time constants (25 °C).
pub const DEFAULT_REFERENCE_TEMPERATURE: f64 = 298.15;
/// Default activation energy for both capture and emission, eV.
pub const DEFAULT_ACTIVATION_ENERGY: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum TrapSimError {
    #[error("invalid trap parameter `{name}` = {value}: {reason}")]
    InvalidTrap { name: &'static str, value: f64, reason: &'static str },
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("trap ensemble is empty")]
    EmptyEnsemble,
    #[error("temperature must be positive, got {0} K")]
    InvalidTemperature(f64),
    #[error("occupancy state has {state} traps but the ensemble has {ensemble}")]
    StateMismatch { state: usize, ensemble: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, TrapSimError>;

/// One two-state oxide/interface trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trap {
    /// Capture time constant at the reference temperature, s.
    pub tau_c_ref: f64,
    /// Emission time constant at relax bias and reference temperature, s.
    pub tau_e_ref: f64,
    /// |ΔV_T| contribution when filled, V.
    pub eta: f64,
    pub ea_capture: f64,
    pub ea_emission: f64,
    /// Minimum |ξ'_ox| (MV/cm) at which the trap can be filled.
    pub field_threshold: f64,
}

impl Trap {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 6] = [
            ("tau_c_ref", self.tau_c_ref, self.tau_c_ref > 0.0, "must be positive"),
            ("tau_e_ref", self.tau_e_ref, self.tau_e_ref > 0.0, "must be positive"),
            ("eta", self.eta, self.eta >= 0.0, "must be nonnegative"),
            ("ea_capture", self.ea_capture, self.ea_capture >= 0.0, "must be nonnegative"),
            ("ea_emission", self.ea_emission, self.ea_emission >= 0.0, "must be nonnegative"),
            ("field_threshold", self.field_threshold, self.field_threshold >= 0.0, "must be nonnegative"),
        ];
        for (name, value, ok, reason) in checks {
            if !ok || !value.is_finite() {
                return Err(TrapSimError::InvalidTrap { name, value, reason });
            }
        }
        Ok(())
    }
}

/// Discretised trap population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapEnsemble {
    pub traps: Vec<Trap>,
    pub reference_temperature: f64,
    /// MV/cm; informational, the field enters through trap thresholds.
    pub reference_field: f64,
    pub seed: u64,
}

impl TrapEnsemble {
    pub fn new(traps: Vec<Trap>, reference_temperature: f64, reference_field: f64, seed: u64) -> Result<Self> {
        if traps.is_empty() {
            return Err(TrapSimError::EmptyEnsemble);
        }
        if !(reference_temperature > 0.0 && reference_temperature.is_finite()) {
            return Err(TrapSimError::InvalidTemperature(reference_temperature));
        }
        for t in &traps {
            t.validate()?;
        }
        Ok(Self { traps, reference_temperature, reference_field, seed })
    }

    pub fn len(&self) -> usize {
        self.traps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traps.is_empty()
    }

    /// Upper bound on |ΔV_T|, `Σ η`.
    pub fn saturation(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.traps.iter().map(|t| t.eta).collect::<Vec<_>>())
    }

    /// `Σ η` over traps accessible at field `xi`.
    pub fn accessible_saturation(&self, xi: f64) -> f64 {
        let etas: Vec<f64> = self.traps.iter().filter(|t| xi.abs() >= t.field_threshold).map(|t| t.eta).collect();
        crate::numeric::pairwise_sum(&etas)
    }
}
