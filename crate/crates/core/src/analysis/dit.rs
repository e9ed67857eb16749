use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::models::{K_B, Q};

/// Interface-trap density estimated from the subthreshold swing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DitEstimate {
    /// mV/decade.
    pub ss: f64,
    pub temperature: f64,
    /// F/cm².
    pub c_ox: f64,
    /// cm⁻² eV⁻¹.
    pub d_it: f64,
    pub method: String,
}

/// Thermionic limit `ln(10) · k_B T / q` in mV/decade.
pub fn ideal_subthreshold_swing(temperature: f64) -> f64 {
    std::f64::consts::LN_10 * K_B * temperature * 1000.0
}

/// `D_it = (C_ox / q) · (SS / SS_ideal − 1)`.
pub fn dit_from_subthreshold(ss: f64, temperature: f64, c_ox: f64) -> Result<DitEstimate> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(AnalysisError::InvalidInput {
            name: "temperature",
            value: temperature,
            reason: "must be positive",
        });
    }
    if !(c_ox > 0.0 && c_ox.is_finite()) {
        return Err(AnalysisError::InvalidInput { name: "c_ox", value: c_ox, reason: "must be positive" });
    }
    let ideal = ideal_subthreshold_swing(temperature);
    if !(ss >= ideal && ss.is_finite()) {
        return Err(AnalysisError::InvalidInput {
            name: "ss",
            value: ss,
            reason: "subthreshold swing is below the thermionic limit",
        });
    }
    Ok(DitEstimate { ss, temperature, c_ox, d_it: (c_ox / Q) * (ss / ideal - 1.0), method: "SS-based".to_string() })
}
