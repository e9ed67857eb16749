use serde::{Deserialize, Serialize};

use super::{Result, Trap, TrapEnsemble, TrapSimError};
use crate::models::{DeviceParams, K_B};
use crate::waveform::{BiasSegment, Phase};

/// Effective time constants for one trap in one bias phase; `None` means
/// the process is disabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub tau_c: Option<f64>,
    pub tau_e: Option<f64>,
}

impl Rates {
    const FROZEN: Rates = Rates { tau_c: None, tau_e: None };
}

fn arrhenius(tau_ref: f64, ea: f64, temperature: f64, reference_temperature: f64) -> f64 {
    if temperature == reference_temperature || ea == 0.0 {
        return tau_ref;
    }
    tau_ref * ((ea / K_B) * (1.0 / temperature - 1.0 / reference_temperature)).exp()
}

/// Time constants of `trap` in `phase` at normalised field `xi` (MV/cm).
///
/// Stress fills accessible traps (`|xi| ≥ field_threshold`) and never
/// empties them; relax empties and never fills; read does neither. Both time
/// constants scale with temperature as
/// `tau_ref · exp[(Ea / k_B)(1/T − 1/T_ref)]`.
pub fn effective_rates(
    trap: &Trap,
    phase: Phase,
    xi: f64,
    temperature: f64,
    reference_temperature: f64,
) -> Result<Rates> {
    if !(temperature > 0.0) {
        return Err(TrapSimError::InvalidTemperature(temperature));
    }
    Ok(match phase {
        Phase::Stress if xi.abs() >= trap.field_threshold => Rates {
            tau_c: Some(arrhenius(trap.tau_c_ref, trap.ea_capture, temperature, reference_temperature)),
            tau_e: None,
        },
        Phase::Stress | Phase::Read => Rates::FROZEN,
        Phase::Relax => Rates {
            tau_c: None,
            tau_e: Some(arrhenius(trap.tau_e_ref, trap.ea_emission, temperature, reference_temperature)),
        },
    })
}

/// Exact first-order update `p ← e^{−λ} p + β` over one or more segments.
///
/// For a single segment `λ = Δt / τ_eff` and `β = p_∞ (1 − e^{−λ})` with
/// `1/τ_eff = 1/τ_c + 1/τ_e` and `p_∞ = τ_eff / τ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMap {
    pub lambda: f64,
    pub offset: f64,
}

impl SegmentMap {
    pub const IDENTITY: SegmentMap = SegmentMap { lambda: 0.0, offset: 0.0 };

    pub fn from_rates(rates: Rates, dt: f64) -> Self {
        let capture = rates.tau_c.map_or(0.0, |t| 1.0 / t);
        let emission = rates.tau_e.map_or(0.0, |t| 1.0 / t);
        let total = capture + emission;
        if total == 0.0 || dt == 0.0 {
            return Self::IDENTITY;
        }
        let lambda = dt * total;
        let p_inf = capture / total;
        Self { lambda, offset: p_inf * -(-lambda).exp_m1() }
    }

    /// Apply `self` first, then `next`.
    pub fn then(self, next: SegmentMap) -> SegmentMap {
        SegmentMap { lambda: self.lambda + next.lambda, offset: (-next.lambda).exp() * self.offset + next.offset }
    }

    /// Fixed point `β / (1 − e^{−λ})` of the map, if it contracts.
    pub fn fixed_point(self) -> Option<f64> {
        (self.lambda > 0.0).then(|| self.offset / -(-self.lambda).exp_m1())
    }

    /// `self` applied `n` times, in closed form.
    pub fn repeat(self, n: u64) -> SegmentMap {
        match (n, self.fixed_point()) {
            (0, _) => Self::IDENTITY,
            (1, _) => self,
            (_, None) => self,
            (_, Some(p_star)) => {
                let lambda = n as f64 * self.lambda;
                SegmentMap { lambda, offset: p_star * -(-lambda).exp_m1() }
            }
        }
    }

    pub fn apply(self, p: f64) -> f64 {
        ((-self.lambda).exp() * p + self.offset).clamp(0.0, 1.0)
    }
}

/// Per-trap fill probabilities plus the elapsed wall and stress clocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyState {
    pub p: Vec<f64>,
    pub t_wall: f64,
    pub t_cum_stress: f64,
}

impl OccupancyState {
    /// All traps empty at time zero.
    pub fn empty(n_traps: usize) -> Self {
        Self { p: vec![0.0; n_traps], t_wall: 0.0, t_cum_stress: 0.0 }
    }
}

/// Advance every trap through one bias segment.
pub fn step_segment(
    state: &OccupancyState,
    ensemble: &TrapEnsemble,
    segment: &BiasSegment,
    device: &DeviceParams,
    temperature: f64,
) -> Result<OccupancyState> {
    if state.p.len() != ensemble.len() {
        return Err(TrapSimError::StateMismatch { state: state.p.len(), ensemble: ensemble.len() });
    }
    let xi = device.field(segment.v_gs)?;
    let p = state
        .p
        .iter()
        .zip(&ensemble.traps)
        .map(|(&p, trap)| {
            let rates = effective_rates(trap, segment.phase, xi, temperature, ensemble.reference_temperature)?;
            Ok(SegmentMap::from_rates(rates, segment.duration).apply(p))
        })
        .collect::<Result<Vec<_>>>()?;
    let t_cum_stress = match segment.phase {
        Phase::Stress => state.t_cum_stress + segment.duration,
        _ => state.t_cum_stress,
    };
    Ok(OccupancyState { p, t_wall: state.t_wall + segment.duration, t_cum_stress })
}
