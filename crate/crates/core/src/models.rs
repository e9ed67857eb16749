//! Closed-form empirical NBTI models.
//!
//! Sign convention: [`powerlaw_eval`] returns the signed (negative) shift;
//! every other evaluator returns a magnitude.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Elementary charge, C.
pub const Q: f64 = 1.602_176_634e-19;
/// Boltzmann constant, eV/K.
pub const K_B: f64 = 8.617_333e-5;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model input `{name}` = {value}: {reason}")]
    InvalidInput { name: &'static str, value: f64, reason: &'static str },
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn require(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidInput { name, value, reason })
    }
}

/// Physical constants used by the models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub q: f64,
    pub k_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { q: Q, k_b: K_B }
    }
}

/// Device under test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Equivalent oxide thickness, nm.
    pub eot: f64,
    /// Pre-stress threshold voltage, V.
    pub v_t0: f64,
    /// Gate capacitance, F/cm².
    pub c_ox: f64,
    /// Kelvin.
    pub temperature: f64,
}

impl DeviceParams {
    pub fn new(eot: f64, v_t0: f64, c_ox: f64, temperature: f64) -> Result<Self> {
        require(eot > 0.0, "eot", eot, "must be positive")?;
        require(c_ox > 0.0, "c_ox", c_ox, "must be positive")?;
        require(temperature > 0.0, "temperature", temperature, "must be positive")?;
        Ok(Self { eot, v_t0, c_ox, temperature })
    }

    /// Normalised oxide field at gate bias `v_gs`, MV/cm.
    pub fn field(&self, v_gs: f64) -> Result<f64> {
        normalized_field(v_gs, self.v_t0, self.eot)
    }
}

/// `(v_gs − v_t) / eot` in MV/cm, with `eot` in nm (1 V/nm = 10 MV/cm).
pub fn normalized_field(v_gs: f64, v_t: f64, eot: f64) -> Result<f64> {
    require(eot > 0.0, "eot", eot, "must be positive")?;
    Ok(10.0 * (v_gs - v_t) / eot)
}

/// `ΔV_T = −c0 · |ξ|^m · t^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawModel {
    pub c0: f64,
    pub m: f64,
    pub alpha: f64,
}

impl PowerLawModel {
    pub fn new(c0: f64, m: f64, alpha: f64) -> Result<Self> {
        require(c0 >= 0.0, "c0", c0, "must be nonnegative")?;
        require(m > 0.0, "m", m, "must be positive")?;
        require(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "must lie in (0, 1)")?;
        Ok(Self { c0, m, alpha })
    }

    /// Stress time at which `|ΔV_T|` reaches `tolerance` at field `xi`.
    pub fn time_to_reach(&self, xi: f64, tolerance: f64) -> f64 {
        (tolerance / self.c0 / xi.abs().powf(self.m)).powf(1.0 / self.alpha)
    }
}

/// Signed NBTI shift from the power law.
pub fn powerlaw_eval(model: &PowerLawModel, xi: f64, t: f64) -> Result<f64> {
    require(t > 0.0, "t", t, "stress time must be positive")?;
    Ok(-model.c0 * xi.abs().powf(model.m) * t.powf(model.alpha))
}

/// `|ΔV_T| = A · ln(1 + B · t_stress / t_relax)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyCycleLogModel {
    pub a: f64,
    pub b: f64,
}

impl DutyCycleLogModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        require(a >= 0.0, "a", a, "must be nonnegative")?;
        require(b > 0.0, "b", b, "must be positive")?;
        Ok(Self { a, b })
    }

    /// Evaluate from explicit per-period stress and relax times.
    pub fn eval_times(&self, t_stress: f64, t_relax: f64) -> Result<f64> {
        require(t_stress >= 0.0, "t_stress", t_stress, "must be nonnegative")?;
        require(t_relax > 0.0, "t_relax", t_relax, "must be positive")?;
        Ok(self.a * (self.b * t_stress / t_relax).ln_1p())
    }
}

/// Stress-to-relax time ratio for duty cycle `duty`, `D / (1 − D)`.
pub fn stress_relax_ratio(duty: f64) -> f64 {
    duty / (1.0 - duty)
}

/// Duty-cycle log model at duty cycle `duty ∈ [0, 1)`, natural log.
pub fn dutycycle_eval(model: &DutyCycleLogModel, duty: f64) -> Result<f64> {
    require((0.0..1.0).contains(&duty), "duty", duty, "must lie in [0, 1); the DC limit diverges")?;
    Ok(model.a * (model.b * stress_relax_ratio(duty)).ln_1p())
}

/// Physical charge-trapping parameters behind the duty-cycle model.
///
/// `d_ot` is a volumetric density per unit energy (cm⁻³ eV⁻¹), so that
/// `q · d_ot · x_o · e_window / c_ox` comes out in volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapPhysicalParams {
    pub d_ot: f64,
    /// Tunnelling depth, cm.
    pub x_o: f64,
    /// F/cm².
    pub c_ox: f64,
    /// `E_F − E_F0`, eV.
    pub e_window: f64,
    pub tau_oc: f64,
    pub tau_oe: f64,
}

impl TrapPhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_ot", self.d_ot),
            ("x_o", self.x_o),
            ("c_ox", self.c_ox),
            ("e_window", self.e_window),
            ("tau_oc", self.tau_oc),
            ("tau_oe", self.tau_oe),
        ] {
            require(v > 0.0 && v.is_finite(), name, v, "must be positive and finite")?;
        }
        Ok(())
    }
}

/// Collapse the physical parameters into `(A, B)`.
pub fn dutycycle_from_physical(p: &TrapPhysicalParams) -> Result<DutyCycleLogModel> {
    p.validate()?;
    Ok(DutyCycleLogModel { a: Q * p.d_ot * p.x_o * p.e_window / p.c_ox, b: p.tau_oe / p.tau_oc })
}

/// Remaining fraction after relaxation: `1 / (1 + b_r · (t_relax/t_stress)^β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalRelaxModel {
    pub b_r: f64,
    pub beta: f64,
}

impl UniversalRelaxModel {
    pub fn new(b_r: f64, beta: f64) -> Result<Self> {
        require(b_r > 0.0, "b_r", b_r, "must be positive")?;
        require(beta > 0.0 && beta <= 1.0, "beta", beta, "must lie in (0, 1]")?;
        Ok(Self { b_r, beta })
    }

    /// Remaining fraction at relax/stress ratio `xi`.
    pub fn remaining_at_ratio(&self, xi: f64) -> f64 {
        1.0 / (1.0 + self.b_r * xi.powf(self.beta))
    }
}

pub fn universal_relax_eval(model: &UniversalRelaxModel, t_relax: f64, t_stress: f64) -> Result<f64> {
    require(t_stress > 0.0, "t_stress", t_stress, "must be positive")?;
    require(t_relax >= 0.0, "t_relax", t_relax, "must be nonnegative")?;
    Ok(model.remaining_at_ratio(t_relax / t_stress))
}
