use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Result, Trap, TrapEnsemble, TrapSimError, DEFAULT_ACTIVATION_ENERGY, DEFAULT_REFERENCE_TEMPERATURE};

/// Recipe for sampling a trap population.
///
/// Time constants are log-uniform, field thresholds uniform. When
/// `emission_ratio_range` is set, `tau_e = tau_c · r` with `r` log-uniform
/// over that range and `tau_e_range` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleGenSpec {
    pub n_traps: usize,
    pub tau_c_range: (f64, f64),
    pub tau_e_range: (f64, f64),
    pub emission_ratio_range: Option<(f64, f64)>,
    /// Split equally over the traps, V.
    pub total_eta: f64,
    /// MV/cm.
    pub field_threshold_range: (f64, f64),
    pub ea_capture: f64,
    pub ea_emission: f64,
}

impl Default for EnsembleGenSpec {
    fn default() -> Self {
        Self {
            n_traps: 1000,
            tau_c_range: (1e-3, 1e3),
            tau_e_range: (1e-3, 1e3),
            emission_ratio_range: None,
            total_eta: 0.1,
            field_threshold_range: (0.0, 0.0),
            ea_capture: DEFAULT_ACTIVATION_ENERGY,
            ea_emission: DEFAULT_ACTIVATION_ENERGY,
        }
    }
}

impl EnsembleGenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TrapSimError::InvalidSpec(msg));
        if self.n_traps == 0 {
            return bad("n_traps must be at least 1".into());
        }
        let positive_range = |name: &str, (lo, hi): (f64, f64)| -> Result<()> {
            if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
                return Err(TrapSimError::InvalidSpec(format!("{name} [{lo}, {hi}] must be positive and ordered")));
            }
            Ok(())
        };
        positive_range("tau_c_range", self.tau_c_range)?;
        match self.emission_ratio_range {
            Some(r) => positive_range("emission_ratio_range", r)?,
            None => positive_range("tau_e_range", self.tau_e_range)?,
        }
        let (f_lo, f_hi) = self.field_threshold_range;
        if !(f_lo >= 0.0 && f_hi.is_finite() && f_lo <= f_hi) {
            return bad(format!("field_threshold_range [{f_lo}, {f_hi}] must be nonnegative and ordered"));
        }
        if !(self.total_eta >= 0.0 && self.total_eta.is_finite()) {
            return bad(format!("total_eta {} must be nonnegative", self.total_eta));
        }
        if !(self.ea_capture >= 0.0 && self.ea_emission >= 0.0) {
            return bad("activation energies must be nonnegative".into());
        }
        Ok(())
    }
}

fn log_uniform(u: f64, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    }
}

fn uniform(u: f64, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + u * (hi - lo)
    }
}

/// Sample one population from ChaCha8 stream `stream` of `seed`.
///
/// Stream order: for each trap in turn, three uniforms in `[0, 1)` are drawn
/// for (capture constant, emission constant or ratio, field threshold). All
/// three are always drawn so degenerate ranges do not shift the stream.
pub fn sample_population(spec: &EnsembleGenSpec, seed: u64, stream: u64) -> Result<Vec<Trap>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let eta = spec.total_eta / spec.n_traps as f64;
    let traps = (0..spec.n_traps)
        .map(|_| {
            let (u_c, u_e, u_f): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            let tau_c_ref = log_uniform(u_c, spec.tau_c_range);
            let tau_e_ref = match spec.emission_ratio_range {
                Some(r) => tau_c_ref * log_uniform(u_e, r),
                None => log_uniform(u_e, spec.tau_e_range),
            };
            Trap {
                tau_c_ref,
                tau_e_ref,
                eta,
                ea_capture: spec.ea_capture,
                ea_emission: spec.ea_emission,
                field_threshold: uniform(u_f, spec.field_threshold_range),
            }
        })
        .collect();
    Ok(traps)
}

/// Deterministic single-population ensemble (stream 0).
pub fn gen_ensemble(spec: &EnsembleGenSpec, seed: u64) -> Result<TrapEnsemble> {
    gen_populations(std::slice::from_ref(spec), seed)
}

/// Concatenate several populations; population `i` uses stream `i`.
pub fn gen_populations(specs: &[EnsembleGenSpec], seed: u64) -> Result<TrapEnsemble> {
    let mut traps = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        traps.extend(sample_population(spec, seed, i as u64)?);
    }
    TrapEnsemble::new(traps, DEFAULT_REFERENCE_TEMPERATURE, 0.0, seed)
}
