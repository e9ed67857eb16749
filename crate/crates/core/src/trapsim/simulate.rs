use rayon::prelude::*;

use super::{effective_rates, Result, SegmentMap, TrapEnsemble, TrapSimError};
use crate::analysis::{DegradationTrace, TraceMeta, TraceSample};
use crate::models::DeviceParams;
use crate::numeric::{pairwise_sum, CompensatedSum};
use crate::waveform::{BiasSegment, Block, Phase, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Evaluate traps on the rayon pool. Results are bit-identical either way.
    pub parallel: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

/// Wall/stress clock and label at each sample point, plus an initial sample
/// at time zero unless the waveform opens with one.
fn sample_clock(waveform: &Waveform) -> Vec<(f64, f64, Phase)> {
    let mut wall = CompensatedSum::new();
    let mut stress = CompensatedSum::new();
    let mut out = Vec::with_capacity(waveform.sample_count() + 1);
    if !waveform.blocks().first().is_some_and(Block::is_sample) {
        out.push((0.0, 0.0, Phase::Stress));
    }
    for b in waveform.blocks() {
        match b {
            Block::Read { label, .. } | Block::Measure { label } => {
                out.push((wall.value(), stress.value(), *label));
            }
            _ => {}
        }
        wall.add(b.duration());
        stress.add(b.stress_time());
    }
    out
}

/// Bias-dependent data for one block, computed once and shared by all traps.
enum PreparedBlock {
    Sample,
    Segment(BiasSegment, f64),
    Cycles([(BiasSegment, f64); 2], u64),
}

fn prepare(waveform: &Waveform, device: &DeviceParams) -> Result<Vec<PreparedBlock>> {
    waveform
        .blocks()
        .iter()
        .map(|b| {
            Ok(match b {
                Block::Read { .. } | Block::Measure { .. } => PreparedBlock::Sample,
                Block::Segment(s) => PreparedBlock::Segment(*s, device.field(s.v_gs)?),
                Block::Cycles { template, count } => {
                    let [a, b] = template.segments();
                    PreparedBlock::Cycles([(a, device.field(a.v_gs)?), (b, device.field(b.v_gs)?)], *count)
                }
            })
        })
        .collect()
}

/// Forward-simulate `ΔV_T` at every sample point of `waveform`.
///
/// Traps start empty. Sample values are `−Σ ηᵢ pᵢ` with a fixed-order
/// pairwise sum, so serial and parallel runs agree bit for bit.
pub fn simulate(
    ensemble: &TrapEnsemble,
    waveform: &Waveform,
    device: &DeviceParams,
    temperature: f64,
) -> Result<DegradationTrace> {
    simulate_with(ensemble, waveform, device, temperature, SimOptions::default())
}

pub fn simulate_with(
    ensemble: &TrapEnsemble,
    waveform: &Waveform,
    device: &DeviceParams,
    temperature: f64,
    options: SimOptions,
) -> Result<DegradationTrace> {
    if ensemble.is_empty() {
        return Err(TrapSimError::EmptyEnsemble);
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(TrapSimError::InvalidTemperature(temperature));
    }
    let clock = sample_clock(waveform);
    let blocks = prepare(waveform, device)?;
    let leading_zero = clock.len() > waveform.sample_count();
    let t_ref = ensemble.reference_temperature;

    let trajectory = |trap: &super::Trap| -> Result<Vec<f64>> {
        let map_for = |seg: &BiasSegment, xi: f64| -> Result<SegmentMap> {
            let rates = effective_rates(trap, seg.phase, xi, temperature, t_ref)?;
            Ok(SegmentMap::from_rates(rates, seg.duration))
        };
        let mut p = 0.0;
        let mut contributions = Vec::with_capacity(clock.len());
        if leading_zero {
            contributions.push(0.0);
        }
        for block in &blocks {
            match block {
                PreparedBlock::Sample => contributions.push(trap.eta * p),
                PreparedBlock::Segment(seg, xi) => p = map_for(seg, *xi)?.apply(p),
                PreparedBlock::Cycles([(a, xa), (b, xb)], count) => {
                    let cycle = map_for(a, *xa)?.then(map_for(b, *xb)?);
                    p = cycle.repeat(*count).apply(p);
                }
            }
        }
        Ok(contributions)
    };

    let per_trap: Vec<Vec<f64>> = if options.parallel {
        ensemble.traps.par_iter().map(trajectory).collect::<Result<_>>()?
    } else {
        ensemble.traps.iter().map(trajectory).collect::<Result<_>>()?
    };

    let mut column = vec![0.0; per_trap.len()];
    let samples = clock
        .iter()
        .enumerate()
        .map(|(k, &(t_wall, t_cum_stress, phase))| {
            for (slot, traj) in column.iter_mut().zip(&per_trap) {
                *slot = traj[k];
            }
            // 0.0 - x keeps an all-empty ensemble at +0.0
            TraceSample { t_wall, t_cum_stress, delta_vt: 0.0 - pairwise_sum(&column), phase }
        })
        .collect();

    Ok(DegradationTrace {
        samples,
        meta: TraceMeta {
            device: Some(*device),
            temperature: Some(temperature),
            waveform: waveform.descriptor().to_string(),
            source: format!("seed={}", ensemble.seed),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trapsim::{gen_ensemble, EnsembleGenSpec, Trap};
    use crate::waveform::{build_ac_waveform, build_dc_waveform, AcStressSpec, DcStressSpec, LogGrid};
    use approx::assert_relative_eq;

    fn device() -> DeviceParams {
        DeviceParams::new(2.13, -0.3, 1.5e-6, 298.15).unwrap()
    }

    fn single(tau_c: f64, tau_e: f64, eta: f64) -> TrapEnsemble {
        let t =
            Trap { tau_c_ref: tau_c, tau_e_ref: tau_e, eta, ea_capture: 0.1, ea_emission: 0.1, field_threshold: 0.0 };
        TrapEnsemble::new(vec![t], 298.15, 0.0, 0).unwrap()
    }

    #[test]
    fn zero_duration_waveform_gives_single_zero_sample() {
        let trace = simulate(&single(1.0, 1.0, 0.1), &Waveform::empty(), &device(), 298.15).unwrap();
        assert_eq!(trace.samples.len(), 1);
        assert_eq!(trace.samples[0].delta_vt, 0.0);
    }

    #[test]
    fn single_trap_dc_closed_form() {
        let spec = DcStressSpec::new(-1.2, -0.1, 10.0, 0.0, LogGrid::new(1e-2, 10.0, 5).unwrap());
        let w = build_dc_waveform(&spec).unwrap();
        let trace = simulate(&single(1.0, 10.0, 0.1), &w, &device(), 298.15).unwrap();
        let last = trace.samples.last().unwrap();
        assert_eq!(last.t_cum_stress, 10.0);
        let expected = -0.1 * -(-10.0f64).exp_m1();
        assert_relative_eq!(last.delta_vt, expected, max_relative = 1e-14);
        assert_relative_eq!(last.delta_vt, -0.0999955, max_relative = 1e-6);
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let spec = EnsembleGenSpec { n_traps: 777, ..Default::default() };
        let ens = gen_ensemble(&spec, 9).unwrap();
        let w =
            build_ac_waveform(&AcStressSpec::new(-1.2, 1e5, 0.3, 10.0, LogGrid::new(1e-3, 10.0, 7).unwrap())).unwrap();
        let a = simulate_with(&ens, &w, &device(), 350.0, SimOptions { parallel: true }).unwrap();
        let b = simulate_with(&ens, &w, &device(), 350.0, SimOptions { parallel: false }).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.delta_vt.to_bits(), y.delta_vt.to_bits());
        }
    }

    #[test]
    fn trace_clocks_are_ordered() {
        let spec = DcStressSpec::new(-1.2, -0.1, 100.0, 100.0, LogGrid::new(1e-3, 100.0, 4).unwrap());
        let w = build_dc_waveform(&spec).unwrap();
        let trace = simulate(&single(1.0, 10.0, 0.1), &w, &device(), 298.15).unwrap();
        trace.validate().unwrap();
        assert_eq!(trace.samples.len(), w.sample_count() + 1);
    }

    #[test]
    fn rejects_bad_temperature() {
        assert!(matches!(
            simulate(&single(1.0, 1.0, 0.1), &Waveform::empty(), &device(), -1.0),
            Err(TrapSimError::InvalidTemperature(_))
        ));
    }
}
