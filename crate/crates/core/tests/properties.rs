use bti_aging::analysis::{
    ambient_cdf, peak_metrics, ttf_extension, ttf_project, CdfMode, DegradationTrace, TraceSample,
};
use bti_aging::fitting::{fit_dutycycle, fit_powerlaw, DutySample, FieldTimeSample, FitOptions};
use bti_aging::io::{ensemble_to_csv, read_ensemble_csv, read_trace_csv, trace_to_csv, write_file, Provenance};
use bti_aging::models::{
    dutycycle_eval, powerlaw_eval, universal_relax_eval, DeviceParams, DutyCycleLogModel, PowerLawModel,
    UniversalRelaxModel,
};
use bti_aging::numeric::pairwise_sum;
use bti_aging::trapsim::{
    gen_ensemble, simulate, simulate_with, step_segment, EnsembleGenSpec, OccupancyState, SimOptions, Trap,
    TrapEnsemble,
};
use bti_aging::waveform::{
    build_ac_waveform, build_dc_waveform, AcPattern, AcStressSpec, BiasSegment, Block, DcStressSpec, LogGrid, Phase,
    SampleGrid, Waveform,
};
use proptest::prelude::*;

const T_REF: f64 = 298.15;
const V_STRESS: f64 = -1.578;

fn device() -> DeviceParams {
    DeviceParams::new(2.13, -0.3, 1.5e-6, T_REF).unwrap()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

fn trap() -> impl Strategy<Value = Trap> {
    (log_uniform(1e-6, 1e6), log_uniform(1e-6, 1e6), 1e-4..0.05f64, 0.0..0.8f64, 0.0..0.8f64, 0.0..8.0f64).prop_map(
        |(tau_c_ref, tau_e_ref, eta, ea_capture, ea_emission, field_threshold)| Trap {
            tau_c_ref,
            tau_e_ref,
            eta,
            ea_capture,
            ea_emission,
            field_threshold,
        },
    )
}

fn ensemble(max: usize) -> impl Strategy<Value = TrapEnsemble> {
    prop::collection::vec(trap(), 1..max).prop_map(|traps| TrapEnsemble::new(traps, T_REF, 0.0, 0).unwrap())
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![Just(Phase::Stress), Just(Phase::Relax), Just(Phase::Read)]
}

fn ac_spec(f: f64, duty: f64, cycles: u32, pattern: AcPattern) -> AcStressSpec {
    let target = cycles as f64 * duty / f;
    let grid = LogGrid::new(target / 100.0, target, 5).unwrap();
    let mut spec = AcStressSpec::new(V_STRESS, f, duty, target, grid);
    spec.pattern = pattern;
    spec
}

fn pattern() -> impl Strategy<Value = AcPattern> {
    prop_oneof![Just(AcPattern::RelaxStressMeasure), Just(AcPattern::StressRelaxMeasure)]
}

fn shift(ens: &TrapEnsemble, p: &[f64]) -> f64 {
    let c: Vec<f64> = ens.traps.iter().zip(p).map(|(t, p)| t.eta * p).collect();
    0.0 - pairwise_sum(&c)
}

fn naive_samples(ens: &TrapEnsemble, w: &Waveform) -> Vec<f64> {
    let dev = device();
    let mut state = OccupancyState::empty(ens.len());
    let mut out = Vec::new();
    for block in w.blocks() {
        match block {
            Block::Segment(s) | Block::Read { segment: s, .. } => {
                if block.is_sample() {
                    out.push(shift(ens, &state.p));
                }
                state = step_segment(&state, ens, s, &dev, T_REF).unwrap();
            }
            Block::Measure { .. } => out.push(shift(ens, &state.p)),
            Block::Cycles { template, count } => {
                for _ in 0..*count {
                    for s in template.segments() {
                        state = step_segment(&state, ens, &s, &dev, T_REF).unwrap();
                    }
                }
            }
        }
    }
    out
}

fn synthetic_trace(values: &[(f64, f64)]) -> DegradationTrace {
    let samples = values
        .iter()
        .map(|&(t, v)| TraceSample { t_wall: t, t_cum_stress: t, delta_vt: v, phase: Phase::Stress })
        .collect();
    DegradationTrace::new(samples, Default::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn occupancy_stays_in_unit_interval(
        ens in ensemble(8),
        p0 in prop::collection::vec(0.0..=1.0f64, 8),
        segs in prop::collection::vec((log_uniform(1e-9, 1e9), phase(), -3.0..0.5f64), 1..10),
        temp in 200.0..450.0f64,
    ) {
        let mut state = OccupancyState { p: p0[..ens.len()].to_vec(), t_wall: 0.0, t_cum_stress: 0.0 };
        for (dur, phase, v) in segs {
            let seg = BiasSegment::new(dur, v, phase).unwrap();
            let next = step_segment(&state, &ens, &seg, &device(), temp).unwrap();
            prop_assert!(next.p.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!(next.t_wall >= state.t_wall && next.t_cum_stress >= state.t_cum_stress);
            state = next;
        }
    }

    #[test]
    fn shift_bounded_by_total_eta(
        ens in ensemble(20),
        f in log_uniform(1e2, 1e7),
        duty in 0.05..0.95f64,
        pat in pattern(),
    ) {
        let w = build_ac_waveform(&ac_spec(f, duty, 500, pat)).unwrap();
        let trace = simulate(&ens, &w, &device(), T_REF).unwrap();
        let bound = ens.saturation() * (1.0 + 1e-12);
        prop_assert!(trace.samples.iter().all(|s| s.delta_vt.abs() <= bound));
    }

    #[test]
    fn dc_stress_is_monotone_up_and_relax_monotone_down(ens in ensemble(20), temp in 250.0..420.0f64) {
        let spec = DcStressSpec::new(V_STRESS, -0.5, 1e3, 1e3, LogGrid::new(1e-3, 1e3, 5).unwrap());
        let trace = simulate(&ens, &build_dc_waveform(&spec).unwrap(), &device(), temp).unwrap();
        let stress: Vec<f64> = trace.samples.iter().filter(|s| s.phase == Phase::Stress).map(|s| s.delta_vt.abs()).collect();
        let relax: Vec<f64> = trace.samples.iter().filter(|s| s.phase == Phase::Relax).map(|s| s.delta_vt.abs()).collect();
        prop_assert!(stress.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(relax.windows(2).all(|w| w[1] <= w[0]));
        let metrics = peak_metrics(&trace).unwrap();
        if metrics.stress_end_shift != 0.0 {
            for t in [1e-3, 1.0, 1e3] {
                let r = metrics.recovered_fraction(t).unwrap();
                prop_assert!((0.0..=1.0).contains(&r), "{r}");
            }
        }
    }

    #[test]
    fn cycle_fast_path_matches_naive(
        ens in ensemble(6),
        f in log_uniform(1e1, 1e6),
        duty in 0.05..0.95f64,
        cycles in 5u32..300,
        pat in pattern(),
    ) {
        let w = build_ac_waveform(&ac_spec(f, duty, cycles, pat)).unwrap();
        let fast = simulate_with(&ens, &w, &device(), T_REF, SimOptions { parallel: false }).unwrap();
        let naive = naive_samples(&ens, &w);
        let fast: Vec<f64> = fast.samples.iter().skip(fast.samples.len() - naive.len()).map(|s| s.delta_vt).collect();
        for (a, b) in fast.iter().zip(&naive) {
            prop_assert!(a == b || (a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn parallel_equals_serial(ens in ensemble(40), duty in 0.05..0.95f64) {
        let w = build_ac_waveform(&ac_spec(1e4, duty, 1000, AcPattern::RelaxStressMeasure)).unwrap();
        let a = simulate_with(&ens, &w, &device(), T_REF, SimOptions { parallel: false }).unwrap();
        let b = simulate_with(&ens, &w, &device(), T_REF, SimOptions { parallel: true }).unwrap();
        prop_assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn higher_duty_never_degrades_less(
        ens in ensemble(12),
        pair in prop::sample::subsequence(vec![0.1, 0.2, 0.25, 0.4, 0.5, 0.8], 2),
        f in prop_oneof![Just(1e3), Just(1e4)],
    ) {
        let (d1, d2) = (pair[0], pair[1]);
        // Whole periods for every duty in the set, so both runs sample equal stress times.
        let times: Vec<f64> = [2.0, 4.0, 10.0, 20.0, 40.0, 100.0].iter().map(|k| k * 1e-2).collect();
        let run = |duty: f64| {
            let spec = AcStressSpec::new(V_STRESS, f, duty, 1.0, SampleGrid::Times(times.clone()));
            simulate(&ens, &build_ac_waveform(&spec).unwrap(), &device(), T_REF).unwrap()
        };
        let (lo, hi) = (run(d1), run(d2));
        for (a, b) in lo.samples.iter().zip(&hi.samples) {
            prop_assert!((a.t_cum_stress - b.t_cum_stress).abs() <= 1e-9 * b.t_cum_stress.max(1e-12));
            prop_assert!(b.delta_vt.abs() >= a.delta_vt.abs() * (1.0 - 1e-12), "D {d1} {} vs D {d2} {}", a.delta_vt, b.delta_vt);
        }
    }

    #[test]
    fn cumulative_stress_is_monotone_and_exact_at_whole_cycles(
        f in log_uniform(1e1, 1e7),
        duty in 0.01..0.99f64,
        pat in pattern(),
        probes in prop::collection::vec(0.0..1.0f64, 1..20),
    ) {
        let w = build_ac_waveform(&ac_spec(f, duty, 10_000, pat)).unwrap();
        let total = w.total_duration();
        let mut probes: Vec<f64> = probes.iter().map(|u| u * total).collect();
        probes.sort_by(f64::total_cmp);
        let values: Vec<f64> = probes.iter().map(|&t| w.cumulative_stress_time(t).unwrap()).collect();
        prop_assert!(values.windows(2).all(|v| v[1] >= v[0]));

        let read = w.total_read_time();
        prop_assume!(read == 0.0);
        for n in [1u64, 7, 100, 9999] {
            let t = n as f64 / f;
            let cum = w.cumulative_stress_time(t).unwrap();
            prop_assert!((cum - duty * t).abs() <= 1e-12 * duty * t, "{cum} vs {}", duty * t);
        }
    }

    #[test]
    fn segment_durations_sum_to_schedule(f in log_uniform(1e1, 1e5), duty in 0.05..0.95f64, pat in pattern()) {
        let w = build_ac_waveform(&ac_spec(f, duty, 2000, pat)).unwrap();
        let total: Vec<f64> = w.segments().map(|s| s.duration).collect();
        let sum = pairwise_sum(&total);
        prop_assert!((sum - w.total_duration()).abs() <= 1e-9 * w.total_duration());
    }

    #[test]
    fn pattern_swap_preserves_cycle_times(f in log_uniform(1e1, 1e7), duty in 0.01..0.99f64) {
        let a = ac_spec(f, duty, 100, AcPattern::RelaxStressMeasure);
        let b = ac_spec(f, duty, 100, AcPattern::StressRelaxMeasure);
        prop_assert_eq!(a.t_stress(), b.t_stress());
        prop_assert_eq!(a.t_relax(), b.t_relax());
        let (wa, wb) = (build_ac_waveform(&a).unwrap(), build_ac_waveform(&b).unwrap());
        prop_assert!((wa.total_stress_time() - wb.total_stress_time()).abs() <= 1e-12 * wa.total_stress_time());
    }

    #[test]
    fn cdf_median_survives_duplication(values in prop::collection::vec(-1.0..1.0f64, 1..200)) {
        let doubled: Vec<f64> = values.iter().chain(&values).copied().collect();
        for mode in [CdfMode::Magnitude, CdfMode::Signed] {
            let a = ambient_cdf(&values, mode).unwrap();
            let b = ambient_cdf(&doubled, mode).unwrap();
            prop_assert_eq!(a.median, b.median);
            prop_assert!(a.cdf_points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        }
    }

    #[test]
    fn ttf_monotone_in_tolerance(
        increments in prop::collection::vec(0.0..0.02f64, 5..40),
        tols in prop::collection::vec(1e-4..0.3f64, 2..8),
    ) {
        let mut v = 0.0;
        let points: Vec<(f64, f64)> = increments
            .iter()
            .enumerate()
            .map(|(k, dv)| {
                v -= dv;
                (10f64.powf(k as f64 / 5.0 - 3.0), v)
            })
            .collect();
        let trace = synthetic_trace(&points);
        let mut tols = tols;
        tols.sort_by(f64::total_cmp);
        let ttfs: Vec<Option<f64>> = tols.iter().map(|&t| ttf_project(&trace, t).unwrap().ttf).collect();
        for w in ttfs.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) => prop_assert!(b >= a),
                (None, Some(_)) => prop_assert!(false, "higher tolerance reached, lower did not"),
                _ => {}
            }
        }
        if let Some(Some(_)) = ttfs.first() {
            let r = ttf_extension(&trace, &trace, tols[0]).unwrap();
            prop_assert_eq!(r.extension_ratio, Some(1.0));
        }
    }

    #[test]
    fn powerlaw_eval_monotone(c0 in 1e-3..1.0f64, m in 0.1..3.0f64, alpha in 0.01..0.99f64, xi in 0.1..10.0f64, t in log_uniform(1e-3, 1e6)) {
        let model = PowerLawModel::new(c0, m, alpha).unwrap();
        let base = powerlaw_eval(&model, -xi, t).unwrap().abs();
        prop_assert!(powerlaw_eval(&model, -xi, t * 2.0).unwrap().abs() >= base);
        prop_assert!(powerlaw_eval(&model, -xi * 1.5, t).unwrap().abs() >= base);
    }

    #[test]
    fn dutycycle_increasing_and_ratio_only(a in 1e-3..1.0f64, b in log_uniform(1e-4, 1e6), d in 0.0..0.99f64, t in log_uniform(1e-6, 1e6)) {
        let model = DutyCycleLogModel::new(a, b).unwrap();
        let v = dutycycle_eval(&model, d).unwrap();
        prop_assert!(dutycycle_eval(&model, d + 0.005).unwrap() > v);
        prop_assume!(d > 0.0);
        let via_times = model.eval_times(t, (1.0 - d) / d * t).unwrap();
        prop_assert!((via_times - v).abs() <= 1e-12 * v.abs().max(1e-300));
    }

    #[test]
    fn universal_relax_bounded_and_nonincreasing(b_r in 1e-3..10.0f64, beta in 0.05..1.0f64, ts in log_uniform(1e-3, 1e4), tr in log_uniform(1e-6, 1e6)) {
        let model = UniversalRelaxModel::new(b_r, beta).unwrap();
        let r = universal_relax_eval(&model, tr, ts).unwrap();
        prop_assert!(r > 0.0 && r <= 1.0);
        prop_assert!(universal_relax_eval(&model, tr * 3.0, ts).unwrap() <= r);
        prop_assert_eq!(universal_relax_eval(&model, 0.0, ts).unwrap(), 1.0);
    }

    #[test]
    fn powerlaw_fit_is_permutation_invariant(
        noise in prop::collection::vec(0.95..1.05f64, 12),
        perm in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let rows: Vec<FieldTimeSample> = (0..12)
            .map(|k| {
                let xi = -1.0 - (k % 3) as f64;
                let t = 10f64.powi((k / 3) as i32);
                FieldTimeSample { xi, t, delta_vt: -0.05 * xi.abs() * t.powf(0.2) * noise[k] }
            })
            .collect();
        let shuffled: Vec<FieldTimeSample> = perm.iter().map(|&i| rows[i]).collect();
        let a = fit_powerlaw(&rows, FitOptions::default()).unwrap();
        let b = fit_powerlaw(&shuffled, FitOptions::default()).unwrap();
        prop_assert_eq!(a.params, b.params);
        prop_assert_eq!(a.residual_rms, b.residual_rms);
    }

    #[test]
    fn duty_fit_ignores_exact_zero_anchor(a in 0.01..0.5f64, b in log_uniform(1e-2, 1e2)) {
        let rows: Vec<DutySample> = (1..=9)
            .map(|k| {
                let d = k as f64 / 10.0;
                DutySample { duty: d, delta_vt_mag: a * (b * d / (1.0 - d)).ln_1p(), t_stress_cumulative: 1.0 }
            })
            .collect();
        let mut anchored = rows.clone();
        anchored.push(DutySample { duty: 0.0, delta_vt_mag: 0.0, t_stress_cumulative: 1.0 });
        let x = fit_dutycycle(&rows, FitOptions::default()).unwrap();
        let y = fit_dutycycle(&anchored, FitOptions::default()).unwrap();
        prop_assert!((x.params.a - y.params.a).abs() <= 1e-6 * a);
        prop_assert!((x.params.b - y.params.b).abs() <= 1e-6 * b);
        prop_assert!((x.params.b - b).abs() <= 1e-3 * b, "{} vs {b}", x.params.b);
    }

    #[test]
    fn trace_csv_round_trip_is_lossless(ens in ensemble(10), duty in 0.05..0.95f64) {
        let w = build_ac_waveform(&ac_spec(1e3, duty, 300, AcPattern::RelaxStressMeasure)).unwrap();
        let trace = simulate(&ens, &w, &device(), T_REF).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let prov = Provenance { tool_version: "test".into(), config_sha256: None, seed: Some(3) };
        write_file(&path, &trace_to_csv(&trace, &prov)).unwrap();
        prop_assert_eq!(read_trace_csv(&path).unwrap().samples, trace.samples);

        let epath = dir.path().join("e.csv");
        write_file(&epath, &ensemble_to_csv(&ens, &prov)).unwrap();
        prop_assert_eq!(read_ensemble_csv(&epath).unwrap().traps, ens.traps);
    }
}

#[test]
fn saturation_shift_grows_linearly_with_field() {
    let spec = EnsembleGenSpec { n_traps: 20_000, field_threshold_range: (0.0, 8.0), ..Default::default() };
    let ens = gen_ensemble(&spec, 3).unwrap();
    let total = ens.saturation();
    for xi in [1.0, 2.0, 4.0, 6.0, 8.0] {
        let frac = ens.accessible_saturation(-xi) / total;
        assert!((frac - xi / 8.0).abs() < 0.02, "xi {xi}: {frac}");
    }
}
