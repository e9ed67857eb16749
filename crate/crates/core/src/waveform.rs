//! Piecewise-constant gate-bias schedules for DC and AC (pulsed) BTI runs.
//!
//! A [`Waveform`] is an ordered list of [`Block`]s. DC stress/relax schedules
//! are explicit segment lists with read pulses at log-spaced sample times.
//! AC schedules are stored as a two-segment [`CycleTemplate`] repeated a
//! given number of times between measurement points, so the schedule size is
//! proportional to the number of samples and not to the number of cycles.
//!
//! Read pulses never stress or relax the device. Their duration is tracked
//! on the wall clock but excluded from both the cumulative stress and the
//! relaxation accounting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::CompensatedSum;

/// Default read pulse width (controller limited).
pub const DEFAULT_READ_PULSE_WIDTH: f64 = 1e-3;
/// Default delay between the end-of-stress read and the start of relaxation.
pub const DEFAULT_READ_TO_RELAX_DELAY: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum WaveformError {
    #[error("invalid waveform parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("sample time {time} s lies outside the schedule [0, {limit}] s")]
    GridOutsideSchedule { time: f64, limit: f64 },
    #[error("wall time {t_wall} s is outside the waveform duration [0, {total}] s")]
    TimeOutOfRange { t_wall: f64, total: f64 },
}

pub type Result<T> = std::result::Result<T, WaveformError>;

/// Bias phase of a segment or of a sampled trace point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Stress,
    Relax,
    Read,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Stress => "stress",
            Phase::Relax => "relax",
            Phase::Read => "read",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "stress" => Ok(Phase::Stress),
            "relax" => Ok(Phase::Relax),
            "read" => Ok(Phase::Read),
            other => Err(format!("unknown phase `{other}` (expected stress, relax or read)")),
        }
    }
}

/// Constant gate bias held for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSegment {
    pub duration: f64,
    pub v_gs: f64,
    pub phase: Phase,
}

impl BiasSegment {
    pub fn new(duration: f64, v_gs: f64, phase: Phase) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(WaveformError::InvalidParameter {
                name: "duration",
                value: duration,
                reason: "segment duration must be positive and finite",
            });
        }
        Ok(Self { duration, v_gs, phase })
    }
}

/// Log-spaced sample times, `points_per_decade` points per factor of ten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: u32,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: u32) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(WaveformError::InvalidParameter { name: "t_min", value: t_min, reason: "must be positive" });
        }
        if !(t_max > t_min && t_max.is_finite()) {
            return Err(WaveformError::InvalidParameter { name: "t_max", value: t_max, reason: "must exceed t_min" });
        }
        if points_per_decade == 0 {
            return Err(WaveformError::InvalidParameter {
                name: "points_per_decade",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self { t_min, t_max, points_per_decade })
    }

    /// Grid times `t_min · 10^(k/ppd)` up to and including `t_max` when it
    /// lands on the grid.
    pub fn points(&self) -> Vec<f64> {
        let ppd = f64::from(self.points_per_decade);
        let n = (ppd * (self.t_max / self.t_min).log10() + 1e-9).floor() as u64;
        (0..=n).map(|k| self.t_min * 10f64.powf(k as f64 / ppd)).map(|t| t.min(self.t_max)).collect()
    }
}

/// Sample times for a schedule: a log grid or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleGrid {
    Log(LogGrid),
    Times(Vec<f64>),
}

impl SampleGrid {
    /// Sorted, deduplicated sample times.
    pub fn points(&self) -> Vec<f64> {
        let mut pts = match self {
            SampleGrid::Log(g) => g.points(),
            SampleGrid::Times(ts) => ts.clone(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn validate(&self) -> Result<()> {
        if let SampleGrid::Times(ts) = self {
            if let Some(&t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return Err(WaveformError::InvalidParameter {
                    name: "sample_time",
                    value: t,
                    reason: "sample times must be positive and finite",
                });
            }
        }
        Ok(())
    }
}

impl From<LogGrid> for SampleGrid {
    fn from(g: LogGrid) -> Self {
        SampleGrid::Log(g)
    }
}

/// DC stress followed by relaxation, sampled on the fly with spot reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcStressSpec {
    pub v_stress: f64,
    pub v_read: f64,
    /// Gate bias during relaxation.
    pub v_relax: f64,
    pub stress_duration: f64,
    pub relax_duration: f64,
    pub read_pulse_width: f64,
    pub read_to_relax_delay: f64,
    /// Stress-phase reads at grid times of cumulative stress; relax-phase
    /// reads at grid times of elapsed relaxation.
    pub sample_grid: SampleGrid,
}

impl DcStressSpec {
    pub fn new(
        v_stress: f64,
        v_read: f64,
        stress_duration: f64,
        relax_duration: f64,
        sample_grid: impl Into<SampleGrid>,
    ) -> Self {
        Self {
            v_stress,
            v_read,
            v_relax: 0.0,
            stress_duration,
            relax_duration,
            read_pulse_width: DEFAULT_READ_PULSE_WIDTH,
            read_to_relax_delay: DEFAULT_READ_TO_RELAX_DELAY,
            sample_grid: sample_grid.into(),
        }
    }
}

/// Ordering of the stress and relax portions inside one AC period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcPattern {
    /// Relax, then stress, then measure (measurement right after stress).
    RelaxStressMeasure,
    /// Stress, then relax, then measure (measurement right after relax).
    StressRelaxMeasure,
}

impl FromStr for AcPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "relax-stress-measure" => Ok(AcPattern::RelaxStressMeasure),
            "stress-relax-measure" => Ok(AcPattern::StressRelaxMeasure),
            other => {
                Err(format!("unknown AC pattern `{other}` (expected relax-stress-measure or stress-relax-measure)"))
            }
        }
    }
}

impl fmt::Display for AcPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcPattern::RelaxStressMeasure => "relax-stress-measure",
            AcPattern::StressRelaxMeasure => "stress-relax-measure",
        })
    }
}

/// Periodic pulsed stress with duty cycle `duty` at `frequency`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcStressSpec {
    pub v_stress: f64,
    pub v_relax: f64,
    pub frequency: f64,
    pub duty: f64,
    pub pattern: AcPattern,
    pub target_cumulative_stress: f64,
    /// Measurement points on the cumulative-stress axis.
    pub sample_grid: SampleGrid,
}

impl AcStressSpec {
    pub fn new(
        v_stress: f64,
        frequency: f64,
        duty: f64,
        target_cumulative_stress: f64,
        sample_grid: impl Into<SampleGrid>,
    ) -> Self {
        Self {
            v_stress,
            v_relax: 0.0,
            frequency,
            duty,
            pattern: AcPattern::RelaxStressMeasure,
            target_cumulative_stress,
            sample_grid: sample_grid.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(WaveformError::InvalidParameter {
                name: "duty",
                value: self.duty,
                reason: "duty cycle must lie strictly between 0 and 1",
            });
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(WaveformError::InvalidParameter {
                name: "frequency",
                value: self.frequency,
                reason: "frequency must be positive and finite",
            });
        }
        if !(self.target_cumulative_stress > 0.0 && self.target_cumulative_stress.is_finite()) {
            return Err(WaveformError::InvalidParameter {
                name: "target_cumulative_stress",
                value: self.target_cumulative_stress,
                reason: "must be positive and finite",
            });
        }
        self.sample_grid.validate()
    }

    /// Stress portion of one period, `D / f`.
    pub fn t_stress(&self) -> f64 {
        self.duty / self.frequency
    }

    /// Relax portion of one period, `(1 − D) / f`.
    pub fn t_relax(&self) -> f64 {
        (1.0 - self.duty) / self.frequency
    }
}

/// One AC period: two segments applied in order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTemplate {
    pub first: BiasSegment,
    pub second: BiasSegment,
}

impl CycleTemplate {
    pub fn segments(&self) -> [BiasSegment; 2] {
        [self.first, self.second]
    }

    pub fn period(&self) -> f64 {
        self.first.duration + self.second.duration
    }

    pub fn stress_time(&self) -> f64 {
        self.segments().iter().filter(|s| s.phase == Phase::Stress).map(|s| s.duration).sum()
    }

    /// Stress time elapsed `offset` seconds into the period.
    fn stress_time_within(&self, offset: f64) -> f64 {
        let mut left = offset;
        let mut stress = 0.0;
        for seg in self.segments() {
            let dt = left.min(seg.duration).max(0.0);
            if seg.phase == Phase::Stress {
                stress += dt;
            }
            left -= dt;
        }
        stress
    }
}

/// Building block of a [`Waveform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Block {
    /// Stress or relax hold.
    Segment(BiasSegment),
    /// Read pulse; a sample is taken at its start. `label` is the phase of
    /// the experiment the read belongs to.
    Read { segment: BiasSegment, label: Phase },
    /// Instantaneous measurement point.
    Measure { label: Phase },
    /// `count` repetitions of a cycle template.
    Cycles { template: CycleTemplate, count: u64 },
}

impl Block {
    pub fn duration(&self) -> f64 {
        match self {
            Block::Segment(s) | Block::Read { segment: s, .. } => s.duration,
            Block::Measure { .. } => 0.0,
            Block::Cycles { template, count } => *count as f64 * template.period(),
        }
    }

    pub fn stress_time(&self) -> f64 {
        match self {
            Block::Segment(s) if s.phase == Phase::Stress => s.duration,
            Block::Cycles { template, count } => *count as f64 * template.stress_time(),
            _ => 0.0,
        }
    }

    pub fn is_sample(&self) -> bool {
        matches!(self, Block::Read { .. } | Block::Measure { .. })
    }
}

/// Which builder produced a waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaveformKind {
    Dc,
    Ac { frequency: f64, duty: f64 },
    Custom,
}

/// Immutable gate-bias schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    blocks: Vec<Block>,
    kind: WaveformKind,
    descriptor: String,
    total_duration: f64,
    total_stress: f64,
}

impl Waveform {
    pub fn from_blocks(blocks: Vec<Block>, kind: WaveformKind, descriptor: impl Into<String>) -> Self {
        let mut wall = CompensatedSum::new();
        let mut stress = CompensatedSum::new();
        for b in &blocks {
            wall.add(b.duration());
            stress.add(b.stress_time());
        }
        Self { blocks, kind, descriptor: descriptor.into(), total_duration: wall.value(), total_stress: stress.value() }
    }

    /// Zero-duration schedule.
    pub fn empty() -> Self {
        Self::from_blocks(Vec::new(), WaveformKind::Custom, "empty")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    /// Summed stress-phase time over the whole schedule.
    pub fn total_stress_time(&self) -> f64 {
        self.total_stress
    }

    /// Summed read-pulse time over the whole schedule.
    pub fn total_read_time(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for b in &self.blocks {
            if let Block::Read { segment, .. } = b {
                acc.add(segment.duration);
            }
        }
        acc.value()
    }

    pub fn sample_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_sample()).count()
    }

    /// Phase of the last non-read segment, i.e. what the device ends on.
    pub fn final_phase(&self) -> Option<Phase> {
        self.segments().filter(|s| s.phase != Phase::Read).last().map(|s| s.phase)
    }

    /// Lazily expand every block into its bias segments, cycles included.
    ///
    /// Long AC schedules yield an enormous number of items; this is meant for
    /// short schedules and cross-checks.
    pub fn segments(&self) -> impl Iterator<Item = BiasSegment> + '_ {
        self.blocks.iter().flat_map(|b| -> Box<dyn Iterator<Item = BiasSegment> + '_> {
            match b {
                Block::Segment(s) | Block::Read { segment: s, .. } => Box::new(std::iter::once(*s)),
                Block::Measure { .. } => Box::new(std::iter::empty()),
                Block::Cycles { template, count } => Box::new((0..*count).flat_map(move |_| template.segments())),
            }
        })
    }

    /// Stress-phase time accumulated by wall time `t_wall`.
    pub fn cumulative_stress_time(&self, t_wall: f64) -> Result<f64> {
        let slack = 1e-12 * self.total_duration.max(1.0);
        if !(t_wall >= 0.0 && t_wall <= self.total_duration + slack) {
            return Err(WaveformError::TimeOutOfRange { t_wall, total: self.total_duration });
        }
        let mut wall = CompensatedSum::new();
        let mut stress = CompensatedSum::new();
        for b in &self.blocks {
            let start = wall.value();
            let dur = b.duration();
            if t_wall < start + dur {
                let offset = t_wall - start;
                match b {
                    Block::Segment(s) if s.phase == Phase::Stress => stress.add(offset),
                    Block::Cycles { template, count } => {
                        let period = template.period();
                        let whole = ((offset / period).floor() as u64).min(*count);
                        let rem = offset - whole as f64 * period;
                        stress.add(whole as f64 * template.stress_time());
                        stress.add(template.stress_time_within(rem));
                    }
                    _ => {}
                }
                return Ok(stress.value());
            }
            wall.add(dur);
            stress.add(b.stress_time());
        }
        Ok(stress.value())
    }
}

/// Build the DC stress/relax on-the-fly schedule.
///
/// Stress phase: stress holds interleaved with reads at the grid times of
/// cumulative stress, closed by an end-of-stress read. Relax phase: relax
/// holds interleaved with reads at grid times of elapsed relaxation, closed by
/// a final read. The first `read_to_relax_delay` of relaxation cannot be
/// sampled, so grid times inside it are skipped.
pub fn build_dc_waveform(spec: &DcStressSpec) -> Result<Waveform> {
    let pos = |name, value: f64, reason| {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(WaveformError::InvalidParameter { name, value, reason })
        }
    };
    pos("stress_duration", spec.stress_duration, "must be positive")?;
    pos("read_pulse_width", spec.read_pulse_width, "must be positive")?;
    if !(spec.relax_duration >= 0.0 && spec.relax_duration.is_finite()) {
        return Err(WaveformError::InvalidParameter {
            name: "relax_duration",
            value: spec.relax_duration,
            reason: "must be nonnegative",
        });
    }
    let relaxing = spec.relax_duration > 0.0;
    let delay = spec.read_to_relax_delay;
    if !(delay >= 0.0 && delay.is_finite()) {
        return Err(WaveformError::InvalidParameter {
            name: "read_to_relax_delay",
            value: delay,
            reason: "must be nonnegative",
        });
    }
    spec.sample_grid.validate()?;
    let grid = spec.sample_grid.points();
    let limit = spec.stress_duration + spec.relax_duration;
    if let Some(&t) = grid.iter().find(|&&t| t > limit) {
        return Err(WaveformError::GridOutsideSchedule { time: t, limit });
    }

    let read = BiasSegment { duration: spec.read_pulse_width, v_gs: spec.v_read, phase: Phase::Read };
    let stress_seg = |d| BiasSegment { duration: d, v_gs: spec.v_stress, phase: Phase::Stress };
    let relax_seg = |d| BiasSegment { duration: d, v_gs: spec.v_relax, phase: Phase::Relax };
    let mut blocks = Vec::new();

    let mut last = 0.0;
    let stress_reads =
        grid.iter().copied().filter(|&t| t < spec.stress_duration).chain(std::iter::once(spec.stress_duration));
    for t in stress_reads {
        if t > last {
            blocks.push(Block::Segment(stress_seg(t - last)));
            last = t;
        }
        blocks.push(Block::Read { segment: read, label: Phase::Stress });
    }

    if relaxing {
        let mut last = 0.0;
        let relax_reads = grid
            .iter()
            .copied()
            .filter(|&t| t >= delay && t < spec.relax_duration)
            .chain(std::iter::once(spec.relax_duration));
        for t in relax_reads {
            if t > last {
                blocks.push(Block::Segment(relax_seg(t - last)));
                last = t;
            }
            blocks.push(Block::Read { segment: read, label: Phase::Relax });
        }
    }

    let descriptor = format!(
        "dc v_stress={} stress={}s relax={}s read={}s",
        spec.v_stress, spec.stress_duration, spec.relax_duration, spec.read_pulse_width
    );
    Ok(Waveform::from_blocks(blocks, WaveformKind::Dc, descriptor))
}

/// Build an AC pulsed-stress schedule.
///
/// The run covers `round(target / t_stress)` whole periods. Each grid time
/// is snapped to the nearest whole number of periods and a measurement is
/// taken at the end of that period, which is right after the stress portion
/// for [`AcPattern::RelaxStressMeasure`] and right after the relax portion for
/// [`AcPattern::StressRelaxMeasure`]. A final measurement closes the run.
pub fn build_ac_waveform(spec: &AcStressSpec) -> Result<Waveform> {
    spec.validate()?;
    let t_stress = spec.t_stress();
    let t_relax = spec.t_relax();
    let stress = BiasSegment { duration: t_stress, v_gs: spec.v_stress, phase: Phase::Stress };
    let relax = BiasSegment { duration: t_relax, v_gs: spec.v_relax, phase: Phase::Relax };
    let template = match spec.pattern {
        AcPattern::RelaxStressMeasure => CycleTemplate { first: relax, second: stress },
        AcPattern::StressRelaxMeasure => CycleTemplate { first: stress, second: relax },
    };

    let total_cycles = ((spec.target_cumulative_stress / t_stress).round() as u64).max(1);
    let limit = spec.target_cumulative_stress;
    let mut marks = Vec::new();
    for t in spec.sample_grid.points() {
        if t > limit * (1.0 + 1e-12) {
            return Err(WaveformError::GridOutsideSchedule { time: t, limit });
        }
        marks.push(((t / t_stress).round() as u64).clamp(1, total_cycles));
    }
    marks.push(total_cycles);
    marks.dedup();

    let mut blocks = Vec::with_capacity(2 * marks.len());
    let mut done = 0u64;
    for n in marks {
        if n > done {
            blocks.push(Block::Cycles { template, count: n - done });
            done = n;
        }
        blocks.push(Block::Measure { label: Phase::Stress });
    }

    let descriptor = format!(
        "ac v_stress={} f={}Hz duty={} pattern={} cycles={}",
        spec.v_stress, spec.frequency, spec.duty, spec.pattern, total_cycles
    );
    Ok(Waveform::from_blocks(blocks, WaveformKind::Ac { frequency: spec.frequency, duty: spec.duty }, descriptor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(t_min: f64, t_max: f64, ppd: u32) -> LogGrid {
        LogGrid::new(t_min, t_max, ppd).unwrap()
    }

    fn stress_segment_sum(w: &Waveform) -> f64 {
        w.segments().filter(|s| s.phase == Phase::Stress).map(|s| s.duration).sum()
    }

    #[test]
    fn log_grid_hits_decades() {
        assert_eq!(grid(1e-3, 1e3, 1).points(), vec![1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(grid(1.0, 100.0, 10).points().len(), 21);
        assert!(LogGrid::new(0.0, 1.0, 1).is_err());
        assert!(LogGrid::new(1.0, 1.0, 1).is_err());
        assert!(LogGrid::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn dc_stress_read_closes_stress_and_delay_is_relaxation() {
        let mut spec = DcStressSpec::new(-1.2, -0.1, 10.0, 10.0, grid(1e-4, 10.0, 1));
        spec.read_to_relax_delay = 2e-3;
        let w = build_dc_waveform(&spec).unwrap();
        let blocks = w.blocks();
        let first_relax =
            blocks.iter().position(|b| matches!(b, Block::Segment(s) if s.phase == Phase::Relax)).unwrap();
        assert!(matches!(blocks[first_relax - 1], Block::Read { label: Phase::Stress, .. }));
        let stress: f64 = blocks[..first_relax].iter().map(Block::stress_time).sum();
        assert_relative_eq!(stress, 10.0, max_relative = 1e-15);
        // First relax read at 1e-2 s: the 1e-4 and 1e-3 grid points fall inside the delay.
        match &blocks[first_relax] {
            Block::Segment(s) => assert_relative_eq!(s.duration, 1e-2, max_relative = 1e-15),
            b => panic!("{b:?}"),
        }
    }

    #[test]
    fn dc_stress_phase_sums_to_stress_duration() {
        let spec = DcStressSpec::new(-1.2, -0.1, 1000.0, 1000.0, grid(1e-3, 1e3, 1));
        let w = build_dc_waveform(&spec).unwrap();
        assert_relative_eq!(stress_segment_sum(&w), 1000.0, max_relative = 1e-15);
        assert_relative_eq!(w.total_stress_time(), 1000.0, max_relative = 1e-15);
        let relax: f64 = w.segments().filter(|s| s.phase == Phase::Relax).map(|s| s.duration).sum();
        assert_relative_eq!(relax, 1000.0, max_relative = 1e-15);
        assert_relative_eq!(w.total_duration(), 2000.0 + w.total_read_time(), max_relative = 1e-15);
        assert_eq!(w.final_phase(), Some(Phase::Relax));
    }

    #[test]
    fn dc_without_relax_ends_in_stress() {
        let spec = DcStressSpec::new(-1.2, -0.1, 100.0, 0.0, grid(1e-2, 10.0, 1));
        let w = build_dc_waveform(&spec).unwrap();
        assert_eq!(w.final_phase(), Some(Phase::Stress));
        assert!(matches!(w.blocks().last(), Some(Block::Read { label: Phase::Stress, .. })));
    }

    #[test]
    fn dc_read_time_is_excluded_from_stress() {
        // 9 grid reads before the end-of-stress read: 10 reads in total.
        let spec = DcStressSpec::new(-1.2, -0.1, 1e3, 0.0, grid(1e-3, 100.0, 2));
        let w = build_dc_waveform(&spec).unwrap();
        let reads = w.blocks().iter().filter(|b| matches!(b, Block::Read { .. })).count();
        assert_eq!(reads, 12);
        assert_relative_eq!(w.total_read_time(), reads as f64 * 1e-3, max_relative = 1e-14);

        let spec = DcStressSpec::new(-1.2, -0.1, 1e3, 0.0, SampleGrid::Times((1..=9).map(|k| k as f64).collect()));
        let w = build_dc_waveform(&spec).unwrap();
        assert_eq!(w.sample_count(), 10);
        assert_relative_eq!(w.total_read_time(), 1e-2, max_relative = 1e-14);
        assert_relative_eq!(w.total_stress_time(), 1e3, max_relative = 1e-15);
    }

    #[test]
    fn dc_rejects_grid_outside_schedule() {
        let spec = DcStressSpec::new(-1.2, -0.1, 10.0, 10.0, grid(1e-3, 1e3, 1));
        assert!(matches!(build_dc_waveform(&spec), Err(WaveformError::GridOutsideSchedule { .. })));
    }

    #[test]
    fn dc_cumulative_stress_at_end_of_stress() {
        let spec = DcStressSpec::new(-1.2, -0.1, 100.0, 100.0, grid(1e-2, 100.0, 3));
        let w = build_dc_waveform(&spec).unwrap();
        let stress_reads: f64 = {
            // wall time at which the last stress segment ends
            let mut t = 0.0;
            let mut end = 0.0;
            for s in w.segments() {
                t += s.duration;
                if s.phase == Phase::Stress {
                    end = t;
                }
            }
            end
        };
        assert_relative_eq!(w.cumulative_stress_time(stress_reads).unwrap(), 100.0, max_relative = 1e-14);
        assert_relative_eq!(w.cumulative_stress_time(w.total_duration()).unwrap(), 100.0, max_relative = 1e-14);
        assert!(w.cumulative_stress_time(-1.0).is_err());
        assert!(w.cumulative_stress_time(w.total_duration() * 1.01).is_err());
    }

    #[test]
    fn ac_cycle_arithmetic() {
        let spec = AcStressSpec::new(-1.2, 10e6, 0.2, 1.0, grid(1e-3, 1.0, 1));
        assert_relative_eq!(spec.t_stress() + spec.t_relax(), 100e-9, max_relative = 1e-15);
        assert_relative_eq!(spec.t_stress(), 20e-9, max_relative = 1e-15);
        assert_relative_eq!(spec.t_relax(), 80e-9, max_relative = 1e-15);
        assert_relative_eq!(spec.t_stress() / spec.t_relax(), 0.2 / 0.8, max_relative = 1e-15);

        let half = AcStressSpec::new(-1.2, 3.7e4, 0.5, 1.0, grid(1e-3, 1.0, 1));
        assert_eq!(half.t_stress(), half.t_relax());
    }

    #[test]
    fn ac_whole_cycle_count() {
        let spec = AcStressSpec::new(-1.2, 1e3, 0.5, 1.0, grid(1e-3, 1.0, 1));
        let w = build_ac_waveform(&spec).unwrap();
        let cycles: u64 = w.blocks().iter().map(|b| if let Block::Cycles { count, .. } = b { *count } else { 0 }).sum();
        assert_eq!(cycles, 2000);
        assert_relative_eq!(w.total_stress_time(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(w.total_duration(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn ac_cumulative_stress_examples() {
        let half = build_ac_waveform(&AcStressSpec::new(-1.2, 1e3, 0.5, 1.0, grid(1e-3, 1.0, 1))).unwrap();
        assert_relative_eq!(half.cumulative_stress_time(2.0).unwrap(), 1.0, max_relative = 1e-12);

        let fifth = build_ac_waveform(&AcStressSpec::new(-1.2, 1e3, 0.2, 1.0, grid(1e-3, 1.0, 1))).unwrap();
        assert_relative_eq!(fifth.cumulative_stress_time(1e-3).unwrap(), 0.2e-3, max_relative = 1e-12);
        // mid-cycle: relax portion first, so half a period in gives no stress yet
        assert_eq!(fifth.cumulative_stress_time(0.4e-3).unwrap(), 0.0);
    }

    #[test]
    fn ac_rejects_bad_parameters() {
        for duty in [0.0, 1.0, -0.1, 1.5] {
            let spec = AcStressSpec::new(-1.2, 1e3, duty, 1.0, grid(1e-3, 1.0, 1));
            assert!(matches!(build_ac_waveform(&spec), Err(WaveformError::InvalidParameter { name: "duty", .. })));
        }
        for f in [0.0, -1.0] {
            let spec = AcStressSpec::new(-1.2, f, 0.5, 1.0, grid(1e-3, 1.0, 1));
            assert!(matches!(build_ac_waveform(&spec), Err(WaveformError::InvalidParameter { name: "frequency", .. })));
        }
        let spec = AcStressSpec::new(-1.2, 1e3, 0.5, 1.0, grid(1e-3, 10.0, 1));
        assert!(matches!(build_ac_waveform(&spec), Err(WaveformError::GridOutsideSchedule { .. })));
    }

    #[test]
    fn ac_is_compact_at_high_frequency() {
        let spec = AcStressSpec::new(-1.2, 10e6, 0.2, 1e3, grid(1e-3, 1e3, 10));
        let w = build_ac_waveform(&spec).unwrap();
        assert!(w.blocks().len() < 200);
        assert_relative_eq!(w.total_stress_time(), 1e3, max_relative = 1e-12);
        assert_relative_eq!(w.total_duration(), 5e3, max_relative = 1e-12);
    }

    #[test]
    fn pattern_swap_preserves_cycle_times() {
        let mut spec = AcStressSpec::new(-1.2, 2.5e5, 0.3, 0.1, grid(1e-3, 0.1, 2));
        let a = build_ac_waveform(&spec).unwrap();
        spec.pattern = AcPattern::StressRelaxMeasure;
        let b = build_ac_waveform(&spec).unwrap();
        let tmpl = |w: &Waveform| {
            w.blocks()
                .iter()
                .find_map(|b| if let Block::Cycles { template, .. } = b { Some(*template) } else { None })
                .unwrap()
        };
        let (ta, tb) = (tmpl(&a), tmpl(&b));
        assert_eq!(ta.first, tb.second);
        assert_eq!(ta.second, tb.first);
        assert_eq!(a.total_stress_time(), b.total_stress_time());
    }

    #[test]
    fn empty_waveform() {
        let w = Waveform::empty();
        assert_eq!(w.total_duration(), 0.0);
        assert_eq!(w.cumulative_stress_time(0.0).unwrap(), 0.0);
    }
}
