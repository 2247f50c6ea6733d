//! Time-domain simulation of the oscillator as a hybrid system:
//! continuous memristance drift punctuated by discrete latch edges.
//!
//! The integrator exploits the model's structure instead of fighting
//! it. Within one latch configuration the drive rail is constant, so a
//! step absorbs a known slug of volt-seconds and the resistance update
//! is exact for that drive; a midpoint correction accounts for the
//! divider reshaping the drive as the resistance moves. Latch edges
//! are then pinned by bisection on the one-step map, so event times
//! are located to `crossing_tol` rather than to the step size.
//!
//! Time bookkeeping rule: segment boundaries (trigger edges, the final
//! time) are **assigned**, never accumulated, so a boundary time in
//! the trace equals the scheduled time bit for bit, and the stable
//! phase never touches the resistance at all.

use std::fmt;
use std::io;

use serde::Serialize;

use crate::analysis::pulse_widths;
use crate::circuit::{divider_voltage, step_discrete, trigger, CircuitParams, DigitalState, Phase};
use crate::error::Error;
use crate::memristor::{mobility_constant, resistance_after, MemristorParams, MobilityConstant};

/// One active-high trigger pulse: asserted on `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerPulse {
    pub start: f64,
    pub width: f64,
}

impl TriggerPulse {
    fn end(&self) -> f64 {
        self.start + self.width
    }
}

/// A validated, time-ordered, non-overlapping set of trigger pulses.
/// Touching pulses (one ends exactly where the next starts) are
/// allowed and behave as release-then-retrigger at that instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSchedule {
    pulses: Vec<TriggerPulse>,
}

impl TriggerSchedule {
    /// No triggers at all; the circuit just sits in its rest state.
    pub fn none() -> Self {
        Self { pulses: Vec::new() }
    }

    /// A single pulse.
    pub fn single(start: f64, width: f64) -> Result<Self, Error> {
        Self::new(vec![TriggerPulse { start, width }])
    }

    /// Builds a schedule from arbitrary pulses, sorting them by start
    /// time and rejecting negative starts, non-positive widths, and
    /// overlaps.
    pub fn new(mut pulses: Vec<TriggerPulse>) -> Result<Self, Error> {
        for p in &pulses {
            if !p.start.is_finite() || p.start < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "trigger start must be finite and non-negative (got {})",
                    p.start
                )));
            }
            if !p.width.is_finite() || !(p.width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "trigger width must be finite and positive (got {})",
                    p.width
                )));
            }
        }
        pulses.sort_by(|a, b| a.start.partial_cmp(&b.start).expect("starts are finite"));
        for pair in pulses.windows(2) {
            if pair[0].end() > pair[1].start {
                return Err(Error::InvalidParameter(format!(
                    "trigger pulses overlap: one runs to {} while the next starts at {}",
                    pair[0].end(),
                    pair[1].start
                )));
            }
        }
        Ok(Self { pulses })
    }

    pub fn pulses(&self) -> &[TriggerPulse] {
        &self.pulses
    }
}

/// Step size, horizon, and recording knobs for one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Nominal integration step, seconds.
    pub dt: f64,
    /// Simulation horizon, seconds.
    pub t_end: f64,
    /// Width to which a comparator crossing is located in time.
    pub crossing_tol: f64,
    /// Record every n-th step; samples at events and boundaries are
    /// always kept.
    pub record_stride: usize,
}

impl SimConfig {
    /// Defaults good for second-scale designs: 0.1 ms steps,
    /// nanosecond event location, every tenth step recorded.
    pub fn new(t_end: f64) -> Self {
        Self {
            dt: 1e-4,
            t_end,
            crossing_tol: 1e-9,
            record_stride: 10,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.t_end.is_finite() || !(self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive and finite (got {})",
                self.t_end
            )));
        }
        if !self.dt.is_finite() || !(self.dt > 0.0) || self.dt > self.t_end {
            return Err(Error::InvalidParameter(format!(
                "dt must satisfy 0 < dt <= t_end (got dt {} with t_end {})",
                self.dt, self.t_end
            )));
        }
        if !self.crossing_tol.is_finite()
            || !(self.crossing_tol > 0.0)
            || self.crossing_tol > self.dt
        {
            return Err(Error::InvalidParameter(format!(
                "crossing_tol must satisfy 0 < crossing_tol <= dt (got {})",
                self.crossing_tol
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter(
                "record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded point of the run. Values are post-transition: a sample
/// on a latch edge shows the node voltage after the rails switched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub r_m: f64,
    pub v_m: f64,
    pub v_o1: f64,
    pub v_o2: f64,
    /// Whether the trigger input was asserted at this instant.
    pub trigger: bool,
}

/// The discrete happenings worth indexing a trace by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// A trigger pulse was asserted (recorded even if the latches were
    /// already set).
    TriggerSet,
    /// The first latch fell: end of the charge phase and of the first
    /// output's pulse.
    FF1Reset,
    /// The second latch fell: end of the cycle and of the second
    /// output's pulse.
    FF2Reset,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::TriggerSet => "TriggerSet",
            EventKind::FF1Reset => "FF1Reset",
            EventKind::FF2Reset => "FF2Reset",
        })
    }
}

/// A discrete event with the memristance at the moment it fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: EventKind,
    pub r_m: f64,
}

/// Everything one simulation run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Strictly increasing in time; first sample at t = 0, last at
    /// t = t_end.
    pub samples: Vec<TraceSample>,
    /// Time-ordered discrete events.
    pub events: Vec<TraceEvent>,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

impl Trace {
    /// Writes the samples as CSV with header
    /// `t,r_m,v_m,v_o1,v_o2,trigger`.
    pub fn write_samples_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,r_m,v_m,v_o1,v_o2,trigger")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(s.t),
                fmt_f64(s.r_m),
                fmt_f64(s.v_m),
                fmt_f64(s.v_o1),
                fmt_f64(s.v_o2),
                s.trigger
            )?;
        }
        Ok(())
    }

    /// Writes the events as CSV with header `t,kind,r_m`.
    pub fn write_events_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,kind,r_m")?;
        for e in &self.events {
            writeln!(w, "{},{},{}", fmt_f64(e.t), e.kind, fmt_f64(e.r_m))?;
        }
        Ok(())
    }
}

/// One output pulse reconstructed from the event stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub start: f64,
    pub width: f64,
    /// True when the run ended before the pulse closed; `width` then
    /// runs to the end of the trace.
    pub truncated: bool,
}

/// Measured pulse trains of the two outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseMeasurements {
    pub o1_pulses: Vec<Pulse>,
    pub o2_pulses: Vec<Pulse>,
}

/// The integrator. Owns the mutable run state; `simulate` drives it
/// segment by segment between trigger edges.
struct Engine<'a> {
    m: &'a MemristorParams,
    c: &'a CircuitParams,
    cfg: &'a SimConfig,
    k: MobilityConstant,
    t: f64,
    r: f64,
    state: DigitalState,
    held: bool,
    steps_since_record: usize,
    samples: Vec<TraceSample>,
    events: Vec<TraceEvent>,
}

impl<'a> Engine<'a> {
    fn new(
        m: &'a MemristorParams,
        c: &'a CircuitParams,
        cfg: &'a SimConfig,
        k: MobilityConstant,
    ) -> Self {
        let state = DigitalState::stable().with_comparators(c.v_bias, c);
        Self {
            m,
            c,
            cfg,
            k,
            t: 0.0,
            r: m.r_init,
            state,
            held: false,
            steps_since_record: 0,
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    fn rail(&self, latch_high: bool) -> f64 {
        if latch_high {
            self.c.v_oh
        } else {
            self.c.v_ol
        }
    }

    /// Appends a sample for the current instant, replacing the last
    /// one when it carries the same timestamp (a boundary sample
    /// documents the post-transition state).
    fn push_sample(&mut self) {
        let s = TraceSample {
            t: self.t,
            r_m: self.r,
            v_m: divider_voltage(self.r, self.c, self.state),
            v_o1: self.rail(self.state.ff1_high),
            v_o2: self.rail(self.state.ff2_high),
            trigger: self.held,
        };
        self.steps_since_record = 0;
        if let Some(last) = self.samples.last_mut() {
            if last.t == s.t {
                *last = s;
                return;
            }
        }
        self.samples.push(s);
    }

    fn tick_record(&mut self) {
        self.steps_since_record += 1;
        if self.steps_since_record >= self.cfg.record_stride {
            self.push_sample();
        }
    }

    /// One-step resistance map over an interval `h`: exact volt-second
    /// update using the drive at a midpoint resistance predicted by a
    /// first exact sub-update. Second-order accurate in `h` against
    /// the divider's reshaping of the drive.
    fn advance(&self, h: f64) -> f64 {
        let dv1 = divider_voltage(self.r, self.c, self.state) - self.c.v_bias;
        let r1 = resistance_after(self.r, dv1 * h, self.k, self.m);
        let r_mid = 0.5 * (self.r + r1);
        let dv2 = divider_voltage(r_mid, self.c, self.state) - self.c.v_bias;
        resistance_after(self.r, dv2 * h, self.k, self.m)
    }

    /// Lets the latches react to the current node voltage until the
    /// state stops changing, recording reset events. The chain is
    /// short (a latch can only fall once per phase), so failure to
    /// settle in a few rounds is a logic bug, not a tuning problem.
    fn settle(&mut self) -> Result<(), Error> {
        for _ in 0..8 {
            let v = divider_voltage(self.r, self.c, self.state);
            let next = step_discrete(self.state, v, self.held, self.c);
            if next == self.state {
                return Ok(());
            }
            if self.state.ff1_high && !next.ff1_high {
                self.events.push(TraceEvent {
                    t: self.t,
                    kind: EventKind::FF1Reset,
                    r_m: self.r,
                });
            }
            if self.state.ff2_high && !next.ff2_high {
                self.events.push(TraceEvent {
                    t: self.t,
                    kind: EventKind::FF2Reset,
                    r_m: self.r,
                });
            }
            self.state = next;
        }
        Err(Error::Internal("latch cascade failed to settle".into()))
    }

    /// Processes one trigger edge at the current (exact) time.
    fn apply_cut(&mut self, is_start: bool) -> Result<(), Error> {
        if is_start {
            self.held = true;
            self.events.push(TraceEvent {
                t: self.t,
                kind: EventKind::TriggerSet,
                r_m: self.r,
            });
            self.state = trigger(self.state);
            self.settle()?;
        } else {
            self.held = false;
            // A threshold crossed while the trigger was held resets
            // its latch here, at the release instant.
            self.settle()?;
        }
        self.push_sample();
        Ok(())
    }

    /// Finds `tau` in `(0, h]` at which the one-step map first carries
    /// the node voltage onto `theta`, to within `crossing_tol`.
    /// Returns the upper endpoint, so the resistance advanced by the
    /// result is guaranteed to sit at or past the threshold.
    fn locate_crossing(&self, theta: f64, h: f64) -> Result<f64, Error> {
        let mut lo = 0.0f64;
        let mut hi = h;
        for _ in 0..200 {
            if hi - lo <= self.cfg.crossing_tol {
                return Ok(hi);
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                // Interval exhausted the float grid before reaching
                // the tolerance; hi is as sharp as it gets.
                return Ok(hi);
            }
            let v = divider_voltage(self.advance(mid), self.c, self.state);
            if v >= theta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::Internal(
            "crossing bisection failed to converge".into(),
        ))
    }

    /// Integrates from the current time to `seg_end` (a trigger edge
    /// or the horizon), handling comparator crossings on the way.
    fn run_segment(&mut self, seg_end: f64) -> Result<(), Error> {
        while self.t < seg_end {
            let (h, t_next) = if seg_end - self.t <= self.cfg.dt {
                (seg_end - self.t, seg_end)
            } else {
                (self.cfg.dt, self.t + self.cfg.dt)
            };

            // Gate off: the cell floats at the bias, nothing moves.
            // Skipping the update entirely keeps the resistance
            // bit-identical across the whole stable span.
            if matches!(self.state.phase(), Phase::Stable) {
                self.t = t_next;
                self.tick_record();
                continue;
            }

            let r_next = self.advance(h);
            let v_now = divider_voltage(self.r, self.c, self.state);
            let v_next = divider_voltage(r_next, self.c, self.state);

            // The node rises toward the phase's threshold in both
            // active phases, so only upward crossings occur; with
            // v_n < v_p the smaller threshold is reached first.
            let crossed = [self.c.v_n, self.c.v_p]
                .into_iter()
                .find(|&theta| v_now < theta && v_next >= theta);

            if let Some(theta) = crossed {
                let tau = self.locate_crossing(theta, h)?;
                self.r = self.advance(tau);
                self.t += tau;
                self.settle()?;
                self.push_sample();
                continue;
            }

            self.r = r_next;
            self.t = t_next;
            self.tick_record();
        }
        Ok(())
    }
}

/// Runs the oscillator from its rest state at `r_init` through the
/// trigger schedule, out to `cfg.t_end`.
pub fn simulate(
    m: &MemristorParams,
    c: &CircuitParams,
    schedule: &TriggerSchedule,
    cfg: &SimConfig,
) -> Result<Trace, Error> {
    m.validate()?;
    c.validate()?;
    cfg.validate()?;
    let k = mobility_constant(m)?;

    // Trigger edges, time-ordered, release before assert at a shared
    // instant so touching pulses release-then-retrigger. Edges beyond
    // the horizon never happen.
    let mut cuts: Vec<(f64, bool)> = Vec::new();
    for p in schedule.pulses() {
        if p.start <= cfg.t_end {
            cuts.push((p.start, true));
        }
        if p.end() <= cfg.t_end {
            cuts.push((p.end(), false));
        }
    }
    cuts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("edge times are finite")
            .then(a.1.cmp(&b.1))
    });

    let mut eng = Engine::new(m, c, cfg, k);
    eng.push_sample();

    let mut next_cut = 0;
    while next_cut < cuts.len() && cuts[next_cut].0 == eng.t {
        eng.apply_cut(cuts[next_cut].1)?;
        next_cut += 1;
    }
    while eng.t < cfg.t_end {
        let seg_end = if next_cut < cuts.len() {
            cuts[next_cut].0
        } else {
            cfg.t_end
        };
        eng.run_segment(seg_end)?;
        while next_cut < cuts.len() && cuts[next_cut].0 == eng.t {
            eng.apply_cut(cuts[next_cut].1)?;
            next_cut += 1;
        }
    }
    eng.push_sample();

    Ok(Trace {
        samples: eng.samples,
        events: eng.events,
    })
}

/// Reconstructs the two output pulse trains from a trace's event
/// stream. A pulse opens when a trigger finds its latch low and closes
/// at the latch's reset; a pulse still open at the end of the trace is
/// reported with `truncated: true`.
pub fn measure_pulses(trace: &Trace) -> PulseMeasurements {
    let t_end = trace.samples.last().map_or(0.0, |s| s.t);
    let mut o1_pulses = Vec::new();
    let mut o2_pulses = Vec::new();
    let mut o1_open: Option<f64> = None;
    let mut o2_open: Option<f64> = None;
    for e in &trace.events {
        match e.kind {
            EventKind::TriggerSet => {
                o1_open.get_or_insert(e.t);
                o2_open.get_or_insert(e.t);
            }
            EventKind::FF1Reset => {
                if let Some(start) = o1_open.take() {
                    o1_pulses.push(Pulse {
                        start,
                        width: e.t - start,
                        truncated: false,
                    });
                }
            }
            EventKind::FF2Reset => {
                if let Some(start) = o2_open.take() {
                    o2_pulses.push(Pulse {
                        start,
                        width: e.t - start,
                        truncated: false,
                    });
                }
            }
        }
    }
    if let Some(start) = o1_open {
        o1_pulses.push(Pulse {
            start,
            width: t_end - start,
            truncated: true,
        });
    }
    if let Some(start) = o2_open {
        o2_pulses.push(Pulse {
            start,
            width: t_end - start,
            truncated: true,
        });
    }
    PulseMeasurements {
        o1_pulses,
        o2_pulses,
    }
}

/// One step-size point of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub dt: f64,
    /// Simulated first-output pulse width at this step size.
    pub t_o1: f64,
    /// Relative deviation from the closed-form width.
    pub rel_error: f64,
}

/// Result of a step-size refinement study against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of log error against log step, over the
    /// points whose error sits above the event-location floor. `None`
    /// when fewer than two points qualify.
    pub observed_order: Option<f64>,
}

/// Simulates the given trigger schedule at each step size in `dts`
/// (which must be strictly decreasing) and compares the measured
/// first-output pulse width against the closed form.
///
/// The schedule needs at least one pulse and its first pulse should be
/// narrow compared to the expected output width, or the held-trigger
/// stretch will dominate what is being measured.
pub fn convergence_check(
    m: &MemristorParams,
    c: &CircuitParams,
    trig: &TriggerSchedule,
    dts: &[f64],
) -> Result<ConvergenceReport, Error> {
    if dts.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one step size".into(),
        ));
    }
    for pair in dts.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidParameter(
                "step sizes must be strictly decreasing".into(),
            ));
        }
    }
    if !dts.iter().all(|d| d.is_finite() && *d > 0.0) {
        return Err(Error::InvalidParameter(
            "step sizes must be positive and finite".into(),
        ));
    }

    let widths = pulse_widths(m, c)?;
    if !(widths.t_o1_first > 0.0) {
        return Err(Error::InvalidParameter(
            "the initial resistance already sits at the charge target; \
             there is no first pulse to converge on"
                .into(),
        ));
    }
    let first = trig.pulses().first().ok_or_else(|| {
        Error::InvalidParameter("the trigger schedule must contain at least one pulse".into())
    })?;
    let t_end = first.start + first.width.max(widths.t_o1_first) + 0.6 * widths.t_o1_first;

    let mut points = Vec::with_capacity(dts.len());
    for &dt in dts {
        let cfg = SimConfig {
            dt,
            t_end,
            crossing_tol: dt.min(1e-9),
            record_stride: 1_000_000,
        };
        let trace = simulate(m, c, trig, &cfg)?;
        let measured = measure_pulses(&trace);
        let pulse = measured
            .o1_pulses
            .first()
            .filter(|p| !p.truncated)
            .copied()
            .ok_or_else(|| {
                Error::Internal("refinement run produced no complete first-output pulse".into())
            })?;
        points.push(ConvergencePoint {
            dt,
            t_o1: pulse.width,
            rel_error: (pulse.width - widths.t_o1_first).abs() / widths.t_o1_first,
        });
    }

    // Event location is good to about crossing_tol; errors at that
    // floor say nothing about the integrator's order.
    let floor = 1e-12;
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.rel_error > floor)
        .map(|p| (p.dt.ln(), p.rel_error.ln()))
        .collect();
    let observed_order = if fit.len() >= 2 {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if den > 0.0 {
            Some(num / den)
        } else {
            None
        }
    } else {
        None
    };

    Ok(ConvergenceReport {
        points,
        observed_order,
    })
}
