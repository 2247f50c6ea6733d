//! Canned experiments: the reference design and its expected numbers,
//! a series-resistance sweep that quantifies transmission-gate
//! loading, and trigger-timing scenarios (early retrigger, held
//! trigger) that exercise the latch logic off the happy path.

use std::io;

use serde::Serialize;

use crate::analysis::{
    analyze, equilibrium_resistances, transition_time, validate_design, AnalysisReport,
};
use crate::circuit::CircuitParams;
use crate::error::Error;
use crate::memristor::{mobility_constant, MemristorParams};
use crate::transient::{
    measure_pulses, simulate, PulseMeasurements, SimConfig, Trace, TriggerPulse, TriggerSchedule,
};

/// When the reference trigger fires, seconds.
pub const NOMINAL_TRIGGER_START: f64 = 0.1;
/// How long the reference trigger stays asserted, seconds.
pub const NOMINAL_TRIGGER_WIDTH: f64 = 0.01;

/// Transmission-gate on-resistance used by the loaded arm of the
/// default sweep. Chosen so the loading error across the default
/// `r_a` grid straddles the low single-digit percents: the error is
/// `(1 + r_trans/r_a)^2 - 1`, and 41 ohm puts the grid's median at
/// about 2 percent.
pub const CALIBRATED_R_TRANS: f64 = 41.0;

/// The reference circuit: 8 kohm series resistor, 0 V / 1 V rails,
/// 0.5 V bias, thresholds at 0.8 V and 0.3 V, ideal gate.
pub fn nominal_circuit() -> CircuitParams {
    CircuitParams {
        r_a: 8_000.0,
        r_trans_on: 0.0,
        v_p: 0.8,
        v_n: 0.3,
        v_bias: 0.5,
        v_ol: 0.0,
        v_oh: 1.0,
    }
}

/// The reference device: 100 ohm to 38 kohm, 10 nm thick, mobility
/// 1e-14 m^2/(V s), parked at the discharge equilibrium so the first
/// triggered pulse already has the steady-state width.
pub fn nominal_memristor() -> MemristorParams {
    let (_, r_mn) =
        equilibrium_resistances(&nominal_circuit()).expect("the reference circuit is well-formed");
    MemristorParams {
        r_on: 100.0,
        r_off: 38_000.0,
        d: 1e-8,
        mu_v: 1e-14,
        r_init: r_mn,
    }
}

/// The reference device and circuit as a pair.
pub fn nominal_params() -> (MemristorParams, CircuitParams) {
    (nominal_memristor(), nominal_circuit())
}

/// One trigger pulse at 0.1 s, 10 ms wide.
pub fn nominal_schedule() -> TriggerSchedule {
    TriggerSchedule::single(NOMINAL_TRIGGER_START, NOMINAL_TRIGGER_WIDTH)
        .expect("the reference schedule is well-formed")
}

/// Two seconds of simulated time at the default step and tolerances;
/// enough for the full reference cycle plus margin on both sides.
pub fn nominal_sim_config() -> SimConfig {
    SimConfig::new(2.0)
}

/// Analyzes and simulates the reference design with its single
/// reference trigger.
pub fn run_nominal() -> Result<(AnalysisReport, Trace, PulseMeasurements), Error> {
    let (m, c) = nominal_params();
    let report = analyze(&m, &c)?;
    let trace = simulate(&m, &c, &nominal_schedule(), &nominal_sim_config())?;
    let measured = measure_pulses(&trace);
    Ok((report, trace, measured))
}

/// The circuit the default sweep perturbs: reference rails and bias
/// with wider thresholds (0.9 V and 0.4 V), which keep the whole
/// default `r_a` grid feasible.
pub fn sweep_circuit() -> CircuitParams {
    CircuitParams {
        v_p: 0.9,
        v_n: 0.4,
        ..nominal_circuit()
    }
}

/// What to sweep: currently only the series resistance `r_a`, on an
/// even grid, once per transmission-gate resistance in
/// `r_trans_values`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Name of the swept parameter; `"r_a"` is the only one supported.
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
    /// Gate resistances to repeat the grid with; `0.0` is the ideal
    /// gate.
    pub r_trans_values: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.parameter != "r_a" {
            return Err(Error::InvalidParameter(format!(
                "only the series resistance r_a can be swept (got {:?})",
                self.parameter
            )));
        }
        if !self.from.is_finite() || !(self.from > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sweep start must be positive and finite (got {})",
                self.from
            )));
        }
        if !self.to.is_finite() || !(self.to > self.from) {
            return Err(Error::InvalidParameter(format!(
                "sweep end must be finite and greater than the start (got {})",
                self.to
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "a sweep needs at least 2 grid points (got {})",
                self.steps
            )));
        }
        if self.r_trans_values.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one gate resistance (use 0.0 for an ideal gate)".into(),
            ));
        }
        for &rt in &self.r_trans_values {
            if !rt.is_finite() || rt < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gate resistance must be finite and non-negative (got {rt})"
                )));
            }
        }
        Ok(())
    }
}

/// The default sweep: 600 to 7600 ohm in 15 points, once with an
/// ideal gate and once with the calibrated gate resistance.
pub fn sweep_defaults() -> SweepSpec {
    SweepSpec {
        parameter: "r_a".into(),
        from: 600.0,
        to: 7_600.0,
        steps: 15,
        r_trans_values: vec![0.0, CALIBRATED_R_TRANS],
    }
}

/// One grid point of a sweep. Timing cells are `None` when the point
/// is infeasible (design rules broken, or the loaded equilibria leave
/// the device's resistance window).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub r_a: f64,
    pub r_trans: f64,
    /// Closed-form first-output width for the ideal gate.
    pub t_o1_analytic: Option<f64>,
    /// Steady-state first-output width the loaded circuit actually
    /// produces.
    pub t_o1_simulated: Option<f64>,
    /// |simulated - analytic| / analytic.
    pub rel_error: Option<f64>,
    pub feasible: bool,
}

fn sweep_point(
    m: &MemristorParams,
    c_base: &CircuitParams,
    r_a: f64,
    r_trans: f64,
) -> Result<SweepRow, Error> {
    let infeasible = SweepRow {
        r_a,
        r_trans,
        t_o1_analytic: None,
        t_o1_simulated: None,
        rel_error: None,
        feasible: false,
    };
    let c = CircuitParams {
        r_a,
        r_trans_on: r_trans,
        ..*c_base
    };
    if c.validate().is_err() {
        return Ok(infeasible);
    }
    let (r_mp, r_mn) = equilibrium_resistances(&c)?;
    // The gate divides with r_a, scaling both equilibria; simulate
    // from the loaded discharge equilibrium so the measured pulse is
    // the steady-state one rather than a power-up transient.
    let load = 1.0 + r_trans / r_a;
    let r_start = load * r_mn;
    if !(r_start > m.r_on && load * r_mp < m.r_off) {
        return Ok(infeasible);
    }
    let m_i = MemristorParams {
        r_init: r_start,
        ..*m
    };
    if m_i.validate().is_err() || !validate_design(&m_i, &c)?.is_empty() {
        return Ok(infeasible);
    }

    let k = mobility_constant(&m_i)?;
    let analytic = transition_time(r_mn, r_mp, c.v_oh - c.v_bias, r_a, k)?;
    let dt = (analytic * 1e-4).min(1e-4);
    let start = 1e-3;
    let schedule = TriggerSchedule::single(start, (0.1 * analytic).min(1e-3))?;
    let cfg = SimConfig {
        dt,
        t_end: start + 1.35 * load * load * analytic + 10.0 * dt,
        crossing_tol: dt.min(1e-9),
        record_stride: 1_000_000,
    };
    let trace = simulate(&m_i, &c, &schedule, &cfg)?;
    let measured = measure_pulses(&trace);
    let pulse = measured
        .o1_pulses
        .first()
        .filter(|p| !p.truncated)
        .ok_or_else(|| {
            Error::Internal(format!(
                "sweep point r_a = {r_a}, r_trans = {r_trans} produced no complete pulse"
            ))
        })?;
    Ok(SweepRow {
        r_a,
        r_trans,
        t_o1_analytic: Some(analytic),
        t_o1_simulated: Some(pulse.width),
        rel_error: Some((pulse.width - analytic).abs() / analytic),
        feasible: true,
    })
}

/// Runs the reference sweep: the nominal memristor and the wide-window
/// sweep thresholds, over the grid described by `spec`.
pub fn sweep_ra(spec: &SweepSpec) -> Result<Vec<SweepRow>, Error> {
    sweep_ra_with(&nominal_memristor(), &sweep_circuit(), spec)
}

/// Runs a sweep over an arbitrary base design: for every grid point
/// and gate resistance, predicts the ideal-gate width in closed form,
/// simulates the loaded circuit to steady state, and reports the
/// relative gap. Row order is grid point first, then gate resistance
/// in the order given.
pub fn sweep_ra_with(
    m: &MemristorParams,
    c: &CircuitParams,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>, Error> {
    spec.validate()?;
    m.validate()?;
    let mut rows = Vec::with_capacity(spec.steps * spec.r_trans_values.len());
    for i in 0..spec.steps {
        let frac = i as f64 / (spec.steps - 1) as f64;
        let r_a = spec.from + frac * (spec.to - spec.from);
        for &rt in &spec.r_trans_values {
            rows.push(sweep_point(m, c, r_a, rt)?);
        }
    }
    Ok(rows)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.8e}")).unwrap_or_default()
}

/// Writes sweep rows as CSV with header
/// `r_a,r_trans,t_o1_analytic,t_o1_simulated,rel_error,feasible`;
/// infeasible rows leave their timing cells empty.
pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "r_a,r_trans,t_o1_analytic,t_o1_simulated,rel_error,feasible"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.8e},{:.8e},{},{},{},{}",
            r.r_a,
            r.r_trans,
            fmt_opt(r.t_o1_analytic),
            fmt_opt(r.t_o1_simulated),
            fmt_opt(r.rel_error),
            r.feasible
        )?;
    }
    Ok(())
}

/// A named trigger-timing scenario with its trace and measurements.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub trace: Trace,
    pub measurements: PulseMeasurements,
}

/// The clean cycle and the two trigger-timing violations, each run on
/// the reference design:
///
/// * `nominal`: one clean trigger, one clean cycle.
/// * `retrigger-early`: a second trigger halfway through the
///   discharge phase restarts the charge phase from partway down, so
///   the second first-output pulse is short.
/// * `held-trigger`: the trigger stays asserted past the natural end
///   of the charge phase; the first output tracks the trigger width
///   and the discharge starts overgrown.
pub fn violation_scenarios() -> Result<Vec<Scenario>, Error> {
    let (m, c) = nominal_params();
    let report = analyze(&m, &c)?;
    let t_l = report.t_l;
    let retrigger_at = NOMINAL_TRIGGER_START + report.t_o1 + 0.5 * t_l;

    let schedules = [
        ("nominal", nominal_schedule()),
        (
            "retrigger-early",
            TriggerSchedule::new(vec![
                TriggerPulse {
                    start: NOMINAL_TRIGGER_START,
                    width: NOMINAL_TRIGGER_WIDTH,
                },
                TriggerPulse {
                    start: retrigger_at,
                    width: NOMINAL_TRIGGER_WIDTH,
                },
            ])?,
        ),
        (
            "held-trigger",
            TriggerSchedule::single(NOMINAL_TRIGGER_START, 0.8)?,
        ),
    ];

    let cfg = nominal_sim_config();
    let mut scenarios = Vec::with_capacity(schedules.len());
    for (name, schedule) in schedules {
        let trace = simulate(&m, &c, &schedule, &cfg)?;
        let measurements = measure_pulses(&trace);
        scenarios.push(Scenario {
            name,
            trace,
            measurements,
        });
    }
    Ok(scenarios)
}

/// One line of the reference scorecard. For value checks `expected`
/// is the reference value; for the two sweep aggregates it
/// is the acceptance bound (a maximum, and the center of the accepted
/// band, respectively).
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub pass: bool,
}

fn rel_check(name: &str, expected: f64, computed: f64, tol: f64) -> CheckRow {
    let pass = computed.is_finite() && (computed - expected).abs() <= tol * expected.abs();
    CheckRow {
        name: name.into(),
        expected,
        computed,
        pass,
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Scores an analysis report, the measured reference pulses, and a
/// default-shaped sweep against the built-in reference values.
/// Every row must pass for a faithful implementation.
pub fn reference_checks(
    report: &AnalysisReport,
    measured: &PulseMeasurements,
    sweep: &[SweepRow],
) -> Vec<CheckRow> {
    let o1 = measured
        .o1_pulses
        .first()
        .filter(|p| !p.truncated)
        .map_or(f64::NAN, |p| p.width);
    let o2 = measured
        .o2_pulses
        .first()
        .filter(|p| !p.truncated)
        .map_or(f64::NAN, |p| p.width);

    let exact_max = sweep
        .iter()
        .filter(|r| r.feasible && r.r_trans == 0.0)
        .filter_map(|r| r.rel_error)
        .fold(f64::NAN, f64::max);
    let loaded_median = median(
        sweep
            .iter()
            .filter(|r| r.feasible && r.r_trans > 0.0)
            .filter_map(|r| r.rel_error)
            .collect(),
    );

    let mut checks = vec![
        rel_check("k", 3.79e8, report.k, 1e-6),
        rel_check("r_mp", 12_000.0, report.r_mp, 0.01),
        rel_check("r_mn", 5_300.0, report.r_mn, 0.01),
        rel_check("v_p_prime", 0.7, report.v_p_prime, 1e-9),
        rel_check("v_n_prime", 0.2, report.v_n_prime, 1e-9),
        rel_check("t_o1", 0.58, report.t_o1, 0.015),
        rel_check("t_o2", 1.176, report.t_o2, 0.01),
        rel_check("ratio", 0.5, report.ratio, 1e-9),
        rel_check("t_o1-simulated", report.t_o1, o1, 0.005),
        rel_check("t_o2-simulated", report.t_o2, o2, 0.005),
    ];
    checks.push(CheckRow {
        name: "sweep-exact-max-rel-error".into(),
        expected: 0.005,
        computed: exact_max,
        pass: exact_max.is_finite() && exact_max <= 0.005,
    });
    checks.push(CheckRow {
        name: "sweep-loaded-median-rel-error".into(),
        expected: 0.02,
        computed: loaded_median,
        pass: loaded_median.is_finite() && (0.01..=0.04).contains(&loaded_median),
    });
    checks
}
