//! Closed-form design analysis: equilibrium resistances, jump
//! voltages, feasibility rules, and pulse-width predictions.
//!
//! Everything here treats the transmission gate as ideal (zero series
//! resistance). The transient engine models the gate's on-resistance,
//! and the gap between the two answers is exactly what the resistance
//! sweep experiment quantifies.
//!
//! The central objects are the two equilibrium resistances. While the
//! gate conducts, the divider maps memristance to node voltage
//! monotonically, so each comparator threshold pins a unique
//! resistance: `r_mp` where the node reaches `v_p` under the high rail
//! and `r_mn` where it reaches `v_n` under the low rail. A pulse cycle
//! is one drift from `r_mn` up to `r_mp` and back, and every timing
//! formula reduces to drift times between those two anchors.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::circuit::CircuitParams;
use crate::error::Error;
use crate::memristor::{mobility_constant, MemristorParams, MobilityConstant};

/// Resistances at which the conducting divider sits exactly on a
/// comparator threshold. Returns `(r_mp, r_mn)`: the drift target of
/// the charge phase (high rail, node rising to `v_p`) and of the
/// discharge phase (low rail, node rising back to `v_n`).
pub fn equilibrium_resistances(c: &CircuitParams) -> Result<(f64, f64), Error> {
    c.validate()?;
    let r_mp = c.r_a * (c.v_p - c.v_bias) / (c.v_oh - c.v_p);
    let r_mn = c.r_a * (c.v_n - c.v_bias) / (c.v_ol - c.v_n);
    Ok((r_mp, r_mn))
}

/// Node voltages right after each latch flips the drive rail, with the
/// memristor still parked at the equilibrium of the phase that just
/// ended. Returns `(v_p_prime, v_n_prime)`: where the node jumps when
/// the output goes high at `r_mn`, and where it lands when the output
/// falls back at `r_mp`.
pub fn jump_voltages(c: &CircuitParams) -> Result<(f64, f64), Error> {
    let (r_mp, r_mn) = equilibrium_resistances(c)?;
    let v_p_prime = (c.v_oh - c.v_bias) * r_mn / (r_mn + c.r_a) + c.v_bias;
    let v_n_prime = (c.v_ol - c.v_bias) * r_mp / (r_mp + c.r_a) + c.v_bias;
    Ok((v_p_prime, v_n_prime))
}

/// The open interval of `r_a` values that keeps both equilibria
/// strictly inside the device's resistance range for the given
/// thresholds. An empty interval (`lo >= hi`) means no series resistor
/// can make this threshold set work with this device.
pub fn ra_feasible_range(m: &MemristorParams, c: &CircuitParams) -> Result<(f64, f64), Error> {
    m.validate()?;
    c.validate()?;
    let lo = m.r_on * (c.v_ol - c.v_n) / (c.v_n - c.v_bias);
    let hi = m.r_off * (c.v_oh - c.v_p) / (c.v_p - c.v_bias);
    Ok((lo, hi))
}

/// A design rule the parameter set breaks. Each variant carries the
/// numbers that witnessed the failure; `Display` renders a stable
/// slug followed by the diagnosis, and the slug alone is available
/// through [`Violation::slug`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The charge-phase threshold ratio must exceed the discharge-phase
    /// ratio; otherwise the equilibria are ordered backwards and a
    /// started pulse can never terminate.
    OscillationCondition {
        charge_ratio: f64,
        discharge_ratio: f64,
    },
    /// `r_a` so small the discharge equilibrium sits at or below
    /// `r_on`: the device pins before the node reaches `v_n`.
    RaLowerBound { r_a: f64, min: f64 },
    /// `r_a` so large the charge equilibrium sits at or above `r_off`:
    /// the device saturates before the node reaches `v_p`.
    RaUpperBound { r_a: f64, max: f64 },
    /// The resistances must satisfy `r_on < r_mn < r_mp < r_off` so
    /// both drift targets are reachable and distinct.
    EquilibriumOrder {
        r_on: f64,
        r_mn: f64,
        r_mp: f64,
        r_off: f64,
    },
    /// After the output falls at `r_mp`, the node must land below
    /// `v_n`; otherwise the discharge comparator is already tripped
    /// and the second pulse collapses.
    JumpBelowVn { v_n_prime: f64, v_n: f64 },
}

impl Violation {
    /// Stable machine-readable identifier, also the `Display` prefix.
    pub fn slug(&self) -> &'static str {
        match self {
            Violation::OscillationCondition { .. } => "oscillation-condition",
            Violation::RaLowerBound { .. } => "ra-lower-bound",
            Violation::RaUpperBound { .. } => "ra-upper-bound",
            Violation::EquilibriumOrder { .. } => "equilibrium-order",
            Violation::JumpBelowVn { .. } => "jump-below-vn",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.slug())?;
        match self {
            Violation::OscillationCondition {
                charge_ratio,
                discharge_ratio,
            } => write!(
                f,
                "(v_p - v_bias)/(v_oh - v_p) = {charge_ratio} must exceed \
                 (v_n - v_bias)/(v_ol - v_n) = {discharge_ratio}"
            ),
            Violation::RaLowerBound { r_a, min } => write!(
                f,
                "r_a = {r_a} ohm must exceed {min} ohm or the discharge \
                 equilibrium falls below r_on"
            ),
            Violation::RaUpperBound { r_a, max } => write!(
                f,
                "r_a = {r_a} ohm must stay below {max} ohm or the charge \
                 equilibrium exceeds r_off"
            ),
            Violation::EquilibriumOrder {
                r_on,
                r_mn,
                r_mp,
                r_off,
            } => write!(
                f,
                "need r_on < r_mn < r_mp < r_off, got {r_on} / {r_mn} / \
                 {r_mp} / {r_off} ohm"
            ),
            Violation::JumpBelowVn { v_n_prime, v_n } => write!(
                f,
                "node voltage {v_n_prime} V right after the output falls \
                 must sit below v_n = {v_n} V"
            ),
        }
    }
}

impl Serialize for Violation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Checks every design rule and returns the broken ones. `Ok(vec![])`
/// means the design supports a full trigger-pulse cycle. `Err` is
/// reserved for parameter sets that are malformed outright (negative
/// resistances, misordered rails), where the rules cannot even be
/// evaluated.
pub fn validate_design(m: &MemristorParams, c: &CircuitParams) -> Result<Vec<Violation>, Error> {
    let (r_mp, r_mn) = equilibrium_resistances(c)?;
    let (_, v_n_prime) = jump_voltages(c)?;
    let (ra_min, ra_max) = ra_feasible_range(m, c)?;
    let charge_ratio = (c.v_p - c.v_bias) / (c.v_oh - c.v_p);
    let discharge_ratio = (c.v_n - c.v_bias) / (c.v_ol - c.v_n);

    let mut violations = Vec::new();
    if !(charge_ratio > discharge_ratio) {
        violations.push(Violation::OscillationCondition {
            charge_ratio,
            discharge_ratio,
        });
    }
    if !(c.r_a > ra_min) {
        violations.push(Violation::RaLowerBound {
            r_a: c.r_a,
            min: ra_min,
        });
    }
    if !(c.r_a < ra_max) {
        violations.push(Violation::RaUpperBound {
            r_a: c.r_a,
            max: ra_max,
        });
    }
    if !(m.r_on < r_mn && r_mn < r_mp && r_mp < m.r_off) {
        violations.push(Violation::EquilibriumOrder {
            r_on: m.r_on,
            r_mn,
            r_mp,
            r_off: m.r_off,
        });
    }
    if !(v_n_prime < c.v_n) {
        violations.push(Violation::JumpBelowVn {
            v_n_prime,
            v_n: c.v_n,
        });
    }
    Ok(violations)
}

/// Unguarded drift-time formula; callers are responsible for sign
/// discipline.
fn transition_time_raw(r_from: f64, r_to: f64, drive: f64, r_a: f64, k: MobilityConstant) -> f64 {
    (r_to * r_to - r_from * r_from + 2.0 * r_a * (r_to - r_from)) / (2.0 * k.value() * drive)
}

/// Time for the conducting divider to carry the memristor from
/// `r_from` to `r_to`, with `drive` the active rail's offset from the
/// bias, `v_o - v_bias`.
///
/// The cell sees `v_m - v_bias = drive * r / (r + r_a)`, so the drift
/// law collapses to `dr/dt = k * drive / (r + r_a)`; separating
/// variables gives
///
/// ```text
/// t = (r_to^2 - r_from^2 + 2 r_a (r_to - r_from)) / (2 k drive)
/// ```
///
/// The sign of `drive` must match the direction of travel, otherwise
/// the target is unreachable and this returns
/// [`Error::InfeasibleTransition`].
pub fn transition_time(
    r_from: f64,
    r_to: f64,
    drive: f64,
    r_a: f64,
    k: MobilityConstant,
) -> Result<f64, Error> {
    if !(r_from > 0.0) || !(r_to > 0.0) || !r_from.is_finite() || !r_to.is_finite() {
        return Err(Error::Domain(format!(
            "transition endpoints must be positive resistances (got {r_from} and {r_to})"
        )));
    }
    if !(r_a > 0.0) || !r_a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "series resistance must be positive and finite (got {r_a})"
        )));
    }
    if !drive.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "drive voltage must be finite (got {drive})"
        )));
    }
    if r_to == r_from {
        return Ok(0.0);
    }
    if drive == 0.0 || (r_to > r_from) != (drive > 0.0) {
        return Err(Error::InfeasibleTransition(format!(
            "a drive of {drive} V cannot move the cell from {r_from} to {r_to} ohm"
        )));
    }
    Ok(transition_time_raw(r_from, r_to, drive, r_a, k))
}

/// Analytic pulse widths for a feasible design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseWidths {
    /// Width of the repeatable first-output pulse: one charge phase,
    /// `r_mn` up to `r_mp`.
    pub t_o1: f64,
    /// Width of the second-output pulse: the whole cycle, charge plus
    /// discharge.
    pub t_o2: f64,
    /// Width of the very first first-output pulse after power-up,
    /// which starts from `r_init` instead of `r_mn`.
    pub t_o1_first: f64,
}

/// Predicts the three pulse widths, refusing designs that break any
/// rule ([`Error::InfeasibleDesign`]) and initial resistances already
/// past the charge target ([`Error::FirstTriggerInfeasible`]).
pub fn pulse_widths(m: &MemristorParams, c: &CircuitParams) -> Result<PulseWidths, Error> {
    let violations = validate_design(m, c)?;
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(Violation::to_string).collect();
        return Err(Error::InfeasibleDesign(list.join("; ")));
    }
    let k = mobility_constant(m)?;
    let (r_mp, r_mn) = equilibrium_resistances(c)?;
    if m.r_init > r_mp {
        return Err(Error::FirstTriggerInfeasible {
            r_init: m.r_init,
            r_mp,
        });
    }
    let t_o1 = transition_time(r_mn, r_mp, c.v_oh - c.v_bias, c.r_a, k)?;
    let t_l = transition_time(r_mp, r_mn, c.v_ol - c.v_bias, c.r_a, k)?;
    let t_o1_first = transition_time(m.r_init, r_mp, c.v_oh - c.v_bias, c.r_a, k)?;
    Ok(PulseWidths {
        t_o1,
        t_o2: t_o1 + t_l,
        t_o1_first,
    })
}

/// The ratio `t_o1 / t_o2`. It depends on the rail and bias voltages
/// alone: the charge and discharge numerators cancel, leaving
/// `(v_bias - v_ol) / (v_oh - v_ol)`. Device geometry, mobility, `r_a`
/// and the thresholds all drop out, which makes the ratio a sharp
/// cross-check between analysis and simulation.
pub fn pulse_ratio(c: &CircuitParams) -> Result<f64, Error> {
    c.validate()?;
    Ok((c.v_bias - c.v_ol) / (c.v_oh - c.v_ol))
}

/// Everything the closed forms can say about one design. Produced by
/// [`analyze`]; timing fields hold the raw formula values even for an
/// infeasible design (they can come out negative, which is itself
/// diagnostic), so always consult `feasible` first.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    /// Drift-rate constant, ohm^2 per volt-second.
    pub k: f64,
    /// Charge-phase equilibrium resistance, ohm.
    pub r_mp: f64,
    /// Discharge-phase equilibrium resistance, ohm.
    pub r_mn: f64,
    /// Node voltage right after the output snaps high at `r_mn`.
    pub v_p_prime: f64,
    /// Node voltage right after the output snaps low at `r_mp`.
    pub v_n_prime: f64,
    /// Charge-phase duration, seconds.
    pub t_h: f64,
    /// Discharge-phase duration, seconds.
    pub t_l: f64,
    /// First-output pulse width (equals `t_h`).
    pub t_o1: f64,
    /// Second-output pulse width (`t_h + t_l`).
    pub t_o2: f64,
    /// First-output width for the very first trigger, from `r_init`.
    /// `None` when `r_init` already exceeds `r_mp` and the charge
    /// phase cannot terminate.
    pub t_o1_first: Option<f64>,
    /// `t_o1 / t_o2`, from rail and bias voltages alone.
    pub ratio: f64,
    /// True when no design rule is violated.
    pub feasible: bool,
    /// The broken rules, empty for a feasible design.
    pub violations: Vec<Violation>,
}

/// Runs the whole closed-form toolbox on one design. Unlike
/// [`pulse_widths`] this never refuses a well-formed parameter set; an
/// infeasible design comes back with `feasible: false`, the rule
/// failures listed, and the raw formula values preserved for
/// inspection.
pub fn analyze(m: &MemristorParams, c: &CircuitParams) -> Result<AnalysisReport, Error> {
    let violations = validate_design(m, c)?;
    let k = mobility_constant(m)?;
    let (r_mp, r_mn) = equilibrium_resistances(c)?;
    let (v_p_prime, v_n_prime) = jump_voltages(c)?;
    let drive_high = c.v_oh - c.v_bias;
    let drive_low = c.v_ol - c.v_bias;
    let t_h = transition_time_raw(r_mn, r_mp, drive_high, c.r_a, k);
    let t_l = transition_time_raw(r_mp, r_mn, drive_low, c.r_a, k);
    let t_o1_first = if m.r_init <= r_mp {
        Some(transition_time_raw(m.r_init, r_mp, drive_high, c.r_a, k))
    } else {
        None
    };
    Ok(AnalysisReport {
        k: k.value(),
        r_mp,
        r_mn,
        v_p_prime,
        v_n_prime,
        t_h,
        t_l,
        t_o1: t_h,
        t_o2: t_h + t_l,
        t_o1_first,
        ratio: pulse_ratio(c)?,
        feasible: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{divider_voltage, DigitalState};
    use proptest::prelude::*;

    // Reference design used throughout: 100 ohm to 38 kohm cell,
    // 10 nm oxide, mu_v 1e-14, 8 kohm series, 0/1 V rails, 0.5 V
    // bias, thresholds 0.8/0.3 V.
    fn nominal_m() -> MemristorParams {
        MemristorParams {
            r_on: 100.0,
            r_off: 38_000.0,
            d: 1e-8,
            mu_v: 1e-14,
            r_init: 5_333.333333333334,
        }
    }

    fn nominal_c() -> CircuitParams {
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

    const R_MP: f64 = 12_000.0;
    const R_MN: f64 = 5_333.333333333334;
    const T_H: f64 = 0.5863383172090302;
    const T_O2: f64 = 1.1726766344180604;
    const RA_MIN: f64 = 150.0;
    const RA_MAX: f64 = 25_333.333333333325;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Independent check of the drift-time formula: explicit midpoint
    // on dr/dt = k * drive / (r + r_a), which is the divider-driven
    // drift law before the closed-form integration step. Final partial
    // step by linear interpolation in r.
    fn oracle_divider_drive_time(
        r_from: f64,
        r_to: f64,
        drive: f64,
        r_a: f64,
        k: f64,
        h: f64,
    ) -> f64 {
        let rising = r_to > r_from;
        let mut r = r_from;
        let mut t = 0.0;
        loop {
            let d1 = k * drive / (r + r_a);
            let r_mid = r + 0.5 * h * d1;
            let d2 = k * drive / (r_mid + r_a);
            let r_next = r + h * d2;
            if (rising && r_next >= r_to) || (!rising && r_next <= r_to) {
                return t + h * (r_to - r) / (r_next - r);
            }
            r = r_next;
            t += h;
        }
    }

    #[test]
    fn equilibria_nominal() {
        let (r_mp, r_mn) = equilibrium_resistances(&nominal_c()).unwrap();
        assert!(rel(r_mp, R_MP) < 1e-12, "r_mp {r_mp}");
        assert!(rel(r_mn, R_MN) < 1e-12, "r_mn {r_mn}");
    }

    #[test]
    fn jump_voltages_nominal() {
        let (v_p_prime, v_n_prime) = jump_voltages(&nominal_c()).unwrap();
        assert!(rel(v_p_prime, 0.7) < 1e-12, "v_p_prime {v_p_prime}");
        assert!(rel(v_n_prime, 0.2) < 1e-12, "v_n_prime {v_n_prime}");
    }

    #[test]
    fn ra_range_nominal() {
        let (lo, hi) = ra_feasible_range(&nominal_m(), &nominal_c()).unwrap();
        assert!(rel(lo, RA_MIN) < 1e-12, "lo {lo}");
        assert!(rel(hi, RA_MAX) < 1e-12, "hi {hi}");
    }

    #[test]
    fn nominal_design_is_feasible() {
        assert!(validate_design(&nominal_m(), &nominal_c())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn small_ra_flags_lower_bound() {
        let c = CircuitParams {
            r_a: 100.0,
            ..nominal_c()
        };
        let violations = validate_design(&nominal_m(), &c).unwrap();
        assert!(violations.iter().any(|v| v.slug() == "ra-lower-bound"));
        // 100 * 2/3 = 66.7 ohm lower equilibrium also breaks the order
        // chain.
        assert!(violations.iter().any(|v| v.slug() == "equilibrium-order"));
        assert!(!violations
            .iter()
            .any(|v| v.slug() == "oscillation-condition"));
    }

    #[test]
    fn large_ra_flags_upper_bound() {
        let c = CircuitParams {
            r_a: 26_000.0,
            ..nominal_c()
        };
        let violations = validate_design(&nominal_m(), &c).unwrap();
        assert!(violations.iter().any(|v| v.slug() == "ra-upper-bound"));
        assert!(violations.iter().any(|v| v.slug() == "equilibrium-order"));
    }

    #[test]
    fn backwards_thresholds_flag_oscillation() {
        // v_p barely above bias and v_n well below it reverses the
        // equilibrium order.
        let c = CircuitParams {
            v_p: 0.55,
            ..nominal_c()
        };
        let violations = validate_design(&nominal_m(), &c).unwrap();
        assert!(violations
            .iter()
            .any(|v| v.slug() == "oscillation-condition"));
        assert!(violations.iter().any(|v| v.slug() == "jump-below-vn"));
        assert!(violations.iter().any(|v| v.slug() == "equilibrium-order"));
    }

    #[test]
    fn modest_threshold_margin_is_still_feasible() {
        // Thresholds much closer to the bias than the reference design
        // uses: 0.6 and 0.45 against a 0.5 V bias.
        let c = CircuitParams {
            v_p: 0.6,
            v_n: 0.45,
            ..nominal_c()
        };
        let m = MemristorParams {
            r_init: 888.0,
            ..nominal_m()
        };
        assert!(validate_design(&m, &c).unwrap().is_empty());
    }

    #[test]
    fn transition_time_nominal() {
        let k = mobility_constant(&nominal_m()).unwrap();
        let up = transition_time(R_MN, R_MP, 0.5, 8_000.0, k).unwrap();
        let down = transition_time(R_MP, R_MN, -0.5, 8_000.0, k).unwrap();
        assert!(rel(up, T_H) < 1e-12, "up {up}");
        assert!(rel(down, T_H) < 1e-12, "down {down}");
    }

    #[test]
    fn transition_time_matches_midpoint_oracle() {
        let k = mobility_constant(&nominal_m()).unwrap();
        let up = oracle_divider_drive_time(R_MN, R_MP, 0.5, 8_000.0, k.value(), 1e-6);
        let down = oracle_divider_drive_time(R_MP, R_MN, -0.5, 8_000.0, k.value(), 1e-6);
        assert!(
            rel(up, transition_time(R_MN, R_MP, 0.5, 8_000.0, k).unwrap()) < 1e-6,
            "up {up}"
        );
        assert!(
            rel(down, transition_time(R_MP, R_MN, -0.5, 8_000.0, k).unwrap()) < 1e-6,
            "down {down}"
        );
    }

    #[test]
    fn transition_time_degenerate_and_sign_errors() {
        let k = mobility_constant(&nominal_m()).unwrap();
        assert_eq!(
            transition_time(5_000.0, 5_000.0, 0.5, 8_000.0, k).unwrap(),
            0.0
        );
        assert!(matches!(
            transition_time(5_000.0, 6_000.0, -0.5, 8_000.0, k),
            Err(Error::InfeasibleTransition(_))
        ));
        assert!(matches!(
            transition_time(6_000.0, 5_000.0, 0.5, 8_000.0, k),
            Err(Error::InfeasibleTransition(_))
        ));
        assert!(matches!(
            transition_time(5_000.0, 6_000.0, 0.0, 8_000.0, k),
            Err(Error::InfeasibleTransition(_))
        ));
        assert!(matches!(
            transition_time(-1.0, 6_000.0, 0.5, 8_000.0, k),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pulse_widths_nominal() {
        let w = pulse_widths(&nominal_m(), &nominal_c()).unwrap();
        assert!(rel(w.t_o1, T_H) < 1e-12, "t_o1 {}", w.t_o1);
        assert!(rel(w.t_o2, T_O2) < 1e-12, "t_o2 {}", w.t_o2);
        // r_init sits exactly at r_mn, so the first pulse matches the
        // steady-state one.
        assert!(rel(w.t_o1_first, T_H) < 1e-12);
    }

    #[test]
    fn first_pulse_from_midway_start_is_shorter() {
        let m = MemristorParams {
            r_init: 8_000.0,
            ..nominal_m()
        };
        let w = pulse_widths(&m, &nominal_c()).unwrap();
        assert!(w.t_o1_first < w.t_o1);
        let k = mobility_constant(&m).unwrap();
        let head = transition_time(R_MN, 8_000.0, 0.5, 8_000.0, k).unwrap();
        assert!(rel(head + w.t_o1_first, w.t_o1) < 1e-12);
    }

    #[test]
    fn pulse_widths_rejects_infeasible_design() {
        let c = CircuitParams {
            r_a: 100.0,
            ..nominal_c()
        };
        match pulse_widths(&nominal_m(), &c) {
            Err(Error::InfeasibleDesign(msg)) => {
                assert!(msg.contains("ra-lower-bound"), "message: {msg}");
            }
            other => panic!("expected InfeasibleDesign, got {other:?}"),
        }
    }

    #[test]
    fn pulse_widths_rejects_r_init_past_charge_target() {
        let m = MemristorParams {
            r_init: 13_000.0,
            ..nominal_m()
        };
        match pulse_widths(&m, &nominal_c()) {
            Err(Error::FirstTriggerInfeasible { r_init, r_mp }) => {
                assert_eq!(r_init, 13_000.0);
                assert!(rel(r_mp, R_MP) < 1e-12);
            }
            other => panic!("expected FirstTriggerInfeasible, got {other:?}"),
        }
    }

    #[test]
    fn ratio_nominal() {
        assert_eq!(pulse_ratio(&nominal_c()).unwrap(), 0.5);
    }

    #[test]
    fn analyze_nominal() {
        let report = analyze(&nominal_m(), &nominal_c()).unwrap();
        assert!(report.feasible);
        assert!(report.violations.is_empty());
        assert!(rel(report.k, 3.79e8) < 1e-12);
        assert!(rel(report.r_mp, R_MP) < 1e-12);
        assert!(rel(report.r_mn, R_MN) < 1e-12);
        assert!(rel(report.v_p_prime, 0.7) < 1e-12);
        assert!(rel(report.v_n_prime, 0.2) < 1e-12);
        assert!(rel(report.t_o1, T_H) < 1e-12);
        assert!(rel(report.t_o2, T_O2) < 1e-12);
        assert!(rel(report.t_o1_first.unwrap(), T_H) < 1e-12);
        assert_eq!(report.ratio, 0.5);
        assert!(rel(report.t_o1 / report.t_o2, report.ratio) < 1e-12);
    }

    #[test]
    fn analyze_infeasible_keeps_raw_values() {
        let c = CircuitParams {
            r_a: 100.0,
            ..nominal_c()
        };
        let report = analyze(&nominal_m(), &c).unwrap();
        assert!(!report.feasible);
        assert!(!report.violations.is_empty());
        // Raw equilibria: 100 * 1.5 and 100 * 2/3 ohm.
        assert!(rel(report.r_mp, 150.0) < 1e-12);
        assert!(rel(report.r_mn, 66.66666666666667) < 1e-9);
        // r_init is far above the 150 ohm charge target.
        assert!(report.t_o1_first.is_none());
    }

    #[test]
    fn violations_serialize_as_slugged_strings() {
        let c = CircuitParams {
            r_a: 100.0,
            ..nominal_c()
        };
        let report = analyze(&nominal_m(), &c).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let rendered = json["violations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect::<Vec<_>>();
        assert!(rendered.iter().any(|s| s.starts_with("ra-lower-bound: ")));
        let feasible = analyze(&nominal_m(), &nominal_c()).unwrap();
        let json = serde_json::to_value(&feasible).unwrap();
        assert!(json["violations"].as_array().unwrap().is_empty());
        assert!(json["t_o1_first"].is_number());
    }

    #[test]
    fn equilibria_sit_on_the_thresholds() {
        let c = nominal_c();
        let (r_mp, r_mn) = equilibrium_resistances(&c).unwrap();
        let high = DigitalState {
            ff1_high: true,
            ff2_high: true,
            tg_on: true,
            cmp_p: false,
            cmp_n: true,
        };
        let low = DigitalState {
            ff1_high: false,
            ff2_high: true,
            tg_on: true,
            cmp_p: false,
            cmp_n: false,
        };
        assert!(rel(divider_voltage(r_mp, &c, high), c.v_p) < 1e-12);
        assert!(rel(divider_voltage(r_mn, &c, low), c.v_n) < 1e-12);
    }

    // Feasible designs by construction: pick rails and bias, place v_n
    // between bias and low rail, then put v_p above the jump voltage
    // it induces (the exact boundary of the pulse-termination rule)
    // and r_a inside its feasible interval with margin on both sides.
    #[derive(Debug, Clone, Copy)]
    struct FeasibleDesign {
        m: MemristorParams,
        c: CircuitParams,
    }

    fn feasible_design_strategy() -> impl Strategy<Value = FeasibleDesign> {
        (
            -0.5..0.25f64,
            0.6..1.4f64,
            0.25..0.75f64,
            0.1..0.9f64,
            0.05..0.95f64,
            20.0..500.0f64,
            30.0..500.0f64,
            0.15..0.85f64,
            5e-9..5e-8f64,
            3e-15..3e-13f64,
        )
            .prop_filter_map(
                "r_a interval must be non-empty",
                |(v_ol, span, bias_f, vn_f, vp_f, r_on, off_ratio, ra_f, d, mu_v)| {
                    let v_oh = v_ol + span;
                    let v_bias = v_ol + bias_f * span;
                    let v_n = v_ol + vn_f * (v_bias - v_ol);
                    let discharge_ratio = (v_n - v_bias) / (v_ol - v_n);
                    let v_p_floor = (v_oh * discharge_ratio + v_bias) / (1.0 + discharge_ratio);
                    let v_p = v_p_floor + vp_f * (v_oh - v_p_floor);
                    let r_off = r_on * off_ratio;
                    let c = CircuitParams {
                        r_a: 0.0,
                        r_trans_on: 0.0,
                        v_p,
                        v_n,
                        v_bias,
                        v_ol,
                        v_oh,
                    };
                    let lo = r_on * (v_ol - v_n) / (v_n - v_bias);
                    let hi = r_off * (v_oh - v_p) / (v_p - v_bias);
                    if !(lo < hi) {
                        return None;
                    }
                    let c = CircuitParams {
                        r_a: lo + ra_f * (hi - lo),
                        ..c
                    };
                    let (_, r_mn) = equilibrium_resistances(&c).ok()?;
                    let m = MemristorParams {
                        r_on,
                        r_off,
                        d,
                        mu_v,
                        r_init: r_mn,
                    };
                    Some(FeasibleDesign { m, c })
                },
            )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        // The construction in feasible_design_strategy is supposed to
        // satisfy every design rule; make sure it does, then check the
        // width ratio identity on it.
        #[test]
        fn constructed_designs_are_feasible_and_obey_ratio(d in feasible_design_strategy()) {
            let violations = validate_design(&d.m, &d.c).unwrap();
            prop_assert!(violations.is_empty(), "violations: {violations:?}");
            let w = pulse_widths(&d.m, &d.c).unwrap();
            let ratio = pulse_ratio(&d.c).unwrap();
            prop_assert!(w.t_o1 > 0.0 && w.t_o2 > w.t_o1);
            prop_assert!(rel(w.t_o1 / w.t_o2, ratio) < 1e-9,
                "widths {w:?} ratio {ratio}");
        }

        // The pulse-termination rule, the charge-phase jump landing
        // below v_p, and the discharge-phase jump landing below v_n
        // are the same condition in three coordinate systems.
        #[test]
        fn feasibility_rules_agree(
            v_ol in -0.5..0.25f64,
            span in 0.6..1.4f64,
            bias_f in 0.25..0.75f64,
            vn_f in 0.1..0.9f64,
            vp_f in 0.1..0.9f64,
            r_a in 500.0..20_000.0f64,
        ) {
            let v_oh = v_ol + span;
            let v_bias = v_ol + bias_f * span;
            let v_n = v_ol + vn_f * (v_bias - v_ol);
            let v_p = v_bias + vp_f * (v_oh - v_bias);
            let c = CircuitParams {
                r_a,
                r_trans_on: 0.0,
                v_p,
                v_n,
                v_bias,
                v_ol,
                v_oh,
            };
            prop_assume!(c.validate().is_ok());
            let charge_ratio = (v_p - v_bias) / (v_oh - v_p);
            let discharge_ratio = (v_n - v_bias) / (v_ol - v_n);
            // Skip razor-edge cases where float rounding could make
            // the three forms disagree legitimately.
            prop_assume!((charge_ratio - discharge_ratio).abs()
                > 1e-9 * (charge_ratio.abs() + discharge_ratio.abs()));
            let oscillates = charge_ratio > discharge_ratio;
            let (v_p_prime, v_n_prime) = jump_voltages(&c).unwrap();
            prop_assert_eq!(oscillates, v_p_prime < v_p);
            prop_assert_eq!(oscillates, v_n_prime < v_n);
        }

        // Drift times add up along a path and are direction-symmetric.
        #[test]
        fn transition_time_additive_and_symmetric(
            a in 200.0..30_000.0f64,
            rise1 in 10.0..5_000.0f64,
            rise2 in 10.0..5_000.0f64,
            drive in 0.05..1.0f64,
            r_a in 500.0..20_000.0f64,
        ) {
            let k = mobility_constant(&nominal_m()).unwrap();
            let b = a + rise1;
            let c = b + rise2;
            let whole = transition_time(a, c, drive, r_a, k).unwrap();
            let parts = transition_time(a, b, drive, r_a, k).unwrap()
                + transition_time(b, c, drive, r_a, k).unwrap();
            prop_assert!(rel(whole, parts) < 1e-12);
            // Exact in floats: every term of the formula negates
            // exactly when the direction flips.
            prop_assert_eq!(
                transition_time(a, c, drive, r_a, k).unwrap(),
                transition_time(c, a, -drive, r_a, k).unwrap()
            );
        }
    }
}
