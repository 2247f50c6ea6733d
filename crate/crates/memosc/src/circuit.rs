//! The oscillator around the memristor: resistive divider, threshold
//! comparators, and the two latches that shape the output pulses.
//!
//! Topology: a pass gate (driven by FF2) connects the output rail to a
//! divider formed by the memristor, the fixed resistor `r_a`, and the
//! gate's on-resistance. FF1 selects which rail drives the divider
//! (`v_oh` while high, `v_ol` while low). With the gate off the
//! memristor node floats at `v_bias` and nothing moves: the circuit is
//! mono-stable.
//!
//! A trigger sets both latches. The memristor then charges toward the
//! upper threshold `v_p`; the upper comparator clears FF1, flipping the
//! divider to the low rail; the node falls and creeps back up to the
//! lower threshold `v_n`, where the lower comparator clears FF2 and
//! shuts the gate. The V_n comparator can only clear FF2 once FF1 is
//! already low, so the `v_n` level seen throughout the high phase is
//! harmless.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Fixed circuit values around the memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Divider resistor in series with the memristor, ohms.
    pub r_a: f64,
    /// Pass-gate on-resistance, ohms. Zero models an ideal gate; must
    /// stay below `r_a / 10` so the gate is a perturbation, not a
    /// design element.
    pub r_trans_on: f64,
    /// Upper comparator threshold, volts.
    pub v_p: f64,
    /// Lower comparator threshold, volts.
    pub v_n: f64,
    /// Rest voltage of the memristor node, volts.
    pub v_bias: f64,
    /// Low output rail, volts.
    pub v_ol: f64,
    /// High output rail, volts.
    pub v_oh: f64,
}

impl CircuitParams {
    /// Checks every structural invariant, reporting the first violation
    /// by field name. The comparisons are written so that NaN fails.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.r_a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r_a must be positive (got {})",
                self.r_a
            )));
        }
        if !(self.r_trans_on >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r_trans_on must be non-negative (got {})",
                self.r_trans_on
            )));
        }
        if !(self.r_trans_on < self.r_a / 10.0) {
            return Err(Error::InvalidParameter(format!(
                "r_trans_on must stay below r_a / 10 = {} (got {})",
                self.r_a / 10.0,
                self.r_trans_on
            )));
        }
        let ordered = self.v_ol < self.v_n
            && self.v_n < self.v_bias
            && self.v_bias < self.v_p
            && self.v_p < self.v_oh;
        if !ordered {
            return Err(Error::InvalidParameter(format!(
                "thresholds must be ordered v_ol < v_n < v_bias < v_p < v_oh \
                 (got v_ol = {}, v_n = {}, v_bias = {}, v_p = {}, v_oh = {})",
                self.v_ol, self.v_n, self.v_bias, self.v_p, self.v_oh
            )));
        }
        Ok(())
    }
}

/// Latch and comparator levels: the discrete half of the hybrid state.
///
/// Invariant: `tg_on == ff2_high` (the pass gate is wired to FF2), and
/// the comparator fields mirror `v_m >= v_p` / `v_m >= v_n` for the
/// node voltage they were last evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalState {
    pub ff1_high: bool,
    pub ff2_high: bool,
    pub tg_on: bool,
    pub cmp_p: bool,
    pub cmp_n: bool,
}

/// The three operating regimes the latches can express.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Gate off, node at `v_bias`, memristor frozen.
    Stable,
    /// Gate on, high rail driving, memristor charging toward `v_p`.
    HighPhase,
    /// Gate on, low rail driving, memristor discharging toward `v_n`.
    LowPhase,
}

impl DigitalState {
    /// The mono-stable rest state: latches low, gate off, comparators
    /// cleared. Refresh the comparators against the actual node voltage
    /// (see [`DigitalState::with_comparators`]) before stepping.
    pub fn stable() -> Self {
        Self {
            ff1_high: false,
            ff2_high: false,
            tg_on: false,
            cmp_p: false,
            cmp_n: false,
        }
    }

    /// Comparator levels for node voltage `v_m`, latches untouched. The
    /// comparators are ideal and follow the node instantly, so this is
    /// how state is kept consistent right after `v_m` jumps.
    #[must_use]
    pub fn with_comparators(mut self, v_m: f64, c: &CircuitParams) -> Self {
        self.cmp_p = v_m >= c.v_p;
        self.cmp_n = v_m >= c.v_n;
        self
    }

    pub fn phase(&self) -> Phase {
        if !self.tg_on {
            Phase::Stable
        } else if self.ff1_high {
            Phase::HighPhase
        } else {
            Phase::LowPhase
        }
    }
}

/// Memristor node voltage for the current discrete state. Gate off
/// leaves the node at `v_bias`; gate on puts the FF1-selected rail
/// across the divider:
///
/// ```text
/// v_m = (v_o - v_bias) * r_m / (r_m + r_a + r_trans_on) + v_bias
/// ```
pub fn divider_voltage(r_m: f64, c: &CircuitParams, state: DigitalState) -> f64 {
    debug_assert!(r_m > 0.0, "divider needs a positive memristance");
    if !state.tg_on {
        return c.v_bias;
    }
    let v_o = if state.ff1_high { c.v_oh } else { c.v_ol };
    (v_o - c.v_bias) * r_m / (r_m + c.r_a + c.r_trans_on) + c.v_bias
}

/// Trigger input: sets both latches and the gate. Set-dominant, so a
/// held trigger keeps the latches high regardless of the comparators.
/// Idempotent.
#[must_use]
pub fn trigger(state: DigitalState) -> DigitalState {
    DigitalState {
        ff1_high: true,
        ff2_high: true,
        tg_on: true,
        ..state
    }
}

/// One evaluation of the latch logic at node voltage `v_m`.
///
/// Priority, resolved against the incoming latch state: an asserted
/// trigger sets both latches; otherwise the upper comparator clears
/// FF1; otherwise the lower comparator clears FF2, but only once FF1 is
/// already low. At most one latch changes per evaluation, so clearing
/// FF1 at the upper threshold cannot fall through and clear FF2 in the
/// same instant even though `v_m >= v_p` implies `v_m >= v_n`.
///
/// The comparator inputs act as levels. In particular, releasing a held
/// trigger with the node already beyond `v_p` clears FF1 at the release
/// itself, which is what makes an over-long trigger produce an output
/// pulse exactly as wide as the trigger.
#[must_use]
pub fn step_discrete(
    state: DigitalState,
    v_m: f64,
    trigger_asserted: bool,
    c: &CircuitParams,
) -> DigitalState {
    let cmp_p = v_m >= c.v_p;
    let cmp_n = v_m >= c.v_n;
    let mut next = DigitalState {
        cmp_p,
        cmp_n,
        ..state
    };
    if trigger_asserted {
        next.ff1_high = true;
        next.ff2_high = true;
    } else if state.ff1_high && cmp_p {
        next.ff1_high = false;
    } else if !state.ff1_high && state.ff2_high && cmp_n {
        next.ff2_high = false;
    }
    next.tg_on = next.ff2_high;
    next
}
