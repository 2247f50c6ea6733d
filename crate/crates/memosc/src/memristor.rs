//! Linear dopant-drift memristor model.
//!
//! The device is a two-terminal resistor whose value R_m drifts under an
//! applied voltage imbalance: dR_m/dt = k * dV / R_m, where dV is the
//! voltage excess over the divider midpoint and
//!
//! ```text
//! k = mu_v * r_on * (r_off - r_on) / d^2
//! ```
//!
//! collapses the device constants (dopant mobility `mu_v`, oxide
//! thickness `d`, terminal resistances) into one rate constant in
//! ohm^2 / (volt * second). Because R_m * dR_m is linear in dV * dt, the
//! squared resistance moves linearly in accumulated volt-seconds:
//!
//! ```text
//! R_m(S)^2 = R_m(0)^2 + 2 k S,    S = integral of dV dt
//! ```
//!
//! [`resistance_after`] evaluates that update in closed form, clamped to
//! the physical range, and is the single primitive the transient engine
//! is built on.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Device parameters for a linear-drift memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorParams {
    /// Fully doped (minimum) resistance, ohms.
    pub r_on: f64,
    /// Fully undoped (maximum) resistance, ohms.
    pub r_off: f64,
    /// Oxide thickness, metres.
    pub d: f64,
    /// Dopant mobility, m^2 / (V s).
    pub mu_v: f64,
    /// Resistance the device starts from, ohms. Must lie in
    /// [`r_on`](Self::r_on) ..= [`r_off`](Self::r_off).
    pub r_init: f64,
}

impl MemristorParams {
    /// Checks every structural invariant, reporting the first violation
    /// by field name. The comparisons are written so that NaN fails.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.r_on > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r_on must be positive (got {})",
                self.r_on
            )));
        }
        if !(self.r_off > self.r_on) {
            return Err(Error::InvalidParameter(format!(
                "r_off must exceed r_on (r_on = {}, r_off = {})",
                self.r_on, self.r_off
            )));
        }
        if !(self.d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "d must be positive (got {})",
                self.d
            )));
        }
        if !(self.mu_v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu_v must be positive (got {})",
                self.mu_v
            )));
        }
        if !(self.r_init >= self.r_on && self.r_init <= self.r_off) {
            return Err(Error::InvalidParameter(format!(
                "r_init must lie in [r_on, r_off] = [{}, {}] (got {})",
                self.r_on, self.r_off, self.r_init
            )));
        }
        Ok(())
    }
}

/// The drift-rate constant k, ohm^2 / (V s). Always positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityConstant(f64);

impl MobilityConstant {
    /// Wraps a raw rate constant; rejects non-positive or non-finite
    /// values.
    pub fn new(k: f64) -> Result<Self, Error> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mobility constant must be positive and finite (got {k})"
            )));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Computes the drift-rate constant k = mu_v * r_on * (r_off - r_on) / d^2
/// for a validated parameter set.
pub fn mobility_constant(p: &MemristorParams) -> Result<MobilityConstant, Error> {
    p.validate()?;
    MobilityConstant::new(p.mu_v * p.r_on * (p.r_off - p.r_on) / (p.d * p.d))
}

/// Instantaneous drift rate dR_m/dt = k * dv_m / R_m, in ohms per
/// second. `dv_m` is the memristor voltage measured from the divider
/// midpoint, so its sign selects growth or decay.
pub fn resistance_derivative(r_m: f64, dv_m: f64, k: MobilityConstant) -> Result<f64, Error> {
    if !(r_m > 0.0) {
        return Err(Error::Domain(format!(
            "resistance must be positive to evaluate the drift rate (got {r_m})"
        )));
    }
    Ok(k.value() * dv_m / r_m)
}

/// Closed-form resistance after absorbing `signed_volt_seconds` of
/// drive: sqrt(r_start^2 + 2 k S), clamped to [r_on, r_off]. A negative
/// argument under the root means the device pinned at full doping
/// before the drive ran out, so the result clamps to `r_on`.
pub fn resistance_after(
    r_start: f64,
    signed_volt_seconds: f64,
    k: MobilityConstant,
    p: &MemristorParams,
) -> f64 {
    let arg = r_start * r_start + 2.0 * k.value() * signed_volt_seconds;
    if arg <= p.r_on * p.r_on {
        return p.r_on;
    }
    arg.sqrt().min(p.r_off)
}
