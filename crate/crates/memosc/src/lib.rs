//! Behavioral simulator and closed-form design analyzer for a
//! memristor-based mono-stable oscillator.
//!
//! A memristor in a resistive divider, two threshold comparators, and
//! two latches form a one-shot: each trigger produces one pulse on each
//! output, with widths set by how long the memristor takes to drift
//! between two equilibrium resistances. No capacitor or inductor is
//! involved; the memristor's state is the only memory.
//!
//! The layers, bottom up:
//!
//! * [`memristor`]: the linear dopant-drift device law and its exact
//!   square-law update.
//! * [`circuit`]: the divider, comparators, latch pair, and
//!   transmission gate as pure functions of state.
//! * [`analysis`]: equilibria, feasibility rules, and pulse widths in
//!   closed form.
//! * [`transient`]: a deterministic hybrid simulator with exact-time
//!   event location.
//! * [`experiments`]: the reference design, the divider-resistance
//!   sweep, the trigger-violation scenarios, and the scorecard.
//! * [`config`]: TOML run descriptions for the `memosc` binary.
//!
//! The [`guide`] holds the long-form chapters; every snippet in it
//! runs as a doc-test.
//!
//! ```
//! use memosc::analysis::analyze;
//! use memosc::experiments::nominal_params;
//!
//! # fn main() -> Result<(), memosc::Error> {
//! let (m, c) = nominal_params();
//! let report = analyze(&m, &c)?;
//! assert!(report.feasible);
//! assert!((report.r_mp - 12_000.0).abs() < 1e-6);
//! assert!((report.t_o1 / report.t_o2 - 0.5).abs() < 1e-12);
//! # Ok(())
//! # }
//! ```

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`:
// the negated form also rejects NaN, which the rewrite lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod config;
mod error;
pub mod experiments;
pub mod guide;
pub mod memristor;
pub mod transient;

pub use error::Error;
