//! Crate-wide error type.

/// Everything that can go wrong short of I/O: bad parameters, requests
/// outside a function's mathematical domain, transitions the physics
/// cannot perform, and internal solver failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A structural invariant on an input struct is violated. The
    /// message names the offending field and the rule it breaks.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was asked to evaluate outside its domain (zero
    /// denominators, non-positive resistances, and the like).
    #[error("domain error: {0}")]
    Domain(String),

    /// A resistance transition whose direction disagrees with the sign
    /// of the driving voltage.
    #[error("infeasible transition: {0}")]
    InfeasibleTransition(String),

    /// The device starts above the high-phase equilibrium, so a trigger
    /// cannot produce a first pulse.
    #[error("first trigger infeasible: r_init = {r_init} is above the high-phase equilibrium r_mp = {r_mp}")]
    FirstTriggerInfeasible { r_init: f64, r_mp: f64 },

    /// A design-rule check failed where a feasible design is required.
    /// The message lists the violated rules by name.
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// Malformed configuration text.
    #[error("parse error: {0}")]
    Parse(String),

    /// A numerical routine failed to converge or reached a state that
    /// should be unreachable. Always a bug or a pathological input.
    #[error("internal error: {0}")]
    Internal(String),
}
