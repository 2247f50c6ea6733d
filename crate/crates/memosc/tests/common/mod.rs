//! Shared helpers for the integration suites: a relative-error gauge
//! and a seeded generator of feasible designs.

use memosc::analysis::{equilibrium_resistances, pulse_widths, validate_design};
use memosc::circuit::CircuitParams;
use memosc::memristor::MemristorParams;
use rand::rngs::StdRng;
use rand::Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Draws a random design that passes every feasibility rule, with the
/// device mobility rescaled so the full-cycle width lands in
/// `[t_o2_lo, t_o2_hi]`.
///
/// Construction instead of rejection: thresholds are placed relative
/// to the crossover value where the charge and discharge ratios tie,
/// and the divider resistance inside its feasible band, so almost
/// every draw is valid on the first try. The rare float-edge miss is
/// resampled.
pub fn random_feasible(
    rng: &mut StdRng,
    t_o2_lo: f64,
    t_o2_hi: f64,
) -> (MemristorParams, CircuitParams) {
    loop {
        let v_ol = rng.gen_range(-0.5..0.25);
        let span = rng.gen_range(0.6..1.4);
        let v_oh = v_ol + span;
        let v_bias = v_ol + rng.gen_range(0.25..0.75) * span;
        let v_n = v_ol + rng.gen_range(0.1..0.9) * (v_bias - v_ol);

        // The oscillation condition holds iff the charge ratio
        // (v_p - v_bias)/(v_oh - v_p) exceeds the discharge ratio; the
        // tie sits at v_p_star, so any v_p strictly above it works.
        let discharge = (v_bias - v_n) / (v_n - v_ol);
        let v_p_star = (v_oh * discharge + v_bias) / (1.0 + discharge);
        let v_p = v_p_star + rng.gen_range(0.05..0.95) * (v_oh - v_p_star);
        let charge = (v_p - v_bias) / (v_oh - v_p);

        let r_on = rng.gen_range(20.0..500.0);
        let r_off = r_on * rng.gen_range(30.0..500.0);
        let lo = r_on / discharge;
        let hi = r_off / charge;
        // Negated so a NaN band (degenerate draw) also resamples.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lo < hi) {
            continue;
        }
        let r_a = lo + rng.gen_range(0.15..0.85) * (hi - lo);

        let c = CircuitParams {
            r_a,
            r_trans_on: 0.0,
            v_p,
            v_n,
            v_bias,
            v_ol,
            v_oh,
        };
        let mut m = MemristorParams {
            r_on,
            r_off,
            d: rng.gen_range(5e-9..5e-8),
            mu_v: rng.gen_range(3e-15..3e-13),
            r_init: r_on,
        };
        let Ok((_, r_mn)) = equilibrium_resistances(&c) else {
            continue;
        };
        m.r_init = r_mn;
        if m.validate().is_err() || c.validate().is_err() {
            continue;
        }
        if !matches!(validate_design(&m, &c), Ok(v) if v.is_empty()) {
            continue;
        }

        // Durations scale as 1/mu_v with everything else fixed, so one
        // rescale pins the cycle width exactly where asked.
        let Ok(widths) = pulse_widths(&m, &c) else {
            continue;
        };
        let target = rng.gen_range(t_o2_lo..t_o2_hi);
        m.mu_v *= widths.t_o2 / target;
        if m.validate().is_err() {
            continue;
        }
        return (m, c);
    }
}
