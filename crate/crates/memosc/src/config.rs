//! Run descriptions as TOML: device, circuit, solver knobs, and
//! trigger schedule in one document.
//!
//! Numeric fields accept plain numbers or strings with one SI suffix
//! (`k`, `m`, `u`, `n`), so `r_off = "38k"` and `dt = "100u"` read the
//! way they are spoken. Unknown keys are rejected rather than
//! ignored; a typo in a solver knob should fail loudly, not silently
//! simulate something else.

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::circuit::CircuitParams;
use crate::error::Error;
use crate::experiments::nominal_memristor;
use crate::memristor::MemristorParams;
use crate::transient::{SimConfig, TriggerPulse, TriggerSchedule};

/// Parses a number written with an optional SI suffix: `"8k"` is
/// 8000, `"100u"` is 1e-4, `"3.3"` is 3.3.
pub fn parse_quantity(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (digits, scale) = match s.chars().last() {
        Some('k') => (&s[..s.len() - 1], 1e3),
        Some('m') => (&s[..s.len() - 1], 1e-3),
        Some('u') => (&s[..s.len() - 1], 1e-6),
        Some('n') => (&s[..s.len() - 1], 1e-9),
        _ => (s, 1.0),
    };
    let base: f64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("cannot read {s:?} as a number with an optional k/m/u/n suffix"))?;
    Ok(base * scale)
}

/// A number that may be written with an SI suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quantity(f64);

impl Default for Quantity {
    fn default() -> Self {
        Quantity(0.0)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Quantity;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number, or a string with an optional k/m/u/n suffix")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                Ok(Quantity(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                Ok(Quantity(v as f64))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Quantity, E> {
                parse_quantity(s).map(Quantity).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemristorSection {
    r_on: Quantity,
    r_off: Quantity,
    d: Quantity,
    mu_v: Quantity,
    r_init: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitSection {
    r_a: Quantity,
    #[serde(default)]
    r_trans_on: Quantity,
    v_p: Quantity,
    v_n: Quantity,
    v_bias: Quantity,
    v_ol: Quantity,
    v_oh: Quantity,
}

fn default_dt() -> Quantity {
    Quantity(1e-4)
}
fn default_t_end() -> Quantity {
    Quantity(2.0)
}
fn default_crossing_tol() -> Quantity {
    Quantity(1e-9)
}
fn default_record_stride() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(default = "default_dt")]
    dt: Quantity,
    #[serde(default = "default_t_end")]
    t_end: Quantity,
    #[serde(default = "default_crossing_tol")]
    crossing_tol: Quantity,
    #[serde(default = "default_record_stride")]
    record_stride: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_end: default_t_end(),
            crossing_tol: default_crossing_tol(),
            record_stride: default_record_stride(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriggerSection {
    start: Quantity,
    width: Quantity,
}

/// A parsed run description. Obtain one with [`from_toml_str`] and
/// turn it into simulator inputs with [`ConfigDocument::to_inputs`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    memristor: MemristorSection,
    circuit: CircuitSection,
    #[serde(default)]
    sim: SimSection,
    #[serde(default)]
    triggers: Vec<TriggerSection>,
}

/// Parses a TOML run description. Syntax errors, unknown keys, and
/// missing sections all surface here with line and column context.
pub fn from_toml_str(text: &str) -> Result<ConfigDocument, Error> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter(msg) => Error::InvalidParameter(format!("{section}: {msg}")),
        other => other,
    }
}

impl ConfigDocument {
    /// Validates the document and builds the four simulator inputs.
    /// Error messages name the offending section.
    pub fn to_inputs(
        &self,
    ) -> Result<(MemristorParams, CircuitParams, SimConfig, TriggerSchedule), Error> {
        let m = MemristorParams {
            r_on: self.memristor.r_on.0,
            r_off: self.memristor.r_off.0,
            d: self.memristor.d.0,
            mu_v: self.memristor.mu_v.0,
            r_init: self.memristor.r_init.0,
        };
        m.validate().map_err(|e| prefixed("memristor", e))?;
        let c = CircuitParams {
            r_a: self.circuit.r_a.0,
            r_trans_on: self.circuit.r_trans_on.0,
            v_p: self.circuit.v_p.0,
            v_n: self.circuit.v_n.0,
            v_bias: self.circuit.v_bias.0,
            v_ol: self.circuit.v_ol.0,
            v_oh: self.circuit.v_oh.0,
        };
        c.validate().map_err(|e| prefixed("circuit", e))?;
        let sim = SimConfig {
            dt: self.sim.dt.0,
            t_end: self.sim.t_end.0,
            crossing_tol: self.sim.crossing_tol.0,
            record_stride: self.sim.record_stride,
        };
        sim.validate().map_err(|e| prefixed("sim", e))?;
        let schedule = TriggerSchedule::new(
            self.triggers
                .iter()
                .map(|t| TriggerPulse {
                    start: t.start.0,
                    width: t.width.0,
                })
                .collect(),
        )
        .map_err(|e| prefixed("triggers", e))?;
        Ok((m, c, sim, schedule))
    }
}

/// The reference design as a TOML document. Parsing it back yields
/// bit-identical parameters to the built-in reference (the derived
/// initial resistance is printed with full round-trip precision).
pub fn paper_defaults_document() -> String {
    format!(
        r#"# Reference memristor one-shot: device, divider, thresholds, and a
# single 10 ms trigger at t = 0.1 s. Values accept SI suffixes
# (k, m, u, n) when written as strings.

[memristor]
r_on = 100.0
r_off = "38k"
d = 1e-8
mu_v = 1e-14
r_init = {r_init}

[circuit]
r_a = "8k"
r_trans_on = 0.0
v_p = 0.8
v_n = 0.3
v_bias = 0.5
v_ol = 0.0
v_oh = 1.0

[sim]
dt = 1e-4
t_end = 2.0
crossing_tol = 1e-9
record_stride = 10

[[triggers]]
start = 0.1
width = 0.01
"#,
        r_init = nominal_memristor().r_init
    )
}
