//! Command-line front end: feasibility checks, closed-form analysis,
//! transient runs, divider-resistance sweeps, and the reference
//! artifact bundle.
//!
//! Exit codes: 0 success, 1 infeasible design or failed reference
//! check, 2 usage or config error, 3 internal or output error. Every
//! failure prints `error: <kind>: <message>` as its first stderr line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use memosc::analysis::{analyze, validate_design, AnalysisReport};
use memosc::circuit::CircuitParams;
use memosc::config::{self, parse_quantity};
use memosc::experiments::{
    nominal_params, nominal_schedule, nominal_sim_config, reference_checks, run_nominal,
    sweep_defaults, sweep_ra, sweep_ra_with, violation_scenarios, write_sweep_csv, CheckRow,
    SweepSpec,
};
use memosc::memristor::MemristorParams;
use memosc::transient::{
    measure_pulses, simulate, Pulse, PulseMeasurements, SimConfig, TriggerSchedule,
};
use memosc::Error;

#[derive(Parser)]
#[command(
    name = "memosc",
    version,
    about = "Design analysis and transient simulation for a memristor-based mono-stable oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the run description comes from: a TOML file or the built-in
/// reference design.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Run description file (TOML)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use the built-in reference design instead of a config file
    #[arg(long)]
    paper_defaults: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a design against the feasibility rules
    Validate {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Emit the closed-form design report as JSON
    Analyze {
        #[command(flatten)]
        source: ConfigSource,

        /// Output file (stdout when omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the transient engine; write trace, events, and measurements
    Simulate {
        #[command(flatten)]
        source: ConfigSource,

        /// Output prefix: writes <PREFIX>-trace.csv, <PREFIX>-events.csv,
        /// <PREFIX>-measurements.json
        #[arg(long, value_name = "PREFIX")]
        out: PathBuf,
    },
    /// Sweep the divider resistance; compare closed form vs simulation
    Sweep {
        #[command(flatten)]
        source: ConfigSource,

        /// Swept parameter name
        #[arg(long, value_name = "NAME", default_value = "r_a")]
        param: String,

        /// Grid start, ohm (defaults to the reference grid)
        #[arg(long, value_name = "OHM", value_parser = parse_quantity)]
        from: Option<f64>,

        /// Grid end, ohm (defaults to the reference grid)
        #[arg(long, value_name = "OHM", value_parser = parse_quantity)]
        to: Option<f64>,

        /// Number of grid points, endpoints included
        #[arg(long, value_name = "N")]
        steps: Option<usize>,

        /// Gate resistance to repeat the grid with, ohm; may repeat
        /// (defaults to the reference series)
        #[arg(long = "r-trans", value_name = "OHM", value_parser = parse_quantity)]
        r_trans: Vec<f64>,

        /// Output CSV file (stdout when omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Rebuild the reference artifact bundle and score it
    Reproduce {
        /// Output directory for the bundle
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

/// A terminal failure: the process exit code plus the first-line
/// machine-readable kind.
struct Failure {
    kind: &'static str,
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: io::Error) -> Self {
        Failure {
            kind: "io",
            code: 3,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::Parse(_) => ("parse", 2),
            Error::InvalidParameter(_) | Error::Domain(_) => ("config", 2),
            Error::InfeasibleTransition(_)
            | Error::FirstTriggerInfeasible { .. }
            | Error::InfeasibleDesign(_) => ("infeasible", 1),
            Error::Internal(_) => ("internal", 3),
        };
        Failure {
            kind,
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            let mut lines = f.message.lines();
            eprintln!("error: {}: {}", f.kind, lines.next().unwrap_or(""));
            for line in lines {
                eprintln!("  {line}");
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Validate { source } => cmd_validate(&source),
        Command::Analyze { source, out } => cmd_analyze(&source, out.as_deref()),
        Command::Simulate { source, out } => cmd_simulate(&source, &out),
        Command::Sweep {
            source,
            param,
            from,
            to,
            steps,
            r_trans,
            out,
        } => cmd_sweep(&source, param, from, to, steps, r_trans, out.as_deref()),
        Command::Reproduce { out } => cmd_reproduce(&out),
    }
}

struct Inputs {
    m: MemristorParams,
    c: CircuitParams,
    sim: SimConfig,
    triggers: TriggerSchedule,
}

fn load_inputs(source: &ConfigSource) -> Result<Inputs, Failure> {
    if source.paper_defaults {
        let (m, c) = nominal_params();
        return Ok(Inputs {
            m,
            c,
            sim: nominal_sim_config(),
            triggers: nominal_schedule(),
        });
    }
    let path = source.config.as_deref().expect("clap enforces the group");
    let text = fs::read_to_string(path).map_err(|e| Failure {
        kind: "config",
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    let (m, c, sim, triggers) = config::from_toml_str(&text)?.to_inputs()?;
    Ok(Inputs {
        m,
        c,
        sim,
        triggers,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure {
        kind: "internal",
        code: 3,
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::io(path, e)),
        None => io::stdout().write_all(bytes).map_err(|e| Failure {
            kind: "io",
            code: 3,
            message: e.to_string(),
        }),
    }
}

fn write_with<F>(path: &Path, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut w = BufWriter::new(file);
    fill(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Failure::io(path, e))
}

/// `prefix` + `suffix` as one path: `out/run` becomes `out/run-trace.csv`.
fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_validate(source: &ConfigSource) -> Result<ExitCode, Failure> {
    let inputs = load_inputs(source)?;
    let violations = validate_design(&inputs.m, &inputs.c)?;
    if violations.is_empty() {
        println!("design is feasible");
        return Ok(ExitCode::SUCCESS);
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure {
        kind: "infeasible",
        code: 1,
        message: format!("design violates {} rule(s)", violations.len()),
    })
}

fn cmd_analyze(source: &ConfigSource, out: Option<&Path>) -> Result<ExitCode, Failure> {
    let inputs = load_inputs(source)?;
    let report = analyze(&inputs.m, &inputs.c)?;
    emit(out, to_json(&report)?.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

/// A measured pulse next to what the closed forms predict for its
/// place in the train. Expectations are omitted for truncated pulses
/// and infeasible designs, where no prediction applies.
#[derive(Serialize)]
struct PulseRow {
    start: f64,
    width: f64,
    truncated: bool,
    expected_width: Option<f64>,
    rel_deviation: Option<f64>,
}

#[derive(Serialize)]
struct MeasurementsDoc {
    o1_pulses: Vec<PulseRow>,
    o2_pulses: Vec<PulseRow>,
}

fn annotate_channel(
    pulses: &[Pulse],
    first: Option<f64>,
    later: f64,
    feasible: bool,
) -> Vec<PulseRow> {
    pulses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let expected = match (feasible, p.truncated, i) {
                (true, false, 0) => first,
                (true, false, _) => Some(later),
                _ => None,
            };
            PulseRow {
                start: p.start,
                width: p.width,
                truncated: p.truncated,
                expected_width: expected,
                rel_deviation: expected.map(|e| (p.width - e).abs() / e),
            }
        })
        .collect()
}

fn annotate(measured: &PulseMeasurements, report: &AnalysisReport) -> MeasurementsDoc {
    MeasurementsDoc {
        o1_pulses: annotate_channel(
            &measured.o1_pulses,
            report.t_o1_first,
            report.t_o1,
            report.feasible,
        ),
        o2_pulses: annotate_channel(
            &measured.o2_pulses,
            report.t_o1_first.map(|f| f + report.t_l),
            report.t_o2,
            report.feasible,
        ),
    }
}

fn cmd_simulate(source: &ConfigSource, out: &Path) -> Result<ExitCode, Failure> {
    let inputs = load_inputs(source)?;
    let trace = simulate(&inputs.m, &inputs.c, &inputs.triggers, &inputs.sim)?;
    let measured = measure_pulses(&trace);
    let report = analyze(&inputs.m, &inputs.c)?;
    write_with(&with_suffix(out, "-trace.csv"), |w| {
        trace.write_samples_csv(w)
    })?;
    write_with(&with_suffix(out, "-events.csv"), |w| {
        trace.write_events_csv(w)
    })?;
    let doc = annotate(&measured, &report);
    emit(
        Some(&with_suffix(out, "-measurements.json")),
        to_json(&doc)?.as_bytes(),
    )?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    source: &ConfigSource,
    param: String,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
    r_trans: Vec<f64>,
    out: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let inputs = load_inputs(source)?;
    let defaults = sweep_defaults();
    let spec = SweepSpec {
        parameter: param,
        from: from.unwrap_or(defaults.from),
        to: to.unwrap_or(defaults.to),
        steps: steps.unwrap_or(defaults.steps),
        r_trans_values: if r_trans.is_empty() {
            defaults.r_trans_values
        } else {
            r_trans
        },
    };
    let rows = sweep_ra_with(&inputs.m, &inputs.c, &spec)?;
    if rows.iter().all(|r| !r.feasible) {
        eprintln!("warning: every sweep point is infeasible for this design");
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).map_err(|e| Failure {
        kind: "internal",
        code: 3,
        message: e.to_string(),
    })?;
    emit(out, &buf)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SummaryDoc {
    checks: Vec<CheckRow>,
    all_pass: bool,
}

fn cmd_reproduce(out_dir: &Path) -> Result<ExitCode, Failure> {
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    emit(
        Some(&out_dir.join("paper-defaults.toml")),
        config::paper_defaults_document().as_bytes(),
    )?;

    let (report, _, measured) = run_nominal()?;
    emit(
        Some(&out_dir.join("analysis.json")),
        to_json(&report)?.as_bytes(),
    )?;

    for scenario in &violation_scenarios()? {
        let prefix = out_dir.join(scenario.name);
        write_with(&with_suffix(&prefix, "-trace.csv"), |w| {
            scenario.trace.write_samples_csv(w)
        })?;
        write_with(&with_suffix(&prefix, "-events.csv"), |w| {
            scenario.trace.write_events_csv(w)
        })?;
        emit(
            Some(&with_suffix(&prefix, "-measurements.json")),
            to_json(&scenario.measurements)?.as_bytes(),
        )?;
    }

    let rows = sweep_ra(&sweep_defaults())?;
    write_with(&out_dir.join("sweep.csv"), |w| write_sweep_csv(&rows, w))?;

    let checks = reference_checks(&report, &measured, &rows);
    let all_pass = checks.iter().all(|c| c.pass);
    emit(
        Some(&out_dir.join("summary.json")),
        to_json(&SummaryDoc {
            checks: checks.clone(),
            all_pass,
        })?
        .as_bytes(),
    )?;

    for c in &checks {
        println!(
            "{}: {} (expected {:.6e}, computed {:.6e})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.expected,
            c.computed
        );
    }
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = checks.iter().filter(|c| !c.pass).count();
        Err(Failure {
            kind: "acceptance",
            code: 1,
            message: format!("{failed} of {} reference checks failed", checks.len()),
        })
    }
}
