//! The `tmem` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical abort.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::engine::{run, Event, Metrics};
use crate::error::Error;
use crate::interaction::Variant;
use crate::modal::{closed_loop_polynomial, desired_polynomial, place_gains, poles_from_spec, root_formula_gains, PoleSpec};
use crate::output::{distance_columns, render_svg, trace_csv, velocity_columns, write_report};
use crate::plant::PlantParams;
use crate::scenario::{parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tmem", version, about = "Swarm formation coupling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise modal gains and print both characteristic polynomials.
    Gains(GainsArgs),
    /// Run one scenario and write trace.csv, report.txt and SVG charts.
    Run(RunArgs),
    /// Run one scenario under several interaction variants.
    Compare(CompareArgs),
    /// Sweep one scalar scenario parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GainsArgs {
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub kp: f64,
    #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
    pub kd: f64,
    #[arg(long, default_value_t = 9.8, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
    pub rl: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub iml: f64,
    #[arg(long, default_value_t = 0.55, allow_negative_numbers = true)]
    pub imr: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Override the scenario's interaction variant.
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub scenario: PathBuf,
    /// Comma-separated list, e.g. `v10,v11`.
    #[arg(long, default_value = "v10,v11")]
    pub variants: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub variant: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Aborted { .. }) { EXIT_ABORT } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult = std::result::Result<String, CliError>;

/// Parses `args` (including the program name), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(command: &Command) -> CliResult {
    match command {
        Command::Gains(a) => cmd_gains(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn fmt4(v: [f64; 4]) -> String {
    format!("({}, {}, {}, {})", v[0], v[1], v[2], v[3])
}

pub fn cmd_gains(a: &GainsArgs) -> CliResult {
    if ![a.kp, a.kd, a.g].iter().all(|v| v.is_finite()) {
        return Err(CliError::usage("plant parameters must be finite"));
    }
    let plant = PlantParams { k_p: a.kp, k_d: a.kd, g: a.g };
    let spec = PoleSpec::new(a.rl, a.iml, a.imr)?;
    let poles = poles_from_spec(&spec)?;
    let gains = place_gains(&plant, &poles)?;
    let desired = desired_polynomial(&poles)?;
    let achieved = closed_loop_polynomial(&plant, &gains);
    let formula = root_formula_gains(&plant, &poles)?;
    let reordered = [gains.k_vel, gains.k_pos, 1.0 + gains.k_tilt, gains.k_rate];
    let deviation = formula
        .iter()
        .zip(reordered)
        .map(|(f, g)| (f - g).abs())
        .fold(0.0, f64::max);

    let mut s = String::new();
    let _ = writeln!(s, "k_pos: {}", gains.k_pos);
    let _ = writeln!(s, "k_vel: {}", gains.k_vel);
    let _ = writeln!(s, "k_tilt: {}", gains.k_tilt);
    let _ = writeln!(s, "k_rate: {}", gains.k_rate);
    let _ = writeln!(s, "k1: {}", gains.k1);
    let _ = writeln!(s, "desired_polynomial: {desired}");
    let _ = writeln!(s, "closed_loop_polynomial: {achieved}");
    let _ = writeln!(s, "residual: {:e}", achieved.max_relative_residual(&desired));
    let _ = writeln!(s, "root_formula: {}", fmt4(formula));
    let _ = writeln!(s, "root_formula_expected: {} (k_vel, k_pos, 1 + k_tilt, k_rate)", fmt4(reordered));
    let _ = writeln!(s, "root_formula_deviation: {deviation:e}");
    Ok(s)
}

fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_variant(name: &str) -> Result<Variant, CliError> {
    name.parse().map_err(|e: Error| CliError::usage(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_run(a: &RunArgs) -> CliResult {
    let mut scenario = load(&a.scenario)?;
    if let Some(dt) = a.dt {
        scenario.dt = dt;
    }
    if let Some(t_end) = a.t_end {
        scenario.t_end = t_end;
    }
    if let Some(v) = &a.variant {
        scenario.interaction.variant = parse_variant(v)?;
    }
    scenario.validate()?;
    let (trace, metrics) = run(&scenario)?;

    fs::create_dir_all(&a.out)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", a.out.display())))?;
    let report = write_report(&metrics, &scenario);
    write_file(&a.out.join("trace.csv"), &trace_csv(&trace))?;
    write_file(&a.out.join("report.txt"), &report)?;
    let vel = velocity_columns(&trace);
    let vel: Vec<&str> = vel.iter().map(String::as_str).collect();
    write_file(&a.out.join("velocity.svg"), &render_svg(&trace, &vel)?)?;
    let dist = distance_columns(&trace);
    if !dist.is_empty() {
        let dist: Vec<&str> = dist.iter().map(String::as_str).collect();
        write_file(&a.out.join("distance.svg"), &render_svg(&trace, &dist)?)?;
    }
    Ok(report)
}

fn event_list(events: &[Event]) -> String {
    if events.is_empty() {
        "none".into()
    } else {
        events.iter().map(|e| format!("edge{}@{}", e.edge, e.t)).collect::<Vec<_>>().join(" ")
    }
}

fn delta_field(m: &Metrics) -> String {
    match &m.rms_change {
        Ok(c) => c.delta.to_string(),
        Err(_) => "undefined".into(),
    }
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult {
    let scenario = load(&a.scenario)?;
    let variants = a
        .variants
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_variant)
        .collect::<Result<Vec<_>, _>>()?;
    if variants.is_empty() {
        return Err(CliError::usage("--variants is empty"));
    }
    let results = variants
        .par_iter()
        .map(|&v| run(&scenario.clone().with_variant(v)).map(|(_, m)| m))
        .collect::<Result<Vec<_>, Error>>()?;

    let mut s = String::new();
    for (v, m) in variants.iter().zip(&results) {
        let _ = writeln!(
            s,
            "variant={v} coupled={} delta_rms={} coupling_events={} uncoupling_events={}",
            if m.coupled() { "yes" } else { "no" },
            delta_field(m),
            event_list(&m.coupling_events),
            event_list(&m.uncoupling_events),
        );
    }
    if let [first, second, ..] = results.as_slice() {
        let ratio = match (first.delta_rms(), second.delta_rms()) {
            (Some(a), Some(b)) if a == b => "1".to_string(),
            (Some(a), Some(b)) => (a / b).to_string(),
            _ => "undefined".into(),
        };
        let _ = writeln!(s, "ratio({}/{})={ratio}", variants[0], variants[1]);
    }
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn times(events: &[Event]) -> String {
    events.iter().map(|e| e.t.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult {
    let mut base = load(&a.scenario)?;
    if let Some(v) = &a.variant {
        base.interaction.variant = parse_variant(v)?;
    }
    if a.steps == 0 {
        return Err(CliError::usage("--steps must be >= 1"));
    }
    if !a.from.is_finite() || !a.to.is_finite() {
        return Err(CliError::usage("--from and --to must be finite"));
    }
    base.clone().set_param(&a.param, a.from).map_err(|e| CliError::usage(e.to_string()))?;

    let values: Vec<f64> = (0..a.steps)
        .map(|k| {
            if a.steps == 1 {
                a.from
            } else {
                a.from + (a.to - a.from) * k as f64 / (a.steps - 1) as f64
            }
        })
        .collect();
    let rows: Vec<String> = values
        .par_iter()
        .map(|&value| {
            let mut s = base.clone();
            let outcome = s
                .set_param(&a.param, value)
                .and_then(|_| s.validate())
                .and_then(|_| run(&s));
            match outcome {
                Ok((_, m)) => format!(
                    "{value},ok,{},{},{},{}",
                    m.coupled(),
                    delta_field(&m),
                    times(&m.coupling_events),
                    times(&m.uncoupling_events)
                ),
                Err(e) => format!("{value},{},,,,", csv_field(&format!("error: {e}"))),
            }
        })
        .collect();

    let mut csv = String::from("value,status,coupled,delta_rms,coupling_times,uncoupling_times\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    match &a.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
            }
            write_file(path, &csv)?;
            Ok(format!("wrote {} rows to {}\n", values.len(), path.display()))
        }
        None => Ok(csv),
    }
}
