//! Run the default scenario and write the CSV trace and two SVG charts.
//!
//! `cargo run --example plot_trace -- out/` (defaults to `plot_out/`).

use std::fs;
use std::path::PathBuf;

use tmem::output::{distance_columns, render_svg, trace_csv, velocity_columns, write_report};
use tmem::{run, Scenario};

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "plot_out".into()));
    fs::create_dir_all(&dir)?;

    let scenario = Scenario::two_agent_default();
    let (trace, metrics) = run(&scenario)?;

    let vel = velocity_columns(&trace);
    let dist = distance_columns(&trace);
    fs::write(dir.join("trace.csv"), trace_csv(&trace))?;
    fs::write(dir.join("report.txt"), write_report(&metrics, &scenario))?;
    fs::write(dir.join("velocity.svg"), render_svg(&trace, &refs(&vel))?)?;
    fs::write(dir.join("distance.svg"), render_svg(&trace, &refs(&dist))?)?;
    println!("wrote {} rows and two charts to {}", trace.rows.len(), dir.display());
    Ok(())
}
