//! Two agents on a collision course with pure repulsion.
//!
//! They bounce apart, keep their combined momentum, and end with almost the
//! same RMS speed they started with.

use tmem::{run, Scenario, Variant};

fn main() -> tmem::Result<()> {
    let scenario = Scenario::two_agent_default().with_variant(Variant::Repulsion);
    let (trace, metrics) = run(&scenario)?;

    let min_gap = trace
        .rows
        .iter()
        .map(|r| (r.agents[1].state.pos - r.agents[0].state.pos).abs())
        .fold(f64::INFINITY, f64::min);
    let last = trace.rows.last().expect("trace has rows");

    println!("closest approach   {min_gap:.3} m");
    println!(
        "final velocities   {:+.4} {:+.4} m/s",
        last.agents[0].state.vel, last.agents[1].state.vel
    );
    println!("momentum drift     {:e}", metrics.velocity_sum_drift);
    match &metrics.rms_change {
        Ok(c) => println!("RMS {:.4} -> {:.4} ({:.3}%)", c.before, c.after, 100.0 * c.delta),
        Err(why) => println!("RMS change undefined: {why}"),
    }
    Ok(())
}
