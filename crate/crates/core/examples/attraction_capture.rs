//! Plain attraction toward the coupling distance, without a coupling latch.
//!
//! Prints the separation once per second so the lack of a stable hold is visible.

use tmem::{run, Scenario, Variant};

fn main() -> tmem::Result<()> {
    let scenario = Scenario::two_agent_default().with_variant(Variant::Attraction);
    let (trace, metrics) = run(&scenario)?;

    let per_second = (1.0 / trace.sample_interval()).round() as usize;
    println!("   t       d      v0      v1");
    for row in trace.rows.iter().step_by(per_second) {
        let d = row.agents[1].state.pos - row.agents[0].state.pos;
        println!(
            "{:5.1} {:7.2} {:+7.3} {:+7.3}",
            row.t, d, row.agents[0].state.vel, row.agents[1].state.vel
        );
    }
    println!("coupling events: {}", metrics.coupling_events.len());
    Ok(())
}
