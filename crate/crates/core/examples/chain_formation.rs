//! Three agents with two declared edges settle into a line.

use tmem::{run, Scenario};

fn main() -> tmem::Result<()> {
    let scenario = Scenario::three_agent_chain();
    let (trace, _) = run(&scenario)?;

    for e in &trace.events {
        println!("edge {} {:?} at t = {:.3} s", e.edge, e.kind, e.t);
    }
    let tail_start = scenario.t_end - 10.0;
    let tail: Vec<_> = trace.rows.iter().filter(|r| r.t >= tail_start).collect();
    for k in 0..scenario.edges.len() {
        let mean = tail.iter().map(|r| r.pairs[k].d.abs()).sum::<f64>() / tail.len() as f64;
        println!("edge {k}: mean |d| over the last 10 s = {mean:.3} m (target {})", scenario.interaction.d_t);
    }
    let last = trace.rows.last().expect("trace has rows");
    let positions: Vec<String> = last.agents.iter().map(|a| format!("{:.2}", a.state.pos)).collect();
    println!("final positions: {}", positions.join(", "));
    Ok(())
}
