//! Couple, hold, then uncouple on command, under the two switching laws.
//!
//! The hard switch (`v10`) replaces repulsion with a spring the instant the
//! pair couples. The smooth law (`v11`) blends the two, which changes how
//! much kinetic energy is left over after the pair lets go.

use tmem::engine::EventKind;
use tmem::{run, Scenario, Variant};

fn main() -> tmem::Result<()> {
    let base = Scenario::two_agent_default();
    let mut deltas = Vec::new();
    for variant in [Variant::Switching10, Variant::Switching11] {
        let (trace, metrics) = run(&base.clone().with_variant(variant))?;
        println!("{variant}:");
        for e in &trace.events {
            let what = match e.kind {
                EventKind::Coupled => "coupled",
                EventKind::Uncoupled => "uncoupled",
            };
            println!("  {what:>9} at t = {:.3} s", e.t);
        }
        let held: Vec<f64> = trace
            .rows
            .iter()
            .filter(|r| r.pairs[0].f_en)
            .map(|r| r.pairs[0].d.abs())
            .collect();
        if !held.is_empty() {
            let lo = held.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = held.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("  |d| while coupled: {lo:.2} .. {hi:.2} m");
        }
        match metrics.delta_rms() {
            Some(d) => println!("  RMS change {:.3}%", 100.0 * d),
            None => println!("  RMS change undefined"),
        }
        deltas.push(metrics.delta_rms());
    }
    if let [Some(hard), Some(smooth)] = deltas[..] {
        println!("ratio hard/smooth = {:.2}", hard / smooth);
    }
    Ok(())
}
