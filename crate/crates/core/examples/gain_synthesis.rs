//! Place the closed-loop poles of one agent and check the result.
//!
//! Run with `cargo run --example gain_synthesis`.

use tmem::modal::{closed_loop_polynomial, desired_polynomial, place_gains, poles_from_spec, root_formula_gains, PoleSpec};
use tmem::plant::PlantParams;

fn main() -> tmem::Result<()> {
    let plant = PlantParams::default();
    let spec = PoleSpec::default();
    let poles = poles_from_spec(&spec)?;
    println!("poles:");
    for p in poles.0 {
        println!("  {:+.4} {:+.4}i", p.re, p.im);
    }

    let gains = place_gains(&plant, &poles)?;
    println!(
        "K = [{:.10}, {:.10}, {:.10}, {:.10}]",
        gains.k_pos, gains.k_vel, gains.k_tilt, gains.k_rate
    );

    let desired = desired_polynomial(&poles)?;
    let achieved = closed_loop_polynomial(&plant, &gains);
    println!("desired  {desired}");
    println!("achieved {achieved}");
    println!("residual {:e}", achieved.max_relative_residual(&desired));

    // The closed-form root expression yields a reordered vector.
    let f = root_formula_gains(&plant, &poles)?;
    println!("root formula [{:.7}, {:.7}, {:.5}, {:.7}]", f[0], f[1], f[2], f[3]);

    // A faster real pole set for comparison.
    let fast = poles_from_spec(&PoleSpec::new(20.0, 2.0, 3.0)?)?;
    let fast_gains = place_gains(&plant, &fast)?;
    println!("faster placement k_pos = {:.6}", fast_gains.k_pos);
    Ok(())
}
