//! Sweep the force saturation and find where capture turns into a bounce.

use rayon::prelude::*;
use tmem::{run, Scenario};

fn main() {
    let base = Scenario::two_agent_default();
    let values: Vec<f64> = (0..10).map(|k| 0.02 + 0.02 * k as f64).collect();
    let rows: Vec<_> = values
        .par_iter()
        .map(|&c_max| {
            let mut s = base.clone();
            s.interaction.c_max = c_max;
            (c_max, run(&s))
        })
        .collect();

    println!("c_max  coupled  delta_rms");
    for (c_max, result) in rows {
        match result {
            Ok((_, m)) => {
                let delta = m.delta_rms().map_or("undefined".into(), |d| format!("{d:.5}"));
                println!("{c_max:5.2}  {:7}  {delta}", m.coupled());
            }
            Err(e) => println!("{c_max:5.2}  error: {e}"),
        }
    }
}
