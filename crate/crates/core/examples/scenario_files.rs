//! Build a scenario in code, write it as TOML, read it back, and show a
//! validation error.

use tmem::scenario::{parse_scenario, serialize_scenario};
use tmem::{Scenario, Variant};

fn main() -> tmem::Result<()> {
    let mut scenario = Scenario::two_agent_default().with_variant(Variant::Switching10);
    scenario.t_end = 35.0;
    scenario.agents[1].state.vel = 2.5;

    let text = serialize_scenario(&scenario);
    println!("{text}");
    let back = parse_scenario(&text)?;
    assert_eq!(back, scenario);
    println!("round trip ok");

    let broken = text.replace("d_t = 30.0", "d_t = 45.0");
    match parse_scenario(&broken) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
