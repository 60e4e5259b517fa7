//! Minimum completion time, power staircase and cut-off powers for the
//! bundled three-transmitter scenario.
//!
//! `cargo run --example optimal_schedule -- [scenario.json]`

use ehbcast::model::Scenario;
use ehbcast::schedule::min_completion_time;

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/golden_scenario.json").into());
    let scenario = Scenario::read_json(&path)?;
    let plan = min_completion_time(&scenario)?;

    println!("completion time  {:.9} s", plan.completion_time_s);
    println!("receivers, strongest first: {:?}", plan.ladder.ids());
    for (t, p) in plan.staircase.breakpoints().iter().zip(plan.staircase.levels()) {
        println!("  from {t:>10.6} s  {p:.6} mW");
    }
    for (k, pc) in plan.cutoffs.0.iter().enumerate() {
        println!("cut-off {}  {pc:.6} mW", k + 1);
    }
    Ok(())
}
