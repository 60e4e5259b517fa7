//! Every allocation rule on the same power profile, with per-receiver
//! finish times.
//!
//! `cargo run --example heuristic_allocation -- [seed]`

use ehbcast::allocation::AllocationPolicyId;
use ehbcast::bench::PreparedRun;
use ehbcast::generator::{GenParams, GeneratedScenario};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let generated = GeneratedScenario::new(GenParams::baseline().with_seed(seed), 0, 32.0)?;
    let run = PreparedRun::new(generated)?;
    println!("optimum {:.6} s", run.plan.completion_time_s);
    for policy in AllocationPolicyId::ALL {
        let alloc = run.allocate(policy)?;
        let finish: Vec<String> = alloc.finish_times_s.iter().map(|t| format!("{t:.4}")).collect();
        println!(
            "{:<9} done {:.6} s over {:>4} slots, finish {}",
            policy.label(),
            alloc.completion_time_s,
            alloc.slots.len(),
            finish.join(" ")
        );
    }
    Ok(())
}
