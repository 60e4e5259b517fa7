//! Monte Carlo harness comparing allocation and switching policies on paired
//! scenario realisations, plus the single-scenario solve used by the CLI.
//!
//! Run `r` always sees the scenario drawn from `(seed, r)`, so every policy
//! is compared on the same harvests. Runs execute in parallel; results are
//! collected in run order and reduced with pairwise summation, which keeps
//! reports bit-identical for any thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{allocate, optimal_allocation, relative_deviation, AllocationPolicyId, AllocationSchedule};
use crate::error::{Error, Result};
use crate::generator::{run_seed, splitmix64, GenParams, GeneratedScenario};
use crate::model::{merge_arrivals, Scenario, Timeline};
use crate::rate::order_receivers;
use crate::schedule::{extend_schedule, min_completion_time_on, OptimalPlan, PowerProfile};
use crate::switching::{simulate_switching, SwitchLog, SwitchPolicyId};

/// First horizon tried for a generated run (s); doubled until every policy
/// finishes before the last generated harvest.
pub const INITIAL_HORIZON_S: f64 = 32.0;
const MAX_HORIZON_S: f64 = 1e5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub policy: String,
    pub runs: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl BenchmarkReport {
    pub fn from_samples(policy: impl Into<String>, samples: &[f64], seed: u64) -> Self {
        let runs = samples.len();
        let mean = pairwise_sum(samples) / runs as f64;
        let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
        let stddev = if runs > 1 { (pairwise_sum(&sq) / (runs - 1) as f64).sqrt() } else { 0.0 };
        Self { policy: policy.into(), runs, mean, stddev, stderr: stddev / (runs as f64).sqrt(), seed }
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// CSV with header `policy,runs,mean,stddev,stderr,seed`.
pub fn reports_to_csv(reports: &[BenchmarkReport]) -> String {
    let mut out = String::from("policy,runs,mean,stddev,stderr,seed\n");
    for r in reports {
        writeln!(out, "{},{},{},{},{},{}", r.policy, r.runs, r.mean, r.stddev, r.stderr, r.seed).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub multiple: u32,
    pub mean_rel_dev: f64,
    pub stderr: f64,
}

/// CSV with header `multiple,mean_rel_dev,stderr`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("multiple,mean_rel_dev,stderr\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.multiple, r.mean_rel_dev, r.stderr).unwrap();
    }
    out
}

/// Runs `f` on a dedicated pool with `threads` workers (`None` uses the
/// global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(f),
        None => f(),
    }
}

/// Optimal plan and the proposed allocation for one generated run, with
/// enough harvests generated that nothing depends on the horizon.
pub struct PreparedRun {
    pub generated: GeneratedScenario,
    pub timeline: Timeline,
    pub plan: OptimalPlan,
    /// Staircase followed by the post-deadline continuation.
    pub profile: PowerProfile,
    /// Time of the last generated harvest; results before it are final.
    pub reliable_until: f64,
}

impl PreparedRun {
    pub fn new(generated: GeneratedScenario) -> Result<Self> {
        let scenario = &generated.scenario;
        let timeline = merge_arrivals(scenario);
        let ladder = order_receivers(scenario);
        let demands = ladder.to_ladder(&scenario.demands());
        let reliable_until = timeline.entries().last().map_or(0.0, |e| e.time_s);
        let plan = min_completion_time_on(&timeline, &demands, &ladder, scenario.bandwidth_hz())?;
        let profile = extend_schedule(&plan.staircase, &timeline, generated.horizon_s);
        Ok(Self { generated, timeline, plan, profile, reliable_until })
    }

    pub fn allocate(&self, policy: AllocationPolicyId) -> Result<AllocationSchedule> {
        allocate(policy, &self.profile, &self.plan.demands, &self.plan.ladder, self.plan.bandwidth_hz)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.generated.scenario
    }
}

/// Generates run `run_index` and evaluates `eval` on it, doubling the
/// horizon until `eval` reports a result that ends before the last harvest.
fn with_growing_horizon<T>(
    params: &GenParams,
    run_index: u64,
    mut eval: impl FnMut(&PreparedRun) -> Result<(T, f64)>,
) -> Result<T> {
    let mut horizon = INITIAL_HORIZON_S;
    loop {
        let attempt =
            GeneratedScenario::new(params.clone(), run_index, horizon).and_then(PreparedRun::new).and_then(|prep| {
                let (value, needed_until) = eval(&prep)?;
                Ok((value, needed_until.max(prep.plan.completion_time_s) < prep.reliable_until))
            });
        match attempt {
            Ok((value, true)) => return Ok(value),
            Ok((_, false)) | Err(Error::NeverCompletes { .. } | Error::Unfeasible | Error::Infeasible { .. }) => {
                if horizon >= MAX_HORIZON_S {
                    return Err(Error::Unfeasible);
                }
                horizon *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

fn tag_run<T>(run: u64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Run { run, source: Box::new(e) })
}

/// Allocation policies in table order.
pub const TABLE1_POLICIES: [AllocationPolicyId; 4] = [
    AllocationPolicyId::EqualPower,
    AllocationPolicyId::DataRatio,
    AllocationPolicyId::RemainingDataRatio,
    AllocationPolicyId::Proposed,
];

/// Completion times of one run: the optimum, then [`TABLE1_POLICIES`] in order.
pub fn table1_run(params: &GenParams, run_index: u64) -> Result<(f64, [f64; 4])> {
    with_growing_horizon(params, run_index, |prep| {
        let mut times = [0.0; 4];
        for (slot, policy) in times.iter_mut().zip(TABLE1_POLICIES) {
            *slot = prep.allocate(policy)?.completion_time_s;
        }
        let latest = times.iter().copied().fold(0.0, f64::max);
        Ok(((prep.plan.completion_time_s, times), latest))
    })
}

/// Average completion time per allocation policy.
pub fn run_table1(params: &GenParams, runs: usize, seed: u64) -> Result<Vec<BenchmarkReport>> {
    check_runs(runs)?;
    params.check()?;
    let params = params.clone().with_seed(seed);
    let results: Vec<[f64; 4]> = (0..runs as u64)
        .into_par_iter()
        .map(|r| tag_run(r, table1_run(&params, r)).map(|(_, t)| t))
        .collect::<Result<_>>()?;
    Ok(TABLE1_POLICIES
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let samples: Vec<f64> = results.iter().map(|t| t[k]).collect();
            BenchmarkReport::from_samples(p.label(), &samples, seed)
        })
        .collect())
}

/// Switching policies in table order for a run. The stochastic policy draws
/// from a stream derived from `(seed, run_index)`.
pub fn table2_policies(params: &GenParams, seed: u64, run_index: u64) -> Vec<SwitchPolicyId> {
    let mut ids: Vec<u32> = params.transmitters.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    let mut alternate = ids.clone();
    if alternate.len() > 2 {
        alternate[1..].reverse();
    }
    vec![
        SwitchPolicyId::Proposed,
        SwitchPolicyId::EnergyMinimum,
        SwitchPolicyId::FixedOrder(ids),
        SwitchPolicyId::FixedOrder(alternate),
        SwitchPolicyId::Stochastic { seed: splitmix64(run_seed(seed, run_index) ^ 0x5353) },
    ]
}

/// Switch counts of one run under each of `policies`, with the completion
/// deadline fixed by the proposed allocation.
pub fn table2_run(params: &GenParams, run_index: u64, policies: &[SwitchPolicyId]) -> Result<Vec<SwitchLog>> {
    with_growing_horizon(params, run_index, |prep| {
        let deadline = prep.allocate(AllocationPolicyId::Proposed)?.completion_time_s;
        let logs = policies
            .iter()
            .map(|p| simulate_switching(prep.scenario(), &prep.profile, deadline, p))
            .collect::<Result<Vec<_>>>()?;
        Ok((logs, deadline))
    })
}

/// Average number of switches per switching policy.
pub fn run_table2(params: &GenParams, runs: usize, seed: u64) -> Result<Vec<BenchmarkReport>> {
    check_runs(runs)?;
    params.check()?;
    let params = params.clone().with_seed(seed);
    let results: Vec<(Vec<String>, Vec<f64>)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let policies = table2_policies(&params, seed, r);
            let logs = tag_run(r, table2_run(&params, r, &policies))?;
            Ok((
                policies.iter().map(SwitchPolicyId::label).collect(),
                logs.iter().map(|l| l.switch_count as f64).collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let labels = results[0].0.clone();
    Ok(labels
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let samples: Vec<f64> = results.iter().map(|(_, c)| c[k]).collect();
            BenchmarkReport::from_samples(label.clone(), &samples, seed)
        })
        .collect())
}

/// Base demands for the bit-multiple sweep, in bits.
pub const SWEEP_BASE_BITS: [f64; 3] = [7e6, 5e6, 2e6];

/// Mean relative deviation of the proposed completion time from the optimum
/// when the base demands are scaled by each multiple.
pub fn sweep_bits(params: &GenParams, multiples: &[u32], runs: usize, seed: u64) -> Result<Vec<SweepRow>> {
    check_runs(runs)?;
    if multiples.is_empty() {
        return Err(Error::Parameter("at least one multiple is required".into()));
    }
    if multiples.contains(&0) {
        return Err(Error::Parameter("bit multiples must be positive".into()));
    }
    if params.demands_bits.len() != SWEEP_BASE_BITS.len() {
        return Err(Error::Parameter("the bit sweep needs three receivers".into()));
    }
    params.check()?;
    multiples
        .iter()
        .map(|&k| {
            let scaled =
                params.clone().with_seed(seed).with_demands(SWEEP_BASE_BITS.iter().map(|b| b * f64::from(k)).collect());
            let devs: Vec<f64> = (0..runs as u64)
                .into_par_iter()
                .map(|r| {
                    tag_run(
                        r,
                        with_growing_horizon(&scaled, r, |prep| {
                            let proposed = prep.allocate(AllocationPolicyId::Proposed)?.completion_time_s;
                            Ok((relative_deviation(proposed, prep.plan.completion_time_s), proposed))
                        }),
                    )
                })
                .collect::<Result<_>>()?;
            let report = BenchmarkReport::from_samples("", &devs, seed);
            Ok(SweepRow { multiple: k, mean_rel_dev: report.mean, stderr: report.stderr })
        })
        .collect()
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        Err(Error::Parameter("runs must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Which split the `solve` command reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveAllocation {
    Optimal,
    Policy(AllocationPolicyId),
}

impl std::str::FromStr for SolveAllocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("optimal") {
            Ok(SolveAllocation::Optimal)
        } else {
            s.parse().map(SolveAllocation::Policy)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub allocation: String,
    pub optimal_completion_s: f64,
    pub completion_s: f64,
    pub relative_deviation: f64,
    /// Receiver ids from strongest to weakest.
    pub ladder_ids: Vec<u32>,
    pub equivalent_noise_mw: Vec<f64>,
    pub cutoffs_mw: Vec<f64>,
    pub finish_times_s: Vec<f64>,
    pub switch_count: usize,
}

/// Everything the `solve` command writes out.
pub struct SolveOutput {
    pub plan: OptimalPlan,
    pub allocation: AllocationSchedule,
    pub switching: SwitchLog,
    pub summary: SolveSummary,
}

impl SolveOutput {
    /// CSV `breakpoint_s,level_mw`; the last row closes the final epoch.
    pub fn staircase_csv(&self) -> String {
        let mut out = String::from("breakpoint_s,level_mw\n");
        let stairs = &self.plan.staircase;
        for (t, level) in stairs.breakpoints().iter().zip(stairs.levels()) {
            writeln!(out, "{t},{level}").unwrap();
        }
        writeln!(out, "{},", stairs.horizon()).unwrap();
        out
    }
}

/// Solves one scenario: optimal plan, the requested allocation and the
/// proposed switching over that allocation's completion time.
pub fn solve_one(scenario: &Scenario, which: SolveAllocation) -> Result<SolveOutput> {
    scenario.validate()?;
    let timeline = merge_arrivals(scenario);
    let ladder = order_receivers(scenario);
    let demands = ladder.to_ladder(&scenario.demands());
    let plan = min_completion_time_on(&timeline, &demands, &ladder, scenario.bandwidth_hz())?;
    let (label, allocation) = match which {
        SolveAllocation::Optimal => ("optimal".to_string(), optimal_allocation(&plan)?),
        SolveAllocation::Policy(policy) => {
            let last = timeline.entries().last().map_or(0.0, |e| e.time_s);
            let beyond = last.max(plan.completion_time_s) + 1.0;
            let profile = extend_schedule(&plan.staircase, &timeline, beyond);
            let alloc = allocate(policy, &profile, &demands, &ladder, scenario.bandwidth_hz())?;
            (policy.label().to_string(), alloc)
        }
    };
    let deadline = allocation.completion_time_s;
    let last = timeline.entries().last().map_or(0.0, |e| e.time_s);
    let profile = extend_schedule(&plan.staircase, &timeline, last.max(deadline) + 1.0);
    let switching = simulate_switching(scenario, &profile, deadline, &SwitchPolicyId::Proposed)?;
    let summary = SolveSummary {
        allocation: label,
        optimal_completion_s: plan.completion_time_s,
        completion_s: deadline,
        relative_deviation: relative_deviation(deadline, plan.completion_time_s),
        ladder_ids: ladder.ids().to_vec(),
        equivalent_noise_mw: ladder.noises_mw().to_vec(),
        cutoffs_mw: plan.cutoffs.0.clone(),
        finish_times_s: allocation.finish_times_s.clone(),
        switch_count: switching.switch_count,
    };
    Ok(SolveOutput { plan, allocation, switching, summary })
}
