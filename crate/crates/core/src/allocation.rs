//! Splitting a total-power schedule among receivers.
//!
//! The sweep walks the schedule epoch by epoch and opens a new slot whenever
//! the total power changes or a receiver completes. A completed receiver gets
//! no more power. Four split rules are available:
//!
//! * `Proposed`: rates proportional to the demands, `r_n / B_n` equal for all
//!   unfinished receivers, so every receiver finishes together.
//! * `EP`: equal power for every unfinished receiver.
//! * `DR`: power proportional to the original demands.
//! * `RDR`: power proportional to the bits still outstanding at slot start.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rate::{rates_of_split, split_for_rates, NoiseLadder, PowerSplit};
use crate::schedule::{OptimalPlan, PowerProfile};

/// Remaining bits below this fraction of the demand count as delivered.
pub const FINISH_RTOL: f64 = 1e-9;
/// Relative tolerance on the total power when solving the proportional split.
pub const SPLIT_POWER_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationPolicyId {
    Proposed,
    EqualPower,
    DataRatio,
    RemainingDataRatio,
}

impl AllocationPolicyId {
    pub const ALL: [AllocationPolicyId; 4] = [
        AllocationPolicyId::Proposed,
        AllocationPolicyId::EqualPower,
        AllocationPolicyId::DataRatio,
        AllocationPolicyId::RemainingDataRatio,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AllocationPolicyId::Proposed => "Proposed",
            AllocationPolicyId::EqualPower => "EP",
            AllocationPolicyId::DataRatio => "DR",
            AllocationPolicyId::RemainingDataRatio => "RDR",
        }
    }
}

impl fmt::Display for AllocationPolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AllocationPolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(AllocationPolicyId::Proposed),
            "ep" => Ok(AllocationPolicyId::EqualPower),
            "dr" => Ok(AllocationPolicyId::DataRatio),
            "rdr" => Ok(AllocationPolicyId::RemainingDataRatio),
            other => Err(Error::Parameter(format!("unknown allocation policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub start_s: f64,
    pub end_s: f64,
    pub total_mw: f64,
    pub split: PowerSplit,
    /// Rates per ladder position, bits/s.
    pub rates: Vec<f64>,
}

impl Slot {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Slot-resolved allocation. Per-receiver vectors are in ladder order.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSchedule {
    pub slots: Vec<Slot>,
    pub finish_times_s: Vec<f64>,
    pub completion_time_s: f64,
}

impl AllocationSchedule {
    /// Bits delivered to each ladder position.
    pub fn delivered_bits(&self) -> Vec<f64> {
        let n = self.finish_times_s.len();
        let mut bits = vec![0.0; n];
        for slot in &self.slots {
            for (b, r) in bits.iter_mut().zip(&slot.rates) {
                *b += r * slot.duration();
            }
        }
        bits
    }

    pub fn finish_spread(&self) -> f64 {
        let (lo, hi) =
            self.finish_times_s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        hi - lo
    }

    /// CSV with one row per slot: `slot_start,slot_end,total_mw,P_n_mw...,r_n_bps...`.
    pub fn to_csv(&self) -> String {
        let n = self.finish_times_s.len();
        let mut out = String::from("slot_start,slot_end,total_mw");
        for k in 1..=n {
            write!(out, ",P_{k}_mw").unwrap();
        }
        for k in 1..=n {
            write!(out, ",r_{k}_bps").unwrap();
        }
        out.push('\n');
        for s in &self.slots {
            write!(out, "{},{},{}", s.start_s, s.end_s, s.total_mw).unwrap();
            for p in s.split.powers() {
                write!(out, ",{p}").unwrap();
            }
            for r in &s.rates {
                write!(out, ",{r}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Split of `total_mw` whose rates are proportional to `weights` (ladder
/// order). Zero weights get zero power.
pub fn proportional_split(total_mw: f64, weights: &[f64], ladder: &NoiseLadder, bandwidth_hz: f64) -> PowerSplit {
    let n = weights.len();
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    if !(total_mw > 0.0) || !(w_max > 0.0) {
        return PowerSplit::zeros(n);
    }
    let split_at = |x: f64| {
        let rates: Vec<f64> = weights.iter().map(|w| w * x).collect();
        split_for_rates(&rates, ladder, bandwidth_hz)
    };
    let mut hi = bandwidth_hz / w_max;
    while split_at(hi).total() < total_mw {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut best = split_at(hi);
    for _ in 0..300 {
        if best.total() - total_mw <= 1e-2 * SPLIT_POWER_RTOL * total_mw {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = split_at(mid);
        if s.total() >= total_mw {
            hi = mid;
            best = s;
        } else {
            lo = mid;
        }
    }
    best
}

fn scaled(total_mw: f64, weights: &[f64]) -> PowerSplit {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0) || !(total_mw > 0.0) {
        return PowerSplit::zeros(weights.len());
    }
    PowerSplit(weights.iter().map(|w| total_mw * w / sum).collect())
}

enum SplitRule<'a> {
    Policy(AllocationPolicyId),
    Cutoffs(&'a [f64]),
}

impl SplitRule<'_> {
    fn split(
        &self,
        total_mw: f64,
        demands: &[f64],
        remaining: &[f64],
        active: &[bool],
        ladder: &NoiseLadder,
        bandwidth_hz: f64,
    ) -> PowerSplit {
        let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(active).map(|(&x, &a)| if a { x } else { 0.0 }).collect() };
        match self {
            SplitRule::Policy(AllocationPolicyId::Proposed) => {
                proportional_split(total_mw, &mask(demands), ladder, bandwidth_hz)
            }
            SplitRule::Policy(AllocationPolicyId::EqualPower) => {
                let ones: Vec<f64> = active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
                scaled(total_mw, &ones)
            }
            SplitRule::Policy(AllocationPolicyId::DataRatio) => scaled(total_mw, &mask(demands)),
            SplitRule::Policy(AllocationPolicyId::RemainingDataRatio) => scaled(total_mw, &mask(remaining)),
            SplitRule::Cutoffs(cutoffs) => crate::rate::cutoff_split(total_mw, cutoffs),
        }
    }
}

/// Splits `profile` among the receivers under `policy` until every demand
/// (ladder order) is met.
pub fn allocate(
    policy: AllocationPolicyId,
    profile: &PowerProfile,
    demands: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Result<AllocationSchedule> {
    sweep(SplitRule::Policy(policy), profile, demands, ladder, bandwidth_hz)
}

/// The optimal plan's cut-off split, resolved into slots.
pub fn optimal_allocation(plan: &OptimalPlan) -> Result<AllocationSchedule> {
    sweep(SplitRule::Cutoffs(&plan.cutoffs.0), plan.staircase.profile(), &plan.demands, &plan.ladder, plan.bandwidth_hz)
}

fn sweep(
    rule: SplitRule<'_>,
    profile: &PowerProfile,
    demands: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Result<AllocationSchedule> {
    let n = ladder.len();
    assert_eq!(demands.len(), n);
    let mut remaining = demands.to_vec();
    let mut active = vec![true; n];
    let mut finish = vec![f64::NAN; n];
    let mut slots = Vec::new();

    'epochs: for epoch in profile.epochs() {
        let mut t = epoch.start_s;
        while t < epoch.end_s {
            if !active.iter().any(|&a| a) {
                break 'epochs;
            }
            let split = rule.split(epoch.level_mw, demands, &remaining, &active, ladder, bandwidth_hz);
            let rates = rates_of_split(&split, ladder, bandwidth_hz);
            let (first, dt) = (0..n)
                .filter(|&k| active[k] && rates[k] > 0.0)
                .map(|k| (k, remaining[k] / rates[k]))
                .fold((None, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (Some(k), d) } else { acc });
            let end = if t + dt < epoch.end_s { t + dt } else { epoch.end_s };
            let completes_here = end < epoch.end_s || t + dt == epoch.end_s;
            for k in 0..n {
                if active[k] {
                    remaining[k] -= rates[k] * (end - t);
                }
            }
            if completes_here {
                if let Some(k) = first {
                    remaining[k] = 0.0;
                }
            }
            for k in 0..n {
                if active[k] && remaining[k] <= FINISH_RTOL * demands[k] {
                    remaining[k] = 0.0;
                    active[k] = false;
                    finish[k] = end;
                }
            }
            if end > t {
                slots.push(Slot { start_s: t, end_s: end, total_mw: epoch.level_mw, split, rates });
            }
            t = end;
        }
    }

    if active.iter().any(|&a| a) {
        return Err(Error::NeverCompletes { end_s: profile.end(), outstanding_bits: remaining.iter().sum() });
    }
    let completion_time_s = finish.iter().copied().fold(0.0, f64::max);
    Ok(AllocationSchedule { slots, finish_times_s: finish, completion_time_s })
}

/// `(proposed - optimal) / optimal`.
pub fn relative_deviation(proposed_completion: f64, optimal_completion: f64) -> f64 {
    (proposed_completion - optimal_completion) / optimal_completion
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_ladder() -> NoiseLadder {
        NoiseLadder::from_sorted(&[1.0, 1.0])
    }

    fn one_epoch() -> PowerProfile {
        PowerProfile::from_breakpoints(&[0.0, 1.0, 5.0], &[3.0, 3.0])
    }

    #[test]
    fn proportional_closed_form() {
        let s = proportional_split(3.0, &[1.0, 1.0], &eq_ladder(), 1e6);
        assert!((s.0[0] - 1.0).abs() < 1e-9 && (s.0[1] - 2.0).abs() < 1e-9, "{s:?}");
        let r = rates_of_split(&s, &eq_ladder(), 1e6);
        assert!((r[0] - 1e6).abs() < 1e-3 && (r[1] - 1e6).abs() < 1e-3);
    }

    #[test]
    fn proportional_degenerate_cases() {
        assert_eq!(proportional_split(0.0, &[1.0, 1.0], &eq_ladder(), 1e6).0, vec![0.0, 0.0]);
        let single = NoiseLadder::from_sorted(&[0.5]);
        let s = proportional_split(2.5, &[7.0], &single, 1e6);
        assert!((s.0[0] - 2.5).abs() < 1e-9);
    }

    #[test]
    fn proposed_finishes_together() {
        let a = allocate(AllocationPolicyId::Proposed, &one_epoch(), &[1e6, 1e6], &eq_ladder(), 1e6).unwrap();
        assert!((a.completion_time_s - 1.0).abs() < 1e-9, "{}", a.completion_time_s);
        assert!(a.finish_spread() < 1e-9);
        assert!((a.slots[0].split.0[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_power_hand_computation() {
        let a = allocate(AllocationPolicyId::EqualPower, &one_epoch(), &[1e6, 1e6], &eq_ladder(), 1e6).unwrap();
        let first = 1.0 / 2.5f64.log2();
        assert!((a.finish_times_s[0] - first).abs() < 1e-9, "{:?}", a.finish_times_s);
        assert!((a.completion_time_s - 1.0).abs() < 1e-9);
        // After the strong receiver leaves, the weak one gets everything.
        assert_eq!(a.slots[1].split.0, vec![0.0, 3.0]);
    }

    #[test]
    fn data_ratio_split_is_proportional() {
        let ladder = NoiseLadder::from_sorted(&[1e-3, 1.2e-3, 1.5e-3]);
        let profile = PowerProfile::from_breakpoints(&[0.0, 1e9], &[0.64]);
        let a = allocate(AllocationPolicyId::DataRatio, &profile, &[15.0, 10.0, 7.0], &ladder, 1e6).unwrap();
        let s = &a.slots[0].split.0;
        for (x, y) in s.iter().zip([0.30, 0.20, 0.14]) {
            assert!((x - y).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn remaining_ratio_reweights_each_slot() {
        let ladder = NoiseLadder::from_sorted(&[1.0, 1.0]);
        let profile = PowerProfile::from_breakpoints(&[0.0, 0.5, 100.0], &[2.0, 3.0]);
        let a = allocate(AllocationPolicyId::RemainingDataRatio, &profile, &[1e6, 2e6], &ladder, 1e6).unwrap();
        let r0 = &a.slots[0].rates;
        let rem = [1e6 - r0[0] * 0.5, 2e6 - r0[1] * 0.5];
        let s1 = &a.slots[1].split.0;
        assert!((s1[0] / s1[1] - rem[0] / rem[1]).abs() < 1e-9);
        assert_eq!(a.slots[0].split.0, vec![2.0 / 3.0, 4.0 / 3.0]);
    }

    #[test]
    fn never_completes_on_dead_schedule() {
        let profile = PowerProfile::from_breakpoints(&[0.0, 1.0, 2.0], &[1.0, 0.0]);
        let err = allocate(AllocationPolicyId::EqualPower, &profile, &[1e7, 1e7], &eq_ladder(), 1e6).unwrap_err();
        assert!(matches!(err, Error::NeverCompletes { .. }));
    }

    #[test]
    fn delivered_bits_match_demands() {
        let ladder = NoiseLadder::from_sorted(&[1e-3, 10f64.powf(-2.9), 10f64.powf(-2.8)]);
        let profile = PowerProfile::from_breakpoints(&[0.0, 1.0, 2.5, 40.0], &[0.3, 0.5, 0.7]);
        let demands = [15e6, 10e6, 7e6];
        for policy in AllocationPolicyId::ALL {
            let a = allocate(policy, &profile, &demands, &ladder, 1e6).unwrap();
            for (d, b) in a.delivered_bits().iter().zip(demands) {
                assert!((d - b).abs() <= 1e-6 * b, "{policy}: {d} vs {b}");
            }
            for w in a.slots.windows(2) {
                assert_eq!(w[0].end_s, w[1].start_s);
            }
            for s in &a.slots {
                assert!((s.split.total() - s.total_mw).abs() <= 1e-9, "{policy}: {s:?}");
            }
        }
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(relative_deviation(2.0, 1.0), 1.0);
        assert_eq!(relative_deviation(3.5, 3.5), 0.0);
        let d = relative_deviation(10.788761418, 10.788513518);
        assert!((d - 2.2978e-5).abs() < 1e-8, "{d}");
    }

    #[test]
    fn csv_has_expected_header() {
        let a = allocate(AllocationPolicyId::Proposed, &one_epoch(), &[1e6, 1e6], &eq_ladder(), 1e6).unwrap();
        let csv = a.to_csv();
        assert!(csv.starts_with("slot_start,slot_end,total_mw,P_1_mw,P_2_mw,r_1_bps,r_2_bps\n"));
        assert_eq!(csv.lines().count(), 1 + a.slots.len());
    }
}
