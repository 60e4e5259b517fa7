//! Optimal total-power schedule and the minimum completion time solver.
//!
//! For a fixed deadline the total transmit power that maximises the departure
//! region is the tightest staircase under the cumulative harvest curve: from
//! each anchor it takes the smallest average power that can be sustained up
//! to some later harvest instant (or the deadline), then restarts there. The
//! staircase is split among receivers by cut-off powers found strongest
//! first, and the completion time is the smallest deadline for which the
//! weakest receiver still gets its bits.

use crate::error::{Error, Result};
use crate::model::{merge_arrivals, Scenario, Timeline};
use crate::rate::{cutoff_split, log2_1p, order_receivers, NoiseLadder};
use crate::roots::bisect;

/// Relative tolerance on the completion time.
pub const COMPLETION_RTOL: f64 = 1e-9;
/// Relative tolerance on delivered bits when solving for a cut-off power.
pub const CUTOFF_BITS_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    pub start_s: f64,
    pub end_s: f64,
    pub level_mw: f64,
}

impl Epoch {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn energy(&self) -> f64 {
        self.level_mw * self.duration()
    }
}

/// Piecewise-constant total power starting at t = 0, epochs contiguous.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerProfile {
    epochs: Vec<Epoch>,
}

impl PowerProfile {
    /// Builds a profile from contiguous epochs. Zero-length epochs are dropped.
    pub fn from_epochs(epochs: Vec<Epoch>) -> Self {
        let epochs: Vec<Epoch> = epochs.into_iter().filter(|e| e.end_s > e.start_s).collect();
        debug_assert!(epochs.first().is_none_or(|e| e.start_s == 0.0));
        debug_assert!(epochs.windows(2).all(|w| w[0].end_s == w[1].start_s));
        Self { epochs }
    }

    /// Builds a profile from breakpoints `0 = t_0 < ... < t_L` and `L` levels.
    pub fn from_breakpoints(breakpoints: &[f64], levels: &[f64]) -> Self {
        assert_eq!(breakpoints.len(), levels.len() + 1);
        Self::from_epochs(
            breakpoints
                .windows(2)
                .zip(levels)
                .map(|(w, &level_mw)| Epoch { start_s: w[0], end_s: w[1], level_mw })
                .collect(),
        )
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn end(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.end_s)
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Power level in force at `t` (right-continuous); zero past the end.
    pub fn level_at(&self, t: f64) -> f64 {
        let idx = self.epochs.partition_point(|e| e.end_s <= t);
        self.epochs.get(idx).filter(|e| e.start_s <= t).map_or(0.0, |e| e.level_mw)
    }

    /// Energy consumed over `[0, t]`.
    pub fn energy_until(&self, t: f64) -> f64 {
        self.epochs.iter().take_while(|e| e.start_s < t).map(|e| e.level_mw * (e.end_s.min(t) - e.start_s)).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.epochs.iter().map(Epoch::energy).sum()
    }

    /// Appends `tail`, which must start where this profile ends.
    pub fn concat(&self, tail: &PowerProfile) -> PowerProfile {
        let mut epochs = self.epochs.clone();
        epochs.extend(tail.epochs.iter().copied());
        PowerProfile::from_epochs(epochs)
    }
}

/// The optimal total-power schedule for a deadline: levels strictly increase
/// and the aggregate battery is empty at every breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStaircase {
    profile: PowerProfile,
}

impl PowerStaircase {
    pub fn profile(&self) -> &PowerProfile {
        &self.profile
    }

    pub fn into_profile(self) -> PowerProfile {
        self.profile
    }

    pub fn horizon(&self) -> f64 {
        self.profile.end()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.profile.epochs.iter().map(|e| e.end_s)).collect()
    }

    pub fn levels(&self) -> Vec<f64> {
        self.profile.epochs.iter().map(|e| e.level_mw).collect()
    }
}

/// Cut-off powers for the `N - 1` strongest receivers, in ladder order (mW).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CutoffVector(pub Vec<f64>);

/// Largest amount by which a schedule overdraws the harvested energy, checked
/// at every harvest instant inside the schedule and at its end. Non-positive
/// values mean the schedule is energy-causal.
pub fn causality_violation(profile: &PowerProfile, timeline: &Timeline) -> f64 {
    let end = profile.end();
    let mut worst = f64::NEG_INFINITY;
    let mut harvested = 0.0;
    for entry in timeline.entries() {
        if entry.time_s > end {
            break;
        }
        if entry.time_s > 0.0 {
            worst = worst.max(profile.energy_until(entry.time_s) - harvested);
        }
        harvested += entry.amount_mj;
    }
    worst.max(profile.energy_until(end) - timeline.energy_before(end))
}

/// Minimal-slope staircase over `(0, horizon)` using only harvests strictly
/// before the horizon.
///
/// The construction is the lower convex hull of the cumulative-harvest points
/// `(s_w, E_0 + ... + E_{w-1})` closed by `(horizon, total)`; collinear points
/// are dropped so that each segment is as long as possible.
pub fn staircase(timeline: &Timeline, horizon: f64) -> Result<PowerStaircase> {
    if !(horizon > 0.0) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let mut points = Vec::with_capacity(timeline.len() + 1);
    points.push((0.0, 0.0));
    let mut cumulative = 0.0;
    for entry in timeline.entries() {
        if entry.time_s >= horizon {
            break;
        }
        if entry.time_s > 0.0 {
            points.push((entry.time_s, cumulative));
        }
        cumulative += entry.amount_mj;
    }
    if !(cumulative > 0.0) {
        return Err(Error::EmptyTimeline);
    }
    points.push((horizon, cumulative));

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let epochs = hull
        .windows(2)
        .map(|w| Epoch { start_s: w[0].0, end_s: w[1].0, level_mw: (w[1].1 - w[0].1) / (w[1].0 - w[0].0) })
        .collect();
    Ok(PowerStaircase { profile: PowerProfile::from_epochs(epochs) })
}

/// Bits delivered to each ladder position when every epoch is split by the
/// cut-off rule.
pub fn departure_bits(
    profile: &PowerProfile,
    cutoffs: &CutoffVector,
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Vec<f64> {
    let mut bits = vec![0.0; ladder.len()];
    for epoch in profile.epochs() {
        let split = cutoff_split(epoch.level_mw, &cutoffs.0);
        let rates = crate::rate::rates_of_split(&split, ladder, bandwidth_hz);
        for (b, r) in bits.iter_mut().zip(rates) {
            *b += r * epoch.duration();
        }
    }
    bits
}

/// Per-epoch state while cut-offs are fixed strongest first.
struct CutoffSweep<'a> {
    profile: &'a PowerProfile,
    /// Power already given to stronger receivers in each epoch.
    used: Vec<f64>,
}

impl<'a> CutoffSweep<'a> {
    fn new(profile: &'a PowerProfile) -> Self {
        Self { profile, used: vec![0.0; profile.epochs().len()] }
    }

    fn max_remaining(&self) -> f64 {
        self.profile.epochs().iter().zip(&self.used).map(|(e, u)| (e.level_mw - u).max(0.0)).fold(0.0, f64::max)
    }

    /// Bits for the receiver with noise `nu` when capped at `cap`.
    fn bits(&self, cap: f64, nu: f64, bandwidth_hz: f64) -> f64 {
        self.profile
            .epochs()
            .iter()
            .zip(&self.used)
            .map(|(e, &u)| {
                let p = (e.level_mw - u).max(0.0).min(cap);
                e.duration() * bandwidth_hz * log2_1p(p / (u + nu))
            })
            .sum()
    }

    fn commit(&mut self, cap: f64) {
        for (e, u) in self.profile.epochs().iter().zip(self.used.iter_mut()) {
            *u += (e.level_mw - *u).max(0.0).min(cap);
        }
    }
}

/// Finds cut-off powers so that each of the `N - 1` strongest receivers gets
/// exactly its demand over the profile. `demands` is in ladder order and may
/// include the weakest receiver's demand, which is ignored.
pub fn solve_cutoffs(
    profile: &PowerProfile,
    demands: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Result<CutoffVector> {
    solve_cutoffs_with_residual(profile, demands, ladder, bandwidth_hz).map(|(c, _)| c)
}

/// As [`solve_cutoffs`], also returning the bits left for the weakest receiver.
fn solve_cutoffs_with_residual(
    profile: &PowerProfile,
    demands: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Result<(CutoffVector, f64)> {
    let n = ladder.len();
    let mut sweep = CutoffSweep::new(profile);
    let mut cutoffs = Vec::with_capacity(n.saturating_sub(1));
    for (position, (&demand, &nu)) in demands.iter().zip(ladder.noises_mw()).take(n - 1).enumerate() {
        let cap_max = sweep.max_remaining();
        let best = sweep.bits(cap_max, nu, bandwidth_hz);
        if best < demand * (1.0 - CUTOFF_BITS_RTOL) {
            return Err(Error::Infeasible { position });
        }
        let cap = if best <= demand {
            cap_max
        } else {
            let (mut lo, mut hi) = (0.0, cap_max);
            for _ in 0..400 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let b = sweep.bits(mid, nu, bandwidth_hz);
                if b >= demand {
                    hi = mid;
                    if b - demand <= CUTOFF_BITS_RTOL * demand {
                        break;
                    }
                } else {
                    lo = mid;
                }
            }
            hi
        };
        cutoffs.push(cap);
        sweep.commit(cap);
    }
    let residual = sweep.bits(f64::INFINITY, ladder.noises_mw()[n - 1], bandwidth_hz);
    Ok((CutoffVector(cutoffs), residual))
}

/// Whether every demand can be met by `deadline`.
fn feasible(timeline: &Timeline, deadline: f64, demands: &[f64], ladder: &NoiseLadder, bandwidth_hz: f64) -> bool {
    let Ok(stairs) = staircase(timeline, deadline) else {
        return false;
    };
    match solve_cutoffs_with_residual(stairs.profile(), demands, ladder, bandwidth_hz) {
        Ok((_, residual)) => residual >= demands[ladder.len() - 1],
        Err(_) => false,
    }
}

/// Result of the minimum completion time solve.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPlan {
    pub completion_time_s: f64,
    pub staircase: PowerStaircase,
    pub cutoffs: CutoffVector,
    pub ladder: NoiseLadder,
    pub bandwidth_hz: f64,
    /// Demands in ladder order.
    pub demands: Vec<f64>,
    /// Cumulative bits per ladder position at each staircase breakpoint.
    pub delivered: Vec<Vec<f64>>,
    /// Instant each ladder position reaches its demand.
    pub finish_times_s: Vec<f64>,
}

impl OptimalPlan {
    /// Largest gap between any two receivers' finish times.
    pub fn finish_spread(&self) -> f64 {
        let (lo, hi) =
            self.finish_times_s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        hi - lo
    }
}

/// Smallest deadline by which every receiver can be served.
pub fn min_completion_time(scenario: &Scenario) -> Result<OptimalPlan> {
    scenario.validate()?;
    let timeline = merge_arrivals(scenario);
    let ladder = order_receivers(scenario);
    let demands = ladder.to_ladder(&scenario.demands());
    min_completion_time_on(&timeline, &demands, &ladder, scenario.bandwidth_hz())
}

/// Minimum completion time for an already-merged timeline. `demands` is in
/// ladder order.
pub fn min_completion_time_on(
    timeline: &Timeline,
    demands: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> Result<OptimalPlan> {
    let start = timeline.first_positive_time().ok_or(Error::EmptyTimeline)?;
    let is_feasible = |t: f64| feasible(timeline, t, demands, ladder, bandwidth_hz);

    let mut lo = start;
    let mut step = if start > 0.0 { start } else { 1.0 };
    let mut hi = start + step;
    let mut doublings = 0;
    while !is_feasible(hi) {
        lo = hi;
        step *= 2.0;
        hi = start + step;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::Unfeasible);
        }
    }
    let (_, completion) = bisect(lo, hi, COMPLETION_RTOL, 0.0, is_feasible);

    let stairs = staircase(timeline, completion)?;
    let cutoffs = solve_cutoffs(stairs.profile(), demands, ladder, bandwidth_hz)?;
    let (delivered, finish_times_s) = trajectory(stairs.profile(), &cutoffs, ladder, bandwidth_hz, demands);
    let plan = OptimalPlan {
        completion_time_s: completion,
        staircase: stairs,
        cutoffs,
        ladder: ladder.clone(),
        bandwidth_hz,
        demands: demands.to_vec(),
        delivered,
        finish_times_s,
    };
    debug_assert!(plan.finish_spread() <= 1e-6 * completion, "receivers finish {} s apart", plan.finish_spread());
    Ok(plan)
}

/// Cumulative bits at each breakpoint and the instant each receiver is done.
fn trajectory(
    profile: &PowerProfile,
    cutoffs: &CutoffVector,
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
    demands: &[f64],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = ladder.len();
    let mut cumulative = vec![0.0; n];
    let mut delivered = vec![cumulative.clone()];
    let mut finish = vec![f64::NAN; n];
    for epoch in profile.epochs() {
        let rates = crate::rate::rates_of_split(&cutoff_split(epoch.level_mw, &cutoffs.0), ladder, bandwidth_hz);
        for k in 0..n {
            let next = cumulative[k] + rates[k] * epoch.duration();
            if finish[k].is_nan() && next >= demands[k] && rates[k] > 0.0 {
                finish[k] = epoch.start_s + (demands[k] - cumulative[k]).max(0.0) / rates[k];
            }
            cumulative[k] = next;
        }
        delivered.push(cumulative.clone());
    }
    // Receivers that land within the bit tolerance finish at the deadline.
    for f in finish.iter_mut().filter(|f| f.is_nan()) {
        *f = profile.end();
    }
    (delivered, finish)
}

/// Continues a staircase past its deadline: each later harvest is spread
/// evenly until the next one (or `beyond`), so the battery empties exactly at
/// every harvest instant. Gaps with no energy get zero power.
pub fn extend_schedule(stairs: &PowerStaircase, timeline: &Timeline, beyond: f64) -> PowerProfile {
    let base = stairs.profile().clone();
    let start = stairs.horizon();
    if !(beyond > start) {
        return base;
    }
    let later: Vec<_> = timeline.entries().iter().filter(|e| e.time_s >= start && e.time_s < beyond).collect();
    let mut tail = Vec::with_capacity(later.len() + 1);
    let mut cursor = start;
    for (i, entry) in later.iter().enumerate() {
        if entry.time_s > cursor {
            tail.push(Epoch { start_s: cursor, end_s: entry.time_s, level_mw: 0.0 });
        }
        let next = later.get(i + 1).map_or(beyond, |e| e.time_s);
        tail.push(Epoch { start_s: entry.time_s, end_s: next, level_mw: entry.amount_mj / (next - entry.time_s) });
        cursor = next;
    }
    if cursor < beyond {
        tail.push(Epoch { start_s: cursor, end_s: beyond, level_mw: 0.0 });
    }
    base.concat(&PowerProfile { epochs: tail })
}
