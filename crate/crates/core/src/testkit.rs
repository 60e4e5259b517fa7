//! Brute-force reference solvers for checking the fast ones on small
//! instances.
//!
//! Nothing here shares code with [`crate::schedule`] or [`crate::rate`]:
//! rates are evaluated directly with `log2`, energy availability is recomputed
//! from the raw timeline entries, and all searches are grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Timeline;
use crate::schedule::{Epoch, PowerProfile, PowerStaircase};

/// Relative change in the oracle time allowed when the time step is halved.
pub const GRID_STABILITY_RTOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Time grid step (s).
    pub time_step_s: f64,
    /// Number of quanta the harvested energy is divided into.
    pub energy_levels: usize,
    /// Search stops here (s).
    pub max_time_s: f64,
}

impl OracleConfig {
    /// `steps` time steps up to `max_time_s`, sixteen energy quanta per step.
    pub fn for_horizon(max_time_s: f64, steps: usize) -> Self {
        Self { time_step_s: max_time_s / steps as f64, energy_levels: 16 * steps, max_time_s }
    }

    fn check(&self) -> Result<()> {
        if !(self.time_step_s > 0.0) || !(self.max_time_s > 0.0) || self.energy_levels == 0 {
            return Err(Error::Parameter("oracle grid needs a positive step, horizon and level count".into()));
        }
        Ok(())
    }

    fn halved(&self) -> Self {
        Self { time_step_s: self.time_step_s / 2.0, energy_levels: self.energy_levels * 2, ..*self }
    }
}

fn single_rate(power_mw: f64, noise_mw: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + power_mw / noise_mw).log2()
}

/// Energy usable from time `t` on: every harvest at or before `t`.
fn harvested_by(timeline: &Timeline, t: f64) -> f64 {
    timeline.entries().iter().filter(|e| e.time_s <= t).map(|e| e.amount_mj).sum()
}

/// Grid time at which a single receiver can first hold `demand_bits`.
fn dp_min_time(
    timeline: &Timeline,
    demand_bits: f64,
    noise_mw: f64,
    bandwidth_hz: f64,
    cfg: &OracleConfig,
) -> Option<f64> {
    let dt = cfg.time_step_s;
    let steps = (cfg.max_time_s / dt).ceil() as usize;
    let quantum = harvested_by(timeline, cfg.max_time_s) / cfg.energy_levels as f64;
    if !(quantum > 0.0) {
        return None;
    }
    let step_bits: Vec<f64> =
        (0..=cfg.energy_levels).map(|q| dt * single_rate(q as f64 * quantum / dt, noise_mw, bandwidth_hz)).collect();
    // best[c]: most bits delivered having consumed c quanta.
    let mut best = vec![f64::NEG_INFINITY; cfg.energy_levels + 1];
    best[0] = 0.0;
    let mut reached = 0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let cap = ((harvested_by(timeline, t) / quantum) * (1.0 + 1e-12)).floor() as usize;
        let cap = cap.min(cfg.energy_levels).max(reached);
        let mut next = vec![f64::NEG_INFINITY; cfg.energy_levels + 1];
        step_into(&best[..=reached], &step_bits, &mut next[..=cap]);
        reached = cap;
        best = next;
        if best.iter().copied().fold(f64::NEG_INFINITY, f64::max) >= demand_bits {
            return Some((k + 1) as f64 * dt);
        }
    }
    None
}

/// `out[j] = max_{i <= j} prev[i] + gain[j - i]`. The gain is concave, so
/// the maximising `i` never decreases in `j` and divide and conquer applies.
fn step_into(prev: &[f64], gain: &[f64], out: &mut [f64]) {
    fn solve(prev: &[f64], gain: &[f64], out: &mut [f64], lo: usize, hi: usize, from: usize, to: usize) {
        if lo > hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let mut arg = from;
        let mut val = f64::NEG_INFINITY;
        for i in from..=to.min(mid).min(prev.len() - 1) {
            let v = prev[i] + gain[mid - i];
            if v > val {
                val = v;
                arg = i;
            }
        }
        out[mid] = val;
        if mid > lo {
            solve(prev, gain, out, lo, mid - 1, from, arg);
        }
        solve(prev, gain, out, mid + 1, hi, arg, to);
    }
    let hi = out.len() - 1;
    solve(prev, gain, out, 0, hi, 0, prev.len() - 1);
}

/// Minimum completion time for one receiver by dynamic programming over a
/// time grid and quantised consumed energy. Fails with
/// [`Error::GridTooCoarse`] when halving the step moves the answer by more
/// than 2%.
pub fn oracle_min_time_single_rx(
    timeline: &Timeline,
    demand_bits: f64,
    noise_mw: f64,
    bandwidth_hz: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.check()?;
    if demand_bits <= 0.0 {
        return Ok(0.0);
    }
    let coarse = dp_min_time(timeline, demand_bits, noise_mw, bandwidth_hz, cfg).ok_or(Error::Unfeasible)?;
    let fine = dp_min_time(timeline, demand_bits, noise_mw, bandwidth_hz, &cfg.halved()).ok_or(Error::Unfeasible)?;
    if (coarse - fine).abs() > GRID_STABILITY_RTOL * fine {
        return Err(Error::GridTooCoarse { coarse, fine });
    }
    Ok(fine)
}

/// [`oracle_min_time_single_rx`] on a grid of `steps` steps that ends just
/// past a first, unchecked estimate taken on `(0, max_time_s)`.
pub fn oracle_min_time_refined(
    timeline: &Timeline,
    demand_bits: f64,
    noise_mw: f64,
    bandwidth_hz: f64,
    max_time_s: f64,
    steps: usize,
) -> Result<f64> {
    let probe = OracleConfig::for_horizon(max_time_s, steps);
    probe.check()?;
    if demand_bits <= 0.0 {
        return Ok(0.0);
    }
    let rough = dp_min_time(timeline, demand_bits, noise_mw, bandwidth_hz, &probe).ok_or(Error::Unfeasible)?;
    let cfg = OracleConfig::for_horizon(rough * 1.05, steps);
    oracle_min_time_single_rx(timeline, demand_bits, noise_mw, bandwidth_hz, &cfg)
}

/// Random piecewise-constant schedules over `(0, horizon)` that respect
/// energy causality. The staircase comes first, then `count - 1` random ones.
pub fn random_feasible_schedules(
    timeline: &Timeline,
    stairs: &PowerStaircase,
    count: usize,
    seed: u64,
) -> Vec<PowerProfile> {
    if count == 0 {
        return Vec::new();
    }
    let horizon = stairs.horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![stairs.profile().clone()];
    let peak = harvested_by(timeline, horizon) / horizon * 4.0;
    while out.len() < count {
        let pieces = rng.random_range(1..=8);
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.random_range(0.0..horizon)).collect();
        cuts.push(0.0);
        cuts.push(horizon);
        cuts.sort_by(f64::total_cmp);
        let levels: Vec<f64> = (0..pieces).map(|_| rng.random_range(0.0..peak)).collect();
        out.push(repair(timeline, &cuts, &levels, horizon));
    }
    out
}

/// Lowers levels wherever the proposed schedule would spend energy that has
/// not arrived yet.
fn repair(timeline: &Timeline, cuts: &[f64], levels: &[f64], horizon: f64) -> PowerProfile {
    let mut marks: Vec<f64> = cuts.to_vec();
    marks.extend(timeline.entries().iter().map(|e| e.time_s).filter(|&t| t > 0.0 && t < horizon));
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut spent = 0.0;
    let mut epochs = Vec::new();
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = cuts.partition_point(|&c| c <= a) - 1;
        let wanted = levels[piece.min(levels.len() - 1)];
        let room = (harvested_by(timeline, a) - spent).max(0.0);
        let level = wanted.min(room / (b - a));
        spent += level * (b - a);
        epochs.push(Epoch { start_s: a, end_s: b, level_mw: level });
    }
    PowerProfile::from_epochs(epochs)
}

/// Bits a single receiver gets from `profile`.
pub fn single_rx_bits(profile: &PowerProfile, noise_mw: f64, bandwidth_hz: f64) -> f64 {
    profile.epochs().iter().map(|e| (e.end_s - e.start_s) * single_rate(e.level_mw, noise_mw, bandwidth_hz)).sum()
}

/// Bits the stronger of two receivers gets when it is given
/// `min(level, cutoff)` and the rest goes to the weaker one.
fn strong_bits(profile: &PowerProfile, cutoff: f64, noise_mw: f64, bandwidth_hz: f64) -> f64 {
    profile
        .epochs()
        .iter()
        .map(|e| (e.end_s - e.start_s) * single_rate(e.level_mw.min(cutoff), noise_mw, bandwidth_hz))
        .sum()
}

/// Cut-off power of the stronger receiver in a two-receiver ladder, found by
/// scanning `grid` points and zooming into the bracketing cell five times.
pub fn oracle_cutoff_two_rx(
    profile: &PowerProfile,
    demand_strong_bits: f64,
    noise_strong_mw: f64,
    bandwidth_hz: f64,
    grid: usize,
) -> f64 {
    let grid = grid.max(2);
    let mut lo = 0.0;
    let mut hi = profile.epochs().iter().map(|e| e.level_mw).fold(0.0, f64::max);
    for _ in 0..5 {
        let step = (hi - lo) / grid as f64;
        let mut found = None;
        for i in 0..=grid {
            let p = lo + step * i as f64;
            if strong_bits(profile, p, noise_strong_mw, bandwidth_hz) >= demand_strong_bits {
                found = Some(i);
                break;
            }
        }
        match found {
            Some(0) => return lo,
            Some(i) => {
                hi = lo + step * i as f64;
                lo = hi - step;
            }
            None => return hi,
        }
    }
    0.5 * (lo + hi)
}
