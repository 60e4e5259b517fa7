//! Seeded stochastic scenarios: exponential gaps between harvests and
//! uniformly distributed harvest amounts.
//!
//! Each transmitter's stream is drawn from its own ChaCha8 stream keyed by
//! `(master_seed, run_index)` with the transmitter id as stream number, so a
//! stream never depends on the horizon it was generated to. Generating to a
//! longer horizon reproduces the shorter one as a prefix.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelSpec, EnergyArrival, ReceiverDemand, Scenario, TransmitterProfile};

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for run `run_index` under `master_seed`.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(run_index))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmitterGen {
    pub id: u32,
    /// Mean gap between consecutive harvests (s).
    pub mean_gap_s: f64,
    /// Harvest amounts are uniform on `(0, amount_max_mj)`.
    pub amount_max_mj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mj")]
pub enum InitialEnergy {
    /// One harvest-sized draw per transmitter, available at t = 0.
    #[default]
    Draw,
    /// Empty batteries at t = 0.
    Zero,
    /// The same fixed amount for every transmitter.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    pub transmitters: Vec<TransmitterGen>,
    #[serde(default)]
    pub initial_energy: InitialEnergy,
    /// Receiver demands in bits; receiver ids are `1..=N`.
    pub demands_bits: Vec<f64>,
    pub bandwidth_hz: f64,
    /// Per-receiver path loss (dB), shared by every transmitter.
    pub path_loss_db: Vec<f64>,
    /// Per-receiver noise spectral density (W/Hz), shared by every transmitter.
    pub noise_psd: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
}

impl GenParams {
    /// Three transmitters and three receivers with the harvest statistics
    /// and channel of the reference experiment.
    ///
    /// The channel is calibrated so that the equivalent noises are
    /// `1e-3, 10^-2.9, 10^-2.8` mW and demands are in Mbit; this is the
    /// scaling under which the reference completion times and cut-off powers
    /// agree with each other.
    pub fn baseline() -> Self {
        Self {
            transmitters: vec![
                TransmitterGen { id: 1, mean_gap_s: 0.01, amount_max_mj: 0.01 },
                TransmitterGen { id: 2, mean_gap_s: 0.1, amount_max_mj: 0.02 },
                TransmitterGen { id: 3, mean_gap_s: 1.0, amount_max_mj: 0.03 },
            ],
            initial_energy: InitialEnergy::Draw,
            demands_bits: vec![15e6, 10e6, 7e6],
            bandwidth_hz: 1e6,
            path_loss_db: vec![100.0, 101.0, 102.0],
            noise_psd: vec![1e-22; 3],
            master_seed: 0,
        }
    }

    pub fn with_demands(mut self, demands_bits: Vec<f64>) -> Self {
        self.demands_bits = demands_bits;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.transmitters.is_empty() {
            return bad("at least one transmitter is required".into());
        }
        for t in &self.transmitters {
            if !(t.mean_gap_s > 0.0 && t.mean_gap_s.is_finite()) {
                return bad(format!("transmitter {}: mean_gap_s must be positive", t.id));
            }
            if !(t.amount_max_mj > 0.0 && t.amount_max_mj.is_finite()) {
                return bad(format!("transmitter {}: amount_max_mj must be positive", t.id));
            }
        }
        let n = self.demands_bits.len();
        if n == 0 || self.path_loss_db.len() != n || self.noise_psd.len() != n {
            return bad("demands_bits, path_loss_db and noise_psd must have one entry per receiver".into());
        }
        if let InitialEnergy::Fixed(e) = self.initial_energy {
            if !(e >= 0.0) {
                return bad("fixed initial energy must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let params: GenParams = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        params.check()?;
        Ok(params)
    }
}

fn transmitter_stream(params: &GenParams, spec: &TransmitterGen, run_index: u64, horizon_s: f64) -> TransmitterProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(params.master_seed, run_index));
    rng.set_stream(u64::from(spec.id));
    let amount = |rng: &mut ChaCha8Rng| spec.amount_max_mj * rng.sample::<f64, _>(Open01);
    let initial = match params.initial_energy {
        InitialEnergy::Draw => amount(&mut rng),
        InitialEnergy::Zero => 0.0,
        InitialEnergy::Fixed(e) => e,
    };
    let mut arrivals = Vec::new();
    let mut t = 0.0;
    loop {
        let gap: f64 = rng.sample::<f64, _>(Exp1) * spec.mean_gap_s;
        let e = amount(&mut rng);
        t += gap;
        if t >= horizon_s {
            break;
        }
        // A zero gap would repeat a timestamp; fold it into the previous harvest.
        match arrivals.last_mut() {
            Some(EnergyArrival { time_s, amount_mj }) if *time_s == t => *amount_mj += e,
            _ if t <= 0.0 => continue,
            _ => arrivals.push(EnergyArrival::new(t, e)),
        }
    }
    TransmitterProfile::new(spec.id, initial, arrivals)
}

/// Draws the scenario for `run_index` with harvests up to `horizon_s`.
pub fn generate(params: &GenParams, run_index: u64, horizon_s: f64) -> Result<Scenario> {
    params.check()?;
    if !(horizon_s > 0.0) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon_s}")));
    }
    let scenario = Scenario {
        transmitters: params
            .transmitters
            .iter()
            .map(|spec| transmitter_stream(params, spec, run_index, horizon_s))
            .collect(),
        receivers: params
            .demands_bits
            .iter()
            .enumerate()
            .map(|(i, &bits)| ReceiverDemand { id: i as u32 + 1, bits })
            .collect(),
        channel: ChannelSpec::uniform(
            params.bandwidth_hz,
            params.transmitters.len(),
            &params.path_loss_db,
            &params.noise_psd,
        ),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// A generated scenario together with what is needed to extend it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub params: GenParams,
    pub run_index: u64,
    pub horizon_s: f64,
    pub scenario: Scenario,
}

impl GeneratedScenario {
    pub fn new(params: GenParams, run_index: u64, horizon_s: f64) -> Result<Self> {
        let scenario = generate(&params, run_index, horizon_s)?;
        Ok(Self { params, run_index, horizon_s, scenario })
    }

    /// Regenerates to a later horizon; the existing harvests are kept as-is.
    pub fn extend(&self, new_horizon_s: f64) -> Result<Self> {
        if new_horizon_s < self.horizon_s {
            return Err(Error::Parameter(format!("cannot extend from {} s back to {new_horizon_s} s", self.horizon_s)));
        }
        if new_horizon_s == self.horizon_s {
            return Ok(self.clone());
        }
        Self::new(self.params.clone(), self.run_index, new_horizon_s)
    }

    /// The scenario as seen with harvests strictly before `horizon_s` only.
    pub fn truncated(&self, horizon_s: f64) -> Scenario {
        let mut s = self.scenario.clone();
        for tx in &mut s.transmitters {
            tx.arrivals.retain(|a| a.time_s < horizon_s);
        }
        s
    }
}
