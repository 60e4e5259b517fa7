use std::fmt;

use thiserror::Error;

/// A single violated scenario invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoTransmitters,
    NoReceivers,
    DuplicateTransmitterId(u32),
    DuplicateReceiverId(u32),
    NonPositiveBandwidth(f64),
    NonPositiveDemand { receiver: u32, bits: f64 },
    NegativeInitialEnergy { transmitter: u32, energy_mj: f64 },
    UnsortedArrivals { transmitter: u32, index: usize },
    NonPositiveArrivalTime { transmitter: u32, index: usize, time_s: f64 },
    NonPositiveArrivalAmount { transmitter: u32, index: usize, amount_mj: f64 },
    NonFinite { what: &'static str },
    ChannelShape { expected: (usize, usize), found: (usize, usize) },
    NonPositiveGain { transmitter: usize, receiver: usize },
    NonPositiveNoise { transmitter: usize, receiver: usize },
    NonUniformChannel { receiver: u32, min_mw: f64, max_mw: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoTransmitters => write!(f, "scenario has no transmitters"),
            NoReceivers => write!(f, "scenario has no receivers"),
            DuplicateTransmitterId(id) => write!(f, "duplicate transmitter id {id}"),
            DuplicateReceiverId(id) => write!(f, "duplicate receiver id {id}"),
            NonPositiveBandwidth(b) => write!(f, "bandwidth_hz must be positive, got {b}"),
            NonPositiveDemand { receiver, bits } => {
                write!(f, "receiver {receiver} demands {bits} bits; demand must be positive")
            }
            NegativeInitialEnergy { transmitter, energy_mj } => {
                write!(f, "transmitter {transmitter} has negative initial energy {energy_mj} mJ")
            }
            UnsortedArrivals { transmitter, index } => {
                write!(f, "transmitter {transmitter}: arrival {index} is not strictly after its predecessor")
            }
            NonPositiveArrivalTime { transmitter, index, time_s } => {
                write!(f, "transmitter {transmitter}: arrival {index} at {time_s} s must be after t = 0")
            }
            NonPositiveArrivalAmount { transmitter, index, amount_mj } => {
                write!(f, "transmitter {transmitter}: arrival {index} carries {amount_mj} mJ; must be positive")
            }
            NonFinite { what } => write!(f, "non-finite value in {what}"),
            ChannelShape { expected, found } => write!(
                f,
                "channel matrices must be {}x{} (transmitters x receivers), found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            NonPositiveGain { transmitter, receiver } => {
                write!(f, "path gain for transmitter #{transmitter} -> receiver #{receiver} must be positive")
            }
            NonPositiveNoise { transmitter, receiver } => {
                write!(f, "noise psd for transmitter #{transmitter} -> receiver #{receiver} must be positive")
            }
            NonUniformChannel { receiver, min_mw, max_mw } => {
                write!(f, "receiver {receiver}: equivalent noise differs across transmitters ({min_mw} .. {max_mw} mW)")
            }
        }
    }
}

/// Every violation found in a scenario, reported together.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<Violation>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation error(s)", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationErrors),

    #[error("no energy arrives before the horizon; no schedule is possible")]
    EmptyTimeline,

    #[error("receiver at ladder position {position} cannot be served before the horizon")]
    Infeasible { position: usize },

    #[error("energy stream is exhausted before the demands can be met")]
    Unfeasible,

    #[error("power schedule ends at {end_s} s with {outstanding_bits} bits still outstanding")]
    NeverCompletes { end_s: f64, outstanding_bits: f64 },

    #[error("power level {level_mw} mW requested at {time_s} s while every battery is empty")]
    ScheduleGap { time_s: f64, level_mw: f64 },

    #[error("oracle grid too coarse: {coarse} vs {fine} after halving the time step")]
    GridTooCoarse { coarse: f64, fine: f64 },

    #[error("run {run}: {source}")]
    Run {
        run: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error originates in scenario or parameter validation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_) | Error::Parameter(_) | Error::Json(_) => true,
            Error::Run { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
