//! The two built-in world families and the id registry the runner uses.

pub mod tm;
pub mod ttt;

pub use tm::{TmSpec, TmWorld, TmWorldState};
pub use ttt::{TttOutput, TttState, TttWorld};

use crate::protocol::{Capabilities, Observation, RawOutcome, World};
use crate::signal::{SignalValue, VectorSchema};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldIdError {
    #[error("unknown world id '{0}' (expected 'ttt-eye' or 'tm:<seed>:<max_states>')")]
    Unknown(String),
    #[error("bad tm world id '{0}': {1}")]
    BadTmId(String, String),
}

/// A registered world, dispatched by id string.
pub enum AnyWorld {
    Ttt(TttWorld),
    Tm(TmWorld),
}

#[derive(Debug, Clone)]
pub enum AnyState {
    Ttt(TttState),
    Tm(TmWorldState),
}

impl AnyWorld {
    /// Resolve a world id: `ttt-eye`, or `tm:<seed>:<max_states>`.
    pub fn from_id(id: &str) -> Result<AnyWorld, WorldIdError> {
        if id == ttt::TTT_WORLD_ID {
            return Ok(AnyWorld::Ttt(TttWorld::new()));
        }
        if let Some(rest) = id.strip_prefix("tm:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 2 {
                return Err(WorldIdError::BadTmId(
                    id.to_string(),
                    "expected tm:<seed>:<max_states>".into(),
                ));
            }
            let seed: u64 = parts[0]
                .parse()
                .map_err(|e| WorldIdError::BadTmId(id.to_string(), format!("seed: {e}")))?;
            let max_states: u8 = parts[1]
                .parse()
                .map_err(|e| WorldIdError::BadTmId(id.to_string(), format!("max_states: {e}")))?;
            if max_states == 0 {
                return Err(WorldIdError::BadTmId(
                    id.to_string(),
                    "max_states must be >= 1".into(),
                ));
            }
            return Ok(AnyWorld::Tm(TmWorld::random(seed, max_states)));
        }
        Err(WorldIdError::Unknown(id.to_string()))
    }
}

macro_rules! dispatch {
    ($world:expr, $state:expr, |$w:ident, $s:ident| $body:expr) => {
        match ($world, $state) {
            (AnyWorld::Ttt($w), AnyState::Ttt($s)) => $body,
            (AnyWorld::Tm($w), AnyState::Tm($s)) => $body,
            _ => panic!("state does not belong to this world"),
        }
    };
}

impl World for AnyWorld {
    type State = AnyState;

    fn id(&self) -> String {
        match self {
            AnyWorld::Ttt(w) => w.id(),
            AnyWorld::Tm(w) => w.id(),
        }
    }

    fn schema(&self) -> &VectorSchema {
        match self {
            AnyWorld::Ttt(w) => w.schema(),
            AnyWorld::Tm(w) => w.schema(),
        }
    }

    fn capabilities(&self) -> Capabilities {
        match self {
            AnyWorld::Ttt(w) => w.capabilities(),
            AnyWorld::Tm(w) => w.capabilities(),
        }
    }

    fn initial_state(&self, seed: u64) -> AnyState {
        match self {
            AnyWorld::Ttt(w) => AnyState::Ttt(w.initial_state(seed)),
            AnyWorld::Tm(w) => AnyState::Tm(w.initial_state(seed)),
        }
    }

    fn view(&self, state: &AnyState) -> Observation {
        dispatch!(self, state, |w, s| w.view(s))
    }

    fn correct(&self, state: &AnyState, output: &[SignalValue]) -> bool {
        dispatch!(self, state, |w, s| w.correct(s, output))
    }

    fn transition(&self, state: &AnyState, output: &[SignalValue]) -> (AnyState, Vec<SignalValue>) {
        match (self, state) {
            (AnyWorld::Ttt(w), AnyState::Ttt(s)) => {
                let (next, reward) = w.transition(s, output);
                (AnyState::Ttt(next), reward)
            }
            (AnyWorld::Tm(w), AnyState::Tm(s)) => {
                let (next, reward) = w.transition(s, output);
                (AnyState::Tm(next), reward)
            }
            _ => panic!("state does not belong to this world"),
        }
    }

    fn attempt(&self, state: &AnyState, output: &[SignalValue]) -> RawOutcome<AnyState> {
        match (self, state) {
            (AnyWorld::Ttt(w), AnyState::Ttt(s)) => match w.attempt(s, output) {
                RawOutcome::Accepted { state, reward } => RawOutcome::Accepted {
                    state: AnyState::Ttt(state),
                    reward,
                },
                RawOutcome::Rejected { state } => RawOutcome::Rejected {
                    state: AnyState::Ttt(state),
                },
            },
            (AnyWorld::Tm(w), AnyState::Tm(s)) => match w.attempt(s, output) {
                RawOutcome::Accepted { state, reward } => RawOutcome::Accepted {
                    state: AnyState::Tm(state),
                    reward,
                },
                RawOutcome::Rejected { state } => RawOutcome::Rejected {
                    state: AnyState::Tm(state),
                },
            },
            _ => panic!("state does not belong to this world"),
        }
    }

    fn serialize_state(&self, state: &AnyState) -> Vec<u8> {
        dispatch!(self, state, |w, s| w.serialize_state(s))
    }

    fn life_complete(&self, state: &AnyState) -> bool {
        dispatch!(self, state, |w, s| w.life_complete(s))
    }

    fn spec_json(&self) -> Option<serde_json::Value> {
        match self {
            AnyWorld::Ttt(w) => w.spec_json(),
            AnyWorld::Tm(w) => w.spec_json(),
        }
    }
}
