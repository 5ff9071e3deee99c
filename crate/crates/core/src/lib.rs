//! Simulation framework for step devices interacting with worlds under an
//! explicit incorrect-move contract.
//!
//! The pieces, bottom up:
//!
//! - [`signal`]: typed signal vectors with the Undef and Nothing symbols.
//! - [`success`]: per-priority mean rewards, limit estimation over long
//!   lives, and the lexicographic partial order between lives.
//! - [`protocol`]: the world interface, the session harness and the
//!   incorrect-move assumption checks.
//! - [`worlds`]: partially-observable Tic-Tac-Toe and Turing-machine
//!   generated worlds.
//! - [`trace`]: life recording and its JSONL persistence.
//! - [`miner`]: implication mining over recorded lives, exploiting the
//!   rejected-move sets.
//! - [`agent`], [`runner`]: policies and episode orchestration.

pub mod agent;
pub mod miner;
pub mod protocol;
pub mod runner;
pub mod signal;
pub mod success;
pub mod trace;
pub mod worlds;

pub use agent::{AgentPolicy, AgentView, MinerGuidedAgent, NoUntriedMoves, RandomAgent};
pub use miner::{Atom, Consequent, Implication, MinerConfig, MinerError, StepWindow};
pub use protocol::{
    AssumptionReport, Capabilities, CheckStatus, FuzzConfig, Observation, ProtocolError,
    RawOutcome, Session, StepOutcome, World,
};
pub use runner::{EpisodeConfig, ReplayError, RunError, SuccessReport};
pub use signal::{
    Scalar, ScalarKind, SignalError, SignalRole, SignalSeries, SignalSpec, SignalValue,
    VectorSchema,
};
pub use success::{ComparisonResult, RewardStream, SuccessCoord, SuccessError, SuccessValue};
pub use trace::{Life, LifeStep, Metadata, Revision, TraceError};
pub use worlds::{AnyState, AnyWorld, TmWorld, TttWorld, WorldIdError};
