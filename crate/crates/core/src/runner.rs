//! Episode execution, success reporting and trace replay.

use crate::agent::{AgentPolicy, AgentView, NoUntriedMoves};
use crate::protocol::{ProtocolError, Session, StepOutcome, World};
use crate::success::{
    success_finite, success_limit_estimate, success_series, SuccessValue, DEFAULT_EPSILON,
    DEFAULT_TAIL_FRACTION,
};
use crate::trace::{Life, Metadata};
use crate::worlds::{AnyWorld, WorldIdError};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    /// Accepted moves to run for, unless the life completes or dies first.
    pub max_steps: u64,
    pub world_seed: u64,
    pub agent_seed: u64,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("agent violated the protocol: {0}")]
    AgentViolation(String),
}

/// Drive one device through one world until `max_steps` accepted moves,
/// life completion, or death. Deterministic in the two seeds.
pub fn run_episode<W: World>(
    world: &W,
    agent: &mut dyn AgentPolicy,
    cfg: &EpisodeConfig,
) -> Result<Life, RunError> {
    assert!(cfg.max_steps >= 1, "an episode needs at least one step");
    let mut metadata = Metadata::new(&world.id(), agent.id(), cfg.world_seed, cfg.agent_seed);
    metadata.config = json!({
        "max_steps": cfg.max_steps,
        "agent": agent.config_json(),
    });
    metadata.world_spec = world.spec_json();

    let mut session = Session::new(world, cfg.world_seed, metadata);
    while session.t() < cfg.max_steps && !world.life_complete(session.state()) {
        loop {
            let proposal = {
                let prev = session.life().steps.last();
                let view = AgentView {
                    schema: world.schema(),
                    inputs_now: &session.observation().inputs,
                    rewards_now: &session.observation().rewards,
                    inputs_prev: prev.map(|s| s.input.as_slice()),
                    output_prev: prev.map(|s| s.output.as_slice()),
                    tried_incorrect: session.tried_incorrect(),
                };
                match agent.decide(&view) {
                    Ok(p) => p,
                    Err(NoUntriedMoves) => {
                        log::info!("death at t={}: every output was rejected", session.t());
                        session.record_death();
                        return Ok(session.into_life());
                    }
                }
            };
            match session.attempt(&proposal) {
                Ok(StepOutcome::Accepted { .. }) => break,
                Ok(StepOutcome::Rejected) => continue,
                Err(e @ ProtocolError::DuplicateIncorrectMove { .. }) => {
                    return Err(RunError::AgentViolation(e.to_string()));
                }
                Err(e) => return Err(RunError::AgentViolation(e.to_string())),
            }
        }
    }
    log::debug!("episode finished after {} accepted steps", session.t());
    Ok(session.into_life())
}

/// Success of a recorded life: the exact value at the end plus the
/// tail-window limit estimate over the prefix series.
#[derive(Debug, Clone, Serialize)]
pub struct SuccessReport {
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub death: Option<u64>,
    pub final_success: SuccessValue,
    pub limit_estimate: SuccessValue,
}

pub fn report_success(life: &Life) -> SuccessReport {
    let stream = life.reward_stream();
    let final_success = success_finite(&stream, stream.len());
    let series = success_series(&stream);
    let limit_estimate = if series.is_empty() {
        final_success.clone()
    } else {
        success_limit_estimate(&series, DEFAULT_TAIL_FRACTION, DEFAULT_EPSILON)
    };
    SuccessReport {
        steps: life.len(),
        death: life.death,
        final_success,
        limit_estimate,
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    WorldId(#[from] WorldIdError),
    #[error("replay mismatch at t={t}: {what}")]
    Mismatch { t: u64, what: String },
}

/// Re-run a trace's accepted outputs through a fresh world with the
/// recorded seed and verify that every observation, rejection and reward
/// comes out identically.
pub fn replay_against<W: World>(world: &W, life: &Life) -> Result<(), ReplayError> {
    let mut state = world.initial_state(life.metadata.world_seed);
    for step in &life.steps {
        let mismatch = |what: String| ReplayError::Mismatch { t: step.t, what };
        let observation = world.view(&state);
        if observation.inputs != step.input {
            return Err(mismatch(format!(
                "input {:?} != recorded {:?}",
                observation.inputs, step.input
            )));
        }
        for attempt in &step.incorrect {
            if world.correct(&state, attempt) {
                return Err(mismatch(format!(
                    "recorded incorrect move {attempt:?} is correct on replay"
                )));
            }
        }
        if !world.correct(&state, &step.output) {
            return Err(mismatch(format!(
                "recorded accepted move {:?} is incorrect on replay",
                step.output
            )));
        }
        let (next, reward) = world.transition(&state, &step.output);
        if reward != step.reward {
            return Err(mismatch(format!(
                "reward {:?} != recorded {:?}",
                reward, step.reward
            )));
        }
        state = next;
    }
    Ok(())
}

/// Replay against the world reconstructed from the trace's own metadata.
pub fn replay(life: &Life) -> Result<(), ReplayError> {
    let world = AnyWorld::from_id(&life.metadata.world)?;
    replay_against(&world, life)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::RandomAgent;
    use crate::trace::life_to_jsonl;
    use crate::worlds::{tm, TmWorld, TttWorld};

    fn cfg(max_steps: u64, seed: u64) -> EpisodeConfig {
        EpisodeConfig {
            max_steps,
            world_seed: seed,
            agent_seed: seed,
        }
    }

    #[test]
    fn episodes_are_deterministic() {
        let world = TttWorld::new();
        let run = |seed| {
            let mut agent = RandomAgent::new(seed);
            run_episode(&world, &mut agent, &cfg(100, seed)).unwrap()
        };
        assert_eq!(life_to_jsonl(&run(42)), life_to_jsonl(&run(42)));
        assert_ne!(life_to_jsonl(&run(42)), life_to_jsonl(&run(43)));
    }

    #[test]
    fn single_step_episode() {
        let world = TttWorld::new();
        let mut agent = RandomAgent::new(1);
        let life = run_episode(&world, &mut agent, &cfg(1, 1)).unwrap();
        assert_eq!(life.len(), 1);
        assert!(life.death.is_none());
    }

    #[test]
    fn dead_world_ends_the_life_early() {
        let world = TmWorld::from_spec(tm::always_loop_spec(), "tm-dead".into());
        let mut agent = RandomAgent::new(5);
        let life = run_episode(&world, &mut agent, &cfg(50, 5)).unwrap();
        assert_eq!(life.death, Some(0));
        assert!(life.is_empty());
    }

    #[test]
    fn replay_reproduces_the_trace() {
        let world = TttWorld::new();
        let mut agent = RandomAgent::new(8);
        let life = run_episode(&world, &mut agent, &cfg(60, 8)).unwrap();
        replay_against(&world, &life).unwrap();
        replay(&life).unwrap();
    }

    #[test]
    fn replay_detects_tampering() {
        let world = TttWorld::new();
        let mut agent = RandomAgent::new(8);
        let mut life = run_episode(&world, &mut agent, &cfg(30, 8)).unwrap();
        life.metadata.world_seed = life.metadata.world_seed.wrapping_add(1);
        // A different opponent seed diverges quickly on any put_cross.
        let outcome = replay(&life);
        if life.steps.iter().any(|s| {
            s.output[2] == crate::signal::SignalValue::Concrete(crate::signal::Scalar::Bool(true))
        }) {
            assert!(outcome.is_err());
        }
    }

    #[test]
    fn stubborn_agents_are_surfaced_as_violations() {
        use crate::agent::{AgentPolicy, AgentView, NoUntriedMoves};
        use crate::signal::{Scalar, SignalValue};

        // Proposes "move up" forever, ignoring the tried set. The first
        // attempt is accepted (the eye starts in the middle row), the
        // second is rejected at the wall, and the third repeats a
        // rejected move, which the harness must refuse.
        struct Stubborn;
        impl AgentPolicy for Stubborn {
            fn id(&self) -> &str {
                "stubborn"
            }
            fn decide(
                &mut self,
                _view: &AgentView<'_>,
            ) -> Result<Vec<SignalValue>, NoUntriedMoves> {
                Ok(vec![
                    SignalValue::Concrete(Scalar::Finite(1)),
                    SignalValue::Concrete(Scalar::Finite(0)),
                    SignalValue::Concrete(Scalar::Bool(false)),
                    SignalValue::Concrete(Scalar::Bool(false)),
                ])
            }
        }

        let world = TttWorld::new();
        let mut agent = Stubborn;
        let err = run_episode(&world, &mut agent, &cfg(10, 0)).unwrap_err();
        match err {
            RunError::AgentViolation(msg) => {
                assert!(
                    msg.contains("already rejected"),
                    "unexpected message: {msg}"
                )
            }
        }
    }

    #[test]
    fn parallel_episodes_match_serial_runs() {
        let serial: Vec<String> = (0..4u64)
            .map(|seed| {
                let world = TttWorld::new();
                let mut agent = RandomAgent::new(seed);
                life_to_jsonl(&run_episode(&world, &mut agent, &cfg(80, seed)).unwrap())
            })
            .collect();
        let handles: Vec<_> = (0..4u64)
            .map(|seed| {
                std::thread::spawn(move || {
                    let world = TttWorld::new();
                    let mut agent = RandomAgent::new(seed);
                    life_to_jsonl(&run_episode(&world, &mut agent, &cfg(80, seed)).unwrap())
                })
            })
            .collect();
        for (serial_trace, handle) in serial.into_iter().zip(handles) {
            assert_eq!(handle.join().unwrap(), serial_trace);
        }
    }

    #[test]
    fn core_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<crate::signal::SignalValue>();
        assert_send_sync::<crate::signal::VectorSchema>();
        assert_send_sync::<crate::trace::Life>();
        assert_send_sync::<crate::success::SuccessValue>();
        assert_send_sync::<TttWorld>();
        assert_send_sync::<TmWorld>();
        assert_send_sync::<crate::worlds::AnyWorld>();
    }

    #[test]
    fn success_report_on_an_empty_life() {
        let world = TmWorld::from_spec(tm::always_loop_spec(), "tm-dead".into());
        let mut agent = RandomAgent::new(5);
        let life = run_episode(&world, &mut agent, &cfg(10, 5)).unwrap();
        let report = report_success(&life);
        assert_eq!(report.steps, 0);
        assert_eq!(report.final_success, SuccessValue::exact(&[0.0]));
    }
}
