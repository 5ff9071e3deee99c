//! The abstract world interface and the session harness that enforces the
//! incorrect-move contract.
//!
//! A world exposes `view`, `correct` and `transition` over an opaque state.
//! The session forwards the device's output vectors: a correct move advances
//! time and is recorded in the life, an incorrect move leaves the world
//! untouched and only grows the tried set. Repeating a move that was already
//! rejected since the last accepted move is a protocol error, so no caller
//! can spin forever on the same rejection.

use crate::signal::{validate_vector, SignalError, SignalValue, VectorSchema};
use crate::trace::{vector_to_json, Life, LifeStep, Metadata};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

/// Everything the device receives at one step: the information part and
/// the reward part of the input vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub inputs: Vec<SignalValue>,
    pub rewards: Vec<SignalValue>,
}

/// Promises a world makes about its Correct function.
#[derive(Debug, Clone, Copy, Default)]
pub struct Capabilities {
    /// Every reachable state has at least one correct move (no death).
    pub guarantees_nonempty_correct: bool,
    /// A rejected move stays rejected while the state is unchanged.
    pub guarantees_monotone_incorrect: bool,
}

/// What the world itself reports for one submitted move.
#[derive(Debug, Clone)]
pub enum RawOutcome<S> {
    Accepted { state: S, reward: Vec<SignalValue> },
    Rejected { state: S },
}

/// A world as an in-process plugin: pure functions over an opaque,
/// serializable state. Determinism comes from the explicit seed.
pub trait World {
    type State: Clone;

    /// Identifier under which the runner knows this world.
    fn id(&self) -> String;

    fn schema(&self) -> &VectorSchema;

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    fn initial_state(&self, seed: u64) -> Self::State;

    /// The input vector for the current state. Pure.
    fn view(&self, state: &Self::State) -> Observation;

    /// Whether the output vector is a correct move in this state. Pure.
    fn correct(&self, state: &Self::State, output: &[SignalValue]) -> bool;

    /// Apply a correct move. Callers must check `correct` first; the
    /// session never calls this for a rejected move.
    fn transition(
        &self,
        state: &Self::State,
        output: &[SignalValue],
    ) -> (Self::State, Vec<SignalValue>);

    /// Canonical byte encoding, injective on reachable states. Used to
    /// verify that incorrect moves leave the state untouched.
    fn serialize_state(&self, state: &Self::State) -> Vec<u8>;

    /// Submit one move. The default routes through `correct` and
    /// `transition`; worlds with their own rejection machinery (budgeted
    /// simulation, rollback) override this.
    fn attempt(&self, state: &Self::State, output: &[SignalValue]) -> RawOutcome<Self::State> {
        if self.correct(state, output) {
            let (next, reward) = self.transition(state, output);
            RawOutcome::Accepted {
                state: next,
                reward,
            }
        } else {
            RawOutcome::Rejected {
                state: state.clone(),
            }
        }
    }

    /// True once the world considers the life over (e.g. all games played).
    fn life_complete(&self, _state: &Self::State) -> bool {
        false
    }

    /// Machine-readable world parameters for archival in trace headers,
    /// when the id alone does not reproduce the world.
    fn spec_json(&self) -> Option<serde_json::Value> {
        None
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("output vector violates the schema: {0}")]
    SchemaViolation(#[from] SignalError),
    #[error("move was already rejected in this state: {output}")]
    DuplicateIncorrectMove { output: String },
    #[error("output space is not finite: signal '{signal}' has an unbounded kind")]
    InfiniteOutputSpace { signal: String },
}

/// Result of one submitted move, as seen by the device. A rejection is the
/// implicit `bad_move = 1` signal; it carries no observation, no reward and
/// does not advance time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted {
        observation: Observation,
        reward: Vec<SignalValue>,
    },
    Rejected,
}

/// A running interaction between one device and one world.
pub struct Session<'w, W: World> {
    world: &'w W,
    state: W::State,
    t: u64,
    tried_incorrect: Vec<Vec<SignalValue>>,
    observation: Observation,
    life: Life,
}

impl<'w, W: World> Session<'w, W> {
    pub fn new(world: &'w W, seed: u64, metadata: Metadata) -> Self {
        let state = world.initial_state(seed);
        let observation = world.view(&state);
        let life = Life::new(world.schema().clone(), metadata);
        Session {
            world,
            state,
            t: 0,
            tried_incorrect: Vec::new(),
            observation,
            life,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn state(&self) -> &W::State {
        &self.state
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    /// Moves rejected since the last accepted move, in attempt order.
    pub fn tried_incorrect(&self) -> &[Vec<SignalValue>] {
        &self.tried_incorrect
    }

    pub fn life(&self) -> &Life {
        &self.life
    }

    pub fn into_life(self) -> Life {
        self.life
    }

    pub fn world(&self) -> &'w W {
        self.world
    }

    /// Mark the life as ended by death at the current time.
    pub fn record_death(&mut self) {
        self.life.death = Some(self.t);
    }

    /// Submit one output vector. Accepted moves advance time, append a step
    /// to the life and clear the tried set; rejected moves only grow it.
    pub fn attempt(&mut self, output: &[SignalValue]) -> Result<StepOutcome, ProtocolError> {
        let output = validate_vector(&self.world.schema().outputs, output)?;
        if self.tried_incorrect.contains(&output) {
            return Err(ProtocolError::DuplicateIncorrectMove {
                output: vector_to_json(&output).to_string(),
            });
        }
        match self.world.attempt(&self.state, &output) {
            RawOutcome::Rejected { state } => {
                self.state = state;
                self.tried_incorrect.push(output);
                Ok(StepOutcome::Rejected)
            }
            RawOutcome::Accepted { state, reward } => {
                let step = LifeStep {
                    t: self.t,
                    input: self.observation.inputs.clone(),
                    incorrect: std::mem::take(&mut self.tried_incorrect),
                    output,
                    reward: reward.clone(),
                };
                debug_assert!(crate::trace::check_step(&self.life.schema, &step).is_ok());
                self.life.push_step(step);
                self.state = state;
                self.t += 1;
                self.observation = self.world.view(&self.state);
                Ok(StepOutcome::Accepted {
                    observation: self.observation.clone(),
                    reward,
                })
            }
        }
    }
}

/// Every output vector the schema admits, in canonical odometer order
/// (first signal slowest). Errors if any output signal is unbounded.
pub fn enumerate_outputs(schema: &VectorSchema) -> Result<Vec<Vec<SignalValue>>, ProtocolError> {
    let mut domains = Vec::with_capacity(schema.outputs.len());
    for spec in &schema.outputs {
        let values =
            spec.kind
                .domain_values()
                .ok_or_else(|| ProtocolError::InfiniteOutputSpace {
                    signal: spec.name.clone(),
                })?;
        domains.push(values);
    }
    let mut out: Vec<Vec<SignalValue>> = vec![Vec::new()];
    for domain in &domains {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for prefix in &out {
            for v in domain {
                let mut vector = prefix.clone();
                vector.push(SignalValue::Concrete(*v));
                next.push(vector);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Materialize the set the Correct function denotes: every output vector
/// that is a correct move in this state.
pub fn legal_moves<W: World>(
    world: &W,
    state: &W::State,
) -> Result<Vec<Vec<SignalValue>>, ProtocolError> {
    Ok(enumerate_outputs(world.schema())?
        .into_iter()
        .filter(|o| world.correct(state, o))
        .collect())
}

/// Fuzzing budget for the assumption checks.
#[derive(Debug, Clone)]
pub struct FuzzConfig {
    /// One random walk per seed.
    pub seeds: Vec<u64>,
    /// Incorrect moves probed per visited state.
    pub trials: usize,
    /// Accepted moves per walk.
    pub horizon: usize,
}

impl FuzzConfig {
    pub fn quick(seed_count: u64) -> Self {
        FuzzConfig {
            seeds: (0..seed_count).collect(),
            trials: 4,
            horizon: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotGuaranteed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    /// Hex of the canonical state serialization.
    pub state: String,
    pub output: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub assumption: u8,
    pub status: CheckStatus,
    pub counterexample: Option<Counterexample>,
}

/// Outcome of fuzzing a world against the incorrect-move assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub states_visited: u64,
    pub incorrect_attempts: u64,
}

impl AssumptionReport {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            out.push_str(&serde_json::to_string(check).expect("report serializes"));
            out.push('\n');
        }
        out.push_str(
            &json!({
                "states_visited": self.states_visited,
                "incorrect_attempts": self.incorrect_attempts,
            })
            .to_string(),
        );
        out.push('\n');
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Fuzz a world against assumptions 1 (incorrect moves do not change the
/// state), 2 (a rejected move stays rejected) and 4 (some correct move
/// always exists). Worlds that admit death get `not_guaranteed` instead of
/// a failure on assumption 4.
pub fn check_world_assumptions<W: World>(
    world: &W,
    fuzz: &FuzzConfig,
) -> Result<AssumptionReport, ProtocolError> {
    let outputs = enumerate_outputs(world.schema())?;
    let mut a1 = AssumptionCheck {
        assumption: 1,
        status: CheckStatus::Pass,
        counterexample: None,
    };
    let mut a2 = AssumptionCheck {
        assumption: 2,
        status: CheckStatus::Pass,
        counterexample: None,
    };
    let mut a4 = AssumptionCheck {
        assumption: 4,
        status: if world.capabilities().guarantees_nonempty_correct {
            CheckStatus::Pass
        } else {
            CheckStatus::NotGuaranteed
        },
        counterexample: None,
    };
    let mut states_visited = 0u64;
    let mut incorrect_attempts = 0u64;

    for &seed in &fuzz.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = world.initial_state(seed);
        'walk: for _ in 0..fuzz.horizon {
            states_visited += 1;
            let legal: Vec<&Vec<SignalValue>> = outputs
                .iter()
                .filter(|o| world.correct(&state, o))
                .collect();
            let incorrect: Vec<&Vec<SignalValue>> = outputs
                .iter()
                .filter(|o| !world.correct(&state, o))
                .collect();

            if legal.is_empty() {
                if a4.status == CheckStatus::Pass {
                    a4.status = CheckStatus::Fail;
                    a4.counterexample = Some(Counterexample {
                        state: hex(&world.serialize_state(&state)),
                        output: serde_json::Value::Null,
                    });
                }
                break 'walk;
            }

            for _ in 0..fuzz.trials.min(incorrect.len()) {
                let m = incorrect[rng.gen_range(0..incorrect.len())];
                incorrect_attempts += 1;
                let before = world.serialize_state(&state);
                match world.attempt(&state, m) {
                    RawOutcome::Accepted { .. } => {
                        if a2.status == CheckStatus::Pass {
                            a2.status = CheckStatus::Fail;
                            a2.counterexample = Some(Counterexample {
                                state: hex(&before),
                                output: vector_to_json(m),
                            });
                        }
                    }
                    RawOutcome::Rejected { state: after_state } => {
                        let after = world.serialize_state(&after_state);
                        if after != before && a1.status == CheckStatus::Pass {
                            a1.status = CheckStatus::Fail;
                            a1.counterexample = Some(Counterexample {
                                state: hex(&before),
                                output: vector_to_json(m),
                            });
                        }
                        // Repeat on the post-rejection state: still incorrect?
                        let again = world.attempt(&after_state, m);
                        if matches!(again, RawOutcome::Accepted { .. })
                            && a2.status == CheckStatus::Pass
                        {
                            a2.status = CheckStatus::Fail;
                            a2.counterexample = Some(Counterexample {
                                state: hex(&before),
                                output: vector_to_json(m),
                            });
                        }
                        state = after_state;
                    }
                }
            }

            let chosen = legal[rng.gen_range(0..legal.len())].clone();
            match world.attempt(&state, &chosen) {
                RawOutcome::Accepted { state: next, .. } => state = next,
                RawOutcome::Rejected { .. } => {
                    // Correct said yes, attempt said no: monotonicity broken.
                    if a2.status == CheckStatus::Pass {
                        a2.status = CheckStatus::Fail;
                        a2.counterexample = Some(Counterexample {
                            state: hex(&world.serialize_state(&state)),
                            output: vector_to_json(&chosen),
                        });
                    }
                    break 'walk;
                }
            }
            if world.life_complete(&state) {
                break 'walk;
            }
        }
    }

    Ok(AssumptionReport {
        checks: vec![a1, a2, a4],
        states_visited,
        incorrect_attempts,
    })
}
