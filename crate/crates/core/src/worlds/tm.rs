//! Worlds generated by Turing machines.
//!
//! The device's move is written as fixed-width bits at the head, followed
//! by a marker, and the machine runs until it halts. A machine that fails
//! to halt within the step budget is in deadlock: the move is incorrect and
//! the tape, head and control state are restored to the pre-move snapshot.
//! On halt, the observation and the reward are read from a fixed window at
//! the halting head position. A life is 100 games; a game running past
//! 1000 accepted steps is scored as a draw without touching the machine.

use crate::protocol::{Capabilities, Observation, RawOutcome, World};
use crate::signal::{Scalar, ScalarKind, SignalSpec, SignalValue, VectorSchema};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const DEFAULT_DEADLOCK_BUDGET: u64 = 800;
pub const GAME_STEP_CAP: u32 = 1000;
pub const GAMES_PER_LIFE: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TapeSymbol {
    Blank,
    Zero,
    One,
    Mark,
}

pub const TAPE_SYMBOLS: [TapeSymbol; 4] = [
    TapeSymbol::Blank,
    TapeSymbol::Zero,
    TapeSymbol::One,
    TapeSymbol::Mark,
];

impl TapeSymbol {
    fn code(self) -> u8 {
        match self {
            TapeSymbol::Blank => 0,
            TapeSymbol::Zero => 1,
            TapeSymbol::One => 2,
            TapeSymbol::Mark => 3,
        }
    }

    fn bit(self) -> bool {
        self == TapeSymbol::One
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadMove {
    Left,
    Right,
    Stay,
}

/// One transition-table entry: step, or halt with the output window ready.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TmAction {
    Halt,
    Step {
        next: u8,
        write: TapeSymbol,
        #[serde(rename = "move")]
        mv: HeadMove,
    },
}

/// A machine: a total transition table plus the I/O encoding widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmSpec {
    pub state_count: u8,
    /// Row-major over (state, symbol); total by construction.
    pub table: Vec<TmAction>,
    /// Bits per device move.
    pub move_bits: usize,
    /// Bits per observation; the reward takes two more bits after them.
    pub obs_bits: usize,
    pub budget: u64,
}

impl TmSpec {
    pub fn action(&self, state: u8, symbol: TapeSymbol) -> TmAction {
        self.table[state as usize * 4 + symbol.code() as usize]
    }
}

/// Uniformly seeded total transition table with at most `max_states`
/// control states. Deterministic in the seed.
pub fn random_tm_spec(seed: u64, max_states: u8) -> TmSpec {
    assert!(max_states >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state_count = rng.gen_range(1..=max_states);
    let mut table = Vec::with_capacity(state_count as usize * 4);
    for _ in 0..state_count as usize * 4 {
        // One entry in five halts; the rest keep computing.
        let action = if rng.gen_bool(0.2) {
            TmAction::Halt
        } else {
            TmAction::Step {
                next: rng.gen_range(0..state_count),
                write: TAPE_SYMBOLS[rng.gen_range(0..4)],
                mv: match rng.gen_range(0..3) {
                    0 => HeadMove::Left,
                    1 => HeadMove::Right,
                    _ => HeadMove::Stay,
                },
            }
        };
        table.push(action);
    }
    TmSpec {
        state_count,
        table,
        move_bits: 2,
        obs_bits: 2,
        budget: DEFAULT_DEADLOCK_BUDGET,
    }
}

/// Two-way infinite tape, blank by default. Kept in a normalized form so
/// equal contents always serialize to equal bytes.
#[derive(Debug, Clone, Eq)]
pub struct Tape {
    cells: VecDeque<TapeSymbol>,
    origin: i64,
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            cells: VecDeque::new(),
            origin: 0,
        }
    }

    pub fn get(&self, pos: i64) -> TapeSymbol {
        let idx = pos - self.origin;
        if idx < 0 {
            return TapeSymbol::Blank;
        }
        self.cells
            .get(idx as usize)
            .copied()
            .unwrap_or(TapeSymbol::Blank)
    }

    pub fn set(&mut self, pos: i64, symbol: TapeSymbol) {
        if self.cells.is_empty() {
            if symbol == TapeSymbol::Blank {
                return;
            }
            self.origin = pos;
            self.cells.push_back(symbol);
            return;
        }
        while pos < self.origin {
            self.cells.push_front(TapeSymbol::Blank);
            self.origin -= 1;
        }
        let idx = (pos - self.origin) as usize;
        while idx >= self.cells.len() {
            self.cells.push_back(TapeSymbol::Blank);
        }
        self.cells[idx] = symbol;
    }

    /// Trimmed view: (position of first non-blank, symbols up to the last
    /// non-blank). Empty tapes read as (0, []).
    fn trimmed(&self) -> (i64, Vec<TapeSymbol>) {
        let first = self.cells.iter().position(|s| *s != TapeSymbol::Blank);
        let last = self.cells.iter().rposition(|s| *s != TapeSymbol::Blank);
        match (first, last) {
            (Some(a), Some(b)) => (
                self.origin + a as i64,
                self.cells.iter().skip(a).take(b - a + 1).copied().collect(),
            ),
            _ => (0, Vec::new()),
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let (start, symbols) = self.trimmed();
        let mut out = Vec::with_capacity(12 + symbols.len());
        out.extend_from_slice(&start.to_le_bytes());
        out.extend_from_slice(&(symbols.len() as u32).to_le_bytes());
        out.extend(symbols.iter().map(|s| s.code()));
        out
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for Tape {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

/// Tape, head and control state: everything the machine itself owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmConfig {
    pub tape: Tape,
    pub head: i64,
    pub control: u8,
}

impl TmConfig {
    fn new() -> Self {
        TmConfig {
            tape: Tape::new(),
            head: 0,
            control: 0,
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = self.tape.canonical_bytes();
        out.extend_from_slice(&self.head.to_le_bytes());
        out.push(self.control);
        out
    }
}

/// Machine configuration plus the session-side game counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmWorldState {
    pub config: TmConfig,
    pub game_step: u32,
    pub games: u32,
    /// Set when the last reward was injected by the game cap rather than
    /// decoded from the tape.
    pub injected_draw: bool,
}

/// Write the move at the head, then run until halt or budget exhaustion.
/// Returns the halting configuration, or None on deadlock.
pub fn run_move(
    spec: &TmSpec,
    start: &TmConfig,
    move_bits: &[bool],
    budget: u64,
) -> Option<TmConfig> {
    let mut config = start.clone();
    for (i, bit) in move_bits.iter().enumerate() {
        config.tape.set(
            config.head + i as i64,
            if *bit {
                TapeSymbol::One
            } else {
                TapeSymbol::Zero
            },
        );
    }
    config
        .tape
        .set(config.head + move_bits.len() as i64, TapeSymbol::Mark);

    let mut steps = 0u64;
    loop {
        match spec.action(config.control, config.tape.get(config.head)) {
            TmAction::Halt => return Some(config),
            TmAction::Step { next, write, mv } => {
                if steps >= budget {
                    return None;
                }
                config.tape.set(config.head, write);
                match mv {
                    HeadMove::Left => config.head -= 1,
                    HeadMove::Right => config.head += 1,
                    HeadMove::Stay => {}
                }
                config.control = next;
                steps += 1;
            }
        }
    }
}

/// Game-cap bookkeeping, applied after an accepted step with no decoded
/// reward. Injects one draw and starts the next game once the counter
/// reaches the cap; the machine configuration is never touched.
pub fn apply_game_cap(state: &TmWorldState) -> (TmWorldState, Option<SignalValue>) {
    if state.game_step >= GAME_STEP_CAP {
        let mut next = state.clone();
        next.game_step = 0;
        next.games += 1;
        next.injected_draw = true;
        (next, Some(SignalValue::Concrete(Scalar::Finite(1))))
    } else {
        (state.clone(), None)
    }
}

pub struct TmWorld {
    spec: TmSpec,
    schema: VectorSchema,
    id: String,
}

impl TmWorld {
    pub fn from_spec(spec: TmSpec, id: String) -> Self {
        let inputs = (0..spec.obs_bits)
            .map(|i| SignalSpec::input(&format!("obs{i}"), ScalarKind::Boolean))
            .collect();
        let outputs = (0..spec.move_bits)
            .map(|i| SignalSpec::output(&format!("move{i}"), ScalarKind::Boolean))
            .collect();
        let rewards = vec![SignalSpec::reward("game", ScalarKind::finite(3))];
        let schema = VectorSchema::new(inputs, outputs, rewards).expect("generated names unique");
        TmWorld { spec, schema, id }
    }

    pub fn random(seed: u64, max_states: u8) -> Self {
        Self::from_spec(
            random_tm_spec(seed, max_states),
            format!("tm:{seed}:{max_states}"),
        )
    }

    pub fn spec(&self) -> &TmSpec {
        &self.spec
    }

    fn move_bits(output: &[SignalValue]) -> Vec<bool> {
        output
            .iter()
            .map(|v| matches!(v, SignalValue::Concrete(Scalar::Bool(true))))
            .collect()
    }

    fn decode_observation(&self, config: &TmConfig) -> Vec<SignalValue> {
        (0..self.spec.obs_bits)
            .map(|i| {
                SignalValue::Concrete(Scalar::Bool(config.tape.get(config.head + i as i64).bit()))
            })
            .collect()
    }

    /// The two bits after the observation window: 0 no reward, then loss,
    /// draw, victory.
    fn decode_reward(&self, config: &TmConfig) -> Option<u64> {
        let base = config.head + self.spec.obs_bits as i64;
        let hi = config.tape.get(base).bit() as u64;
        let lo = config.tape.get(base + 1).bit() as u64;
        match hi * 2 + lo {
            0 => None,
            raw => Some(raw - 1),
        }
    }

    /// Run one accepted move end to end: machine run, reward decoding and
    /// game bookkeeping. None means deadlock.
    fn process(
        &self,
        state: &TmWorldState,
        output: &[SignalValue],
    ) -> Option<(TmWorldState, Vec<SignalValue>)> {
        let halted = run_move(
            &self.spec,
            &state.config,
            &Self::move_bits(output),
            self.spec.budget,
        )?;
        let decoded = self.decode_reward(&halted);
        let mut next = TmWorldState {
            config: halted,
            game_step: state.game_step,
            games: state.games,
            injected_draw: false,
        };
        let reward = match decoded {
            Some(v) => {
                next.games += 1;
                next.game_step = 0;
                SignalValue::Concrete(Scalar::Finite(v))
            }
            None => {
                next.game_step += 1;
                let (capped, injected) = apply_game_cap(&next);
                next = capped;
                injected.unwrap_or(SignalValue::Nothing)
            }
        };
        Some((next, vec![reward]))
    }
}

impl World for TmWorld {
    type State = TmWorldState;

    fn id(&self) -> String {
        self.id.clone()
    }

    fn schema(&self) -> &VectorSchema {
        &self.schema
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            // Death states are possible: every move may deadlock.
            guarantees_nonempty_correct: false,
            guarantees_monotone_incorrect: true,
        }
    }

    fn initial_state(&self, _seed: u64) -> TmWorldState {
        // The machine itself is the world; the table already came from a
        // seed, so every life starts from the same blank configuration.
        TmWorldState {
            config: TmConfig::new(),
            game_step: 0,
            games: 0,
            injected_draw: false,
        }
    }

    fn view(&self, state: &TmWorldState) -> Observation {
        let reward = if state.injected_draw {
            SignalValue::Concrete(Scalar::Finite(1))
        } else {
            match self.decode_reward(&state.config) {
                Some(v) => SignalValue::Concrete(Scalar::Finite(v)),
                None => SignalValue::Nothing,
            }
        };
        Observation {
            inputs: self.decode_observation(&state.config),
            rewards: vec![reward],
        }
    }

    fn correct(&self, state: &TmWorldState, output: &[SignalValue]) -> bool {
        run_move(
            &self.spec,
            &state.config,
            &Self::move_bits(output),
            self.spec.budget,
        )
        .is_some()
    }

    fn transition(
        &self,
        state: &TmWorldState,
        output: &[SignalValue],
    ) -> (TmWorldState, Vec<SignalValue>) {
        self.process(state, output)
            .expect("transition requires a correct move")
    }

    fn attempt(&self, state: &TmWorldState, output: &[SignalValue]) -> RawOutcome<TmWorldState> {
        match self.process(state, output) {
            Some((next, reward)) => RawOutcome::Accepted {
                state: next,
                reward,
            },
            // Deadlock: the snapshot was never touched, hand it back as is.
            None => RawOutcome::Rejected {
                state: state.clone(),
            },
        }
    }

    fn serialize_state(&self, state: &TmWorldState) -> Vec<u8> {
        let mut out = state.config.canonical_bytes();
        out.extend_from_slice(&state.game_step.to_le_bytes());
        out.extend_from_slice(&state.games.to_le_bytes());
        out.push(state.injected_draw as u8);
        out
    }

    fn life_complete(&self, state: &TmWorldState) -> bool {
        state.games >= GAMES_PER_LIFE
    }

    fn spec_json(&self) -> Option<serde_json::Value> {
        Some(serde_json::to_value(&self.spec).expect("spec serializes"))
    }
}

/// An echo machine: halts immediately, so the observation window returns
/// exactly the move bits that were just written.
pub fn echo_spec() -> TmSpec {
    TmSpec {
        state_count: 1,
        table: vec![TmAction::Halt; 4],
        move_bits: 2,
        obs_bits: 2,
        budget: DEFAULT_DEADLOCK_BUDGET,
    }
}

/// Loops forever whenever the head reads a One, halts otherwise: moves
/// whose encoding starts with a set bit are deadlocks.
pub fn loop_on_one_spec() -> TmSpec {
    let mut table = vec![TmAction::Halt; 4];
    table[TapeSymbol::One.code() as usize] = TmAction::Step {
        next: 0,
        write: TapeSymbol::One,
        mv: HeadMove::Stay,
    };
    TmSpec {
        state_count: 1,
        table,
        move_bits: 2,
        obs_bits: 2,
        budget: DEFAULT_DEADLOCK_BUDGET,
    }
}

/// Loops on every symbol: every move deadlocks, the world is born dead.
pub fn always_loop_spec() -> TmSpec {
    let table = TAPE_SYMBOLS
        .iter()
        .map(|s| TmAction::Step {
            next: 0,
            write: *s,
            mv: HeadMove::Stay,
        })
        .collect();
    TmSpec {
        state_count: 1,
        table,
        move_bits: 2,
        obs_bits: 2,
        budget: DEFAULT_DEADLOCK_BUDGET,
    }
}
