//! Tic-Tac-Toe seen through a one-cell eye.
//!
//! The device never sees the whole board. Its input is the symbol under the
//! eye; its move is a composite of four actions (eye motion on two axes,
//! placing an X, requesting a new game) that is correct only if every
//! sub-action is. The world answers each accepted X with one O from a
//! seeded built-in opponent. Rewards arrive on the view that follows the
//! game-ending move: 0 loss, 1 draw, 2 victory, Nothing otherwise.

use crate::protocol::{Capabilities, Observation, World};
use crate::signal::{Scalar, ScalarKind, SignalSpec, SignalValue, VectorSchema};

pub const TTT_WORLD_ID: &str = "ttt-eye";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    X,
    O,
}

impl Cell {
    fn code(self) -> u8 {
        match self {
            Cell::Empty => 0,
            Cell::X => 1,
            Cell::O => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameOutcome {
    Loss,
    Draw,
    Victory,
}

impl GameOutcome {
    fn reward_value(self) -> u64 {
        match self {
            GameOutcome::Loss => 0,
            GameOutcome::Draw => 1,
            GameOutcome::Victory => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    InPlay,
    Terminal(GameOutcome),
}

/// Full world state: board, eye position, phase, the reward waiting to be
/// delivered on the next view, and the opponent's generator state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TttState {
    pub board: [Cell; 9],
    pub eye_row: u8,
    pub eye_col: u8,
    pub phase: Phase,
    pub pending_reward: Option<GameOutcome>,
    pub opponent_rng: u64,
}

/// The four-coordinate composite action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TttOutput {
    /// 0 stay, 1 up, 2 down.
    pub vertical: u8,
    /// 0 stay, 1 left, 2 right.
    pub horizontal: u8,
    pub put_cross: bool,
    pub new_game: bool,
}

impl TttOutput {
    pub fn new(vertical: u8, horizontal: u8, put_cross: bool, new_game: bool) -> Self {
        debug_assert!(vertical < 3 && horizontal < 3);
        TttOutput {
            vertical,
            horizontal,
            put_cross,
            new_game,
        }
    }

    pub fn to_vector(self) -> Vec<SignalValue> {
        vec![
            SignalValue::Concrete(Scalar::Finite(self.vertical as u64)),
            SignalValue::Concrete(Scalar::Finite(self.horizontal as u64)),
            SignalValue::Concrete(Scalar::Bool(self.put_cross)),
            SignalValue::Concrete(Scalar::Bool(self.new_game)),
        ]
    }

    pub fn from_vector(v: &[SignalValue]) -> Option<Self> {
        if v.len() != 4 {
            return None;
        }
        let fin = |sv: &SignalValue| match sv {
            SignalValue::Concrete(Scalar::Finite(x)) if *x < 3 => Some(*x as u8),
            SignalValue::Nothing => Some(0),
            _ => None,
        };
        let b = |sv: &SignalValue| match sv {
            SignalValue::Concrete(Scalar::Bool(x)) => Some(*x),
            SignalValue::Nothing => Some(false),
            _ => None,
        };
        Some(TttOutput {
            vertical: fin(&v[0])?,
            horizontal: fin(&v[1])?,
            put_cross: b(&v[2])?,
            new_game: b(&v[3])?,
        })
    }
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

fn game_result(board: &[Cell; 9]) -> Option<GameOutcome> {
    for line in &LINES {
        let [a, b, c] = *line;
        if board[a] != Cell::Empty && board[a] == board[b] && board[b] == board[c] {
            return Some(match board[a] {
                Cell::X => GameOutcome::Victory,
                Cell::O => GameOutcome::Loss,
                Cell::Empty => unreachable!(),
            });
        }
    }
    if board.iter().all(|c| *c != Cell::Empty) {
        Some(GameOutcome::Draw)
    } else {
        None
    }
}

/// The world: one input signal (the eye), four output signals, one
/// reward level.
pub struct TttWorld {
    schema: VectorSchema,
}

impl Default for TttWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl TttWorld {
    pub fn new() -> Self {
        TttWorld {
            schema: VectorSchema::new(
                vec![SignalSpec::input("cell", ScalarKind::finite(3))],
                vec![
                    SignalSpec::output("vertical", ScalarKind::finite(3)),
                    SignalSpec::output("horizontal", ScalarKind::finite(3)),
                    SignalSpec::output("put_cross", ScalarKind::Boolean),
                    SignalSpec::output("new_game", ScalarKind::Boolean),
                ],
                vec![SignalSpec::reward("game", ScalarKind::finite(3))],
            )
            .expect("fixed schema is valid"),
        }
    }

    /// Why a move is incorrect, if it is. Checks the sub-actions in the
    /// order put_cross, vertical, horizontal; one bad sub-action poisons
    /// the whole move.
    pub fn move_error(state: &TttState, out: &TttOutput) -> Option<&'static str> {
        if out.put_cross {
            if state.phase != Phase::InPlay {
                return Some("put_cross: game is over, request a new game");
            }
            if state.board[Self::eye_index(state)] != Cell::Empty {
                return Some("put_cross: the cell under the eye is not empty");
            }
        }
        match out.vertical {
            1 if state.eye_row == 0 => return Some("vertical: eye is at the top wall"),
            2 if state.eye_row == 2 => return Some("vertical: eye is at the bottom wall"),
            _ => {}
        }
        match out.horizontal {
            1 if state.eye_col == 0 => return Some("horizontal: eye is at the left wall"),
            2 if state.eye_col == 2 => return Some("horizontal: eye is at the right wall"),
            _ => {}
        }
        None
    }

    fn eye_index(state: &TttState) -> usize {
        state.eye_row as usize * 3 + state.eye_col as usize
    }
}

impl World for TttWorld {
    type State = TttState;

    fn id(&self) -> String {
        TTT_WORLD_ID.to_string()
    }

    fn schema(&self) -> &VectorSchema {
        &self.schema
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            guarantees_nonempty_correct: true,
            guarantees_monotone_incorrect: true,
        }
    }

    fn initial_state(&self, seed: u64) -> TttState {
        TttState {
            board: [Cell::Empty; 9],
            eye_row: 1,
            eye_col: 1,
            phase: Phase::InPlay,
            pending_reward: None,
            opponent_rng: seed,
        }
    }

    fn view(&self, state: &TttState) -> Observation {
        Observation {
            inputs: vec![SignalValue::Concrete(Scalar::Finite(
                state.board[Self::eye_index(state)].code() as u64,
            ))],
            rewards: vec![match state.pending_reward {
                Some(outcome) => SignalValue::Concrete(Scalar::Finite(outcome.reward_value())),
                None => SignalValue::Nothing,
            }],
        }
    }

    fn correct(&self, state: &TttState, output: &[SignalValue]) -> bool {
        match TttOutput::from_vector(output) {
            Some(out) => Self::move_error(state, &out).is_none(),
            None => false,
        }
    }

    fn transition(&self, state: &TttState, output: &[SignalValue]) -> (TttState, Vec<SignalValue>) {
        let out = TttOutput::from_vector(output).expect("validated output");
        debug_assert!(Self::move_error(state, &out).is_none());
        let mut board = state.board;
        let mut phase = state.phase;
        let mut rng = state.opponent_rng;
        let mut outcome = None;

        // The X goes first; everything else commutes.
        if out.put_cross {
            board[Self::eye_index(state)] = Cell::X;
            if let Some(result) = game_result(&board) {
                outcome = Some(result);
            } else {
                let empties: Vec<usize> = (0..9).filter(|&i| board[i] == Cell::Empty).collect();
                let choice = empties[(splitmix_next(&mut rng) % empties.len() as u64) as usize];
                board[choice] = Cell::O;
                outcome = game_result(&board);
            }
            if let Some(result) = outcome {
                phase = Phase::Terminal(result);
            }
        }

        let mut eye_row = state.eye_row;
        let mut eye_col = state.eye_col;
        match out.vertical {
            1 => eye_row -= 1,
            2 => eye_row += 1,
            _ => {}
        }
        match out.horizontal {
            1 => eye_col -= 1,
            2 => eye_col += 1,
            _ => {}
        }

        if out.new_game {
            board = [Cell::Empty; 9];
            phase = Phase::InPlay;
        }

        let next = TttState {
            board,
            eye_row,
            eye_col,
            phase,
            pending_reward: outcome,
            opponent_rng: rng,
        };
        let reward = vec![match outcome {
            Some(result) => SignalValue::Concrete(Scalar::Finite(result.reward_value())),
            None => SignalValue::Nothing,
        }];
        (next, reward)
    }

    /// 9 board bytes row-major, eye row, eye col, phase byte, pending byte,
    /// 8 opponent-seed bytes.
    fn serialize_state(&self, state: &TttState) -> Vec<u8> {
        let mut out = Vec::with_capacity(21);
        for cell in &state.board {
            out.push(cell.code());
        }
        out.push(state.eye_row);
        out.push(state.eye_col);
        out.push(match state.phase {
            Phase::InPlay => 0,
            Phase::Terminal(GameOutcome::Loss) => 1,
            Phase::Terminal(GameOutcome::Draw) => 2,
            Phase::Terminal(GameOutcome::Victory) => 3,
        });
        out.push(match state.pending_reward {
            None => 3,
            Some(outcome) => outcome.reward_value() as u8,
        });
        out.extend_from_slice(&state.opponent_rng.to_le_bytes());
        out
    }
}
