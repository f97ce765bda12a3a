//! Opponent policies. The opponent sees the full board and only ever plays
//! valid moves.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{enumerate_reachable_states, Action, Board, CellMark, GameStatus, StateIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OpponentModel {
    #[serde(rename = "uniform")]
    UniformRandom,
    /// Game-theoretic best reply, uniform among co-optimal moves. Among
    /// moves with the same outcome, faster wins and slower losses rank higher.
    #[serde(rename = "minimax")]
    Minimax,
    /// Minimax with probability `1 - eps`, uniform over valid moves with `eps`.
    #[serde(rename = "eps_minimax")]
    EpsilonMinimax(f64),
}

impl OpponentModel {
    pub fn epsilon_minimax(eps: f64) -> Result<OpponentModel> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidProbability(eps));
        }
        Ok(OpponentModel::EpsilonMinimax(eps))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OpponentModel::EpsilonMinimax(eps) if !(0.0..=1.0).contains(&eps) => {
                Err(Error::InvalidProbability(eps))
            }
            _ => Ok(()),
        }
    }

    /// Distribution over O's valid moves on `board`, listed in action order.
    /// Moves with zero probability are omitted.
    pub fn distribution(&self, board: &Board) -> Result<Vec<(Action, f64)>> {
        opponent_distribution(*self, board)
    }
}

impl fmt::Display for OpponentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpponentModel::UniformRandom => write!(f, "uniform"),
            OpponentModel::Minimax => write!(f, "minimax"),
            OpponentModel::EpsilonMinimax(eps) => write!(f, "eps:{eps}"),
        }
    }
}

impl FromStr for OpponentModel {
    type Err = Error;

    /// Accepts `uniform`, `minimax` or `eps:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(OpponentModel::UniformRandom),
            "minimax" => Ok(OpponentModel::Minimax),
            other => {
                let eps = other
                    .strip_prefix("eps:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidState(format!(
                            "unknown opponent '{other}', expected uniform|minimax|eps:<p>"
                        ))
                    })?;
                OpponentModel::epsilon_minimax(eps)
            }
        }
    }
}

pub fn opponent_distribution(model: OpponentModel, board: &Board) -> Result<Vec<(Action, f64)>> {
    if board.status().is_terminal() {
        return Err(Error::TerminalState);
    }
    if board.to_move() != CellMark::O {
        return Err(Error::WrongTurn(CellMark::O));
    }
    let valid = board.valid_actions();
    let uniform = 1.0 / valid.len() as f64;
    let dist = match model {
        OpponentModel::UniformRandom => valid.into_iter().map(|a| (a, uniform)).collect(),
        OpponentModel::Minimax => minimax_replies(board, &valid),
        OpponentModel::EpsilonMinimax(eps) => {
            model.validate()?;
            let best = minimax_replies(board, &valid);
            valid
                .iter()
                .map(|&a| {
                    let greedy = best.iter().find(|(b, _)| *b == a).map_or(0.0, |&(_, p)| p);
                    (a, (1.0 - eps) * greedy + eps * uniform)
                })
                .filter(|&(_, p)| p > 0.0)
                .collect()
        }
    };
    Ok(dist)
}

fn minimax_replies(board: &Board, valid: &[Action]) -> Vec<(Action, f64)> {
    let scored: Vec<(Action, i8)> = valid
        .iter()
        .map(|&a| {
            let next = board.apply(a, CellMark::O).expect("valid O move");
            (a, minimax_score(&next))
        })
        .collect();
    let best = scored
        .iter()
        .map(|&(_, v)| v)
        .min()
        .expect("non-terminal board has moves");
    let winners: Vec<Action> = scored
        .into_iter()
        .filter(|&(_, v)| v == best)
        .map(|(a, _)| a)
        .collect();
    let p = 1.0 / winners.len() as f64;
    winners.into_iter().map(|a| (a, p)).collect()
}

/// Game-theoretic value of `board` for X (+1 win, 0 draw, -1 loss) under
/// optimal play by both sides.
pub fn game_value(board: &Board) -> i8 {
    minimax_score(board).signum()
}

/// Depth-aware minimax score from X's point of view: `±(10 - plies)` at the
/// final board of optimal play, 0 for a draw. The sign is the game value;
/// the magnitude makes the winner prefer faster wins and the loser slower
/// losses.
fn minimax_score(board: &Board) -> i8 {
    terminal_score(board).unwrap_or_else(|| {
        *score_table()
            .get(&board.encode())
            .expect("every reachable board is in the minimax table")
    })
}

fn terminal_score(board: &Board) -> Option<i8> {
    let remaining = 10 - board.plies() as i8;
    match board.status() {
        GameStatus::XWins => Some(remaining),
        GameStatus::OWins => Some(-remaining),
        GameStatus::Draw => Some(0),
        GameStatus::InProgress => None,
    }
}

fn score_table() -> &'static HashMap<StateIndex, i8> {
    static TABLE: OnceLock<HashMap<StateIndex, i8>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut memo = HashMap::with_capacity(enumerate_reachable_states().len());
        minimax_fill(&Board::empty(), &mut memo);
        memo
    })
}

fn minimax_fill(board: &Board, memo: &mut HashMap<StateIndex, i8>) -> i8 {
    if let Some(score) = terminal_score(board) {
        return score;
    }
    let key = board.encode();
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let player = board.to_move();
    let children = board
        .valid_actions()
        .into_iter()
        .map(|a| minimax_fill(&board.apply(a, player).expect("valid move"), memo));
    let v = if player == CellMark::X {
        children.max()
    } else {
        children.min()
    }
    .expect("non-terminal board has moves");
    memo.insert(key, v);
    v
}
