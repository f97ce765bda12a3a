//! Exact fully-observable Q-function by memoized expectimax.
//!
//! For every non-terminal reachable board with X to move and every action:
//!
//! ```text
//! Q(s, a) = -1                         if a's cell is occupied
//!         = +1 / 0                     if X's move wins / draws
//!         = Σ p(a_O) · r(s'')          otherwise, with
//! r(s'')  = -1 (O wins), 0 (draw), max_a' Q(s'', a') (game continues)
//! ```
//!
//! No discounting; rewards are attributed on the terminating transition.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{enumerate_reachable_states, Action, Board, CellMark, GameStatus, StateIndex};
use crate::opponent::{opponent_distribution, OpponentModel};

pub const QTABLE_VERSION: u64 = 1;

/// One Q value per action, in action order `0..9`.
pub type QRow = [f64; 9];

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    opponent: OpponentModel,
    entries: BTreeMap<StateIndex, QRow>,
}

impl QTable {
    pub fn opponent(&self) -> OpponentModel {
        self.opponent
    }

    pub fn gamma(&self) -> f64 {
        1.0
    }

    pub fn get(&self, state: StateIndex) -> Option<&QRow> {
        self.entries.get(&state)
    }

    pub fn row(&self, state: StateIndex) -> Result<&QRow> {
        self.entries.get(&state).ok_or(Error::MissingQEntry(state))
    }

    /// `V(s) = max_a Q(s, a)`.
    pub fn value(&self, state: StateIndex) -> Result<f64> {
        Ok(self
            .row(state)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (StateIndex, &QRow)> {
        self.entries.iter().map(|(&s, r)| (s, r))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_qtable(self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<QTable> {
        load_qtable(path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<QTable> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        QTable::from_value(raw)
    }

    fn to_file(&self) -> QTableFile {
        QTableFile {
            version: QTABLE_VERSION,
            opponent: self.opponent,
            gamma: 1.0,
            entries: self
                .entries
                .iter()
                .map(|(s, row)| (s.0.to_string(), row.to_vec()))
                .collect(),
        }
    }

    fn from_value(raw: serde_json::Value) -> Result<QTable> {
        let version = raw
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidHeader("missing integer 'version'".into()))?;
        if version != QTABLE_VERSION {
            return Err(Error::FormatVersionMismatch {
                found: version,
                expected: QTABLE_VERSION,
            });
        }
        let file: QTableFile = serde_json::from_value(raw)?;
        if file.gamma != 1.0 {
            return Err(Error::InvalidHeader(format!(
                "gamma must be 1.0, found {}",
                file.gamma
            )));
        }
        file.opponent
            .validate()
            .map_err(|e| Error::InvalidHeader(e.to_string()))?;

        let mut entries = BTreeMap::new();
        for (key, values) in file.entries {
            let corrupt = |reason: String| Error::CorruptEntry {
                state: key.clone(),
                reason,
            };
            let index: u32 = key
                .parse()
                .map_err(|_| corrupt("key is not a decimal state index".into()))?;
            let board = Board::decode(StateIndex(index)).map_err(|e| corrupt(e.to_string()))?;
            if board.to_move() != CellMark::X || board.status().is_terminal() {
                return Err(corrupt(
                    "entry is not a non-terminal X-to-move state".into(),
                ));
            }
            let row: QRow = values
                .as_slice()
                .try_into()
                .map_err(|_| corrupt(format!("expected 9 values, found {}", values.len())))?;
            if let Some(v) = row.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
                return Err(corrupt(format!("value {v} outside [-1, 1]")));
            }
            entries.insert(StateIndex(index), row);
        }
        Ok(QTable {
            opponent: file.opponent,
            entries,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct QTableFile {
    version: u64,
    opponent: OpponentModel,
    gamma: f64,
    entries: BTreeMap<String, Vec<f64>>,
}

pub fn save_qtable(q: &QTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &q.to_file())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_qtable(path: impl AsRef<Path>) -> Result<QTable> {
    let raw: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    QTable::from_value(raw)
}

/// Solves the fully-observable game against `opponent`.
pub fn solve_q(opponent: OpponentModel) -> Result<QTable> {
    opponent.validate()?;
    let mut solver = Solver {
        opponent,
        entries: BTreeMap::new(),
    };
    // every reachable decision point, including ones the opponent's own
    // support never leads to
    for state in enumerate_reachable_states() {
        let board = Board::decode(state)?;
        if board.to_move() == CellMark::X && !board.status().is_terminal() {
            solver.row(&board)?;
        }
    }
    Ok(QTable {
        opponent,
        entries: solver.entries,
    })
}

struct Solver {
    opponent: OpponentModel,
    entries: BTreeMap<StateIndex, QRow>,
}

impl Solver {
    fn row(&mut self, board: &Board) -> Result<QRow> {
        let key = board.encode();
        if let Some(row) = self.entries.get(&key) {
            return Ok(*row);
        }
        let mut row = [-1.0; 9];
        for action in Action::all().filter(|&a| board.is_valid(a)) {
            let after_x = board.apply(action, CellMark::X)?;
            row[action.cell()] = match after_x.status() {
                GameStatus::XWins => 1.0,
                GameStatus::Draw => 0.0,
                GameStatus::OWins => unreachable!("X's move cannot complete an O line"),
                GameStatus::InProgress => {
                    let mut expected = 0.0;
                    for (reply, p) in opponent_distribution(self.opponent, &after_x)? {
                        let after_o = after_x.apply(reply, CellMark::O)?;
                        let r = match after_o.status() {
                            GameStatus::OWins => -1.0,
                            GameStatus::Draw => 0.0,
                            GameStatus::XWins => unreachable!("O's move cannot complete an X line"),
                            GameStatus::InProgress => max_value(&self.row(&after_o)?),
                        };
                        expected += p * r;
                    }
                    // rounding in the opponent probabilities can overshoot by an ulp
                    expected.clamp(-1.0, 1.0)
                }
            };
        }
        self.entries.insert(key, row);
        Ok(row)
    }
}

fn max_value(row: &QRow) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
