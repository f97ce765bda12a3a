//! TicTacToe rules shared by the solver and the environment.
//!
//! Boards are 3×3, row-major (`cell = row * 3 + col`). X is always the agent
//! and moves first, O is the opponent. Every [`Board`] value satisfies the
//! reachability invariants: `count(X) - count(O) ∈ {0, 1}` and at most one
//! side owns a completed line.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct base-3 encodings of a 3×3 board.
pub const STATE_SPACE: u32 = 19_683;

/// The 8 winning lines: 3 rows, 3 columns, 2 diagonals.
pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellMark {
    Empty,
    X,
    O,
}

impl CellMark {
    fn digit(self) -> u32 {
        match self {
            CellMark::Empty => 0,
            CellMark::X => 1,
            CellMark::O => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CellMark::Empty => '.',
            CellMark::X => 'X',
            CellMark::O => 'O',
        }
    }
}

/// A cell to mark, `0..9` row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Action(u8);

impl Action {
    pub const COUNT: usize = 9;

    pub fn new(cell: usize) -> Option<Action> {
        (cell < Self::COUNT).then_some(Action(cell as u8))
    }

    pub fn cell(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Action> {
        (0..Self::COUNT as u8).map(Action)
    }
}

impl TryFrom<u8> for Action {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Action::new(v as usize).ok_or_else(|| format!("action {v} out of range 0..9"))
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical base-3 index of a board: `Σ digit(cells[i]) · 3^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateIndex(pub u32);

impl fmt::Display for StateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameStatus {
    InProgress,
    XWins,
    OWins,
    Draw,
}

impl GameStatus {
    pub fn is_terminal(self) -> bool {
        self != GameStatus::InProgress
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    cells: [CellMark; 9],
}

impl Board {
    pub fn empty() -> Board {
        Board {
            cells: [CellMark::Empty; 9],
        }
    }

    /// Builds a board, rejecting configurations that cannot arise from
    /// alternating X-first play.
    pub fn from_cells(cells: [CellMark; 9]) -> Result<Board> {
        let board = Board { cells };
        let (x, o) = board.counts();
        if !(x == o || x == o + 1) {
            return Err(Error::InvalidState(format!(
                "mark counts X={x} O={o} break X-first alternation"
            )));
        }
        if board.has_line(CellMark::X) && board.has_line(CellMark::O) {
            return Err(Error::InvalidState("both sides have a line".into()));
        }
        Ok(board)
    }

    /// Convenience constructor from the cells holding X and O.
    pub fn from_marks(xs: &[usize], os: &[usize]) -> Result<Board> {
        let mut cells = [CellMark::Empty; 9];
        for &c in xs {
            cells[c] = CellMark::X;
        }
        for &c in os {
            if cells[c] != CellMark::Empty {
                return Err(Error::InvalidState(format!("cell {c} marked twice")));
            }
            cells[c] = CellMark::O;
        }
        Board::from_cells(cells)
    }

    pub fn cells(&self) -> &[CellMark; 9] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> CellMark {
        self.cells[i]
    }

    pub fn counts(&self) -> (usize, usize) {
        self.cells.iter().fold((0, 0), |(x, o), c| match c {
            CellMark::X => (x + 1, o),
            CellMark::O => (x, o + 1),
            CellMark::Empty => (x, o),
        })
    }

    /// Number of marks placed so far.
    pub fn plies(&self) -> usize {
        let (x, o) = self.counts();
        x + o
    }

    /// The side to move next, ignoring whether the game is over.
    pub fn to_move(&self) -> CellMark {
        let (x, o) = self.counts();
        if x == o {
            CellMark::X
        } else {
            CellMark::O
        }
    }

    fn has_line(&self, mark: CellMark) -> bool {
        LINES
            .iter()
            .any(|line| line.iter().all(|&i| self.cells[i] == mark))
    }

    pub fn status(&self) -> GameStatus {
        if self.has_line(CellMark::X) {
            GameStatus::XWins
        } else if self.has_line(CellMark::O) {
            GameStatus::OWins
        } else if self.cells.iter().all(|&c| c != CellMark::Empty) {
            GameStatus::Draw
        } else {
            GameStatus::InProgress
        }
    }

    pub fn valid_actions(&self) -> Vec<Action> {
        Action::all()
            .filter(|a| self.cells[a.cell()] == CellMark::Empty)
            .collect()
    }

    pub fn is_valid(&self, action: Action) -> bool {
        self.cells[action.cell()] == CellMark::Empty
    }

    /// Marks `action`'s cell for `player`. Only the target cell changes.
    pub fn apply(&self, action: Action, player: CellMark) -> Result<Board> {
        if player == CellMark::Empty {
            return Err(Error::InvalidState("player must be X or O".into()));
        }
        if !self.is_valid(action) {
            return Err(Error::OccupiedCell(action.cell()));
        }
        if self.to_move() != player {
            return Err(Error::WrongTurn(player));
        }
        let mut cells = self.cells;
        cells[action.cell()] = player;
        Board::from_cells(cells)
    }

    pub fn encode(&self) -> StateIndex {
        StateIndex(
            self.cells
                .iter()
                .rev()
                .fold(0, |acc, c| acc * 3 + c.digit()),
        )
    }

    pub fn decode(index: StateIndex) -> Result<Board> {
        if index.0 >= STATE_SPACE {
            return Err(Error::InvalidState(format!(
                "index {} outside 0..{STATE_SPACE}",
                index.0
            )));
        }
        let mut cells = [CellMark::Empty; 9];
        let mut rest = index.0;
        for cell in cells.iter_mut() {
            *cell = match rest % 3 {
                0 => CellMark::Empty,
                1 => CellMark::X,
                _ => CellMark::O,
            };
            rest /= 3;
        }
        Board::from_cells(cells)
    }

    /// Three-line ASCII rendering, `.` for empty cells.
    pub fn render(&self) -> String {
        self.cells
            .chunks(3)
            .map(|row| row.iter().map(|c| c.symbol()).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: String = self.cells.iter().map(|c| c.symbol()).collect();
        write!(f, "Board({flat})")
    }
}

impl Default for Board {
    fn default() -> Self {
        Board::empty()
    }
}

pub fn encode_state(board: &Board) -> StateIndex {
    board.encode()
}

pub fn decode_state(index: StateIndex) -> Result<Board> {
    Board::decode(index)
}

/// Every board reachable from the empty board under alternating legal play,
/// terminal boards included.
pub fn enumerate_reachable_states() -> BTreeSet<StateIndex> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let root = Board::empty();
    seen.insert(root.encode());
    queue.push_back(root);
    while let Some(board) = queue.pop_front() {
        if board.status().is_terminal() {
            continue;
        }
        let player = board.to_move();
        for action in board.valid_actions() {
            let next = board
                .apply(action, player)
                .expect("legal move from a non-terminal board");
            if seen.insert(next.encode()) {
                queue.push_back(next);
            }
        }
    }
    seen
}
