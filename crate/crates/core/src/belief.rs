//! Exact discrete belief filter for Reconnaissance Blind TicTacToe.
//!
//! A belief is kept only at the agent's decision points: every support state
//! has X to move, is non-terminal, and carries the same number of marks. One
//! filter step is
//!
//! ```text
//! β'(s'') ∝ Σ_s β(s) · [a valid in s] · [s' = s+X(a) continues]
//!                    · P_O(s'' | s') · [s'' continues] · O(o | s'')
//! ```
//!
//! where the observation model is the 0/1 indicator that the sensed window
//! matches the state. Window placements are drawn independently of the state
//! and seen by the agent, so the likelihood conditions on the placement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Board, CellMark, StateIndex};
use crate::opponent::{opponent_distribution, OpponentModel};

/// Normalization tolerance for every belief produced by the filter.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowShape {
    height: usize,
    width: usize,
}

impl WindowShape {
    pub fn new(height: usize, width: usize) -> Result<WindowShape> {
        if !(1..=3).contains(&height) || !(1..=3).contains(&width) {
            return Err(Error::InvalidWindow(height, width));
        }
        Ok(WindowShape { height, width })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    /// All `(4-h)·(4-w)` positions, row-major by top-left corner.
    pub fn placements(&self) -> Vec<WindowPlacement> {
        let shape = *self;
        (0..=3 - self.height)
            .flat_map(move |top| {
                (0..=3 - shape.width).map(move |left| WindowPlacement { top, left, shape })
            })
            .collect()
    }

    /// Every shape from 1×1 to 3×3.
    pub fn all() -> Vec<WindowShape> {
        (1..=3)
            .flat_map(|h| {
                (1..=3).map(move |w| WindowShape {
                    height: h,
                    width: w,
                })
            })
            .collect()
    }
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

impl FromStr for WindowShape {
    type Err = Error;

    /// Parses `HxW`, e.g. `2x1` is two rows by one column.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidState(format!("window '{s}' is not of the form HxW"));
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let h: usize = h.trim().parse().map_err(|_| bad())?;
        let w: usize = w.trim().parse().map_err(|_| bad())?;
        WindowShape::new(h, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowPlacement {
    pub top: usize,
    pub left: usize,
    pub shape: WindowShape,
}

impl WindowPlacement {
    pub fn new(top: usize, left: usize, shape: WindowShape) -> Result<WindowPlacement> {
        if top + shape.height > 3 || left + shape.width > 3 {
            return Err(Error::InvalidState(format!(
                "{shape} window at ({top},{left}) leaves the board"
            )));
        }
        Ok(WindowPlacement { top, left, shape })
    }

    /// Covered cell indices in row-major window order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        (self.top..self.top + self.shape.height)
            .flat_map(move |r| (self.left..self.left + self.shape.width).map(move |c| r * 3 + c))
    }

    pub fn covers(&self, cell: usize) -> bool {
        let (r, c) = (cell / 3, cell % 3);
        (self.top..self.top + self.shape.height).contains(&r)
            && (self.left..self.left + self.shape.width).contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Observation {
    pub placement: WindowPlacement,
    pub contents: Vec<CellMark>,
}

impl Observation {
    /// Reads the window off `board`.
    pub fn sense(board: &Board, placement: WindowPlacement) -> Observation {
        Observation {
            placement,
            contents: placement.cells().map(|i| board.cell(i)).collect(),
        }
    }

    /// The observed cell at board index `cell`, if the window covers it.
    pub fn revealed(&self, cell: usize) -> Option<CellMark> {
        self.placement
            .cells()
            .position(|i| i == cell)
            .map(|k| self.contents[k])
    }
}

pub fn observation_likelihood(obs: &Observation, state: &Board) -> f64 {
    let matches = obs.contents.len() == obs.placement.shape.area()
        && obs
            .placement
            .cells()
            .zip(&obs.contents)
            .all(|(i, &mark)| state.cell(i) == mark);
    if matches {
        1.0
    } else {
        0.0
    }
}

/// Probability distribution over decision-point board states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(BTreeMap<StateIndex, f64>);

impl Belief {
    pub fn point_mass(state: StateIndex) -> Belief {
        Belief(BTreeMap::from([(state, 1.0)]))
    }

    /// Normalizes non-negative weights into a belief. Zero weights are
    /// dropped; every remaining state must be a non-terminal X-to-move board
    /// and all must share one move count.
    pub fn from_weights(weights: impl IntoIterator<Item = (StateIndex, f64)>) -> Result<Belief> {
        let mut acc: BTreeMap<StateIndex, f64> = BTreeMap::new();
        for (s, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidProbability(w));
            }
            if w > 0.0 {
                *acc.entry(s).or_insert(0.0) += w;
            }
        }
        let mut plies = None;
        for &s in acc.keys() {
            let b = Board::decode(s)?;
            if b.status().is_terminal() || b.to_move() != CellMark::X {
                return Err(Error::InvalidState(format!(
                    "state {s} is not a decision point"
                )));
            }
            if *plies.get_or_insert(b.plies()) != b.plies() {
                return Err(Error::InvalidState("support mixes move counts".into()));
            }
        }
        normalized(acc).ok_or(Error::EmptySupport)
    }

    pub fn probability(&self, state: StateIndex) -> f64 {
        self.0.get(&state).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(state, probability)` pairs in ascending state order.
    pub fn iter(&self) -> impl Iterator<Item = (StateIndex, f64)> + '_ {
        self.0.iter().map(|(&s, &p)| (s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = StateIndex> + '_ {
        self.0.keys().copied()
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn max_probability(&self) -> f64 {
        self.0.values().copied().fold(0.0, f64::max)
    }

    pub fn as_map(&self) -> &BTreeMap<StateIndex, f64> {
        &self.0
    }
}

fn normalized(mut mass: BTreeMap<StateIndex, f64>) -> Option<Belief> {
    mass.retain(|_, p| *p > 0.0);
    let total: f64 = mass.values().sum();
    if mass.is_empty() || total <= 0.0 {
        return None;
    }
    for p in mass.values_mut() {
        *p /= total;
    }
    Some(Belief(mass))
}

/// Point mass on the empty board.
pub fn initial_belief() -> Belief {
    Belief::point_mass(Board::empty().encode())
}

/// Pushes the belief through the agent's move and the opponent's reply,
/// conditioning on the episode having continued past both.
pub fn predict(belief: &Belief, agent_action: Action, opponent: OpponentModel) -> Result<Belief> {
    let mut mass: BTreeMap<StateIndex, f64> = BTreeMap::new();
    for (state, p) in belief.iter() {
        let board = Board::decode(state)?;
        if !board.is_valid(agent_action) {
            continue;
        }
        let after_x = board.apply(agent_action, CellMark::X)?;
        if after_x.status().is_terminal() {
            continue;
        }
        for (reply, q) in opponent_distribution(opponent, &after_x)? {
            let after_o = after_x.apply(reply, CellMark::O)?;
            if after_o.status().is_terminal() {
                continue;
            }
            *mass.entry(after_o.encode()).or_insert(0.0) += p * q;
        }
    }
    normalized(mass).ok_or(Error::EmptySupport)
}

/// Conditions a predicted belief on a sensing observation.
pub fn update(belief: &Belief, obs: &Observation) -> Result<Belief> {
    let mut mass = BTreeMap::new();
    for (state, p) in belief.iter() {
        let lik = observation_likelihood(obs, &Board::decode(state)?);
        if lik > 0.0 {
            mass.insert(state, p * lik);
        }
    }
    normalized(mass).ok_or(Error::ZeroEvidence)
}

/// Distribution of the next observation after `agent_action`, over all
/// `(placement, contents)` pairs for windows of `shape`.
pub fn observation_distribution(
    belief: &Belief,
    agent_action: Action,
    opponent: OpponentModel,
    shape: WindowShape,
) -> Result<BTreeMap<Observation, f64>> {
    let predicted = predict(belief, agent_action, opponent)?;
    let placements = shape.placements();
    let placement_p = 1.0 / placements.len() as f64;
    let mut dist = BTreeMap::new();
    for (state, p) in predicted.iter() {
        let board = Board::decode(state)?;
        for &placement in &placements {
            let obs = Observation::sense(&board, placement);
            *dist.entry(obs).or_insert(0.0) += placement_p * p;
        }
    }
    Ok(dist)
}
