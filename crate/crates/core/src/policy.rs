//! Greedy policies over belief-weighted fully-observable Q values.
//!
//! The mixture policy scores each action by `Σ_s β(s) Q(s, a)`. The
//! max-belief alternative keeps only the most probable states and weights
//! them uniformly. Both pick uniformly at random among actions within
//! [`ARGMAX_TOL`] of the best score.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::game::{Action, StateIndex};
use crate::solver::QTable;

pub const ARGMAX_TOL: f64 = 1e-9;
pub const MAX_BELIEF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionValues(pub [f64; 9]);

impl ActionValues {
    pub fn get(&self, action: Action) -> f64 {
        self.0[action.cell()]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean value over the members of `set`.
    pub fn mean_over(&self, set: ActionSet) -> f64 {
        set.iter().map(|a| self.get(a)).sum::<f64>() / set.len() as f64
    }
}

/// Non-empty subset of the 9 actions, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Action>", into = "Vec<Action>")]
pub struct ActionSet(u16);

impl ActionSet {
    pub fn from_actions(actions: impl IntoIterator<Item = Action>) -> Option<ActionSet> {
        let mask = actions.into_iter().fold(0u16, |m, a| m | 1 << a.cell());
        (mask != 0).then_some(ActionSet(mask))
    }

    pub fn contains(&self, action: Action) -> bool {
        self.0 & (1 << action.cell()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        Action::all().filter(|a| self.contains(*a))
    }

    pub fn intersection_len(&self, other: &ActionSet) -> usize {
        (self.0 & other.0).count_ones() as usize
    }

    pub fn union_len(&self, other: &ActionSet) -> usize {
        (self.0 | other.0).count_ones() as usize
    }

    /// Uniformly random member.
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let k = rng.gen_range(0..self.len());
        self.iter().nth(k).expect("index within set size")
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|a| a.cell()))
            .finish()
    }
}

impl TryFrom<Vec<Action>> for ActionSet {
    type Error = String;

    fn try_from(v: Vec<Action>) -> std::result::Result<Self, Self::Error> {
        ActionSet::from_actions(v).ok_or_else(|| "action set must be non-empty".to_string())
    }
}

impl From<ActionSet> for Vec<Action> {
    fn from(s: ActionSet) -> Vec<Action> {
        s.iter().collect()
    }
}

/// One greedy decision together with what produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub argmax: ActionSet,
    pub values: ActionValues,
}

/// `value[a] = Σ_s β(s) Q(s, a)`.
pub fn mixture_values(belief: &Belief, q: &QTable) -> Result<ActionValues> {
    let mut values = [0.0; 9];
    for (state, p) in belief.iter() {
        let row = q.row(state)?;
        for (v, qa) in values.iter_mut().zip(row) {
            *v += p * qa;
        }
    }
    Ok(ActionValues(values))
}

/// All actions whose value is within `tol` of the maximum.
pub fn argmax_set(values: &ActionValues, tol: f64) -> ActionSet {
    let best = values.max();
    ActionSet::from_actions(Action::all().filter(|&a| values.get(a) >= best - tol))
        .expect("the maximizer is always in the set")
}

pub fn act_mixture<R: Rng + ?Sized>(belief: &Belief, q: &QTable, rng: &mut R) -> Result<Decision> {
    let values = mixture_values(belief, q)?;
    let argmax = argmax_set(&values, ARGMAX_TOL);
    Ok(Decision {
        action: argmax.choose(rng),
        argmax,
        values,
    })
}

/// States whose probability is within [`MAX_BELIEF_TOL`] of the largest.
pub fn max_belief_states(belief: &Belief) -> Vec<StateIndex> {
    let best = belief.max_probability();
    belief
        .iter()
        .filter(|&(_, p)| p >= best - MAX_BELIEF_TOL)
        .map(|(s, _)| s)
        .collect()
}

/// Mean of `Q(s, ·)` over the maximum-probability states, each weighted
/// equally regardless of the remaining belief mass.
pub fn alt_values(belief: &Belief, q: &QTable) -> Result<ActionValues> {
    let states = max_belief_states(belief);
    if states.is_empty() {
        return Err(Error::EmptySupport);
    }
    let w = 1.0 / states.len() as f64;
    let mut values = [0.0; 9];
    for state in states {
        let row = q.row(state)?;
        for (v, qa) in values.iter_mut().zip(row) {
            *v += w * qa;
        }
    }
    Ok(ActionValues(values))
}

pub fn act_alt<R: Rng + ?Sized>(belief: &Belief, q: &QTable, rng: &mut R) -> Result<Decision> {
    let values = alt_values(belief, q)?;
    let argmax = argmax_set(&values, ARGMAX_TOL);
    Ok(Decision {
        action: argmax.choose(rng),
        argmax,
        values,
    })
}

/// Draws one state uniformly from the maximum-probability states and acts
/// greedily on its Q row alone.
pub fn act_single_max_belief<R: Rng + ?Sized>(
    belief: &Belief,
    q: &QTable,
    rng: &mut R,
) -> Result<Decision> {
    let states = max_belief_states(belief);
    if states.is_empty() {
        return Err(Error::EmptySupport);
    }
    let state = states[rng.gen_range(0..states.len())];
    let values = ActionValues(*q.row(state)?);
    let argmax = argmax_set(&values, ARGMAX_TOL);
    Ok(Decision {
        action: argmax.choose(rng),
        argmax,
        values,
    })
}
