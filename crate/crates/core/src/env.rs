//! Reconnaissance Blind TicTacToe episodes.
//!
//! Before each agent move a randomly placed window reveals part of the true
//! board. The opponent sees everything. Rewards: +1 win, −1 loss, −1 for an
//! invalid (occupied) move, which also ends the episode, and 0 for a draw.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{
    initial_belief, predict, update, Belief, Observation, WindowPlacement, WindowShape,
};
use crate::error::{Error, Result};
use crate::game::{Action, Board, CellMark, GameStatus, StateIndex};
use crate::metrics::{iou, margin_from};
use crate::opponent::{opponent_distribution, OpponentModel};
use crate::policy::{
    act_single_max_belief, alt_values, argmax_set, mixture_values, ActionSet, ARGMAX_TOL,
};
use crate::solver::QTable;

/// Upper bound on agent decisions in one episode.
pub const MAX_DECISIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Mixture,
    #[serde(rename = "maxbelief")]
    MaxBelief,
    /// Uniform over all 9 cells, occupied ones included.
    #[serde(rename = "random")]
    UniformRandomBaseline,
    /// Acts on a single state drawn from the maximum-probability states.
    #[serde(rename = "maxbelief-single")]
    SingleMaxBelief,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Mixture => "mixture",
            PolicyKind::MaxBelief => "maxbelief",
            PolicyKind::UniformRandomBaseline => "random",
            PolicyKind::SingleMaxBelief => "maxbelief-single",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(PolicyKind::Mixture),
            "maxbelief" => Ok(PolicyKind::MaxBelief),
            "random" => Ok(PolicyKind::UniformRandomBaseline),
            "maxbelief-single" => Ok(PolicyKind::SingleMaxBelief),
            other => Err(Error::InvalidState(format!(
                "unknown policy '{other}', expected mixture|maxbelief|maxbelief-single|random"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub shape: WindowShape,
    pub opponent: OpponentModel,
    pub policy: PolicyKind,
    pub seed: u64,
    /// Opponent model the agent assumes when predicting its belief.
    pub belief_opponent_model: OpponentModel,
}

impl EpisodeConfig {
    /// Config whose belief model matches the environment opponent.
    pub fn new(shape: WindowShape, opponent: OpponentModel, policy: PolicyKind, seed: u64) -> Self {
        EpisodeConfig {
            shape,
            opponent,
            policy,
            seed,
            belief_opponent_model: opponent,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Loss,
    Draw,
    InvalidMove,
}

impl Outcome {
    pub fn reward(self) -> f64 {
        match self {
            Outcome::Win => 1.0,
            Outcome::Draw => 0.0,
            Outcome::Loss | Outcome::InvalidMove => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub observation: Observation,
    /// Posterior after this step's observation, before acting.
    pub belief: BTreeMap<StateIndex, f64>,
    pub belief_support_size: usize,
    pub a_mix: ActionSet,
    pub a_max: ActionSet,
    pub iou: f64,
    pub margin: f64,
    pub chosen_action: Action,
    pub reward: f64,
    /// Hidden board at the decision point.
    pub true_state: StateIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub steps: Vec<StepRecord>,
    #[serde(rename = "return")]
    pub ret: f64,
    pub outcome: Outcome,
}

/// Uniform over the `(4-h)·(4-w)` placements of `shape`.
pub fn sample_window<R: Rng + ?Sized>(shape: WindowShape, rng: &mut R) -> WindowPlacement {
    let placements = shape.placements();
    placements[rng.gen_range(0..placements.len())]
}

pub fn make_observation(state: &Board, placement: WindowPlacement) -> Observation {
    Observation::sense(state, placement)
}

/// Plays one episode. Every random draw (window, tie-break, opponent reply)
/// comes from one `ChaCha8Rng` seeded with `config.seed`.
pub fn run_episode(config: &EpisodeConfig, q: &QTable) -> Result<EpisodeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut truth = Board::empty();
    let mut belief: Option<Belief> = None;
    let mut last_action: Option<Action> = None;
    let mut steps = Vec::with_capacity(MAX_DECISIONS);

    for t in 0..=MAX_DECISIONS {
        let observation = make_observation(&truth, sample_window(config.shape, &mut rng));
        let prior = match (belief.take(), last_action) {
            (Some(b), Some(a)) => predict(&b, a, config.belief_opponent_model)?,
            _ => initial_belief(),
        };
        let posterior = update(&prior, &observation)?;

        let mix = mixture_values(&posterior, q)?;
        let a_mix = argmax_set(&mix, ARGMAX_TOL);
        let a_max = argmax_set(&alt_values(&posterior, q)?, ARGMAX_TOL);
        let chosen = match config.policy {
            PolicyKind::Mixture => a_mix.choose(&mut rng),
            PolicyKind::MaxBelief => a_max.choose(&mut rng),
            PolicyKind::UniformRandomBaseline => {
                Action::new(rng.gen_range(0..Action::COUNT)).expect("cell in range")
            }
            PolicyKind::SingleMaxBelief => act_single_max_belief(&posterior, q, &mut rng)?.action,
        };

        let mut step = StepRecord {
            t,
            observation,
            belief: posterior.as_map().clone(),
            belief_support_size: posterior.len(),
            a_mix,
            a_max,
            iou: iou(a_mix, a_max),
            margin: margin_from(&mix, a_mix, a_max),
            chosen_action: chosen,
            reward: 0.0,
            true_state: truth.encode(),
        };

        let outcome = advance(&mut truth, chosen, config.opponent, &mut rng)?;
        if let Some(outcome) = outcome {
            step.reward = outcome.reward();
            steps.push(step);
            return Ok(EpisodeResult {
                steps,
                ret: outcome.reward(),
                outcome,
            });
        }
        steps.push(step);
        belief = Some(posterior);
        last_action = Some(chosen);
    }
    unreachable!("a game ends within {MAX_DECISIONS} agent moves")
}

/// Applies the agent's move and the opponent's reply to the true board.
/// Returns the outcome if the episode ended.
fn advance<R: Rng + ?Sized>(
    truth: &mut Board,
    action: Action,
    opponent: OpponentModel,
    rng: &mut R,
) -> Result<Option<Outcome>> {
    if !truth.is_valid(action) {
        return Ok(Some(Outcome::InvalidMove));
    }
    *truth = truth.apply(action, CellMark::X)?;
    match truth.status() {
        GameStatus::XWins => return Ok(Some(Outcome::Win)),
        GameStatus::Draw => return Ok(Some(Outcome::Draw)),
        _ => {}
    }
    let dist = opponent_distribution(opponent, truth)?;
    let pick = WeightedIndex::new(dist.iter().map(|&(_, p)| p))
        .map_err(|e| Error::InvalidState(format!("opponent distribution: {e}")))?;
    let reply = dist[pick.sample(rng)].0;
    *truth = truth.apply(reply, CellMark::O)?;
    Ok(match truth.status() {
        GameStatus::OWins => Some(Outcome::Loss),
        GameStatus::Draw => Some(Outcome::Draw),
        _ => None,
    })
}

/// Runs `episodes` episodes with seeds `base.seed + i`, in index order.
pub fn run_batch(base: &EpisodeConfig, q: &QTable, episodes: usize) -> Result<Vec<EpisodeResult>> {
    (0..episodes as u64)
        .map(|i| run_episode(&base.with_seed(base.seed.wrapping_add(i)), q))
        .collect()
}
