//! Q-mixture policies for partially observable games, benchmarked on
//! Reconnaissance Blind TicTacToe.
//!
//! The pieces, bottom-up:
//!
//! - [`game`]: board rules and the canonical base-3 state index.
//! - [`opponent`] and [`solver`]: opponent models and the exact
//!   fully-observable Q-table, solved by memoized expectimax.
//! - [`belief`]: the exact belief filter over hidden boards.
//! - [`policy`]: the mixture policy `argmax_a Σ_s β(s) Q(s, a)` and the
//!   max-belief alternative.
//! - [`env`]: the sensing game and the episode runner.
//! - [`metrics`]: IoU, value margin and confidence intervals.

pub mod belief;
pub mod env;
pub mod error;
pub mod game;
pub mod metrics;
pub mod opponent;
pub mod policy;
pub mod solver;

pub use belief::{
    initial_belief, observation_distribution, observation_likelihood, predict, update, Belief,
    Observation, WindowPlacement, WindowShape,
};
pub use env::{
    make_observation, run_batch, run_episode, sample_window, EpisodeConfig, EpisodeResult, Outcome,
    PolicyKind, StepRecord,
};
pub use error::{Error, Result};
pub use game::{
    decode_state, encode_state, enumerate_reachable_states, Action, Board, CellMark, GameStatus,
    StateIndex,
};
pub use metrics::{
    aggregate_by_timestep, iou, mean_ci95, value_margin, SweepRow, TimestepAggregate,
};
pub use opponent::{opponent_distribution, OpponentModel};
pub use policy::{
    act_alt, act_mixture, act_single_max_belief, alt_values, argmax_set, max_belief_states,
    mixture_values, ActionSet, ActionValues, Decision,
};
pub use solver::{load_qtable, save_qtable, solve_q, QTable};
