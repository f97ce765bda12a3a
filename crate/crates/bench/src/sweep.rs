//! Episode fan-out and aggregation.

use rayon::prelude::*;

use rbt_core::{
    aggregate_by_timestep, mean_ci95, run_episode, EpisodeConfig, EpisodeResult, OpponentModel,
    PolicyKind, QTable, SweepRow, TimestepAggregate, WindowShape,
};

/// Window sizes of the reference benchmark table, in table order.
pub const DEFAULT_WINDOWS: [(usize, usize); 5] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];

pub const SWEEP_POLICIES: [PolicyKind; 2] = [PolicyKind::Mixture, PolicyKind::MaxBelief];

/// Label used in `timestep_metrics.csv`: metrics compare the two policies'
/// action sets along mixture-policy trajectories.
pub const POLICY_PAIR: &str = "mixture-vs-maxbelief";

pub fn default_windows() -> Vec<WindowShape> {
    DEFAULT_WINDOWS
        .iter()
        .map(|&(h, w)| WindowShape::new(h, w).expect("static shapes are valid"))
        .collect()
}

/// Runs episodes `base.seed + i` for `i in 0..episodes` across worker
/// threads. The result is ordered by episode index, so it does not depend on
/// scheduling.
pub fn run_episodes(
    base: &EpisodeConfig,
    q: &QTable,
    episodes: usize,
) -> rbt_core::Result<Vec<EpisodeResult>> {
    (0..episodes as u64)
        .into_par_iter()
        .map(|i| run_episode(&base.with_seed(base.seed.wrapping_add(i)), q))
        .collect()
}

pub fn summarize(
    shape: WindowShape,
    policy: PolicyKind,
    results: &[EpisodeResult],
) -> rbt_core::Result<SweepRow> {
    let returns: Vec<f64> = results.iter().map(|r| r.ret).collect();
    let (mean_return, ci95) = mean_ci95(&returns)?;
    Ok(SweepRow {
        shape,
        policy: policy.name().to_string(),
        episodes: results.len(),
        mean_return,
        ci95,
    })
}

#[derive(Debug, Clone)]
pub struct WindowMetrics {
    pub shape: WindowShape,
    pub aggregates: Vec<TimestepAggregate>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub timestep: Vec<WindowMetrics>,
}

/// Both sweep policies on every window, all against the Q-table's opponent.
pub fn sweep(
    q: &QTable,
    windows: &[WindowShape],
    episodes: usize,
    seed: u64,
) -> rbt_core::Result<SweepOutput> {
    sweep_with_opponent(q, q.opponent(), windows, episodes, seed)
}

pub fn sweep_with_opponent(
    q: &QTable,
    opponent: OpponentModel,
    windows: &[WindowShape],
    episodes: usize,
    seed: u64,
) -> rbt_core::Result<SweepOutput> {
    let mut rows = Vec::new();
    let mut timestep = Vec::new();
    for &shape in windows {
        for policy in SWEEP_POLICIES {
            let config = EpisodeConfig::new(shape, opponent, policy, seed);
            let results = run_episodes(&config, q, episodes)?;
            rows.push(summarize(shape, policy, &results)?);
            if policy == PolicyKind::Mixture {
                timestep.push(WindowMetrics {
                    shape,
                    aggregates: aggregate_by_timestep(&results),
                });
            }
        }
    }
    Ok(SweepOutput { rows, timestep })
}
