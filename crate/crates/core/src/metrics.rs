//! Evaluation metrics: action-set IoU, value margin of the mixture policy
//! over the max-belief policy, and return aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, WindowShape};
use crate::env::EpisodeResult;
use crate::error::{Error, Result};
use crate::policy::{alt_values, argmax_set, mixture_values, ActionSet, ActionValues, ARGMAX_TOL};
use crate::solver::QTable;

/// Normal-approximation 95% quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub shape: WindowShape,
    pub policy: String,
    pub episodes: usize,
    pub mean_return: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimestepAggregate {
    pub t: usize,
    pub mean_iou: f64,
    pub mean_margin: f64,
    pub samples: usize,
}

/// Jaccard index `|a ∩ b| / |a ∪ b|`.
pub fn iou(a: ActionSet, b: ActionSet) -> f64 {
    a.intersection_len(&b) as f64 / a.union_len(&b) as f64
}

/// Mixture value of the mixture-greedy action minus the mean mixture value
/// of the max-belief policy's action set.
pub fn value_margin(belief: &Belief, q: &QTable) -> Result<f64> {
    let mix = mixture_values(belief, q)?;
    let a_mix = argmax_set(&mix, ARGMAX_TOL);
    let a_max = argmax_set(&alt_values(belief, q)?, ARGMAX_TOL);
    Ok(margin_from(&mix, a_mix, a_max))
}

pub(crate) fn margin_from(mix: &ActionValues, a_mix: ActionSet, a_max: ActionSet) -> f64 {
    // constant on a_mix up to ARGMAX_TOL; take the mean to stay symmetric
    mix.mean_over(a_mix) - mix.mean_over(a_max)
}

/// Sample mean and `1.96 · s / √n` with the unbiased sample deviation.
pub fn mean_ci95(returns: &[f64]) -> Result<(f64, f64)> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    let mean = returns.iter().sum::<f64>() / n as f64;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, Z95 * var.sqrt() / (n as f64).sqrt()))
}

/// Per-timestep means over the episodes that reached each step.
pub fn aggregate_by_timestep(traces: &[EpisodeResult]) -> Vec<TimestepAggregate> {
    let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for step in traces.iter().flat_map(|e| &e.steps) {
        let slot = acc.entry(step.t).or_insert((0.0, 0.0, 0));
        slot.0 += step.iou;
        slot.1 += step.margin;
        slot.2 += 1;
    }
    acc.into_iter()
        .map(|(t, (iou, margin, n))| TimestepAggregate {
            t,
            mean_iou: iou / n as f64,
            mean_margin: margin / n as f64,
            samples: n,
        })
        .collect()
}
