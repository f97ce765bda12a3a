//! Independent oracles. Nothing here calls into the crate's solver or
//! belief filter: boards are plain `[u8; 9]` arrays (0 empty, 1 X, 2 O).

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Write;

pub type Cells = [u8; 9];

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

pub fn wins(c: &Cells, p: u8) -> bool {
    LINES.iter().any(|l| l.iter().all(|&i| c[i] == p))
}

pub fn full(c: &Cells) -> bool {
    c.iter().all(|&v| v != 0)
}

pub fn terminal(c: &Cells) -> bool {
    wins(c, 1) || wins(c, 2) || full(c)
}

pub fn empties(c: &Cells) -> Vec<usize> {
    (0..9).filter(|&i| c[i] == 0).collect()
}

pub fn index(c: &Cells) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * 3 + d as u32)
}

pub fn cells_of(index: u32) -> Cells {
    let mut c = [0u8; 9];
    let mut rest = index;
    for v in c.iter_mut() {
        *v = (rest % 3) as u8;
        rest /= 3;
    }
    c
}

/// Opponent models the oracle understands.
#[derive(Clone, Copy, Debug)]
pub enum OracleOpponent {
    Uniform,
    /// Depth-aware minimax mixed with uniform: `(1-eps)·best + eps·uniform`.
    EpsMinimax(f64),
}

/// Plain recursive depth-aware minimax score for X: `±(10 - plies)` at the
/// final board, 0 for a draw.
pub fn naive_minimax(c: &Cells) -> i32 {
    let plies = c.iter().filter(|&&v| v != 0).count() as i32;
    if wins(c, 1) {
        return 10 - plies;
    }
    if wins(c, 2) {
        return -(10 - plies);
    }
    if full(c) {
        return 0;
    }
    let x_to_move = plies % 2 == 0;
    let scores = empties(c).into_iter().map(|i| {
        let mut n = *c;
        n[i] = if x_to_move { 1 } else { 2 };
        naive_minimax(&n)
    });
    if x_to_move {
        scores.max().unwrap()
    } else {
        scores.min().unwrap()
    }
}

/// O's reply distribution, in ascending cell order.
pub fn oracle_replies(c: &Cells, opp: OracleOpponent) -> Vec<(usize, f64)> {
    let e = empties(c);
    let u = 1.0 / e.len() as f64;
    match opp {
        OracleOpponent::Uniform => e.into_iter().map(|i| (i, u)).collect(),
        OracleOpponent::EpsMinimax(eps) => {
            let scores: Vec<i32> = e
                .iter()
                .map(|&i| {
                    let mut n = *c;
                    n[i] = 2;
                    naive_minimax(&n)
                })
                .collect();
            let best = *scores.iter().min().unwrap();
            let k = scores.iter().filter(|&&s| s == best).count() as f64;
            e.iter()
                .zip(&scores)
                .map(|(&i, &s)| {
                    let greedy = if s == best { 1.0 / k } else { 0.0 };
                    (i, (1.0 - eps) * greedy + eps * u)
                })
                .filter(|&(_, p)| p > 0.0)
                .collect()
        }
    }
}

/// Unmemoized expectimax: value of X playing `a` on `c` (X to move).
pub fn naive_q(c: &Cells, a: usize, opp: OracleOpponent) -> f64 {
    if c[a] != 0 {
        return -1.0;
    }
    let mut s = *c;
    s[a] = 1;
    if wins(&s, 1) {
        return 1.0;
    }
    if full(&s) {
        return 0.0;
    }
    let mut total = 0.0;
    for (reply, p) in oracle_replies(&s, opp) {
        let mut n = s;
        n[reply] = 2;
        let r = if wins(&n, 2) {
            -1.0
        } else if full(&n) {
            0.0
        } else {
            naive_v(&n, opp)
        };
        total += p * r;
    }
    total.clamp(-1.0, 1.0)
}

pub fn naive_v(c: &Cells, opp: OracleOpponent) -> f64 {
    (0..9)
        .map(|a| naive_q(c, a, opp))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One recorded decision point: the window that was sensed (top, left,
/// height, width), its contents, and the action taken afterwards (if any).
#[derive(Clone, Debug)]
pub struct HistoryStep {
    pub window: (usize, usize, usize, usize),
    pub contents: Vec<u8>,
    pub action: Option<usize>,
}

fn window_cells(w: (usize, usize, usize, usize)) -> Vec<usize> {
    let (top, left, h, wd) = w;
    (top..top + h)
        .flat_map(|r| (left..left + wd).map(move |col| r * 3 + col))
        .collect()
}

fn matches(c: &Cells, step: &HistoryStep) -> bool {
    window_cells(step.window)
        .iter()
        .zip(&step.contents)
        .all(|(&i, &v)| c[i] == v)
}

/// Posterior over boards at the last step of `history`, by enumerating every
/// opponent-reply and window-placement path from the empty board that is
/// consistent with the observed windows and the episode having continued.
pub fn brute_force_posterior(history: &[HistoryStep], placements: usize) -> BTreeMap<u32, f64> {
    let mut paths: Vec<(Cells, f64)> = vec![([0; 9], 1.0)];
    for (k, step) in history.iter().enumerate() {
        // sense: placement probability times the 0/1 likelihood
        paths = paths
            .into_iter()
            .filter(|(c, _)| matches(c, step))
            .map(|(c, w)| (c, w / placements as f64))
            .collect();
        if k + 1 == history.len() {
            break;
        }
        let a = step.action.expect("non-final steps carry an action");
        let mut next = Vec::new();
        for (c, w) in paths {
            if c[a] != 0 {
                continue;
            }
            let mut s = c;
            s[a] = 1;
            if terminal(&s) {
                continue;
            }
            let e = empties(&s);
            for &r in &e {
                let mut n = s;
                n[r] = 2;
                if terminal(&n) {
                    continue;
                }
                next.push((n, w / e.len() as f64));
            }
        }
        paths = next;
    }
    let mut post: BTreeMap<u32, f64> = BTreeMap::new();
    for (c, w) in paths {
        *post.entry(index(&c)).or_insert(0.0) += w;
    }
    let total: f64 = post.values().sum();
    for v in post.values_mut() {
        *v /= total;
    }
    post
}

/// Writes a line straight to stderr so it shows even when the harness
/// captures test output.
pub fn report(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}
