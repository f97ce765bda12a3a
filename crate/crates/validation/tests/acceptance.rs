//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! and asserts the same condition, so `cargo test --test acceptance` shows
//! the full scorecard even when some criteria fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    brute_force_posterior, cells_of, naive_q, naive_v, report, HistoryStep, OracleOpponent,
};
use rbt_core::{
    aggregate_by_timestep, argmax_set, initial_belief, mean_ci95, mixture_values, predict,
    run_batch, run_episode, solve_q, update, Action, ActionValues, Belief, Board, CellMark,
    EpisodeConfig, EpisodeResult, Observation, OpponentModel, PolicyKind, QTable, StateIndex,
    WindowShape,
};

const SWEEP_EPISODES: usize = 1000;
const SWEEP_SEED: u64 = 0;
const SWEEP_WINDOWS: [(usize, usize); 5] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];
/// Reference mixture returns for the five sweep windows, checked softly.
const REFERENCE_MIXTURE: [f64; 5] = [0.215, 0.316, 0.532, 0.592, 0.813];
const EMPTY_BOARD_VALUE: f64 = 0.9947916666666666;

fn q_uniform() -> &'static QTable {
    static Q: OnceLock<QTable> = OnceLock::new();
    Q.get_or_init(|| solve_q(OpponentModel::UniformRandom).unwrap())
}

fn shape(h: usize, w: usize) -> WindowShape {
    WindowShape::new(h, w).unwrap()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn returns(results: &[EpisodeResult]) -> Vec<f64> {
    results.iter().map(|r| r.ret).collect()
}

struct Cell {
    shape: WindowShape,
    mixture: Vec<EpisodeResult>,
    maxbelief: Vec<EpisodeResult>,
    single: Vec<EpisodeResult>,
}

struct Sweep {
    cells: Vec<Cell>,
    elapsed: Duration,
}

/// The five-window sweep shared by the dominance, ordering and margin
/// criteria. Timed from the solve onwards.
fn sweep() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| {
        let start = Instant::now();
        let q = q_uniform();
        let cells = SWEEP_WINDOWS
            .iter()
            .map(|&(h, w)| {
                let run = |policy| {
                    let cfg = EpisodeConfig::new(
                        shape(h, w),
                        OpponentModel::UniformRandom,
                        policy,
                        SWEEP_SEED,
                    );
                    run_batch(&cfg, q, SWEEP_EPISODES).unwrap()
                };
                Cell {
                    shape: shape(h, w),
                    mixture: run(PolicyKind::Mixture),
                    maxbelief: run(PolicyKind::MaxBelief),
                    single: run(PolicyKind::SingleMaxBelief),
                }
            })
            .collect();
        Sweep {
            cells,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_1_mixture_dominates() {
    let s = sweep();
    let mut ok = s.elapsed < Duration::from_secs(60);
    let mut detail = Vec::new();
    for cell in &s.cells {
        let (m, mci) = mean_ci95(&returns(&cell.mixture)).unwrap();
        let (a, aci) = mean_ci95(&returns(&cell.maxbelief)).unwrap();
        let (d, _) = mean_ci95(&returns(&cell.single)).unwrap();
        let cell_ok = if cell.shape.area() <= 4 {
            m - a >= 0.1 && m - mci > a + aci
        } else {
            m > a
        };
        ok &= cell_ok;
        detail.push(format!(
            "{}: mixture {m:.3}±{mci:.3} maxbelief {a:.3}±{aci:.3} gap {:+.3} [{}] (single-state diagnostic {d:.3})",
            cell.shape,
            m - a,
            verdict(cell_ok)
        ));
    }
    report(&format!(
        "criterion 1 (mixture dominates max-belief): {} in {:.2}s",
        verdict(ok),
        s.elapsed.as_secs_f64()
    ));
    for line in &detail {
        report(&format!("    {line}"));
    }
    assert!(
        ok,
        "mixture does not dominate max-belief by the required gap"
    );
}

#[test]
fn criterion_2_window_ordering() {
    let s = sweep();
    let means = |pick: fn(&Cell) -> &Vec<EpisodeResult>| -> Vec<f64> {
        s.cells
            .iter()
            .map(|c| mean_ci95(&returns(pick(c))).unwrap().0)
            .collect()
    };
    let mut ok = true;
    for (name, m) in [
        ("mixture", means(|c| &c.mixture)),
        ("maxbelief", means(|c| &c.maxbelief)),
    ] {
        // index 0 is 1x1 and index 4 is 3x2
        let highest = m.iter().all(|&v| v <= m[4]);
        let lowest = m.iter().all(|&v| v >= m[0]);
        ok &= highest && lowest;
        report(&format!(
            "    {name}: {}",
            m.iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    report(&format!(
        "criterion 2 (3x2 highest, 1x1 lowest): {}",
        verdict(ok)
    ));
    let mix = means(|c| &c.mixture);
    for ((cell, v), r) in s.cells.iter().zip(&mix).zip(REFERENCE_MIXTURE) {
        let within = (v - r).abs() <= 0.15;
        report(&format!(
            "    soft check {}: mixture {v:.3} vs reference {r:.3} {}",
            cell.shape,
            if within {
                "within 0.15"
            } else {
                "outside 0.15"
            }
        ));
    }
    assert!(ok);
}

#[test]
fn criterion_3_policy_disagreement_over_time() {
    let s = sweep();
    let cell = s.cells.iter().find(|c| c.shape == shape(2, 2)).unwrap();
    let agg = aggregate_by_timestep(&cell.mixture);
    let at = |t: usize| agg.iter().find(|a| a.t == t).unwrap();
    let t0 = at(0).mean_iou == 1.0 && at(0).mean_margin == 0.0;
    let later_iou = agg.iter().any(|a| a.t >= 1 && a.mean_iou < 1.0);
    let band = [1, 2]
        .iter()
        .all(|&t| (0.05..=0.4).contains(&at(t).mean_margin));
    let ok = t0 && later_iou && band;
    report(&format!(
        "criterion 3 (2x2 IoU and value margin by step): {}",
        verdict(ok)
    ));
    for a in &agg {
        report(&format!(
            "    t={} IoU {:.4} M_alt {:.4} (n={})",
            a.t, a.mean_iou, a.mean_margin, a.samples
        ));
    }
    report(&format!(
        "    t=0 exact: {t0}; IoU<1 at some t>=1: {later_iou}; M_alt in [0.05, 0.4] at t=1,2: {band}"
    ));
    assert!(ok);
}

fn to_cells(b: &Board) -> common::Cells {
    let mut c = [0u8; 9];
    for (i, m) in b.cells().iter().enumerate() {
        c[i] = match m {
            CellMark::Empty => 0,
            CellMark::X => 1,
            CellMark::O => 2,
        };
    }
    c
}

fn history_step(obs: &Observation, action: Option<usize>) -> HistoryStep {
    let p = obs.placement;
    HistoryStep {
        window: (p.top, p.left, p.shape.height(), p.shape.width()),
        contents: obs
            .contents
            .iter()
            .map(|m| match m {
                CellMark::Empty => 0,
                CellMark::X => 1,
                CellMark::O => 2,
            })
            .collect(),
        action,
    }
}

#[test]
fn criterion_4_filter_matches_enumeration() {
    let start = Instant::now();
    let shapes = WindowShape::all();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    let mut ok = true;
    for _ in 0..200 {
        let shape = shapes[rng.gen_range(0..shapes.len())];
        let placements = shape.placements();
        let decisions = rng.gen_range(1..=3);
        let mut truth = Board::empty();
        let mut belief = initial_belief();
        let mut history: Vec<HistoryStep> = Vec::new();
        for t in 0..decisions {
            let obs = Observation::sense(&truth, placements[rng.gen_range(0..placements.len())]);
            if t > 0 {
                let a = history.last().unwrap().action.unwrap();
                belief = predict(
                    &belief,
                    Action::new(a).unwrap(),
                    OpponentModel::UniformRandom,
                )
                .unwrap();
            }
            belief = update(&belief, &obs).unwrap();
            history.push(history_step(&obs, None));

            let oracle = brute_force_posterior(&history, placements.len());
            let keys: Vec<u32> = belief.support().map(|s| s.0).collect();
            ok &= keys == oracle.keys().copied().collect::<Vec<_>>();
            for (s, p) in &oracle {
                worst = worst.max((belief.probability(StateIndex(*s)) - p).abs());
            }
            compared += 1;

            // continue with a legal move that keeps the true game going
            let empties = common::empties(&to_cells(&truth));
            let a = empties[rng.gen_range(0..empties.len())];
            history.last_mut().unwrap().action = Some(a);
            truth = truth.apply(Action::new(a).unwrap(), CellMark::X).unwrap();
            if truth.status().is_terminal() {
                break;
            }
            let replies = common::empties(&to_cells(&truth));
            let r = replies[rng.gen_range(0..replies.len())];
            truth = truth.apply(Action::new(r).unwrap(), CellMark::O).unwrap();
            if truth.status().is_terminal() {
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= worst <= 1e-9 && elapsed < Duration::from_secs(10);
    report(&format!(
        "criterion 4 (filter equals brute-force posterior): {} over {compared} posteriors, max error {worst:.2e}, {:.2}s",
        verdict(ok),
        elapsed.as_secs_f64()
    ));
    assert!(ok);
}

#[test]
fn criterion_5_solver_matches_naive_expectimax() {
    let q = q_uniform();
    let states: Vec<StateIndex> = q.entries().map(|(s, _)| s).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = states[rng.gen_range(0..states.len())];
        let c = cells_of(s.0);
        let row = q.row(s).unwrap();
        for (a, v) in row.iter().enumerate() {
            worst = worst.max((v - naive_q(&c, a, OracleOpponent::Uniform)).abs());
        }
    }
    let oracle_empty = naive_v(&[0; 9], OracleOpponent::Uniform);
    let empty_ok = (q.value(StateIndex(0)).unwrap() - oracle_empty).abs() <= 1e-12
        && (oracle_empty - EMPTY_BOARD_VALUE).abs() <= 1e-12;

    let minimax = solve_q(OpponentModel::Minimax).unwrap();
    let minimax_zero = minimax.value(StateIndex(0)).unwrap() == 0.0;

    let mut terminal_ok = true;
    for table in [q, &minimax] {
        for (s, row) in table.entries() {
            let c = cells_of(s.0);
            for a in 0..9 {
                if c[a] != 0 {
                    terminal_ok &= row[a] == -1.0;
                } else {
                    let mut n = c;
                    n[a] = 1;
                    if common::wins(&n, 1) {
                        terminal_ok &= row[a] == 1.0;
                    }
                }
            }
        }
    }
    let ok = worst <= 1e-12 && empty_ok && minimax_zero && terminal_ok;
    report(&format!(
        "criterion 5 (Q-solver exact): {} max error {worst:.2e} on 100 states; V(empty) {} vs oracle {oracle_empty}; minimax V(empty) = {}; immediate win/invalid exhaustive: {terminal_ok}",
        verdict(ok),
        q.value(StateIndex(0)).unwrap(),
        minimax.value(StateIndex(0)).unwrap()
    ));
    assert!(ok);
}

#[test]
fn criterion_6_full_window_collapses_to_mdp() {
    let q = q_uniform();
    let full = shape(3, 3);
    let cfg = EpisodeConfig::new(full, OpponentModel::UniformRandom, PolicyKind::Mixture, 600);
    let episodes = run_batch(&cfg, q, 1000).unwrap();
    let mut point_mass = true;
    let mut agree = true;
    for ep in &episodes {
        for step in &ep.steps {
            point_mass &= step.belief.len() == 1 && step.belief.get(&step.true_state) == Some(&1.0);
            agree &= step.a_mix == step.a_max;
        }
    }
    let mc_cfg = cfg.with_seed(60_000);
    let mc = returns(&run_batch(&mc_cfg, q, 10_000).unwrap());
    let (mean, _) = mean_ci95(&mc).unwrap();
    let n = mc.len() as f64;
    let sd = (mc.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    let oracle = naive_v(&[0; 9], OracleOpponent::Uniform);
    let mc_ok = (mean - oracle).abs() <= 3.0 * se;
    let ok = point_mass && agree && mc_ok;
    report(&format!(
        "criterion 6 (3x3 window is the full-information game): {} point mass: {point_mass}; A_mix = A_max: {agree}; MC {mean:.4} vs {oracle:.4} (3·SE {:.4})",
        verdict(ok),
        3.0 * se
    ));
    assert!(ok);
}

fn split_linearity_error(belief: &Belief, q: &QTable) -> f64 {
    let support: Vec<(StateIndex, f64)> = belief.iter().collect();
    if support.len() < 2 {
        return 0.0;
    }
    let (left, right) = support.split_at(support.len() / 2);
    let alpha: f64 = left.iter().map(|&(_, p)| p).sum::<f64>() / belief.total();
    let b1 = Belief::from_weights(left.iter().copied()).unwrap();
    let b2 = Belief::from_weights(right.iter().copied()).unwrap();
    let whole = mixture_values(belief, q).unwrap();
    let v1 = mixture_values(&b1, q).unwrap();
    let v2 = mixture_values(&b2, q).unwrap();
    (0..9)
        .map(|a| (whole.0[a] - (alpha * v1.0[a] + (1.0 - alpha) * v2.0[a])).abs())
        .fold(0.0, f64::max)
}

fn argmax_invariant(values: &ActionValues) -> bool {
    let base = argmax_set(values, 1e-9);
    let shifted = ActionValues(values.0.map(|v| v + 0.37));
    let scaled = ActionValues(values.0.map(|v| v * 2.5));
    argmax_set(&shifted, 1e-9) == base && argmax_set(&scaled, 1e-9) == base
}

#[test]
fn criterion_7_episode_invariants() {
    let q = q_uniform();
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |what| *failures.entry(what).or_insert(0) += 1;
    let mut steps = 0usize;
    for (k, shape) in WindowShape::all().into_iter().enumerate() {
        for policy in [PolicyKind::Mixture, PolicyKind::MaxBelief] {
            let cfg = EpisodeConfig::new(
                shape,
                OpponentModel::UniformRandom,
                policy,
                70_000 + 1000 * k as u64,
            );
            let batch = run_batch(&cfg, q, 500).unwrap();
            for (i, ep) in batch.iter().enumerate() {
                let again = run_episode(&cfg.with_seed(cfg.seed + i as u64), q).unwrap();
                if serde_json::to_vec(ep).unwrap() != serde_json::to_vec(&again).unwrap() {
                    fail("rerun differs");
                }
                for step in &ep.steps {
                    steps += 1;
                    let total: f64 = step.belief.values().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        fail("normalization");
                    }
                    if step.belief.get(&step.true_state).is_none_or(|&p| p <= 0.0) {
                        fail("truth outside support");
                    }
                    for s in step.belief.keys() {
                        let (x, o) = Board::decode(*s).unwrap().counts();
                        if x != step.t || o != step.t {
                            fail("parity");
                        }
                    }
                    if step.margin < -1e-9 {
                        fail("negative margin");
                    }
                    if !(0.0..=1.0).contains(&step.iou) {
                        fail("IoU range");
                    }
                    let belief =
                        Belief::from_weights(step.belief.iter().map(|(&s, &p)| (s, p))).unwrap();
                    let values = mixture_values(&belief, q).unwrap();
                    if !argmax_invariant(&values) {
                        fail("argmax invariance");
                    }
                    if split_linearity_error(&belief, q) > 1e-12 {
                        fail("linearity");
                    }
                }
            }
        }
    }
    let ok = failures.is_empty();
    report(&format!(
        "criterion 7 (episode invariants, 9 shapes x 2 policies x 500 episodes, {steps} steps): {} {:?}",
        verdict(ok),
        failures
    ));
    assert!(ok);
}
