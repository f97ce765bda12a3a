//! Text rendering of a single episode: the sensed window, every support
//! state with its probability, and the decision taken.

use std::fmt::Write as _;

use rbt_core::{
    alt_values, mixture_values, Belief, Board, EpisodeResult, Observation, QTable, StepRecord,
};

/// Support boards per printed row.
const BOARDS_PER_ROW: usize = 6;

/// 3×3 grid of the observation; cells outside the window are blank.
pub fn render_observation(obs: &Observation) -> Vec<String> {
    (0..3)
        .map(|r| {
            let cells: String = (0..3)
                .map(|c| obs.revealed(r * 3 + c).map_or(' ', |m| m.symbol()))
                .collect();
            format!("|{cells}|")
        })
        .collect()
}

fn render_support(step: &StepRecord, out: &mut String) {
    let boards: Vec<(Board, f64)> = step
        .belief
        .iter()
        .map(|(&s, &p)| (Board::decode(s).expect("belief keys are valid boards"), p))
        .collect();
    for chunk in boards.chunks(BOARDS_PER_ROW) {
        let rendered: Vec<Vec<String>> = chunk
            .iter()
            .map(|(b, _)| b.render().lines().map(str::to_string).collect())
            .collect();
        for line in 0..3 {
            let row: Vec<String> = rendered
                .iter()
                .map(|r| format!("  {}  ", r[line]))
                .collect();
            let _ = writeln!(out, "  {}", row.join(" ").trim_end());
        }
        let probs: Vec<String> = chunk.iter().map(|(_, p)| format!("{p:<7.3}")).collect();
        let _ = writeln!(out, "  {}", probs.join(" ").trim_end());
        let _ = writeln!(out);
    }
}

fn fmt_values(values: &[f64; 9]) -> String {
    values
        .iter()
        .map(|v| format!("{v:+.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-readable trace of `episode`. With `verbose` the max-belief values
/// and the hidden state are printed as well.
pub fn render_episode(episode: &EpisodeResult, q: &QTable, verbose: bool) -> String {
    let mut out = String::new();
    for step in &episode.steps {
        let p = step.observation.placement;
        let _ = writeln!(
            out,
            "t={}  window {} at row {}, col {}",
            step.t, p.shape, p.top, p.left
        );
        for line in render_observation(&step.observation) {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(out, "support: {} state(s)", step.belief_support_size);
        render_support(step, &mut out);

        let belief = Belief::from_weights(step.belief.iter().map(|(&s, &p)| (s, p)))
            .expect("recorded beliefs are valid");
        if let Ok(values) = mixture_values(&belief, q) {
            let _ = writeln!(out, "Q~:    {}", fmt_values(&values.0));
        }
        if verbose {
            if let Ok(values) = alt_values(&belief, q) {
                let _ = writeln!(out, "Q_max: {}", fmt_values(&values.0));
            }
            let truth = Board::decode(step.true_state).expect("valid true state");
            let flat: String = truth.cells().iter().map(|c| c.symbol()).collect();
            let _ = writeln!(out, "true state: {flat}");
        }
        let _ = writeln!(
            out,
            "A_mix: {:?}  A_max: {:?}  IoU: {:.3}  M_alt: {:.3}",
            step.a_mix, step.a_max, step.iou, step.margin
        );
        let _ = writeln!(
            out,
            "chosen: {}  reward: {}",
            step.chosen_action, step.reward
        );
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "outcome: {:?}  return: {}",
        episode.outcome, episode.ret
    );
    out
}
