use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rbt_bench::manifest::{file_sha256, RunManifest};
use rbt_bench::output::{
    append_returns_row, returns_svg, sig6, write_returns_csv, write_timestep_csv, write_trace_jsonl,
};
use rbt_bench::replay::render_episode;
use rbt_bench::sweep::{
    default_windows, run_episodes, summarize, sweep_with_opponent, SWEEP_POLICIES,
};
use rbt_core::{
    run_episode, solve_q, EpisodeConfig, OpponentModel, PolicyKind, QTable, StateIndex, WindowShape,
};

#[derive(Parser)]
#[command(
    name = "rbt",
    version,
    about = "Reconnaissance Blind TicTacToe benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the fully-observable Q-table and write it to disk.
    Solve {
        /// uniform, minimax or eps:<p>
        #[arg(long, default_value = "uniform")]
        opponent: OpponentModel,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run episodes for one window and policy.
    Run {
        #[arg(long, env = "RBT_QTABLE")]
        q: PathBuf,
        /// Sensing window as HxW (rows x columns).
        #[arg(long)]
        window: WindowShape,
        #[arg(long, default_value = "mixture")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Opponent model used inside the belief filter; defaults to the
        /// Q-table's opponent.
        #[arg(long)]
        belief_opponent: Option<OpponentModel>,
        /// Write one JSON line per step.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Append the summary row to this CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Run both policies on several windows and write returns, per-step
    /// metrics and a chart.
    Sweep {
        #[arg(long, env = "RBT_QTABLE")]
        q: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1x1,2x1,2x2,3x1,3x2")]
        windows: Vec<WindowShape>,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print one episode step by step with its full belief.
    Replay {
        #[arg(long, env = "RBT_QTABLE")]
        q: PathBuf,
        #[arg(long)]
        window: WindowShape,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mixture")]
        policy: PolicyKind,
        #[arg(long)]
        verbose: bool,
    },
}

fn load_q(path: &Path) -> Result<QTable> {
    QTable::load(path).with_context(|| format!("loading Q-table {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { opponent, out } => {
            let q = solve_q(opponent)?;
            q.save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("opponent: {opponent}");
            println!("states: {}", q.len());
            println!("empty-board value: {}", q.value(StateIndex(0))?);
        }
        Command::Run {
            q: q_path,
            window,
            policy,
            episodes,
            seed,
            belief_opponent,
            trace,
            out,
            manifest,
        } => {
            if episodes < 2 {
                bail!("--episodes must be at least 2");
            }
            let q = load_q(&q_path)?;
            let mut config = EpisodeConfig::new(window, q.opponent(), policy, seed);
            if let Some(model) = belief_opponent {
                config.belief_opponent_model = model;
            }
            let results = run_episodes(&config, &q, episodes)?;
            let row = summarize(window, policy, &results)?;
            println!(
                "{},{},{},{},{}",
                row.shape,
                row.policy,
                row.episodes,
                sig6(row.mean_return),
                sig6(row.ci95)
            );
            if let Some(path) = out {
                append_returns_row(&path, &row)?;
            }
            if let Some(path) = trace {
                write_trace_jsonl(&path, &results)?;
            }
            if let Some(path) = manifest {
                RunManifest {
                    tool_version: env!("CARGO_PKG_VERSION").into(),
                    command: "run".into(),
                    windows: vec![window.to_string()],
                    opponent: config.opponent.to_string(),
                    belief_opponent: config.belief_opponent_model.to_string(),
                    policies: vec![policy.to_string()],
                    seed,
                    episodes,
                    qtable_path: q_path.display().to_string(),
                    qtable_sha256: file_sha256(&q_path)?,
                }
                .write(&path)?;
            }
        }
        Command::Sweep {
            q: q_path,
            windows,
            episodes,
            seed,
            out_dir,
        } => {
            if episodes < 2 {
                bail!("--episodes must be at least 2");
            }
            let windows = if windows.is_empty() {
                default_windows()
            } else {
                windows
            };
            let q = load_q(&q_path)?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let result = sweep_with_opponent(&q, q.opponent(), &windows, episodes, seed)?;
            write_returns_csv(&out_dir.join("returns.csv"), &result.rows)?;
            write_timestep_csv(&out_dir.join("timestep_metrics.csv"), &result.timestep)?;
            std::fs::write(out_dir.join("returns.svg"), returns_svg(&result.rows))?;
            RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                command: "sweep".into(),
                windows: windows.iter().map(|w| w.to_string()).collect(),
                opponent: q.opponent().to_string(),
                belief_opponent: q.opponent().to_string(),
                policies: SWEEP_POLICIES.iter().map(|p| p.to_string()).collect(),
                seed,
                episodes,
                qtable_path: q_path.display().to_string(),
                qtable_sha256: file_sha256(&q_path)?,
            }
            .write(&out_dir.join("manifest.json"))?;
            for row in &result.rows {
                println!(
                    "{:>4} {:<10} {} ± {}",
                    row.shape.to_string(),
                    row.policy,
                    sig6(row.mean_return),
                    sig6(row.ci95)
                );
            }
        }
        Command::Replay {
            q: q_path,
            window,
            seed,
            policy,
            verbose,
        } => {
            let q = load_q(&q_path)?;
            let config = EpisodeConfig::new(window, q.opponent(), policy, seed);
            let episode = run_episode(&config, &q)?;
            print!("{}", render_episode(&episode, &q, verbose));
        }
    }
    Ok(())
}
