//! Benchmark harness for Reconnaissance Blind TicTacToe: parallel episode
//! sweeps, result files (CSV, JSONL, SVG) and episode replays.

pub mod manifest;
pub mod output;
pub mod replay;
pub mod sweep;

pub use manifest::{file_sha256, RunManifest};
pub use sweep::{default_windows, run_episodes, summarize, sweep, SweepOutput, WindowMetrics};
