//! CSV, JSONL and SVG writers. All output is a deterministic function of
//! its input rows.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use rbt_core::{EpisodeResult, StepRecord, SweepRow};

use crate::sweep::{WindowMetrics, POLICY_PAIR};

pub const RETURNS_HEADER: [&str; 5] = ["window", "policy", "episodes", "mean_return", "ci95"];
pub const TIMESTEP_HEADER: [&str; 6] = [
    "window",
    "policy_pair",
    "t",
    "mean_iou",
    "mean_margin",
    "samples",
];

/// Formats `x` with 6 significant digits in plain decimal notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // -0.000000 style results of tiny negatives
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn returns_record(row: &SweepRow) -> [String; 5] {
    [
        row.shape.to_string(),
        row.policy.clone(),
        row.episodes.to_string(),
        sig6(row.mean_return),
        sig6(row.ci95),
    ]
}

pub fn write_returns_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(RETURNS_HEADER)?;
    for row in rows {
        w.write_record(returns_record(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Appends one row, writing the header first if the file is new or empty.
pub fn append_returns_row(path: &Path, row: &SweepRow) -> Result<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(RETURNS_HEADER)?;
    }
    w.write_record(returns_record(row))?;
    w.flush()?;
    Ok(())
}

pub fn write_timestep_csv(path: &Path, windows: &[WindowMetrics]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(TIMESTEP_HEADER)?;
    for wm in windows {
        for agg in &wm.aggregates {
            w.write_record([
                wm.shape.to_string(),
                POLICY_PAIR.to_string(),
                agg.t.to_string(),
                sig6(agg.mean_iou),
                sig6(agg.mean_margin),
                agg.samples.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per step: the step record plus its `episode` index.
pub fn write_trace_jsonl(path: &Path, episodes: &[EpisodeResult]) -> Result<()> {
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for (i, ep) in episodes.iter().enumerate() {
        for step in &ep.steps {
            let mut value = serde_json::to_value(step)?;
            value
                .as_object_mut()
                .expect("step records serialize as objects")
                .insert("episode".into(), i.into());
            serde_json::to_writer(&mut out, &value)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_jsonl(path: &Path) -> Result<Vec<(usize, StepRecord)>> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut steps = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).with_context(|| format!("line {}", n + 1))?;
        let episode = value
            .get("episode")
            .and_then(|e| e.as_u64())
            .with_context(|| format!("line {}: missing episode index", n + 1))?
            as usize;
        steps.push((episode, serde_json::from_value(value)?));
    }
    Ok(steps)
}

/// Grouped bar chart of mean returns with 95% CI error bars, one group per
/// window and one bar per policy, in row order.
pub fn returns_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 130.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 50.0;
    const COLORS: [&str; 4] = ["#4477aa", "#ee6677", "#228833", "#ccbb44"];

    let mut windows: Vec<String> = Vec::new();
    let mut policies: Vec<String> = Vec::new();
    for r in rows {
        let w = r.shape.to_string();
        if !windows.contains(&w) {
            windows.push(w);
        }
        if !policies.contains(&r.policy) {
            policies.push(r.policy.clone());
        }
    }
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let y = |v: f64| TOP + (1.0 - v.clamp(-1.0, 1.0)) / 2.0 * plot_h;
    let group_w = plot_w / windows.len().max(1) as f64;
    let bar_w = group_w * 0.8 / policies.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let ty = y(tick);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="{}" stroke-width="1"/>"##,
            LEFT + plot_w,
            if tick == 0.0 { "#000000" } else { "#dddddd" }
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick:.1}</text>"#,
            LEFT - 6.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">mean return</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (gi, window) in windows.iter().enumerate() {
        let gx = LEFT + gi as f64 * group_w + group_w * 0.1;
        for (pi, policy) in policies.iter().enumerate() {
            let Some(r) = rows
                .iter()
                .find(|r| &r.shape.to_string() == window && &r.policy == policy)
            else {
                continue;
            };
            let x = gx + pi as f64 * bar_w;
            let (y0, y1) = (y(0.0), y(r.mean_return));
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                y0.min(y1),
                bar_w * 0.9,
                (y1 - y0).abs(),
                COLORS[pi % COLORS.len()]
            );
            let cx = x + bar_w * 0.45;
            let (lo, hi) = (y(r.mean_return - r.ci95), y(r.mean_return + r.ci95));
            let _ = writeln!(
                s,
                r##"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="#000000" stroke-width="1.5"/>"##
            );
            for cap in [lo, hi] {
                let _ = writeln!(
                    s,
                    r##"<line x1="{:.2}" y1="{cap:.2}" x2="{:.2}" y2="{cap:.2}" stroke="#000000" stroke-width="1.5"/>"##,
                    cx - 4.0,
                    cx + 4.0
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{window}</text>"#,
            LEFT + (gi as f64 + 0.5) * group_w,
            TOP + plot_h + 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">sense window</text>"#,
        LEFT + plot_w / 2.0,
        H - 8.0
    );
    for (pi, policy) in policies.iter().enumerate() {
        let ly = TOP + 10.0 + pi as f64 * 20.0;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            ly - 10.0,
            COLORS[pi % COLORS.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}">{policy}</text>"#,
            lx + 18.0
        );
    }
    s.push_str("</svg>\n");
    s
}
