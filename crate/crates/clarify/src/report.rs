//! Comparison tables and per-episode audit logs for evaluation runs.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clarify_core::eval::{EvalReport, SystemKind};
use serde::Serialize;

/// Row labels of the comparison table, in order.
pub const METRIC_ROWS: [&str; 5] = ["Good answers", "Bad answers", "Fallback", "macro-F1", "micro-F1"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no reports to emit")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn metric(report: &EvalReport, row: usize) -> f64 {
    match row {
        0 => report.good_rate,
        1 => report.bad_rate,
        2 => report.fallback_rate,
        3 => report.macro_f1,
        _ => report.micro_f1,
    }
}

fn format_metric(report: &EvalReport, row: usize) -> String {
    let value = metric(report, row);
    let counts = [report.good, report.bad, report.fallback];
    match counts.get(row) {
        Some(n) => format!("{:.1}% ({n}/{})", 100.0 * value, report.total),
        None => format!("{value:.2}"),
    }
}

/// Plain-text comparison table, one column per report.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut header = vec![String::new()];
    header.extend(reports.iter().map(|r| r.label().to_owned()));
    let mut rows = vec![header];
    for (i, name) in METRIC_ROWS.iter().enumerate() {
        let mut row = vec![(*name).to_owned()];
        row.extend(reports.iter().map(|r| format_metric(r, i)));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

#[derive(Serialize)]
struct ComparisonRow<'a> {
    metric: &'a str,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct Column<'a> {
    system: SystemKind,
    label: &'a str,
    config: &'a clarify_core::eval::ReportConfig,
    total: usize,
    good: usize,
    bad: usize,
    fallback: usize,
    funnel: &'a clarify_core::eval::StageFunnel,
    per_intent: &'a [clarify_core::eval::IntentScore],
}

#[derive(Serialize)]
struct Comparison<'a> {
    columns: Vec<Column<'a>>,
    rows: Vec<ComparisonRow<'a>>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct EpisodeLine<'a> {
    query: &'a str,
    gold: &'a str,
    predicted: &'a str,
    confidence: f64,
    path: &'a [clarify_core::ActionKind],
    terminal_stage: clarify_core::TerminalStage,
    delivered: Option<&'a str>,
    verdict: clarify_core::Verdict,
}

fn slug(system: SystemKind) -> &'static str {
    match system {
        SystemKind::SimpleFallback => "simple_fallback",
        SystemKind::OptimizedFallback => "optimized_fallback",
        SystemKind::Clarification => "clarification",
    }
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub json: PathBuf,
    pub tsv: PathBuf,
    pub episode_logs: Vec<PathBuf>,
}

/// Writes `comparison.txt`, `comparison.json`, `comparison.tsv` and one
/// `episodes_<system>.jsonl` per report into `dir` (created if missing).
/// `notes` are copied into the JSON table.
pub fn emit_report(
    reports: &[EvalReport],
    notes: &[String],
    dir: impl AsRef<Path>,
) -> Result<ReportFiles, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    let dir = dir.as_ref();
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let table = dir.join("comparison.txt");
    fs::write(&table, render_table(reports)).map_err(io_err(&table))?;

    let comparison = Comparison {
        columns: reports
            .iter()
            .map(|r| Column {
                system: r.system,
                label: r.label(),
                config: &r.config,
                total: r.total,
                good: r.good,
                bad: r.bad,
                fallback: r.fallback,
                funnel: &r.funnel,
                per_intent: &r.per_intent,
            })
            .collect(),
        rows: METRIC_ROWS
            .iter()
            .enumerate()
            .map(|(i, metric_name)| ComparisonRow {
                metric: metric_name,
                values: reports.iter().map(|r| metric(r, i)).collect(),
            })
            .collect(),
        notes,
    };
    let json = dir.join("comparison.json");
    let text = serde_json::to_string_pretty(&comparison).expect("report serializes");
    fs::write(&json, text + "\n").map_err(io_err(&json))?;

    let tsv = dir.join("comparison.tsv");
    let mut out = String::from("metric");
    for r in reports {
        out.push('\t');
        out.push_str(r.label());
    }
    out.push('\n');
    for (i, name) in METRIC_ROWS.iter().enumerate() {
        out.push_str(name);
        for r in reports {
            let _ = write!(out, "\t{:.6}", metric(r, i));
        }
        out.push('\n');
    }
    fs::write(&tsv, out).map_err(io_err(&tsv))?;

    let mut episode_logs = Vec::new();
    for r in reports {
        let path = dir.join(format!("episodes_{}.jsonl", slug(r.system)));
        write_episodes(r, &path).map_err(io_err(&path))?;
        episode_logs.push(path);
    }
    Ok(ReportFiles {
        table,
        json,
        tsv,
        episode_logs,
    })
}

fn write_episodes(report: &EvalReport, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for e in &report.episodes {
        let line = EpisodeLine {
            query: &e.query,
            gold: e.gold.as_str(),
            predicted: e.predicted.as_str(),
            confidence: e.confidence,
            path: &e.path,
            terminal_stage: e.terminal_stage,
            delivered: e.delivered.as_ref().map(|d| d.as_str()),
            verdict: e.verdict,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
