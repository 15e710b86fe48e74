//! Reports derived from an archive: per-round traces, normalized-time
//! curves, pairwise win/loss counts and an SVG plot. Everything here is a
//! pure function of the records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::RunRecord;
use super::HarnessError;
use crate::stats::{normalized_curve, win_loss_test, RunSteps, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub teacher: String,
    pub learner: String,
    pub dataset: String,
    pub seed: u64,
    pub trial: usize,
    pub round: usize,
    pub train_size: usize,
    pub set_size: usize,
    pub random_added: usize,
    pub targeted_added: usize,
    pub elapsed: f64,
    pub is_best: bool,
    pub pooled_acc: Option<f64>,
    pub ci_lower: Option<f64>,
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub teacher: String,
    pub learner: String,
    pub dataset: String,
    pub t: f64,
    pub mean_acc: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinLossRow {
    pub learner: String,
    pub teacher_a: String,
    pub teacher_b: String,
    /// Matched `(dataset, seed, trial)` runs compared.
    pub compared: usize,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub traces: PathBuf,
    pub curves: PathBuf,
    pub win_loss: PathBuf,
    pub svg: Option<PathBuf>,
}

pub fn trace_rows(records: &[RunRecord]) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for r in records {
        let Some(run) = r.run() else { continue };
        for rec in &run.rounds {
            rows.push(TraceRow {
                teacher: r.teacher.clone(),
                learner: r.learner.clone(),
                dataset: r.dataset.clone(),
                seed: r.seed,
                trial: r.trial,
                round: rec.round,
                train_size: rec.train_size,
                set_size: rec.set_size,
                random_added: rec.random_added,
                targeted_added: rec.targeted_added,
                elapsed: rec.elapsed,
                is_best: rec.is_best,
                pooled_acc: rec.pooled_acc,
                ci_lower: rec.ci_lower,
                test_accuracy: rec.test_accuracy,
            });
        }
    }
    rows
}

/// Accuracy of the would-return model as a step function of time.
pub fn run_steps(record: &RunRecord) -> Option<RunSteps> {
    let run = record.run()?;
    Some(RunSteps { t_full: record.t_full.mean, steps: run.model_timeline(), baseline: record.majority_baseline })
}

/// Mean normalized-time curve per `(teacher, learner, dataset)`, over runs
/// whose full-training time is valid.
pub fn curve_rows(records: &[RunRecord], grid: &[f64]) -> Vec<CurveRow> {
    let mut groups: BTreeMap<(String, String, String), Vec<RunSteps>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.t_full.valid) {
        if let Some(steps) = run_steps(r) {
            groups.entry((r.teacher.clone(), r.learner.clone(), r.dataset.clone())).or_default().push(steps);
        }
    }
    let mut rows = Vec::new();
    for ((teacher, learner, dataset), runs) in groups {
        for p in normalized_curve(&runs, grid) {
            rows.push(CurveRow {
                teacher: teacher.clone(),
                learner: learner.clone(),
                dataset: dataset.clone(),
                t: p.t,
                mean_acc: p.mean_acc,
                n_runs: p.n_runs,
            });
        }
    }
    rows
}

/// Every pair of teachers per learner, compared on matched runs by final
/// test accuracy.
pub fn win_loss_rows(records: &[RunRecord]) -> Vec<WinLossRow> {
    // learner -> teacher -> (dataset, seed, trial) -> (accuracy, test size)
    type Runs = BTreeMap<(String, u64, usize), (f64, usize)>;
    let mut by_learner: BTreeMap<String, BTreeMap<String, Runs>> = BTreeMap::new();
    for r in records {
        if let Some(acc) = r.final_accuracy() {
            by_learner
                .entry(r.learner.clone())
                .or_default()
                .entry(r.teacher.clone())
                .or_default()
                .insert((r.dataset.clone(), r.seed, r.trial), (acc, r.test_size));
        }
    }
    let mut rows = Vec::new();
    for (learner, teachers) in &by_learner {
        let names: Vec<&String> = teachers.keys().collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let mut row = WinLossRow {
                    learner: learner.clone(),
                    teacher_a: (*a).clone(),
                    teacher_b: (*b).clone(),
                    compared: 0,
                    wins: 0,
                    losses: 0,
                    ties: 0,
                };
                for (key, &(acc_a, m)) in &teachers[*a] {
                    let Some(&(acc_b, _)) = teachers[*b].get(key) else { continue };
                    row.compared += 1;
                    match win_loss_test(acc_a, acc_b, m) {
                        Verdict::AWins => row.wins += 1,
                        Verdict::BWins => row.losses += 1,
                        Verdict::Tie => row.ties += 1,
                    }
                }
                rows.push(row);
            }
        }
    }
    rows
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const CURVE_COLUMNS: [&str; 6] = ["teacher", "learner", "dataset", "t", "mean_acc", "n_runs"];

/// Writes `traces.csv`, `curves.csv`, `win_loss.csv` and, if asked,
/// `curves.svg` into `dir`.
pub fn emit_reports(records: &[RunRecord], grid: &[f64], dir: &Path, svg: bool) -> Result<ReportFiles, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::InvalidData("no records to report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        traces: dir.join("traces.csv"),
        curves: dir.join("curves.csv"),
        win_loss: dir.join("win_loss.csv"),
        svg: svg.then(|| dir.join("curves.svg")),
    };
    write_csv(
        &files.traces,
        &trace_rows(records),
        &[
            "teacher",
            "learner",
            "dataset",
            "seed",
            "trial",
            "round",
            "train_size",
            "set_size",
            "random_added",
            "targeted_added",
            "elapsed",
            "is_best",
            "pooled_acc",
            "ci_lower",
            "test_accuracy",
        ],
    )?;
    let curves = curve_rows(records, grid);
    write_csv(&files.curves, &curves, &CURVE_COLUMNS)?;
    write_csv(
        &files.win_loss,
        &win_loss_rows(records),
        &["learner", "teacher_a", "teacher_b", "compared", "wins", "losses", "ties"],
    )?;
    if let Some(path) = &files.svg {
        std::fs::write(path, curves_svg(&curves))?;
    }
    Ok(files)
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Line plot of mean accuracy against normalized time, one line per
/// `(teacher, learner, dataset)`.
pub fn curves_svg(rows: &[CurveRow]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    type Key<'a> = (&'a str, &'a str, &'a str);
    let mut groups: BTreeMap<Key, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.teacher, &r.learner, &r.dataset)).or_default().push((r.t, r.mean_acc));
    }
    let t_max = rows.iter().map(|r| r.t).fold(0.0, f64::max).max(1e-12);
    let lo = rows.iter().map(|r| r.mean_acc).fold(1.0, f64::min).min(1.0);
    let span = (1.0 - lo).max(1e-3);
    let x = |t: f64| pad + t / t_max * (w - 2.0 * pad);
    let y = |a: f64| h - pad - (a - lo) / span * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#, h - pad, w - pad);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">normalized time</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{}">{lo:.3}</text><text x="{pad}" y="{}">1.000</text>"#,
        h - pad + 15.0,
        pad - 5.0
    );
    for (i, ((teacher, learner, dataset), pts)) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(t, a)| format!("{:.2},{:.2}", x(t), y(a))).collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{teacher} / {learner} / {dataset}</text>"#,
            w - pad - 200.0,
            pad + 14.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}
