//! Selection reports as JSON, CSV or a plain-text table.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use sas_core::report::{GroupReport, SelectionReport};
use sas_core::sampler::describe;
use sas_core::EmbeddingPool;

use crate::error::Result;
use crate::num::{fmt9, sig9};
use crate::selection_json::ConfigDoc;

pub const CSV_HEADER: [&str; 10] = [
    "class",
    "n_pool",
    "n_candidates",
    "n_selected",
    "candidates_retained",
    "margin_mean",
    "margin_min",
    "margin_max",
    "mean_pairwise_distance",
    "external_accuracy",
];

#[derive(Debug, Serialize)]
pub struct GroupDoc {
    pub class: String,
    pub n_pool: usize,
    pub n_candidates: usize,
    pub n_selected: usize,
    pub candidates_retained: usize,
    pub margin_mean: Option<f64>,
    pub margin_min: Option<f64>,
    pub margin_max: Option<f64>,
    pub mean_pairwise_distance: Option<f64>,
}

impl GroupDoc {
    pub fn new(pool: &EmbeddingPool, g: &GroupReport) -> Self {
        Self {
            class: class_label(pool, g),
            n_pool: g.n_pool,
            n_candidates: g.n_candidates,
            n_selected: g.n_selected,
            candidates_retained: g.candidates_retained,
            margin_mean: g.margin.map(|m| sig9(m.mean)),
            margin_min: g.margin.map(|m| sig9(m.min)),
            margin_max: g.margin.map(|m| sig9(m.max)),
            mean_pairwise_distance: g.mean_pairwise_distance.map(sig9),
        }
    }

    /// Metric cells in [`CSV_HEADER`] order after `class`, without `external_accuracy`.
    pub fn cells(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt9).unwrap_or_default();
        vec![
            self.n_pool.to_string(),
            self.n_candidates.to_string(),
            self.n_selected.to_string(),
            self.candidates_retained.to_string(),
            opt(self.margin_mean),
            opt(self.margin_min),
            opt(self.margin_max),
            opt(self.mean_pairwise_distance),
        ]
    }
}

fn class_label(pool: &EmbeddingPool, g: &GroupReport) -> String {
    match g.class {
        Some(c) => pool.class_names()[c].clone(),
        None => "overall".into(),
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDoc {
    pub config: ConfigDoc,
    pub classes: Vec<GroupDoc>,
    pub overall: GroupDoc,
    pub max_cache_error: f64,
    /// Filled in by users who train downstream models elsewhere.
    pub external_accuracy: Option<f64>,
}

impl ReportDoc {
    pub fn new(pool: &EmbeddingPool, report: &SelectionReport) -> Self {
        Self {
            config: ConfigDoc::from(&report.config),
            classes: report.classes.iter().map(|g| GroupDoc::new(pool, g)).collect(),
            overall: GroupDoc::new(pool, &report.overall),
            max_cache_error: sig9(report.max_cache_error),
            external_accuracy: None,
        }
    }
}

pub fn write_json<W: Write>(pool: &EmbeddingPool, report: &SelectionReport, mut sink: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, &ReportDoc::new(pool, report))?;
    sink.write_all(b"\n")?;
    Ok(())
}

/// One row per class, then an `overall` row.
pub fn write_csv<W: Write>(pool: &EmbeddingPool, report: &SelectionReport, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for g in report.classes.iter().chain(std::iter::once(&report.overall)) {
        let doc = GroupDoc::new(pool, g);
        let mut row = vec![doc.class.clone()];
        row.extend(doc.cells());
        row.push(String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table for the terminal.
pub fn table(pool: &EmbeddingPool, report: &SelectionReport) -> String {
    let rows: Vec<GroupDoc> = report
        .classes
        .iter()
        .chain(std::iter::once(&report.overall))
        .map(|g| GroupDoc::new(pool, g))
        .collect();
    let width = rows.iter().map(|r| r.class.len()).max().unwrap_or(5).max(5);
    let num = |x: Option<f64>| x.map(|v| format!("{v:>9.4}")).unwrap_or_else(|| format!("{:>9}", "undefined"));
    let mut out = String::new();
    let _ = writeln!(out, "selector: {}  ipc: {}", describe(&report.config), report.config.ipc);
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>9}  {:>9}  {:>9}  {:>9}",
        "class", "pool", "cand", "sel", "kept", "margin", "min", "max", "diversity"
    );
    for r in &rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {}  {}  {}  {}",
            r.class,
            r.n_pool,
            r.n_candidates,
            r.n_selected,
            r.candidates_retained,
            num(r.margin_mean),
            num(r.margin_min),
            num(r.margin_max),
            num(r.mean_pairwise_distance),
        );
    }
    out
}
