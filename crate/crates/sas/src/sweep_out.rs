//! Sweep grids (JSON in) and sweep tables (CSV out).

use std::io::Write;

use serde::{Deserialize, Serialize};

use sas_core::report::{GridEntry, SweepResult};
use sas_core::{EmbeddingPool, SelectionConfig};

use crate::error::Result;
use crate::num::fmt9;
use crate::report_out::GroupDoc;
use crate::selection_json::ConfigDoc;

/// One grid entry: selection flags plus an optional pool-size multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntryDoc {
    #[serde(flatten)]
    pub config: ConfigDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_multiplier: Option<usize>,
}

/// Either a parsed entry or the reason it could not be parsed.
pub type ParsedEntry = std::result::Result<GridEntry, (ConfigDoc, String)>;

/// Parse a grid file. Entries with invalid settings are kept so the sweep can
/// report them as failed rows.
pub fn parse_grid(text: &str) -> Result<Vec<(GridEntryDoc, ParsedEntry)>> {
    let docs: Vec<GridEntryDoc> = serde_json::from_str(text)?;
    Ok(docs
        .into_iter()
        .map(|doc| {
            let parsed = SelectionConfig::try_from(&doc.config)
                .map(|config| GridEntry {
                    config,
                    pool_multiplier: doc.pool_multiplier,
                })
                .map_err(|e| (doc.config.clone(), e.to_string()));
            (doc, parsed)
        })
        .collect())
}

pub const CSV_HEADER: [&str; 21] = [
    "grid_index",
    "selector",
    "ipc",
    "ratio",
    "lambda",
    "seed",
    "no_rel",
    "no_sep",
    "no_div",
    "pool_multiplier",
    "class",
    "n_pool",
    "n_candidates",
    "n_selected",
    "candidates_retained",
    "margin_mean",
    "margin_min",
    "margin_max",
    "mean_pairwise_distance",
    "status",
    "external_accuracy",
];

fn lead(index: usize, doc: &GridEntryDoc) -> Vec<String> {
    let c = &doc.config;
    vec![
        index.to_string(),
        c.selector.clone(),
        c.ipc.to_string(),
        fmt9(c.ratio),
        fmt9(c.lambda),
        c.seed.to_string(),
        c.no_rel.to_string(),
        c.no_sep.to_string(),
        c.no_div.to_string(),
        doc.pool_multiplier.map(|m| m.to_string()).unwrap_or_default(),
    ]
}

/// Run a parsed grid against `pool` and write one row per (entry, class) plus
/// an overall row per entry. Failed entries get a single `overall` row.
pub fn run_and_write<W: Write>(
    pool: &EmbeddingPool,
    grid: &[(GridEntryDoc, ParsedEntry)],
    sink: W,
) -> Result<SweepSummary> {
    let runnable: Vec<GridEntry> = grid.iter().filter_map(|(_, p)| p.as_ref().ok().copied()).collect();
    let mut results = sas_core::report::sweep(pool, &runnable).into_iter();

    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    let mut summary = SweepSummary::default();
    for (index, (doc, parsed)) in grid.iter().enumerate() {
        let outcome: std::result::Result<_, String> = match parsed {
            Ok(_) => {
                let SweepResult { outcome, .. } = results.next().expect("one result per runnable entry");
                outcome.map_err(|e| e.to_string())
            }
            Err((_, msg)) => Err(msg.clone()),
        };
        match outcome {
            Ok(report) => {
                summary.ok += 1;
                for g in report.classes.iter().chain(std::iter::once(&report.overall)) {
                    let group = GroupDoc::new(pool, g);
                    let mut row = lead(index, doc);
                    row.push(group.class.clone());
                    row.extend(group.cells());
                    row.push("ok".into());
                    row.push(String::new());
                    w.write_record(&row)?;
                }
            }
            Err(msg) => {
                summary.failed += 1;
                let mut row = lead(index, doc);
                row.push("overall".into());
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(format!("failed: {msg}"));
                row.push(String::new());
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub ok: usize,
    pub failed: usize,
}
