//! Per-image score table as CSV.

use std::io::Write;

use sas_core::{EmbeddingPool, ScoreTable};

use crate::error::Result;
use crate::num::fmt9;

/// Columns `image_id, class, relevance, separation, diversity_static, margin[, mixed]`,
/// one row per image in pool order.
pub fn write_scores<W: Write>(pool: &EmbeddingPool, table: &ScoreTable, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![
        "image_id",
        "class",
        "relevance",
        "separation",
        "diversity_static",
        "margin",
    ];
    if table.mixed.is_some() {
        header.push("mixed");
    }
    w.write_record(&header)?;
    for i in 0..pool.n_images() {
        let mut row = vec![
            pool.image_ids()[i].clone(),
            pool.class_names()[pool.label(i)].clone(),
            fmt9(table.relevance[i]),
            fmt9(table.separation[i]),
            fmt9(table.diversity_static[i]),
            fmt9(table.margin[i]),
        ];
        if let Some(mixed) = &table.mixed {
            row.push(fmt9(mixed[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
