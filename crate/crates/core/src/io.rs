//! Plain-text ingestion and output: numeric point files (whitespace- or
//! comma-delimited) and one-label-per-line partition files.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A parsed dataset plus what the parser had to do to get it.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    /// Data rows rejected for missing or non-numeric selected values.
    pub rows_skipped: usize,
    /// Whether the first row was treated as a header.
    pub header_skipped: bool,
}

fn parse_row(line: &str, columns: &[usize]) -> std::result::Result<Vec<f64>, String> {
    let normalized = line.replace(',', " ");
    let fields: Vec<&str> = normalized.split_whitespace().collect();
    let wanted: Vec<usize> = if columns.is_empty() {
        (0..fields.len()).collect()
    } else {
        columns.to_vec()
    };
    let mut row = Vec::with_capacity(wanted.len());
    for &c in &wanted {
        let Some(field) = fields.get(c) else {
            return Err(format!("column {c} missing ({} fields present)", fields.len()));
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => row.push(v),
            _ => return Err(format!("column {c} is not numeric: {field:?}")),
        }
    }
    if row.is_empty() {
        return Err("no fields".to_string());
    }
    Ok(row)
}

/// Read a point-per-line numeric file, keeping the given columns (all
/// columns when the list is empty). Fields may be separated by whitespace
/// or commas. The first row is skipped iff it does not parse as numbers
/// (a header); later unparsable rows are skipped and counted.
pub fn load_dataset(path: &Path, columns: &[usize]) -> Result<LoadedData> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rows_skipped = 0usize;
    let mut header_skipped = false;
    let mut first_diagnostic: Option<String> = None;
    let mut seen_data_row = false;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(line, columns) {
            Ok(row) => {
                if let Some(prev) = rows.first() {
                    if prev.len() != row.len() {
                        return Err(Error::ingestion(format!(
                            "{}: row {} has {} selected values, earlier rows had {}",
                            path.display(),
                            lineno + 1,
                            row.len(),
                            prev.len()
                        )));
                    }
                }
                rows.push(row);
                seen_data_row = true;
            }
            Err(why) => {
                if !seen_data_row && !header_skipped && rows_skipped == 0 {
                    header_skipped = true;
                } else {
                    rows_skipped += 1;
                    if first_diagnostic.is_none() {
                        first_diagnostic = Some(format!("row {}: {}", lineno + 1, why));
                    }
                }
            }
        }
    }
    if rows.len() < 2 {
        let mut msg = format!(
            "{}: {} usable rows (need at least 2)",
            path.display(),
            rows.len()
        );
        if let Some(diag) = first_diagnostic {
            let _ = write!(msg, "; first rejected {diag}");
        }
        if header_skipped {
            msg.push_str("; first row treated as header");
        }
        return Err(Error::ingestion(msg));
    }
    Ok(LoadedData {
        dataset: Dataset::from_rows(rows)?,
        rows_skipped,
        header_skipped,
    })
}

/// Write a dataset as space-delimited rows, one point per line, using the
/// shortest decimal form that reads back to the same values.
pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut out = String::new();
    for point in dataset.points() {
        for (i, v) in point.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a partition file: one non-negative integer label per line, in the
/// same order as the dataset rows.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let label: usize = trimmed.parse().map_err(|_| {
            Error::ingestion(format!(
                "{}: row {} is not a cluster label: {trimmed:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::ingestion(format!(
            "{}: no labels found",
            path.display()
        )));
    }
    Ok(labels)
}

/// Write a partition file accepted unchanged by [`load_labels`].
pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for label in labels {
        let _ = writeln!(out, "{label}");
    }
    std::fs::write(path, out)?;
    Ok(())
}
