use super::report::{AlphanumericStep, OutlierStep, RemovedRow, UnconvertibleCell, UnitStep};
use super::table::RawTable;
use crate::error::{Error, Result};

/// Placeholder written into cells whose unit could not be converted.
pub const MISSING: &str = "";

fn clean_cell(cell: &str) -> (String, usize) {
    let mut removed = 0;
    let spaced: String = cell
        .chars()
        .map(|c| {
            if c.is_control() {
                removed += 1;
                ' '
            } else {
                c
            }
        })
        .collect();
    let normalized = if removed > 0 {
        spaced.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        spaced.trim().to_string()
    };
    (normalized.to_lowercase(), removed)
}

fn clean_header(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && !c.is_control())
        .collect::<String>()
        .to_lowercase()
}

/// Strips control characters (tabs, escapes) from cells, lower-cases every
/// cell, and removes whitespace from column names.
pub fn clean_alphanumeric(table: &RawTable) -> (RawTable, AlphanumericStep) {
    let mut step = AlphanumericStep::default();
    let columns = table
        .columns
        .iter()
        .map(|c| {
            let cleaned = clean_header(c);
            if &cleaned != c {
                step.renamed_columns.push((c.clone(), cleaned.clone()));
            }
            cleaned
        })
        .collect();
    let rows = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    let (cleaned, removed) = clean_cell(cell);
                    step.control_characters_removed += removed;
                    if &cleaned != cell {
                        step.cells_changed += 1;
                    }
                    cleaned
                })
                .collect()
        })
        .collect();
    (
        RawTable {
            columns,
            rows,
            source: table.source.clone(),
        },
        step,
    )
}

/// Removes rows whose target is zero or not a number.
pub fn drop_zero_targets(table: &RawTable, target: &str) -> Result<(RawTable, OutlierStep)> {
    let idx = table
        .column_index(target)
        .ok_or_else(|| Error::Schema(format!("missing target column {target:?}")))?;
    let mut step = OutlierStep {
        target_column: target.to_string(),
        ..OutlierStep::default()
    };
    let mut rows = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let cell = row[idx].trim();
        match cell.parse::<f64>() {
            Ok(0.0) => {
                step.zero_target_removed += 1;
                step.removed.push(RemovedRow {
                    row: i + 1,
                    value: cell.to_string(),
                    reason: "zero target".into(),
                });
            }
            Ok(v) if v.is_finite() => rows.push(row.clone()),
            _ => {
                step.unparseable_target_removed += 1;
                step.removed.push(RemovedRow {
                    row: i + 1,
                    value: cell.to_string(),
                    reason: "unparseable target".into(),
                });
            }
        }
    }
    Ok((
        RawTable {
            columns: table.columns.clone(),
            rows,
            source: table.source.clone(),
        },
        step,
    ))
}

/// Parses a leading quantity with an optional unit into megabytes.
///
/// A bare number is taken to be in MB already. Binary multiples are used.
pub fn parse_quantity_mb(cell: &str) -> Option<f64> {
    let s = cell.trim().to_ascii_lowercase();
    let num_end = s
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || c == '.'))
        .map_or(s.len(), |(i, _)| i);
    let value: f64 = s[..num_end].parse().ok()?;
    let rest = s[num_end..].trim_start();
    let unit: String = rest.chars().take_while(char::is_ascii_alphabetic).collect();
    let factor = match unit.as_str() {
        "" if rest.is_empty() => 1.0,
        "kb" | "k" | "kib" => 1.0 / 1024.0,
        "mb" | "m" | "mib" => 1.0,
        "gb" | "g" | "gib" => 1024.0,
        "tb" | "t" | "tib" => 1024.0 * 1024.0,
        _ => return None,
    };
    Some(value * factor)
}

/// Converts quantity-with-unit cells in `unit_columns` to plain MB numbers.
/// Columns absent from the table are skipped.
pub fn normalize_units(table: &RawTable, unit_columns: &[String]) -> (RawTable, UnitStep) {
    let mut step = UnitStep {
        target_unit: "MB".into(),
        ..UnitStep::default()
    };
    let mut out = table.clone();
    for name in unit_columns {
        let Some(idx) = table.column_index(name) else {
            continue;
        };
        step.columns.push(name.clone());
        for (i, row) in out.rows.iter_mut().enumerate() {
            let cell = &row[idx];
            match parse_quantity_mb(cell) {
                Some(mb) => {
                    let rendered = format!("{mb}");
                    if &rendered != cell {
                        step.conversions += 1;
                        row[idx] = rendered;
                    }
                }
                None => {
                    if cell != MISSING {
                        step.unconvertible.push(UnconvertibleCell {
                            column: name.clone(),
                            row: i + 1,
                            value: cell.clone(),
                        });
                        row[idx] = MISSING.to_string();
                    }
                }
            }
        }
    }
    (out, step)
}
