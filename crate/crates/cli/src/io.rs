//! CSV ingestion.
//!
//! Two layouts are accepted. A file whose first row is entirely numeric is a
//! headerless table (a square distance matrix, typically). Otherwise the first
//! row is a header naming an optional `label` column and value columns
//! `c0..c(m−1)`; trailing value cells may be empty for ragged point clouds.

use std::path::Path;
use std::sync::Arc;

use semnet::space::{build_matrix, validate_semimetric, PointSet};
use semnet::{DistanceSpec, Label, LabeledSample, SemimetricMatrix};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub labels: Option<Vec<Label>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_label(text: &str) -> Result<Label, CliError> {
    match text.trim() {
        "+1" | "1" => Ok(Label::Positive),
        "-1" | "\u{2212}1" => Ok(Label::Negative),
        other => Err(CliError::Parse(format!("label must be -1 or +1, got '{other}'"))),
    }
}

fn parse_value(text: &str, line: usize) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Parse(format!("line {line}: '{}' is not a number", text.trim())))
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text)
}

pub fn parse_table(text: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = reader
        .records()
        .filter(|r| r.as_ref().map_or(true, |r| !(r.len() == 1 && r[0].is_empty())))
        .collect::<Result<_, _>>()?;
    let Some(first) = records.first() else {
        return Err(CliError::Parse("input is empty".into()));
    };
    if first.iter().all(|f| f.parse::<f64>().is_ok()) {
        let rows = records
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|f| parse_value(f, i + 1)).collect())
            .collect::<Result<_, _>>()?;
        return Ok(Table { labels: None, rows });
    }

    let mut label_col = None;
    let mut value_cols: Vec<Option<usize>> = vec![None; first.len()];
    for (pos, name) in first.iter().enumerate() {
        if name == "label" {
            if label_col.replace(pos).is_some() {
                return Err(CliError::Parse("duplicate label column".into()));
            }
            continue;
        }
        let idx = name
            .strip_prefix('c')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| CliError::Parse(format!("unexpected column '{name}'")))?;
        if idx >= first.len() {
            return Err(CliError::Parse(format!("value columns must be c0..c(m-1), found '{name}'")));
        }
        if value_cols[idx].replace(pos).is_some() {
            return Err(CliError::Parse(format!("duplicate column '{name}'")));
        }
    }
    let m = first.len() - usize::from(label_col.is_some());
    let order: Vec<usize> = value_cols[..m]
        .iter()
        .map(|c| c.ok_or_else(|| CliError::Parse("value columns must be c0..c(m-1)".into())))
        .collect::<Result<_, _>>()?;
    if records.len() < 2 {
        return Err(CliError::Parse("no data rows".into()));
    }

    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in records.iter().enumerate().skip(1) {
        let line = i + 1;
        if record.len() > first.len() {
            return Err(CliError::Parse(format!("line {line}: more fields than header columns")));
        }
        if let Some(c) = label_col {
            labels.push(parse_label(record.get(c).unwrap_or(""))?);
        }
        let cells: Vec<&str> = order.iter().map(|&c| record.get(c).unwrap_or("")).collect();
        let filled = cells.iter().rposition(|c| !c.is_empty()).map_or(0, |p| p + 1);
        let row = cells[..filled]
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Err(CliError::Parse(format!("line {line}: empty cell before the last value")))
                } else {
                    parse_value(c, line)
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Table { labels: label_col.map(|_| labels), rows })
}

/// Distance matrix of the table's rows under `spec`.
pub fn table_matrix(table: &Table, spec: &DistanceSpec) -> Result<SemimetricMatrix, CliError> {
    match spec.item_kind() {
        None => Ok(validate_semimetric(&table.rows)?),
        Some(kind) => {
            let points = PointSet::new(kind, table.rows.clone())?;
            Ok(build_matrix(&points, spec)?)
        }
    }
}

/// A labeled sample over the table; the label column is required.
pub fn table_sample(table: &Table, spec: &DistanceSpec) -> Result<LabeledSample, CliError> {
    let labels = table
        .labels
        .clone()
        .ok_or_else(|| CliError::Parse("training input needs a 'label' column".into()))?;
    let matrix = table_matrix(table, spec)?;
    Ok(LabeledSample::new(Arc::new(matrix), labels)?)
}

/// Writes a headerless table with exact (shortest round-trip) numbers.
pub fn write_matrix(m: &SemimetricMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let t = parse_table("label,c1,c0\n+1,2,1\n\u{2212}1,4,3\n-1,6,5\n1,8,7\n").unwrap();
        assert_eq!(t.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0], vec![7.0, 8.0]]);
        assert_eq!(
            t.labels.unwrap(),
            vec![Label::Positive, Label::Negative, Label::Negative, Label::Positive]
        );
    }

    #[test]
    fn headerless_and_ragged() {
        let t = parse_table("0,1\n1,0\n").unwrap();
        assert_eq!(t.labels, None);
        assert_eq!(t.rows.len(), 2);
        let t = parse_table("c0,c1,c2,c3\n1,2,3,4\n1,2,,\n").unwrap();
        assert_eq!(t.rows[1], vec![1.0, 2.0]);
    }

    #[test]
    fn rejects() {
        for bad in ["", "\n", "label,c0\n", "label,c0\n2,1\n", "label,x\n1,1\n", "c0,c2\n1,2\n", "c0\nabc\n", "c0,c1\n1,,2\n"] {
            assert!(matches!(parse_table(bad), Err(CliError::Parse(_))), "{bad:?}");
        }
    }
}
