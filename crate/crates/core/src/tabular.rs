//! Tabular datasets: loading, column type inference and grouped aggregation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of non-missing cells that must parse before a column is promoted
/// to quantitative or temporal.
pub const PROMOTION_THRESHOLD: f64 = 0.9;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column header {0:?}")]
    DuplicateHeader(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("malformed JSON table: {0}")]
    Json(String),
    #[error("no column named {0:?}")]
    MissingColumn(String),
    #[error("column {name:?} is {actual}, expected {expected}")]
    TypeMismatch {
        name: String,
        expected: &'static str,
        actual: ColumnType,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Quantitative,
    Nominal,
    Ordinal,
    Temporal,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnType::Quantitative => "quantitative",
            ColumnType::Nominal => "nominal",
            ColumnType::Ordinal => "ordinal",
            ColumnType::Temporal => "temporal",
        })
    }
}

/// A single cell after type inference.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Date(NaiveDate),
    Text(String),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    /// Display label for the cell, as used for category names.
    pub fn label(&self) -> Option<String> {
        match self {
            Value::Missing => None,
            Value::Number(v) => Some(compact_number(*v)),
            Value::Date(d) => Some(d.format("%Y-%m-%d").to_string()),
            Value::Text(s) => Some(s.clone()),
        }
    }
}

fn compact_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    ctype: ColumnType,
    values: Vec<Value>,
}

impl Column {
    /// Builds a column from raw cell text, inferring its type.
    pub fn infer<S: AsRef<str>>(name: impl Into<String>, raw: &[Option<S>]) -> Column {
        let cells: Vec<Option<&str>> = raw
            .iter()
            .map(|c| {
                c.as_ref()
                    .map(|s| s.as_ref().trim())
                    .filter(|s| !is_missing_marker(s))
            })
            .collect();
        let present = cells.iter().flatten().count();
        let ctype = if present == 0 {
            ColumnType::Nominal
        } else {
            let numeric = cells
                .iter()
                .flatten()
                .filter(|s| parse_number(s).is_some())
                .count();
            let dates = cells
                .iter()
                .flatten()
                .filter(|s| parse_date(s).is_some())
                .count();
            if numeric as f64 >= PROMOTION_THRESHOLD * present as f64 {
                ColumnType::Quantitative
            } else if dates as f64 >= PROMOTION_THRESHOLD * present as f64 {
                ColumnType::Temporal
            } else {
                ColumnType::Nominal
            }
        };
        let values = cells
            .iter()
            .map(|cell| match (cell, ctype) {
                (None, _) => Value::Missing,
                (Some(s), ColumnType::Quantitative) => {
                    parse_number(s).map_or(Value::Missing, Value::Number)
                }
                (Some(s), ColumnType::Temporal) => {
                    parse_date(s).map_or(Value::Missing, Value::Date)
                }
                (Some(s), _) => Value::Text((*s).to_string()),
            })
            .collect();
        Column {
            name: name.into(),
            ctype,
            values,
        }
    }

    pub fn quantitative(name: impl Into<String>, values: &[Option<f64>]) -> Column {
        Column {
            name: name.into(),
            ctype: ColumnType::Quantitative,
            values: values
                .iter()
                .map(|v| match v {
                    Some(x) if x.is_finite() => Value::Number(*x),
                    _ => Value::Missing,
                })
                .collect(),
        }
    }

    pub fn nominal<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Column {
        Column {
            name: name.into(),
            ctype: ColumnType::Nominal,
            values: values
                .iter()
                .map(|v| match v {
                    Some(s) => Value::Text(s.as_ref().to_string()),
                    None => Value::Missing,
                })
                .collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ctype(&self) -> ColumnType {
        self.ctype
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn non_missing(&self) -> usize {
        self.values.iter().filter(|v| !v.is_missing()).count()
    }

    /// Cells as numbers. Dates become fractional years so they can be used as
    /// a numeric axis. Errors for nominal columns.
    pub fn numbers<T: crate::Scalar>(&self) -> Result<Vec<Option<T>>, TableError> {
        match self.ctype {
            ColumnType::Quantitative | ColumnType::Temporal => Ok(self
                .values
                .iter()
                .map(|v| match v {
                    Value::Number(x) => T::from_f64(*x),
                    Value::Date(d) => T::from_f64(fractional_year(*d)),
                    _ => None,
                })
                .collect()),
            other => Err(TableError::TypeMismatch {
                name: self.name.clone(),
                expected: "quantitative or temporal",
                actual: other,
            }),
        }
    }

    pub fn labels(&self) -> Vec<Option<String>> {
        self.values.iter().map(Value::label).collect()
    }

    fn permuted(&self, order: &[usize]) -> Column {
        Column {
            name: self.name.clone(),
            ctype: self.ctype,
            values: order.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }
}

/// Decimal year, e.g. 2008-07-02 is roughly 2008.5.
pub fn fractional_year(d: NaiveDate) -> f64 {
    let year = d.year();
    let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year start");
    let next = NaiveDate::from_ymd_opt(year + 1, 1, 1).expect("valid year start");
    let days_in_year = (next - start).num_days() as f64;
    year as f64 + (d - start).num_days() as f64 / days_in_year
}

pub fn is_missing_marker(s: &str) -> bool {
    let t = s.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("null")
}

pub fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    let t = t.strip_suffix('%').unwrap_or(t);
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let t = s.trim();
    for fmt in ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%b %d %Y", "%d %b %Y"] {
        if let Ok(d) = NaiveDate::parse_from_str(t, fmt) {
            return Some(d);
        }
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%SZ",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(dt.date());
        }
    }
    // year-month
    if let Ok(d) = NaiveDate::parse_from_str(&format!("{t}-01"), "%Y-%m-%d") {
        if t.len() == 7 {
            return Some(d);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> TableFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TableSource<'a> {
    Path(&'a Path),
    Text(&'a str),
    /// Already-parsed flat JSON objects.
    Rows(&'a [serde_json::Map<String, serde_json::Value>]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    row_count: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Dataset, TableError> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.clone()) {
                return Err(TableError::DuplicateHeader(c.name.clone()));
            }
        }
        let row_count = columns.first().map_or(0, Column::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != row_count) {
            return Err(TableError::RaggedRows {
                row: bad.len().min(row_count) + 1,
                expected: row_count,
                found: bad.len(),
            });
        }
        Ok(Dataset { columns, row_count })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column(&self, name: &str) -> Result<&Column, TableError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| TableError::MissingColumn(name.to_string()))
    }

    /// Rows reordered by `order`, which must be a permutation of `0..row_count`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        assert_eq!(order.len(), self.row_count, "permutation length");
        Dataset {
            columns: self.columns.iter().map(|c| c.permuted(order)).collect(),
            row_count: self.row_count,
        }
    }
}

/// Loads a dataset and infers column types.
pub fn load_table(source: TableSource<'_>, format: TableFormat) -> Result<Dataset, TableError> {
    match source {
        TableSource::Path(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| TableError::Unreadable {
                path: path.to_path_buf(),
                source,
            })?;
            load_table(TableSource::Text(&text), format)
        }
        TableSource::Text(text) => match format {
            TableFormat::Csv => read_csv(text),
            TableFormat::Json => {
                let value: serde_json::Value =
                    serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))?;
                let rows = match value {
                    serde_json::Value::Array(items) => items
                        .into_iter()
                        .enumerate()
                        .map(|(i, item)| match item {
                            serde_json::Value::Object(m) => Ok(m),
                            _ => Err(TableError::Json(format!("row {} is not an object", i + 1))),
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                    _ => return Err(TableError::Json("expected an array of objects".into())),
                };
                from_json_rows(&rows)
            }
        },
        TableSource::Rows(rows) => from_json_rows(rows),
    }
}

fn read_csv(text: &str) -> Result<Dataset, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| TableError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(TableError::DuplicateHeader(h.clone()));
        }
    }
    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(TableError::RaggedRows {
                row: i + 2,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push(Some(field.to_string()));
        }
    }
    let columns = headers
        .into_iter()
        .zip(raw)
        .map(|(name, cells)| Column::infer(name, &cells))
        .collect();
    Dataset::new(columns)
}

fn from_json_rows(
    rows: &[serde_json::Map<String, serde_json::Value>],
) -> Result<Dataset, TableError> {
    let mut names: Vec<String> = Vec::new();
    for row in rows {
        for key in row.keys() {
            if !names.contains(key) {
                names.push(key.clone());
            }
        }
    }
    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::with_capacity(rows.len()); names.len()];
    for (r, row) in rows.iter().enumerate() {
        for (name, col) in names.iter().zip(raw.iter_mut()) {
            let cell = match row.get(name) {
                None | Some(serde_json::Value::Null) => None,
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(serde_json::Value::Number(n)) => Some(n.to_string()),
                Some(serde_json::Value::Bool(b)) => Some(b.to_string()),
                Some(_) => {
                    return Err(TableError::Json(format!(
                        "row {}: field {name:?} is not a scalar",
                        r + 1
                    )))
                }
            };
            col.push(cell);
        }
    }
    let columns = names
        .into_iter()
        .zip(raw)
        .map(|(name, cells)| Column::infer(name, &cells))
        .collect();
    Dataset::new(columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateOp {
    Mean,
    Median,
    Min,
    Max,
    Sum,
    Count,
}

/// One output row of [`group_aggregate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub key: Vec<String>,
    /// `None` when the group has no non-missing values (except for `Count`).
    pub value: Option<f64>,
    pub count: usize,
}

/// Aggregates `value` per distinct combination of `group_by` labels.
///
/// Rows whose grouping cells are missing are excluded; missing values are
/// excluded from aggregates. Output is ordered lexicographically by key.
pub fn group_aggregate(
    data: &Dataset,
    group_by: &[&str],
    value: &str,
    op: AggregateOp,
) -> Result<Vec<GroupRow>, TableError> {
    let keys: Vec<&Column> = group_by
        .iter()
        .map(|name| data.column(name))
        .collect::<Result<_, _>>()?;
    let target = data.column(value)?;
    if target.ctype() != ColumnType::Quantitative {
        return Err(TableError::TypeMismatch {
            name: value.to_string(),
            expected: "quantitative",
            actual: target.ctype(),
        });
    }
    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    'rows: for row in 0..data.row_count() {
        let mut key = Vec::with_capacity(keys.len());
        for col in &keys {
            match col.values()[row].label() {
                Some(label) => key.push(label),
                None => continue 'rows,
            }
        }
        let bucket = groups.entry(key).or_default();
        if let Value::Number(v) = target.values()[row] {
            bucket.push(v);
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, mut values)| {
            let count = values.len();
            let value = if op == AggregateOp::Count {
                Some(count as f64)
            } else if values.is_empty() {
                None
            } else {
                Some(match op {
                    AggregateOp::Mean => values.iter().sum::<f64>() / count as f64,
                    AggregateOp::Sum => values.iter().sum(),
                    AggregateOp::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
                    AggregateOp::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    AggregateOp::Median => {
                        values.sort_by(f64::total_cmp);
                        let mid = count / 2;
                        if count % 2 == 1 {
                            values[mid]
                        } else {
                            (values[mid - 1] + values[mid]) / 2.0
                        }
                    }
                    AggregateOp::Count => unreachable!(),
                })
            };
            GroupRow { key, value, count }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Dataset, TableError> {
        load_table(TableSource::Text(text), TableFormat::Csv)
    }

    #[test]
    fn loads_numeric_csv() {
        let mut text = String::from("age,rate\n");
        for i in 0..8 {
            text.push_str(&format!("{},{}\n", i * 10, i as f64 * 1.5));
        }
        let data = csv(&text).unwrap();
        assert_eq!(data.columns().len(), 2);
        assert_eq!(data.row_count(), 8);
        assert_eq!(
            data.column("rate").unwrap().ctype(),
            ColumnType::Quantitative
        );
    }

    #[test]
    fn ragged_row_is_rejected() {
        let err = csv("a,b\n1,2\n3\n").unwrap_err();
        assert!(matches!(
            err,
            TableError::RaggedRows {
                row: 3,
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn duplicate_header_is_rejected() {
        assert!(matches!(csv("a,a\n1,2\n"), Err(TableError::DuplicateHeader(h)) if h == "a"));
    }

    #[test]
    fn date_majority_becomes_temporal() {
        // 10 cells, 9 dates and one stray note: 90% parse.
        let mut text = String::from("date\n");
        for m in 1..=9 {
            text.push_str(&format!("2000-{m:02}-03\n"));
        }
        text.push_str("see note\n");
        let data = csv(&text).unwrap();
        let col = data.column("date").unwrap();
        assert_eq!(col.ctype(), ColumnType::Temporal);
        assert_eq!(col.non_missing(), 9);
    }

    #[test]
    fn date_minority_stays_nominal() {
        let data = csv("d\n2000-01-03\nfoo\nbar\n").unwrap();
        assert_eq!(data.column("d").unwrap().ctype(), ColumnType::Nominal);
    }

    #[test]
    fn missing_markers_are_preserved() {
        let data = csv("v,w\n1,a\nNA,b\nnull,c\n,d\n4,e\n").unwrap();
        let col = data.column("v").unwrap();
        assert_eq!(col.ctype(), ColumnType::Quantitative);
        assert_eq!(col.len(), 5);
        assert_eq!(col.non_missing(), 2);
    }

    #[test]
    fn json_rows_with_absent_keys() {
        let data = load_table(
            TableSource::Text(r#"[{"a": 1, "b": "x"}, {"a": 2}]"#),
            TableFormat::Json,
        )
        .unwrap();
        assert_eq!(data.row_count(), 2);
        assert!(data.column("b").unwrap().values()[1].is_missing());
    }

    #[test]
    fn json_nested_value_is_rejected() {
        let err = load_table(TableSource::Text(r#"[{"a": [1]}]"#), TableFormat::Json).unwrap_err();
        assert!(matches!(err, TableError::Json(_)));
    }

    #[test]
    fn unreadable_path() {
        let err = load_table(
            TableSource::Path(Path::new("/definitely/not/here.csv")),
            TableFormat::Csv,
        )
        .unwrap_err();
        assert!(matches!(err, TableError::Unreadable { .. }));
    }

    #[test]
    fn empty_grouping_gives_global_mean() {
        let data = csv("v\n1\n2\n6\n").unwrap();
        let rows = group_aggregate(&data, &[], "v", AggregateOp::Mean).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].key.is_empty());
        assert_eq!(rows[0].value, Some(3.0));
    }

    #[test]
    fn count_excludes_missing() {
        let data = csv("g,v\na,1\na,NA\nb,\nb,3\nb,4\nc,NA\n").unwrap();
        let rows = group_aggregate(&data, &["g"], "v", AggregateOp::Count).unwrap();
        // brute-force tally
        let expected = [("a", 1.0), ("b", 2.0), ("c", 0.0)];
        for (row, (k, n)) in rows.iter().zip(expected) {
            assert_eq!(row.key, vec![k.to_string()]);
            assert_eq!(row.value, Some(n));
        }
        let means = group_aggregate(&data, &["g"], "v", AggregateOp::Mean).unwrap();
        assert_eq!(means[2].value, None);
    }

    #[test]
    fn aggregate_on_nominal_value_errors() {
        let data = csv("g,v\na,x\n").unwrap();
        assert!(matches!(
            group_aggregate(&data, &["g"], "v", AggregateOp::Sum),
            Err(TableError::TypeMismatch { .. })
        ));
    }
}
