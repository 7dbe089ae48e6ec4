//! Declarative chart specifications: parsing, validation against a dataset,
//! and axis extents.
//!
//! The document format is a small JSON dialect in the spirit of Vega-Lite; see
//! `docs/chart-spec-format.md` for the grammar.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::realize::format_number;
use crate::tabular::{
    self, parse_date, parse_number, Column, ColumnType, Dataset, TableError, TableFormat,
    TableSource, Value,
};

/// Encoding type of a channel; shares its vocabulary with column types.
pub type FieldType = ColumnType;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown mark {0:?} (expected bar, line or point)")]
    UnknownMark(String),
    #[error("unknown encoding type {0:?}")]
    UnknownType(String),
    #[error("unknown channel {0:?} (expected x, y or color)")]
    UnknownChannel(String),
    #[error("channel {0} is encoded more than once")]
    DuplicateChannel(String),
    #[error("missing required {0} channel")]
    MissingChannel(Channel),
    #[error("malformed scale domain on {channel}: {reason}")]
    MalformedDomain { channel: Channel, reason: String },
    #[error("bin on {channel} requires a quantitative or ordinal field, found {field_type}")]
    BinNotAllowed {
        channel: Channel,
        field_type: FieldType,
    },
    #[error("malformed bin on {channel}: {reason}")]
    MalformedBin { channel: Channel, reason: String },
    #[error("{channel} encodes column {field:?}, which is not in the dataset")]
    MissingColumn { channel: Channel, field: String },
    #[error("{channel} is encoded as {expected} but column {field:?} is {actual}")]
    TypeMismatch {
        channel: Channel,
        field: String,
        expected: FieldType,
        actual: ColumnType,
    },
    #[error("{0} channel is not encoded")]
    NotEncoded(Channel),
    #[error("column for {0} has no values")]
    EmptyColumn(Channel),
    #[error("specification has no data and none was supplied")]
    NoData,
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Bar,
    Line,
    Point,
}

impl Mark {
    fn parse(s: &str) -> Result<Mark, SpecError> {
        match s {
            "bar" => Ok(Mark::Bar),
            "line" => Ok(Mark::Line),
            "point" => Ok(Mark::Point),
            other => Err(SpecError::UnknownMark(other.to_string())),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Mark::Bar => "bar",
            Mark::Line => "line",
            Mark::Point => "point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
}

impl Channel {
    fn parse(s: &str) -> Result<Channel, SpecError> {
        match s {
            "x" => Ok(Channel::X),
            "y" => Ok(Channel::Y),
            "color" => Ok(Channel::Color),
            other => Err(SpecError::UnknownChannel(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bin {
    /// Author-chosen bin labels in axis order.
    Labels(Vec<String>),
    /// Equal-width bins computed from the data.
    Width(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleDomain {
    Numeric { min: f64, max: f64 },
    Categories(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub field: String,
    pub field_type: FieldType,
    pub bin: Option<Bin>,
    pub unit: Option<String>,
    /// Axis title; defaults to the field name.
    pub title: Option<String>,
    /// Subject used in axis sentences; defaults to the title.
    pub label: Option<String>,
    /// Phrase used in running text; defaults to the lower-cased title.
    pub noun: Option<String>,
    pub scale_domain: Option<ScaleDomain>,
    /// Colour names for a colour channel, parallel to a category domain.
    pub scale_range: Option<Vec<String>>,
}

impl Encoding {
    pub fn new(field: impl Into<String>, field_type: FieldType) -> Encoding {
        Encoding {
            field: field.into(),
            field_type,
            bin: None,
            unit: None,
            title: None,
            label: None,
            noun: None,
            scale_domain: None,
            scale_range: None,
        }
    }

    pub fn display_title(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.field)
    }

    pub fn display_label(&self) -> &str {
        self.label
            .as_deref()
            .unwrap_or_else(|| self.display_title())
    }

    pub fn display_noun(&self) -> String {
        self.noun
            .clone()
            .unwrap_or_else(|| self.display_title().to_lowercase())
    }

    pub fn is_categorical(&self) -> bool {
        self.bin.is_some() || matches!(self.field_type, ColumnType::Nominal | ColumnType::Ordinal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataRef {
    Inline(Vec<serde_json::Map<String, serde_json::Value>>),
    Url(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub mark: Mark,
    pub title: Option<String>,
    /// Qualifier prepended to the measure on its first Level 2 mention.
    pub subject: Option<String>,
    pub data: Option<DataRef>,
    pub encodings: BTreeMap<Channel, Encoding>,
    /// Free-text Level 1 sentences (reference lines, callouts).
    pub annotations: Vec<String>,
}

impl ChartSpec {
    pub fn encoding(&self, channel: Channel) -> Option<&Encoding> {
        self.encodings.get(&channel)
    }

    pub fn x(&self) -> &Encoding {
        &self.encodings[&Channel::X]
    }

    pub fn y(&self) -> &Encoding {
        &self.encodings[&Channel::Y]
    }

    pub fn color(&self) -> Option<&Encoding> {
        self.encodings.get(&Channel::Color)
    }

    /// Canonical JSON rendering; parsing it yields an equal spec.
    pub fn to_json(&self) -> String {
        let raw = RawSpec::from(self);
        serde_json::to_string_pretty(&raw).expect("spec serializes")
    }

    /// Loads the dataset the spec refers to. Relative `url`s resolve against
    /// `base_dir`.
    pub fn load_data(&self, base_dir: Option<&Path>) -> Result<Dataset, SpecError> {
        match &self.data {
            None => Err(SpecError::NoData),
            Some(DataRef::Inline(rows)) => Ok(tabular::load_table(
                TableSource::Rows(rows),
                TableFormat::Json,
            )?),
            Some(DataRef::Url(url)) => {
                let path = match base_dir {
                    Some(dir) if Path::new(url).is_relative() => dir.join(url),
                    _ => Path::new(url).to_path_buf(),
                };
                Ok(tabular::load_table(
                    TableSource::Path(&path),
                    TableFormat::from_path(&path),
                )?)
            }
        }
    }
}

// Wire format -----------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    mark: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data: Option<RawData>,
    #[serde(deserialize_with = "unique_entries", serialize_with = "entries_as_map")]
    encoding: Vec<(String, RawEncoding)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    annotations: Vec<RawAnnotation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawData {
    Values {
        values: Vec<serde_json::Map<String, serde_json::Value>>,
    },
    Url {
        url: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawAnnotation {
    Text(String),
    Object { text: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEncoding {
    field: String,
    #[serde(rename = "type")]
    field_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bin: Option<RawBin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noun: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<RawScale>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBin {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScale {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<Vec<String>>,
}

fn unique_entries<'de, D>(deserializer: D) -> Result<Vec<(String, RawEncoding)>, D::Error>
where
    D: Deserializer<'de>,
{
    struct EntriesVisitor;

    impl<'de> Visitor<'de> for EntriesVisitor {
        type Value = Vec<(String, RawEncoding)>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a map of channel name to encoding")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out: Vec<(String, RawEncoding)> = Vec::new();
            while let Some((key, value)) = map.next_entry::<String, RawEncoding>()? {
                if out.iter().any(|(k, _)| *k == key) {
                    return Err(serde::de::Error::custom(format!(
                        "duplicate channel {key:?}"
                    )));
                }
                out.push((key, value));
            }
            Ok(out)
        }
    }

    deserializer.deserialize_map(EntriesVisitor)
}

fn entries_as_map<S: serde::Serializer>(
    entries: &[(String, RawEncoding)],
    serializer: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = serializer.serialize_map(Some(entries.len()))?;
    for (k, v) in entries {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

fn parse_field_type(s: &str) -> Result<FieldType, SpecError> {
    match s {
        "quantitative" => Ok(ColumnType::Quantitative),
        "nominal" => Ok(ColumnType::Nominal),
        "ordinal" => Ok(ColumnType::Ordinal),
        "temporal" => Ok(ColumnType::Temporal),
        other => Err(SpecError::UnknownType(other.to_string())),
    }
}

fn convert_domain(
    channel: Channel,
    values: Vec<serde_json::Value>,
) -> Result<ScaleDomain, SpecError> {
    let malformed = |reason: &str| SpecError::MalformedDomain {
        channel,
        reason: reason.to_string(),
    };
    if values.is_empty() {
        return Err(malformed("domain is empty"));
    }
    if values.iter().all(serde_json::Value::is_number) {
        let nums: Vec<f64> = values
            .iter()
            .filter_map(serde_json::Value::as_f64)
            .collect();
        if nums.len() != 2 {
            return Err(malformed("numeric domain must be [min, max]"));
        }
        if nums[0].partial_cmp(&nums[1]) != Some(std::cmp::Ordering::Less) {
            return Err(malformed("domain min must be below max"));
        }
        Ok(ScaleDomain::Numeric {
            min: nums[0],
            max: nums[1],
        })
    } else if values.iter().all(serde_json::Value::is_string) {
        Ok(ScaleDomain::Categories(
            values
                .into_iter()
                .map(|v| v.as_str().unwrap_or_default().to_string())
                .collect(),
        ))
    } else {
        Err(malformed("domain mixes numbers and labels"))
    }
}

impl TryFrom<RawSpec> for ChartSpec {
    type Error = SpecError;

    fn try_from(raw: RawSpec) -> Result<ChartSpec, SpecError> {
        let mark = Mark::parse(&raw.mark)?;
        let mut encodings = BTreeMap::new();
        for (key, enc) in raw.encoding {
            let channel = Channel::parse(&key)?;
            let field_type = parse_field_type(&enc.field_type)?;
            let bin = match enc.bin {
                None => None,
                Some(b) => {
                    if !matches!(field_type, ColumnType::Quantitative | ColumnType::Ordinal) {
                        return Err(SpecError::BinNotAllowed {
                            channel,
                            field_type,
                        });
                    }
                    Some(match (b.labels, b.step) {
                        (Some(labels), None) if !labels.is_empty() => Bin::Labels(labels),
                        (None, Some(step)) if step > 0.0 && step.is_finite() => Bin::Width(step),
                        _ => {
                            return Err(SpecError::MalformedBin {
                                channel,
                                reason: "expected either non-empty `labels` or positive `step`"
                                    .into(),
                            })
                        }
                    })
                }
            };
            let (scale_domain, scale_range) = match enc.scale {
                None => (None, None),
                Some(s) => (
                    s.domain.map(|d| convert_domain(channel, d)).transpose()?,
                    s.range,
                ),
            };
            if let Some(ScaleDomain::Numeric { .. }) = scale_domain {
                if !matches!(field_type, ColumnType::Quantitative | ColumnType::Temporal) {
                    return Err(SpecError::MalformedDomain {
                        channel,
                        reason: "numeric domain on a categorical encoding".into(),
                    });
                }
            }
            encodings.insert(
                channel,
                Encoding {
                    field: enc.field,
                    field_type,
                    bin,
                    unit: enc.unit,
                    title: enc.title,
                    label: enc.label,
                    noun: enc.noun,
                    scale_domain,
                    scale_range,
                },
            );
        }
        for required in [Channel::X, Channel::Y] {
            if !encodings.contains_key(&required) {
                return Err(SpecError::MissingChannel(required));
            }
        }
        Ok(ChartSpec {
            mark,
            title: raw.title,
            subject: raw.subject,
            data: raw.data.map(|d| match d {
                RawData::Values { values } => DataRef::Inline(values),
                RawData::Url { url } => DataRef::Url(url),
            }),
            encodings,
            annotations: raw
                .annotations
                .into_iter()
                .map(|a| match a {
                    RawAnnotation::Text(t) | RawAnnotation::Object { text: t } => t,
                })
                .collect(),
        })
    }
}

impl From<&ChartSpec> for RawSpec {
    fn from(spec: &ChartSpec) -> RawSpec {
        RawSpec {
            mark: spec.mark.as_str().to_string(),
            title: spec.title.clone(),
            subject: spec.subject.clone(),
            data: spec.data.as_ref().map(|d| match d {
                DataRef::Inline(rows) => RawData::Values {
                    values: rows.clone(),
                },
                DataRef::Url(url) => RawData::Url { url: url.clone() },
            }),
            encoding: spec
                .encodings
                .iter()
                .map(|(ch, enc)| {
                    let scale = if enc.scale_domain.is_none() && enc.scale_range.is_none() {
                        None
                    } else {
                        Some(RawScale {
                            domain: enc.scale_domain.as_ref().map(|d| match d {
                                ScaleDomain::Numeric { min, max } => {
                                    vec![serde_json::json!(min), serde_json::json!(max)]
                                }
                                ScaleDomain::Categories(c) => {
                                    c.iter().map(|s| serde_json::json!(s)).collect()
                                }
                            }),
                            range: enc.scale_range.clone(),
                        })
                    };
                    (
                        ch.as_str().to_string(),
                        RawEncoding {
                            field: enc.field.clone(),
                            field_type: enc.field_type.to_string(),
                            bin: enc.bin.as_ref().map(|b| match b {
                                Bin::Labels(l) => RawBin {
                                    labels: Some(l.clone()),
                                    step: None,
                                },
                                Bin::Width(w) => RawBin {
                                    labels: None,
                                    step: Some(*w),
                                },
                            }),
                            unit: enc.unit.clone(),
                            title: enc.title.clone(),
                            label: enc.label.clone(),
                            noun: enc.noun.clone(),
                            scale,
                        },
                    )
                })
                .collect(),
            annotations: spec
                .annotations
                .iter()
                .map(|t| RawAnnotation::Text(t.clone()))
                .collect(),
        }
    }
}

/// Parses a chart specification document.
pub fn parse_spec(text: &str) -> Result<ChartSpec, SpecError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            Category::Data => SpecError::Schema {
                line,
                column,
                message,
            },
            _ => SpecError::Syntax {
                line,
                column,
                message,
            },
        }
    })?;
    ChartSpec::try_from(raw)
}

// Validation ------------------------------------------------------------------

/// A spec whose encodings all resolve to compatible dataset columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedChart {
    spec: ChartSpec,
    data: Dataset,
}

impl ValidatedChart {
    pub fn spec(&self) -> &ChartSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn encoding(&self, channel: Channel) -> Option<&Encoding> {
        self.spec.encoding(channel)
    }

    /// Column bound to an encoded channel.
    pub fn column(&self, channel: Channel) -> Option<&Column> {
        let enc = self.spec.encoding(channel)?;
        self.data.column(&enc.field).ok()
    }

    /// Same chart over a different row order of the same data.
    pub fn with_rows_permuted(&self, order: &[usize]) -> ValidatedChart {
        ValidatedChart {
            spec: self.spec.clone(),
            data: self.data.permuted(order),
        }
    }
}

fn compatible(encoded: FieldType, column: ColumnType) -> bool {
    match encoded {
        ColumnType::Quantitative => column == ColumnType::Quantitative,
        // numeric years are accepted on a temporal axis
        ColumnType::Temporal => {
            matches!(column, ColumnType::Temporal | ColumnType::Quantitative)
        }
        ColumnType::Nominal | ColumnType::Ordinal => true,
    }
}

/// Checks every encoding against `data`.
pub fn validate_spec(spec: ChartSpec, data: Dataset) -> Result<ValidatedChart, SpecError> {
    for (&channel, enc) in &spec.encodings {
        let column = data
            .column(&enc.field)
            .map_err(|_| SpecError::MissingColumn {
                channel,
                field: enc.field.clone(),
            })?;
        // an all-missing column has no inferable type
        if column.non_missing() > 0 && !compatible(enc.field_type, column.ctype()) {
            return Err(SpecError::TypeMismatch {
                channel,
                field: enc.field.clone(),
                expected: enc.field_type,
                actual: column.ctype(),
            });
        }
    }
    Ok(ValidatedChart { spec, data })
}

// Extents ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Extent {
    Numeric {
        min: f64,
        max: f64,
        unit: Option<String>,
    },
    Temporal {
        start: NaiveDate,
        end: NaiveDate,
    },
    Categories(Vec<String>),
    Bins(Vec<String>),
}

/// Axis extent of an encoded channel: the declared scale domain if any,
/// otherwise derived from the data.
pub fn axis_extent(chart: &ValidatedChart, channel: Channel) -> Result<Extent, SpecError> {
    let enc = chart
        .encoding(channel)
        .ok_or(SpecError::NotEncoded(channel))?;
    if let Some(domain) = &enc.scale_domain {
        return Ok(match domain {
            ScaleDomain::Numeric { min, max } => Extent::Numeric {
                min: *min,
                max: *max,
                unit: enc.unit.clone(),
            },
            ScaleDomain::Categories(cats) => {
                let dates: Option<Vec<NaiveDate>> = if enc.field_type == ColumnType::Temporal {
                    cats.iter().map(|c| parse_date(c)).collect()
                } else {
                    None
                };
                match dates.as_deref() {
                    Some([start, end]) => Extent::Temporal {
                        start: *start,
                        end: *end,
                    },
                    _ => Extent::Categories(cats.clone()),
                }
            }
        });
    }
    if let Some(Bin::Labels(labels)) = &enc.bin {
        return Ok(Extent::Bins(labels.clone()));
    }
    let column = chart
        .column(channel)
        .expect("validated channel has a column");
    if column.non_missing() == 0 {
        return Err(SpecError::EmptyColumn(channel));
    }
    if let Some(Bin::Width(width)) = &enc.bin {
        let nums = numeric_cells(column).ok_or_else(|| SpecError::MalformedBin {
            channel,
            reason: "computed bins need a numeric column".into(),
        })?;
        return Ok(Extent::Bins(computed_bins(
            &nums,
            *width,
            enc.unit.as_deref(),
        )));
    }
    Ok(match (enc.field_type, column.ctype()) {
        (ColumnType::Nominal | ColumnType::Ordinal, _) => {
            Extent::Categories(ordered_distinct(column))
        }
        (_, ColumnType::Temporal) => {
            let dates = column.values().iter().filter_map(|v| match v {
                Value::Date(d) => Some(*d),
                _ => None,
            });
            let (start, end) = dates.fold((NaiveDate::MAX, NaiveDate::MIN), |(lo, hi), d| {
                (lo.min(d), hi.max(d))
            });
            Extent::Temporal { start, end }
        }
        _ => {
            let nums = numeric_cells(column).unwrap_or_default();
            let (min, max) = nums
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            Extent::Numeric {
                min,
                max,
                unit: enc.unit.clone(),
            }
        }
    })
}

fn numeric_cells(column: &Column) -> Option<Vec<f64>> {
    let nums: Vec<f64> = column
        .values()
        .iter()
        .filter_map(|v| match v {
            Value::Number(x) => Some(*x),
            Value::Text(s) => parse_number(s),
            _ => None,
        })
        .collect();
    (!nums.is_empty()).then_some(nums)
}

fn computed_bins(values: &[f64], width: f64, unit: Option<&str>) -> Vec<String> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let integral = width.fract() == 0.0 && values.iter().all(|v| v.fract() == 0.0);
    let mut lo = (min / width).floor() * width;
    let mut labels = Vec::new();
    loop {
        let hi = if integral {
            lo + width - 1.0
        } else {
            lo + width
        };
        labels.push(format!(
            "{}-{}",
            format_number(lo, None),
            format_number(hi, unit)
        ));
        lo += width;
        if lo > max {
            break;
        }
    }
    labels
}

/// Distinct labels in a permutation-independent order: numeric when every
/// label is a number, lexicographic otherwise.
fn ordered_distinct(column: &Column) -> Vec<String> {
    let mut labels: Vec<String> = column.labels().into_iter().flatten().collect();
    labels.sort();
    labels.dedup();
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| parse_number(l)).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        return pairs.into_iter().map(|(_, l)| l).collect();
    }
    labels
}
