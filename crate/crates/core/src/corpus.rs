//! Level-labelled description corpus: loading, distributions, fingerprints.
//!
//! The native format is JSON Lines, one sentence per line:
//!
//! ```text
//! {"chart_id":"A","chart_type":"bar","topic":"journalism","difficulty":"easy",
//!  "participant_id":"p1","sentence_index":0,"text":"...","level":1}
//! ```
//!
//! Other schemas are mapped onto [`CorpusSentence`] through a
//! [`CorpusAdapter`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::Level;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: duplicate sentence ({chart_id}, {participant_id}, {sentence_index})")]
    Duplicate {
        line: usize,
        chart_id: String,
        participant_id: String,
        sentence_index: u32,
    },
    #[error("line {line}: chart {chart_id} has conflicting metadata")]
    ConflictingChart { line: usize, chart_id: String },
    #[error("corpus is empty")]
    Empty,
    #[error("no chart {0:?} in corpus")]
    UnknownChart(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartType {
    Bar,
    Line,
    Scatter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topic {
    Academic,
    Business,
    Journalism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

macro_rules! enum_names {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$(<$ty>::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(<$ty>::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($ty))),
                }
            }
        }
    };
}

enum_names!(ChartType { Bar => "bar", Line => "line", Scatter => "scatter" });
enum_names!(Topic { Academic => "academic", Business => "business", Journalism => "journalism" });
enum_names!(Difficulty { Easy => "easy", Medium => "medium", Hard => "hard" });

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSentence {
    pub chart_id: String,
    pub chart_type: ChartType,
    pub topic: Topic,
    pub difficulty: Difficulty,
    pub participant_id: String,
    pub sentence_index: u32,
    pub text: String,
    pub level: Level,
}

/// Maps one source record onto a [`CorpusSentence`].
pub trait CorpusAdapter {
    fn adapt(&self, record: &Map<String, Json>) -> Result<CorpusSentence, String>;
}

/// Records already in the native schema.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeAdapter;

impl CorpusAdapter for NativeAdapter {
    fn adapt(&self, record: &Map<String, Json>) -> Result<CorpusSentence, String> {
        serde_json::from_value(Json::Object(record.clone())).map_err(|e| e.to_string())
    }
}

/// Renames source fields onto native ones (`native name -> source name`).
/// Numeric strings are accepted for `sentence_index` and `level`, and enum
/// values are matched case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct FieldMapAdapter {
    pub fields: BTreeMap<String, String>,
}

impl FieldMapAdapter {
    pub fn new<I, A, B>(pairs: I) -> FieldMapAdapter
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        FieldMapAdapter {
            fields: pairs
                .into_iter()
                .map(|(a, b)| (a.into(), b.into()))
                .collect(),
        }
    }
}

impl CorpusAdapter for FieldMapAdapter {
    fn adapt(&self, record: &Map<String, Json>) -> Result<CorpusSentence, String> {
        const NATIVE: [&str; 8] = [
            "chart_id",
            "chart_type",
            "topic",
            "difficulty",
            "participant_id",
            "sentence_index",
            "text",
            "level",
        ];
        let mut out = Map::new();
        for name in NATIVE {
            let source = self.fields.get(name).map(String::as_str).unwrap_or(name);
            let value = record
                .get(source)
                .ok_or_else(|| format!("missing field {source:?}"))?;
            let value = match (name, value) {
                ("sentence_index" | "level", Json::String(s)) => s
                    .trim()
                    .parse::<u64>()
                    .map(Json::from)
                    .map_err(|_| format!("{source}: expected an integer, got {s:?}"))?,
                ("chart_type" | "topic" | "difficulty", Json::String(s)) => {
                    Json::String(s.trim().to_lowercase())
                }
                ("chart_id" | "participant_id", Json::Number(n)) => Json::String(n.to_string()),
                _ => value.clone(),
            };
            out.insert(name.to_string(), value);
        }
        NativeAdapter.adapt(&out)
    }
}

/// Per-chart metadata shared by all of a chart's sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartMeta {
    pub chart_type: ChartType,
    pub topic: Topic,
    pub difficulty: Difficulty,
}

impl CorpusSentence {
    pub fn meta(&self) -> ChartMeta {
        ChartMeta {
            chart_type: self.chart_type,
            topic: self.topic,
            difficulty: self.difficulty,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    sentences: Vec<CorpusSentence>,
}

impl Corpus {
    /// Validates uniqueness and chart metadata consistency. Errors report
    /// 1-based record positions.
    pub fn from_sentences(sentences: Vec<CorpusSentence>) -> Result<Corpus, CorpusError> {
        let mut keys = HashSet::new();
        let mut charts: HashMap<&str, ChartMeta> = HashMap::new();
        for (i, s) in sentences.iter().enumerate() {
            if !keys.insert((&s.chart_id, &s.participant_id, s.sentence_index)) {
                return Err(CorpusError::Duplicate {
                    line: i + 1,
                    chart_id: s.chart_id.clone(),
                    participant_id: s.participant_id.clone(),
                    sentence_index: s.sentence_index,
                });
            }
            if *charts.entry(&s.chart_id).or_insert(s.meta()) != s.meta() {
                return Err(CorpusError::ConflictingChart {
                    line: i + 1,
                    chart_id: s.chart_id.clone(),
                });
            }
        }
        Ok(Corpus { sentences })
    }

    pub fn sentences(&self) -> &[CorpusSentence] {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Distinct (chart, participant) pairs.
    pub fn description_count(&self) -> usize {
        self.sentences
            .iter()
            .map(|s| (&s.chart_id, &s.participant_id))
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn chart_count(&self) -> usize {
        self.charts().len()
    }

    /// Chart ids with metadata, in first-appearance order.
    pub fn charts(&self) -> Vec<(&str, ChartMeta)> {
        let mut seen = HashSet::new();
        self.sentences
            .iter()
            .filter(|s| seen.insert(s.chart_id.as_str()))
            .map(|s| (s.chart_id.as_str(), s.meta()))
            .collect()
    }
}

/// Parses JSON Lines text through `adapter`. Blank lines are skipped.
pub fn parse_corpus(text: &str, adapter: &dyn CorpusAdapter) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: Map<String, Json> =
            serde_json::from_str(raw).map_err(|e| CorpusError::Invalid {
                line,
                message: e.to_string(),
            })?;
        let sentence = adapter
            .adapt(&record)
            .map_err(|message| CorpusError::Invalid { line, message })?;
        sentences.push(sentence);
        lines.push(line);
    }
    // report errors against file lines, not record positions
    Corpus::from_sentences(sentences).map_err(|e| match e {
        CorpusError::Duplicate {
            line,
            chart_id,
            participant_id,
            sentence_index,
        } => CorpusError::Duplicate {
            line: lines[line - 1],
            chart_id,
            participant_id,
            sentence_index,
        },
        CorpusError::ConflictingChart { line, chart_id } => CorpusError::ConflictingChart {
            line: lines[line - 1],
            chart_id,
        },
        other => other,
    })
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    load_corpus_with(path, &NativeAdapter)
}

pub fn load_corpus_with(path: &Path, adapter: &dyn CorpusAdapter) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_corpus(&text, adapter)
}

pub fn export_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in corpus.sentences() {
        out.push_str(&serde_json::to_string(s).expect("sentence serializes"));
        out.push('\n');
    }
    out
}

const CSV_HEADER: [&str; 8] = [
    "chart_id",
    "chart_type",
    "topic",
    "difficulty",
    "participant_id",
    "sentence_index",
    "level",
    "text",
];

pub fn export_csv(corpus: &Corpus) -> Result<String, CorpusError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for s in corpus.sentences() {
        w.write_record([
            s.chart_id.as_str(),
            s.chart_type.as_str(),
            s.topic.as_str(),
            s.difficulty.as_str(),
            s.participant_id.as_str(),
            &s.sentence_index.to_string(),
            &s.level.to_string(),
            s.text.as_str(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CorpusError::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8"))
}

/// Reads the CSV written by [`export_csv`]. Rows are numbered from 2.
pub fn parse_corpus_csv(text: &str) -> Result<Corpus, CorpusError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut sentences = Vec::new();
    for (i, row) in r.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| CorpusError::Invalid {
            line: i + 2,
            message: e.to_string(),
        })?;
        let level = Level::try_from(row.level).map_err(|message| CorpusError::Invalid {
            line: i + 2,
            message,
        })?;
        sentences.push(CorpusSentence {
            chart_id: row.chart_id,
            chart_type: row.chart_type,
            topic: row.topic,
            difficulty: row.difficulty,
            participant_id: row.participant_id,
            sentence_index: row.sentence_index,
            text: row.text,
            level,
        });
    }
    Corpus::from_sentences(sentences)
}

#[derive(Deserialize)]
struct CsvRow {
    chart_id: String,
    chart_type: ChartType,
    topic: Topic,
    difficulty: Difficulty,
    participant_id: String,
    sentence_index: u32,
    level: u8,
    text: String,
}

// Distributions -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    ChartType,
    Topic,
    Difficulty,
}

impl std::str::FromStr for Facet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chart_type" | "type" => Ok(Facet::ChartType),
            "topic" => Ok(Facet::Topic),
            "difficulty" => Ok(Facet::Difficulty),
            other => Err(format!(
                "unknown facet {other:?} (expected chart_type, topic or difficulty)"
            )),
        }
    }
}

fn facet_value(s: &CorpusSentence, facet: Facet) -> (u8, &'static str) {
    match facet {
        Facet::ChartType => (s.chart_type as u8, s.chart_type.as_str()),
        Facet::Topic => (s.topic as u8, s.topic.as_str()),
        Facet::Difficulty => (s.difficulty as u8, s.difficulty.as_str()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    /// Facet value, or "all" without a facet.
    pub facet_value: String,
    pub total: usize,
    /// Sentence counts for levels 1 to 4.
    pub counts: [usize; 4],
    pub proportions: [f64; 4],
}

/// Share of sentences at each level, overall or per facet value (facet
/// values in declaration order, absent values omitted).
pub fn level_distribution(
    corpus: &Corpus,
    facet: Option<Facet>,
) -> Result<Vec<DistributionRow>, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut buckets: BTreeMap<(u8, &'static str), [usize; 4]> = BTreeMap::new();
    for s in corpus.sentences() {
        let key = match facet {
            Some(f) => facet_value(s, f),
            None => (0, "all"),
        };
        buckets.entry(key).or_default()[s.level.number() as usize - 1] += 1;
    }
    Ok(buckets
        .into_iter()
        .map(|((_, name), counts)| {
            let total: usize = counts.iter().sum();
            DistributionRow {
                facet_value: name.to_string(),
                total,
                counts,
                proportions: counts.map(|c| c as f64 / total as f64),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FingerprintRow {
    pub participant_id: String,
    pub levels: Vec<Level>,
}

/// Level sequence of every description of `chart_id`, participants in
/// first-appearance order, sentences by index.
pub fn fingerprint(corpus: &Corpus, chart_id: &str) -> Result<Vec<FingerprintRow>, CorpusError> {
    let mut order: Vec<&str> = Vec::new();
    let mut rows: HashMap<&str, Vec<(u32, Level)>> = HashMap::new();
    for s in corpus.sentences().iter().filter(|s| s.chart_id == chart_id) {
        let entry = rows.entry(&s.participant_id).or_insert_with(|| {
            order.push(&s.participant_id);
            Vec::new()
        });
        entry.push((s.sentence_index, s.level));
    }
    if order.is_empty() {
        return Err(CorpusError::UnknownChart(chart_id.to_string()));
    }
    Ok(order
        .into_iter()
        .map(|p| {
            let mut seq = rows.remove(p).expect("recorded participant");
            seq.sort_by_key(|(i, _)| *i);
            FingerprintRow {
                participant_id: p.to_string(),
                levels: seq.into_iter().map(|(_, l)| l).collect(),
            }
        })
        .collect())
}

/// Fill colours for levels 1 to 4 in rendered fingerprints.
pub const LEVEL_COLORS: [&str; 4] = ["#4e79a7", "#f28e2b", "#59a14f", "#b07aa1"];

/// One line per description: participant id, then one digit per sentence.
pub fn fingerprint_text(rows: &[FingerprintRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.participant_id.len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let digits: Vec<String> = r.levels.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "{:<width$}  {}", r.participant_id, digits.join(" "));
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Colour strip per description as a standalone SVG document.
pub fn fingerprint_svg(chart_id: &str, rows: &[FingerprintRow]) -> String {
    const CELL: usize = 16;
    let cols = rows.iter().map(|r| r.levels.len()).max().unwrap_or(0);
    let (w, h) = (cols.max(1) * CELL, rows.len().max(1) * CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" role="img" aria-label="Level fingerprint of chart {}">"#,
        xml_escape(chart_id)
    );
    for (y, r) in rows.iter().enumerate() {
        for (x, l) in r.levels.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"  <rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"><title>{} sentence {}: level {l}</title></rect>"#,
                x * CELL,
                y * CELL,
                LEVEL_COLORS[l.number() as usize - 1],
                xml_escape(&r.participant_id),
                x + 1,
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Distinct-chart counts per chart type, topic and difficulty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Breakdown {
    pub charts: usize,
    pub chart_type: BTreeMap<ChartType, usize>,
    pub topic: BTreeMap<Topic, usize>,
    pub difficulty: BTreeMap<Difficulty, usize>,
}

pub fn curation_breakdown(corpus: &Corpus) -> Breakdown {
    let mut b = Breakdown {
        charts: 0,
        chart_type: ChartType::ALL.iter().map(|&t| (t, 0)).collect(),
        topic: Topic::ALL.iter().map(|&t| (t, 0)).collect(),
        difficulty: Difficulty::ALL.iter().map(|&t| (t, 0)).collect(),
    };
    for (_, meta) in corpus.charts() {
        b.charts += 1;
        *b.chart_type
            .get_mut(&meta.chart_type)
            .expect("all types present") += 1;
        *b.topic.get_mut(&meta.topic).expect("all topics present") += 1;
        *b.difficulty
            .get_mut(&meta.difficulty)
            .expect("all difficulties present") += 1;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(chart: &str, p: &str, i: u32, level: u8) -> String {
        format!(
            r#"{{"chart_id":"{chart}","chart_type":"bar","topic":"business","difficulty":"easy","participant_id":"{p}","sentence_index":{i},"text":"s","level":{level}}}"#
        )
    }

    #[test]
    fn empty_text_is_empty_corpus() {
        let c = parse_corpus("\n\n", &NativeAdapter).unwrap();
        assert_eq!(
            (c.sentence_count(), c.description_count(), c.chart_count()),
            (0, 0, 0)
        );
        assert!(matches!(
            level_distribution(&c, None),
            Err(CorpusError::Empty)
        ));
    }

    #[test]
    fn level_five_is_rejected_with_line() {
        let text = format!("{}\n{}\n", line("A", "p", 0, 2), line("A", "p", 1, 5));
        match parse_corpus(&text, &NativeAdapter) {
            Err(CorpusError::Invalid { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = format!("{}\n\n{}\n", line("A", "p", 0, 2), line("A", "p", 0, 3));
        assert!(matches!(
            parse_corpus(&text, &NativeAdapter),
            Err(CorpusError::Duplicate { line: 3, .. })
        ));
    }

    #[test]
    fn unknown_enum_is_rejected() {
        let text = line("A", "p", 0, 2).replace("\"bar\"", "\"pie\"");
        assert!(parse_corpus(&text, &NativeAdapter).is_err());
    }

    #[test]
    fn single_sentence_distribution() {
        let c = parse_corpus(&line("A", "p", 0, 2), &NativeAdapter).unwrap();
        let d = level_distribution(&c, None).unwrap();
        assert_eq!(d[0].proportions, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn fingerprint_orders_by_index() {
        let text = [
            line("A", "p", 2, 3),
            line("A", "p", 0, 1),
            line("A", "q", 0, 4),
            line("A", "p", 1, 2),
        ]
        .join("\n");
        let c = parse_corpus(&text, &NativeAdapter).unwrap();
        let f = fingerprint(&c, "A").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(
            f[0].levels,
            vec![Level::Elemental, Level::Statistical, Level::Perceptual]
        );
        assert_eq!(f[1].levels, vec![Level::Contextual]);
        assert!(matches!(
            fingerprint(&c, "B"),
            Err(CorpusError::UnknownChart(_))
        ));
    }

    #[test]
    fn field_map_adapter_renames() {
        let adapter = FieldMapAdapter::new([("chart_id", "vis"), ("level", "label")]);
        let text = r#"{"vis":7,"chart_type":"Line","topic":"academic","difficulty":"hard","participant_id":"x","sentence_index":"0","text":"t","label":"3"}"#;
        let c = parse_corpus(text, &adapter).unwrap();
        let s = &c.sentences()[0];
        assert_eq!(s.chart_id, "7");
        assert_eq!(s.chart_type, ChartType::Line);
        assert_eq!(s.level, Level::Perceptual);
    }

    #[test]
    fn csv_round_trip_keeps_commas_and_quotes() {
        let text = line("A", "p", 0, 1).replace("\"text\":\"s\"", r#""text":"a, \"quoted\" text""#);
        let c = parse_corpus(&text, &NativeAdapter).unwrap();
        let back = parse_corpus_csv(&export_csv(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
