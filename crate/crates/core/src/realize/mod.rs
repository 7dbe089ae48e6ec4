//! Turning chart metadata and facts into level-tagged English sentences.
//!
//! Wording comes from a [`Templates`] table (see `templates/default.tpl`);
//! code only decides which template applies and fills its slots.

mod compose;
mod template;

use std::fmt;

use chrono::Datelike;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart_spec::{axis_extent, Channel, Encoding, Extent, Mark, SpecError, ValidatedChart};
use crate::facts::{self, Fact, FactBody, Lexicon, Provenance, Relation, Strength};
use crate::scalar::Scalar;
use crate::tabular::{ColumnType, TableError};
use crate::trends::{self, GrowthShape, SeparationVerdict, TrendBody, TrendDirection, TrendFact};
use crate::Level;

pub use compose::{collect_facts, compose_description, ComposeOptions};
pub use template::{capitalize, lower_words, Slots, Templates};

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("template file line {line}: {message}")]
    TemplateSyntax { line: usize, message: String },
    #[error("no template named [{0}]")]
    MissingTemplate(String),
    #[error("template [{template}] uses unknown slot {{{slot}}}")]
    MissingSlot { template: String, slot: String },
    #[error("unknown template filter {0:?}")]
    UnknownFilter(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("no levels requested")]
    NoLevels,
    #[error("level {0} cannot be generated (supported: 1, 2, 3)")]
    UnsupportedLevel(Level),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Trend(#[from] trends::TrendError),
    #[error(transparent)]
    Fact(#[from] facts::FactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// Rigid, report-like phrasing.
    Templatized,
    /// Phrasing closer to how people describe charts.
    #[default]
    Natural,
}

impl Style {
    pub fn as_str(self) -> &'static str {
        match self {
            Style::Templatized => "templatized",
            Style::Natural => "natural",
        }
    }
}

impl std::str::FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "templatized" => Ok(Style::Templatized),
            "natural" => Ok(Style::Natural),
            other => Err(format!(
                "unknown style {other:?} (expected templatized or natural)"
            )),
        }
    }
}

/// What a sentence was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Source {
    /// Chart specification metadata.
    Spec,
    /// Author-supplied annotation text.
    Annotation,
    Fact {
        kind: String,
        provenance: Provenance,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub level: Level,
    pub source: Source,
    /// True for sentences produced by Level 3 heuristics.
    #[serde(default)]
    pub heuristic: bool,
}

impl Sentence {
    fn new(text: String, level: Level, source: Source) -> Sentence {
        Sentence {
            text: finish_sentence(&text),
            level,
            source,
            heuristic: false,
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub chart_id: String,
    pub sentences: Vec<Sentence>,
}

impl Description {
    /// All sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn at_level(&self, level: Level) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(move |s| s.level == level)
    }
}

/// Either a Level 2 data fact or a Level 3 heuristic fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SemanticFact<T> {
    Data(Fact<T>),
    Trend(TrendFact<T>),
}

impl<T> SemanticFact<T> {
    pub fn level(&self) -> Level {
        match self {
            SemanticFact::Data(f) => f.level(),
            SemanticFact::Trend(f) => f.level(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SemanticFact::Data(f) => f.kind().as_str(),
            SemanticFact::Trend(f) => f.kind().as_str(),
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            SemanticFact::Data(f) => &f.provenance,
            SemanticFact::Trend(f) => &f.provenance,
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        match self {
            SemanticFact::Data(f) => &f.lexicon,
            SemanticFact::Trend(f) => &f.lexicon,
        }
    }
}

impl<T> From<Fact<T>> for SemanticFact<T> {
    fn from(f: Fact<T>) -> Self {
        SemanticFact::Data(f)
    }
}

impl<T> From<TrendFact<T>> for SemanticFact<T> {
    fn from(f: TrendFact<T>) -> Self {
        SemanticFact::Trend(f)
    }
}

/// Collapses whitespace and guarantees terminal punctuation.
fn finish_sentence(text: &str) -> String {
    let mut out = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

/// Formats a number for prose: at most two decimals with trailing zeros
/// dropped, thousands separators from 10,000 up, and the unit appended
/// (no space before symbols such as `%`; currency symbols lead).
pub fn format_number(value: f64, unit: Option<&str>) -> String {
    let mut s = format!("{value:.2}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    if value.abs() >= 10_000.0 {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => ("-", rest.to_string()),
            None => ("", s.clone()),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i.to_string(), format!(".{f}")),
            None => (body, String::new()),
        };
        let mut grouped = String::new();
        for (i, c) in int.chars().enumerate() {
            if i > 0 && (int.len() - i) % 3 == 0 {
                grouped.push(',');
            }
            grouped.push(c);
        }
        s = format!("{sign}{grouped}{frac}");
    }
    match unit {
        None | Some("") => s,
        Some(u @ ("$" | "€" | "£" | "¥")) => match s.strip_prefix('-') {
            Some(rest) => format!("-{u}{rest}"),
            None => format!("{u}{s}"),
        },
        Some(u) if u.starts_with(|c: char| c.is_alphanumeric()) => format!("{s} {u}"),
        Some(u) => format!("{s}{u}"),
    }
}

/// Comma-separated list: "a, b, c".
fn comma_list(items: &[String]) -> String {
    items.join(", ")
}

/// English list: "a", "a and b", "a, b and c".
fn and_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn chart_type_phrase(chart: &ValidatedChart) -> &'static str {
    let spec = chart.spec();
    match spec.mark {
        Mark::Bar => {
            let (x, y) = (spec.x(), spec.y());
            let quantitative =
                |e: &Encoding| e.field_type == ColumnType::Quantitative && e.bin.is_none();
            let categorical =
                |e: &Encoding| e.is_categorical() || e.field_type == ColumnType::Temporal;
            if categorical(x) && quantitative(y) {
                "vertical bar chart"
            } else if categorical(y) && quantitative(x) {
                "horizontal bar chart"
            } else {
                "bar chart"
            }
        }
        Mark::Line if spec.color().is_some() => "multi-line chart",
        Mark::Line => "line chart",
        Mark::Point => "scatter plot",
    }
}

/// True when the bar chart's categories run along y.
pub(crate) fn is_horizontal_bar(chart: &ValidatedChart) -> bool {
    chart_type_phrase(chart) == "horizontal bar chart"
}

fn slots(pairs: impl IntoIterator<Item = (&'static str, String)>) -> Slots {
    pairs.into_iter().collect()
}

fn extent_bounds(extent: &Extent) -> Option<(String, String)> {
    match extent {
        Extent::Numeric { min, max, unit } => {
            // the unit is named once, at the top of the range, unless it leads
            let leads = matches!(unit.as_deref(), Some("$" | "€" | "£" | "¥"));
            let min_unit = if leads { unit.as_deref() } else { None };
            Some((
                format_number(*min, min_unit),
                format_number(*max, unit.as_deref()),
            ))
        }
        Extent::Temporal { start, end } => {
            if (*end - *start).num_days() as f64 / 365.25 >= 2.0 {
                Some((start.year().to_string(), end.year().to_string()))
            } else {
                Some((
                    start.format("%Y-%m-%d").to_string(),
                    end.format("%Y-%m-%d").to_string(),
                ))
            }
        }
        Extent::Categories(_) | Extent::Bins(_) => None,
    }
}

/// Level 1 sentences: chart type and title, axes, legend, annotations.
pub fn realize_level1(
    chart: &ValidatedChart,
    templates: &Templates,
) -> Result<Description, RealizeError> {
    let spec = chart.spec();
    let mut sentences = Vec::new();
    let spec_sentence = |text: String| Sentence::new(text, Level::Elemental, Source::Spec);

    let (dependent, independent) = if is_horizontal_bar(chart) {
        (spec.x(), spec.y())
    } else {
        (spec.y(), spec.x())
    };
    let chart_type = chart_type_phrase(chart).to_string();
    let opening = match &spec.title {
        Some(title) => templates.render(
            "level1.chart",
            &slots([
                ("chart_type", chart_type),
                ("title", title.clone()),
                ("dependent", dependent.display_title().to_string()),
                ("independent", independent.display_title().to_string()),
            ]),
        )?,
        None => templates.render(
            "level1.chart_untitled",
            &slots([("chart_type", chart_type)]),
        )?,
    };
    sentences.push(spec_sentence(opening));

    for channel in [Channel::Y, Channel::X] {
        let enc = spec.encoding(channel).expect("x and y are required");
        let (orientation, axis) = match channel {
            Channel::Y => ("vertical", "y"),
            _ => ("horizontal", "x"),
        };
        let base = [
            ("label", enc.display_label().to_string()),
            ("orientation", orientation.to_string()),
            ("axis", axis.to_string()),
        ];
        let extent = axis_extent(chart, channel)?;
        let text = match &extent {
            Extent::Bins(bins) => templates.render(
                "level1.axis_bins",
                &slots(base.into_iter().chain([("bins", comma_list(bins))])),
            )?,
            Extent::Categories(cats) => templates.render(
                "level1.axis_categories",
                &slots(base.into_iter().chain([("categories", comma_list(cats))])),
            )?,
            bounded => {
                let (min, max) = extent_bounds(bounded).expect("bounded extent");
                templates.render(
                    "level1.axis_range",
                    &slots(base.into_iter().chain([("min", min), ("max", max)])),
                )?
            }
        };
        sentences.push(spec_sentence(text));
    }

    if let Some(color) = spec.color() {
        match (&color.scale_range, axis_extent(chart, Channel::Color)?) {
            (Some(range), Extent::Categories(cats)) if !range.is_empty() => {
                for (category, colour) in cats.iter().zip(range.iter()) {
                    sentences.push(spec_sentence(templates.render(
                        "level1.legend_entry",
                        &slots([("category", category.clone()), ("color", colour.clone())]),
                    )?));
                }
            }
            _ => sentences.push(spec_sentence(templates.render(
                "level1.legend_field",
                &slots([("field", color.display_title().to_string())]),
            )?)),
        }
    }

    for note in &spec.annotations {
        sentences.push(Sentence::new(
            note.clone(),
            Level::Elemental,
            Source::Annotation,
        ));
    }

    Ok(Description {
        chart_id: chart_id(chart),
        sentences,
    })
}

pub(crate) fn chart_id(chart: &ValidatedChart) -> String {
    chart
        .spec()
        .title
        .clone()
        .unwrap_or_else(|| "chart".to_string())
}

// Fact realization -------------------------------------------------------------

struct Words {
    measure: String,
    subject_measure: String,
    measure_head: String,
    category_noun: Option<String>,
    x: String,
    y: String,
    unit: Option<String>,
    along: String,
}

impl Words {
    fn from(lex: &Lexicon) -> Words {
        let measure = lex.measure.clone().unwrap_or_else(|| "value".to_string());
        let subject_measure = match &lex.subject {
            Some(s) => format!("{s} {measure}"),
            None => measure.clone(),
        };
        let measure_head = measure
            .split_whitespace()
            .last()
            .unwrap_or("value")
            .to_string();
        let x = lex.x.clone().unwrap_or_else(|| "x".to_string());
        let along = if lex.temporal_x {
            "over time".to_string()
        } else {
            format!("with {x}")
        };
        Words {
            measure,
            subject_measure,
            measure_head,
            category_noun: lex.category_noun.clone(),
            x,
            y: lex.y.clone().unwrap_or_else(|| "y".to_string()),
            unit: lex.unit.clone(),
            along,
        }
    }

    fn num<T: Scalar>(&self, v: T) -> String {
        format_number(v.as_f64(), self.unit.as_deref())
    }

    fn base(&self) -> Slots {
        slots([
            ("measure", self.measure.clone()),
            ("subject_measure", self.subject_measure.clone()),
            ("measure_head", self.measure_head.clone()),
            ("x", self.x.clone()),
            ("y", self.y.clone()),
            ("along", self.along.clone()),
            (
                "category_noun",
                self.category_noun.clone().unwrap_or_default(),
            ),
        ])
    }
}

fn key(kind: &str, style: Style) -> String {
    format!("{kind}.{}", style.as_str())
}

/// Realizes one fact as a sentence carrying the fact's level.
pub fn realize_fact<T: Scalar>(
    fact: &SemanticFact<T>,
    style: Style,
    templates: &Templates,
) -> Result<Sentence, RealizeError> {
    let words = Words::from(fact.lexicon());
    let text = match fact {
        SemanticFact::Data(f) => realize_data(&f.body, &words, style, templates)?,
        SemanticFact::Trend(f) => realize_trend(&f.body, &words, style, templates)?,
    };
    let mut sentence = Sentence::new(
        capitalize(&text),
        fact.level(),
        Source::Fact {
            kind: fact.kind_name().to_string(),
            provenance: fact.provenance().clone(),
        },
    );
    sentence.heuristic = matches!(fact, SemanticFact::Trend(_));
    Ok(sentence)
}

fn realize_data<T: Scalar>(
    body: &FactBody<T>,
    w: &Words,
    style: Style,
    t: &Templates,
) -> Result<String, RealizeError> {
    let mut s = w.base();
    match body {
        FactBody::SummaryStats(st) => {
            s.insert("mean", w.num(st.mean));
            s.insert("median", w.num(st.median));
            s.insert("stdev", w.num(st.stdev));
            s.insert("min", w.num(st.min));
            s.insert("max", w.num(st.max));
            s.insert("n", st.n.to_string());
            t.render(&key("summary_stats", style), &s)
        }
        FactBody::Extremum(e) => {
            s.insert("max_value", w.num(e.max_value));
            s.insert("min_value", w.num(e.min_value));
            s.insert("max_list", comma_list(&e.max_categories));
            s.insert("min_list", comma_list(&e.min_categories));
            s.insert("count", e.max_categories.len().to_string());
            if e.max_value == e.min_value {
                return t.render(&format!("{}.all_equal", key("extremum", style)), &s);
            }
            let place = |cats: &[String]| -> Result<String, RealizeError> {
                let mut p = s.clone();
                if let [single] = cats {
                    p.insert("category", single.clone());
                    if w.category_noun.is_some() {
                        t.render("extremum.place_single", &p)
                    } else {
                        t.render("extremum.place_single_bare", &p)
                    }
                } else {
                    p.insert("categories", comma_list(cats));
                    t.render("extremum.place_tied", &p)
                }
            };
            let tie = |cats: &[String]| -> Result<String, RealizeError> {
                if cats.len() > 1 {
                    t.render("extremum.tie_suffix", &s)
                } else {
                    Ok(String::new())
                }
            };
            let (max_place, min_place) = (place(&e.max_categories)?, place(&e.min_categories)?);
            let (max_tie, min_tie) = (tie(&e.max_categories)?, tie(&e.min_categories)?);
            s.insert("max_place", max_place);
            s.insert("min_place", min_place);
            s.insert("max_tie", max_tie);
            s.insert("min_tie", min_tie);
            t.render(&key("extremum", style), &s)
        }
        FactBody::Outliers(o) => {
            let items: Vec<String> = o
                .outliers
                .iter()
                .map(|o| match &o.label {
                    Some(label) => format!("{label} ({})", w.num(o.value)),
                    None => w.num(o.value),
                })
                .collect();
            s.insert("items", and_list(&items));
            s.insert("count", items.len().to_string());
            s.insert("lower_fence", w.num(o.lower_fence));
            s.insert("upper_fence", w.num(o.upper_fence));
            let arity = match items.len() {
                0 => "none",
                1 => "one",
                _ => "many",
            };
            t.render(&format!("{}.{arity}", key("outliers", style)), &s)
        }
        FactBody::Correlation(c) => {
            s.insert("strength", c.strength.as_str().to_string());
            s.insert("direction", c.direction.as_str().to_string());
            s.insert(
                "strength_adverb",
                match c.strength {
                    Strength::Strong => "",
                    Strength::Moderate => "moderately ",
                    Strength::Weak => "weakly ",
                }
                .to_string(),
            );
            s.insert("direction_adverb", format!("{}ly", c.direction.as_str()));
            s.insert("r", format_number(c.pearson_r.as_f64(), None));
            match style {
                Style::Templatized => t.render("correlation.templatized", &s),
                Style::Natural if c.strength == Strength::Weak => {
                    t.render("correlation.natural.weak", &s)
                }
                Style::Natural => {
                    t.render(&format!("correlation.natural.{}", c.direction.as_str()), &s)
                }
            }
        }
        FactBody::Comparison(c) => {
            s.insert("a", c.a.0.clone());
            s.insert("b", c.b.0.clone());
            s.insert("a_value", w.num(c.a.1));
            s.insert("b_value", w.num(c.b.1));
            s.insert("difference", w.num(c.difference.abs()));
            let relation = match c.relation {
                Relation::Greater => "greater",
                Relation::Less => "less",
                Relation::Equal => "equal",
            };
            t.render(&format!("{}.{relation}", key("comparison", style)), &s)
        }
        FactBody::SharedValue { groups } => {
            if groups.is_empty() {
                return t.render(&format!("{}.none", key("shared_value", style)), &s);
            }
            let parts = groups
                .iter()
                .map(|g| {
                    let mut p = s.clone();
                    p.insert("categories", comma_list(&g.categories));
                    p.insert("categories_and", and_list(&g.categories));
                    p.insert("value", w.num(g.value));
                    t.render(&key("shared_value", style), &p)
                        .map(|x| finish_sentence(&x))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(parts.join(" "))
        }
        FactBody::GroupMeans(g) => {
            let entries = g
                .entries
                .iter()
                .map(|(label, v)| {
                    t.render(
                        "group_means.entry",
                        &slots([("label", label.clone()), ("value", w.num(*v))]),
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            s.insert("group", g.group.clone());
            s.insert("entries", and_list(&entries));
            t.render(&key("group_means", style), &s)
        }
    }
}

/// Renders an x position; on a time axis whole years print as the year and
/// anything else as month and year.
fn format_x<T: Scalar>(v: T, w: &Words) -> String {
    let v = v.as_f64();
    if w.along != "over time" {
        return format_number(v, None);
    }
    let year = v.floor() as i32;
    let Some(start) = chrono::NaiveDate::from_ymd_opt(year, 1, 1) else {
        return format_number(v, None);
    };
    let days = if chrono::NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366.0
    } else {
        365.0
    };
    let offset = ((v - year as f64) * days).round() as u64;
    if offset == 0 {
        return year.to_string();
    }
    (start + chrono::Days::new(offset))
        .format("%B %Y")
        .to_string()
}

fn realize_trend<T: Scalar>(
    body: &TrendBody<T>,
    w: &Words,
    style: Style,
    t: &Templates,
) -> Result<String, RealizeError> {
    let mut s = w.base();
    match body {
        TrendBody::Direction(d) => {
            let subject = match &d.series {
                Some(series) => series.clone(),
                None => format!("the {}", w.measure),
            };
            s.insert("subject", subject);
            s.insert("direction", d.direction.as_str().to_string());
            s.insert("slope", format_number(d.normalized_slope.as_f64(), None));
            s.insert("r_squared", format_number(d.r_squared.as_f64(), None));
            let noisy = d.fluctuating
                && matches!(
                    d.direction,
                    TrendDirection::Increasing | TrendDirection::Decreasing
                );
            match style {
                Style::Natural => {
                    let suffix = if noisy { "_fluctuating" } else { "" };
                    t.render(
                        &format!("direction.natural.{}{suffix}", d.direction.as_str()),
                        &s,
                    )
                }
                Style::Templatized => {
                    let phrase = if noisy {
                        t.render("direction.fluctuating_phrase", &s)?
                    } else {
                        d.direction.as_str().to_string()
                    };
                    s.insert("direction_phrase", phrase);
                    t.render("direction.templatized", &s)
                }
            }
        }
        TrendBody::ExceptionWindow(e) => {
            let (start, end) = (format_x(e.start, w), format_x(e.end, w));
            s.insert(
                "span",
                if start == end {
                    start.clone()
                } else {
                    format!("{start}-{end}")
                },
            );
            s.insert("start", start);
            s.insert("end", end);
            s.insert("count", e.series.len().to_string());
            s.insert("total", e.total_series.to_string());
            let scope = if e.series.len() == e.total_series && e.total_series > 1 {
                t.render("exception_window.scope_all", &s)?
            } else {
                and_list(&e.series)
            };
            s.insert("scope", scope);
            t.render(&key("exception_window", style), &s)
        }
        TrendBody::DispersionCompare(d) => {
            s.insert("most", d.ordering.first().cloned().unwrap_or_default());
            s.insert("least", d.ordering.last().cloned().unwrap_or_default());
            let scores: Vec<String> = d
                .scores
                .iter()
                .map(|(id, v)| format!("{id} {}", format_number(v.as_f64(), None)))
                .collect();
            s.insert("scores", and_list(&scores));
            t.render(&key("dispersion_compare", style), &s)
        }
        TrendBody::Separation(sep) => {
            s.insert("a", sep.groups.0.clone());
            s.insert("b", sep.groups.1.clone());
            s.insert("score", format_number(sep.score.as_f64(), None));
            let verdict = match sep.verdict {
                SeparationVerdict::Gap => "gap",
                SeparationVerdict::Overlap => "overlap",
            };
            s.insert("verdict", verdict.to_string());
            match style {
                Style::Templatized => t.render("separation.templatized", &s),
                Style::Natural => t.render(&format!("separation.natural.{verdict}"), &s),
            }
        }
        TrendBody::GrowthShape(g) => {
            s.insert("subject", format!("the {}", w.measure));
            let shape = match g.shape {
                GrowthShape::Linear => "linear",
                GrowthShape::ExponentialLike => "exponential_like",
            };
            s.insert("shape", shape.replace('_', "-"));
            s.insert(
                "r_squared_linear",
                format_number(g.r_squared_linear.as_f64(), None),
            );
            s.insert(
                "r_squared_log",
                format_number(g.r_squared_log.as_f64(), None),
            );
            match style {
                Style::Templatized => t.render("growth_shape.templatized", &s),
                Style::Natural => t.render(&format!("growth_shape.natural.{shape}"), &s),
            }
        }
    }
}
