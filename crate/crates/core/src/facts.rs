//! Level 2 content: descriptive statistics and relations computed from the
//! backing data.
//!
//! Every function here is pure and generic over [`Scalar`]. Column-like inputs
//! are `&[Option<T>]` where `None` marks a missing cell; statistics are taken
//! over the present values only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{mean, population_variance, Scalar};
use crate::Level;

/// Relative tolerance used for equality of two data values.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FactError {
    #[error("no values to summarise")]
    Empty,
    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("correlation is undefined for a constant column")]
    UndefinedCorrelation,
    #[error("columns have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactKind {
    SummaryStats,
    Extremum,
    Outliers,
    Correlation,
    Comparison,
    SharedValue,
    GroupMeans,
}

impl FactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FactKind::SummaryStats => "summary_stats",
            FactKind::Extremum => "extremum",
            FactKind::Outliers => "outliers",
            FactKind::Correlation => "correlation",
            FactKind::Comparison => "comparison",
            FactKind::SharedValue => "shared_value",
            FactKind::GroupMeans => "group_means",
        }
    }
}

/// Where a fact came from: the columns it was computed over and, for faceted
/// facts, the group keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<String>,
}

impl Provenance {
    pub fn columns<I, S>(cols: I) -> Provenance
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Provenance {
            columns: cols.into_iter().map(Into::into).collect(),
            groups: Vec::new(),
        }
    }

    pub fn with_groups<I, S>(mut self, groups: I) -> Provenance
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.groups = groups.into_iter().map(Into::into).collect();
        self
    }
}

/// Words used when a fact is put into a sentence. Filled from the chart's
/// encodings by the composer, or set directly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    /// Running-text name of the measured quantity, e.g. "mortality rate".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    /// Qualifier for the first mention of the measure, e.g. "COVID-19".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    /// Noun following a category label, e.g. "age range".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_noun: Option<String>,
    /// Names of the horizontal and vertical quantities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Whether the horizontal axis is time.
    #[serde(default)]
    pub temporal_x: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats<T> {
    pub n: usize,
    pub mean: T,
    pub median: T,
    /// Population standard deviation.
    pub stdev: T,
    pub min: T,
    pub max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrema<T> {
    pub max_categories: Vec<String>,
    pub max_value: T,
    pub min_categories: Vec<String>,
    pub min_value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier<T> {
    pub index: usize,
    pub value: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outliers<T> {
    pub q1: T,
    pub q3: T,
    pub lower_fence: T,
    pub upper_fence: T,
    pub outliers: Vec<Outlier<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Weak,
    Moderate,
    Strong,
}

impl Strength {
    pub fn from_r(r: f64) -> Strength {
        let a = r.abs();
        if a >= 0.7 {
            Strength::Strong
        } else if a >= 0.4 {
            Strength::Moderate
        } else {
            Strength::Weak
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Weak => "weak",
            Strength::Moderate => "moderate",
            Strength::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T> {
    pub pearson_r: T,
    pub n: usize,
    pub strength: Strength,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Greater,
    Less,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub a: (String, T),
    pub b: (String, T),
    pub relation: Relation,
    /// `a - b`.
    pub difference: T,
    /// `(a - b) / |b|`; absent when `b` is zero.
    pub relative_difference: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedGroup<T> {
    pub categories: Vec<String>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans<T> {
    /// Outer facet, e.g. "Low Income Countries".
    pub group: String,
    /// Inner facet label and its mean, e.g. ("men", 60).
    pub entries: Vec<(String, T)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactBody<T> {
    SummaryStats(SummaryStats<T>),
    Extremum(Extrema<T>),
    Outliers(Outliers<T>),
    Correlation(Correlation<T>),
    Comparison(Comparison<T>),
    SharedValue { groups: Vec<SharedGroup<T>> },
    GroupMeans(GroupMeans<T>),
}

impl<T> FactBody<T> {
    pub fn kind(&self) -> FactKind {
        match self {
            FactBody::SummaryStats(_) => FactKind::SummaryStats,
            FactBody::Extremum(_) => FactKind::Extremum,
            FactBody::Outliers(_) => FactKind::Outliers,
            FactBody::Correlation(_) => FactKind::Correlation,
            FactBody::Comparison(_) => FactKind::Comparison,
            FactBody::SharedValue { .. } => FactKind::SharedValue,
            FactBody::GroupMeans(_) => FactKind::GroupMeans,
        }
    }
}

/// A Level 2 data fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact<T> {
    level: Level,
    pub body: FactBody<T>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default)]
    pub lexicon: Lexicon,
}

impl<T> Fact<T> {
    pub fn new(body: FactBody<T>) -> Fact<T> {
        Fact {
            level: Level::Statistical,
            body,
            provenance: Provenance::default(),
            lexicon: Lexicon::default(),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn kind(&self) -> FactKind {
        self.body.kind()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Fact<T> {
        self.provenance = provenance;
        self
    }

    pub fn with_lexicon(mut self, lexicon: Lexicon) -> Fact<T> {
        self.lexicon = lexicon;
        self
    }
}

fn present<T: Scalar>(col: &[Option<T>]) -> Result<Vec<T>, FactError> {
    let values: Vec<T> = col.iter().flatten().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FactError::NonFinite);
    }
    Ok(values)
}

fn sorted<T: Scalar>(mut values: Vec<T>) -> Vec<T> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile_linear<T: Scalar>(sorted: &[T], p: f64) -> T {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::lit(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summary_stats<T: Scalar>(col: &[Option<T>]) -> Result<Fact<T>, FactError> {
    let values = present(col)?;
    if values.is_empty() {
        return Err(FactError::Empty);
    }
    let mean = mean(&values);
    let stdev = population_variance(&values, mean).sqrt();
    let values = sorted(values);
    Ok(Fact::new(FactBody::SummaryStats(SummaryStats {
        n: values.len(),
        mean,
        median: quantile_linear(&values, 0.5),
        stdev,
        min: values[0],
        max: values[values.len() - 1],
    })))
}

/// Maximum and minimum of a keyed series. Ties are kept, in input order.
pub fn find_extrema<T: Scalar>(series: &[(String, T)]) -> Result<Fact<T>, FactError> {
    let first = series.first().ok_or(FactError::Empty)?;
    if series.iter().any(|(_, v)| !v.is_finite()) {
        return Err(FactError::NonFinite);
    }
    let (mut max_value, mut min_value) = (first.1, first.1);
    for &(_, v) in series {
        max_value = max_value.max(v);
        min_value = min_value.min(v);
    }
    let pick = |target: T| -> Vec<String> {
        series
            .iter()
            .filter(|(_, v)| *v == target)
            .map(|(c, _)| c.clone())
            .collect()
    };
    Ok(Fact::new(FactBody::Extremum(Extrema {
        max_categories: pick(max_value),
        max_value,
        min_categories: pick(min_value),
        min_value,
    })))
}

/// Values outside the Tukey fences `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`.
///
/// Row indices refer to positions in `col`, missing cells included.
pub fn detect_outliers<T: Scalar>(col: &[Option<T>]) -> Result<Fact<T>, FactError> {
    let values = present(col)?;
    if values.len() < 4 {
        return Err(FactError::TooFewValues {
            need: 4,
            got: values.len(),
        });
    }
    let s = sorted(values);
    let q1 = quantile_linear(&s, 0.25);
    let q3 = quantile_linear(&s, 0.75);
    let reach = (q3 - q1) * T::lit(1.5);
    let (lower_fence, upper_fence) = (q1 - reach, q3 + reach);
    let outliers = col
        .iter()
        .enumerate()
        .filter_map(|(index, v)| v.map(|value| (index, value)))
        .filter(|&(_, v)| v < lower_fence || v > upper_fence)
        .map(|(index, value)| Outlier {
            index,
            value,
            label: None,
        })
        .collect();
    Ok(Fact::new(FactBody::Outliers(Outliers {
        q1,
        q3,
        lower_fence,
        upper_fence,
        outliers,
    })))
}

/// Pearson correlation over rows where both cells are present.
pub fn correlation<T: Scalar>(x: &[Option<T>], y: &[Option<T>]) -> Result<Fact<T>, FactError> {
    if x.len() != y.len() {
        return Err(FactError::LengthMismatch(x.len(), y.len()));
    }
    let pairs: Vec<(T, T)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(FactError::NonFinite);
    }
    if pairs.len() < 3 {
        return Err(FactError::TooFewValues {
            need: 3,
            got: pairs.len(),
        });
    }
    let xs: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for &(a, b) in &pairs {
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
        sxy = sxy + (a - mx) * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(FactError::UndefinedCorrelation);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt()))
        .max(-T::one())
        .min(T::one());
    Ok(Fact::new(FactBody::Correlation(Correlation {
        pearson_r: r,
        n: pairs.len(),
        strength: Strength::from_r(r.as_f64()),
        direction: if r < T::zero() {
            Direction::Negative
        } else {
            Direction::Positive
        },
    })))
}

fn approx_equal<T: Scalar>(a: T, b: T, rel_tol: T) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

/// Point-wise comparison of `a` against `b`.
pub fn compare_points<T: Scalar>(a: (&str, T), b: (&str, T)) -> Result<Fact<T>, FactError> {
    if !a.1.is_finite() || !b.1.is_finite() {
        return Err(FactError::NonFinite);
    }
    let relation = if approx_equal(a.1, b.1, T::lit(DEFAULT_RELATIVE_TOLERANCE)) {
        Relation::Equal
    } else if a.1 > b.1 {
        Relation::Greater
    } else {
        Relation::Less
    };
    let difference = a.1 - b.1;
    let relative_difference = (b.1 != T::zero()).then(|| difference / b.1.abs());
    Ok(Fact::new(FactBody::Comparison(Comparison {
        a: (a.0.to_string(), a.1),
        b: (b.0.to_string(), b.1),
        relation,
        difference,
        relative_difference,
    })))
}

/// Maximal groups (size >= 2) of categories whose values agree within a
/// relative `tolerance`.
///
/// Values are clustered after sorting, so every member of a group lies within
/// tolerance of the group's smallest value. Groups are ordered by the first
/// appearance of a member in `series`; members keep input order.
pub fn shared_value_groups<T: Scalar>(
    series: &[(String, T)],
    tolerance: T,
) -> Result<Fact<T>, FactError> {
    if series.len() < 2 {
        return Err(FactError::TooFewValues {
            need: 2,
            got: series.len(),
        });
    }
    if series.iter().any(|(_, v)| !v.is_finite()) {
        return Err(FactError::NonFinite);
    }
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&i, &j| {
        series[i]
            .1
            .partial_cmp(&series[j].1)
            .expect("finite")
            .then(i.cmp(&j))
    });
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match clusters.last_mut() {
            Some(cluster) if approx_equal(series[cluster[0]].1, series[idx].1, tolerance) => {
                cluster.push(idx)
            }
            _ => clusters.push(vec![idx]),
        }
    }
    let mut groups: Vec<(usize, SharedGroup<T>)> = clusters
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|mut c| {
            c.sort_unstable();
            (
                c[0],
                SharedGroup {
                    value: series[c[0]].1,
                    categories: c.iter().map(|&i| series[i].0.clone()).collect(),
                },
            )
        })
        .collect();
    groups.sort_by_key(|(first, _)| *first);
    Ok(Fact::new(FactBody::SharedValue {
        groups: groups.into_iter().map(|(_, g)| g).collect(),
    }))
}

pub fn group_means<T: Scalar>(group: impl Into<String>, entries: Vec<(String, T)>) -> Fact<T> {
    Fact::new(FactBody::GroupMeans(GroupMeans {
        group: group.into(),
        entries,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    fn labelled(v: &[(&str, f64)]) -> Vec<(String, f64)> {
        v.iter().map(|(c, x)| (c.to_string(), *x)).collect()
    }

    fn stats(f: Fact<f64>) -> SummaryStats<f64> {
        match f.body {
            FactBody::SummaryStats(s) => s,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_column_stats() {
        let s = stats(summary_stats(&col(&[5.0, 5.0, 5.0])).unwrap());
        assert_eq!((s.mean, s.stdev, s.min, s.max), (5.0, 0.0, 5.0, 5.0));
    }

    #[test]
    fn even_length_median() {
        let s = stats(summary_stats(&col(&[4.0, 1.0, 3.0, 2.0])).unwrap());
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
    }

    #[test]
    fn singleton_stats() {
        let s = stats(summary_stats(&col(&[7.0])).unwrap());
        assert_eq!(
            (s.mean, s.median, s.min, s.max, s.stdev),
            (7.0, 7.0, 7.0, 7.0, 0.0)
        );
    }

    #[test]
    fn stats_skip_missing_and_reject_empty() {
        let s = stats(summary_stats(&[Some(1.0), None, Some(3.0)]).unwrap());
        assert_eq!(s.n, 2);
        assert_eq!(summary_stats::<f64>(&[None, None]), Err(FactError::Empty));
    }

    #[test]
    fn population_stdev() {
        // [2,4,4,4,5,5,7,9]: population sd is exactly 2.
        let s = stats(summary_stats(&col(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0])).unwrap());
        assert_eq!(s.stdev, 2.0);
    }

    #[test]
    fn single_pair_is_both_extrema() {
        let f = find_extrema(&labelled(&[("only", 3.0)])).unwrap();
        let FactBody::Extremum(e) = f.body else {
            panic!()
        };
        assert_eq!(e.max_categories, vec!["only"]);
        assert_eq!(e.min_categories, vec!["only"]);
    }

    #[test]
    fn total_tie_extrema() {
        let f = find_extrema(&labelled(&[("a", 1.0), ("b", 1.0), ("c", 1.0)])).unwrap();
        let FactBody::Extremum(e) = f.body else {
            panic!()
        };
        assert_eq!(e.max_categories, e.min_categories);
        assert_eq!(e.max_categories.len(), 3);
        assert_eq!(find_extrema::<f64>(&[]), Err(FactError::Empty));
    }

    fn outlier_values(v: &[f64]) -> Vec<f64> {
        match detect_outliers(&col(v)).unwrap().body {
            FactBody::Outliers(o) => o.outliers.iter().map(|o| o.value).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn outlier_examples() {
        // [1,2,3,100]: Q1=1.75, Q3=27.25, upper fence 65.5
        assert_eq!(outlier_values(&[1.0, 2.0, 3.0, 100.0]), vec![100.0]);
        // [1..5]: Q1=2, Q3=4, fences [-1, 7]
        assert!(outlier_values(&[1.0, 2.0, 3.0, 4.0, 5.0]).is_empty());
        assert!(outlier_values(&[3.0; 6]).is_empty());
        assert_eq!(
            detect_outliers(&col(&[1.0, 2.0, 3.0])),
            Err(FactError::TooFewValues { need: 4, got: 3 })
        );
    }

    #[test]
    fn outlier_indices_count_missing_cells() {
        let f = detect_outliers(&[Some(1.0), None, Some(2.0), Some(3.0), Some(100.0)]).unwrap();
        let FactBody::Outliers(o) = f.body else {
            panic!()
        };
        assert_eq!(o.outliers[0].index, 4);
    }

    #[test]
    fn perfect_correlations() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let FactBody::Correlation(c) = correlation(&col(&x), &col(&x)).unwrap().body else {
            panic!()
        };
        assert!((c.pearson_r - 1.0).abs() < 1e-12);
        assert_eq!(c.strength, Strength::Strong);
        assert_eq!(c.direction, Direction::Positive);
        let FactBody::Correlation(c) = correlation(&col(&x), &col(&neg)).unwrap().body else {
            panic!()
        };
        assert!((c.pearson_r + 1.0).abs() < 1e-12);
        assert_eq!(c.direction, Direction::Negative);
    }

    #[test]
    fn constant_correlation_is_undefined() {
        assert_eq!(
            correlation(&col(&[1.0, 2.0, 3.0]), &col(&[4.0, 4.0, 4.0])),
            Err(FactError::UndefinedCorrelation)
        );
    }

    #[test]
    fn strength_bands() {
        assert_eq!(Strength::from_r(0.7), Strength::Strong);
        assert_eq!(Strength::from_r(-0.69), Strength::Moderate);
        assert_eq!(Strength::from_r(0.4), Strength::Moderate);
        assert_eq!(Strength::from_r(0.39), Strength::Weak);
    }

    fn comparison(a: (&str, f64), b: (&str, f64)) -> Comparison<f64> {
        match compare_points(a, b).unwrap().body {
            FactBody::Comparison(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn comparison_examples() {
        let c = comparison(("GOOG", 700.0), ("MSFT", 30.0));
        assert_eq!(c.relation, Relation::Greater);
        assert_eq!(c.difference, 670.0);
        assert_eq!(comparison(("a", 5.0), ("b", 5.0)).relation, Relation::Equal);
        let c = comparison(("a", 2.0), ("b", 4.0));
        assert_eq!(c.relation, Relation::Less);
        assert_eq!(c.relative_difference, Some(-0.5));
        assert_eq!(comparison(("a", 1.0), ("b", 0.0)).relative_difference, None);
    }

    fn shared(v: &[(&str, f64)]) -> Vec<Vec<String>> {
        match shared_value_groups(&labelled(v), DEFAULT_RELATIVE_TOLERANCE)
            .unwrap()
            .body
        {
            FactBody::SharedValue { groups } => groups.into_iter().map(|g| g.categories).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn shared_value_examples() {
        assert!(shared(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]).is_empty());
        assert_eq!(
            shared(&[("a", 4.0), ("b", 4.0), ("c", 4.0)]),
            vec![vec!["a", "b", "c"]]
        );
        assert_eq!(
            shared(&[("z", 9.0), ("a", 1.0), ("y", 9.0), ("b", 1.0)]),
            vec![vec!["z", "y"], vec!["a", "b"]]
        );
    }

    #[test]
    fn works_in_single_precision() {
        let s = match summary_stats(&[Some(1.0f32), Some(2.0), Some(3.0), Some(4.0)])
            .unwrap()
            .body
        {
            FactBody::SummaryStats(s) => s,
            _ => unreachable!(),
        };
        assert_eq!(s.mean, 2.5f32);
    }
}
