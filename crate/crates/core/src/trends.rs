//! Level 3 content approximated by fixed heuristics.
//!
//! Trends, exceptions, scatter and gaps are judgements a reader makes by
//! looking at a chart. The rules below are mechanical stand-ins for those
//! judgements; every [`TrendFact`] is flagged `heuristic` so consumers can tell
//! it apart from computed data facts. The thresholds live in [`TrendConfig`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{Lexicon, Provenance};
use crate::scalar::{fit_line, mean, population_variance, LineFit, Scalar};
use crate::Level;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("x values must be strictly increasing")]
    UnorderedX,
    #[error("y values must be positive")]
    NonPositive,
    #[error("no series given")]
    NoSeries,
    #[error("series share no common x values")]
    NoSharedDomain,
    #[error("window {window} is larger than the x domain span {span}")]
    WindowTooLarge { window: f64, span: f64 },
    #[error("group {0:?} needs at least 2 points")]
    DegenerateGroup(String),
    #[error("separation is undefined: both groups sit on the same single point")]
    UndefinedSeparation,
    #[error("non-finite value in input")]
    NonFinite,
}

/// Tunable thresholds for the heuristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendConfig {
    /// |normalized slope| below this is flat.
    pub flat_slope: f64,
    /// R² below this marks a series as fluctuating.
    pub fluctuation_r_squared: f64,
    /// This many residual sign changes also mark a series as fluctuating.
    pub fluctuation_sign_changes: usize,
    /// Fraction of series that must dip together for an exception window.
    pub exception_quorum: f64,
    /// Dip depth in residual standard deviations.
    pub exception_sigmas: f64,
    /// Context on each side of a candidate window, in window widths.
    pub exception_context_windows: f64,
    /// Separation ratio above which two groups show a gap.
    pub gap_threshold: f64,
    /// Required R² advantage of the log fit for exponential-like growth.
    pub exponential_margin: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            flat_slope: 0.1,
            fluctuation_r_squared: 0.5,
            fluctuation_sign_changes: 3,
            exception_quorum: 0.8,
            exception_sigmas: 2.0,
            exception_context_windows: 3.0,
            gap_threshold: 1.0,
            exponential_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    Direction,
    Fluctuation,
    ExceptionWindow,
    DispersionCompare,
    Separation,
    GrowthShape,
}

impl TrendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendKind::Direction => "direction",
            TrendKind::Fluctuation => "fluctuation",
            TrendKind::ExceptionWindow => "exception_window",
            TrendKind::DispersionCompare => "dispersion_compare",
            TrendKind::Separation => "separation",
            TrendKind::GrowthShape => "growth_shape",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    Flat,
    /// No clear direction, but visibly noisy.
    Fluctuating,
}

impl TrendDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendDirection::Increasing => "increasing",
            TrendDirection::Decreasing => "decreasing",
            TrendDirection::Flat => "flat",
            TrendDirection::Fluctuating => "fluctuating",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTrend<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    pub direction: TrendDirection,
    /// Set alongside a rising or falling direction when the series is noisy.
    pub fluctuating: bool,
    pub slope: T,
    /// Slope after min-max scaling both axes to [0, 1].
    pub normalized_slope: T,
    pub r_squared: T,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionWindow<T> {
    pub start: T,
    pub end: T,
    /// Series that dipped inside the window.
    pub series: Vec<String>,
    pub total_series: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion<T> {
    /// RMS distance to centroid after normalisation, per group.
    pub scores: Vec<(String, T)>,
    /// Group ids from most to least scattered.
    pub ordering: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationVerdict {
    Gap,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation<T> {
    pub groups: (String, String),
    pub score: T,
    pub verdict: SeparationVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthShape {
    Linear,
    ExponentialLike,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Growth<T> {
    pub shape: GrowthShape,
    pub r_squared_linear: T,
    pub r_squared_log: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrendBody<T> {
    Direction(DirectionTrend<T>),
    ExceptionWindow(ExceptionWindow<T>),
    DispersionCompare(Dispersion<T>),
    Separation(Separation<T>),
    GrowthShape(Growth<T>),
}

impl<T> TrendBody<T> {
    pub fn kind(&self) -> TrendKind {
        match self {
            TrendBody::Direction(d) if d.direction == TrendDirection::Fluctuating => {
                TrendKind::Fluctuation
            }
            TrendBody::Direction(_) => TrendKind::Direction,
            TrendBody::ExceptionWindow(_) => TrendKind::ExceptionWindow,
            TrendBody::DispersionCompare(_) => TrendKind::DispersionCompare,
            TrendBody::Separation(_) => TrendKind::Separation,
            TrendBody::GrowthShape(_) => TrendKind::GrowthShape,
        }
    }
}

/// A Level 3 fact produced by a heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFact<T> {
    level: Level,
    heuristic: bool,
    pub body: TrendBody<T>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default)]
    pub lexicon: Lexicon,
}

impl<T> TrendFact<T> {
    pub fn new(body: TrendBody<T>) -> TrendFact<T> {
        TrendFact {
            level: Level::Perceptual,
            heuristic: true,
            body,
            provenance: Provenance::default(),
            lexicon: Lexicon::default(),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn is_heuristic(&self) -> bool {
        self.heuristic
    }

    pub fn kind(&self) -> TrendKind {
        self.body.kind()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> TrendFact<T> {
        self.provenance = provenance;
        self
    }

    pub fn with_lexicon(mut self, lexicon: Lexicon) -> TrendFact<T> {
        self.lexicon = lexicon;
        self
    }
}

fn check_finite<T: Scalar>(points: &[(T, T)]) -> Result<(), TrendError> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(TrendError::NonFinite);
    }
    Ok(())
}

fn check_ordered<T: Scalar>(series: &[(T, T)], need: usize) -> Result<(), TrendError> {
    if series.len() < need {
        return Err(TrendError::TooFewPoints {
            need,
            got: series.len(),
        });
    }
    check_finite(series)?;
    if series
        .windows(2)
        .any(|w| w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less))
    {
        return Err(TrendError::UnorderedX);
    }
    Ok(())
}

fn span<T: Scalar>(values: impl Iterator<Item = T>) -> (T, T) {
    values.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Counts sign changes of residuals, ignoring residuals that are zero up to
/// rounding relative to the y range.
fn residual_sign_changes<T: Scalar>(series: &[(T, T)], fit: &LineFit<T>, y_range: T) -> usize {
    let eps = y_range * T::lit(1e-9);
    let signs: Vec<bool> = series
        .iter()
        .map(|&(x, y)| y - fit.predict(x))
        .filter(|r| r.abs() > eps)
        .map(|r| r > T::zero())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Overall direction of an ordered series from its least-squares line.
pub fn classify_trend<T: Scalar>(
    series: &[(T, T)],
    config: &TrendConfig,
) -> Result<TrendFact<T>, TrendError> {
    check_ordered(series, 3)?;
    let fit = fit_line(series).expect("strictly increasing x gives a fit");
    let (x_lo, x_hi) = span(series.iter().map(|p| p.0));
    let (y_lo, y_hi) = span(series.iter().map(|p| p.1));
    let y_range = y_hi - y_lo;
    let (normalized_slope, sign_changes) = if y_range <= T::zero() {
        (T::zero(), 0)
    } else {
        (
            fit.slope * (x_hi - x_lo) / y_range,
            residual_sign_changes(series, &fit, y_range),
        )
    };
    let fluctuating = y_range > T::zero()
        && (fit.r_squared < T::lit(config.fluctuation_r_squared)
            || sign_changes >= config.fluctuation_sign_changes);
    let direction = if normalized_slope.abs() < T::lit(config.flat_slope) {
        if fluctuating {
            TrendDirection::Fluctuating
        } else {
            TrendDirection::Flat
        }
    } else if normalized_slope > T::zero() {
        TrendDirection::Increasing
    } else {
        TrendDirection::Decreasing
    };
    Ok(TrendFact::new(TrendBody::Direction(DirectionTrend {
        series: None,
        direction,
        fluctuating,
        slope: fit.slope,
        normalized_slope,
        r_squared: fit.r_squared,
        sign_changes,
    })))
}

/// Does `series` dip below its local trend across every point of `[lo, hi]`?
fn dips_in_window<T: Scalar>(
    series: &[(T, T)],
    lo: T,
    hi: T,
    window: T,
    config: &TrendConfig,
) -> bool {
    let reach = window.max(T::min_positive_value()) * T::lit(config.exception_context_windows);
    let inside: Vec<(T, T)> = series
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo && x <= hi)
        .collect();
    let context: Vec<(T, T)> = series
        .iter()
        .copied()
        .filter(|&(x, _)| (x < lo && x >= lo - reach) || (x > hi && x <= hi + reach))
        .collect();
    if inside.is_empty() || context.len() < 3 {
        return false;
    }
    let Some(fit) = fit_line(&context) else {
        return false;
    };
    let residuals: Vec<T> = context.iter().map(|&(x, y)| y - fit.predict(x)).collect();
    let sd = population_variance(&residuals, T::zero()).sqrt();
    let (y_lo, y_hi) = span(series.iter().map(|p| p.1));
    let eps = (y_hi - y_lo) * T::lit(1e-9);
    let depth = T::lit(config.exception_sigmas) * sd;
    inside.iter().all(|&(x, y)| {
        let r = y - fit.predict(x);
        r < -eps && r < -depth
    })
}

/// Windows of width `window` where at least the quorum of series dip together.
///
/// Series are aligned on the x values they all share. Overlapping or
/// touching flagged windows are merged; the result is sorted and disjoint.
pub fn detect_exceptions<T: Scalar>(
    multi: &BTreeMap<String, Vec<(T, T)>>,
    window: T,
    config: &TrendConfig,
) -> Result<Vec<TrendFact<T>>, TrendError> {
    if multi.is_empty() {
        return Err(TrendError::NoSeries);
    }
    for series in multi.values() {
        check_ordered(series, 1)?;
    }
    let mut domain: Vec<T> = multi
        .values()
        .next()
        .expect("non-empty")
        .iter()
        .map(|p| p.0)
        .collect();
    for series in multi.values().skip(1) {
        domain.retain(|x| series.iter().any(|p| p.0 == *x));
    }
    if domain.is_empty() {
        return Err(TrendError::NoSharedDomain);
    }
    let (d_lo, d_hi) = (domain[0], domain[domain.len() - 1]);
    if window > d_hi - d_lo || window < T::zero() {
        return Err(TrendError::WindowTooLarge {
            window: window.as_f64(),
            span: (d_hi - d_lo).as_f64(),
        });
    }
    let aligned: BTreeMap<&String, Vec<(T, T)>> = multi
        .iter()
        .map(|(id, s)| {
            (
                id,
                s.iter()
                    .copied()
                    .filter(|p| domain.contains(&p.0))
                    .collect(),
            )
        })
        .collect();
    let quorum = (config.exception_quorum * multi.len() as f64 - 1e-9)
        .ceil()
        .max(1.0) as usize;

    // (start, end, dipping series) per flagged candidate window
    let mut flagged: Vec<(T, T, Vec<String>)> = Vec::new();
    for &start in &domain {
        let end = start + window;
        if end > d_hi {
            break;
        }
        let hi = domain
            .iter()
            .copied()
            .filter(|&x| x <= end)
            .fold(start, T::max);
        let dipping: Vec<String> = aligned
            .iter()
            .filter(|(_, s)| dips_in_window(s, start, end, window, config))
            .map(|(id, _)| (*id).clone())
            .collect();
        if dipping.len() >= quorum {
            flagged.push((start, hi, dipping));
        }
    }

    let mut merged: Vec<(T, T, Vec<String>)> = Vec::new();
    for (start, end, ids) in flagged {
        let touches = merged.last().is_some_and(|last| {
            // next domain point after the last window's end
            let next = domain.iter().copied().find(|&x| x > last.1);
            start <= last.1 || next.is_some_and(|n| start <= n)
        });
        if touches {
            let last = merged.last_mut().expect("checked");
            last.1 = last.1.max(end);
            for id in ids {
                if !last.2.contains(&id) {
                    last.2.push(id);
                }
            }
            last.2.sort();
        } else {
            merged.push((start, end, ids));
        }
    }
    Ok(merged
        .into_iter()
        .map(|(start, end, series)| {
            TrendFact::new(TrendBody::ExceptionWindow(ExceptionWindow {
                start,
                end,
                series,
                total_series: multi.len(),
            }))
        })
        .collect())
}

struct Normalizer<T> {
    x: (T, T),
    y: (T, T),
}

impl<T: Scalar> Normalizer<T> {
    fn over<'a>(points: impl Iterator<Item = &'a (T, T)> + Clone) -> Normalizer<T> {
        Normalizer {
            x: span(points.clone().map(|p| p.0)),
            y: span(points.map(|p| p.1)),
        }
    }

    fn apply(&self, &(x, y): &(T, T)) -> (T, T) {
        let scale = |v: T, (lo, hi): (T, T)| {
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                T::zero()
            }
        };
        (scale(x, self.x), scale(y, self.y))
    }
}

fn centroid<T: Scalar>(points: &[(T, T)]) -> (T, T) {
    let xs: Vec<T> = points.iter().map(|p| p.0).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1).collect();
    (mean(&xs), mean(&ys))
}

fn rms_to_centroid<T: Scalar>(points: &[(T, T)]) -> T {
    let (cx, cy) = centroid(points);
    let sq: Vec<T> = points
        .iter()
        .map(|&(x, y)| (x - cx) * (x - cx) + (y - cy) * (y - cy))
        .collect();
    mean(&sq).sqrt()
}

fn normalized_groups<T: Scalar>(
    groups: &BTreeMap<String, Vec<(T, T)>>,
) -> Result<BTreeMap<String, Vec<(T, T)>>, TrendError> {
    for (id, pts) in groups {
        if pts.len() < 2 {
            return Err(TrendError::DegenerateGroup(id.clone()));
        }
        check_finite(pts)?;
    }
    let norm = Normalizer::over(groups.values().flatten());
    Ok(groups
        .iter()
        .map(|(id, pts)| (id.clone(), pts.iter().map(|p| norm.apply(p)).collect()))
        .collect())
}

/// Scores how scattered each group is and orders groups from most to least
/// scattered (ties by id).
pub fn dispersion_compare<T: Scalar>(
    groups: &BTreeMap<String, Vec<(T, T)>>,
) -> Result<TrendFact<T>, TrendError> {
    let normalized = normalized_groups(groups)?;
    let scores: Vec<(String, T)> = normalized
        .iter()
        .map(|(id, pts)| (id.clone(), rms_to_centroid(pts)))
        .collect();
    let mut ordering = scores.clone();
    ordering.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(TrendFact::new(TrendBody::DispersionCompare(Dispersion {
        scores,
        ordering: ordering.into_iter().map(|(id, _)| id).collect(),
    })))
}

/// Centroid distance relative to the groups' combined spread.
pub fn separation<T: Scalar>(
    a: (&str, &[(T, T)]),
    b: (&str, &[(T, T)]),
    config: &TrendConfig,
) -> Result<TrendFact<T>, TrendError> {
    for (id, pts) in [a, b] {
        if pts.len() < 2 {
            return Err(TrendError::DegenerateGroup(id.to_string()));
        }
        check_finite(pts)?;
    }
    let norm = Normalizer::over(a.1.iter().chain(b.1.iter()));
    let na: Vec<(T, T)> = a.1.iter().map(|p| norm.apply(p)).collect();
    let nb: Vec<(T, T)> = b.1.iter().map(|p| norm.apply(p)).collect();
    let (ca, cb) = (centroid(&na), centroid(&nb));
    let distance = ((ca.0 - cb.0).powi(2) + (ca.1 - cb.1).powi(2)).sqrt();
    let spread = rms_to_centroid(&na) + rms_to_centroid(&nb);
    let score = if spread > T::zero() {
        distance / spread
    } else if distance > T::zero() {
        T::infinity()
    } else {
        return Err(TrendError::UndefinedSeparation);
    };
    let verdict = if score > T::lit(config.gap_threshold) {
        SeparationVerdict::Gap
    } else {
        SeparationVerdict::Overlap
    };
    Ok(TrendFact::new(TrendBody::Separation(Separation {
        groups: (a.0.to_string(), b.0.to_string()),
        score,
        verdict,
    })))
}

/// Linear versus exponential-like growth, from the R² of `y ~ x` and
/// `ln y ~ x`.
pub fn growth_shape<T: Scalar>(
    series: &[(T, T)],
    config: &TrendConfig,
) -> Result<TrendFact<T>, TrendError> {
    check_ordered(series, 4)?;
    if series.iter().any(|p| p.1 <= T::zero()) {
        return Err(TrendError::NonPositive);
    }
    let logged: Vec<(T, T)> = series.iter().map(|&(x, y)| (x, y.ln())).collect();
    let linear = fit_line(series).expect("ordered x").r_squared;
    let log = fit_line(&logged).expect("ordered x").r_squared;
    let shape = if log - linear > T::lit(config.exponential_margin) {
        GrowthShape::ExponentialLike
    } else {
        GrowthShape::Linear
    };
    Ok(TrendFact::new(TrendBody::GrowthShape(Growth {
        shape,
        r_squared_linear: linear,
        r_squared_log: log,
    })))
}
