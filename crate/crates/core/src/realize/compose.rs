//! Mark-specific fact pipelines and description assembly.

use std::collections::{BTreeMap, HashSet};

use super::{
    chart_id, is_horizontal_bar, realize_fact, realize_level1, Description, RealizeError,
    SemanticFact, Style, Templates,
};
use crate::chart_spec::{axis_extent, Bin, Channel, Encoding, Extent, Mark, ValidatedChart};
use crate::facts::{
    correlation, detect_outliers, find_extrema, group_means, shared_value_groups, summary_stats,
    FactBody, Lexicon, Provenance, DEFAULT_RELATIVE_TOLERANCE,
};
use crate::tabular::{parse_number, ColumnType, Value};
use crate::trends::{
    classify_trend, detect_exceptions, dispersion_compare, growth_shape, separation, TrendBody,
    TrendConfig, TrendDirection,
};
use crate::Level;

/// Template table and heuristic thresholds used by [`compose_description`].
#[derive(Debug, Clone, Default)]
pub struct ComposeOptions {
    pub templates: Templates,
    pub trends: TrendConfig,
}

fn check_levels(levels: &[Level]) -> Result<(), RealizeError> {
    if levels.is_empty() {
        return Err(RealizeError::NoLevels);
    }
    if levels.contains(&Level::Contextual) {
        return Err(RealizeError::UnsupportedLevel(Level::Contextual));
    }
    Ok(())
}

/// Describes `chart` at the requested levels, in ascending level order.
pub fn compose_description(
    chart: &ValidatedChart,
    levels: &[Level],
    style: Style,
    options: &ComposeOptions,
) -> Result<Description, RealizeError> {
    check_levels(levels)?;
    let mut sentences = Vec::new();
    if levels.contains(&Level::Elemental) {
        sentences.extend(realize_level1(chart, &options.templates)?.sentences);
    }
    let mut facts = collect_facts(chart, levels, &options.trends)?;
    facts.sort_by_key(|f| f.level());
    for fact in &facts {
        sentences.push(realize_fact(fact, style, &options.templates)?);
    }
    Ok(Description {
        chart_id: chart_id(chart),
        sentences,
    })
}

/// Level 2 and 3 facts for `chart`, restricted to `levels` and deduplicated
/// on (kind, provenance columns, provenance groups). Facts whose computation
/// fails are left out.
pub fn collect_facts(
    chart: &ValidatedChart,
    levels: &[Level],
    config: &TrendConfig,
) -> Result<Vec<SemanticFact<f64>>, RealizeError> {
    check_levels(levels)?;
    let mut facts = Vec::new();
    match chart.spec().mark {
        Mark::Bar => bar_facts(chart, config, &mut facts)?,
        Mark::Line => line_facts(chart, config, &mut facts)?,
        Mark::Point => point_facts(chart, config, &mut facts)?,
    }
    let mut seen = HashSet::new();
    facts.retain(|f| {
        levels.contains(&f.level())
            && seen.insert((
                f.kind_name(),
                f.provenance().columns.clone(),
                f.provenance().groups.clone(),
            ))
    });
    Ok(facts)
}

// Shared helpers ----------------------------------------------------------------

/// Noun phrase for running text: explicit noun, else the title without a
/// trailing parenthetical, lower-cased.
fn running_noun(enc: &Encoding) -> String {
    if let Some(noun) = &enc.noun {
        return noun.clone();
    }
    let title = enc.display_title();
    let bare = match title.rfind(" (") {
        Some(i) if title.ends_with(')') => &title[..i],
        _ => title,
    };
    super::lower_words(bare.trim())
}

fn numeric_label_order(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| parse_number(l)).collect();
    match numeric {
        Some(nums) => {
            let mut pairs: Vec<(f64, String)> =
                nums.into_iter().zip(labels.iter().cloned()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            for (slot, (_, l)) in labels.iter_mut().zip(pairs) {
                *slot = l;
            }
        }
        None => labels.sort(),
    }
}

/// Category labels of each row on a categorical channel, with computed bins
/// resolved to their bin label.
fn row_categories(
    chart: &ValidatedChart,
    channel: Channel,
) -> Result<Vec<Option<String>>, RealizeError> {
    let enc = chart.encoding(channel).expect("encoded channel");
    let column = chart.column(channel).expect("validated channel");
    if let Some(Bin::Width(width)) = enc.bin {
        let Extent::Bins(labels) = axis_extent(chart, channel)? else {
            unreachable!("computed bins give a bin extent")
        };
        let nums: Vec<Option<f64>> = column
            .values()
            .iter()
            .map(|v| match v {
                Value::Number(x) => Some(*x),
                Value::Text(s) => parse_number(s),
                _ => None,
            })
            .collect();
        let min = nums.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let start = (min / width).floor() * width;
        return Ok(nums
            .into_iter()
            .map(|v| {
                v.and_then(|x| {
                    let i = ((x - start) / width).floor() as usize;
                    labels.get(i).cloned()
                })
            })
            .collect());
    }
    Ok(column.values().iter().map(Value::label).collect())
}

/// Category order along a categorical channel.
fn category_order(
    chart: &ValidatedChart,
    channel: Channel,
    rows: &[Option<String>],
) -> Result<Vec<String>, RealizeError> {
    Ok(match axis_extent(chart, channel)? {
        Extent::Categories(c) | Extent::Bins(c) => c,
        _ => {
            let mut labels: Vec<String> = rows.iter().flatten().cloned().collect();
            labels.sort();
            labels.dedup();
            numeric_label_order(&mut labels);
            labels
        }
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of `values` per category, in `order`, skipping empty categories.
fn category_means(
    order: &[String],
    cats: &[Option<String>],
    values: &[Option<f64>],
) -> Vec<(String, f64)> {
    let mut buckets: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (c, v) in cats.iter().zip(values) {
        if let (Some(c), Some(v)) = (c, v) {
            buckets.entry(c.as_str()).or_default().push(*v);
        }
    }
    order
        .iter()
        .filter_map(|c| buckets.get(c.as_str()).map(|vs| (c.clone(), mean(vs))))
        .collect()
}

fn is_ordered(enc: &Encoding) -> bool {
    enc.bin.is_some()
        || matches!(
            enc.field_type,
            ColumnType::Ordinal | ColumnType::Temporal | ColumnType::Quantitative
        )
}

fn set_series(body: &mut TrendBody<f64>, name: &str) {
    if let TrendBody::Direction(d) = body {
        d.series = Some(name.to_string());
    }
}

fn trend_and_growth(
    points: &[(f64, f64)],
    series: Option<&str>,
    lexicon: &Lexicon,
    provenance: Provenance,
    config: &TrendConfig,
    with_growth: bool,
    out: &mut Vec<SemanticFact<f64>>,
) {
    let Ok(mut trend) = classify_trend(points, config) else {
        return;
    };
    if let Some(name) = series {
        set_series(&mut trend.body, name);
    }
    let increasing =
        matches!(&trend.body, TrendBody::Direction(d) if d.direction == TrendDirection::Increasing);
    out.push(
        trend
            .with_provenance(provenance.clone())
            .with_lexicon(lexicon.clone())
            .into(),
    );
    if with_growth && increasing {
        if let Ok(g) = growth_shape(points, config) {
            out.push(
                g.with_provenance(provenance)
                    .with_lexicon(lexicon.clone())
                    .into(),
            );
        }
    }
}

// Bar charts -------------------------------------------------------------------

fn bar_facts(
    chart: &ValidatedChart,
    config: &TrendConfig,
    out: &mut Vec<SemanticFact<f64>>,
) -> Result<(), RealizeError> {
    let spec = chart.spec();
    let (dim_ch, measure_ch) = if is_horizontal_bar(chart) {
        (Channel::Y, Channel::X)
    } else {
        (Channel::X, Channel::Y)
    };
    let dim = chart.encoding(dim_ch).expect("bar dimension");
    let measure = chart.encoding(measure_ch).expect("bar measure");
    let measure_col = chart.column(measure_ch).expect("validated");
    if measure_col.ctype() != ColumnType::Quantitative {
        return Ok(());
    }
    let values = measure_col.numbers::<f64>()?;
    let cats = row_categories(chart, dim_ch)?;
    let order = category_order(chart, dim_ch, &cats)?;
    let lexicon = Lexicon {
        measure: Some(running_noun(measure)),
        subject: spec.subject.clone(),
        category_noun: dim.noun.clone(),
        x: Some(running_noun(dim)),
        y: Some(running_noun(measure)),
        unit: measure.unit.clone(),
        temporal_x: dim.field_type == ColumnType::Temporal,
    };
    let columns = Provenance::columns([dim.field.clone(), measure.field.clone()]);
    let series = category_means(&order, &cats, &values);

    if let Ok(extremum) = find_extrema(&series) {
        let tied: Vec<Vec<String>> = match &extremum.body {
            FactBody::Extremum(e) => vec![e.max_categories.clone(), e.min_categories.clone()],
            _ => Vec::new(),
        };
        out.push(
            extremum
                .with_provenance(columns.clone())
                .with_lexicon(lexicon.clone())
                .into(),
        );
        if let Ok(mut shared) = shared_value_groups(&series, DEFAULT_RELATIVE_TOLERANCE) {
            if let FactBody::SharedValue { groups } = &mut shared.body {
                groups.retain(|g| !tied.contains(&g.categories));
                if !groups.is_empty() {
                    out.push(
                        shared
                            .with_provenance(columns.clone())
                            .with_lexicon(lexicon.clone())
                            .into(),
                    );
                }
            }
        }
    }
    let means: Vec<Option<f64>> = series.iter().map(|(_, v)| Some(*v)).collect();
    if let Ok(mut outliers) = detect_outliers(&means) {
        if let FactBody::Outliers(o) = &mut outliers.body {
            for item in &mut o.outliers {
                item.label = Some(series[item.index].0.clone());
            }
            if !o.outliers.is_empty() {
                out.push(
                    outliers
                        .with_provenance(columns.clone())
                        .with_lexicon(lexicon.clone())
                        .into(),
                );
            }
        }
    }

    if let Some(color) = chart.encoding(Channel::Color) {
        let groups_rows: Vec<Option<String>> = chart
            .column(Channel::Color)
            .expect("validated")
            .values()
            .iter()
            .map(Value::label)
            .collect();
        let group_order = category_order(chart, Channel::Color, &groups_rows)?;
        let mut per_group = Vec::new();
        for group in &group_order {
            let picked: Vec<Option<f64>> = values
                .iter()
                .zip(&groups_rows)
                .map(|(v, g)| {
                    if g.as_deref() == Some(group.as_str()) {
                        *v
                    } else {
                        None
                    }
                })
                .collect();
            let entries = category_means(&order, &cats, &picked);
            if entries.is_empty() {
                continue;
            }
            let overall = mean(&entries.iter().map(|e| e.1).collect::<Vec<_>>());
            per_group.push((overall, group.clone(), entries));
        }
        push_group_means(per_group, &columns, &color.field, &lexicon, out);
    }

    if is_ordered(dim) && series.len() >= 3 {
        let points: Vec<(f64, f64)> = series
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (i as f64, *v))
            .collect();
        trend_and_growth(
            &points,
            None,
            &lexicon,
            columns,
            config,
            points.len() >= 4,
            out,
        );
    }
    Ok(())
}

/// Overall mean, group label, and (entry label, mean) pairs.
type GroupEntries = (f64, String, Vec<(String, f64)>);

/// One group-means fact per group, lowest overall mean first.
fn push_group_means(
    mut per_group: Vec<GroupEntries>,
    columns: &Provenance,
    color_field: &str,
    lexicon: &Lexicon,
    out: &mut Vec<SemanticFact<f64>>,
) {
    per_group.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    for (_, group, entries) in per_group {
        let mut cols = columns.columns.clone();
        cols.push(color_field.to_string());
        out.push(
            group_means(group.clone(), entries)
                .with_provenance(Provenance::columns(cols).with_groups([group]))
                .with_lexicon(lexicon.clone())
                .into(),
        );
    }
}

// Line charts ------------------------------------------------------------------

struct Point {
    x: f64,
    y: f64,
    label: String,
}

fn line_facts(
    chart: &ValidatedChart,
    config: &TrendConfig,
    out: &mut Vec<SemanticFact<f64>>,
) -> Result<(), RealizeError> {
    let spec = chart.spec();
    let (x_enc, y_enc) = (spec.x(), spec.y());
    let y_col = chart.column(Channel::Y).expect("validated");
    if y_col.ctype() != ColumnType::Quantitative {
        return Ok(());
    }
    let ys = y_col.numbers::<f64>()?;
    let x_labels = row_categories(chart, Channel::X)?;
    let xs: Vec<Option<f64>> = if x_enc.is_categorical() {
        let order = category_order(chart, Channel::X, &x_labels)?;
        x_labels
            .iter()
            .map(|l| {
                l.as_ref()
                    .and_then(|l| order.iter().position(|o| o == l))
                    .map(|i| i as f64)
            })
            .collect()
    } else {
        chart
            .column(Channel::X)
            .expect("validated")
            .numbers::<f64>()?
    };
    let series_of: Vec<Option<String>> = match chart.column(Channel::Color) {
        Some(col) => col.values().iter().map(Value::label).collect(),
        None => vec![Some(String::new()); ys.len()],
    };

    // series -> x key -> (x, ys at that x, x label)
    type Merged = BTreeMap<u64, (f64, Vec<f64>, String)>;
    let mut raw: BTreeMap<String, Merged> = BTreeMap::new();
    for i in 0..ys.len() {
        if let (Some(x), Some(y), Some(s), Some(l)) = (xs[i], ys[i], &series_of[i], &x_labels[i]) {
            let slot = raw
                .entry(s.clone())
                .or_default()
                .entry(ordered_key(x))
                .or_insert_with(|| (x, Vec::new(), l.clone()));
            slot.1.push(y);
            if *l < slot.2 {
                slot.2 = l.clone();
            }
        }
    }
    let series: BTreeMap<String, Vec<Point>> = raw
        .into_iter()
        .map(|(name, pts)| {
            let pts = pts
                .into_values()
                .map(|(x, ys, label)| Point {
                    x,
                    y: mean(&ys),
                    label,
                })
                .collect();
            (name, pts)
        })
        .collect();
    if series.is_empty() {
        return Ok(());
    }
    let multi = chart.encoding(Channel::Color).is_some();
    let lexicon = Lexicon {
        measure: Some(running_noun(y_enc)),
        subject: spec.subject.clone(),
        category_noun: None,
        x: Some(running_noun(x_enc)),
        y: Some(running_noun(y_enc)),
        unit: y_enc.unit.clone(),
        temporal_x: x_enc.field_type == ColumnType::Temporal,
    };
    let mut columns = vec![x_enc.field.clone(), y_enc.field.clone()];
    if let Some(c) = chart.encoding(Channel::Color) {
        columns.push(c.field.clone());
    }
    let columns = Provenance::columns(columns);

    if multi {
        let by_mean: Vec<(String, f64)> = series
            .iter()
            .map(|(name, pts)| {
                (
                    name.clone(),
                    mean(&pts.iter().map(|p| p.y).collect::<Vec<_>>()),
                )
            })
            .collect();
        if by_mean.len() >= 2 {
            if let Ok(f) = find_extrema(&by_mean) {
                let lex = Lexicon {
                    measure: lexicon.measure.as_ref().map(|m| format!("average {m}")),
                    ..lexicon.clone()
                };
                out.push(f.with_provenance(columns.clone()).with_lexicon(lex).into());
            }
        }
    } else {
        let pts = series.values().next().expect("non-empty");
        let values: Vec<Option<f64>> = pts.iter().map(|p| Some(p.y)).collect();
        if let Ok(f) = summary_stats(&values) {
            out.push(
                f.with_provenance(columns.clone())
                    .with_lexicon(lexicon.clone())
                    .into(),
            );
        }
        let labelled: Vec<(String, f64)> = pts.iter().map(|p| (p.label.clone(), p.y)).collect();
        if let Ok(f) = find_extrema(&labelled) {
            out.push(
                f.with_provenance(columns.clone())
                    .with_lexicon(lexicon.clone())
                    .into(),
            );
        }
    }

    let plain: BTreeMap<String, Vec<(f64, f64)>> = series
        .iter()
        .map(|(name, pts)| (name.clone(), pts.iter().map(|p| (p.x, p.y)).collect()))
        .collect();
    for (name, pts) in &plain {
        let provenance = if multi {
            columns.clone().with_groups([name.clone()])
        } else {
            columns.clone()
        };
        let series_name = multi.then_some(name.as_str());
        trend_and_growth(pts, series_name, &lexicon, provenance, config, !multi, out);
    }
    if multi && plain.len() >= 2 {
        if let Some(window) = min_spacing(&plain) {
            if let Ok(windows) = detect_exceptions(&plain, window, config) {
                for w in windows {
                    let key = match &w.body {
                        TrendBody::ExceptionWindow(e) => format!("{}..{}", e.start, e.end),
                        _ => String::new(),
                    };
                    out.push(
                        w.with_provenance(columns.clone().with_groups([key]))
                            .with_lexicon(lexicon.clone())
                            .into(),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Total-order key for an f64 so points can be merged on equal x.
fn ordered_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn min_spacing(series: &BTreeMap<String, Vec<(f64, f64)>>) -> Option<f64> {
    series
        .values()
        .flat_map(|pts| pts.windows(2).map(|w| w[1].0 - w[0].0))
        .filter(|d| *d > 0.0)
        .min_by(f64::total_cmp)
}

// Scatter plots ----------------------------------------------------------------

/// Splits two noun phrases into a shared trailing phrase and the differing
/// leading words: ("men life expectancy", "women life expectancy") gives
/// ("life expectancy", "men", "women").
fn common_suffix(a: &str, b: &str) -> Option<(String, String, String)> {
    let (wa, wb): (Vec<&str>, Vec<&str>) = (
        a.split_whitespace().collect(),
        b.split_whitespace().collect(),
    );
    let shared = wa
        .iter()
        .rev()
        .zip(wb.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    if shared == 0 || shared == wa.len() || shared == wb.len() {
        return None;
    }
    Some((
        wa[wa.len() - shared..].join(" "),
        wa[..wa.len() - shared].join(" "),
        wb[..wb.len() - shared].join(" "),
    ))
}

fn point_facts(
    chart: &ValidatedChart,
    config: &TrendConfig,
    out: &mut Vec<SemanticFact<f64>>,
) -> Result<(), RealizeError> {
    let spec = chart.spec();
    let (x_enc, y_enc) = (spec.x(), spec.y());
    let (x_col, y_col) = (
        chart.column(Channel::X).expect("validated"),
        chart.column(Channel::Y).expect("validated"),
    );
    if x_col.ctype() == ColumnType::Nominal || y_col.ctype() != ColumnType::Quantitative {
        return Ok(());
    }
    let xs = x_col.numbers::<f64>()?;
    let ys = y_col.numbers::<f64>()?;
    let (x_noun, y_noun) = (running_noun(x_enc), running_noun(y_enc));
    let lexicon = Lexicon {
        measure: None,
        subject: spec.subject.clone(),
        category_noun: None,
        x: Some(x_noun.clone()),
        y: Some(y_noun.clone()),
        unit: None,
        temporal_x: x_enc.field_type == ColumnType::Temporal,
    };
    let mut columns = vec![x_enc.field.clone(), y_enc.field.clone()];
    if let Ok(f) = correlation(&xs, &ys) {
        out.push(
            f.with_provenance(Provenance::columns(columns.clone()))
                .with_lexicon(lexicon.clone())
                .into(),
        );
    }

    let Some(color) = chart.encoding(Channel::Color) else {
        return Ok(());
    };
    columns.push(color.field.clone());
    let provenance = Provenance::columns(columns);
    let rows: Vec<Option<String>> = chart
        .column(Channel::Color)
        .expect("validated")
        .values()
        .iter()
        .map(Value::label)
        .collect();
    let order = category_order(chart, Channel::Color, &rows)?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((x, y), g) in xs.iter().zip(&ys).zip(&rows) {
        if let (Some(x), Some(y), Some(g)) = (x, y, g) {
            groups.entry(g.clone()).or_default().push((*x, *y));
        }
    }

    let (measure, x_label, y_label) = match common_suffix(&x_noun, &y_noun) {
        Some(split) => (Some(split.0), split.1, split.2),
        None => (None, x_noun.clone(), y_noun.clone()),
    };
    let means_lexicon = Lexicon {
        measure,
        unit: if x_enc.unit == y_enc.unit {
            y_enc.unit.clone()
        } else {
            None
        },
        ..lexicon.clone()
    };
    let per_group = order
        .iter()
        .filter_map(|g| groups.get(g).map(|pts| (g, pts)))
        .map(|(g, pts)| {
            let mx = mean(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
            let my = mean(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
            (
                (mx + my) / 2.0,
                g.clone(),
                vec![(x_label.clone(), mx), (y_label.clone(), my)],
            )
        })
        .collect();
    push_group_means(
        per_group,
        &Provenance::columns(provenance.columns[..2].to_vec()),
        &color.field,
        &means_lexicon,
        out,
    );

    let usable: BTreeMap<String, Vec<(f64, f64)>> = groups
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 2)
        .collect();
    if usable.len() >= 2 {
        if let Ok(f) = dispersion_compare(&usable) {
            out.push(
                f.with_provenance(provenance.clone())
                    .with_lexicon(lexicon.clone())
                    .into(),
            );
        }
    }
    if usable.len() == 2 {
        let mut it = usable.iter();
        let (a, b) = (it.next().expect("two"), it.next().expect("two"));
        if let Ok(f) = separation((a.0, a.1), (b.0, b.1), config) {
            out.push(f.with_provenance(provenance).with_lexicon(lexicon).into());
        }
    }
    Ok(())
}
