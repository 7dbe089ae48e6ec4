//! Text, JSON and HTML renderings of command results.

use std::fmt::Write as _;

use chartdesc::corpus::{Breakdown, Corpus, DistributionRow, Facet};
use chartdesc::rankstats::GroupReport;
use chartdesc::realize::{Description, Style};
use chartdesc::Level;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty JSON with `schema_version` as the first key.
pub fn versioned_json(body: Value) -> String {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("json value serializes");
    out.push('\n');
    out
}

/// One paragraph per level.
pub fn description_text(d: &Description) -> String {
    let mut out = String::new();
    for level in Level::ALL {
        let texts: Vec<&str> = d.at_level(level).map(|s| s.text.as_str()).collect();
        if texts.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&texts.join(" "));
        out.push('\n');
    }
    out
}

pub fn description_json(d: &Description, levels: &[Level], style: Style) -> String {
    versioned_json(json!({
        "chart_id": d.chart_id,
        "levels": levels,
        "style": style,
        "sentences": d.sentences,
    }))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Figure placeholder whose accessible name is the first Level 1 sentence
/// (or the title), followed by the full description grouped by level.
pub fn description_html(d: &Description, title: Option<&str>) -> String {
    let name = d
        .at_level(Level::Elemental)
        .next()
        .map(|s| s.text.as_str())
        .or(title)
        .unwrap_or("Chart");
    let mut out = String::new();
    out.push_str("<section class=\"chartdesc\">\n");
    let _ = writeln!(
        out,
        "  <figure role=\"img\" aria-label=\"{}\" aria-describedby=\"chartdesc-description\"></figure>",
        escape(name)
    );
    out.push_str("  <div id=\"chartdesc-description\">\n");
    for s in &d.sentences {
        let _ = writeln!(
            out,
            "    <p data-level=\"{}\">{}</p>",
            s.level,
            escape(&s.text)
        );
    }
    out.push_str("  </div>\n</section>\n");
    out
}

fn percent(p: f64) -> String {
    format!("{:.1}%", p * 100.0)
}

pub fn stats_text(c: &Corpus, rows: &[DistributionRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sentences     {}", c.sentence_count());
    let _ = writeln!(out, "descriptions  {}", c.description_count());
    let _ = writeln!(out, "charts        {}", c.chart_count());
    if rows.is_empty() {
        return out;
    }
    let width = rows
        .iter()
        .map(|r| r.facet_value.len())
        .max()
        .unwrap_or(0)
        .max(5);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>7}  {:>7}  {:>7}  {:>7}",
        "facet", "n", "L1", "L2", "L3", "L4"
    );
    for r in rows {
        let _ = write!(out, "{:<width$}  {:>6}", r.facet_value, r.total);
        for p in r.proportions {
            let _ = write!(out, "  {:>7}", percent(p));
        }
        out.push('\n');
    }
    out
}

pub fn stats_json(c: &Corpus, facet: Option<Facet>, rows: &[DistributionRow]) -> String {
    versioned_json(json!({
        "sentences": c.sentence_count(),
        "descriptions": c.description_count(),
        "charts": c.chart_count(),
        "facet": facet,
        "distribution": rows,
    }))
}

pub fn breakdown_text(b: &Breakdown) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "charts  {}", b.charts);
    let mut section = |name: &str, cells: Vec<(&str, usize)>| {
        let _ = writeln!(out, "\n{name}");
        for (k, v) in cells {
            let _ = writeln!(out, "  {k:<12} {v}");
        }
    };
    section(
        "chart type",
        b.chart_type.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
    );
    section(
        "topic",
        b.topic.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
    );
    section(
        "difficulty",
        b.difficulty.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
    );
    out
}

pub fn eval_text(reports: &[GroupReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "== {} readers ==", r.group);
        let _ = writeln!(
            out,
            "responses {}  rejected {}  kept {}",
            r.responses, r.rejected, r.friedman.n
        );
        let _ = writeln!(
            out,
            "Friedman  Q = {:.4}  df = {}  p = {:.3e}",
            r.friedman.q, r.friedman.df, r.friedman.p
        );
        let cols = &r.heatmap.columns;
        let means: Vec<String> = cols
            .iter()
            .zip(&r.nemenyi.mean_ranks)
            .map(|(c, m)| format!("{c} {m:.3}"))
            .collect();
        let _ = writeln!(out, "mean ranks  {}", means.join("  "));
        let _ = writeln!(
            out,
            "Nemenyi  alpha = {}  CD = {:.4}",
            r.nemenyi.alpha, r.nemenyi.critical_difference
        );
        for p in &r.nemenyi.pairs {
            let _ = writeln!(
                out,
                "  {} x {}  diff {:+.3}  p {:.3e}  {}",
                p.a,
                p.b,
                p.difference,
                p.p,
                if p.significant {
                    "significant"
                } else {
                    "not significant"
                }
            );
        }
        let _ = writeln!(
            out,
            "rank counts (rows: level, columns: rank 1-{})",
            cols.len()
        );
        for (c, row) in cols.iter().zip(&r.heatmap.counts) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>6}")).collect();
            let _ = writeln!(out, "  {c:<4}{}", cells.join(""));
        }
        let regions: Vec<String> = r
            .regions
            .regions
            .iter()
            .map(|reg| {
                let cells: Vec<String> = reg
                    .iter()
                    .map(|&(l, k)| format!("{}@{}", cols[l], k + 1))
                    .collect();
                format!("{{{}}}", cells.join(", "))
            })
            .collect();
        let _ = writeln!(
            out,
            "threshold {:.2} (mean {:.2} + sd {:.2} / 2)  regions {}",
            r.regions.threshold,
            r.regions.mean,
            r.regions.stdev,
            if regions.is_empty() {
                "none".to_string()
            } else {
                regions.join(" ")
            }
        );
    }
    out
}
