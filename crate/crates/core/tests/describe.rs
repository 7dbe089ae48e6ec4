mod common;

use chartdesc::facts::{correlation, Lexicon};
use chartdesc::realize::{
    collect_facts, compose_description, realize_fact, realize_level1, ComposeOptions, Source,
    Style, Templates,
};
use chartdesc::tabular::{load_table, TableFormat, TableSource};
use chartdesc::trends::TrendConfig;
use chartdesc::{parse_spec, validate_spec, Level};
use common::{chart, normalize};

const COVID_L1: &str = "This is a vertical bar chart entitled \"COVID-19 mortality rate by age\" that plots \
Mortality rate by Age. Mortality rate is plotted on the vertical y-axis from 0 to 15%. Age is plotted on \
the horizontal x-axis in bins: 10-19, 20-29, 30-39, 40-49, 50-59, 60-69, 70-79, 80+.";

const LIFE_L1: &str = "This is a scatter plot entitled \"Born in 2016: Life Expectancy Gap by Gender and \
Income\" that plots Women Life Expectancy at Birth (Years) by Men Life Expectancy at Birth (Years). The \
Women Life Expectancy at Birth is plotted on the vertical y-axis from 40 to 90 years. The Men Life \
Expectancy at Birth is plotted on the horizontal x-axis from 40 to 90 years. High Income Countries are \
plotted in dark green. Low Income Countries are plotted in light green. A 45 degree line from the origin \
represents Equal Life Expectancy.";

const COVID_EXTREMUM: &str =
    "The highest COVID-19 mortality rate is in the 80+ age range, while the \
lowest mortality rate is in 10-19, 20-29, 30-39, sharing the same rate.";

const LIFE_MEANS: &str = "For low income countries, the average life expectancy is 60 years for men and \
65 years for women. For high income countries, the average life expectancy is 77 years for men and 82 \
years for women.";

fn describe(name: &str, levels: &[Level]) -> chartdesc::Description {
    compose_description(
        &chart(name),
        levels,
        Style::Natural,
        &ComposeOptions::default(),
    )
    .unwrap()
}

fn level_text(d: &chartdesc::Description, level: Level) -> String {
    d.at_level(level)
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn covid_level1_matches_golden() {
    let d = realize_level1(&chart("covid-mortality"), &Templates::builtin()).unwrap();
    assert_eq!(normalize(&d.text()), normalize(COVID_L1));
    assert!(d.sentences.iter().all(|s| s.level == Level::Elemental));
}

#[test]
fn life_expectancy_level1_matches_golden() {
    let d = realize_level1(&chart("life-expectancy"), &Templates::builtin()).unwrap();
    assert_eq!(normalize(&d.text()), normalize(LIFE_L1));
    assert_eq!(d.sentences.last().unwrap().source, Source::Annotation);
}

#[test]
fn covid_extremum_matches_golden() {
    let d = describe("covid-mortality", &[Level::Statistical]);
    let first = &d.sentences[0];
    assert_eq!(first.text, COVID_EXTREMUM);
    // the tied minimum is also the only shared-value group, so no separate sentence
    assert!(!level_text(&d, Level::Statistical).contains("share the same"));
}

#[test]
fn group_means_match_golden_on_scatter_and_bars() {
    for name in ["life-expectancy", "life-expectancy-bars"] {
        let d = describe(name, &[Level::Statistical]);
        let means: Vec<&str> = d
            .sentences
            .iter()
            .filter(|s| matches!(&s.source, Source::Fact { kind, .. } if kind == "group_means"))
            .map(|s| s.text.as_str())
            .collect();
        assert_eq!(means.join(" "), LIFE_MEANS, "{name}");
    }
}

#[test]
fn level_one_alone_equals_realize_level1() {
    for name in [
        "covid-mortality",
        "life-expectancy",
        "stock-prices",
        "life-expectancy-bars",
    ] {
        let c = chart(name);
        let composed = compose_description(
            &c,
            &[Level::Elemental],
            Style::Natural,
            &ComposeOptions::default(),
        )
        .unwrap();
        assert_eq!(
            composed,
            realize_level1(&c, &Templates::builtin()).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn levels_one_and_two_concatenate_sub_outputs() {
    let c = chart("covid-mortality");
    let opts = ComposeOptions::default();
    let both = compose_description(
        &c,
        &[Level::Elemental, Level::Statistical],
        Style::Natural,
        &opts,
    )
    .unwrap();
    let mut expected = realize_level1(&c, &opts.templates).unwrap().sentences;
    for fact in collect_facts(&c, &[Level::Statistical], &TrendConfig::default()).unwrap() {
        expected.push(realize_fact(&fact, Style::Natural, &opts.templates).unwrap());
    }
    assert_eq!(both.sentences, expected);
    assert!(both.sentences.iter().any(|s| s.text == COVID_EXTREMUM));
}

#[test]
fn scatter_levels_two_three_include_dispersion_and_separation() {
    let d = describe("life-expectancy", &[Level::Statistical, Level::Perceptual]);
    let kinds: Vec<&str> = d
        .sentences
        .iter()
        .filter_map(|s| match &s.source {
            Source::Fact { kind, .. } => Some(kind.as_str()),
            _ => None,
        })
        .collect();
    assert!(kinds.contains(&"dispersion_compare"));
    assert!(kinds.contains(&"separation"));
    assert!(d.sentences.iter().all(|s| s.level != Level::Elemental));
}

#[test]
fn levels_are_non_decreasing_and_within_request() {
    for name in [
        "covid-mortality",
        "life-expectancy",
        "stock-prices",
        "life-expectancy-bars",
    ] {
        for levels in [
            vec![Level::Elemental, Level::Statistical, Level::Perceptual],
            vec![Level::Perceptual],
            vec![Level::Elemental, Level::Perceptual],
        ] {
            let d = describe(name, &levels);
            assert!(d.sentences.windows(2).all(|w| w[0].level <= w[1].level));
            for s in &d.sentences {
                assert!(levels.contains(&s.level));
                assert!(!s.text.is_empty() && s.text.ends_with(['.', '!', '?']));
                assert_eq!(s.heuristic, s.level == Level::Perceptual);
            }
        }
    }
}

#[test]
fn requesting_no_levels_or_level_four_fails() {
    let c = chart("covid-mortality");
    let opts = ComposeOptions::default();
    assert!(compose_description(&c, &[], Style::Natural, &opts).is_err());
    assert!(compose_description(&c, &[Level::Contextual], Style::Natural, &opts).is_err());
}

#[test]
fn untitled_chart_elides_title_clause() {
    let spec = parse_spec(
        r#"{"mark": "bar", "encoding": {
            "x": {"field": "fruit", "type": "nominal"},
            "y": {"field": "count", "type": "quantitative"}}}"#,
    )
    .unwrap();
    let data = load_table(
        TableSource::Text("fruit,count\nfig,3\nkiwi,5\n"),
        TableFormat::Csv,
    )
    .unwrap();
    let d = realize_level1(&validate_spec(spec, data).unwrap(), &Templates::builtin()).unwrap();
    assert_eq!(d.sentences[0].text, "This is a vertical bar chart.");
}

#[test]
fn horizontal_bars_are_named_as_such() {
    let spec = parse_spec(
        r#"{"mark": "bar", "title": "Fruit", "encoding": {
            "y": {"field": "fruit", "type": "nominal"},
            "x": {"field": "count", "type": "quantitative"}}}"#,
    )
    .unwrap();
    let data = load_table(
        TableSource::Text("fruit,count\nfig,3\nkiwi,5\n"),
        TableFormat::Csv,
    )
    .unwrap();
    let d = realize_level1(&validate_spec(spec, data).unwrap(), &Templates::builtin()).unwrap();
    assert_eq!(
        d.sentences[0].text,
        "This is a horizontal bar chart entitled \"Fruit\" that plots count by fruit."
    );
}

#[test]
fn perfect_correlation_templatized() {
    let xs: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64)).collect();
    let ys: Vec<Option<f64>> = xs.iter().map(|x| x.map(|v| 3.0 * v - 1.0)).collect();
    let fact = correlation(&xs, &ys).unwrap().with_lexicon(Lexicon {
        x: Some("study time".into()),
        y: Some("exam score".into()),
        ..Lexicon::default()
    });
    let s = realize_fact(&fact.into(), Style::Templatized, &Templates::builtin()).unwrap();
    assert_eq!(
        s.text,
        "Study time is positively correlated with exam score."
    );
}

#[test]
fn row_order_does_not_change_the_description() {
    for name in [
        "covid-mortality",
        "life-expectancy",
        "stock-prices",
        "life-expectancy-bars",
    ] {
        let c = chart(name);
        let n = c.data().row_count();
        let reversed: Vec<usize> = (0..n).rev().collect();
        let rotated: Vec<usize> = (0..n).map(|i| (i + n / 3) % n).collect();
        let opts = ComposeOptions::default();
        let all = [Level::Elemental, Level::Statistical, Level::Perceptual];
        let base = compose_description(&c, &all, Style::Natural, &opts).unwrap();
        for order in [reversed, rotated] {
            let other =
                compose_description(&c.with_rows_permuted(&order), &all, Style::Natural, &opts)
                    .unwrap();
            assert_eq!(base, other, "{name}");
        }
    }
}

#[test]
fn template_overrides_change_wording_only() {
    let templates = Templates::with_overrides(
        "[extremum.natural]\nPeak {subject_measure}: {max_place}; floor: {min_place}.\n",
    )
    .unwrap();
    let opts = ComposeOptions {
        templates,
        trends: TrendConfig::default(),
    };
    let d = compose_description(
        &chart("covid-mortality"),
        &[Level::Statistical],
        Style::Natural,
        &opts,
    )
    .unwrap();
    assert_eq!(
        d.sentences[0].text,
        "Peak COVID-19 mortality rate: the 80+ age range; floor: 10-19, 20-29, 30-39."
    );
}

#[test]
fn stock_chart_reports_the_shared_dip() {
    let d = describe("stock-prices", &[Level::Perceptual]);
    let text = level_text(&d, Level::Perceptual);
    assert!(
        text.contains("March 2020 stands out as an exception"),
        "{text}"
    );
    assert!(text.contains("AAPL"), "{text}");
}
