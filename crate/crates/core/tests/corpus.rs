use chartdesc::corpus::{
    curation_breakdown, export_csv, export_jsonl, fingerprint, level_distribution, load_corpus,
    load_corpus_with, parse_corpus, parse_corpus_csv, ChartType, Corpus, CorpusError,
    CorpusSentence, Difficulty, Facet, FieldMapAdapter, NativeAdapter, Topic,
};
use chartdesc::Level;
use proptest::prelude::*;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/corpus")
        .join(name)
}

fn labelled() -> Corpus {
    load_corpus(&fixture("labelled-sentences.jsonl")).unwrap()
}

#[test]
fn bundled_corpus_counts() {
    let c = labelled();
    assert_eq!(c.sentence_count(), 200);
    assert_eq!(c.description_count(), 58);
    assert_eq!(c.chart_count(), 8);
}

#[test]
fn bundled_corpus_level_shares() {
    let rows = level_distribution(&labelled(), None).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].counts, [18, 70, 86, 26]);
    for (got, want) in rows[0].proportions.iter().zip([0.09, 0.35, 0.43, 0.13]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn faceted_shares_sum_to_one_and_partition_the_corpus() {
    let c = labelled();
    for facet in [Facet::ChartType, Facet::Topic, Facet::Difficulty] {
        let rows = level_distribution(&c, Some(facet)).unwrap();
        assert_eq!(rows.iter().map(|r| r.total).sum::<usize>(), 200);
        for r in rows {
            assert!((r.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(r.counts.iter().sum::<usize>(), r.total);
        }
    }
}

#[test]
fn fingerprints_follow_sentence_order() {
    let c = labelled();
    let a = fingerprint(&c, "A").unwrap();
    let p01 = a.iter().find(|r| r.participant_id == "p01").unwrap();
    let numbers: Vec<u8> = p01.levels.iter().map(|l| l.number()).collect();
    assert_eq!(numbers, [1, 2, 3, 3, 4, 3, 2, 3, 4, 3]);
    assert_eq!(fingerprint(&c, "B").unwrap().len(), 12);
    assert!(matches!(
        fingerprint(&c, "nope"),
        Err(CorpusError::UnknownChart(_))
    ));
}

#[test]
fn three_chart_breakdown() {
    let b = curation_breakdown(&load_corpus(&fixture("three-charts.jsonl")).unwrap());
    assert_eq!(b.charts, 3);
    for t in ChartType::ALL {
        assert_eq!(b.chart_type[t], 1);
    }
    for t in Topic::ALL {
        assert_eq!(b.topic[t], 1);
    }
    for d in Difficulty::ALL {
        assert_eq!(b.difficulty[d], 1);
    }
}

#[test]
fn bundled_breakdown() {
    let b = curation_breakdown(&labelled());
    assert_eq!(b.charts, 8);
    assert_eq!(
        (
            b.chart_type[&ChartType::Bar],
            b.chart_type[&ChartType::Line],
            b.chart_type[&ChartType::Scatter]
        ),
        (3, 3, 2)
    );
    assert_eq!(
        (
            b.topic[&Topic::Journalism],
            b.topic[&Topic::Business],
            b.topic[&Topic::Academic]
        ),
        (3, 2, 3)
    );
    assert_eq!(
        (
            b.difficulty[&Difficulty::Easy],
            b.difficulty[&Difficulty::Medium],
            b.difficulty[&Difficulty::Hard]
        ),
        (3, 3, 2)
    );
}

#[test]
fn malformed_lines_report_their_number() {
    let good = r#"{"chart_id":"A","chart_type":"bar","topic":"business","difficulty":"easy","participant_id":"p","sentence_index":0,"text":"t","level":1}"#;
    let text = format!("{good}\n\n{{not json\n");
    assert!(matches!(
        parse_corpus(&text, &NativeAdapter),
        Err(CorpusError::Invalid { line: 3, .. })
    ));
    let bad_level = good.replace("\"level\":1", "\"level\":7");
    assert!(matches!(
        parse_corpus(&bad_level, &NativeAdapter),
        Err(CorpusError::Invalid { line: 1, .. })
    ));
    let extra = good.replace("\"level\":1", "\"level\":1,\"mood\":\"x\"");
    assert!(parse_corpus(&extra, &NativeAdapter).is_err());
}

#[test]
fn field_map_adapter_reads_foreign_records() {
    let dir = tempdir();
    let path = dir.join("foreign.jsonl");
    std::fs::write(
        &path,
        r#"{"chart": 12, "type": "Bar", "topic": "Business", "difficulty": "EASY", "worker": "w1", "idx": "0", "sentence": "x", "label": "2"}"#,
    )
    .unwrap();
    let adapter = FieldMapAdapter::new([
        ("chart_id", "chart"),
        ("chart_type", "type"),
        ("participant_id", "worker"),
        ("sentence_index", "idx"),
        ("text", "sentence"),
        ("level", "label"),
    ]);
    let c = load_corpus_with(&path, &adapter).unwrap();
    let s = &c.sentences()[0];
    assert_eq!(
        (s.chart_id.as_str(), s.level, s.chart_type),
        ("12", Level::Statistical, ChartType::Bar)
    );
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("chartdesc-corpus-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn level() -> impl Strategy<Value = Level> {
    (1u8..=4).prop_map(|n| Level::try_from(n).unwrap())
}

fn corpus() -> impl Strategy<Value = Corpus> {
    let chart = (0usize..3, 0usize..3, 0usize..3);
    prop::collection::vec(
        (
            chart,
            prop::collection::vec(
                prop::collection::vec((level(), "[ -~\n\u{e9}]{0,30}"), 1..6),
                1..4,
            ),
        ),
        1..5,
    )
    .prop_map(|charts| {
        let mut sentences = Vec::new();
        for (c, ((t, topic, d), descriptions)) in charts.into_iter().enumerate() {
            for (p, desc) in descriptions.into_iter().enumerate() {
                for (i, (level, text)) in desc.into_iter().enumerate() {
                    sentences.push(CorpusSentence {
                        chart_id: format!("c{c}"),
                        chart_type: ChartType::ALL[t],
                        topic: Topic::ALL[topic],
                        difficulty: Difficulty::ALL[d],
                        participant_id: format!("p{p}"),
                        sentence_index: i as u32,
                        text,
                        level,
                    });
                }
            }
        }
        Corpus::from_sentences(sentences).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn jsonl_and_csv_exports_round_trip(c in corpus()) {
        let jsonl = export_jsonl(&c);
        prop_assert_eq!(&parse_corpus(&jsonl, &NativeAdapter).unwrap(), &c);
        let csv = export_csv(&c).unwrap();
        prop_assert_eq!(&parse_corpus_csv(&csv).unwrap(), &c);
    }

    #[test]
    fn level_shares_sum_to_one(c in corpus()) {
        for facet in [None, Some(Facet::ChartType), Some(Facet::Topic), Some(Facet::Difficulty)] {
            for r in level_distribution(&c, facet).unwrap() {
                prop_assert!((r.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fingerprints_cover_every_sentence(c in corpus()) {
        let mut total = 0;
        for (id, _) in c.charts() {
            total += fingerprint(&c, id).unwrap().iter().map(|r| r.levels.len()).sum::<usize>();
        }
        prop_assert_eq!(total, c.sentence_count());
    }
}
