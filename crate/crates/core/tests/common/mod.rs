#![allow(dead_code)]

use std::path::PathBuf;

use chartdesc::{parse_spec, validate_spec, ValidatedChart};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn chart(name: &str) -> ValidatedChart {
    let path = fixture(&format!("charts/{name}.json"));
    let spec = parse_spec(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let data = spec.load_data(path.parent()).unwrap();
    validate_spec(spec, data).unwrap()
}

pub fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
