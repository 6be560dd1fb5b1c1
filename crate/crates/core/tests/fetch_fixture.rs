use std::path::PathBuf;

use reqroi_core::corpus::fetch::{fetch_records, FetchConfig, FixtureTransport};
use reqroi_core::corpus::{build_pairs, DependencyLabel};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bugzilla_page.json")
}

#[test]
fn recorded_page_becomes_records() {
    let transport = FixtureTransport::from_file(fixture()).unwrap();
    let records = fetch_records(&FetchConfig::default(), &transport).unwrap();
    let ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["1399", "1402", "1410", "1423"]);

    let pin = &records[1];
    assert_eq!(pin.title, "Allow pinning tabs from the context menu");
    assert_eq!(pin.priority, "P3");
    assert_eq!(pin.depends_on, ["1399"]);
    // Off-tracker links are dropped.
    assert_eq!(pin.see_also, ["1410"]);
    assert!(records[2].depends_on.is_empty());
    assert!(records[3].see_also.is_empty());
}

#[test]
fn fetched_links_label_pairs() {
    let transport = FixtureTransport::from_file(fixture()).unwrap();
    let records = fetch_records(&FetchConfig::default(), &transport).unwrap();
    let build = build_pairs(&records, 1.0, 0).unwrap();
    let label = |a: &str, b: &str| {
        build
            .pairs
            .iter()
            .find(|p| p.key() == (a, b))
            .map(|p| p.label)
    };
    assert_eq!(label("1399", "1402"), Some(DependencyLabel::Requires));
    assert_eq!(label("1402", "1410"), Some(DependencyLabel::Other));
    let independent = build
        .pairs
        .iter()
        .filter(|p| p.label == DependencyLabel::Independent)
        .count();
    assert_eq!(independent, 2);
}

#[test]
fn paging_stops_on_short_page() {
    let config = FetchConfig {
        page_size: 2,
        max_records: 10,
        ..FetchConfig::default()
    };
    let body = |ids: &[u64]| {
        let bugs: Vec<String> = ids
            .iter()
            .map(|i| format!(r#"{{"id": {i}, "summary": "bug {i}"}}"#))
            .collect();
        format!(r#"{{"bugs": [{}]}}"#, bugs.join(","))
    };
    let transport = FixtureTransport::new()
        .with_page(config.page_url(0), body(&[5, 3]))
        .with_page(config.page_url(2), body(&[9, 3]))
        .with_page(config.page_url(4), body(&[1]));
    let records = fetch_records(&config, &transport).unwrap();
    let ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["1", "3", "5", "9"]);
    // A missing page is a transport error, not an empty result.
    let broken = FixtureTransport::new().with_page(config.page_url(0), body(&[5, 3]));
    assert!(fetch_records(&config, &broken).is_err());
}
