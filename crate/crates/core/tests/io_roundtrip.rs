use std::path::PathBuf;

use inflatelab::experiments::run_inflation_scan;
use inflatelab::io::{self, ConfigError, RunConfig, parse_data_spec, read_csv, write_csv};
use inflatelab::{Tree, TrigPolynomial};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn endpoint_config() -> RunConfig {
    RunConfig::from_json(r#"{"experiment": "endpoint", "J_max": 2}"#, None).unwrap()
}

fn scan_csv(cfg: &RunConfig) -> String {
    let records: Vec<_> = run_inflation_scan(&cfg.scan_spec(), |_| {})
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn scans_are_byte_identical_across_runs() {
    let cfg = RunConfig::from_json(r#"{"experiment": "nonendpoint"}"#, None).unwrap();
    assert_eq!(scan_csv(&cfg), scan_csv(&cfg));
    let cfg = endpoint_config();
    assert_eq!(scan_csv(&cfg), scan_csv(&cfg));
}

#[test]
fn csv_round_trips_including_infinities() {
    let cfg = endpoint_config();
    let records: Vec<_> = run_inflation_scan(&cfg.scan_spec(), |_| {})
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert!(records.iter().any(|r| r.lower_bound == f64::NEG_INFINITY));
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    let header = String::from_utf8(buf.clone()).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, io::CSV_HEADER.join(","));
    let back = read_csv(buf.as_slice()).unwrap();
    let mut again = Vec::new();
    write_csv(&back, &mut again).unwrap();
    assert_eq!(again, buf);
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
    for (a, b) in back.iter().zip(&records) {
        assert_eq!((a.n, a.k, &a.equation), (b.n, b.k, &b.equation));
        for (x, y) in [(a.t, b.t), (a.norm_u0_cs, b.norm_u0_cs), (a.p0_xi1_pipeline, b.p0_xi1_pipeline)] {
            assert!(close(x, y), "{x} vs {y}");
        }
        assert_eq!(a.lower_bound, b.lower_bound);
    }
}

#[test]
fn effective_config_echo_parses_back() {
    let cfg = RunConfig::from_json(r#"{"experiment": "ch-var2", "C0": 0.5}"#, None).unwrap();
    assert_eq!(RunConfig::from_json(&cfg.to_json_pretty(), None).unwrap(), cfg);
}

#[test]
fn config_errors_name_the_key() {
    let err = RunConfig::from_json(r#"{"experiment": "nonendpoint", "N_list": [64, -1]}"#, None).unwrap_err();
    match err {
        ConfigError::Schema { key, .. } => assert_eq!(key, "N_list[1]"),
        other => panic!("{other}"),
    }
    let err = RunConfig::from_json(r#"{"experiment": "nonendpoint", "s": 0.5}"#, None).unwrap_err();
    assert!(err.to_string().contains("-2/3-ε"), "{err}");
}

#[test]
fn corpus_seeds_parse_or_fail_cleanly() {
    for (name, bytes) in corpus("parse_tree") {
        let text = String::from_utf8(bytes).unwrap();
        match Tree::parse(&text) {
            Ok(t) => assert_eq!(t.serialize(), text, "{name}"),
            Err(_) => assert!(name.starts_with("bad"), "{name}"),
        }
    }
    for (name, bytes) in corpus("parse_field") {
        let f = TrigPolynomial::parse_canonical(std::str::from_utf8(&bytes).unwrap())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = f.to_canonical_string();
        let g = TrigPolynomial::parse_canonical(&text).unwrap();
        assert_eq!(g.to_canonical_string(), text, "{name}");
        assert_eq!(f.max_abs_difference(&g).unwrap(), 0.0, "{name}");
    }
    for (name, bytes) in corpus("parse_data_spec") {
        let ok = parse_data_spec(std::str::from_utf8(&bytes).unwrap()).is_ok();
        assert_eq!(ok, name != "out_of_window", "{name}");
    }
    for (name, bytes) in corpus("parse_config") {
        let ok = RunConfig::from_json(std::str::from_utf8(&bytes).unwrap(), None).is_ok();
        assert_eq!(ok, !matches!(name.as_str(), "bad_type" | "typo"), "{name}");
    }
}

#[test]
fn plot_shows_the_fitted_slope() {
    let cfg = RunConfig::from_json(r#"{"experiment": "nonendpoint"}"#, None).unwrap();
    let records: Vec<_> = run_inflation_scan(&cfg.scan_spec(), |_| {})
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let svg = io::render_svg(&records);
    assert_eq!(svg.matches("class=\"marker\"").count(), records.len());
    assert!(svg.contains("slope = 0.370"), "{svg}");
}

#[test]
fn duplicate_keys_and_window_violations_are_rejected() {
    let err = RunConfig::from_json(r#"{"experiment": "nonendpoint", "s": -0.8, "s": -0.9}"#, None).unwrap_err();
    assert!(matches!(err, ConfigError::Schema { .. }), "{err}");
    let err = RunConfig::from_json(
        r#"{"experiment": "nonendpoint", "s": -0.5, "delta": 0.1, "eps": 0.01}"#,
        None,
    )
    .unwrap_err();
    assert!(matches!(err, ConfigError::Parameters(_)), "{err}");
}

#[test]
fn empty_scan_writes_only_the_header() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", io::CSV_HEADER.join(",")));
}
