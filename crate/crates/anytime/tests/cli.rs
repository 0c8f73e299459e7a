use std::fs;
use std::path::Path;

use anytime::cli::run;
use anytime::document::{load_profile, parse_profile, save_profile};
use anytime::fixtures;
use anytime::render::parse_plan;
use anytime_core::Weighting;

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let out = dir.join(name);
    let mut argv = vec!["anytime"];
    argv.extend_from_slice(args);
    argv.extend(["--out", out.to_str().unwrap()]);
    let status = run(&argv);
    (status, fs::read_to_string(&out).unwrap_or_default())
}

#[test]
fn validate_summarizes_a_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (status, text) = run_to(dir.path(), "v.txt", &["validate", "builtin:gelan-t"]);
    assert_eq!(status, 0);
    assert!(text.starts_with("gelan-t: 23 layers, 15 sub-exits"), "{text}");
    assert!(text.contains("final exit (15,18,21)"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = dir.path().join("cyclic.json");
    let mut doc: serde_json::Value = serde_json::from_str(fixtures::source("greedy-trap").unwrap()).unwrap();
    doc["layers"][0]["deps"] = serde_json::json!([4]);
    fs::write(&cyclic, doc.to_string()).unwrap();
    assert_eq!(run(["anytime", "validate", cyclic.to_str().unwrap()]), 1);
    assert_eq!(run(["anytime", "validate", "builtin:missing"]), 1);
    assert_eq!(run(["anytime", "validate", dir.path().join("absent.json").to_str().unwrap()]), 1);
    assert_eq!(run(["anytime", "no-such-command"]), 2);
    assert_eq!(run(["anytime", "select-exits", "builtin:gelan-t", "--k", "x"]), 2);
    assert_eq!(run(["anytime", "select-exits", "builtin:gelan-t", "--k", "99"]), 1);
    assert_eq!(run(["anytime", "greedy", "builtin:gelan-t", "--method", "time", "--mode", "hard"]), 1);
    assert_eq!(run(["anytime", "--help"]), 0);
}

#[test]
fn optimize_dominates_greedy_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for profile in ["builtin:greedy-trap", "builtin:gelan-t-transposed"] {
        let (s, best) = run_to(dir.path(), "best.json", &["select-exits", profile]);
        assert_eq!(s, 0);
        let best = parse_plan(&best).unwrap();
        for method in ["time", "perf"] {
            let (s, greedy) = run_to(dir.path(), "g.json", &["greedy", profile, "--method", method]);
            assert_eq!(s, 0);
            let greedy = parse_plan(&greedy).unwrap();
            assert!(best.q > greedy.q, "{profile} {method}: {} vs {}", best.q, greedy.q);
        }
        let (s, order) = run_to(dir.path(), "o.json", &["optimize", profile]);
        assert_eq!(s, 0);
        assert!(parse_plan(&order).unwrap().q >= best.q - 1e-9);
    }
}

#[test]
fn saved_plans_reevaluate_to_the_same_value() {
    let dir = tempfile::tempdir().unwrap();
    let (s, text) = run_to(dir.path(), "p.json", &["optimize", "builtin:gelan-m", "--mode", "hard"]);
    assert_eq!(s, 0);
    let view = parse_plan(&text).unwrap();
    let profile = fixtures::load("gelan-m").unwrap();
    let plan = view.to_plan(&profile, &Weighting::Uniform).unwrap();
    assert!((plan.q_normalized - view.q_normalized).abs() < 1e-9);
}

#[test]
fn profile_documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in fixtures::NAMES {
        let p = fixtures::load(name).unwrap();
        let text = save_profile(&p);
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, &text).unwrap();
        let back = load_profile(&path).unwrap();
        assert_eq!(save_profile(&back), text);
        assert_eq!(parse_profile(&text).unwrap().exits(), p.exits());
    }
}

#[test]
fn curve_formats() {
    let dir = tempfile::tempdir().unwrap();
    let (s, csv) = run_to(dir.path(), "c.csv", &["curve", "builtin:greedy-trap", "--format", "csv"]);
    assert_eq!(s, 0);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time_ms,quality"));
    assert_eq!(lines.next(), Some("0,0"));
    let (s, svg) = run_to(dir.path(), "c.svg", &["curve", "builtin:greedy-trap", "--format", "svg"]);
    assert_eq!(s, 0);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let (s, _) = run_to(dir.path(), "x.json", &["curve", "builtin:greedy-trap", "--order", "0,4,1,2,3"]);
    assert_eq!(s, 1, "merge before its branches must be rejected");
}

#[test]
fn simulate_reports_hits_and_delays() {
    let dir = tempfile::tempdir().unwrap();
    let (s, text) = run_to(
        dir.path(),
        "s.json",
        &["simulate", "builtin:gelan-t", "--exits", "4,5,7;15,18,21", "--trials", "2000", "--transfer", "0.5"],
    );
    assert_eq!(s, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["trials"], 2000);
    assert!(v["mean_response_delay_ms"].as_f64().unwrap() >= 0.5);
    let hits: u64 = v["per_exit_hit_counts"].as_array().unwrap().iter().map(|h| h["hits"].as_u64().unwrap()).sum();
    assert_eq!(hits + v["default_hits"].as_u64().unwrap(), 2000);
    let (s, _) = run_to(dir.path(), "bad.json", &["simulate", "builtin:gelan-t", "--exits", "4,5,7", "--trials", "10"]);
    assert_eq!(s, 1, "a plan without the final exit is rejected");
}

#[test]
fn report_bundles_every_profile() {
    let dir = tempfile::tempdir().unwrap();
    let (s, text) = run_to(dir.path(), "r.json", &["report", "builtin:greedy-trap", "builtin:gelan-t"]);
    assert_eq!(s, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["plans"].as_array().unwrap().len(), 8);
    assert_eq!(v["metrics"].as_array().unwrap().len(), 8);
    let (s, csv) = run_to(dir.path(), "r.csv", &["report", "builtin:greedy-trap", "--format", "csv"]);
    assert_eq!(s, 0);
    assert!(csv.starts_with("name,q_norm,q_se,final_quality,max_delta_ms\n"));
}
