//! The fourteen acceptance criteria at full size, one printed line each.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see the
//! ledger.

use std::time::{Duration, Instant};

use upslope::experiment::{cmd_verify, snapshot, ExperimentConfig};
use upslope::verify::{run_checks, Ledger, VerifyScale};

/// Wall-clock limit for the two entry-bound criteria together.
const ENTRY_BOUNDS_LIMIT: Duration = Duration::from_secs(60);
/// Wall-clock limit for the characteristic-series criteria.
const SERIES_LIMIT: Duration = Duration::from_secs(300);
/// Wall-clock limit for the Berkowitz oracle comparison.
const ORACLE_LIMIT: Duration = Duration::from_secs(30);

struct Line {
    number: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn timed(scale: &VerifyScale, checks: &[&str]) -> (Ledger, Duration) {
    let only: Vec<String> = checks.iter().map(|s| s.to_string()).collect();
    let start = Instant::now();
    let ledger = run_checks(scale, Some(&only)).expect("checks run");
    (ledger, start.elapsed())
}

fn from_ledger(number: usize, title: &'static str, ledger: &Ledger, check: &str, limit: Option<(Duration, Duration)>) -> Line {
    let row = ledger.row(check).expect("check ran");
    let mut passed = row.passed;
    let mut detail = format!("{} checked, {} failures", row.checked, row.failures.len());
    if let Some(e) = &row.error {
        detail.push_str(&format!(", error: {e}"));
    }
    if let Some((took, max)) = limit {
        passed &= took < max;
        detail.push_str(&format!(", {:.1} s (limit {} s)", took.as_secs_f64(), max.as_secs()));
    }
    for f in row.failures.iter().take(5) {
        detail.push_str(&format!("\n        {f}"));
    }
    Line { number, title, passed, detail }
}

fn determinism() -> Line {
    let base = tempfile::tempdir().expect("tempdir");
    let mut cfg = ExperimentConfig::default();
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        cfg.out = base.path().join(run);
        cmd_verify(&cfg, None).expect("verify runs");
        trees.push(snapshot(&cfg.out).expect("readable output"));
    }
    let passed = !trees[0].is_empty() && trees[0] == trees[1];
    Line { number: 14, title: "determinism", passed, detail: format!("{} files compared byte for byte", trees[0].len()) }
}

#[test]
fn acceptance() {
    let scale = VerifyScale::acceptance();
    let mut lines = Vec::new();

    let (entry, took) = timed(&scale, &["entry-bounds-up", "entry-bounds-m1"]);
    lines.push(from_ledger(1, "entry bounds, upper-triangular monoid", &entry, "entry-bounds-up", Some((took, ENTRY_BOUNDS_LIMIT))));
    lines.push(from_ledger(2, "entry bounds, congruence monoid", &entry, "entry-bounds-m1", None));

    let series_checks = ["char-series-bound", "truncation-stability", "ratio-rigidity", "lower-bound-sandwich", "rescaled-basis"];
    let (series, took) = timed(&scale, &series_checks);
    lines.push(from_ledger(3, "characteristic series bound", &series, "char-series-bound", Some((took, SERIES_LIMIT))));

    let (exact, _) = timed(&scale, &["lambda-closed-form", "vertical-gap", "mahler-roundtrip", "non-compactness", "checker-self-tests"]);
    lines.push(from_ledger(4, "λ closed form", &exact, "lambda-closed-form", None));
    lines.push(from_ledger(5, "vertical gap", &exact, "vertical-gap", None));

    let (oracle, took) = timed(&scale, &["berkowitz-oracle"]);
    lines.push(from_ledger(6, "Berkowitz against cofactor expansion", &oracle, "berkowitz-oracle", Some((took, ORACLE_LIMIT))));

    lines.push(from_ledger(7, "Mahler round trip", &exact, "mahler-roundtrip", None));
    lines.push(from_ledger(8, "truncation stability", &series, "truncation-stability", None));
    lines.push(from_ledger(9, "ratio rigidity", &series, "ratio-rigidity", None));
    lines.push(from_ledger(10, "lower-bound sandwich", &series, "lower-bound-sandwich", None));
    lines.push(from_ledger(11, "rescaled basis column orders", &series, "rescaled-basis", None));
    lines.push(from_ledger(12, "non-compactness regression", &exact, "non-compactness", None));
    lines.push(from_ledger(13, "checker self-tests", &exact, "checker-self-tests", None));
    lines.push(determinism());

    for l in &lines {
        println!("[{}] {:>2}. {:<40} {}", if l.passed { "PASS" } else { "FAIL" }, l.number, l.title, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.number).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
