//! Named checks with adjustable scale, shared by `upslope verify` and the
//! acceptance tests.
//!
//! Every check builds its inputs from a seed derived from the check's name,
//! so running a subset with `--only` gives the same results as the full run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::{
    berkowitz_charpoly, char_series_run, lambda_closed_form, lambda_seq, truncation_size, verify_char_bound,
    CharSeriesRun,
};
use crate::iwasawa::{CharOfDelta, LambdaElt};
use crate::mahler::{evaluate, mahler_from_samples, SampleVector};
use crate::matrix::Matrix;
use crate::monoid::{summed_action_matrix, verify_entry_bounds, ActionPrecision, DeltaMat};
use crate::oracle::cofactor_charpoly;
use crate::padic::{phi_q, PAdicNum, ResidueRing};
use crate::polygon::{
    certified_prefix_polygon, expected_vertical_gap, lower_bound_polygon, parse_rational, ratio_rigidity_below_upper,
    sandwich_check, series_points, vertical_gap_scan, CheckResult, NewtonPolygon,
};
use crate::slope_checks::{
    atkin_lehner_check, atkin_lehner_partner, degree_formula_check, predicted_degrees, progression_check,
    twisted_progressions, ROrdTable,
};
use crate::up_operator::{random_m1_delta, random_up_delta, rescale_halo_basis, synth_up, UpSpec};
use crate::{Error, Result, Q};

/// Every check, in ledger order.
pub const CHECKS: &[&str] = &[
    "entry-bounds-up",
    "entry-bounds-m1",
    "char-series-bound",
    "lambda-closed-form",
    "vertical-gap",
    "berkowitz-oracle",
    "mahler-roundtrip",
    "truncation-stability",
    "ratio-rigidity",
    "lower-bound-sandwich",
    "rescaled-basis",
    "non-compactness",
    "checker-self-tests",
];

const SERIES_CHECKS: &[&str] =
    &["char-series-bound", "truncation-stability", "ratio-rigidity", "lower-bound-sandwich", "rescaled-basis"];

/// Sizes and seeds for the checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyScale {
    /// Random monoid matrices per prime for the entry bounds.
    pub matrices_per_prime: usize,
    /// Entries `(m, n)` with `m, n < entry_size` are checked.
    pub entry_size: usize,
    /// `(p, t)` pairs of the synthetic operators.
    pub series_pairs: Vec<(u32, usize)>,
    pub series_seeds: Vec<u64>,
    /// Certification order of the characteristic series.
    pub order: u32,
    /// Highest coefficient computed, capped by the truncation size.
    pub degree: usize,
    /// Valuations of `T` at which polygons are compared, as rationals.
    pub v_t: Vec<String>,
    pub oracle_cases: usize,
    pub oracle_max_dim: usize,
    pub mahler_cases: usize,
    pub seed: u64,
    /// Forces the named check to fail.
    pub perturb: Option<String>,
}

impl Default for VerifyScale {
    fn default() -> Self {
        VerifyScale {
            matrices_per_prime: 20,
            entry_size: 20,
            series_pairs: vec![(3, 1), (3, 2), (5, 1), (5, 2)],
            series_seeds: vec![1],
            order: 8,
            degree: 12,
            v_t: vec!["1/3".into(), "1/4".into()],
            oracle_cases: 20,
            oracle_max_dim: 5,
            mahler_cases: 100,
            seed: 0,
            perturb: None,
        }
    }
}

impl VerifyScale {
    /// The sizes of the full acceptance run.
    pub fn acceptance() -> Self {
        VerifyScale {
            matrices_per_prime: 200,
            entry_size: 40,
            series_seeds: vec![1, 2],
            order: 16,
            oracle_cases: 100,
            mahler_cases: 500,
            ..Self::default()
        }
    }

    fn v_t_values(&self) -> Result<Vec<Q>> {
        let zero = Q::from_integer(0.into());
        let one = Q::from_integer(1.into());
        self.v_t
            .iter()
            .map(|s| {
                let v = parse_rational(s)?;
                if v <= zero || v >= one {
                    return Err(Error::BadArgument(format!("v(T) = {v} must lie strictly between 0 and 1")));
                }
                Ok(v)
            })
            .collect()
    }

    fn rng(&self, name: &str) -> ChaCha8Rng {
        let salt = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }
}

/// One row of the verification ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub check: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
    /// Set when the check could not run to completion.
    pub error: Option<String>,
    pub precision_exhausted: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub rows: Vec<LedgerRow>,
}

impl Ledger {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn precision_exhausted(&self) -> bool {
        self.rows.iter().any(|r| r.precision_exhausted)
    }

    pub fn row(&self, check: &str) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    /// `check,status,checked,failures`, one line per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "status", "checked", "failures"]).expect("in-memory write");
        for r in &self.rows {
            let status = if r.passed { "pass" } else { "fail" };
            w.write_record([r.check.as_str(), status, &r.checked.to_string(), &r.failures.len().to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii")
    }

    /// Human-readable ledger with every failure message.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<22} {} checked", r.check, r.checked);
            if let Some(e) = &r.error {
                let _ = writeln!(out, "      error: {e}");
            }
            for f in &r.failures {
                let _ = writeln!(out, "      {f}");
            }
        }
        out
    }
}

/// Synthetic operator and its characteristic series, shared by several checks.
pub struct SeriesCase {
    pub p: u32,
    pub t: usize,
    pub seed: u64,
    pub spec: UpSpec,
    pub run: std::result::Result<CharSeriesRun, Error>,
}

impl SeriesCase {
    fn label(&self) -> String {
        format!("p = {}, t = {}, seed = {}", self.p, self.t, self.seed)
    }
}

/// Builds and runs every synthetic case of `scale`.
pub fn series_cases(scale: &VerifyScale) -> Result<Vec<SeriesCase>> {
    let jobs: Vec<(u32, usize, u64)> = scale
        .series_pairs
        .iter()
        .flat_map(|&(p, t)| scale.series_seeds.iter().map(move |&s| (p, t, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(p, t, seed)| {
            let depth = scale.order.max(16);
            let spec = synth_up(t, p, depth, depth as usize, seed)?;
            let d = scale.degree.min(truncation_size(scale.order, p, t));
            let run = char_series_run(&spec, d, scale.order, CharOfDelta::new(1));
            Ok(SeriesCase { p, t, seed, spec, run })
        })
        .collect()
}

/// Runs the selected checks (all when `only` is `None`).
pub fn run_checks(scale: &VerifyScale, only: Option<&[String]>) -> Result<Ledger> {
    let selected: Vec<&str> = match only {
        None => CHECKS.to_vec(),
        Some(names) => {
            for n in names {
                if !CHECKS.contains(&n.as_str()) {
                    return Err(Error::BadArgument(format!("unknown check {n:?}")));
                }
            }
            CHECKS.iter().copied().filter(|c| names.iter().any(|n| n == c)).collect()
        }
    };
    if let Some(p) = &scale.perturb {
        if !CHECKS.contains(&p.as_str()) {
            return Err(Error::BadArgument(format!("unknown check {p:?} to perturb")));
        }
    }
    let v_t = scale.v_t_values()?;
    let cases = if selected.iter().any(|c| SERIES_CHECKS.contains(c)) { series_cases(scale)? } else { Vec::new() };

    let mut ledger = Ledger::default();
    for name in selected {
        let outcome = run_one(name, scale, &cases, &v_t);
        let mut row = match outcome {
            Ok(res) => LedgerRow {
                check: name.into(),
                passed: res.passed,
                checked: res.checked,
                failures: res.failures,
                error: None,
                precision_exhausted: false,
            },
            Err(e) => LedgerRow {
                check: name.into(),
                passed: false,
                checked: 0,
                failures: Vec::new(),
                precision_exhausted: e.is_precision(),
                error: Some(e.to_string()),
            },
        };
        if scale.perturb.as_deref() == Some(name) {
            row.passed = false;
            row.failures.push("perturbation injected".into());
        }
        ledger.rows.push(row);
    }
    Ok(ledger)
}

fn run_one(name: &str, scale: &VerifyScale, cases: &[SeriesCase], v_t: &[Q]) -> Result<CheckResult> {
    match name {
        "entry-bounds-up" => entry_bounds(scale, name, false),
        "entry-bounds-m1" => entry_bounds(scale, name, true),
        "char-series-bound" => char_series_bound(cases),
        "lambda-closed-form" => Ok(lambda_closed_form_check()),
        "vertical-gap" => Ok(vertical_gap_check()),
        "berkowitz-oracle" => berkowitz_oracle(scale, name),
        "mahler-roundtrip" => mahler_roundtrip(scale, name),
        "truncation-stability" => truncation_stability(cases),
        "ratio-rigidity" => ratio_rigidity_check(cases, v_t),
        "lower-bound-sandwich" => sandwich(cases, v_t),
        "rescaled-basis" => rescaled_basis(cases),
        "non-compactness" => non_compactness(),
        "checker-self-tests" => checker_self_tests(),
        _ => Err(Error::BadArgument(format!("unknown check {name:?}"))),
    }
}

fn entry_bounds(scale: &VerifyScale, name: &str, m1: bool) -> Result<CheckResult> {
    let mut rng = scale.rng(name);
    let mut jobs = Vec::new();
    for p in [2u32, 3, 5] {
        for _ in 0..scale.matrices_per_prime {
            let prec = scale.entry_size.max(1) as u32;
            let delta = if m1 { random_m1_delta(&mut rng, p, prec)? } else { random_up_delta(&mut rng, p, prec, false)? };
            let omega = CharOfDelta::new(rng.gen_range(0..phi_q(p)));
            jobs.push((delta, omega));
        }
    }
    let reports: Vec<_> = jobs
        .par_iter()
        .map(|(delta, omega)| verify_entry_bounds(delta, scale.entry_size, *omega).map(|r| (delta, r)))
        .collect::<Result<_>>()?;
    let mut res = CheckResult::new(name);
    for (delta, report) in reports {
        res.checked += report.checked.saturating_sub(report.violations.len());
        for v in &report.violations {
            res.expect(false, || format!("{delta}: entry ({}, {}) has order {} below {}", v.m, v.n, v.observed, v.bound));
        }
    }
    Ok(res)
}

fn with_run(case: &SeriesCase) -> Result<&CharSeriesRun> {
    case.run.as_ref().map_err(|e| match e {
        Error::StabilityFailure { index, small, large } => {
            Error::StabilityFailure { index: *index, small: *small, large: *large }
        }
        other => Error::Internal(format!("{}: {other}", case.label())),
    })
}

fn char_series_bound(cases: &[SeriesCase]) -> Result<CheckResult> {
    let mut res = CheckResult::new("char-series-bound");
    for case in cases {
        let cs = &with_run(case)?.series;
        let report = verify_char_bound(cs, &lambda_seq(case.p, case.t, cs.degree()))?;
        for row in &report.rows {
            res.expect(row.ok, || {
                format!("{}: c_{} has order {} below min(λ, r) = {}", case.label(), row.n, row.observed, row.lambda.min(cs.r as i64))
            });
        }
    }
    Ok(res)
}

fn lambda_closed_form_check() -> CheckResult {
    let mut res = CheckResult::new("lambda-closed-form");
    for (p, t) in [(3, 1), (3, 2), (5, 1), (5, 2), (2, 1)] {
        for (k, lhs, rhs) in lambda_closed_form(p, t, 10) {
            res.expect(lhs == rhs, || format!("p = {p}, t = {t}, k = {k}: {lhs} vs {rhs}"));
        }
    }
    res
}

fn vertical_gap_check() -> CheckResult {
    let mut res = CheckResult::new("vertical-gap");
    for (p, t) in [(3, 1), (3, 2), (5, 1), (5, 2), (2, 1)] {
        for v in [Q::new(1.into(), 4.into()), Q::new(1.into(), 3.into()), Q::new(1.into(), 2.into())] {
            let got = vertical_gap_scan(p, t, &v, 6);
            let want = expected_vertical_gap(p, t, &v);
            res.expect(got == want, || format!("p = {p}, t = {t}, v(T) = {v}: gap {got}, expected {want}"));
        }
    }
    res
}

fn berkowitz_oracle(scale: &VerifyScale, name: &str) -> Result<CheckResult> {
    let mut rng = scale.rng(name);
    let ring = ResidueRing::new(5, 4)?;
    let mut res = CheckResult::new(name);
    for case in 0..scale.oracle_cases {
        let n = rng.gen_range(1..=scale.oracle_max_dim.max(1));
        let rows: Vec<Vec<LambdaElt>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| LambdaElt::from_residues(ring, (0..5).map(|_| rng.gen_range(0..ring.modulus())).collect()))
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(rows);
        let fast = berkowitz_charpoly(&m)?;
        let slow = cofactor_charpoly(&m);
        res.expect(fast == slow, || format!("case {case}: {n}×{n} matrix disagrees with the cofactor expansion"));
    }
    Ok(res)
}

fn mahler_roundtrip(scale: &VerifyScale, name: &str) -> Result<CheckResult> {
    let mut rng = scale.rng(name);
    let mut res = CheckResult::new(name);
    for case in 0..scale.mahler_cases {
        let p = [2u32, 3, 5, 7][rng.gen_range(0..4)];
        let prec = rng.gen_range(1..=20);
        let ring = ResidueRing::new(p, prec)?;
        let len = rng.gen_range(1..=32usize);
        let values: Vec<u128> = (0..len).map(|_| rng.gen_range(0..ring.modulus())).collect();
        let samples = SampleVector::from_fn(len, |z| PAdicNum::in_ring(ring, values[z as usize]));
        let f = mahler_from_samples(&samples, len)?;
        let ok = (0..len).all(|z| evaluate(&f, z as u64).as_ref() == Some(&samples.values[z]));
        res.expect(ok, || format!("case {case}: p = {p}, N = {prec}, {len} samples"));
    }
    Ok(res)
}

fn truncation_stability(cases: &[SeriesCase]) -> Result<CheckResult> {
    let mut res = CheckResult::new("truncation-stability");
    for case in cases {
        match &case.run {
            Ok(run) => {
                for _ in &run.series.coeffs {
                    res.expect(true, String::new);
                }
            }
            Err(Error::StabilityFailure { index, small, large }) => res.expect(false, || {
                format!("{}: c_{index} differs between sizes {small} and {large}", case.label())
            }),
            Err(e) => return Err(Error::Internal(format!("{}: {e}", case.label()))),
        }
    }
    Ok(res)
}

fn polygons(case: &SeriesCase, v_t: &[Q]) -> Result<Vec<NewtonPolygon>> {
    let cs = &with_run(case)?.series;
    v_t.iter().map(|v| Ok(certified_prefix_polygon(&series_points(cs, v)?)?.0)).collect()
}

fn ratio_rigidity_check(cases: &[SeriesCase], v_t: &[Q]) -> Result<CheckResult> {
    let mut res = CheckResult::new("ratio-rigidity");
    for case in cases {
        let polys = polygons(case, v_t)?;
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let r = ratio_rigidity_below_upper(case.p, case.t, &polys[i], &v_t[i], &polys[j], &v_t[j]);
                res.checked += r.checked - r.failures.len();
                for f in r.failures {
                    res.expect(false, || format!("{}: {f}", case.label()));
                }
            }
        }
    }
    Ok(res)
}

fn sandwich(cases: &[SeriesCase], v_t: &[Q]) -> Result<CheckResult> {
    let mut res = CheckResult::new("lower-bound-sandwich");
    for case in cases {
        let polys = polygons(case, v_t)?;
        for (np, v) in polys.iter().zip(v_t) {
            let lower = lower_bound_polygon(case.p, case.t, v, np.x_range().1.max(0) as usize);
            let r = sandwich_check(np, &lower);
            res.checked += r.checked - r.failures.len();
            for f in r.failures {
                res.expect(false, || format!("{}, v(T) = {v}: {f}", case.label()));
            }
        }
    }
    Ok(res)
}

fn rescaled_basis(cases: &[SeriesCase]) -> Result<CheckResult> {
    let mut res = CheckResult::new("rescaled-basis");
    for case in cases {
        let block = &with_run(case)?.block;
        match rescale_halo_basis(block) {
            Ok(rm) => res.checked += rm.size * rm.size,
            Err(Error::InvariantViolation(msg)) => res.expect(false, || format!("{}: {msg}", case.label())),
            Err(e) => return Err(e),
        }
    }
    Ok(res)
}

/// `f ↦ Σ_{i<p} f(pz + i)` has a coefficient of valuation below 2 at column
/// `p²`, row `p`.
fn non_compactness() -> Result<CheckResult> {
    let mut res = CheckResult::new("non-compactness");
    for p in [3u32, 5] {
        let deltas: Vec<DeltaMat> =
            (0..p as i128).map(|i| DeltaMat::new(p, 20, [p as i128, i, 0, 1])).collect::<Result<_>>()?;
        let col = (p * p) as usize;
        let m = summed_action_matrix(&deltas, CharOfDelta::trivial(), col + 1, ActionPrecision::new(4, 1))?;
        let entry = m.get(p as usize, col).coeff(0);
        let p2 = (p * p) as u128;
        res.expect(entry.residue() % p2 != 0, || format!("p = {p}: coefficient {entry} is divisible by p²"));
    }
    Ok(res)
}

fn checker_self_tests() -> Result<CheckResult> {
    let mut res = CheckResult::new("checker-self-tests");
    let q = |a: i64, b: i64| Q::new(a.into(), b.into());

    let slopes: Vec<Q> = (0..9).map(|i| q(i, 3)).collect();
    let partner = atkin_lehner_partner(&slopes, 2);
    res.expect(atkin_lehner_check(&slopes, &partner, 2, 3, 2, 1)?.passed, || "pairing rejects a paired list".into());
    let mut bad = slopes.clone();
    bad[4] += q(1, 7);
    res.expect(!atkin_lehner_check(&bad, &partner, 2, 3, 2, 1)?.passed, || "pairing accepts a perturbed list".into());

    let base = vec![q(0, 1), q(1, 9), q(1, 3)];
    let alpha = twisted_progressions(&base, 2, 3, 1, 12)?;
    res.expect(progression_check(&alpha, 2, 3, 1)?.passed, || "progressions reject constructed sequences".into());
    let mut bad = alpha.clone();
    if let Some(seq) = bad.get_mut(&0) {
        seq[5] += q(1, 100);
    }
    res.expect(!progression_check(&bad, 2, 3, 1)?.passed, || "progressions accept a perturbed sequence".into());

    let table = ROrdTable::new(5, BTreeMap::from([(0, 1), (1, 0), (2, 2), (3, 1)]));
    for e in 0..4 {
        let pred = predicted_degrees(&table, e, 5, 2, 6)?;
        res.expect(degree_formula_check(&pred, &table, e, 5, 2, 6)?.passed, || {
            format!("degree formula rejects its own prediction for ω₀^{e}")
        });
        let mut bad = pred.clone();
        if let Some(d) = bad.values_mut().nth(3) {
            *d += 1;
        }
        res.expect(!degree_formula_check(&bad, &table, e, 5, 2, 6)?.passed, || {
            format!("degree formula accepts a perturbed degree for ω₀^{e}")
        });
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> VerifyScale {
        VerifyScale {
            matrices_per_prime: 2,
            entry_size: 8,
            series_pairs: vec![(3, 1)],
            order: 5,
            degree: 6,
            oracle_cases: 4,
            mahler_cases: 10,
            ..VerifyScale::default()
        }
    }

    #[test]
    fn small_run_passes() {
        let ledger = run_checks(&tiny(), None).unwrap();
        assert_eq!(ledger.rows.len(), CHECKS.len());
        assert!(ledger.passed(), "{}", ledger.to_text());
        assert!(ledger.rows.iter().all(|r| r.checked > 0), "{}", ledger.to_text());
    }

    #[test]
    fn only_and_perturb() {
        let only = vec!["vertical-gap".to_string(), "lambda-closed-form".to_string()];
        let mut scale = tiny();
        scale.perturb = Some("vertical-gap".into());
        let ledger = run_checks(&scale, Some(&only)).unwrap();
        let names: Vec<&str> = ledger.rows.iter().map(|r| r.check.as_str()).collect();
        assert_eq!(names, vec!["lambda-closed-form", "vertical-gap"]);
        assert!(ledger.row("lambda-closed-form").unwrap().passed);
        assert!(!ledger.row("vertical-gap").unwrap().passed);

        assert!(run_checks(&scale, Some(&["nope".to_string()])).is_err());
        scale.perturb = Some("nope".into());
        assert!(run_checks(&scale, None).is_err());
    }

    #[test]
    fn subsets_agree_with_the_full_run() {
        let full = run_checks(&tiny(), None).unwrap();
        let only = vec!["mahler-roundtrip".to_string()];
        let part = run_checks(&tiny(), Some(&only)).unwrap();
        assert_eq!(part.rows[0], *full.row("mahler-roundtrip").unwrap());
    }

    #[test]
    fn bad_radius_is_rejected() {
        let scale = VerifyScale { v_t: vec!["1".into()], ..tiny() };
        assert!(matches!(run_checks(&scale, None), Err(Error::BadArgument(_))));
    }
}
