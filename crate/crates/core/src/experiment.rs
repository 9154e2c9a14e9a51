//! Config-driven runs behind the `upslope` binary.
//!
//! A run reads one TOML file, builds or loads an operator, and writes plain
//! JSON and CSV files into the output directory. Nothing written depends on
//! the clock or on thread scheduling.
//!
//! ```toml
//! p = 3
//! t = 1
//! N = "16"           # integers may also be written as decimal strings
//! M_T = 16
//! r = 8
//! D = 8
//! omega_exponent = 1
//! v_t = ["1/3", "1/4"]
//! out = "out"
//! checks = ["lower-bound-sandwich", "ratio-rigidity"]
//!
//! [source]
//! seed = 42          # or: file = "operator.json"
//!
//! [verify]
//! matrices_per_prime = 20
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::charpoly::{
    assembly_blocks, assembly_precision, char_series_run, lambda_seq, series_to_csv, verify_char_bound, CharSeries,
};
use crate::iwasawa::CharOfDelta;
use crate::monoid::{verify_entry_bounds, MonoidClass};
use crate::padic::{q_of, ResidueRing, Valuation};
use crate::polygon::{
    certified_prefix_polygon, expected_vertical_gap, lower_bound_polygon, parse_rational, sandwich_check, series_points,
    slope_report, upper_bound_polygon, vertical_gap_scan, CheckResult, NewtonPolygon,
};
use crate::up_operator::{assemble_at, load_up, rescale_halo_basis, synth_up, verify_block_bounds, UpSpec};
use crate::verify::{run_checks, VerifyScale, CHECKS};
use crate::{Error, Result, Q};

/// Where the operator comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Seed(u64),
    File(PathBuf),
}

/// A validated experiment configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub p: u32,
    pub q: u32,
    pub t: usize,
    /// p-adic precision of the operator's entries.
    pub n: u32,
    /// `T`-adic truncation of the operator's entries.
    pub m_t: usize,
    /// Certification order of the characteristic series.
    pub r: u32,
    /// Degree of the characteristic series.
    pub d: usize,
    pub omega_exponent: u32,
    pub v_t: Vec<Q>,
    pub source: Source,
    pub out: PathBuf,
    /// `None` runs every check that applies.
    pub checks: Option<Vec<String>>,
    pub verify: VerifyScale,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(u64),
    Text(String),
}

impl Num {
    fn get(&self, key: &str) -> Result<u64> {
        match self {
            Num::Int(v) => Ok(*v),
            Num::Text(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{key} = {s:?} is not an integer"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    seed: Option<Num>,
    file: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Num,
    q: Option<Num>,
    t: Num,
    #[serde(rename = "N")]
    n: Option<Num>,
    #[serde(rename = "M_T")]
    m_t: Option<Num>,
    r: Option<Num>,
    #[serde(rename = "D")]
    d: Option<Num>,
    omega_exponent: Option<Num>,
    v_t: Option<Vec<String>>,
    source: Option<RawSource>,
    out: Option<String>,
    checks: Option<Vec<String>>,
    verify: Option<VerifyScale>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: 3,
            q: 3,
            t: 1,
            n: 16,
            m_t: 16,
            r: 8,
            d: 8,
            omega_exponent: 1,
            v_t: vec![Q::new(1.into(), 3.into()), Q::new(1.into(), 4.into())],
            source: Source::Seed(42),
            out: PathBuf::from("out"),
            checks: None,
            verify: VerifyScale::default(),
        }
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl ExperimentConfig {
    /// Parses a config; relative file paths are resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let d = ExperimentConfig::default();
        let int = |v: &Option<Num>, key: &str, default: u64| v.as_ref().map_or(Ok(default), |n| n.get(key));
        let small = |v: u64, key: &str| u32::try_from(v).map_err(|_| Error::BadArgument(format!("{key} = {v} is too large")));
        let p = small(raw.p.get("p")?, "p")?;
        let t = raw.t.get("t")? as usize;
        let resolve = |s: &str| match base {
            Some(b) if Path::new(s).is_relative() => b.join(s),
            _ => PathBuf::from(s),
        };
        let source = match raw.source {
            None => d.source.clone(),
            Some(RawSource { seed: Some(s), file: None }) => Source::Seed(s.get("seed")?),
            Some(RawSource { seed: None, file: Some(f) }) => Source::File(resolve(&f)),
            Some(_) => return Err(Error::Parse("[source] needs exactly one of seed or file".into())),
        };
        let cfg = ExperimentConfig {
            p,
            q: match &raw.q {
                Some(q) => small(q.get("q")?, "q")?,
                None => q_of(p),
            },
            t,
            n: small(int(&raw.n, "N", d.n as u64)?, "N")?,
            m_t: int(&raw.m_t, "M_T", d.m_t as u64)? as usize,
            r: small(int(&raw.r, "r", d.r as u64)?, "r")?,
            d: int(&raw.d, "D", d.d as u64)? as usize,
            omega_exponent: small(int(&raw.omega_exponent, "omega_exponent", d.omega_exponent as u64)?, "omega_exponent")?,
            v_t: match raw.v_t {
                Some(list) => list.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
                None => d.v_t.clone(),
            },
            source,
            out: raw.out.map_or(d.out.clone(), |o| resolve(&o)),
            checks: raw.checks,
            verify: raw.verify.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::BadArgument(format!("p = {} is not prime", self.p)));
        }
        if self.q != q_of(self.p) {
            return Err(Error::BadArgument(format!("q = {} does not match p = {} (expected {})", self.q, self.p, q_of(self.p))));
        }
        if self.t == 0 || self.r == 0 || self.m_t == 0 {
            return Err(Error::BadArgument("t, r and M_T must be positive".into()));
        }
        ResidueRing::new(self.p, self.n)?;
        let (zero, one) = (Q::from_integer(0.into()), Q::from_integer(1.into()));
        if let Some(v) = self.v_t.iter().find(|v| **v <= zero || **v >= one) {
            return Err(Error::BadArgument(format!("v(T) = {v} must lie strictly between 0 and 1")));
        }
        if let Some(checks) = &self.checks {
            if let Some(c) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
                return Err(Error::BadArgument(format!("unknown check {c:?}")));
            }
        }
        Ok(())
    }

    /// The operator named by `source`, checked against `p` and `t`.
    pub fn load_spec(&self) -> Result<UpSpec> {
        let spec = match &self.source {
            Source::Seed(seed) => synth_up(self.t, self.p, self.n, self.m_t, *seed)?,
            Source::File(path) => load_up(path)?,
        };
        if spec.p != self.p || spec.t != self.t {
            return Err(Error::MismatchedParameters(format!(
                "operator has p = {}, t = {} but the config says p = {}, t = {}",
                spec.p, spec.t, self.p, self.t
            )));
        }
        Ok(spec)
    }

    fn wants(&self, check: &str) -> bool {
        self.checks.as_ref().is_none_or(|c| c.iter().any(|x| x == check))
    }

    fn omega(&self) -> CharOfDelta {
        CharOfDelta::new(self.omega_exponent)
    }
}

/// Result of a command: pass flag, files written, and a printable summary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub passed: bool,
    pub precision_exhausted: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }
}

/// 0 pass, 1 check failure, 2 input error, 3 precision exhaustion.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.precision_exhausted => 3,
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(e) if e.is_precision() => 3,
        Err(Error::InvariantViolation(_)) | Err(Error::Internal(_)) => 1,
        Err(_) => 2,
    }
}

/// One row of `bounds.csv`: a single coset matrix against its entry bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellBoundRow {
    pub row_component: usize,
    pub col_component: usize,
    pub index: usize,
    pub class: String,
    pub size: usize,
    pub checked: usize,
    pub violations: usize,
    pub min_margin: i64,
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).expect("in-memory csv");
    }
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

/// Parses rows written by any of the CSV outputs.
pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Assembles the operator at the depth the characteristic series needs and
/// checks its entry bounds; with `rescale` also writes the rescaled basis.
pub fn cmd_matrix(cfg: &ExperimentConfig, rescale: bool) -> Result<Outcome> {
    let spec = cfg.load_spec()?;
    let n_blocks = assembly_blocks(cfg.r, cfg.p, cfg.t);
    let bm = assemble_at(&spec, n_blocks, cfg.omega(), assembly_precision(cfg.r, cfg.p, cfg.t))?;
    let mut out = Outcome::default();
    out.write(&cfg.out, "matrix.json", &bm.to_json())?;

    let mut rows = Vec::new();
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for cell in &spec.cells {
        let index = seen.entry((cell.i, cell.j)).or_insert(0);
        let report = verify_entry_bounds(&cell.delta, n_blocks, cfg.omega())?;
        rows.push(CellBoundRow {
            row_component: cell.i,
            col_component: cell.j,
            index: *index,
            class: match report.class {
                MonoidClass::UpMonoid => "up",
                MonoidClass::M1 => "m1",
                MonoidClass::Neither => "neither",
            }
            .into(),
            size: report.size,
            checked: report.checked,
            violations: report.violations.len(),
            min_margin: report.min_margin,
        });
        *index += 1;
    }
    let block = verify_block_bounds(&bm)?;
    let cell_violations: usize = rows.iter().map(|r| r.violations).sum();
    out.write(
        &cfg.out,
        "bounds.csv",
        &to_csv(&rows, &["row_component", "col_component", "index", "class", "size", "checked", "violations", "min_margin"]),
    )?;
    out.write(&cfg.out, "block_bounds.json", &serde_json::to_string_pretty(&block).expect("serialisable"))?;
    out.line(format!("assembled {} x {} operator ({} blocks of {})", bm.size(), bm.size(), n_blocks, cfg.t));
    out.line(format!("coset matrices: {} checked, {cell_violations} bound violations", rows.len()));
    out.line(format!("assembled entries: {} checked, {} violations, min margin {}", block.checked, block.violations.len(), block.min_margin));
    out.passed = cell_violations == 0 && block.passed();

    if rescale {
        let rm = rescale_halo_basis(&bm)?;
        out.write(&cfg.out, "rescaled.json", &rm.to_json())?;
        out.line(format!("rescaled basis certified, min column margin {}", rm.min_margin));
    }
    Ok(out)
}

fn series(cfg: &ExperimentConfig) -> Result<(CharSeries, (usize, usize))> {
    let spec = cfg.load_spec()?;
    let run = char_series_run(&spec, cfg.d, cfg.r, cfg.omega())?;
    Ok((run.series, run.sizes))
}

/// Writes `series.json`, `coeffs.csv` and the coefficient-bound report.
pub fn cmd_charpoly(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (cs, (small, large)) = series(cfg)?;
    let report = verify_char_bound(&cs, &lambda_seq(cfg.p, cfg.t, cs.degree()))?;
    let mut out = Outcome::default();
    out.write(&cfg.out, "series.json", &cs.to_json())?;
    out.write(&cfg.out, "coeffs.csv", &series_to_csv(&cs))?;
    let csv = if report.rows.is_empty() { "n,lambda,observed,margin,capped,ok\n".to_string() } else { report.to_csv() };
    out.write(&cfg.out, "bound.csv", &csv)?;
    out.line(format!("c_0..c_{} modulo (p, T)^{}, stable between sizes {small} and {large}", cs.degree(), cs.r));
    for row in &report.rows {
        let cap = if row.capped { " (checked up to r)" } else { "" };
        out.line(format!("  c_{:<3} λ = {:<4} order {}{cap}", row.n, row.lambda, row.observed));
    }
    out.passed = report.passed();
    out.line(if out.passed { "bound holds" } else { "bound VIOLATED" });
    Ok(out)
}

fn label(v: &Q) -> String {
    format!("vt_{}_{}", v.numer(), v.denom())
}

#[derive(Serialize)]
struct VertexRow {
    x: i64,
    y: String,
}

#[derive(Serialize)]
struct OverlayRow {
    x: i64,
    point: String,
    point_exact: bool,
    polygon: String,
    lower: String,
    upper: String,
}

#[derive(Serialize)]
struct GapRow {
    v_t: String,
    computed: String,
    expected: String,
    equal: bool,
}

#[derive(Serialize)]
struct RigidityRow {
    v_t_a: String,
    v_t_b: String,
    x: i64,
    ratio_a: String,
    ratio_b: String,
    below_upper: bool,
    equal: bool,
}

fn opt(v: Option<Q>) -> String {
    v.map_or(String::new(), |q| q.to_string())
}

/// Polygons, slope reports and overlays per `v(T)`, plus the configured
/// polygon checks.
pub fn cmd_polygon(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (cs, _) = series(cfg)?;
    let mut out = Outcome { passed: true, ..Outcome::default() };
    let mut polys: Vec<(Q, NewtonPolygon)> = Vec::new();
    let mut checks: Vec<CheckResult> = Vec::new();
    for v in &cfg.v_t {
        let points = series_points(&cs, v)?;
        let (np, used) = certified_prefix_polygon(&points)?;
        let tag = label(v);
        let n_max = cs.degree();
        let k_max = n_max / (cfg.q as usize * cfg.t) + 1;
        let lower = lower_bound_polygon(cfg.p, cfg.t, v, n_max);
        let upper = upper_bound_polygon(cfg.p, cfg.t, v, k_max);

        let vertices: Vec<VertexRow> = np.vertices.iter().map(|(x, y)| VertexRow { x: *x, y: y.to_string() }).collect();
        out.write(&cfg.out, &format!("polygon_{tag}.csv"), &to_csv(&vertices, &["x", "y"]))?;
        out.write(&cfg.out, &format!("slopes_{tag}.csv"), &slope_report(&np, v, cfg.p).to_csv())?;
        let overlay: Vec<OverlayRow> = points
            .iter()
            .map(|pt| {
                let (value, exact) = match &pt.y {
                    Valuation::Exact(y) => (y.to_string(), true),
                    Valuation::AtLeast(y) => (y.to_string(), false),
                };
                OverlayRow {
                    x: pt.x,
                    point: value,
                    point_exact: exact,
                    polygon: opt(np.value_at(pt.x)),
                    lower: opt(lower.value_at(pt.x)),
                    upper: opt(upper.value_at(pt.x)),
                }
            })
            .collect();
        out.write(&cfg.out, &format!("overlay_{tag}.csv"), &to_csv(&overlay, &["x", "point", "point_exact", "polygon", "lower", "upper"]))?;
        out.line(format!("v(T) = {v}: certified through n = {}, {} vertices", used - 1, np.vertices.len()));

        if cfg.wants("lower-bound-sandwich") {
            let mut res = sandwich_check(&np, &lower);
            res.name = format!("lower-bound-sandwich at v(T) = {v}");
            checks.push(res);
        }
        polys.push((v.clone(), np));
    }

    if cfg.wants("vertical-gap") {
        let mut rows = Vec::new();
        let mut res = CheckResult { name: "vertical-gap".into(), passed: true, checked: 0, failures: Vec::new() };
        for v in &cfg.v_t {
            let computed = vertical_gap_scan(cfg.p, cfg.t, v, 6);
            let expected = expected_vertical_gap(cfg.p, cfg.t, v);
            let equal = computed == expected;
            res.checked += 1;
            if !equal {
                res.passed = false;
                res.failures.push(format!("v(T) = {v}: {computed} vs {expected}"));
            }
            rows.push(GapRow { v_t: v.to_string(), computed: computed.to_string(), expected: expected.to_string(), equal });
        }
        out.write(&cfg.out, "gap.csv", &to_csv(&rows, &["v_t", "computed", "expected", "equal"]))?;
        checks.push(res);
    }

    if cfg.wants("ratio-rigidity") && polys.len() >= 2 {
        let mut rows = Vec::new();
        let mut res = CheckResult { name: "ratio-rigidity".into(), passed: true, checked: 0, failures: Vec::new() };
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let ((va, a), (vb, b)) = (&polys[i], &polys[j]);
                let span = a.x_range().1.max(b.x_range().1).max(0) as usize;
                let k_max = span / (cfg.q as usize * cfg.t) + 2;
                let (ua, ub) = (upper_bound_polygon(cfg.p, cfg.t, va, k_max), upper_bound_polygon(cfg.p, cfg.t, vb, k_max));
                for (x, ya) in &a.vertices {
                    let Some((_, yb)) = b.vertices.iter().find(|v| v.0 == *x) else { continue };
                    let below = matches!((ua.value_at(*x), ub.value_at(*x)), (Some(p), Some(q)) if *ya < p && *yb < q);
                    let (ra, rb) = (ya / va, yb / vb);
                    let equal = ra == rb;
                    if below {
                        res.checked += 1;
                        if !equal {
                            res.passed = false;
                            res.failures.push(format!("x = {x}: {ra} at v(T) = {va} vs {rb} at v(T) = {vb}"));
                        }
                    }
                    rows.push(RigidityRow {
                        v_t_a: va.to_string(),
                        v_t_b: vb.to_string(),
                        x: *x,
                        ratio_a: ra.to_string(),
                        ratio_b: rb.to_string(),
                        below_upper: below,
                        equal,
                    });
                }
            }
        }
        out.write(
            &cfg.out,
            "rigidity.csv",
            &to_csv(&rows, &["v_t_a", "v_t_b", "x", "ratio_a", "ratio_b", "below_upper", "equal"]),
        )?;
        checks.push(res);
    }

    for c in &checks {
        out.line(format!("{} {}: {} checked", if c.passed { "PASS" } else { "FAIL" }, c.name, c.checked));
        for f in &c.failures {
            out.line(format!("  {f}"));
        }
        out.passed &= c.passed;
    }
    Ok(out)
}

/// Runs the check registry and writes `ledger.csv`, `ledger.txt` and
/// `ledger.json`.
///
/// `only` overrides the config's check list.
pub fn cmd_verify(cfg: &ExperimentConfig, only: Option<&[String]>) -> Result<Outcome> {
    let selected = only.map(<[String]>::to_vec).or_else(|| cfg.checks.clone());
    let ledger = run_checks(&cfg.verify, selected.as_deref())?;
    let mut out = Outcome::default();
    out.write(&cfg.out, "ledger.csv", &ledger.to_csv())?;
    out.write(&cfg.out, "ledger.txt", &ledger.to_text())?;
    out.write(&cfg.out, "ledger.json", &serde_json::to_string_pretty(&ledger).expect("serialisable"))?;
    out.summary = ledger.to_text();
    out.passed = ledger.passed();
    out.precision_exhausted = ledger.precision_exhausted();
    Ok(out)
}

/// Sorted map of file name to contents under `dir`, for comparing runs.
pub fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            out.insert(path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string(), bytes);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_strings_and_integers() {
        let cfg = ExperimentConfig::from_toml(
            "p = \"5\"\nt = 2\nN = \"20\"\nr = 6\nv_t = [\"0.25\"]\nout = \"res\"\n[source]\nseed = \"9\"\n[verify]\norder = 5\n",
            Some(Path::new("/base")),
        )
        .unwrap();
        assert_eq!((cfg.p, cfg.q, cfg.t, cfg.n, cfg.r), (5, 5, 2, 20, 6));
        assert_eq!(cfg.v_t, vec![Q::new(1.into(), 4.into())]);
        assert_eq!(cfg.source, Source::Seed(9));
        assert_eq!(cfg.out, PathBuf::from("/base/res"));
        assert_eq!(cfg.verify.order, 5);
        assert_eq!(ExperimentConfig::from_toml("p = 2\nt = 1\n", None).unwrap().q, 4);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad = [
            "p = 3\nq = 9\nt = 1\n",
            "p = 6\nt = 1\n",
            "p = 3\nt = 0\n",
            "p = 3\nt = 1\nv_t = [\"0\"]\n",
            "p = 3\nt = 1\nchecks = [\"nope\"]\n",
            "p = 3\nt = 1\n[source]\nseed = 1\nfile = \"x\"\n",
            "p = 3\nt = 1\nextra = 1\n",
            "p = 3\nt = 1\nN = \"ten\"\n",
        ];
        for text in bad {
            assert!(ExperimentConfig::from_toml(text, None).is_err(), "{text}");
        }
    }

    #[test]
    fn exit_codes() {
        let pass = Outcome { passed: true, ..Outcome::default() };
        assert_eq!(exit_code(&Ok(pass)), 0);
        assert_eq!(exit_code(&Ok(Outcome::default())), 1);
        assert_eq!(exit_code(&Err(Error::Parse("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::StabilityFailure { index: 1, small: 2, large: 3 })), 3);
    }
}
