//! Newton polygons with certified points, and the universal bound polygons.
//!
//! A point's ordinate is a [`Valuation`]: exact, or only a lower bound when the
//! digits that would decide it were truncated away. Hulls are built from the
//! exact points, and the bounds are checked to lie on or above the result.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::charpoly::{lambda_seq, CharSeries};
use crate::iwasawa::eval_valuation_with_floor;
use crate::padic::{phi_q, q_of, Valuation};
use crate::{Error, Result, Q};

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyPoint {
    pub x: i64,
    pub y: Valuation,
}

impl PolyPoint {
    pub fn exact(x: i64, y: Q) -> Self {
        PolyPoint { x, y: Valuation::Exact(y) }
    }

    pub fn at_least(x: i64, y: Q) -> Self {
        PolyPoint { x, y: Valuation::AtLeast(y) }
    }
}

/// A lower convex polygon given by its vertices.
///
/// `segment_exact[i]` tells whether the segment from vertex `i` to `i + 1`
/// joins two exact points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(i64, Q)>,
    pub segment_exact: Vec<bool>,
}

impl NewtonPolygon {
    /// Slopes with their horizontal lengths, left to right.
    pub fn slopes(&self) -> Vec<(Q, i64)> {
        self.vertices
            .windows(2)
            .map(|w| ((&w[1].1 - &w[0].1) / qi(w[1].0 - w[0].0), w[1].0 - w[0].0))
            .collect()
    }

    /// Every slope repeated by its multiplicity.
    pub fn slope_list(&self) -> Vec<Q> {
        self.slopes().into_iter().flat_map(|(s, m)| std::iter::repeat_n(s, m as usize)).collect()
    }

    pub fn x_range(&self) -> (i64, i64) {
        (self.vertices[0].0, self.vertices[self.vertices.len() - 1].0)
    }

    /// Ordinate at `x` by linear interpolation, `None` outside the polygon.
    pub fn value_at(&self, x: i64) -> Option<Q> {
        let (lo, hi) = self.x_range();
        if x < lo || x > hi {
            return None;
        }
        let k = self.vertices.partition_point(|v| v.0 < x);
        let (x1, y1) = &self.vertices[k];
        if *x1 == x {
            return Some(y1.clone());
        }
        let (x0, y0) = &self.vertices[k - 1];
        Some(y0 + (y1 - y0) * qi(x - x0) / qi(x1 - x0))
    }

    pub fn is_vertex(&self, x: i64) -> bool {
        self.vertices.iter().any(|v| v.0 == x)
    }
}

/// Indices of the lower hull of points sorted by `x`; collinear points are dropped.
fn lower_hull(points: &[(i64, Q)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (k, (x, y)) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let (xa, ya) = &points[hull[hull.len() - 2]];
            let (xb, yb) = &points[hull[hull.len() - 1]];
            let cross = qi(xb - xa) * (y - ya) - (yb - ya) * qi(x - xa);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(k);
    }
    hull
}

fn sorted_points(points: &[PolyPoint]) -> Result<Vec<PolyPoint>> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.x);
    if pts.windows(2).any(|w| w[0].x == w[1].x) {
        return Err(Error::BadArgument("points must have distinct x".into()));
    }
    Ok(pts)
}

/// Lower hull of the exact points, certified against every lower bound.
///
/// A bound inside the hull's range must lie on or above it; a bound to the right
/// must lie on or above the extension of the last segment, so that it can only
/// add vertices. Anything else raises [`Error::UncertifiedHull`].
pub fn newton_polygon(points: &[PolyPoint]) -> Result<NewtonPolygon> {
    let pts = sorted_points(points)?;
    let exact: Vec<(i64, Q)> = pts
        .iter()
        .filter_map(|p| match &p.y {
            Valuation::Exact(y) => Some((p.x, y.clone())),
            Valuation::AtLeast(_) => None,
        })
        .collect();
    if exact.is_empty() {
        return Err(Error::BadArgument("no exact point".into()));
    }
    let vertices: Vec<(i64, Q)> = lower_hull(&exact).into_iter().map(|i| exact[i].clone()).collect();
    let np = NewtonPolygon { segment_exact: vec![true; vertices.len() - 1], vertices };
    let (lo, hi) = np.x_range();
    for p in &pts {
        let Valuation::AtLeast(b) = &p.y else { continue };
        let floor = if p.x < lo {
            None
        } else if p.x <= hi {
            np.value_at(p.x)
        } else if np.vertices.len() >= 2 {
            let (s, _) = np.slopes().pop().expect("one segment");
            let (xl, yl) = np.vertices.last().expect("nonempty");
            Some(yl + s * qi(p.x - xl))
        } else {
            continue;
        };
        match floor {
            Some(f) if *b >= f => {}
            _ => return Err(Error::UncertifiedHull { x: p.x }),
        }
    }
    Ok(np)
}

/// Hull of all points, treating lower bounds as values; segments touching a
/// bound are flagged inexact.
pub fn newton_polygon_lenient(points: &[PolyPoint]) -> Result<NewtonPolygon> {
    let pts = sorted_points(points)?;
    if pts.is_empty() {
        return Err(Error::BadArgument("no points".into()));
    }
    let all: Vec<(i64, Q)> = pts.iter().map(|p| (p.x, p.y.value().clone())).collect();
    let idx = lower_hull(&all);
    let segment_exact = idx.windows(2).map(|w| pts[w[0]].y.is_exact() && pts[w[1]].y.is_exact()).collect();
    Ok(NewtonPolygon { vertices: idx.into_iter().map(|i| all[i].clone()).collect(), segment_exact })
}

/// The certified polygon of the longest prefix `points[..k]` that admits one.
pub fn certified_prefix_polygon(points: &[PolyPoint]) -> Result<(NewtonPolygon, usize)> {
    let pts = sorted_points(points)?;
    for k in (1..=pts.len()).rev() {
        match newton_polygon(&pts[..k]) {
            Ok(np) => return Ok((np, k)),
            Err(Error::UncertifiedHull { .. }) | Err(Error::BadArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UncertifiedHull { x: pts.first().map_or(0, |p| p.x) })
}

/// `(n, v(c_n))` at a point with `v(T) = v_t`.
///
/// Each `c_n` is known modulo `(p, T)^r`, which contributes the floor `r·v_t`.
pub fn series_points(cs: &CharSeries, v_t: &Q) -> Result<Vec<PolyPoint>> {
    let floor = v_t * qi(cs.r as i64);
    cs.coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let (y, _) = eval_valuation_with_floor(c, v_t, Some(floor.clone()))?;
            Ok(PolyPoint { x: n as i64, y })
        })
        .collect()
}

/// The polygon through `(n, λ(n)·v_t)` for `n ≤ n_max`.
pub fn lower_bound_polygon(p: u32, t: usize, v_t: &Q, n_max: usize) -> NewtonPolygon {
    let lambda = lambda_seq(p, t, n_max);
    let pts: Vec<(i64, Q)> = (0..=n_max).map(|n| (n as i64, v_t * qi(lambda.get(n)))).collect();
    let vertices: Vec<(i64, Q)> = lower_hull(&pts).into_iter().map(|i| pts[i].clone()).collect();
    NewtonPolygon { segment_exact: vec![true; vertices.len() - 1], vertices }
}

/// The polygon through `(kqt, λ(kqt)·v_t)` for `k ≤ k_max`.
pub fn upper_bound_polygon(p: u32, t: usize, v_t: &Q, k_max: usize) -> NewtonPolygon {
    let qt = q_of(p) as usize * t;
    let lambda = lambda_seq(p, t, k_max * qt);
    let vertices: Vec<(i64, Q)> = (0..=k_max).map(|k| ((k * qt) as i64, v_t * qi(lambda.get(k * qt)))).collect();
    NewtonPolygon { segment_exact: vec![true; vertices.len().saturating_sub(1)], vertices }
}

/// `(p² − 1)·t·v_t/8` for odd `p`, `t·v_t` for `p = 2`.
pub fn expected_vertical_gap(p: u32, t: usize, v_t: &Q) -> Q {
    if p == 2 {
        v_t * qi(t as i64)
    } else {
        v_t * Q::new(((p as i64 * p as i64 - 1) * t as i64).into(), 8.into())
    }
}

/// Largest `upper − lower` over integer `x` in the first `windows` periods.
///
/// Both polygons are linear between consecutive integers, so integer abscissae
/// suffice.
pub fn vertical_gap_scan(p: u32, t: usize, v_t: &Q, windows: usize) -> Q {
    let qt = q_of(p) as i64 * t as i64;
    let upper = upper_bound_polygon(p, t, v_t, windows);
    let lower = lower_bound_polygon(p, t, v_t, windows * qt as usize);
    (0..=windows as i64 * qt)
        .map(|x| upper.value_at(x).expect("in range") - lower.value_at(x).expect("in range"))
        .max()
        .unwrap_or_else(Q::zero)
}

/// The scanned gap, failing if it differs from the closed form.
pub fn max_vertical_gap(p: u32, t: usize, v_t: &Q) -> Result<Q> {
    let scanned = vertical_gap_scan(p, t, v_t, 4);
    let expected = expected_vertical_gap(p, t, v_t);
    if scanned != expected {
        return Err(Error::Internal(format!("vertical gap {scanned} differs from {expected}")));
    }
    Ok(scanned)
}

/// `[n, n]` or the open interval `(n, n + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Point(i64),
    Open(i64),
}

impl Interval {
    pub fn of_ratio(r: &Q) -> Interval {
        let n = r.floor().to_integer();
        let n = i64::try_from(n).expect("ratio fits i64");
        if r.is_integer() {
            Interval::Point(n)
        } else {
            Interval::Open(n)
        }
    }

    pub fn floor(&self) -> i64 {
        match *self {
            Interval::Point(n) | Interval::Open(n) => n,
        }
    }

    /// The interval one unit to the right.
    pub fn succ_shift(&self) -> Interval {
        match *self {
            Interval::Point(n) => Interval::Point(n + 1),
            Interval::Open(n) => Interval::Open(n + 1),
        }
    }

    fn key(&self) -> (i64, u8) {
        match *self {
            Interval::Point(n) => (n, 0),
            Interval::Open(n) => (n, 1),
        }
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Interval::Point(n) => write!(f, "[{n},{n}]"),
            Interval::Open(n) => write!(f, "({n},{})", n + 1),
        }
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("interval {s:?}"));
        let s = s.trim();
        let (open, inner) = if let Some(rest) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            (false, rest)
        } else if let Some(rest) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            (true, rest)
        } else {
            return Err(bad());
        };
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        match (open, b - a) {
            (false, 0) => Ok(Interval::Point(a)),
            (true, 1) => Ok(Interval::Open(a)),
            _ => Err(bad()),
        }
    }
}

/// One slope of a polygon, repeated per unit of horizontal length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeRow {
    pub n: usize,
    pub slope: Q,
    /// `slope / (φ(q)·v_t)`.
    pub ratio: Q,
    pub interval: Interval,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct SlopeRowCsv {
    n: usize,
    slope: String,
    ratio: String,
    interval: String,
    exact_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeReport {
    pub v_t: Q,
    pub phi: u32,
    pub rows: Vec<SlopeRow>,
}

impl SlopeReport {
    /// Total multiplicity per interval.
    pub fn degrees(&self) -> BTreeMap<Interval, usize> {
        let mut out = BTreeMap::new();
        for row in &self.rows {
            *out.entry(row.interval).or_insert(0) += 1;
        }
        out
    }

    pub fn degree(&self, i: Interval) -> usize {
        self.rows.iter().filter(|r| r.interval == i).count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(SlopeRowCsv {
                n: r.n,
                slope: r.slope.to_string(),
                ratio: r.ratio.to_string(),
                interval: r.interval.to_string(),
                exact_flag: r.exact,
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn from_csv(text: &str, v_t: Q, phi: u32) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows = rdr
            .deserialize::<SlopeRowCsv>()
            .map(|rec| {
                let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
                Ok(SlopeRow {
                    n: rec.n,
                    slope: parse_rational(&rec.slope)?,
                    ratio: parse_rational(&rec.ratio)?,
                    interval: rec.interval.parse()?,
                    exact: rec.exact_flag,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SlopeReport { v_t, phi, rows })
    }
}

/// Parses `a`, `a/b` or a decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let num: num_bigint::BigInt = digits.parse().map_err(|_| Error::Parse(format!("rational {s:?}")))?;
        let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Q::new(num, den));
    }
    s.parse::<Q>().map_err(|_| Error::Parse(format!("rational {s:?}")))
}

/// Slopes of `np` normalised by `φ(q)·v_t` and sorted into intervals.
pub fn slope_report(np: &NewtonPolygon, v_t: &Q, p: u32) -> SlopeReport {
    let phi = phi_q(p);
    let scale = v_t * qi(phi as i64);
    let mut rows = Vec::new();
    for ((slope, mult), exact) in np.slopes().into_iter().zip(&np.segment_exact) {
        let ratio = &slope / &scale;
        let interval = Interval::of_ratio(&ratio);
        for _ in 0..mult {
            rows.push(SlopeRow { n: rows.len(), slope: slope.clone(), ratio: ratio.clone(), interval, exact: *exact });
        }
    }
    SlopeReport { v_t: v_t.clone(), phi, rows }
}

/// Outcome of a checker: pass flag plus one line per failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    pub(crate) fn new(name: &str) -> Self {
        CheckResult { name: name.into(), passed: true, checked: 0, failures: Vec::new() }
    }

    pub(crate) fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.failures.push(msg());
        }
    }
}

/// `np` lies on or above `lower` at every integer abscissa they share.
pub fn sandwich_check(np: &NewtonPolygon, lower: &NewtonPolygon) -> CheckResult {
    let mut res = CheckResult::new("lower-bound-sandwich");
    let (lo, hi) = np.x_range();
    for x in lo..=hi {
        if let (Some(y), Some(b)) = (np.value_at(x), lower.value_at(x)) {
            res.expect(y >= b, || format!("x = {x}: polygon {y} below bound {b}"));
        }
    }
    res
}

/// Where `np` sits relative to the upper bound polygon; report only.
pub fn upper_bound_excess(np: &NewtonPolygon, upper: &NewtonPolygon) -> Vec<(i64, Q)> {
    let (lo, hi) = np.x_range();
    (lo..=hi)
        .filter_map(|x| match (np.value_at(x), upper.value_at(x)) {
            (Some(y), Some(u)) if y > u => Some((x, y - u)),
            _ => None,
        })
        .collect()
}

/// Compares `y / v_t` at every vertex shared by two certified polygons.
///
/// Vertices of a certified polygon are exact points, so a shared vertex has an
/// exact ordinate in both evaluations.
pub fn ratio_rigidity(a: &NewtonPolygon, v_a: &Q, b: &NewtonPolygon, v_b: &Q) -> CheckResult {
    let mut res = CheckResult::new("ratio-rigidity");
    for (x, ya) in &a.vertices {
        if let Some((_, yb)) = b.vertices.iter().find(|v| v.0 == *x) {
            let (ra, rb) = (ya / v_a, yb / v_b);
            res.expect(ra == rb, || format!("vertex x = {x}: {ra} at v(T) = {v_a} vs {rb} at v(T) = {v_b}"));
        }
    }
    res
}

/// [`ratio_rigidity`] restricted to vertices lying strictly below the upper
/// bound polygon at both radii.
///
/// A vertex on or above that polygon can be dominated by a non-unit coefficient,
/// whose ratio `v(b)/v(T) + m` moves with `v(T)`.
pub fn ratio_rigidity_below_upper(p: u32, t: usize, a: &NewtonPolygon, v_a: &Q, b: &NewtonPolygon, v_b: &Q) -> CheckResult {
    let mut res = CheckResult::new("ratio-rigidity");
    let span = a.x_range().1.max(b.x_range().1).max(0) as usize;
    let k_max = span / (q_of(p) as usize * t) + 2;
    let (up_a, up_b) = (upper_bound_polygon(p, t, v_a, k_max), upper_bound_polygon(p, t, v_b, k_max));
    for (x, ya) in &a.vertices {
        let Some((_, yb)) = b.vertices.iter().find(|v| v.0 == *x) else { continue };
        let below = matches!((up_a.value_at(*x), up_b.value_at(*x)), (Some(ua), Some(ub)) if *ya < ua && *yb < ub);
        if !below {
            continue;
        }
        let (ra, rb) = (ya / v_a, yb / v_b);
        res.expect(ra == rb, || format!("vertex x = {x}: {ra} at v(T) = {v_a} vs {rb} at v(T) = {v_b}"));
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::char_series;
    use crate::iwasawa::CharOfDelta;
    use crate::oracle::brute_force_lower_hull;
    use crate::up_operator::synth_up;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    #[test]
    fn hull_examples() {
        let np = newton_polygon(&[
            PolyPoint::exact(0, q(0, 1)),
            PolyPoint::exact(1, q(1, 2)),
            PolyPoint::exact(2, q(3, 2)),
        ])
        .unwrap();
        assert_eq!(np.vertices.len(), 3);
        assert_eq!(np.slope_list(), vec![q(1, 2), q(1, 1)]);

        let np = newton_polygon(&[
            PolyPoint::exact(0, q(0, 1)),
            PolyPoint::exact(1, q(5, 1)),
            PolyPoint::exact(2, q(1, 1)),
        ])
        .unwrap();
        assert_eq!(np.vertices, vec![(0, q(0, 1)), (2, q(1, 1))]);
        assert_eq!(np.slope_list(), vec![q(1, 2), q(1, 2)]);

        let err = newton_polygon(&[
            PolyPoint::exact(0, q(0, 1)),
            PolyPoint::at_least(1, q(1, 4)),
            PolyPoint::exact(2, q(1, 1)),
        ]);
        assert!(matches!(err, Err(Error::UncertifiedHull { x: 1 })));

        let ok = newton_polygon(&[PolyPoint::exact(0, q(0, 1)), PolyPoint::at_least(1, q(1, 2)), PolyPoint::exact(2, q(1, 1))]);
        assert!(ok.is_ok());
    }

    #[test]
    fn trailing_bounds() {
        let base = vec![PolyPoint::exact(0, q(0, 1)), PolyPoint::exact(1, q(1, 1))];
        let mut above = base.clone();
        above.push(PolyPoint::at_least(3, q(3, 1)));
        assert!(newton_polygon(&above).is_ok());
        let mut below = base.clone();
        below.push(PolyPoint::at_least(3, q(2, 1)));
        assert!(matches!(newton_polygon(&below), Err(Error::UncertifiedHull { x: 3 })));
        let (np, k) = certified_prefix_polygon(&below).unwrap();
        assert_eq!((np.vertices.len(), k), (2, 2));

        let lenient = newton_polygon_lenient(&below).unwrap();
        assert_eq!(lenient.segment_exact, vec![false]);
    }

    #[test]
    fn bound_polygons() {
        let low = lower_bound_polygon(3, 1, &q(1, 2), 3);
        assert_eq!(low.slope_list(), vec![q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(lower_bound_polygon(7, 3, &q(2, 3), 0).vertices, vec![(0, q(0, 1))]);
        assert_eq!(lower_bound_polygon(5, 2, &q(1, 4), 10).value_at(10), Some(q(5, 1)));

        let up = upper_bound_polygon(3, 1, &q(1, 1), 1);
        assert_eq!(up.slopes(), vec![(q(1, 1), 3)]);
        assert_eq!(upper_bound_polygon(3, 1, &q(1, 1), 0).vertices, vec![(0, q(0, 1))]);
        assert!(upper_bound_polygon(5, 2, &q(1, 4), 1).vertices.contains(&(10, q(5, 1))));
    }

    #[test]
    fn vertical_gaps() {
        assert_eq!(max_vertical_gap(3, 1, &q(1, 1)).unwrap(), q(1, 1));
        assert_eq!(max_vertical_gap(5, 2, &q(1, 2)).unwrap(), q(3, 1));
        assert_eq!(max_vertical_gap(2, 1, &q(1, 2)).unwrap(), q(1, 2));
        for p in [2, 3, 5, 7] {
            for t in 1..4 {
                assert_eq!(vertical_gap_scan(p, t, &q(1, 3), 6), expected_vertical_gap(p, t, &q(1, 3)));
            }
        }
    }

    fn poly(vertices: Vec<(i64, Q)>) -> NewtonPolygon {
        NewtonPolygon { segment_exact: vec![true; vertices.len() - 1], vertices }
    }

    #[test]
    fn slope_reports() {
        let np = poly(vec![(0, q(0, 1)), (2, q(0, 1)), (3, q(1, 2))]);
        let rep = slope_report(&np, &q(1, 4), 3);
        assert_eq!(rep.degree(Interval::Point(0)), 2);
        assert_eq!(rep.degree(Interval::Point(1)), 1);
        assert_eq!(rep.degree(Interval::Open(4)), 0);
        let rep = slope_report(&poly(vec![(0, q(0, 1)), (1, q(1, 3))]), &q(1, 4), 3);
        assert_eq!(rep.rows[0].ratio, q(2, 3));
        assert_eq!(rep.degree(Interval::Open(0)), 1);

        let back = SlopeReport::from_csv(&rep.to_csv(), rep.v_t.clone(), rep.phi).unwrap();
        assert_eq!(back, rep);
        assert!(rep.to_csv().starts_with("n,slope,ratio,interval,exact_flag\n"));
    }

    #[test]
    fn rigidity_near_upper_bound() {
        let a = poly(vec![(0, q(0, 1)), (2, q(1, 3)), (3, q(1, 1))]);
        let b = poly(vec![(0, q(0, 1)), (2, q(1, 4)), (3, q(3, 4))]);
        let res = ratio_rigidity_below_upper(3, 1, &a, &q(1, 3), &b, &q(1, 4));
        assert!(res.passed && res.checked == 1);

        // a p·T term at x = 2: ratio 3 + 1 at v(T) = 1/3, 4 + 1 at v(T) = 1/4
        let a = poly(vec![(0, q(0, 1)), (2, q(4, 3)), (3, q(2, 1))]);
        let b = poly(vec![(0, q(0, 1)), (2, q(5, 4)), (3, q(2, 1))]);
        assert!(!ratio_rigidity(&a, &q(1, 3), &b, &q(1, 4)).passed);
        let res = ratio_rigidity_below_upper(3, 1, &a, &q(1, 3), &b, &q(1, 4));
        assert!(res.passed && res.checked == 0);
    }

    #[test]
    fn interval_text() {
        for i in [Interval::Point(0), Interval::Open(0), Interval::Point(7), Interval::Open(-2)] {
            assert_eq!(i.to_string().parse::<Interval>().unwrap(), i);
        }
        assert!("[1,2]".parse::<Interval>().is_err());
        assert!(Interval::Point(0) < Interval::Open(0) && Interval::Open(0) < Interval::Point(1));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn synthetic_sandwich() {
        let spec = synth_up(1, 3, 10, 10, 42).unwrap();
        let cs = char_series(&spec, 10, 12, CharOfDelta::new(1)).unwrap();
        for v in [q(1, 2), q(1, 3), q(1, 4)] {
            let pts = series_points(&cs, &v).unwrap();
            let (np, k) = certified_prefix_polygon(&pts).unwrap();
            assert!(k >= 2);
            let lower = lower_bound_polygon(3, 1, &v, cs.degree());
            assert!(sandwich_check(&np, &lower).passed);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn hull_matches_oracle(ys in prop::collection::vec((-20i64..20, 1i64..5), 1..12)) {
            let pts: Vec<(i64, Q)> = ys.iter().enumerate().map(|(x, &(a, b))| (x as i64, q(a, b))).collect();
            let poly_pts: Vec<PolyPoint> = pts.iter().map(|(x, y)| PolyPoint::exact(*x, y.clone())).collect();
            let np = newton_polygon(&poly_pts).unwrap();
            let oracle: Vec<(i64, Q)> = brute_force_lower_hull(&pts).into_iter().map(|i| pts[i].clone()).collect();
            prop_assert_eq!(np.vertices, oracle);
        }

        #[test]
        fn polygon_is_convex_and_below_points(ys in prop::collection::vec(-30i64..30, 2..15)) {
            let pts: Vec<PolyPoint> = ys.iter().enumerate().map(|(x, &y)| PolyPoint::exact(x as i64, q(y, 1))).collect();
            let np = newton_polygon(&pts).unwrap();
            let s = np.slopes();
            prop_assert!(s.windows(2).all(|w| w[0].0 < w[1].0));
            for p in &pts {
                prop_assert!(np.value_at(p.x).unwrap() <= *p.y.value());
            }
        }
    }
}
