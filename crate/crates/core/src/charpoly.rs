//! Characteristic series `det(I − X·P)` of the assembled operator.
//!
//! Coefficients are computed over `Z/p^r[T]/T^r` with a division-free
//! Berkowitz recurrence and are therefore known modulo `(p, T)^r`. The matrix is
//! truncated to the size past which rows lie deep enough in `(p, T)^r` not to
//! matter, and a second run one block larger confirms that.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::iwasawa::{CharOfDelta, LambdaElt, LambdaJson, Order};
use crate::matrix::Matrix;
use crate::monoid::ActionPrecision;
use crate::padic::{q_of, ResidueRing};
use crate::ring::RingElement;
use crate::up_operator::{assemble_at, BlockMatrix, UpSpec};
use crate::{Error, Result, Q};

/// Default `(p, T)`-adic certification order.
pub const DEFAULT_ORDER: u32 = 16;
/// Default number of series coefficients.
pub const DEFAULT_DEGREE: usize = 12;

/// `⌊s/t⌋ − ⌊s/pt⌋`: the order every entry of row `s` reaches in column blocks
/// far enough to the left.
fn row_depth(s: usize, p: u32, t: usize) -> usize {
    s / t - s / (p as usize * t)
}

/// Size past which the characteristic polynomial is stable modulo `(p, T)^r`.
///
/// `⌊ptr/(p−1)⌋ + t`, bumped further if the row depth at that size is still
/// below `r`.
pub fn truncation_size(r: u32, p: u32, t: usize) -> usize {
    if r == 0 {
        return 0;
    }
    let mut s = (p as usize * t * r as usize) / (p as usize - 1) + t;
    while row_depth(s, p, t) < r as usize {
        s += 1;
    }
    s
}

/// `λ(0) = 0`, `λ(i+1) = λ(i) + ⌊i/t⌋ − ⌊i/pt⌋`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaSeq {
    pub p: u32,
    pub t: usize,
    values: Vec<i64>,
}

impl LambdaSeq {
    pub fn get(&self, n: usize) -> i64 {
        self.values[n]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `λ(0..=n_max)`.
pub fn lambda_seq(p: u32, t: usize, n_max: usize) -> LambdaSeq {
    let mut values = Vec::with_capacity(n_max + 1);
    let mut acc = 0i64;
    values.push(0);
    for i in 0..n_max {
        acc += row_depth(i, p, t) as i64;
        values.push(acc);
    }
    LambdaSeq { p, t, values }
}

/// Both sides of `p/(q(p−1)) · λ((k+1)qt) = (k+1)²qt/2` for `k ≤ k_max`.
pub fn lambda_closed_form(p: u32, t: usize, k_max: usize) -> Vec<(usize, Q, Q)> {
    let q = q_of(p) as i64;
    let qt = q as usize * t;
    let seq = lambda_seq(p, t, (k_max + 1) * qt);
    (0..=k_max)
        .map(|k| {
            let lhs = Q::new((p as i64).into(), (q * (p as i64 - 1)).into()) * Q::from_integer(seq.get((k + 1) * qt).into());
            let kk = (k + 1) as i64;
            let rhs = Q::new((kk * kk * qt as i64).into(), 2.into());
            (k, lhs, rhs)
        })
        .collect()
}

/// Coefficients of `det(I − X·M)` up to `X^degree`.
///
/// Adds one row and column at a time. If `P_k` is the series of the leading
/// `k × k` block `A`, the next block `[[A, C], [R, a]]` has
/// `P_{k+1}[n] = P_k[n] − a·P_k[n−1] − Σ_{i ≤ n−2} P_k[i]·R·A^{n−2−i}·C`.
pub fn berkowitz_charpoly_to_degree<V: RingElement>(m: &Matrix<V>, degree: usize) -> Result<Vec<V>> {
    let size = m.rows();
    if size != m.cols() {
        return Err(Error::BadArgument(format!("{} x {} matrix is not square", m.rows(), m.cols())));
    }
    if size == 0 {
        return Err(Error::BadArgument("empty matrix".into()));
    }
    let zero = m.get(0, 0).zero_like();
    let deg = degree.min(size);
    let mut poly = vec![zero.clone(); deg + 1];
    poly[0] = zero.one_like();
    for k in 0..size {
        let top = deg.min(k + 1);
        // w[l] = R · A^l · C
        let n_w = top.saturating_sub(1);
        let mut w = Vec::with_capacity(n_w);
        let mut v: Vec<V> = (0..k).map(|i| m.get(i, k).clone()).collect();
        for l in 0..n_w {
            let mut acc = zero.clone();
            for (i, vi) in v.iter().enumerate() {
                acc.mul_add_assign(m.get(k, i), vi);
            }
            w.push(acc);
            if l + 1 < n_w {
                v = mat_vec(m, k, &v, &zero);
            }
        }
        let a = m.get(k, k);
        let mut next = poly.clone();
        for n in 1..=top {
            let mut s = a.mul_ref(&poly[n - 1]);
            for i in 0..n.saturating_sub(1) {
                s.mul_add_assign(&poly[i], &w[n - 2 - i]);
            }
            next[n].sub_assign_ref(&s);
        }
        poly = next;
    }
    Ok(poly)
}

/// All coefficients of `det(I − X·M)`.
pub fn berkowitz_charpoly<V: RingElement>(m: &Matrix<V>) -> Result<Vec<V>> {
    berkowitz_charpoly_to_degree(m, m.rows())
}

/// Leading `k × k` block of `m` times `v`; rows run in parallel, each summed in order.
fn mat_vec<V: RingElement>(m: &Matrix<V>, k: usize, v: &[V], zero: &V) -> Vec<V> {
    let row = |i: usize| {
        let mut acc = zero.clone();
        for (j, vj) in v.iter().enumerate() {
            acc.mul_add_assign(m.get(i, j), vj);
        }
        acc
    };
    if k >= 16 {
        (0..k).into_par_iter().map(row).collect()
    } else {
        (0..k).map(row).collect()
    }
}

/// `c_0, …, c_D` of the characteristic series, each known modulo `(p, T)^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharSeries {
    pub p: u32,
    pub t: usize,
    pub r: u32,
    pub omega: CharOfDelta,
    /// Size of the truncated matrix the coefficients come from.
    pub size: usize,
    pub coeffs: Vec<LambdaElt>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CharSeriesJson {
    p: u32,
    t: usize,
    r: u32,
    omega_exponent: u32,
    size: usize,
    coeffs: Vec<LambdaJson>,
}

impl CharSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Certified `T`-order of `c_n` in the halo sense, capped at `r`.
    pub fn certified_order(&self, n: usize) -> Order {
        self.coeffs[n].halo_t_order().capped(self.r as i64)
    }

    pub fn to_json(&self) -> String {
        let j = CharSeriesJson {
            p: self.p,
            t: self.t,
            r: self.r,
            omega_exponent: self.omega.exponent,
            size: self.size,
            coeffs: self.coeffs.iter().map(LambdaElt::to_json_value).collect(),
        };
        serde_json::to_string_pretty(&j).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: CharSeriesJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let coeffs = j.coeffs.iter().map(LambdaElt::from_json_value).collect::<Result<Vec<_>>>()?;
        Ok(CharSeries { p: j.p, t: j.t, r: j.r, omega: CharOfDelta::new(j.omega_exponent), size: j.size, coeffs })
    }
}

/// A characteristic-series computation together with its inputs.
#[derive(Clone, Debug)]
pub struct CharSeriesRun {
    pub series: CharSeries,
    /// The operator, assembled one block past the larger truncation.
    pub block: BlockMatrix,
    /// The two truncation sizes compared by the stability check.
    pub sizes: (usize, usize),
}

/// Precision at which [`char_series_run`] assembles the operator.
pub fn assembly_precision(r: u32, p: u32, t: usize) -> ActionPrecision {
    let n_blocks = assembly_blocks(r, p, t);
    let depth = (r as usize).max(n_blocks);
    ActionPrecision::new(depth as u32, depth)
}

/// Number of blocks assembled by [`char_series_run`].
pub fn assembly_blocks(r: u32, p: u32, t: usize) -> usize {
    (truncation_size(r, p, t) + t).div_ceil(t)
}

pub fn char_series(spec: &UpSpec, d: usize, r: u32, omega: CharOfDelta) -> Result<CharSeries> {
    char_series_run(spec, d, r, omega).map(|run| run.series)
}

/// Assembles, truncates at `S` and `S + t`, and returns `c_0..c_D` from size `S`.
///
/// Fails with [`Error::StabilityFailure`] if the two truncations disagree
/// modulo `(p, T)^r`.
pub fn char_series_run(spec: &UpSpec, d: usize, r: u32, omega: CharOfDelta) -> Result<CharSeriesRun> {
    if r == 0 {
        return Err(Error::BadArgument("certification order r must be positive".into()));
    }
    let s = truncation_size(r, spec.p, spec.t);
    if d > s {
        return Err(Error::BadArgument(format!("degree {d} exceeds the truncation size {s}")));
    }
    let prec = assembly_precision(r, spec.p, spec.t);
    let block = assemble_at(spec, assembly_blocks(r, spec.p, spec.t), omega, prec)?;
    let small = s;
    let large = s + spec.t;
    let reduced = block.matrix.try_map(|e| e.reduce(r, r as usize))?;
    let c_small = berkowitz_charpoly_to_degree(&reduced.leading(small), d)?;
    let c_large = berkowitz_charpoly_to_degree(&reduced.leading(large), d)?;
    for (index, (a, b)) in c_small.iter().zip(&c_large).enumerate() {
        if !a.checked_sub(b)?.mlambda_order().certifies(r as i64) {
            return Err(Error::StabilityFailure { index, small, large });
        }
    }
    let series = CharSeries { p: spec.p, t: spec.t, r, omega, size: small, coeffs: c_small };
    Ok(CharSeriesRun { series, block, sizes: (small, large) })
}

/// One line of the coefficient-bound report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharBoundRow {
    pub n: usize,
    pub lambda: i64,
    pub observed: String,
    /// `observed − λ(n)`; negative only when the check is capped at `r`.
    pub margin: i64,
    /// True when `λ(n) > r`, so only `(p, T)^r` membership is checked.
    pub capped: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharBoundReport {
    pub r: u32,
    pub rows: Vec<CharBoundRow>,
}

impl CharBoundReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|row| row.ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &CharBoundRow> {
        self.rows.iter().filter(|row| !row.ok)
    }

    /// Rows where the full `λ(n)` bound was certified, not just the cap.
    pub fn full_rows(&self) -> usize {
        self.rows.iter().filter(|row| !row.capped).count()
    }

    /// CSV with header `n,lambda,observed,margin,capped,ok`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn from_csv(text: &str, r: u32) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<CharBoundRow>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(CharBoundReport { r, rows })
    }
}

/// Checks that `c_n` has halo `T`-order at least `min(λ(n), r)` for every stored `n`.
pub fn verify_char_bound(cs: &CharSeries, lambda: &LambdaSeq) -> Result<CharBoundReport> {
    if lambda.len() <= cs.degree() {
        return Err(Error::LengthMismatch { expected: cs.degree() + 1, got: lambda.len() });
    }
    let r = cs.r as i64;
    let mut rows = Vec::with_capacity(cs.coeffs.len());
    for n in 0..cs.coeffs.len() {
        let need = lambda.get(n).min(r);
        let order = cs.certified_order(n);
        let ok = match order {
            Order::Exact(v) => v >= need,
            Order::AtLeast(v) if v >= need => true,
            Order::AtLeast(v) => {
                return Err(Error::PrecisionTooLow { row: n, col: 0, certified: v, bound: need });
            }
        };
        rows.push(CharBoundRow {
            n,
            lambda: lambda.get(n),
            observed: order.to_string(),
            margin: order.bound() - lambda.get(n),
            capped: lambda.get(n) > r,
            ok,
        });
    }
    Ok(CharBoundReport { r: cs.r, rows })
}

/// Pairs `(n, m)` where `v_p(b_{n,m}) < λ(n) − m` is certified.
///
/// `b_{n,m}` is known modulo `p^{r−m}`, so the check covers `m < r` and
/// compares against `min(λ(n), r) − m`.
pub fn coefficient_bound_violations(cs: &CharSeries, lambda: &LambdaSeq) -> Vec<(usize, usize)> {
    let r = cs.r as i64;
    let mut out = Vec::new();
    for (n, c) in cs.coeffs.iter().enumerate() {
        let ring = c.ring();
        for (m, &b) in c.residues().iter().enumerate().take(cs.r as usize) {
            let need = lambda.get(n).min(r) - m as i64;
            if need <= 0 {
                continue;
            }
            let known = r - m as i64;
            let v = ring.val(b).map_or(known, |v| (v as i64).min(known));
            if v < need {
                out.push((n, m));
            }
        }
    }
    out
}

/// CSV of the series coefficients: `n,m,residue` for every nonzero `b_{n,m}`.
pub fn series_to_csv(cs: &CharSeries) -> String {
    let mut s = String::from("n,m,residue\n");
    for (n, c) in cs.coeffs.iter().enumerate() {
        for (m, b) in c.residues().iter().enumerate() {
            if *b != 0 {
                writeln!(s, "{n},{m},{b}").expect("string write");
            }
        }
    }
    s
}

/// `c_n` reduced into a smaller ring, for callers mixing precisions.
pub fn reduce_series(cs: &CharSeries, r: u32) -> Result<CharSeries> {
    if r > cs.r {
        return Err(Error::InsufficientPrecision { needed: r, available: cs.r });
    }
    let ring = ResidueRing::new(cs.p, r)?;
    let coeffs = cs
        .coeffs
        .iter()
        .map(|c| Ok(LambdaElt::from_residues(ring, c.reduce(r, r as usize)?.residues().to_vec())))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharSeries { r, coeffs, ..cs.clone() })
}
