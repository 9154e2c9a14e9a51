//! Checkers for slope data that comes from outside: pairings, twisted
//! progressions, component degrees, and the weight-independent slope tables.
//!
//! The tables `r_ord` and the weight-two slope lists are inputs; nothing here
//! computes them.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::padic::{phi_q, q_of};
use crate::polygon::{parse_rational, CheckResult, Interval};
use crate::{Error, Result, Q};

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn pow(p: u32, e: u32) -> i64 {
    (p as i64).pow(e)
}

/// `(k + 1)·p^m·t / q`, the number of slopes in a classical weight.
pub fn classical_dimension(p: u32, m: u32, t: usize, k: u32) -> Result<usize> {
    let num = (k as i64 + 1) * pow(p, m) * t as i64;
    let q = q_of(p) as i64;
    if num % q != 0 {
        return Err(Error::BadArgument(format!("p^m = {} is too small for q = {q}", pow(p, m))));
    }
    Ok((num / q) as usize)
}

/// Checks `α_i(ψ) = k + 1 − α_{L−1−i}(ψ^{-1})` and the total `(k+1)²p^m t/q`.
pub fn atkin_lehner_check(slopes_psi: &[Q], slopes_psi_inv: &[Q], k: u32, p: u32, m: u32, t: usize) -> Result<CheckResult> {
    let len = classical_dimension(p, m, t, k)?;
    for list in [slopes_psi, slopes_psi_inv] {
        if list.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: list.len() });
        }
    }
    let mut res = CheckResult::new("atkin-lehner");
    let top = qi(k as i64 + 1);
    for i in 0..len {
        let partner = &top - &slopes_psi_inv[len - 1 - i];
        res.expect(slopes_psi[i] == partner, || format!("i = {i}: {} vs {partner}", slopes_psi[i]));
    }
    let total: Q = slopes_psi.iter().chain(slopes_psi_inv).sum();
    let expected = qi((k as i64 + 1) * (k as i64 + 1)) * qi(pow(p, m) * t as i64) / qi(q_of(p) as i64);
    res.expect(total == expected, || format!("total slope {total} vs {expected}"));
    Ok(res)
}

/// The list paired with `slopes` under `α ↦ k + 1 − α`, in increasing order.
pub fn atkin_lehner_partner(slopes: &[Q], k: u32) -> Vec<Q> {
    slopes.iter().rev().map(|a| qi(k as i64 + 1) - a).collect()
}

/// Shift `p^M t / q` and increment `p^M / q²` of the twisted identity.
fn twist_step(p: u32, big_m: u32, t: usize) -> Result<(usize, Q)> {
    let q = q_of(p) as i64;
    let num = pow(p, big_m) * t as i64;
    if num % q != 0 {
        return Err(Error::BadArgument(format!("p^M = {} is too small for q = {q}", pow(p, big_m))));
    }
    Ok(((num / q) as usize, Q::new(pow(p, big_m).into(), (q * q).into())))
}

/// Number of progressions `(p−1)p^{M−1}t/2` and their common difference `φ(q)p^M/(2q²)`.
pub fn progression_shape(p: u32, big_m: u32, t: usize) -> Result<(usize, Q)> {
    if big_m == 0 {
        return Err(Error::BadArgument("M must be positive".into()));
    }
    let count = (p as i64 - 1) * pow(p, big_m - 1) * t as i64;
    if count % 2 != 0 {
        return Err(Error::BadArgument("progression count is not an integer".into()));
    }
    let q = q_of(p) as i64;
    let diff = Q::new((phi_q(p) as i64 * pow(p, big_m)).into(), (2 * q * q).into());
    Ok(((count / 2) as usize, diff))
}

/// Checks `α̃_{j+s}(ω·ω₀²) = α̃_j(ω) + p^M/q²` wherever both sides exist, and
/// that each sequence splits into the predicted arithmetic progressions.
///
/// `alpha` maps the exponent `e` of `ω = ω₀^e` to its sorted ratio sequence.
pub fn progression_check(alpha: &BTreeMap<u32, Vec<Q>>, big_m: u32, p: u32, t: usize) -> Result<CheckResult> {
    let phi = phi_q(p);
    let (shift, step) = twist_step(p, big_m, t)?;
    let (count, diff) = progression_shape(p, big_m, t)?;
    let mut res = CheckResult::new("progression");
    for (&e, seq) in alpha {
        if let Some(next) = alpha.get(&((e + 2) % phi)) {
            for j in 0..seq.len() {
                if let Some(b) = next.get(j + shift) {
                    let want = &seq[j] + &step;
                    res.expect(*b == want, || format!("ω = ω₀^{e}, j = {j}: twisted value {b}, expected {want}"));
                }
            }
        }
        for j in 0..seq.len().saturating_sub(count) {
            let gap = &seq[j + count] - &seq[j];
            res.expect(gap == diff, || format!("ω = ω₀^{e}, j = {j}: progression step {gap}, expected {diff}"));
        }
    }
    Ok(res)
}

/// Sequences satisfying the twisted identity by construction.
///
/// `base` holds the values in `[0, p^M/q²)` of one period of `ω₀^0`, sorted;
/// exponents in the same coset of `⟨ω₀²⟩` are filled by the twist. Each
/// sequence has `len` entries.
pub fn twisted_progressions(base: &[Q], big_m: u32, p: u32, t: usize, len: usize) -> Result<BTreeMap<u32, Vec<Q>>> {
    let (shift, step) = twist_step(p, big_m, t)?;
    if base.len() != shift {
        return Err(Error::LengthMismatch { expected: shift, got: base.len() });
    }
    let phi = phi_q(p);
    let g = |n: i64| -> Q {
        let s = shift as i64;
        let (quot, rem) = (n.div_euclid(s), n.rem_euclid(s));
        &step * qi(quot) + &base[rem as usize]
    };
    let mut out = BTreeMap::new();
    for start in 0..phi.min(2) {
        let orbit = (phi / 2).max(1);
        for i in 0..orbit {
            let e = (start + 2 * i) % phi;
            let seq = (0..len).map(|j| g(j as i64 - (i as usize * shift) as i64) + &step * qi(i as i64)).collect();
            out.insert(e, seq);
        }
    }
    Ok(out)
}

/// `r_ord` values keyed by the exponent of `ω₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ROrdTable {
    pub phi: u32,
    values: BTreeMap<u32, u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ROrdEntry {
    omega_exponent: u32,
    r_ord: u64,
}

impl ROrdTable {
    pub fn new(p: u32, values: BTreeMap<u32, u64>) -> Self {
        let phi = phi_q(p);
        ROrdTable { phi, values: values.into_iter().map(|(e, v)| (e % phi, v)).collect() }
    }

    /// `r_ord(ω₀^e)` with `e` read modulo `φ(q)`.
    pub fn get(&self, e: i64) -> Result<u64> {
        let e = e.rem_euclid(self.phi as i64) as u32;
        self.values.get(&e).copied().ok_or(Error::MissingCharacterTable(e))
    }

    /// Parses `[{"omega_exponent": e, "r_ord": n}, …]`.
    pub fn from_json(p: u32, text: &str) -> Result<Self> {
        let entries: Vec<ROrdEntry> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self::new(p, entries.into_iter().map(|x| (x.omega_exponent, x.r_ord)).collect()))
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<ROrdEntry> =
            self.values.iter().map(|(&omega_exponent, &r_ord)| ROrdEntry { omega_exponent, r_ord }).collect();
        serde_json::to_string_pretty(&entries).expect("serialisable")
    }
}

/// Degree of `X_{I, ω₀^e}` predicted from `r_ord`.
pub fn predicted_degree(interval: Interval, table: &ROrdTable, e: u32, p: u32, t: usize) -> Result<i64> {
    let e = e as i64;
    let qt = (q_of(p) as usize * t) as i64;
    Ok(match interval {
        Interval::Point(0) => table.get(e)? as i64,
        Interval::Point(n) if n > 0 => (table.get(2 * n - 2 - e)? + table.get(e - 2 * n)?) as i64,
        Interval::Open(n) if n >= 0 => qt - table.get(2 * n - e)? as i64 - table.get(e - 2 * n)? as i64,
        other => return Err(Error::BadArgument(format!("interval {other} has negative slopes"))),
    })
}

/// Predicted degrees of every interval with floor below `n_max`.
pub fn predicted_degrees(table: &ROrdTable, e: u32, p: u32, t: usize, n_max: i64) -> Result<BTreeMap<Interval, usize>> {
    let mut out = BTreeMap::new();
    for n in 0..n_max {
        for i in [Interval::Point(n), Interval::Open(n)] {
            let d = predicted_degree(i, table, e, p, t)?;
            out.insert(i, d.max(0) as usize);
        }
    }
    Ok(out)
}

/// Compares observed degrees with the `r_ord` formulas for intervals below
/// `n_max`, and checks the formulas' own consequences: open intervals have
/// positive degree, and the running totals land in `[kqt − t, kqt]` and
/// `[kqt, kqt + t]`.
pub fn degree_formula_check(
    observed: &BTreeMap<Interval, usize>,
    table: &ROrdTable,
    e: u32,
    p: u32,
    t: usize,
    n_max: i64,
) -> Result<CheckResult> {
    let mut res = CheckResult::new("degree-formula");
    let qt = (q_of(p) as usize * t) as i64;
    let mut running = 0i64;
    for n in 0..n_max {
        let point = predicted_degree(Interval::Point(n), table, e, p, t)?;
        let open = predicted_degree(Interval::Open(n), table, e, p, t)?;
        for (i, want) in [(Interval::Point(n), point), (Interval::Open(n), open)] {
            let got = observed.get(&i).copied().unwrap_or(0) as i64;
            res.expect(got == want, || format!("deg X_{i} = {got}, formula gives {want}"));
        }
        res.expect(open > 0, || format!("predicted deg X_({n},{}) = {open} is not positive", n + 1));
        let n_k = n * qt;
        let minus = running;
        res.expect(minus >= n_k - t as i64 && minus <= n_k, || {
            format!("total below slope ratio {n} is {minus}, outside [{}, {n_k}]", n_k - t as i64)
        });
        let plus = running + point;
        res.expect(plus >= n_k && plus <= n_k + t as i64, || {
            format!("total up to slope ratio {n} is {plus}, outside [{n_k}, {}]", n_k + t as i64)
        });
        running += point + open;
    }
    Ok(res)
}

/// `deg X_{I, ω} = deg X_{I+1, ω·ω₀²}` for every interval from `(0,1)` on.
pub fn periodicity_check(degrees: &BTreeMap<u32, BTreeMap<Interval, usize>>, p: u32, n_max: i64) -> CheckResult {
    let phi = phi_q(p);
    let mut res = CheckResult::new("degree-periodicity");
    for (&e, deg) in degrees {
        let Some(next) = degrees.get(&((e + 2) % phi)) else { continue };
        for n in 0..n_max - 1 {
            let mut intervals = vec![Interval::Open(n)];
            if n > 0 {
                intervals.push(Interval::Point(n));
            }
            for i in intervals {
                let a = deg.get(&i).copied().unwrap_or(0);
                let b = next.get(&i.succ_shift()).copied().unwrap_or(0);
                res.expect(a == b, || format!("ω₀^{e} {i}: {a} vs ω₀^{} {}: {b}", (e + 2) % phi, i.succ_shift()));
            }
        }
    }
    res
}

/// `((q²/p^m)⌊n/qt⌋, (q²/p^m)(⌊n/qt⌋ + 1))` for each slope index `n`.
pub fn classical_bounds(p: u32, m: u32, t: usize, k: u32) -> Result<Vec<(Q, Q)>> {
    let len = classical_dimension(p, m, t, k)?;
    let q = q_of(p) as i64;
    let scale = Q::new((q * q).into(), pow(p, m).into());
    let qt = q as usize * t;
    Ok((0..len)
        .map(|n| {
            let f = qi((n / qt) as i64);
            (&scale * &f, &scale * (f + qi(1)))
        })
        .collect())
}

/// Weight-two slope lists keyed by the exponent of `ω₀`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BetaTable {
    pub lists: BTreeMap<u32, Vec<Q>>,
}

impl BetaTable {
    /// Parses `{"e": ["a/b", …], …}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut lists = BTreeMap::new();
        for (k, v) in raw {
            let e: u32 = k.trim().parse().map_err(|_| Error::Parse(format!("character exponent {k:?}")))?;
            lists.insert(e, v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?);
        }
        Ok(BetaTable { lists })
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<String, Vec<String>> =
            self.lists.iter().map(|(e, v)| (e.to_string(), v.iter().map(|x| x.to_string()).collect())).collect();
        serde_json::to_string_pretty(&raw).expect("serialisable")
    }
}

/// Slopes in weight `k + 2` and conductor `p^m` predicted from weight-two data
/// at conductor `p^M`.
///
/// Returns the sorted union over `n < p^{m−M}(k+1)` of
/// `p^{M−m}(β_i(ψ·ω₀^{k−2n}) + n)` for `i < p^M t/q`, where `ψ = ω₀^psi_exponent`.
pub fn slope_transfer(beta: &BetaTable, big_m: u32, m: u32, k: u32, p: u32, t: usize, psi_exponent: u32) -> Result<Vec<Q>> {
    if m < big_m {
        return Err(Error::BadArgument(format!("m = {m} is below M = {big_m}")));
    }
    let phi = phi_q(p) as i64;
    let per = classical_dimension(p, big_m, t, 0)?;
    let scale = Q::new(1.into(), pow(p, m - big_m).into());
    let rounds = pow(p, m - big_m) * (k as i64 + 1);
    let mut out = Vec::with_capacity(per * rounds as usize);
    for n in 0..rounds {
        let e = (psi_exponent as i64 + k as i64 - 2 * n).rem_euclid(phi) as u32;
        let list = beta.lists.get(&e).ok_or(Error::MissingCharacterTable(e))?;
        if list.len() < per {
            return Err(Error::LengthMismatch { expected: per, got: list.len() });
        }
        out.extend(list[..per].iter().map(|b| &scale * (b + qi(n))));
    }
    out.sort();
    Ok(out)
}

/// Sum of a slope list, for quick totals in reports.
pub fn slope_sum(slopes: &[Q]) -> Q {
    slopes.iter().fold(Q::zero(), |acc, s| acc + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    #[test]
    fn atkin_lehner_examples() {
        let a = vec![q(0, 1), q(1, 1)];
        assert!(atkin_lehner_check(&a, &a, 0, 2, 3, 1).unwrap().passed);
        let z = vec![q(0, 1), q(0, 1)];
        assert!(!atkin_lehner_check(&z, &z, 0, 2, 3, 1).unwrap().passed);
        assert!(matches!(atkin_lehner_check(&a, &a[..1], 0, 2, 3, 1), Err(Error::LengthMismatch { .. })));

        let slopes: Vec<Q> = (0..9).map(|i| q(i, 3)).collect();
        let partner = atkin_lehner_partner(&slopes, 2);
        let res = atkin_lehner_check(&slopes, &partner, 2, 3, 2, 1).unwrap();
        assert!(res.passed, "{:?}", res.failures);
        assert_eq!(slope_sum(&slopes) + slope_sum(&partner), q(27, 1));
    }

    #[test]
    fn progression_examples() {
        assert_eq!(progression_shape(3, 2, 1).unwrap(), (3, q(1, 1)));
        let base = vec![q(0, 1), q(1, 9), q(1, 3)];
        let alpha = twisted_progressions(&base, 2, 3, 1, 12).unwrap();
        let res = progression_check(&alpha, 2, 3, 1).unwrap();
        assert!(res.passed, "{:?}", res.failures);
        assert!(res.checked > 0);

        let mut bad = alpha.clone();
        bad.get_mut(&0).unwrap()[5] += q(1, 100);
        let res = progression_check(&bad, 2, 3, 1).unwrap();
        assert!(!res.passed);
        assert!(res.failures.iter().any(|f| f.contains("j = 5")));
    }

    #[test]
    fn progressions_for_five_and_two() {
        let (shift, _) = twist_step(5, 2, 1).unwrap();
        let base: Vec<Q> = (0..shift as i64).map(|i| q(i, 5 * shift as i64)).collect();
        let alpha = twisted_progressions(&base, 2, 5, 1, 40).unwrap();
        assert_eq!(alpha.len(), 4);
        assert!(progression_check(&alpha, 2, 5, 1).unwrap().passed);

        let (shift, _) = twist_step(2, 4, 1).unwrap();
        let base: Vec<Q> = (0..shift as i64).map(|i| q(i, 64)).collect();
        let alpha = twisted_progressions(&base, 4, 2, 1, 20).unwrap();
        assert!(progression_check(&alpha, 4, 2, 1).unwrap().passed);
    }

    #[test]
    fn degree_formula_examples() {
        let zero = ROrdTable::new(3, [(0, 0), (1, 0)].into());
        assert_eq!(predicted_degree(Interval::Point(2), &zero, 1, 3, 1).unwrap(), 0);
        assert_eq!(predicted_degree(Interval::Open(2), &zero, 1, 3, 1).unwrap(), 3);

        let table = ROrdTable::new(5, [(0, 1), (1, 0), (2, 2), (3, 1)].into());
        for e in 0..4 {
            let pred = predicted_degrees(&table, e, 5, 2, 6).unwrap();
            let res = degree_formula_check(&pred, &table, e, 5, 2, 6).unwrap();
            assert!(res.passed, "{:?}", res.failures);
            let mut bad = pred.clone();
            *bad.get_mut(&Interval::Open(3)).unwrap() += 1;
            assert!(!degree_formula_check(&bad, &table, e, 5, 2, 6).unwrap().passed);
        }
        let by_omega = (0..4).map(|e| (e, predicted_degrees(&table, e, 5, 2, 6).unwrap())).collect();
        assert!(periodicity_check(&by_omega, 5, 6).passed);

        let missing = ROrdTable::new(5, [(0, 1)].into());
        assert!(matches!(predicted_degree(Interval::Point(1), &missing, 0, 5, 1), Err(Error::MissingCharacterTable(_))));
        assert_eq!(ROrdTable::from_json(5, &table.to_json()).unwrap(), table);
    }

    #[test]
    fn classical_tables() {
        let b = classical_bounds(5, 2, 1, 0).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.iter().all(|(lo, hi)| *lo == q(0, 1) && *hi == q(1, 1)));
        let b = classical_bounds(3, 2, 1, 2).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b[3].0, q(1, 1));
        assert_eq!(classical_bounds(5, 3, 2, 1).unwrap().len(), 2 * 25 * 2);
    }

    #[test]
    fn transfer_examples() {
        let beta = BetaTable { lists: [(0, vec![q(0, 1), q(1, 3), q(2, 3)]), (1, vec![q(1, 6), q(1, 2), q(5, 6)])].into() };
        assert_eq!(slope_transfer(&beta, 2, 2, 0, 3, 1, 0).unwrap(), beta.lists[&0]);
        let out = slope_transfer(&beta, 2, 3, 0, 3, 1, 1).unwrap();
        assert_eq!(out.len(), 9);
        assert_eq!(out.len(), classical_dimension(3, 3, 1, 0).unwrap());

        let zeros = BetaTable { lists: [(0, vec![q(0, 1); 3]), (1, vec![q(0, 1); 3])].into() };
        let ladder = slope_transfer(&zeros, 2, 3, 0, 3, 1, 0).unwrap();
        let expected: Vec<Q> = (0..3).flat_map(|n| vec![q(n, 3); 3]).collect();
        assert_eq!(ladder, expected);

        let partial = BetaTable { lists: [(0, vec![q(0, 1); 3])].into() };
        assert!(matches!(slope_transfer(&partial, 2, 3, 0, 3, 1, 1), Err(Error::MissingCharacterTable(1))));
        assert_eq!(BetaTable::from_json(&beta.to_json()).unwrap(), beta);
    }
}
