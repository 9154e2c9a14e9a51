//! Matrices `δ = (a b; c d)` acting on Mahler coefficients.
//!
//! `δ` sends `h` to `z ↦ χ(cz + d) h((az + b)/(cz + d))`, where the character
//! `χ` factors through `ω` on the torsion part of `cz + d` and through
//! `(1 + T)^{log(·)/q}` on the rest. Column `n` of the resulting matrix holds
//! the Mahler coefficients of the image of `C(z, n)`, with entries in `Z_p[[T]]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::iwasawa::{one_plus_t_pow, CharOfDelta, LambdaElt, Order};
use crate::mahler::difference_in_place;
use crate::matrix::Matrix;
use crate::padic::{binomial_row_raw, padic_log_ratio, q_of, val_factorial, val_q, PAdicNum, ResidueRing};
use crate::{Error, Result};

/// A 2×2 matrix over `Z_p`.
///
/// Entries are treated as exact integers (their canonical representatives)
/// whenever the action is evaluated at a higher precision than they carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeltaMat {
    pub a: PAdicNum,
    pub b: PAdicNum,
    pub c: PAdicNum,
    pub d: PAdicNum,
}

/// Which monoid a matrix belongs to; the U_p monoid is the smaller one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonoidClass {
    UpMonoid,
    M1,
    Neither,
}

/// Serialised form with decimal-string residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaJson {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

impl DeltaMat {
    pub fn new(p: u32, prec: u32, [a, b, c, d]: [i128; 4]) -> Result<Self> {
        Ok(DeltaMat {
            a: PAdicNum::new(p, prec, a)?,
            b: PAdicNum::new(p, prec, b)?,
            c: PAdicNum::new(p, prec, c)?,
            d: PAdicNum::new(p, prec, d)?,
        })
    }

    pub fn identity(p: u32, prec: u32) -> Result<Self> {
        Self::new(p, prec, [1, 0, 0, 1])
    }

    pub fn prime(&self) -> u32 {
        self.a.prime()
    }

    pub fn prec(&self) -> u32 {
        self.a.prec().min(self.b.prec()).min(self.c.prec()).min(self.d.prec())
    }

    pub fn det(&self) -> PAdicNum {
        self.a * self.d - self.b * self.c
    }

    /// The matrix product `self · other`.
    pub fn compose(&self, other: &DeltaMat) -> DeltaMat {
        DeltaMat {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Canonical lifts of all four entries at precision `prec`.
    pub fn lift_to(&self, prec: u32) -> Result<DeltaMat> {
        Ok(DeltaMat {
            a: self.a.lift_to(prec)?,
            b: self.b.lift_to(prec)?,
            c: self.c.lift_to(prec)?,
            d: self.d.lift_to(prec)?,
        })
    }

    pub fn to_json_value(&self) -> DeltaJson {
        DeltaJson {
            a: self.a.residue().to_string(),
            b: self.b.residue().to_string(),
            c: self.c.residue().to_string(),
            d: self.d.residue().to_string(),
        }
    }

    pub fn from_json_value(p: u32, prec: u32, j: &DeltaJson) -> Result<Self> {
        Ok(DeltaMat {
            a: PAdicNum::parse(p, prec, &j.a)?,
            b: PAdicNum::parse(p, prec, &j.b)?,
            c: PAdicNum::parse(p, prec, &j.c)?,
            d: PAdicNum::parse(p, prec, &j.d)?,
        })
    }
}

impl std::fmt::Display for DeltaMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}; {}, {}) mod {}^{}",
            self.a.residue(),
            self.b.residue(),
            self.c.residue(),
            self.d.residue(),
            self.prime(),
            self.prec()
        )
    }
}

pub fn check_monoid(delta: &DeltaMat) -> MonoidClass {
    let p = delta.prime();
    let q = q_of(p) as u128;
    let c_ok = delta.c.prec() >= val_q(p) && delta.c.residue().is_multiple_of(q);
    let d_ok = delta.d.is_unit();
    let det_ok = !delta.det().is_zero();
    if !(c_ok && d_ok && det_ok) {
        return MonoidClass::Neither;
    }
    if delta.a.residue().is_multiple_of(p as u128) {
        MonoidClass::UpMonoid
    } else {
        MonoidClass::M1
    }
}

/// Target precision of matrix entries: coefficients modulo `p^n_target`,
/// series modulo `T^m_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPrecision {
    pub n_target: u32,
    pub m_t: usize,
}

impl ActionPrecision {
    pub fn new(n_target: u32, m_t: usize) -> Self {
        ActionPrecision { n_target, m_t }
    }

    /// Internal precision needed so that binomials up to `C(·, n_max)` and the
    /// series `(1 + T)^g` both come out at the target precision.
    pub fn working(&self, p: u32, n_max: usize) -> u32 {
        let from_columns = val_factorial(n_max as u64, p);
        let from_weight = val_q(p) + val_factorial(self.m_t.saturating_sub(1) as u64, p);
        self.n_target + from_columns.max(from_weight)
    }
}

/// Precomputed samples of `δ` at `z = 0, 1, …`, shared by all columns.
pub struct ActionSampler {
    target: ResidueRing,
    m_t: usize,
    n_max: usize,
    /// `C(f(z), n)` for `n ≤ n_max`, one row per sample point.
    binomials: Vec<Vec<u128>>,
    /// `χ(cz + d)` as a series in `T`.
    weights: Vec<LambdaElt>,
}

impl ActionSampler {
    /// Samples `z = 0..samples` for columns `0..=n_max`.
    pub fn new(delta: &DeltaMat, omega: CharOfDelta, samples: usize, n_max: usize, prec: ActionPrecision) -> Result<Self> {
        if check_monoid(delta) == MonoidClass::Neither {
            return Err(Error::NotInMonoid(delta.to_string()));
        }
        let p = delta.prime();
        let q = q_of(p);
        let work_prec = prec.working(p, n_max);
        let work = ResidueRing::new(p, work_prec)?;
        let target = work.with_prec(prec.n_target)?;
        let dm = delta.lift_to(work_prec)?;
        let d0 = omega_base(&dm.d)?;
        let omega_d0 = target.reduce(omega.eval(&dm.d)?.residue());
        let d0_inv = d0.inverse()?;

        let rows: Vec<(Vec<u128>, LambdaElt)> = (0..samples as i128)
            .into_par_iter()
            .map(|z| -> Result<(Vec<u128>, LambdaElt)> {
                let z = PAdicNum::in_ring(work, work.reduce_i128(z));
                let num = dm.a * z + dm.b;
                let den = dm.c * z + dm.d;
                let f = num * den.inverse()?;
                let binomials = binomial_row_raw(work, f.residue(), n_max, target)?;
                let g = padic_log_ratio(&(den * d0_inv), q)?;
                let weight = one_plus_t_pow(&g, prec.m_t, prec.n_target)?.scale_raw(omega_d0);
                Ok((binomials, weight))
            })
            .collect::<Result<_>>()?;
        let (binomials, weights) = rows.into_iter().unzip();
        Ok(ActionSampler { target, m_t: prec.m_t, n_max, binomials, weights })
    }

    pub fn samples(&self) -> usize {
        self.weights.len()
    }

    /// Entries `P_{m,n}` for `m < samples`.
    pub fn column(&self, n: usize) -> Vec<LambdaElt> {
        assert!(n <= self.n_max, "column {n} beyond precomputed range {}", self.n_max);
        let mut h: Vec<LambdaElt> =
            self.binomials.iter().zip(&self.weights).map(|(row, w)| w.scale_raw(row[n])).collect();
        difference_in_place(&mut h);
        h
    }

    pub fn zero(&self) -> LambdaElt {
        LambdaElt::zero(self.target, self.m_t)
    }
}

/// The torsion part `d₀` of a unit `d`: the Teichmüller lift for odd `p`, `±1` for `p = 2`.
fn omega_base(d: &PAdicNum) -> Result<PAdicNum> {
    crate::padic::teichmuller(d)
}

/// One column of the action matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionColumn {
    pub n: usize,
    pub entries: Vec<LambdaElt>,
}

/// Column `n` of the action of `δ`, rows `0..=m_max`.
pub fn action_column(
    delta: &DeltaMat,
    n: usize,
    omega: CharOfDelta,
    m_max: usize,
    m_t: usize,
    n_target: u32,
) -> Result<ActionColumn> {
    let sampler = ActionSampler::new(delta, omega, m_max + 1, n, ActionPrecision::new(n_target, m_t))?;
    Ok(ActionColumn { n, entries: sampler.column(n) })
}

/// The `size × size` truncation of the action of `δ`.
pub fn action_matrix(delta: &DeltaMat, omega: CharOfDelta, size: usize, prec: ActionPrecision) -> Result<Matrix<LambdaElt>> {
    if size == 0 {
        return Ok(Matrix::from_rows(Vec::new()));
    }
    let sampler = ActionSampler::new(delta, omega, size, size - 1, prec)?;
    let cols: Vec<Vec<LambdaElt>> = (0..size).into_par_iter().map(|n| sampler.column(n)).collect();
    Ok(Matrix::from_cols(size, cols))
}

/// Sum of the action matrices of several matrices.
pub fn summed_action_matrix(
    deltas: &[DeltaMat],
    omega: CharOfDelta,
    size: usize,
    prec: ActionPrecision,
) -> Result<Matrix<LambdaElt>> {
    let parts: Vec<Matrix<LambdaElt>> =
        deltas.par_iter().map(|d| action_matrix(d, omega, size, prec)).collect::<Result<_>>()?;
    let mut iter = parts.into_iter();
    let mut total = iter.next().ok_or_else(|| Error::BadArgument("no matrices to sum".into()))?;
    for m in iter {
        total.add_assign(&m);
    }
    Ok(total)
}

/// Entry-wise lower bound on the `(p, T)`-adic order for a monoid class.
pub fn entry_bound(class: MonoidClass, p: u32, m: usize, n: usize) -> Option<i64> {
    match class {
        MonoidClass::UpMonoid => Some((m as i64 - (n / p as usize) as i64).max(0)),
        MonoidClass::M1 => Some((m as i64 - n as i64).max(0)),
        MonoidClass::Neither => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub m: usize,
    pub n: usize,
    pub bound: i64,
    pub observed: String,
}

/// Outcome of checking every entry of a truncated action matrix against its bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub class: MonoidClass,
    pub size: usize,
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
    /// Smallest certified surplus `order - bound` over all entries.
    pub min_margin: i64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `P_{m,n}(δ)` against the bound of its monoid for `m, n < size`.
///
/// Entries are computed modulo `(p^size, T^size)`, deep enough for every bound
/// in range.
pub fn verify_entry_bounds(delta: &DeltaMat, size: usize, omega: CharOfDelta) -> Result<BoundReport> {
    let prec = ActionPrecision::new(size.max(1) as u32, size.max(1));
    let class = check_monoid(delta);
    if class == MonoidClass::Neither {
        return Err(Error::NotInMonoid(delta.to_string()));
    }
    let matrix = action_matrix(delta, omega, size, prec)?;
    check_bounds(&matrix, |m, n| entry_bound(class, delta.prime(), m, n).unwrap_or(0)).map(|(checked, violations, min_margin)| {
        BoundReport { class, size, checked, violations, min_margin }
    })
}

/// Compares every entry's certified order with `bound(m, n)`.
///
/// Returns the number of entries, the violations and the smallest margin.
pub(crate) fn check_bounds(
    matrix: &Matrix<LambdaElt>,
    bound: impl Fn(usize, usize) -> i64,
) -> Result<(usize, Vec<BoundViolation>, i64)> {
    let mut violations = Vec::new();
    let mut min_margin = i64::MAX;
    for (m, n, entry) in matrix.entries() {
        let b = bound(m, n);
        let order = entry.mlambda_order();
        match order {
            Order::Exact(v) if v < b => {
                violations.push(BoundViolation { m, n, bound: b, observed: order.to_string() })
            }
            Order::AtLeast(v) if v < b => {
                return Err(Error::PrecisionTooLow { row: m, col: n, certified: v, bound: b })
            }
            _ => {}
        }
        min_margin = min_margin.min(order.bound() - b);
    }
    Ok((matrix.rows() * matrix.cols(), violations, min_margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Valuation;
    use proptest::prelude::*;

    fn residues(x: &LambdaElt) -> Vec<u128> {
        x.residues().to_vec()
    }

    #[test]
    fn classification() {
        assert_eq!(check_monoid(&DeltaMat::identity(5, 4).unwrap()), MonoidClass::M1);
        assert_eq!(check_monoid(&DeltaMat::new(5, 4, [5, 0, 0, 1]).unwrap()), MonoidClass::UpMonoid);
        assert_eq!(check_monoid(&DeltaMat::new(5, 4, [1, 0, 1, 1]).unwrap()), MonoidClass::Neither);
        assert_eq!(check_monoid(&DeltaMat::new(5, 4, [1, 0, 0, 5]).unwrap()), MonoidClass::Neither);
        assert_eq!(check_monoid(&DeltaMat::new(2, 6, [2, 1, 2, 1]).unwrap()), MonoidClass::Neither);
        assert_eq!(check_monoid(&DeltaMat::new(2, 6, [2, 1, 4, 1]).unwrap()), MonoidClass::UpMonoid);
    }

    #[test]
    fn identity_gives_unit_vectors() {
        let id = DeltaMat::identity(5, 6).unwrap();
        for n in 0..6 {
            let col = action_column(&id, n, CharOfDelta::new(1), 7, 4, 6).unwrap();
            for (m, e) in col.entries.iter().enumerate() {
                let expected = if m == n { vec![1, 0, 0, 0] } else { vec![0; 4] };
                assert_eq!(residues(e), expected, "entry ({m}, {n})");
            }
        }
    }

    #[test]
    fn scaling_matrix_examples() {
        let delta = DeltaMat::new(5, 10, [5, 0, 0, 1]).unwrap();
        let col = action_column(&delta, 1, CharOfDelta::trivial(), 3, 3, 5).unwrap();
        assert_eq!(residues(&col.entries[1]), vec![5, 0, 0]);
        let col = action_column(&delta, 5, CharOfDelta::trivial(), 3, 3, 5).unwrap();
        assert_eq!(residues(&col.entries[1]), vec![1, 0, 0]);
    }

    /// Values frozen from an independent big-integer computation that forms
    /// `log` through `log(u^{p^j}) / p^j` and binomials through `math.comb` on
    /// integer lifts.
    #[test]
    fn frozen_entries() {
        let cases: [(u32, [i128; 4], u32, u32, [[[u128; 4]; 4]; 4]); 3] = [
            (
                5,
                [5, 1, 5, 2],
                1,
                4,
                [
                    [[182, 69, 152, 85], [91, 347, 76, 355], [446, 382, 606, 380], [402, 434, 322, 435]],
                    [[0, 21, 203, 545], [65, 623, 139, 185], [525, 263, 584, 385], [240, 481, 58, 345]],
                    [[0, 35, 238, 357], [50, 520, 584, 471], [550, 280, 114, 571], [150, 50, 408, 7]],
                    [[0, 450, 565, 229], [250, 400, 300, 262], [500, 550, 295, 187], [375, 525, 495, 54]],
                ],
            ),
            (
                2,
                [2, 1, 4, 3],
                1,
                6,
                [
                    [[63, 3, 26, 42], [21, 1, 30, 14], [57, 21, 54, 38], [11, 31, 34, 50]],
                    [[0, 7, 47, 50], [6, 49, 47, 62], [45, 47, 52, 50], [27, 37, 8, 38]],
                    [[0, 36, 49, 45], [48, 24, 11, 11], [52, 26, 3, 25], [40, 26, 61, 15]],
                    [[0, 32, 44, 45], [0, 40, 10, 43], [0, 32, 61, 9], [24, 52, 7, 63]],
                ],
            ),
            (
                3,
                [3, 1, 3, 2],
                1,
                5,
                [
                    [[242, 154, 215, 79], [121, 77, 229, 161], [152, 163, 125, 142], [167, 40, 59, 172]],
                    [[0, 229, 121, 217], [24, 35, 137, 173], [198, 166, 130, 19], [179, 120, 82, 201]],
                    [[0, 93, 239, 55], [225, 75, 106, 233], [126, 129, 230, 199], [12, 215, 2, 104]],
                    [[0, 180, 153, 43], [81, 90, 27, 26], [81, 45, 153, 79], [81, 126, 123, 97]],
                ],
            ),
        ];
        for (p, entries, e, n_target, expected) in cases {
            let delta = DeltaMat::new(p, 30, entries).unwrap();
            let m = action_matrix(&delta, CharOfDelta::new(e), 4, ActionPrecision::new(n_target, 4)).unwrap();
            for (row, exp_row) in expected.iter().enumerate() {
                for (col, exp) in exp_row.iter().enumerate() {
                    assert_eq!(residues(m.get(row, col)), exp.to_vec(), "p={p} ({row}, {col})");
                }
            }
        }
        let delta = DeltaMat::new(5, 30, [5, 1, 5, 2]).unwrap();
        let m = action_matrix(&delta, CharOfDelta::trivial(), 4, ActionPrecision::new(4, 4)).unwrap();
        assert_eq!(residues(m.get(0, 0)), vec![1, 567, 461, 155]);
        assert_eq!(residues(m.get(3, 3)), vec![500, 75, 535, 172]);
    }

    #[test]
    fn bound_report_example() {
        let singular = DeltaMat::new(5, 40, [5, 1, 5, 1]).unwrap();
        assert!(matches!(verify_entry_bounds(&singular, 5, CharOfDelta::trivial()), Err(Error::NotInMonoid(_))));
        let delta = DeltaMat::new(5, 40, [5, 1, 5, 2]).unwrap();
        let report = verify_entry_bounds(&delta, 25, CharOfDelta::trivial()).unwrap();
        assert!(report.passed());
        assert_eq!(report.checked, 625);
        assert_eq!(report.class, MonoidClass::UpMonoid);
    }

    #[test]
    fn digit_sum_operator_is_not_compact() {
        for p in [3u32, 5] {
            let deltas: Vec<DeltaMat> =
                (0..p as i128).map(|i| DeltaMat::new(p, 20, [p as i128, i, 0, 1]).unwrap()).collect();
            let col = (p * p) as usize;
            let size = col + 1;
            let m = summed_action_matrix(&deltas, CharOfDelta::trivial(), size, ActionPrecision::new(4, 1)).unwrap();
            let entry = m.get(p as usize, col).coeff(0);
            assert!(matches!(entry.val_p(), Valuation::Exact(v) if v < crate::Q::from_integer(2.into())), "p = {p}");
        }
    }

    fn random_m1(p: u32, seed: [i64; 4]) -> DeltaMat {
        let q = q_of(p) as i128;
        let mut d = seed[3] as i128;
        if d.rem_euclid(p as i128) == 0 {
            d += 1;
        }
        let mut a = seed[0] as i128;
        let b = seed[1] as i128;
        let c = q * seed[2] as i128;
        if a * d - b * c == 0 {
            a += p as i128;
        }
        DeltaMat::new(p, 40, [a, b, c, d]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn action_is_a_right_action(p in prop::sample::select(vec![2u32, 3, 5]),
                                    s1 in prop::array::uniform4(-30i64..30),
                                    s2 in prop::array::uniform4(-30i64..30),
                                    e in 0u32..4) {
            let (d1, d2) = (random_m1(p, s1), random_m1(p, s2));
            let size = 10;
            let prec = ActionPrecision::new(size as u32, size);
            let omega = CharOfDelta::new(e);
            let p1 = action_matrix(&d1, omega, size, prec).unwrap();
            let p2 = action_matrix(&d2, omega, size, prec).unwrap();
            let composed = action_matrix(&d1.compose(&d2), omega, size, prec).unwrap();
            let product = p2.mul(&p1);
            for (m, n, entry) in composed.entries() {
                // Dropped rows k >= size enter through entries of order >= size - n.
                let diff = entry.checked_sub(product.get(m, n)).unwrap();
                prop_assert!(diff.mlambda_order().certifies((size - n) as i64), "({m}, {n}): {diff:?}");
            }
        }

        #[test]
        fn up_monoid_columns_are_short(p in prop::sample::select(vec![3u32, 5]),
                                       s in prop::array::uniform4(-30i64..30), r in 1usize..4) {
            let mut delta = random_m1(p, s);
            delta.a = delta.a.mul_int(p as i128);
            prop_assume!(check_monoid(&delta) == MonoidClass::UpMonoid);
            let size = 12;
            let m = action_matrix(&delta, CharOfDelta::trivial(), size, ActionPrecision::new(size as u32, size)).unwrap();
            for n in 0..size {
                let nonzero = (0..size)
                    .filter(|&row| !m.get(row, n).reduce(r as u32, r).unwrap().mlambda_order().certifies(r as i64))
                    .count();
                prop_assert!(nonzero <= n / p as usize + r);
            }
        }
    }
}
