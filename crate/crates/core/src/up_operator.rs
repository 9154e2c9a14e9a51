//! The U_p operator as a `t × t` array of sums of monoid actions.
//!
//! An [`UpSpec`] lists, for each cell `(i, j)`, the matrices whose actions are
//! summed to map input component `j` into output component `i`. Assembly lays
//! the Mahler blocks out in the interleaved order `1₀, …, 1_{t−1}, z₀, …`, so
//! row `m·t + i` is Mahler degree `m` of component `i`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::iwasawa::{CharOfDelta, LambdaElt, Order, DEFAULT_TRUNCATION};
use crate::matrix::Matrix;
use crate::monoid::{action_matrix, check_bounds, check_monoid, ActionPrecision, BoundReport, DeltaJson, DeltaMat, MonoidClass};
use crate::padic::{q_of, ResidueRing};
use crate::ring::RingElement;
use crate::{Error, Result};

/// Where an [`UpSpec`] came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Synthetic { seed: u64 },
    Ingested { path: String },
}

/// One matrix placed in cell `(i, j)`: it maps component `j` into component `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpCell {
    pub i: usize,
    pub j: usize,
    pub delta: DeltaMat,
}

/// Coset data for the U_p operator at prime `p` with `t` components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpSpec {
    pub p: u32,
    pub t: usize,
    /// p-adic precision of the matrix entries and of assembled coefficients.
    pub n: u32,
    pub m_t: usize,
    pub cells: Vec<UpCell>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CellJson {
    i: usize,
    j: usize,
    delta: DeltaJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct UpSpecJson {
    p: u32,
    t: usize,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "M_T", default, skip_serializing_if = "Option::is_none")]
    m_t: Option<usize>,
    cells: Vec<CellJson>,
}

impl UpSpec {
    /// Matrices in cell `(i, j)`, in listing order.
    pub fn cell(&self, i: usize, j: usize) -> impl Iterator<Item = &DeltaMat> {
        self.cells.iter().filter(move |c| c.i == i && c.j == j).map(|c| &c.delta)
    }

    /// Checks cell indices, monoid membership and the `p`-per-row/column count.
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvariantViolation("t must be positive".into()));
        }
        let p = self.p as usize;
        let mut rows = vec![0usize; self.t];
        let mut cols = vec![0usize; self.t];
        for (k, cell) in self.cells.iter().enumerate() {
            if cell.i >= self.t || cell.j >= self.t {
                return Err(Error::InvariantViolation(format!(
                    "cell {k} at ({}, {}) is outside the {t} x {t} grid",
                    cell.i,
                    cell.j,
                    t = self.t
                )));
            }
            if cell.delta.prime() != self.p {
                return Err(Error::InvariantViolation(format!("cell {k} is over p = {}", cell.delta.prime())));
            }
            if check_monoid(&cell.delta) != MonoidClass::UpMonoid {
                return Err(Error::InvariantViolation(format!(
                    "matrix {} at ({}, {}) is not in the U_p monoid ({})",
                    cell.delta,
                    cell.i,
                    cell.j,
                    up_monoid_failure(&cell.delta)
                )));
            }
            rows[cell.i] += 1;
            cols[cell.j] += 1;
        }
        for (idx, (&r, &c)) in rows.iter().zip(&cols).enumerate() {
            if r != p {
                return Err(Error::InvariantViolation(format!("row {idx} holds {r} matrices, expected {p}")));
            }
            if c != p {
                return Err(Error::InvariantViolation(format!("column {idx} holds {c} matrices, expected {p}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let j = UpSpecJson {
            p: self.p,
            t: self.t,
            n: self.n,
            m_t: Some(self.m_t),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson { i: c.i, j: c.j, delta: c.delta.to_json_value() })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("serialisable")
    }

    /// Parses and validates the JSON form.
    pub fn parse(text: &str, provenance: Provenance) -> Result<Self> {
        let j: UpSpecJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        ResidueRing::new(j.p, j.n).map_err(|e| Error::Parse(e.to_string()))?;
        let cells = j
            .cells
            .iter()
            .map(|c| {
                let delta = DeltaMat::from_json_value(j.p, j.n, &c.delta).map_err(|e| Error::Parse(e.to_string()))?;
                Ok(UpCell { i: c.i, j: c.j, delta })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = UpSpec { p: j.p, t: j.t, n: j.n, m_t: j.m_t.unwrap_or(DEFAULT_TRUNCATION), cells, provenance };
        spec.validate()?;
        Ok(spec)
    }
}

fn up_monoid_failure(delta: &DeltaMat) -> &'static str {
    let p = delta.prime();
    if !delta.d.is_unit() {
        "d is not a unit"
    } else if !delta.c.residue().is_multiple_of(q_of(p) as u128) {
        "q does not divide c"
    } else if delta.det().is_zero() {
        "determinant vanishes"
    } else {
        "p does not divide a"
    }
}

/// Reads an [`UpSpec`] from a JSON file.
pub fn load_up(path: impl AsRef<Path>) -> Result<UpSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    UpSpec::parse(&text, Provenance::Ingested { path: path.display().to_string() })
}

/// Writes the JSON form of `spec` to `path`.
pub fn save_up(spec: &UpSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, spec.to_json()).map_err(|e| Error::io(path, e))
}

/// Knobs for [`synth_up_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthOptions {
    /// Require `v_p(det) = 1` exactly rather than just a nonzero determinant.
    pub det_valuation_one: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { det_valuation_one: true }
    }
}

fn uniform(rng: &mut impl Rng, ring: ResidueRing) -> u128 {
    rng.gen_range(0..ring.modulus())
}

fn uniform_unit(rng: &mut impl Rng, ring: ResidueRing) -> u128 {
    loop {
        let x = uniform(rng, ring);
        if !x.is_multiple_of(ring.p() as u128) {
            return x;
        }
    }
}

/// A uniformly random matrix with `p | a`, `q | c`, `d` a unit and `det ≠ 0`.
pub fn random_up_delta(rng: &mut impl Rng, p: u32, prec: u32, det_valuation_one: bool) -> Result<DeltaMat> {
    let ring = ResidueRing::new(p, prec)?;
    let q = q_of(p) as u128;
    loop {
        let a = ring.mul(p as u128, uniform(rng, ring));
        let b = uniform(rng, ring);
        let c = ring.mul(q, uniform(rng, ring));
        let d = uniform_unit(rng, ring);
        let delta = DeltaMat::new(p, prec, [a as i128, b as i128, c as i128, d as i128])?;
        let v = delta.det().val_int();
        let ok = if det_valuation_one { v == Some(1) } else { v.is_some() };
        if ok {
            return Ok(delta);
        }
    }
}

/// A uniformly random matrix with `a` and `d` units, `q | c` and `det ≠ 0`.
pub fn random_m1_delta(rng: &mut impl Rng, p: u32, prec: u32) -> Result<DeltaMat> {
    let ring = ResidueRing::new(p, prec)?;
    let q = q_of(p) as u128;
    loop {
        let a = uniform_unit(rng, ring);
        let b = uniform(rng, ring);
        let c = ring.mul(q, uniform(rng, ring));
        let d = uniform_unit(rng, ring);
        let delta = DeltaMat::new(p, prec, [a as i128, b as i128, c as i128, d as i128])?;
        if !delta.det().is_zero() {
            return Ok(delta);
        }
    }
}

/// Random coset data: `p` seeded permutations, one matrix per `(σ_k(j), j)`.
pub fn synth_up(t: usize, p: u32, n: u32, m_t: usize, seed: u64) -> Result<UpSpec> {
    synth_up_with(t, p, n, m_t, seed, SynthOptions::default())
}

pub fn synth_up_with(t: usize, p: u32, n: u32, m_t: usize, seed: u64, opts: SynthOptions) -> Result<UpSpec> {
    if t == 0 {
        return Err(Error::BadArgument("t must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::with_capacity(p as usize * t);
    for _ in 0..p {
        let mut sigma: Vec<usize> = (0..t).collect();
        sigma.shuffle(&mut rng);
        for (j, &i) in sigma.iter().enumerate() {
            let delta = random_up_delta(&mut rng, p, n, opts.det_valuation_one)?;
            cells.push(UpCell { i, j, delta });
        }
    }
    Ok(UpSpec { p, t, n, m_t, cells, provenance: Provenance::Synthetic { seed } })
}

/// The assembled operator truncated to `n_blocks` Mahler degrees per component.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    pub p: u32,
    pub t: usize,
    pub n_blocks: usize,
    pub omega: CharOfDelta,
    pub matrix: Matrix<LambdaElt>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BlockMatrixJson {
    p: u32,
    t: usize,
    n_blocks: usize,
    omega_exponent: u32,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "M_T")]
    m_t: usize,
    /// Row-major entries, each a list of decimal coefficients.
    entries: Vec<Vec<Vec<String>>>,
}

impl BlockMatrix {
    pub fn new(p: u32, t: usize, omega: CharOfDelta, matrix: Matrix<LambdaElt>) -> Result<Self> {
        if t == 0 || matrix.rows() != matrix.cols() || !matrix.rows().is_multiple_of(t) {
            return Err(Error::BadArgument(format!(
                "a {} x {} matrix is not a square of {t}-blocks",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(BlockMatrix { p, t, n_blocks: matrix.rows() / t, omega, matrix })
    }

    pub fn size(&self) -> usize {
        self.t * self.n_blocks
    }

    /// Entry for Mahler degrees `(m, n)` of components `(i, j)`.
    pub fn block_entry(&self, m: usize, i: usize, n: usize, j: usize) -> &LambdaElt {
        self.matrix.get(m * self.t + i, n * self.t + j)
    }

    fn template(&self) -> Option<&LambdaElt> {
        self.matrix.entries().next().map(|(_, _, e)| e)
    }

    pub fn prec(&self) -> u32 {
        self.template().map_or(0, LambdaElt::prec)
    }

    pub fn truncation(&self) -> usize {
        self.template().map_or(0, LambdaElt::truncation)
    }

    pub fn to_json(&self) -> String {
        let size = self.size();
        let entries = (0..size)
            .map(|r| {
                self.matrix
                    .row(r)
                    .iter()
                    .map(|e| e.residues().iter().map(u128::to_string).collect())
                    .collect()
            })
            .collect();
        let j = BlockMatrixJson {
            p: self.p,
            t: self.t,
            n_blocks: self.n_blocks,
            omega_exponent: self.omega.exponent,
            n: self.prec(),
            m_t: self.truncation(),
            entries,
        };
        serde_json::to_string(&j).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: BlockMatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let ring = ResidueRing::new(j.p, j.n)?;
        let rows = j
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|coeffs| {
                        if coeffs.len() != j.m_t {
                            return Err(Error::LengthMismatch { expected: j.m_t, got: coeffs.len() });
                        }
                        let res = coeffs
                            .iter()
                            .map(|s| s.trim().parse::<u128>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(LambdaElt::from_residues(ring, res))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != j.t * j.n_blocks || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(Error::Parse("entries do not form a t·n_blocks square".into()));
        }
        BlockMatrix::new(j.p, j.t, CharOfDelta::new(j.omega_exponent), Matrix::from_rows(rows))
    }
}

/// Assembles at the spec's own precision `(N, M_T)`.
pub fn assemble(spec: &UpSpec, n_blocks: usize, omega: CharOfDelta) -> Result<BlockMatrix> {
    assemble_at(spec, n_blocks, omega, ActionPrecision::new(spec.n, spec.m_t))
}

/// Sums the action of every matrix of cell `(i, j)` into block `(i, j)`.
pub fn assemble_at(spec: &UpSpec, n_blocks: usize, omega: CharOfDelta, prec: ActionPrecision) -> Result<BlockMatrix> {
    if n_blocks == 0 {
        return Err(Error::BadArgument("n_blocks must be positive".into()));
    }
    let t = spec.t;
    let ring = ResidueRing::new(spec.p, prec.n_target)?;
    let parts: Vec<Matrix<LambdaElt>> =
        spec.cells.par_iter().map(|c| action_matrix(&c.delta, omega, n_blocks, prec)).collect::<Result<_>>()?;
    let size = t * n_blocks;
    let mut out = Matrix::filled(size, size, LambdaElt::zero(ring, prec.m_t));
    for (cell, part) in spec.cells.iter().zip(&parts) {
        for (m, n, e) in part.entries() {
            out.get_mut(m * t + cell.i, n * t + cell.j).add_assign_ref(e);
        }
    }
    BlockMatrix::new(spec.p, t, omega, out)
}

/// Block-level bound `max(⌊row/t⌋ − ⌊col/pt⌋, 0)`.
pub fn block_entry_bound(p: u32, t: usize, row: usize, col: usize) -> i64 {
    ((row / t) as i64 - (col / (p as usize * t)) as i64).max(0)
}

/// Checks every entry of an assembled operator against [`block_entry_bound`].
pub fn verify_block_bounds(bm: &BlockMatrix) -> Result<BoundReport> {
    let (checked, violations, min_margin) =
        check_bounds(&bm.matrix, |row, col| block_entry_bound(bm.p, bm.t, row, col))?;
    Ok(BoundReport { class: MonoidClass::UpMonoid, size: bm.size(), checked, violations, min_margin })
}

/// `T^shift · body`, with `shift` possibly negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedElt {
    pub shift: i64,
    pub body: LambdaElt,
}

impl ShiftedElt {
    pub fn halo_t_order(&self) -> Order {
        self.body.halo_t_order().shift(self.shift)
    }

    /// The element as a power series when no negative power of `T` survives.
    ///
    /// A negative shift shortens the truncation by the same amount.
    pub fn to_lambda(&self) -> Option<LambdaElt> {
        let m = self.body.truncation();
        if self.shift >= 0 {
            return Some(self.body.mul_t_pow(self.shift as usize));
        }
        let k = (-self.shift) as usize;
        if k > m || self.body.residues()[..k].iter().any(|&c| c != 0) {
            return None;
        }
        Some(LambdaElt::from_residues(self.body.ring(), self.body.residues()[k..].to_vec()))
    }
}

/// The operator conjugated by `diag(T^{⌊row/t⌋})`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledMatrix {
    pub p: u32,
    pub t: usize,
    pub size: usize,
    entries: Vec<ShiftedElt>,
    /// Smallest certified surplus over the column bound.
    pub min_margin: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ShiftedJson {
    shift: i64,
    coeffs: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RescaledJson {
    p: u32,
    t: usize,
    size: usize,
    /// Row-major entries `T^shift · Σ coeffs[i] T^i`.
    entries: Vec<Vec<ShiftedJson>>,
}

impl RescaledMatrix {
    pub fn get(&self, row: usize, col: usize) -> &ShiftedElt {
        &self.entries[row * self.size + col]
    }

    pub fn to_json(&self) -> String {
        let entries = self
            .entries
            .chunks(self.size.max(1))
            .map(|row| {
                row.iter()
                    .map(|e| ShiftedJson { shift: e.shift, coeffs: e.body.residues().iter().map(u128::to_string).collect() })
                    .collect()
            })
            .collect();
        serde_json::to_string(&RescaledJson { p: self.p, t: self.t, size: self.size, entries }).expect("serialisable")
    }
}

/// Lower bound on the T-order of column `col` in the rescaled basis.
pub fn rescaled_column_bound(p: u32, t: usize, col: usize) -> i64 {
    (col / t) as i64 - (col / (p as usize * t)) as i64
}

/// Entry `(row, col)` becomes `T^{⌊col/t⌋ − ⌊row/t⌋} · entry`.
///
/// Fails with [`Error::NegativePowerUncertified`] when the precision of an
/// entry cannot certify the column bound, and with
/// [`Error::InvariantViolation`] when an exact order falls below it.
pub fn rescale_halo_basis(bm: &BlockMatrix) -> Result<RescaledMatrix> {
    let t = bm.t;
    let size = bm.size();
    let mut entries = Vec::with_capacity(size * size);
    let mut min_margin = i64::MAX;
    for (row, col, e) in bm.matrix.entries() {
        let shifted = ShiftedElt { shift: (col / t) as i64 - (row / t) as i64, body: e.clone() };
        let need = rescaled_column_bound(bm.p, t, col);
        let order = shifted.halo_t_order();
        if !order.certifies(need) {
            return Err(match order {
                Order::Exact(v) => Error::InvariantViolation(format!(
                    "rescaled entry ({row}, {col}) has T-order {v} below the column bound {need}"
                )),
                Order::AtLeast(_) => Error::NegativePowerUncertified { row, col },
            });
        }
        min_margin = min_margin.min(order.bound() - need);
        entries.push(shifted);
    }
    Ok(RescaledMatrix { p: bm.p, t, size, entries, min_margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(spec: &UpSpec) -> (Vec<usize>, Vec<usize>) {
        let mut rows = vec![0; spec.t];
        let mut cols = vec![0; spec.t];
        for c in &spec.cells {
            rows[c.i] += 1;
            cols[c.j] += 1;
        }
        (rows, cols)
    }

    #[test]
    fn synthetic_shape() {
        let one = synth_up(1, 3, 8, 8, 1).unwrap();
        assert_eq!(one.cells.len(), 3);
        assert!(one.cells.iter().all(|c| c.i == 0 && c.j == 0));
        let two = synth_up(2, 3, 8, 8, 42).unwrap();
        assert_eq!(counts(&two), (vec![3, 3], vec![3, 3]));
        two.validate().unwrap();
        assert_eq!(two, synth_up(2, 3, 8, 8, 42).unwrap());
        assert_ne!(two, synth_up(2, 3, 8, 8, 43).unwrap());
        for c in &two.cells {
            assert_eq!(c.delta.det().val_int(), Some(1));
        }
    }

    #[test]
    fn synthetic_dets_for_two() {
        let spec = synth_up(3, 2, 10, 8, 7).unwrap();
        spec.validate().unwrap();
        for c in &spec.cells {
            assert_eq!(c.delta.det().val_int(), Some(1));
        }
        let loose = synth_up_with(3, 2, 10, 8, 7, SynthOptions { det_valuation_one: false }).unwrap();
        loose.validate().unwrap();
    }

    fn spec_json(cells: &[(usize, usize, [i64; 4])]) -> String {
        let cells: Vec<String> = cells
            .iter()
            .map(|(i, j, [a, b, c, d])| {
                format!(r#"{{"i":{i},"j":{j},"delta":{{"a":"{a}","b":"{b}","c":"{c}","d":"{d}"}}}}"#)
            })
            .collect();
        format!(r#"{{"p":3,"t":2,"N":6,"cells":[{}]}}"#, cells.join(","))
    }

    #[test]
    fn load_and_validate() {
        let good = [
            (0, 0, [3, 0, 0, 1]),
            (0, 0, [3, 1, 0, 1]),
            (0, 1, [3, 2, 3, 1]),
            (1, 0, [3, 0, 3, 2]),
            (1, 1, [6, 1, 0, 1]),
            (1, 1, [3, 1, 9, 2]),
        ];
        let text = spec_json(&good);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.json");
        std::fs::write(&path, &text).unwrap();
        let spec = load_up(&path).unwrap();
        assert_eq!((spec.p, spec.t, spec.n, spec.m_t, spec.cells.len()), (3, 2, 6, DEFAULT_TRUNCATION, 6));
        assert!(matches!(spec.provenance, Provenance::Ingested { .. }));

        let back = UpSpec::parse(&spec.to_json(), spec.provenance.clone()).unwrap();
        assert_eq!(back.cells, spec.cells);

        let short = spec_json(&good[..5]);
        assert!(matches!(UpSpec::parse(&short, Provenance::Synthetic { seed: 0 }), Err(Error::InvariantViolation(_))));

        let mut bad = good;
        bad[0].2 = [1, 0, 0, 1];
        let err = UpSpec::parse(&spec_json(&bad), Provenance::Synthetic { seed: 0 }).unwrap_err();
        match err {
            Error::InvariantViolation(msg) => assert!(msg.contains("p does not divide a"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(UpSpec::parse("{", Provenance::Synthetic { seed: 0 }), Err(Error::Parse(_))));
    }

    #[test]
    fn triple_scaling_matrix() {
        let delta = DeltaMat::new(3, 8, [3, 0, 0, 1]).unwrap();
        let cells = (0..3).map(|_| UpCell { i: 0, j: 0, delta }).collect();
        let spec = UpSpec { p: 3, t: 1, n: 8, m_t: 4, cells, provenance: Provenance::Synthetic { seed: 0 } };
        spec.validate().unwrap();
        let bm = assemble(&spec, 3, CharOfDelta::trivial()).unwrap();
        assert_eq!(bm.matrix.get(1, 1).residues(), &[9, 0, 0, 0]);
        assert_eq!(bm.matrix.get(0, 0).residues(), &[3, 0, 0, 0]);
        assert!(bm.matrix.get(0, 1).is_zero());
    }

    #[test]
    fn one_block_is_weight_action_on_constants() {
        let spec = synth_up(2, 3, 8, 6, 5).unwrap();
        let omega = CharOfDelta::new(1);
        let bm = assemble(&spec, 1, omega).unwrap();
        let prec = ActionPrecision::new(8, 6);
        for i in 0..2 {
            for j in 0..2 {
                let mut expected = LambdaElt::zero(ResidueRing::new(3, 8).unwrap(), 6);
                for d in spec.cell(i, j) {
                    let m = action_matrix(d, omega, 1, prec).unwrap();
                    expected = expected.checked_add(m.get(0, 0)).unwrap();
                }
                assert_eq!(bm.matrix.get(i, j), &expected);
            }
        }
    }

    #[test]
    fn empty_cells_give_zero_blocks() {
        let spec = synth_up(3, 3, 8, 6, 11).unwrap();
        let bm = assemble(&spec, 2, CharOfDelta::trivial()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if spec.cell(i, j).next().is_none() {
                    for m in 0..2 {
                        for n in 0..2 {
                            assert!(bm.block_entry(m, i, n, j).is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = synth_up(2, 5, 6, 5, 3).unwrap();
        let bm = assemble(&spec, 2, CharOfDelta::new(2)).unwrap();
        assert_eq!(BlockMatrix::from_json(&bm.to_json()).unwrap(), bm);
    }

    fn lam(c: &[i128]) -> LambdaElt {
        LambdaElt::from_ints(3, 6, c).unwrap()
    }

    #[test]
    fn rescale_examples() {
        let z = lam(&[0, 0, 0, 0]);
        let diag = Matrix::from_rows(vec![vec![lam(&[1, 0, 0, 0]), z.clone()], vec![z.clone(), lam(&[3, 0, 0, 0])]]);
        let r = rescale_halo_basis(&BlockMatrix::new(3, 1, CharOfDelta::trivial(), diag).unwrap()).unwrap();
        assert_eq!(r.get(1, 1).to_lambda().unwrap(), lam(&[3, 0, 0, 0]));

        let m = Matrix::from_rows(vec![vec![z.clone(), z.clone()], vec![lam(&[0, 2, 1, 0]), z.clone()]]);
        let r = rescale_halo_basis(&BlockMatrix::new(3, 1, CharOfDelta::trivial(), m).unwrap()).unwrap();
        assert_eq!(r.get(1, 0).to_lambda().unwrap().residues(), &[2, 1, 0]);

        let m = Matrix::from_rows(vec![vec![z.clone(), z.clone()], vec![lam(&[1, 0, 0, 0]), z.clone()]]);
        let bm = BlockMatrix::new(3, 1, CharOfDelta::trivial(), m).unwrap();
        assert!(matches!(rescale_halo_basis(&bm), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn rescaled_synthetic_columns() {
        let spec = synth_up(1, 3, 14, 14, 42).unwrap();
        let bm = assemble(&spec, 12, CharOfDelta::new(1)).unwrap();
        let r = rescale_halo_basis(&bm).unwrap();
        assert!(r.min_margin >= 0);
        for col in 0..12 {
            for row in 0..12 {
                assert!(r.get(row, col).halo_t_order().certifies(rescaled_column_bound(3, 1, col)));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn block_bounds_hold(seed in any::<u64>(), pt in prop::sample::select(vec![(2u32, 1usize), (2, 2), (3, 1), (3, 2), (5, 1)])) {
            let (p, t) = pt;
            let spec = synth_up(t, p, 10, 10, seed).unwrap();
            let bm = assemble(&spec, 10 / t, CharOfDelta::new(1)).unwrap();
            let report = verify_block_bounds(&bm).unwrap();
            prop_assert!(report.passed(), "{:?}", report.violations);
        }

        #[test]
        fn assembly_is_linear_in_cells(seed in any::<u64>(), split in 1usize..5) {
            let spec = synth_up(2, 3, 8, 6, seed).unwrap();
            let omega = CharOfDelta::new(1);
            let whole = assemble(&spec, 3, omega).unwrap();
            let (left, right) = spec.cells.split_at(split);
            let part = |cells: &[UpCell]| {
                let s = UpSpec { cells: cells.to_vec(), ..spec.clone() };
                assemble(&s, 3, omega).unwrap()
            };
            let mut sum = part(left).matrix;
            sum.add_assign(&part(right).matrix);
            prop_assert_eq!(sum, whole.matrix);
        }

        #[test]
        fn assembly_is_deterministic(seed in any::<u64>()) {
            let spec = synth_up(2, 5, 6, 5, seed).unwrap();
            let a = assemble(&spec, 3, CharOfDelta::new(3)).unwrap();
            let b = assemble(&spec, 3, CharOfDelta::new(3)).unwrap();
            prop_assert_eq!(a.to_json(), b.to_json());
        }
    }
}
