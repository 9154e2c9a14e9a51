//! Mahler expansions `f(z) = Σ a_n C(z, n)` of functions on `Z_p`.
//!
//! A function is handled through its samples `f(0), f(1), …`; the coefficients
//! are the iterated forward differences at zero.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::padic::PAdicNum;
use crate::ring::RingElement;
use crate::{Error, Result};

/// Extra samples taken beyond a matrix size by default.
pub const DEFAULT_SAMPLE_MARGIN: usize = 4;

/// Values `f(0), …, f(L - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVector<V> {
    pub values: Vec<V>,
}

impl<V: RingElement> SampleVector<V> {
    pub fn from_fn(len: usize, f: impl FnMut(u64) -> V) -> Self {
        SampleVector { values: (0..len as u64).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The first `N_M` Mahler coefficients of a function.
#[derive(Clone, Debug, PartialEq)]
pub struct MahlerFn<V> {
    pub coeffs: Vec<V>,
}

impl<V: RingElement> MahlerFn<V> {
    pub fn basis_len(&self) -> usize {
        self.coeffs.len()
    }
}

/// Forward differences `Δ^m f(0)` for `m < count`.
pub fn mahler_from_samples<V: RingElement>(samples: &SampleVector<V>, count: usize) -> Result<MahlerFn<V>> {
    if samples.len() < count {
        return Err(Error::NotEnoughSamples { needed: count, got: samples.len() });
    }
    let mut table: Vec<V> = samples.values[..count].to_vec();
    difference_in_place(&mut table);
    Ok(MahlerFn { coeffs: table })
}

/// Replaces `s[k]` by `Δ^k s(0)` for every `k`.
pub(crate) fn difference_in_place<V: RingElement>(s: &mut [V]) {
    let n = s.len();
    for k in 1..n {
        for i in (k..n).rev() {
            let (lo, hi) = s.split_at_mut(i);
            hi[0].sub_assign_ref(&lo[i - 1]);
        }
    }
}

/// Pointwise `Δ^m f` on the first `L - m` sample points.
pub fn delta_samples<V: RingElement>(samples: &SampleVector<V>, m: usize) -> SampleVector<V> {
    let mut values = samples.values.clone();
    for _ in 0..m {
        let next: Vec<V> = values
            .windows(2)
            .map(|w| {
                let mut d = w[1].clone();
                d.sub_assign_ref(&w[0]);
                d
            })
            .collect();
        values = next;
    }
    SampleVector { values }
}

/// Binomial coefficients `C(z, n)` for `n < len` as exact integers.
pub fn binomial_integers(z: u64, len: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(len);
    let mut c = BigUint::from(1u32);
    for n in 0..len as u64 {
        if n > 0 {
            if n > z {
                c = BigUint::from(0u32);
            } else {
                c = c * BigUint::from(z - n + 1) / BigUint::from(n);
            }
        }
        out.push(c.clone());
    }
    out
}

/// `Σ a_n C(z, n)` with exact integer binomials.
pub fn evaluate<V: RingElement>(f: &MahlerFn<V>, z: u64) -> Option<V> {
    let first = f.coeffs.first()?;
    let modulus = BigUint::from(first.modulus());
    let mut acc = first.zero_like();
    for (a, c) in f.coeffs.iter().zip(binomial_integers(z, f.basis_len())) {
        let k = (c % &modulus).to_i128().expect("residue below 2^126");
        acc.add_assign_ref(&a.mul_int(k));
    }
    Some(acc)
}

/// The operator `Δ^m`, which shifts Mahler coefficients down by `m`.
pub fn delta_op<V: RingElement>(f: &MahlerFn<V>, m: usize) -> MahlerFn<V> {
    MahlerFn { coeffs: f.coeffs.iter().skip(m).cloned().collect() }
}

/// Smallest `n` with `v_p(a_j) >= j - n` for every stored coefficient.
///
/// Zero coefficients are only known to vanish modulo `p^N`, so they may force
/// a larger degree than the exact ones. `decided` is the value forced by
/// coefficients of known valuation and `ceiling` the worst case allowed by the
/// unknown digits; the degree is certain when they agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TiltedDegree {
    pub decided: u64,
    pub ceiling: u64,
}

impl TiltedDegree {
    pub fn is_exact(&self) -> bool {
        self.decided == self.ceiling
    }
}

pub fn tilted_degree(f: &MahlerFn<PAdicNum>) -> TiltedDegree {
    let mut decided = 0i64;
    let mut ceiling = 0i64;
    for (j, a) in f.coeffs.iter().enumerate() {
        match a.val_int() {
            Some(v) => decided = decided.max(j as i64 - v as i64),
            None => ceiling = ceiling.max(j as i64 - a.prec() as i64),
        }
    }
    TiltedDegree { decided: decided as u64, ceiling: decided.max(ceiling) as u64 }
}
