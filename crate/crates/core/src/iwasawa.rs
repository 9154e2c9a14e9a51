//! Truncated elements of the Iwasawa algebra `Z_p[[T]]`.
//!
//! A [`LambdaElt`] stores the first `M_T` coefficients of a power series, each
//! modulo `p^N`. Every coefficient shares one [`ResidueRing`], so products run
//! on raw residues.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::padic::{binomial_row_raw, teichmuller, PAdicNum, ResidueRing, Valuation};
use crate::ring::RingElement;
use crate::{Error, Result, Q};

/// Default T-adic truncation length.
pub const DEFAULT_TRUNCATION: usize = 24;

/// A certified integer order: exact, or only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Exact(i64),
    AtLeast(i64),
}

impl Order {
    pub fn bound(&self) -> i64 {
        match *self {
            Order::Exact(v) | Order::AtLeast(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Order::Exact(_))
    }

    /// True when the order is known to be at least `k`.
    pub fn certifies(&self, k: i64) -> bool {
        self.bound() >= k
    }

    pub fn shift(&self, by: i64) -> Order {
        match *self {
            Order::Exact(v) => Order::Exact(v + by),
            Order::AtLeast(v) => Order::AtLeast(v + by),
        }
    }

    /// Minimum of exact candidates against lower bounds from unknown digits.
    pub(crate) fn from_parts(exact_min: Option<i64>, bound_min: i64) -> Order {
        match exact_min {
            Some(e) if e <= bound_min => Order::Exact(e),
            _ => Order::AtLeast(bound_min),
        }
    }

    /// Caps the order at `r`, the depth to which a value is known.
    pub fn capped(&self, r: i64) -> Order {
        match *self {
            Order::Exact(v) if v < r => Order::Exact(v),
            other => Order::AtLeast(other.bound().min(r)),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact(v) => write!(f, "{v}"),
            Order::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// An element of `Z_p[[T]]` modulo `(p^N, T^M_T)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LambdaElt {
    ring: ResidueRing,
    coeffs: Vec<u128>,
}

impl LambdaElt {
    pub fn zero(ring: ResidueRing, m_t: usize) -> Self {
        LambdaElt { ring, coeffs: vec![0; m_t] }
    }

    pub fn one(ring: ResidueRing, m_t: usize) -> Self {
        let mut x = Self::zero(ring, m_t);
        if m_t > 0 {
            x.coeffs[0] = ring.reduce(1);
        }
        x
    }

    /// The variable `T`.
    pub fn t_var(ring: ResidueRing, m_t: usize) -> Self {
        let mut x = Self::zero(ring, m_t);
        if m_t > 1 {
            x.coeffs[1] = ring.reduce(1);
        }
        x
    }

    /// Builds from raw residues, reducing each one.
    pub fn from_residues(ring: ResidueRing, coeffs: Vec<u128>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| ring.reduce(c)).collect();
        LambdaElt { ring, coeffs }
    }

    pub fn from_ints(p: u32, prec: u32, coeffs: &[i128]) -> Result<Self> {
        let ring = ResidueRing::new(p, prec)?;
        Ok(LambdaElt { ring, coeffs: coeffs.iter().map(|&c| ring.reduce_i128(c)).collect() })
    }

    pub fn constant(c: &PAdicNum, m_t: usize) -> Self {
        let mut x = Self::zero(c.ring(), m_t);
        if m_t > 0 {
            x.coeffs[0] = c.residue();
        }
        x
    }

    #[inline]
    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn prime(&self) -> u32 {
        self.ring.p()
    }

    /// Coefficient precision `N`.
    pub fn prec(&self) -> u32 {
        self.ring.prec()
    }

    /// T-adic truncation length `M_T`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> PAdicNum {
        PAdicNum::in_ring(self.ring, self.coeffs[i])
    }

    pub fn residues(&self) -> &[u128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::MismatchedParameters(format!(
                "(p, N, M_T) = ({}, {}, {}) vs ({}, {}, {})",
                self.prime(),
                self.prec(),
                self.truncation(),
                other.prime(),
                other.prec(),
                other.truncation()
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_assign_ref(other);
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.sub_assign_ref(other);
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.ring, self.truncation());
        out.mul_add_assign(self, other);
        Ok(out)
    }

    /// Multiplies every coefficient by a scalar residue of the same ring.
    pub fn scale_raw(&self, s: u128) -> Self {
        let ring = self.ring;
        LambdaElt { ring, coeffs: self.coeffs.iter().map(|&c| ring.mul(c, s)).collect() }
    }

    pub fn scale(&self, s: &PAdicNum) -> Result<Self> {
        if s.prime() != self.prime() || s.prec() < self.prec() {
            return Err(Error::MismatchedParameters(format!("scalar {s} for series mod p^{}", self.prec())));
        }
        Ok(self.scale_raw(self.ring.reduce(s.residue())))
    }

    /// Multiplication by `T^k`, dropping what falls past the truncation.
    pub fn mul_t_pow(&self, k: usize) -> Self {
        let m = self.truncation();
        let mut coeffs = vec![0; m];
        for i in k..m {
            coeffs[i] = self.coeffs[i - k];
        }
        LambdaElt { ring: self.ring, coeffs }
    }

    /// Coarsens to precision `prec` and truncation `m_t`.
    pub fn reduce(&self, prec: u32, m_t: usize) -> Result<Self> {
        if prec > self.prec() || m_t > self.truncation() {
            return Err(Error::InsufficientPrecision {
                needed: prec.max(m_t as u32),
                available: self.prec().min(self.truncation() as u32),
            });
        }
        let ring = self.ring.with_prec(prec)?;
        Ok(LambdaElt { ring, coeffs: self.coeffs[..m_t].iter().map(|&c| ring.reduce(c)).collect() })
    }

    /// Inverse of a series with unit constant term.
    pub fn inverse(&self) -> Result<Self> {
        let ring = self.ring;
        let m = self.truncation();
        if m == 0 {
            return Ok(self.clone());
        }
        let c0 = ring.inv(self.coeffs[0]).ok_or_else(|| Error::NotAUnit(format!("{self:?}")))?;
        let mut out = vec![0u128; m];
        out[0] = c0;
        for k in 1..m {
            let mut s = 0u128;
            for i in 1..=k {
                s = ring.add(s, ring.mul(self.coeffs[i], out[k - i]));
            }
            out[k] = ring.mul(ring.neg(s), c0);
        }
        Ok(LambdaElt { ring, coeffs: out })
    }

    pub fn mlambda_order(&self) -> Order {
        mlambda_order(self)
    }

    pub fn halo_t_order(&self) -> Order {
        halo_t_order(self)
    }

    /// Decimal residues, lowest degree first.
    pub fn to_json_value(&self) -> LambdaJson {
        LambdaJson {
            p: self.prime(),
            n: self.prec(),
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_json_value(j: &LambdaJson) -> Result<Self> {
        let ring = ResidueRing::new(j.p, j.n)?;
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| PAdicNum::parse(j.p, j.n, s).map(|x| x.residue()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LambdaElt { ring, coeffs })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: LambdaJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json_value(&j)
    }
}

impl fmt::Debug for LambdaElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ[p={}, N={}]{:?}", self.prime(), self.prec(), self.coeffs)
    }
}

impl fmt::Display for LambdaElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*T")?,
                _ => write!(f, "{c}*T^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " (mod {}^{}, T^{})", self.prime(), self.prec(), self.truncation())
    }
}

/// Serialised form: `{"p": .., "N": .., "coeffs": ["..", ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaJson {
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub coeffs: Vec<String>,
}

impl RingElement for LambdaElt {
    fn zero_like(&self) -> Self {
        Self::zero(self.ring, self.truncation())
    }

    fn one_like(&self) -> Self {
        Self::one(self.ring, self.truncation())
    }

    fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "mismatched truncation");
        let ring = self.ring;
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = ring.add(*a, b);
        }
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "mismatched truncation");
        let ring = self.ring;
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = ring.sub(*a, b);
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = self.zero_like();
        out.mul_add_assign(self, other);
        out
    }

    fn neg_ref(&self) -> Self {
        let ring = self.ring;
        LambdaElt { ring, coeffs: self.coeffs.iter().map(|&c| ring.neg(c)).collect() }
    }

    fn is_zero(&self) -> bool {
        LambdaElt::is_zero(self)
    }

    fn mul_int(&self, k: i128) -> Self {
        self.scale_raw(self.ring.reduce_i128(k))
    }

    fn modulus(&self) -> u128 {
        self.ring.modulus()
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        assert!(a.ring == b.ring && a.ring == self.ring, "mismatched coefficient rings");
        let ring = self.ring;
        let m = self.coeffs.len();
        for (i, &ai) in a.coeffs.iter().enumerate().take(m) {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs[..m - i].iter().enumerate() {
                if bj != 0 {
                    let t = &mut self.coeffs[i + j];
                    *t = ring.add(*t, ring.mul(ai, bj));
                }
            }
        }
    }
}

macro_rules! lambda_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&LambdaElt> for &LambdaElt {
            type Output = LambdaElt;
            fn $method(self, rhs: &LambdaElt) -> LambdaElt {
                self.$checked(rhs).expect("compatible series")
            }
        }
    };
}

lambda_op!(Add, add, checked_add);
lambda_op!(Sub, sub, checked_sub);
lambda_op!(Mul, mul, checked_mul);

pub fn lambda_add(x: &LambdaElt, y: &LambdaElt) -> Result<LambdaElt> {
    x.checked_add(y)
}

pub fn lambda_mul(x: &LambdaElt, y: &LambdaElt) -> Result<LambdaElt> {
    x.checked_mul(y)
}

/// Largest `r` with `x ∈ (p, T)^r`, i.e. `min_m (m + v_p(b_m))`.
///
/// Zero residues contribute the bound `m + N`, and the unknown tail past the
/// truncation contributes `M_T`.
pub fn mlambda_order(x: &LambdaElt) -> Order {
    let n = x.prec() as i64;
    let mut exact: Option<i64> = None;
    let mut bound = x.truncation() as i64;
    for (m, &c) in x.coeffs.iter().enumerate() {
        match x.ring.val(c) {
            Some(v) => {
                let e = m as i64 + v as i64;
                exact = Some(exact.map_or(e, |cur| cur.min(e)));
            }
            None => bound = bound.min(m as i64 + n),
        }
    }
    Order::from_parts(exact, bound)
}

/// Largest `k` with `x ∈ T^k Λ^{>1/p}`.
///
/// On `Z_p[[T]]` the halo condition `v_p(b_m) >= k - m` coincides with
/// membership in the `k`-th power of the maximal ideal, so the two orders agree.
pub fn halo_t_order(x: &LambdaElt) -> Order {
    mlambda_order(x)
}

/// Valuation of `x` at a point with `v_p(T) = v_t`, for `0 < v_t < 1`.
///
/// The flag is true when a unique exact term attains the minimum strictly below
/// every lower bound coming from unknown digits.
pub fn eval_valuation(x: &LambdaElt, v_t: &Q) -> Result<(Valuation, bool)> {
    eval_valuation_with_floor(x, v_t, None)
}

/// Like [`eval_valuation`] with an extra lower bound for an unknown summand.
pub fn eval_valuation_with_floor(x: &LambdaElt, v_t: &Q, floor: Option<Q>) -> Result<(Valuation, bool)> {
    let zero = Q::from_integer(0.into());
    let one = Q::from_integer(1.into());
    if *v_t <= zero || *v_t >= one {
        return Err(Error::BadArgument(format!("v(T) = {v_t} must lie strictly between 0 and 1")));
    }
    let n = Q::from_integer(x.prec().into());
    let mut bound = v_t * Q::from_integer((x.truncation() as i64).into());
    if let Some(f) = floor {
        bound = bound.min(f);
    }
    let mut best: Option<Q> = None;
    let mut ties = 0usize;
    for (m, &c) in x.coeffs.iter().enumerate() {
        let shift = v_t * Q::from_integer((m as i64).into());
        match x.ring.val(c) {
            Some(v) => {
                let val = Q::from_integer(v.into()) + shift;
                match &best {
                    Some(b) if val > *b => {}
                    Some(b) if val == *b => ties += 1,
                    _ => {
                        best = Some(val);
                        ties = 1;
                    }
                }
            }
            None => {
                let b = &n + shift;
                if b < bound {
                    bound = b;
                }
            }
        }
    }
    Ok(match best {
        Some(b) if b < bound && ties == 1 => (Valuation::Exact(b), true),
        Some(b) => (Valuation::AtLeast(b.min(bound)), false),
        None => (Valuation::AtLeast(bound), false),
    })
}

/// `(1 + T)^g` truncated at `T^m_t`, coefficients `C(g, r)` at `target` digits.
pub fn one_plus_t_pow(g: &PAdicNum, m_t: usize, target: u32) -> Result<LambdaElt> {
    let out = g.ring().with_prec(target)?;
    if m_t == 0 {
        return Ok(LambdaElt::zero(out, 0));
    }
    let coeffs = binomial_row_raw(g.ring(), g.residue(), m_t - 1, out)?;
    Ok(LambdaElt { ring: out, coeffs })
}

/// A character `ω = ω₀^e` of the torsion subgroup `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharOfDelta {
    pub exponent: u32,
}

impl CharOfDelta {
    pub fn new(exponent: u32) -> Self {
        CharOfDelta { exponent }
    }

    pub fn trivial() -> Self {
        CharOfDelta { exponent: 0 }
    }

    /// `ω(d₀)` where `d₀` is the torsion part of the unit `d`.
    pub fn eval(&self, d: &PAdicNum) -> Result<PAdicNum> {
        Ok(teichmuller(d)?.pow(self.exponent as u64))
    }

    /// `ω · ω₀^k`, exponents taken modulo `φ(q)`.
    pub fn twist(&self, k: i64, phi: u32) -> Self {
        CharOfDelta { exponent: (self.exponent as i64 + k).rem_euclid(phi as i64) as u32 }
    }
}
