//! Residues modulo `p^N` with explicit precision tracking.
//!
//! A [`ResidueRing`] describes `Z/p^N` and carries a precomputed Barrett
//! constant, so multiplication of two `u128` residues never leaves fixed-width
//! arithmetic. A [`PAdicNum`] pairs a residue with its ring; arithmetic between
//! numbers of different precision happens at the smaller one.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::ring::RingElement;
use crate::{Error, Result, Q};

/// Moduli must stay below `2^MODULUS_BITS`.
pub const MODULUS_BITS: u32 = 126;

const LOW64: u128 = u64::MAX as u128;

#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & LOW64);
    let (b1, b0) = (b >> 64, b & LOW64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & LOW64) + (p10 & LOW64);
    let lo = (p00 & LOW64) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Low 128 bits of `(hi, lo) >> s`.
#[inline]
fn shr_wide(hi: u128, lo: u128, s: u32) -> u128 {
    if s == 0 {
        lo
    } else if s < 128 {
        (lo >> s) | (hi << (128 - s))
    } else {
        hi >> (s - 128)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Barrett {
    m: u128,
    mu: u128,
    k: u32,
}

impl Barrett {
    fn new(m: u128) -> Self {
        debug_assert!((1..(1u128 << MODULUS_BITS)).contains(&m));
        if m == 1 {
            return Barrett { m, mu: 0, k: 1 };
        }
        let k = 128 - m.leading_zeros();
        // floor(2^(2k) / m) by schoolbook binary division.
        let mut rem: u128 = 0;
        let mut quo: u128 = 0;
        for bit in (0..=2 * k).rev() {
            rem = (rem << 1) | u128::from(bit == 2 * k);
            quo <<= 1;
            if rem >= m {
                rem -= m;
                quo |= 1;
            }
        }
        Barrett { m, mu: quo, k }
    }

    #[inline]
    fn reduce_wide(&self, hi: u128, lo: u128) -> u128 {
        if self.m == 1 {
            return 0;
        }
        let k = self.k;
        let q1 = shr_wide(hi, lo, k - 1);
        let (q2h, q2l) = mul_wide(q1, self.mu);
        let q3 = shr_wide(q2h, q2l, k + 1);
        // x - q3*m lies in [0, 3m), which fits in k + 2 bits.
        let mask = if k + 2 >= 128 { u128::MAX } else { (1u128 << (k + 2)) - 1 };
        let r1 = lo & mask;
        let r2 = q3.wrapping_mul(self.m) & mask;
        let mut r = r1.wrapping_sub(r2) & mask;
        while r >= self.m {
            r -= self.m;
        }
        r
    }

    #[inline]
    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.reduce_wide(hi, lo)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The ring `Z/p^N`, residues stored as canonical representatives in `[0, p^N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    p: u32,
    prec: u32,
    bar: Barrett,
}

impl ResidueRing {
    pub fn new(p: u32, prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadArgument(format!("{p} is not prime")));
        }
        if prec > Self::max_precision(p) {
            return Err(Error::PrecisionOverflow { p, prec });
        }
        let m = (p as u128).pow(prec);
        Ok(ResidueRing { p, prec, bar: Barrett::new(m) })
    }

    /// Largest `N` with `p^N < 2^126`.
    pub fn max_precision(p: u32) -> u32 {
        let mut n = 0;
        let mut m: u128 = 1;
        while let Some(next) = m.checked_mul(p as u128) {
            if next >= 1u128 << MODULUS_BITS {
                break;
            }
            m = next;
            n += 1;
        }
        n
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.prec
    }

    #[inline]
    pub fn modulus(&self) -> u128 {
        self.bar.m
    }

    /// The same prime at a different precision.
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        if prec == self.prec {
            Ok(*self)
        } else {
            ResidueRing::new(self.p, prec)
        }
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.bar.m {
            s - self.bar.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.bar.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.bar.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        self.bar.mul(a, b)
    }

    pub fn pow(&self, a: u128, mut e: u128) -> u128 {
        let mut base = a;
        let mut acc = self.reduce(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn reduce(&self, x: u128) -> u128 {
        x % self.bar.m
    }

    pub fn reduce_i128(&self, x: i128) -> u128 {
        let m = self.bar.m as i128;
        x.rem_euclid(m) as u128
    }

    pub fn reduce_big(&self, x: &BigInt) -> u128 {
        let m = BigInt::from(self.bar.m);
        let r = ((x % &m) + &m) % &m;
        r.to_u128().expect("residue below modulus")
    }

    /// p-adic valuation of a residue, `None` when it is zero modulo `p^N`.
    pub fn val(&self, mut a: u128) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let p = self.p as u128;
        let mut v = 0;
        while a.is_multiple_of(p) {
            a /= p;
            v += 1;
        }
        Some(v)
    }

    /// Inverse of a unit residue.
    pub fn inv(&self, a: u128) -> Option<u128> {
        let m = self.bar.m;
        if m == 1 {
            return Some(0);
        }
        if a.is_multiple_of(self.p as u128) {
            return None;
        }
        let (mut r0, mut r1) = (m as i128, a as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce_i128(s0))
    }
}

/// A p-adic valuation, either known exactly or only bounded below by precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(Q),
    AtLeast(Q),
}

impl Valuation {
    pub fn value(&self) -> &Q {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// An element of `Z_p` known modulo `p^prec`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PAdicNum {
    ring: ResidueRing,
    residue: u128,
}

impl PAdicNum {
    pub fn new(p: u32, prec: u32, value: i128) -> Result<Self> {
        let ring = ResidueRing::new(p, prec)?;
        Ok(Self::in_ring(ring, ring.reduce_i128(value)))
    }

    pub fn from_big(p: u32, prec: u32, value: &BigInt) -> Result<Self> {
        let ring = ResidueRing::new(p, prec)?;
        Ok(Self::in_ring(ring, ring.reduce_big(value)))
    }

    /// Parses a decimal integer and reduces it modulo `p^prec`.
    pub fn parse(p: u32, prec: u32, text: &str) -> Result<Self> {
        let value = BigInt::from_str(text.trim())
            .map_err(|e| Error::Parse(format!("bad integer {text:?}: {e}")))?;
        Self::from_big(p, prec, &value)
    }

    #[inline]
    pub fn in_ring(ring: ResidueRing, residue: u128) -> Self {
        debug_assert!(residue < ring.modulus());
        PAdicNum { ring, residue }
    }

    #[inline]
    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    #[inline]
    pub fn prime(&self) -> u32 {
        self.ring.p
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.ring.prec
    }

    #[inline]
    pub fn residue(&self) -> u128 {
        self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ring.prec > 0 && !self.residue.is_multiple_of(self.ring.p as u128)
    }

    /// Integer valuation, `None` when the residue vanishes.
    pub fn val_int(&self) -> Option<u32> {
        self.ring.val(self.residue)
    }

    pub fn val_p(&self) -> Valuation {
        match self.val_int() {
            Some(v) => Valuation::Exact(Q::from_integer(v.into())),
            None => Valuation::AtLeast(Q::from_integer(self.prec().into())),
        }
    }

    /// Coarsens to a lower precision.
    pub fn reduce_to(&self, prec: u32) -> Result<Self> {
        if prec > self.prec() {
            return Err(Error::InsufficientPrecision { needed: prec, available: self.prec() });
        }
        let ring = self.ring.with_prec(prec)?;
        Ok(Self::in_ring(ring, ring.reduce(self.residue)))
    }

    /// Reinterprets the canonical representative at another precision.
    ///
    /// Raising the precision treats the stored residue as an exact integer; use
    /// this only for values that are integers by construction.
    pub fn lift_to(&self, prec: u32) -> Result<Self> {
        let ring = self.ring.with_prec(prec)?;
        Ok(Self::in_ring(ring, ring.reduce(self.residue)))
    }

    fn common(&self, other: &Self) -> Result<(ResidueRing, u128, u128)> {
        if self.prime() != other.prime() {
            return Err(Error::MismatchedParameters(format!(
                "primes {} and {}",
                self.prime(),
                other.prime()
            )));
        }
        let ring = if self.prec() <= other.prec() { self.ring } else { other.ring };
        Ok((ring, ring.reduce(self.residue), ring.reduce(other.residue)))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let (r, a, b) = self.common(other)?;
        Ok(Self::in_ring(r, r.add(a, b)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let (r, a, b) = self.common(other)?;
        Ok(Self::in_ring(r, r.sub(a, b)))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let (r, a, b) = self.common(other)?;
        Ok(Self::in_ring(r, r.mul(a, b)))
    }

    pub fn neg(&self) -> Self {
        Self::in_ring(self.ring, self.ring.neg(self.residue))
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::in_ring(self.ring, self.ring.pow(self.residue, e.into()))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.ring
            .inv(self.residue)
            .map(|r| Self::in_ring(self.ring, r))
            .ok_or_else(|| Error::NotAUnit(self.to_string()))
    }

    /// Exact division by `p^k`; the result loses `k` digits of precision.
    pub fn div_p_pow(&self, k: u32) -> Result<Self> {
        if k > self.prec() {
            return Err(Error::InsufficientPrecision { needed: k, available: self.prec() });
        }
        let pk = (self.prime() as u128).pow(k);
        if !self.residue.is_multiple_of(pk) {
            return Err(Error::BadArgument(format!("{self} is not divisible by {}^{k}", self.prime())));
        }
        let ring = self.ring.with_prec(self.prec() - k)?;
        Ok(Self::in_ring(ring, self.residue / pk))
    }

    /// Multiplies by a machine integer.
    pub fn mul_int(&self, k: i128) -> Self {
        Self::in_ring(self.ring, self.ring.mul(self.residue, self.ring.reduce_i128(k)))
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from(self.residue)
    }
}

impl fmt::Display for PAdicNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.prime(), self.prec())
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr for PAdicNum {
            type Output = PAdicNum;
            fn $method(self, rhs: PAdicNum) -> PAdicNum {
                self.$checked(&rhs).expect("p-adic operands over different primes")
            }
        }
        impl std::ops::$tr<&PAdicNum> for &PAdicNum {
            type Output = PAdicNum;
            fn $method(self, rhs: &PAdicNum) -> PAdicNum {
                self.$checked(rhs).expect("p-adic operands over different primes")
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl std::ops::Neg for PAdicNum {
    type Output = PAdicNum;
    fn neg(self) -> PAdicNum {
        PAdicNum::neg(&self)
    }
}

impl RingElement for PAdicNum {
    fn zero_like(&self) -> Self {
        Self::in_ring(self.ring, 0)
    }

    fn one_like(&self) -> Self {
        Self::in_ring(self.ring, self.ring.reduce(1))
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = &*self + other;
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        *self = &*self - other;
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn neg_ref(&self) -> Self {
        PAdicNum::neg(self)
    }

    fn is_zero(&self) -> bool {
        self.residue == 0
    }

    fn mul_int(&self, k: i128) -> Self {
        PAdicNum::mul_int(self, k)
    }

    fn modulus(&self) -> u128 {
        self.ring.modulus()
    }
}

/// `p`-adic valuation of an integer.
pub fn val_int_u128(mut n: u128, p: u32) -> u32 {
    debug_assert!(n > 0);
    let p = p as u128;
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(n!)` by Legendre's formula.
pub fn val_factorial(n: u64, p: u32) -> u32 {
    let mut v = 0u64;
    let mut pk = p as u64;
    while pk <= n {
        v += n / pk;
        match pk.checked_mul(p as u64) {
            Some(next) => pk = next,
            None => break,
        }
    }
    v as u32
}

/// p-adic valuation of the modulus `q` used by the weight space.
pub fn val_q(p: u32) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

/// `q = p` for odd `p`, `q = 4` for `p = 2`.
pub fn q_of(p: u32) -> u32 {
    if p == 2 {
        4
    } else {
        p
    }
}

/// Order of the torsion group `(Z/q)^x`.
pub fn phi_q(p: u32) -> u32 {
    if p == 2 {
        2
    } else {
        p - 1
    }
}

/// p-adic valuation of a nonzero rational.
pub fn val_rational(x: &Q, p: u32) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut v = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            v += 1;
        }
        v
    };
    Some(count(x.numer().clone()) - count(x.denom().clone()))
}

/// The torsion (Teichmüller) representative of a unit.
///
/// For odd `p` this is the limit of `d^(p^k)`. For `p = 2` it is the sign
/// `±1 ≡ d (mod 4)`.
pub fn teichmuller(d: &PAdicNum) -> Result<PAdicNum> {
    if !d.is_unit() {
        return Err(Error::NotAUnit(d.to_string()));
    }
    let ring = d.ring();
    if d.prime() == 2 {
        let value = if d.residue() % 4 == 1 || d.prec() == 1 { 1 } else { -1 };
        return Ok(PAdicNum::in_ring(ring, ring.reduce_i128(value)));
    }
    let mut x = d.residue();
    for _ in 0..d.prec() {
        x = ring.pow(x, d.prime() as u128);
    }
    Ok(PAdicNum::in_ring(ring, x))
}

/// `log(u) / q` for `u ≡ 1 (mod q)`.
///
/// The result is known modulo `p^(N - v_p(q))`, where `N` is the precision of `u`.
pub fn padic_log_ratio(u: &PAdicNum, q: u32) -> Result<PAdicNum> {
    let p = u.prime();
    if q != q_of(p) {
        return Err(Error::BadArgument(format!("q must be {} for p = {p}", q_of(p))));
    }
    let n = u.prec();
    let vq = val_q(p);
    if n < vq {
        return Err(Error::InsufficientPrecision { needed: vq, available: n });
    }
    if u.residue() % q as u128 != 1 % q as u128 {
        return Err(Error::BadArgument(format!("{u} is not 1 mod {q}")));
    }
    let log = log_one_plus(u.ring().sub(u.residue(), u.ring().reduce(1)), u.ring())?;
    PAdicNum::in_ring(u.ring(), log).div_p_pow(vq)
}

/// `log(1 + x)` modulo `p^N` for a residue `x` with `v(x) >= v(q)`.
///
/// The series terms `x^k / k` are formed at `N + floor(log_p k)` digits so the
/// division by `k` loses nothing; the canonical lift of `x` is accurate enough
/// because each term's error has valuation at least `N + v(k)`.
fn log_one_plus(x: u128, ring: ResidueRing) -> Result<u128> {
    let n = ring.prec();
    let p = ring.p();
    let vx = match ring.val(x) {
        None => return Ok(0),
        Some(v) => v,
    };
    let log_floor = |k: u64| -> u32 {
        let mut e = 0;
        let mut pk = p as u64;
        while pk <= k {
            e += 1;
            pk *= p as u64;
        }
        e
    };
    let mut last = 1u64;
    while (last as i64) * vx as i64 - (log_floor(last) as i64) < n as i64 {
        last += 1;
    }
    let wide = ring.with_prec(n + log_floor(last))?;
    let mut acc = 0u128;
    let mut power = 1u128;
    for k in 1..last {
        power = wide.mul(power, wide.reduce(x));
        let vk = val_int_u128(k as u128, p);
        let pk = (p as u128).pow(vk);
        debug_assert_eq!(power % pk, 0);
        let term = ring.reduce(power / pk);
        let unit = ring.reduce((k as u128) / pk);
        let term = ring.mul(term, ring.inv(unit).expect("unit part of k"));
        acc = if k % 2 == 1 { ring.add(acc, term) } else { ring.sub(acc, term) };
    }
    Ok(acc)
}

/// Binomial coefficients `C(u, r)` for `r = 0..=r_max`, returned at `target` digits.
///
/// Requires `prec(u) >= target + v_p(r_max!)`.
pub fn binomial_row(u: &PAdicNum, r_max: usize, target: u32) -> Result<Vec<PAdicNum>> {
    let out_ring = u.ring().with_prec(target)?;
    binomial_row_raw(u.ring(), u.residue(), r_max, out_ring)
        .map(|row| row.into_iter().map(|r| PAdicNum::in_ring(out_ring, r)).collect())
}

pub(crate) fn binomial_row_raw(
    ring: ResidueRing,
    u: u128,
    r_max: usize,
    out: ResidueRing,
) -> Result<Vec<u128>> {
    let p = ring.p();
    let needed = out.prec() + val_factorial(r_max as u64, p);
    if ring.prec() < needed {
        return Err(Error::InsufficientPrecision { needed, available: ring.prec() });
    }
    let mut row = Vec::with_capacity(r_max + 1);
    let mut falling = ring.reduce(1);
    let mut vfact = 0u32;
    let mut unit_inv = out.reduce(1);
    for r in 0..=r_max {
        if r > 0 {
            falling = ring.mul(falling, ring.sub(u, ring.reduce(r as u128 - 1)));
            let vr = val_int_u128(r as u128, p);
            vfact += vr;
            let unit = (r as u128) / (p as u128).pow(vr);
            unit_inv = out.mul(unit_inv, out.inv(out.reduce(unit)).expect("unit part of r"));
        }
        let pk = (p as u128).pow(vfact);
        debug_assert_eq!(falling % pk, 0);
        row.push(out.mul(out.reduce(falling / pk), unit_inv));
    }
    Ok(row)
}

/// `C(u, r)` at `target` digits.
pub fn binom_padic(u: &PAdicNum, r: usize, target: u32) -> Result<PAdicNum> {
    Ok(binomial_row(u, r, target)?.pop().expect("row has r + 1 entries"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn num(p: u32, n: u32, v: i128) -> PAdicNum {
        PAdicNum::new(p, n, v).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(num(5, 3, 50).val_p(), Valuation::Exact(q(2)));
        assert_eq!(num(5, 3, 0).val_p(), Valuation::AtLeast(q(3)));
        assert_eq!(num(3, 4, 7).val_p(), Valuation::Exact(q(0)));
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(&num(5, 2, 2)).unwrap().residue(), 7);
        assert_eq!(teichmuller(&num(5, 2, 1)).unwrap().residue(), 1);
        assert_eq!(teichmuller(&num(3, 3, 26)).unwrap().residue(), 26);
        assert!(matches!(teichmuller(&num(5, 2, 10)), Err(Error::NotAUnit(_))));
        assert_eq!(teichmuller(&num(2, 5, 7)).unwrap().residue(), 31);
        assert_eq!(teichmuller(&num(2, 5, 5)).unwrap().residue(), 1);
    }

    #[test]
    fn log_examples() {
        let r = padic_log_ratio(&num(5, 3, 6), 5).unwrap();
        assert_eq!((r.residue(), r.prec()), (11, 2));
        assert!(padic_log_ratio(&num(5, 3, 1), 5).unwrap().is_zero());
        // Frozen from an exact rational partial sum taken modulo 3^8.
        let r = padic_log_ratio(&num(3, 8, 4), 3).unwrap().reduce_to(2).unwrap();
        assert_eq!(r.residue(), 7);
        assert!(matches!(padic_log_ratio(&num(5, 3, 7), 5), Err(Error::BadArgument(_))));
        assert!(matches!(padic_log_ratio(&num(2, 6, 3), 4), Err(Error::BadArgument(_))));
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binom_padic(&num(5, 4, 7), 2, 4).unwrap().residue(), 21);
        assert_eq!(binom_padic(&num(5, 4, 7), 0, 4).unwrap().residue(), 1);
        let c = binom_padic(&num(5, 4, 7), 5, 3).unwrap();
        assert_eq!((c.residue(), c.prec()), (21, 3));
        assert!(matches!(
            binom_padic(&num(5, 4, 7), 5, 4),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn capacity_limits() {
        assert_eq!(ResidueRing::max_precision(2), 125);
        assert_eq!(ResidueRing::max_precision(5), 54);
        assert!(ResidueRing::new(5, 55).is_err());
        assert!(ResidueRing::new(4, 3).is_err());
        assert_eq!(val_factorial(39, 2), 35);
        assert_eq!(val_factorial(25, 5), 6);
    }

    #[test]
    fn barrett_bulk_against_bigint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in [2u32, 3, 5, 7] {
            for prec in 1..=ResidueRing::max_precision(p) {
                let ring = ResidueRing::new(p, prec).unwrap();
                for _ in 0..2000 {
                    let a = ring.reduce(rng.gen());
                    let b = ring.reduce(rng.gen());
                    assert_eq!(ring.mul(a, b), big_mulmod(a, b, ring.modulus()), "p={p} N={prec}");
                }
                let top = ring.modulus() - 1;
                assert_eq!(ring.mul(top, top), big_mulmod(top, top, ring.modulus()));
            }
        }
    }

    fn big_mulmod(a: u128, b: u128, m: u128) -> u128 {
        let r = BigUint::from(a) * BigUint::from(b) % BigUint::from(m);
        r.to_u128().unwrap()
    }

    proptest! {
        #[test]
        fn barrett_matches_bigint(p in prop::sample::select(vec![2u32, 3, 5, 7, 11]),
                                  frac in 0.0f64..1.0, a in any::<u128>(), b in any::<u128>()) {
            let max = ResidueRing::max_precision(p);
            let prec = 1 + ((max - 1) as f64 * frac) as u32;
            let ring = ResidueRing::new(p, prec).unwrap();
            let (a, b) = (ring.reduce(a), ring.reduce(b));
            prop_assert_eq!(ring.mul(a, b), big_mulmod(a, b, ring.modulus()));
        }

        #[test]
        fn valuation_multiplicative(a in 1i128..1_000_000, b in 1i128..1_000_000,
                                    p in prop::sample::select(vec![2u32, 3, 5, 7])) {
            let (x, y) = (num(p, 40, a), num(p, 40, b));
            if let (Valuation::Exact(va), Valuation::Exact(vb)) = (x.val_p(), y.val_p()) {
                prop_assert_eq!((x * y).val_p(), Valuation::Exact(va + vb));
            }
        }

        #[test]
        fn teichmuller_is_torsion(d in 1i128..100_000, p in prop::sample::select(vec![3u32, 5, 7, 11])) {
            prop_assume!(d % p as i128 != 0);
            let t = teichmuller(&num(p, 12, d)).unwrap();
            prop_assert_eq!(t.pow(p as u64 - 1).residue(), 1);
            prop_assert_eq!(t.residue() % p as u128, d as u128 % p as u128);
        }

        #[test]
        fn pascal_rule(u in any::<i64>(), r in 1usize..20, p in prop::sample::select(vec![2u32, 3, 5])) {
            let x = num(p, 40, u as i128);
            let target = 40 - val_factorial(20, p);
            let left = binom_padic(&x.checked_add(&num(p, 40, 1)).unwrap(), r, target).unwrap();
            let right = binom_padic(&x, r, target).unwrap() + binom_padic(&x, r - 1, target).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn log_is_homomorphism(a in any::<i64>(), b in any::<i64>(), p in prop::sample::select(vec![2u32, 3, 5, 7])) {
            let qq = q_of(p) as i128;
            let x = num(p, 30, 1 + qq * a as i128);
            let y = num(p, 30, 1 + qq * b as i128);
            let lhs = padic_log_ratio(&(x * y), q_of(p)).unwrap();
            let rhs = padic_log_ratio(&x, q_of(p)).unwrap() + padic_log_ratio(&y, q_of(p)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn binomial_of_integers_matches_exact(n in 0u64..60, r in 0usize..12, p in prop::sample::select(vec![2u32, 3, 5])) {
            let exact = (0..r as u64).fold(BigUint::from(1u32), |acc, i| {
                if n < i { BigUint::from(0u32) } else { acc * BigUint::from(n - i) }
            }) / (1..=r as u64).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i));
            let c = binom_padic(&num(p, 30, n as i128), r, 20).unwrap();
            let m = BigUint::from(p).pow(20);
            prop_assert_eq!(c.to_biguint(), exact % m);
        }
    }
}
