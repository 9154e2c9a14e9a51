//! The small commutative-ring interface shared by scalars and power series.

/// Operations the generic algorithms (Mahler transforms, determinants) rely on.
///
/// Operands are assumed to share parameters; implementations panic otherwise.
pub trait RingElement: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn sub_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn mul_int(&self, k: i128) -> Self;
    /// Modulus of the coefficient ring.
    fn modulus(&self) -> u128;

    /// `self += a * b`.
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let prod = a.mul_ref(b);
        self.add_assign_ref(&prod);
    }
}
