use std::fmt::Debug;
use std::hash::Hash;

/// A finite commutative ring given as a runtime context.
///
/// Elements carry no reference to their ring; every operation goes through
/// the context so that moduli and thresholds can be chosen at runtime.
pub trait Ring: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: i64) -> Self::Elem;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// Multiplicative inverse, if `a` is a unit.
    fn try_inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.try_inverse(a).is_some()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Number of elements.
    fn cardinality(&self) -> u64;

    /// The `idx`-th element in lexicographic coefficient order.
    fn element(&self, idx: u64) -> Self::Elem;

    /// Inverse of [`Ring::element`].
    fn index_of(&self, a: &Self::Elem) -> u64;

    fn mul_add(&self, acc: &Self::Elem, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(acc, &self.mul(a, b))
    }
}

/// A ring in which every nonzero element is a unit.
pub trait Field: Ring {
    fn characteristic(&self) -> u64;
}

/// Enumerates `F^len` in lexicographic order (first coordinate most significant).
pub fn vectors<R: Ring>(ring: &R, len: usize) -> impl Iterator<Item = Vec<R::Elem>> + '_ {
    let q = ring.cardinality();
    let total = q.checked_pow(len as u32).expect("vector space too large to enumerate");
    (0..total).map(move |idx| vector_at(ring, len, idx))
}

/// The `idx`-th vector of `F^len` in lexicographic order.
pub fn vector_at<R: Ring>(ring: &R, len: usize, mut idx: u64) -> Vec<R::Elem> {
    let q = ring.cardinality();
    let mut out = vec![ring.zero(); len];
    for slot in out.iter_mut().rev() {
        *slot = ring.element(idx % q);
        idx /= q;
    }
    out
}

/// Lexicographic index of a vector; inverse of [`vector_at`].
pub fn vector_index<R: Ring>(ring: &R, v: &[R::Elem]) -> u64 {
    let q = ring.cardinality();
    v.iter().fold(0u64, |acc, e| acc * q + ring.index_of(e))
}
