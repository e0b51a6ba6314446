//! Exact arithmetic over GF(p) and GF(p)[x]/(x^H).

pub mod border;
pub mod border_reduce;
pub mod field;
pub mod gf2;
pub mod linalg;
pub mod matrix;
pub mod ring;

pub use border::{BorderRing, Poly};
pub use border_reduce::{border_invert, border_rank_of_matrix, border_reduce, BorderReduction};
pub use field::PrimeField;
pub use linalg::{invert, kernel_basis, rank, rref, EchelonBasis, Rref};
pub use matrix::Matrix;
pub use ring::{vector_at, vector_index, vectors, Field, Ring};

use crate::error::Result;

pub type FieldSpec = PrimeField;
pub type BorderRingSpec = BorderRing;

/// Rings with a row reduction that exposes the row rank: both prime fields
/// (via rref) and border rings (via border reduction).
pub trait EchelonRing: Ring {
    /// Returns an invertible `Q` such that the first `rank` rows of `Q * M`
    /// are independent and the remaining rows are zero.
    fn row_reduce(&self, m: &Matrix<Self::Elem>) -> (Matrix<Self::Elem>, usize);

    fn invert(&self, m: &Matrix<Self::Elem>) -> Result<Matrix<Self::Elem>>;
}

impl EchelonRing for PrimeField {
    fn row_reduce(&self, m: &Matrix<u32>) -> (Matrix<u32>, usize) {
        let r = rref(self, m);
        (r.transform, r.rank)
    }

    fn invert(&self, m: &Matrix<u32>) -> Result<Matrix<u32>> {
        linalg::invert(self, m)
    }
}

impl EchelonRing for BorderRing {
    fn row_reduce(&self, m: &Matrix<Poly>) -> (Matrix<Poly>, usize) {
        let r = border_reduce(self, m);
        (r.q, r.rank)
    }

    fn invert(&self, m: &Matrix<Poly>) -> Result<Matrix<Poly>> {
        border_invert(self, m)
    }
}
