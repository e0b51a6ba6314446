//! Gaussian elimination over a field.

use super::matrix::Matrix;
use super::ring::Field;
use crate::error::{Error, Result};

/// Result of reducing `M` to reduced row-echelon form: `transform * M = reduced`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref<E> {
    pub reduced: Matrix<E>,
    pub transform: Matrix<E>,
    pub rank: usize,
    /// Pivot column of each nonzero row of `reduced`.
    pub pivots: Vec<usize>,
}

/// Reduced row-echelon form with an invertible left transform.
///
/// Pivots are taken column by column, using the first nonzero entry at or
/// below the current pivot row, so `transform` is deterministic.
pub fn rref<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Rref<F::Elem> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut q = Matrix::identity(field, rows);
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows {
            break;
        }
        let Some(src) = (pr..rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        a.swap_rows(pr, src);
        q.swap_rows(pr, src);
        let inv = field
            .try_inverse(a.get(pr, c))
            .expect("nonzero field element is a unit");
        a.scale_row(field, pr, &inv);
        q.scale_row(field, pr, &inv);
        for i in 0..rows {
            if i == pr {
                continue;
            }
            let factor = field.neg(a.get(i, c));
            if field.is_zero(&factor) {
                continue;
            }
            a.add_row_multiple(field, i, pr, &factor);
            q.add_row_multiple(field, i, pr, &factor);
        }
        pivots.push(c);
        pr += 1;
    }
    Rref {
        reduced: a,
        transform: q,
        rank: pr,
        pivots,
    }
}

/// Rank without tracking the transform.
pub fn rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows {
            break;
        }
        let Some(src) = (pr..rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        a.swap_rows(pr, src);
        let inv = field.try_inverse(a.get(pr, c)).expect("unit");
        for i in pr + 1..rows {
            let factor = field.neg(&field.mul(a.get(i, c), &inv));
            a.add_row_multiple(field, i, pr, &factor);
        }
        pr += 1;
    }
    pr
}

/// Rows spanning `{ v : M v^T = 0 }`; there are `cols - rank(M)` of them.
pub fn kernel_basis<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let r = rref(field, m);
    let cols = m.cols();
    let mut is_pivot = vec![None; cols];
    for (row, &c) in r.pivots.iter().enumerate() {
        is_pivot[c] = Some(row);
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (row, &pc) in r.pivots.iter().enumerate() {
            v[pc] = field.neg(r.reduced.get(row, free));
        }
        basis.push(v);
    }
    Matrix::from_rows(cols, &basis).expect("rows have matching length")
}

/// Inverse of a square matrix over a field.
pub fn invert<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let r = rref(field, m);
    if r.rank < m.rows() {
        return Err(Error::Singular);
    }
    Ok(r.transform)
}

/// Incrementally maintained row-echelon basis, used for "does this vector
/// increase the rank" queries while streaming candidates.
#[derive(Clone, Debug)]
pub struct EchelonBasis<F: Field> {
    field: F,
    dim: usize,
    /// Normalized rows (pivot entry 1) with their pivot columns.
    rows: Vec<(usize, Vec<F::Elem>)>,
}

impl<F: Field> EchelonBasis<F> {
    pub fn new(field: F, dim: usize) -> Self {
        Self {
            field,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn reduce(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut w = v.to_vec();
        for (pc, row) in &self.rows {
            let c = w[*pc].clone();
            if f.is_zero(&c) {
                continue;
            }
            for (wj, rj) in w.iter_mut().zip(row) {
                *wj = f.sub(wj, &f.mul(&c, rj));
            }
        }
        w
    }

    pub fn contains(&self, v: &[F::Elem]) -> bool {
        self.reduce(v).iter().all(|e| self.field.is_zero(e))
    }

    /// Adds `v` if it is independent of the current rows; returns whether it was added.
    pub fn insert(&mut self, v: &[F::Elem]) -> bool {
        assert_eq!(v.len(), self.dim);
        let f = self.field.clone();
        let mut w = self.reduce(v);
        let Some(pc) = w.iter().position(|e| !f.is_zero(e)) else {
            return false;
        };
        let inv = f.try_inverse(&w[pc]).expect("unit");
        for e in w.iter_mut() {
            *e = f.mul(e, &inv);
        }
        self.rows.push((pc, w));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use proptest::prelude::*;

    fn m2(rows: usize, cols: usize, d: &[u32]) -> Matrix<u32> {
        Matrix::from_vec(rows, cols, d.to_vec()).unwrap()
    }

    fn is_rref(f: &PrimeField, r: &Rref<u32>) -> bool {
        let a = &r.reduced;
        // zero rows at the bottom, pivots strictly increasing, pivot = 1, pivot column clean
        for i in 0..a.rows() {
            let nz = (0..a.cols()).find(|&j| *a.get(i, j) != 0);
            match nz {
                None => {
                    if i < r.rank {
                        return false;
                    }
                }
                Some(c) => {
                    if i >= r.rank || r.pivots[i] != c || *a.get(i, c) != 1 {
                        return false;
                    }
                    if (0..a.rows()).any(|k| k != i && *a.get(k, c) != 0) {
                        return false;
                    }
                }
            }
        }
        r.pivots.windows(2).all(|w| w[0] < w[1]) && f.modulus() > 0
    }

    #[test]
    fn rref_examples() {
        let f2 = PrimeField::gf2();
        let id = Matrix::identity(&f2, 3);
        let r = rref(&f2, &id);
        assert_eq!((r.reduced.clone(), r.transform.clone(), r.rank), (id.clone(), id, 3));

        let r = rref(&f2, &m2(2, 2, &[1, 1, 1, 1]));
        assert_eq!(r.reduced, m2(2, 2, &[1, 1, 0, 0]));
        assert_eq!(r.rank, 1);

        let r = rref(&f2, &m2(2, 2, &[0, 1, 1, 0]));
        assert_eq!(r.reduced, Matrix::identity(&f2, 2));
        assert_eq!(r.transform, m2(2, 2, &[0, 1, 1, 0]));
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn kernel_examples() {
        let f2 = PrimeField::gf2();
        assert_eq!(kernel_basis(&f2, &Matrix::identity(&f2, 2)).rows(), 0);
        let k = kernel_basis(&f2, &m2(1, 2, &[1, 1]));
        assert_eq!(k, m2(1, 2, &[1, 1]));
        let k = kernel_basis(&f2, &Matrix::zeros(&f2, 2, 3));
        assert_eq!(k.rows(), 3);
        assert_eq!(rank(&f2, &k), 3);
    }

    #[test]
    fn invert_examples() {
        let f2 = PrimeField::gf2();
        let id = Matrix::identity(&f2, 3);
        assert_eq!(invert(&f2, &id).unwrap(), id);
        let u = m2(2, 2, &[1, 1, 0, 1]);
        assert_eq!(invert(&f2, &u).unwrap(), u);
        assert_eq!(invert(&f2, &m2(2, 2, &[1, 1, 1, 1])), Err(Error::Singular));
    }

    #[test]
    fn echelon_basis_tracks_rank() {
        let f3 = PrimeField::new(3).unwrap();
        let mut b = EchelonBasis::new(f3, 3);
        assert!(b.insert(&[1, 2, 0]));
        assert!(!b.insert(&[2, 1, 0]));
        assert!(b.contains(&[2, 1, 0]));
        assert!(b.insert(&[0, 0, 1]));
        assert!(!b.is_full());
        assert!(b.insert(&[0, 1, 0]));
        assert!(b.is_full());
    }

    fn arb_matrix(p: u32, rows: usize, cols: usize) -> impl Strategy<Value = Matrix<u32>> {
        proptest::collection::vec(0..p, rows * cols)
            .prop_map(move |d| Matrix::from_vec(rows, cols, d).unwrap())
    }

    proptest! {
        #[test]
        fn rref_transform_reproduces_reduced(m in arb_matrix(3, 4, 5)) {
            let f = PrimeField::new(3).unwrap();
            let r = rref(&f, &m);
            prop_assert_eq!(r.transform.mul(&f, &m).unwrap(), r.reduced.clone());
            prop_assert!(invert(&f, &r.transform).is_ok());
            prop_assert!(is_rref(&f, &r));
            prop_assert_eq!(r.rank, rank(&f, &m));
        }

        #[test]
        fn rank_of_transpose_matches(m in arb_matrix(2, 4, 4)) {
            let f = PrimeField::gf2();
            prop_assert_eq!(rank(&f, &m), rank(&f, &m.transpose()));
        }

        #[test]
        fn kernel_rows_are_independent_and_annihilated(m in arb_matrix(5, 3, 5)) {
            let f = PrimeField::new(5).unwrap();
            let k = kernel_basis(&f, &m);
            let r = rank(&f, &m);
            prop_assert_eq!(k.rows() + r, m.cols());
            prop_assert_eq!(rank(&f, &k), k.rows());
            prop_assert!(m.mul(&f, &k.transpose()).unwrap().is_zero(&f));
        }

        #[test]
        fn invert_is_two_sided(m in arb_matrix(7, 3, 3)) {
            let f = PrimeField::new(7).unwrap();
            if let Ok(inv) = invert(&f, &m) {
                let id = Matrix::identity(&f, 3);
                prop_assert_eq!(m.mul(&f, &inv).unwrap(), id.clone());
                prop_assert_eq!(inv.mul(&f, &m).unwrap(), id);
            } else {
                prop_assert!(rank(&f, &m) < 3);
            }
        }
    }
}
