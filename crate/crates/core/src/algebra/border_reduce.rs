//! Echelon reduction over GF(p)[x]/(x^H).
//!
//! Row operations and column permutations bring a matrix to `[U | V]` with
//! `U` upper triangular and diagonal `x^{p_0}, .., x^{p_{r-1}}`,
//! `p_0 <= .. <= p_{r-1} < H`, followed by zero rows. `r` is the rank of the
//! matrix over the ring.

use super::border::{BorderRing, Poly};
use super::matrix::Matrix;
use super::ring::Ring;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorderReduction {
    /// Invertible row transform.
    pub q: Matrix<Poly>,
    /// Column permutation: column `j` of `reduced` is column `perm[j]` of the input.
    pub perm: Vec<usize>,
    /// `q * M * P`.
    pub reduced: Matrix<Poly>,
    pub rank: usize,
    pub diag_powers: Vec<usize>,
}

impl BorderReduction {
    /// The permutation as a matrix `P` with `q * M * P = reduced`.
    pub fn permutation_matrix(&self, ring: &BorderRing) -> Matrix<Poly> {
        let n = self.perm.len();
        let mut p = Matrix::zeros(ring, n, n);
        for (j, &src) in self.perm.iter().enumerate() {
            p.set(src, j, ring.one());
        }
        p
    }
}

/// Reduces `m` following the pivot-swap-scale-eliminate recursion, factoring
/// out powers of `x` when no unit remains. Ties on the pivot go to the
/// smallest `(row, col)` in row-major order.
pub fn border_reduce(ring: &BorderRing, m: &Matrix<Poly>) -> BorderReduction {
    let (rows, cols) = (m.rows(), m.cols());
    let h = ring.threshold();
    let mut a = m.clone();
    let mut q = Matrix::identity(ring, rows);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut diag = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        let mut best: Option<(usize, usize, usize)> = None;
        'scan: for i in k..rows {
            for j in k..cols {
                let v = ring.valuation(a.get(i, j));
                if v < best.map_or(h, |b| b.0) {
                    best = Some((v, i, j));
                    if v == diag.last().copied().unwrap_or(0) {
                        // cannot do better than the previous power
                        break 'scan;
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        a.swap_rows(k, pi);
        q.swap_rows(k, pi);
        a.swap_cols(k, pj);
        perm.swap(k, pj);

        let unit = ring.shift_down(a.get(k, k), v);
        let inv = ring.inverse(&unit).expect("pivot unit part is invertible");
        a.scale_row(ring, k, &inv);
        q.scale_row(ring, k, &inv);
        debug_assert_eq!(*a.get(k, k), ring.x_pow(v));

        for i in k + 1..rows {
            let e = a.get(i, k);
            if ring.is_zero(e) {
                continue;
            }
            let w = ring.neg(&ring.shift_down(e, v));
            a.add_row_multiple(ring, i, k, &w);
            q.add_row_multiple(ring, i, k, &w);
        }
        diag.push(v);
        k += 1;
    }
    BorderReduction {
        q,
        perm,
        reduced: a,
        rank: diag.len(),
        diag_powers: diag,
    }
}

/// Rank over the border ring.
pub fn border_rank_of_matrix(ring: &BorderRing, m: &Matrix<Poly>) -> usize {
    border_reduce(ring, m).rank
}

/// Inverse over the border ring: reduce, require a unit diagonal, then
/// back-substitute through the triangular factor.
pub fn border_invert(ring: &BorderRing, m: &Matrix<Poly>) -> Result<Matrix<Poly>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "cannot invert a {}x{} matrix",
            n,
            m.cols()
        )));
    }
    let red = border_reduce(ring, m);
    if red.rank < n || red.diag_powers.iter().any(|&p| p > 0) {
        return Err(Error::Singular);
    }
    // U X = I with U unit upper triangular.
    let u = &red.reduced;
    let mut x = Matrix::zeros(ring, n, n);
    for i in (0..n).rev() {
        for c in 0..n {
            let mut acc = if i == c { ring.one() } else { ring.zero() };
            for j in i + 1..n {
                acc = ring.sub(&acc, &ring.mul(u.get(i, j), x.get(j, c)));
            }
            x.set(i, c, acc);
        }
    }
    // M^{-1} = P U^{-1} Q
    let p = red.permutation_matrix(ring);
    p.mul(ring, &x)?.mul(ring, &red.q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::linalg;
    use crate::algebra::PrimeField;
    use proptest::prelude::*;

    fn ring(p: u64, h: usize) -> BorderRing {
        BorderRing::new(PrimeField::new(p).unwrap(), h).unwrap()
    }

    fn pm(r: &BorderRing, rows: usize, cols: usize, coeffs: &[&[i64]]) -> Matrix<Poly> {
        let data = coeffs.iter().map(|c| r.from_coeffs(c).unwrap()).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    pub(crate) fn check_invariants(r: &BorderRing, m: &Matrix<Poly>, red: &BorderReduction) {
        let p = red.permutation_matrix(r);
        let qmp = red.q.mul(r, m).unwrap().mul(r, &p).unwrap();
        assert_eq!(qmp, red.reduced);
        assert!(border_invert(r, &red.q).is_ok(), "Q must be invertible");
        assert!(red.diag_powers.windows(2).all(|w| w[0] <= w[1]));
        let a = &red.reduced;
        for (i, &pw) in red.diag_powers.iter().enumerate() {
            assert!(pw < r.threshold());
            assert_eq!(*a.get(i, i), r.x_pow(pw));
            for k in 0..i {
                assert!(r.is_zero(a.get(i, k)), "U must be upper triangular");
            }
            for ii in i..a.rows() {
                for j in 0..a.cols() {
                    assert!(r.valuation(a.get(ii, j)) >= pw, "x^{pw} must divide row tails");
                }
            }
        }
        for i in red.rank..a.rows() {
            for j in 0..a.cols() {
                assert!(r.is_zero(a.get(i, j)));
            }
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let r = ring(2, 2);
        let z = Matrix::zeros(&r, 2, 3);
        let red = border_reduce(&r, &z);
        assert_eq!(red.rank, 0);
        assert_eq!(red.reduced, z);
        check_invariants(&r, &z, &red);
    }

    #[test]
    fn upper_triangular_with_x_corner() {
        let r = ring(2, 2);
        let m = pm(&r, 2, 2, &[&[1], &[1], &[0], &[0, 1]]);
        let red = border_reduce(&r, &m);
        assert_eq!(red.rank, 2);
        assert_eq!(red.diag_powers, vec![0, 1]);
        assert_eq!(red.reduced, m);
        check_invariants(&r, &m, &red);
    }

    #[test]
    fn scaled_identity_keeps_full_rank() {
        let r = ring(2, 2);
        let x = r.x_pow(1);
        let m = Matrix::from_fn(2, 2, |i, j| if i == j { x.clone() } else { r.zero() });
        let red = border_reduce(&r, &m);
        assert_eq!(red.rank, 2);
        assert_eq!(red.diag_powers, vec![1, 1]);
        check_invariants(&r, &m, &red);
    }

    #[test]
    fn invert_examples() {
        let r = ring(2, 2);
        let id = Matrix::identity(&r, 3);
        assert_eq!(border_invert(&r, &id).unwrap(), id);
        let m = pm(&r, 2, 2, &[&[1], &[0, 1], &[0], &[0]]);
        assert_eq!(border_invert(&r, &m), Err(Error::Singular));
        let m = pm(&r, 2, 2, &[&[1, 1], &[0, 1], &[1], &[1]]);
        let inv = border_invert(&r, &m).unwrap();
        assert_eq!(m.mul(&r, &inv).unwrap(), Matrix::identity(&r, 2));
        assert_eq!(inv.mul(&r, &m).unwrap(), Matrix::identity(&r, 2));
    }

    fn arb_poly_matrix(p: i64, h: usize, rows: usize, cols: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(0..p, rows * cols * h)
    }

    fn build(r: &BorderRing, rows: usize, cols: usize, flat: &[i64]) -> Matrix<Poly> {
        let h = r.threshold();
        Matrix::from_fn(rows, cols, |i, j| {
            let s = (i * cols + j) * h;
            r.from_coeffs(&flat[s..s + h]).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn reduction_invariants_gf2_h2(flat in arb_poly_matrix(2, 2, 3, 4)) {
            let r = ring(2, 2);
            let m = build(&r, 3, 4, &flat);
            let red = border_reduce(&r, &m);
            check_invariants(&r, &m, &red);
        }
    }

    proptest! {
        #[test]
        fn reduction_invariants_gf3_h3(flat in arb_poly_matrix(3, 3, 3, 3)) {
            let r = ring(3, 3);
            let m = build(&r, 3, 3, &flat);
            let red = border_reduce(&r, &m);
            check_invariants(&r, &m, &red);
            if let Ok(inv) = border_invert(&r, &m) {
                prop_assert_eq!(m.mul(&r, &inv).unwrap(), Matrix::identity(&r, 3));
            }
        }

        #[test]
        fn threshold_one_rank_matches_field_rank(flat in arb_poly_matrix(2, 1, 4, 4)) {
            let r = ring(2, 1);
            let m = build(&r, 4, 4, &flat);
            let f = PrimeField::gf2();
            let fm = m.map(|e| e.0[0]);
            prop_assert_eq!(border_reduce(&r, &m).rank, linalg::rank(&f, &fm));
        }
    }
}
