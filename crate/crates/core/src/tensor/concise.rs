use serde::{Deserialize, Serialize};

use super::{contract, cpd_eval, Cpd, Tensor};
use crate::algebra::{EchelonRing, Field, Matrix, Ring};
use crate::error::{Error, Result};

/// Maps CPDs of a concise tensor back to the tensor it was derived from.
///
/// Axis `i` of the concise tensor corresponds to axis `perm[i]` of the
/// original, and the original equals the concise tensor contracted with
/// `lifts[i]` (shape `n_{perm[i]} x r_i`) along each axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcisenessCertificate<E> {
    pub original_shape: Vec<usize>,
    pub perm: Vec<usize>,
    pub lifts: Vec<Matrix<E>>,
}

impl<E: Clone> ConcisenessCertificate<E> {
    pub fn identity<R: Ring<Elem = E>>(ring: &R, shape: &[usize]) -> Self {
        Self {
            original_shape: shape.to_vec(),
            perm: (0..shape.len()).collect(),
            lifts: shape.iter().map(|&n| Matrix::identity(ring, n)).collect(),
        }
    }

    /// Side lengths `r_i` of the concise tensor.
    pub fn concise_shape(&self) -> Vec<usize> {
        self.lifts.iter().map(Matrix::cols).collect()
    }

    /// Certificate for the concise tensor after `permute_axes(s)`.
    pub fn permuted(&self, s: &[usize]) -> Self {
        Self {
            original_shape: self.original_shape.clone(),
            perm: s.iter().map(|&i| self.perm[i]).collect(),
            lifts: s.iter().map(|&i| self.lifts[i].clone()).collect(),
        }
    }
}

/// Makes every unfolding full row rank by replacing `T` with `Q_d ×_d T` and
/// dropping the zero slices, one axis at a time. Axes that are already full
/// rank are left untouched.
pub fn make_concise<R: EchelonRing>(
    ring: &R,
    t: &Tensor<R::Elem>,
) -> (Tensor<R::Elem>, ConcisenessCertificate<R::Elem>) {
    let mut cur = t.clone();
    let mut cert = ConcisenessCertificate::identity(ring, t.shape());
    for d in 0..t.ndim() {
        let n = cur.shape()[d];
        let (q, r) = ring.row_reduce(&cur.unfold(d));
        if r == n {
            continue;
        }
        let qinv = ring.invert(&q).expect("row transform is invertible");
        cert.lifts[d] = qinv.col_range(0, r);
        cur = contract(ring, &q.row_range(0, r), d, &cur).expect("shapes agree");
    }
    (cur, cert)
}

/// Sorts axes so side lengths are nonincreasing (stable on ties) and updates
/// the certificate to match.
pub fn sort_axes_desc<E: Clone>(
    t: &Tensor<E>,
    cert: &ConcisenessCertificate<E>,
) -> (Tensor<E>, ConcisenessCertificate<E>) {
    let mut s: Vec<usize> = (0..t.ndim()).collect();
    s.sort_by(|&a, &b| t.shape()[b].cmp(&t.shape()[a]));
    (t.permute_axes(&s), cert.permuted(&s))
}

/// Converts a CPD of the concise tensor into a CPD of the original tensor
/// with the same number of terms.
pub fn expand_cpd<R: Ring>(
    ring: &R,
    cert: &ConcisenessCertificate<R::Elem>,
    cpd: &Cpd<R::Elem>,
) -> Result<Cpd<R::Elem>> {
    if cpd.ndim() != cert.lifts.len() {
        return Err(Error::CertificateMismatch(format!(
            "CPD has {} factors, certificate has {} axes",
            cpd.ndim(),
            cert.lifts.len()
        )));
    }
    let mut factors = vec![None; cpd.ndim()];
    for (i, (lift, a)) in cert.lifts.iter().zip(&cpd.factors).enumerate() {
        if lift.cols() != a.rows() {
            return Err(Error::CertificateMismatch(format!(
                "factor {i} has {} rows, concise side length is {}",
                a.rows(),
                lift.cols()
            )));
        }
        factors[cert.perm[i]] = Some(lift.mul(ring, a)?);
    }
    Ok(Cpd {
        factors: factors.into_iter().map(|f| f.expect("perm is a bijection")).collect(),
    })
}

/// A rank-1 CPD of `t`, or `None` if `t` is zero or has rank above one.
pub fn rank1_decompose<F: Field>(field: &F, t: &Tensor<F::Elem>) -> Option<Cpd<F::Elem>> {
    let k = t.data().iter().position(|e| !field.is_zero(e))?;
    let idx = t.multi_index(k);
    let inv = field.try_inverse(&t.data()[k]).expect("nonzero is a unit");
    let mut src = idx.clone();
    let mut factors = Vec::with_capacity(t.ndim());
    for d in 0..t.ndim() {
        let n = t.shape()[d];
        let col: Vec<F::Elem> = (0..n)
            .map(|i| {
                src[d] = i;
                let e = t.get(&src).clone();
                if d == 0 {
                    e
                } else {
                    field.mul(&e, &inv)
                }
            })
            .collect();
        src[d] = idx[d];
        factors.push(Matrix::from_vec(n, 1, col).expect("column"));
    }
    let cpd = Cpd { factors };
    (cpd_eval(field, &cpd) == *t).then_some(cpd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rank, PrimeField};
    use crate::tensor::{generate, outer};
    use proptest::prelude::*;

    fn all_full_rank(f: &PrimeField, t: &Tensor<u32>) -> bool {
        (0..t.ndim()).all(|d| rank(f, &t.unfold(d)) == t.shape()[d])
    }

    #[test]
    fn concise_input_gets_identity_certificate() {
        let f = PrimeField::gf2();
        let t = generate("mm", &[2, 2, 2]).unwrap();
        let (tc, cert) = make_concise(&f, &t);
        assert_eq!(tc, t);
        assert_eq!(cert, ConcisenessCertificate::identity(&f, &[4, 4, 4]));
    }

    #[test]
    fn duplicated_slice_collapses() {
        let f = PrimeField::gf2();
        let s = [1u32, 1, 0, 1];
        let t = Tensor::new(vec![2, 2, 2], [s, s].concat()).unwrap();
        let (tc, cert) = make_concise(&f, &t);
        assert_eq!(tc.shape()[0], 1);
        assert!(all_full_rank(&f, &tc));
        let c = crate::oracle::brute_cpd(&f, &tc, 2).unwrap().unwrap();
        assert_eq!(cpd_eval(&f, &c), tc);
        let big = expand_cpd(&f, &cert, &c).unwrap();
        assert_eq!(cpd_eval(&f, &big), t);
    }

    #[test]
    fn zero_tensor_collapses_fully() {
        let f = PrimeField::gf2();
        let z = Tensor::zeros(&f, vec![3, 3, 3]);
        let (tc, cert) = make_concise(&f, &z);
        assert_eq!(cert.concise_shape(), vec![0, 0, 0]);
        assert!(tc.is_empty());
        let big = expand_cpd(&f, &cert, &Cpd::empty(&[0, 0, 0])).unwrap();
        assert_eq!(big.shape(), vec![3, 3, 3]);
        assert_eq!(big.rank(), 0);
    }

    #[test]
    fn certificate_mismatch_detected() {
        let f = PrimeField::gf2();
        let cert = ConcisenessCertificate::identity(&f, &[2, 2, 2]);
        assert!(matches!(
            expand_cpd(&f, &cert, &Cpd::empty(&[2, 2])),
            Err(Error::CertificateMismatch(_))
        ));
        assert!(matches!(
            expand_cpd(&f, &cert, &Cpd::empty(&[2, 3, 2])),
            Err(Error::CertificateMismatch(_))
        ));
    }

    #[test]
    fn rank1_examples() {
        let f = PrimeField::new(3).unwrap();
        let t = outer(&f, &[vec![1, 2], vec![0, 2, 1], vec![2, 2]]);
        let c = rank1_decompose(&f, &t).unwrap();
        assert_eq!(c.rank(), 1);
        assert_eq!(cpd_eval(&f, &c), t);
        let g = PrimeField::gf2();
        assert!(rank1_decompose(&g, &generate("wstate", &[]).unwrap()).is_none());
        assert!(rank1_decompose(&g, &Tensor::zeros(&g, vec![2, 2])).is_none());
    }

    #[test]
    fn sorting_axes_keeps_expansion_valid() {
        let f = PrimeField::gf2();
        let t = generate("polymul", &[2]).unwrap().permute_axes(&[1, 0, 2]);
        let (tc, cert) = make_concise(&f, &t);
        let (ts, cs) = sort_axes_desc(&tc, &cert);
        assert_eq!(ts.shape(), &[3, 2, 2]);
        let c = crate::oracle::brute_cpd(&f, &ts, 3).unwrap().unwrap();
        assert_eq!(cpd_eval(&f, &expand_cpd(&f, &cs, &c).unwrap()), t);
    }

    proptest! {
        #[test]
        fn concise_output_is_concise_and_certificate_roundtrips(d in proptest::collection::vec(0u32..3, 12)) {
            let f = PrimeField::new(3).unwrap();
            let t = Tensor::new(vec![3, 2, 2], d).unwrap();
            let (tc, cert) = make_concise(&f, &t);
            prop_assert!(all_full_rank(&f, &tc));
            // lifting the concise tensor back by contraction reproduces t
            let mut back = tc.clone();
            for (i, l) in cert.lifts.iter().enumerate() {
                back = contract(&f, l, i, &back).unwrap();
            }
            prop_assert_eq!(back, t);
        }

        #[test]
        fn rank1_agrees_with_concise_criterion(d in proptest::collection::vec(0u32..2, 12)) {
            let f = PrimeField::gf2();
            let t = Tensor::new(vec![2, 3, 2], d).unwrap();
            let (_, cert) = make_concise(&f, &t);
            let ones = cert.concise_shape().iter().all(|&r| r == 1);
            prop_assert_eq!(rank1_decompose(&f, &t).is_some(), ones);
        }
    }
}
