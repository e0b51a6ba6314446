//! Dense tensors, axis contractions, unfoldings and CPD evaluation.

mod concise;
mod families;

pub use concise::{expand_cpd, make_concise, rank1_decompose, sort_axes_desc, ConcisenessCertificate};
pub use families::{generate, mm_tensor, parse_family, FAMILIES};

use serde::{Deserialize, Serialize};

use crate::algebra::{Matrix, Ring};
use crate::error::{Error, Result};

/// A dense row-major tensor; the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tensor<E> {
    shape: Vec<usize>,
    data: Vec<E>,
}

fn split_at_axis(shape: &[usize], d: usize) -> (usize, usize, usize) {
    let outer = shape[..d].iter().product();
    let inner = shape[d + 1..].iter().product();
    (outer, shape[d], inner)
}

impl<E: Clone> Tensor<E> {
    pub fn new(shape: Vec<usize>, data: Vec<E>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::ShapeMismatch("a tensor needs at least one axis".into()));
        }
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for shape {:?}",
                data.len(),
                shape
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: E) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![value; n],
        }
    }

    pub fn zeros<R: Ring<Elem = E>>(ring: &R, shape: Vec<usize>) -> Self {
        Self::filled(shape, ring.zero())
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> E) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn into_data(self) -> Vec<E> {
        self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for d in (0..self.shape.len()).rev() {
            idx[d] = flat % self.shape[d];
            flat /= self.shape[d];
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &E {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: E) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    pub fn map<F: Clone>(&self, f: impl FnMut(&E) -> F) -> Tensor<F> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reorders axes: axis `i` of the result is axis `perm[i]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.ndim());
        let shape: Vec<usize> = perm.iter().map(|&a| self.shape[a]).collect();
        let mut src = vec![0; self.ndim()];
        Self::from_fn(shape, |idx| {
            for (i, &a) in perm.iter().enumerate() {
                src[a] = idx[i];
            }
            self.get(&src).clone()
        })
    }

    /// The sub-tensor with axis-0 coordinate `i`, as a tensor of one fewer axis.
    /// For a vector this is a 1-element tensor of shape `[1]`.
    pub fn slice0(&self, i: usize) -> Self {
        let inner: usize = self.shape[1..].iter().product();
        let shape = if self.ndim() == 1 {
            vec![1]
        } else {
            self.shape[1..].to_vec()
        };
        Self {
            shape,
            data: self.data[i * inner..(i + 1) * inner].to_vec(),
        }
    }

    /// Restricts axis `d` to coordinates `start..end`.
    pub fn restrict_axis(&self, d: usize, start: usize, end: usize) -> Self {
        let mut shape = self.shape.clone();
        shape[d] = end - start;
        let mut src = vec![0; self.ndim()];
        Self::from_fn(shape, |idx| {
            src.copy_from_slice(idx);
            src[d] += start;
            self.get(&src).clone()
        })
    }

    /// Matrix view of a 2-axis tensor.
    pub fn to_matrix(&self) -> Matrix<E> {
        assert_eq!(self.ndim(), 2, "to_matrix needs a 2-axis tensor");
        Matrix::from_vec(self.shape[0], self.shape[1], self.data.clone()).expect("shape")
    }

    pub fn from_matrix(m: &Matrix<E>) -> Self {
        Self {
            shape: vec![m.rows(), m.cols()],
            data: m.data().to_vec(),
        }
    }

    /// Unfolding along axis `d`: row `i` is the slice at coordinate `i`,
    /// flattened row-major over the remaining axes in increasing order.
    pub fn unfold(&self, d: usize) -> Matrix<E> {
        let (outer, n, inner) = split_at_axis(&self.shape, d);
        Matrix::from_fn(n, outer * inner, |i, c| {
            let (o, k) = (c / inner, c % inner);
            self.data[(o * n + i) * inner + k].clone()
        })
    }
}

impl<E: Clone> Tensor<E> {
    pub fn is_zero<R: Ring<Elem = E>>(&self, ring: &R) -> bool {
        self.data.iter().all(|e| ring.is_zero(e))
    }

    pub fn add<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| ring.add(a, b))
    }

    pub fn sub<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| ring.sub(a, b))
    }

    pub fn scale<R: Ring<Elem = E>>(&self, ring: &R, c: &E) -> Self {
        self.map(|a| ring.mul(a, c))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&E, &E) -> E) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Linear combination of axis-0 slices, `v ×_0 T`, with the axis removed.
    pub fn contract_vec0<R: Ring<Elem = E>>(&self, ring: &R, v: &[E]) -> Self {
        assert_eq!(v.len(), self.shape[0]);
        let inner: usize = self.shape[1..].iter().product();
        let mut out = vec![ring.zero(); inner];
        for (i, vi) in v.iter().enumerate() {
            if ring.is_zero(vi) {
                continue;
            }
            let s = &self.data[i * inner..(i + 1) * inner];
            for (o, t) in out.iter_mut().zip(s) {
                *o = ring.mul_add(o, vi, t);
            }
        }
        let shape = if self.ndim() == 1 {
            vec![1]
        } else {
            self.shape[1..].to_vec()
        };
        Self { shape, data: out }
    }
}

/// Axis-`d` contraction `M ×_d T`.
pub fn contract<R: Ring>(
    ring: &R,
    m: &Matrix<R::Elem>,
    d: usize,
    t: &Tensor<R::Elem>,
) -> Result<Tensor<R::Elem>> {
    if d >= t.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "axis {d} of a {}-axis tensor",
            t.ndim()
        )));
    }
    let (outer, n, inner) = split_at_axis(&t.shape, d);
    if m.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix along axis {d} of length {n}",
            m.rows(),
            m.cols()
        )));
    }
    let nr = m.rows();
    let mut shape = t.shape.clone();
    shape[d] = nr;
    let mut data = vec![ring.zero(); outer * nr * inner];
    for o in 0..outer {
        for ip in 0..nr {
            let dst = (o * nr + ip) * inner;
            for i in 0..n {
                let c = m.get(ip, i);
                if ring.is_zero(c) {
                    continue;
                }
                let src = (o * n + i) * inner;
                for k in 0..inner {
                    data[dst + k] = ring.mul_add(&data[dst + k], c, &t.data[src + k]);
                }
            }
        }
    }
    Ok(Tensor { shape, data })
}

/// Kronecker product of two tensors with the same number of axes.
pub fn kron<R: Ring>(ring: &R, a: &Tensor<R::Elem>, b: &Tensor<R::Elem>) -> Result<Tensor<R::Elem>> {
    if a.ndim() != b.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "kron of {:?} and {:?}",
            a.shape, b.shape
        )));
    }
    let shape: Vec<usize> = a.shape.iter().zip(&b.shape).map(|(x, y)| x * y).collect();
    let mut ia = vec![0; a.ndim()];
    let mut ib = vec![0; a.ndim()];
    Ok(Tensor::from_fn(shape, |idx| {
        for d in 0..idx.len() {
            ia[d] = idx[d] / b.shape[d];
            ib[d] = idx[d] % b.shape[d];
        }
        ring.mul(a.get(&ia), b.get(&ib))
    }))
}

/// Outer product of vectors.
pub fn outer<R: Ring>(ring: &R, vs: &[Vec<R::Elem>]) -> Tensor<R::Elem> {
    let mut data = vec![ring.one()];
    for v in vs {
        let mut next = Vec::with_capacity(data.len() * v.len());
        for a in &data {
            for b in v {
                next.push(ring.mul(a, b));
            }
        }
        data = next;
    }
    Tensor {
        shape: vs.iter().map(Vec::len).collect(),
        data,
    }
}

/// A CPD: factor matrices `A_0, .., A_{D-1}` sharing a column count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpd<E> {
    pub factors: Vec<Matrix<E>>,
}

impl<E: Clone> Cpd<E> {
    pub fn new(factors: Vec<Matrix<E>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ShapeMismatch("a CPD needs at least one factor".into()));
        }
        let r = factors[0].cols();
        if factors.iter().any(|f| f.cols() != r) {
            return Err(Error::ShapeMismatch(
                "factor matrices must share a column count".into(),
            ));
        }
        Ok(Self { factors })
    }

    /// The rank-0 CPD for the given shape.
    pub fn empty(shape: &[usize]) -> Self {
        Self {
            factors: shape.iter().map(|&n| Matrix::from_vec(n, 0, Vec::new()).unwrap()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.factors[0].cols()
    }

    pub fn ndim(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::rows).collect()
    }

    /// The vectors of the `r`-th rank-1 term.
    pub fn term(&self, r: usize) -> Vec<Vec<E>> {
        self.factors.iter().map(|f| f.column(r)).collect()
    }

    /// Appends one rank-1 term.
    pub fn push_term(&mut self, vs: &[Vec<E>]) {
        assert_eq!(vs.len(), self.ndim());
        for (f, v) in self.factors.iter_mut().zip(vs) {
            let col = Matrix::from_vec(v.len(), 1, v.clone()).expect("column");
            *f = f.hstack(&col).expect("row counts match");
        }
    }

    /// Concatenates the terms of two CPDs of the same shape.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.hstack(b))
            .collect::<Result<_>>()?;
        Ok(Self { factors })
    }

    /// Reorders factors: factor `i` of the result is factor `perm[i]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        Self {
            factors: perm.iter().map(|&a| self.factors[a].clone()).collect(),
        }
    }

    pub fn map<F: Clone>(&self, mut f: impl FnMut(&E) -> F) -> Cpd<F> {
        Cpd {
            factors: self.factors.iter().map(|m| m.map(&mut f)).collect(),
        }
    }
}

/// `⟨⟨A_0, .., A_{D-1}⟩⟩ = Σ_r ⊗_d (A_d)_{:,r}`.
pub fn cpd_eval<R: Ring>(ring: &R, cpd: &Cpd<R::Elem>) -> Tensor<R::Elem> {
    let shape = cpd.shape();
    let mut acc = Tensor::zeros(ring, shape);
    for r in 0..cpd.rank() {
        let term = outer(ring, &cpd.term(r));
        for (a, t) in acc.data.iter_mut().zip(&term.data) {
            *a = ring.add(a, t);
        }
    }
    acc
}

/// Evaluates `cpd` and checks it against an explicit shape.
pub fn cpd_eval_checked<R: Ring>(
    ring: &R,
    cpd: &Cpd<R::Elem>,
    shape: &[usize],
) -> Result<Tensor<R::Elem>> {
    if cpd.shape() != shape {
        return Err(Error::ShapeMismatch(format!(
            "CPD of shape {:?} for tensor of shape {:?}",
            cpd.shape(),
            shape
        )));
    }
    Ok(cpd_eval(ring, cpd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use proptest::prelude::*;

    fn t3(shape: [usize; 3], d: &[u32]) -> Tensor<u32> {
        Tensor::new(shape.to_vec(), d.to_vec()).unwrap()
    }

    fn wstate() -> Tensor<u32> {
        t3([2, 2, 2], &[1, 0, 0, 0, 0, 1, 1, 0])
    }

    #[test]
    fn identity_contraction_is_noop() {
        let f = PrimeField::gf2();
        let w = wstate();
        for d in 0..3 {
            assert_eq!(contract(&f, &Matrix::identity(&f, 2), d, &w).unwrap(), w);
        }
        assert!(contract(&f, &Matrix::identity(&f, 3), 0, &w).is_err());
    }

    #[test]
    fn wstate_contraction_along_axis_zero() {
        let f = PrimeField::new(5).unwrap();
        let (a, b) = (2u32, 3u32);
        let m = wstate().contract_vec0(&f, &[a, b]).to_matrix();
        assert_eq!(m.data(), &[a, b, b, 0]);
        let via = contract(&f, &Matrix::from_vec(1, 2, vec![a, b]).unwrap(), 0, &wstate()).unwrap();
        assert_eq!(via.data(), m.data());
    }

    #[test]
    fn unfold_examples() {
        let m = Tensor::new(vec![2, 3], vec![1u32, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(m.unfold(0), m.to_matrix());
        assert_eq!(m.unfold(1), m.to_matrix().transpose());
        assert_eq!(wstate().unfold(0).data(), &[1, 0, 0, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn empty_cpd_is_zero() {
        let f = PrimeField::gf2();
        let c = Cpd::<u32>::empty(&[2, 3, 1]);
        assert!(cpd_eval(&f, &c).is_zero(&f));
        assert_eq!(cpd_eval(&f, &c).shape(), &[2, 3, 1]);
        assert!(cpd_eval_checked(&f, &c, &[2, 3, 2]).is_err());
    }

    #[test]
    fn permute_roundtrip() {
        let t = Tensor::from_fn(vec![2, 3, 4], |i| (i[0] * 12 + i[1] * 4 + i[2]) as u32);
        let p = t.permute_axes(&[2, 0, 1]);
        assert_eq!(p.shape(), &[4, 2, 3]);
        assert_eq!(*p.get(&[3, 1, 2]), *t.get(&[1, 2, 3]));
        assert_eq!(p.permute_axes(&[1, 2, 0]), t);
    }

    fn arb_cpd(p: u32, shape: [usize; 3], r: usize) -> impl Strategy<Value = Cpd<u32>> {
        let n: usize = shape.iter().sum::<usize>() * r;
        proptest::collection::vec(0..p, n).prop_map(move |d| {
            let mut off = 0;
            let factors = shape
                .iter()
                .map(|&s| {
                    let m = Matrix::from_vec(s, r, d[off..off + s * r].to_vec()).unwrap();
                    off += s * r;
                    m
                })
                .collect();
            Cpd { factors }
        })
    }

    proptest! {
        #[test]
        fn contraction_acts_on_factor_gf2(c in arb_cpd(2, [2, 3, 2], 3), m in proptest::collection::vec(0u32..2, 6), d in 0usize..3) {
            let f = PrimeField::gf2();
            let n = c.shape()[d];
            let m = Matrix::from_vec(6 / n, n, m[..(6 / n) * n].to_vec()).unwrap();
            let lhs = contract(&f, &m, d, &cpd_eval(&f, &c)).unwrap();
            let mut c2 = c.clone();
            c2.factors[d] = m.mul(&f, &c.factors[d]).unwrap();
            prop_assert_eq!(lhs, cpd_eval(&f, &c2));
        }

        #[test]
        fn contraction_acts_on_factor_gf3(c in arb_cpd(3, [2, 2, 3], 2), m in proptest::collection::vec(0u32..3, 4)) {
            let f = PrimeField::new(3).unwrap();
            let m = Matrix::from_vec(2, 2, m).unwrap();
            let lhs = contract(&f, &m, 1, &cpd_eval(&f, &c)).unwrap();
            let mut c2 = c.clone();
            c2.factors[1] = m.mul(&f, &c.factors[1]).unwrap();
            prop_assert_eq!(lhs, cpd_eval(&f, &c2));
        }

        #[test]
        fn contractions_compose(t in proptest::collection::vec(0u32..2, 8), a in proptest::collection::vec(0u32..2, 4), b in proptest::collection::vec(0u32..2, 4), d in 0usize..3) {
            let f = PrimeField::gf2();
            let t = t3([2, 2, 2], &t);
            let m1 = Matrix::from_vec(2, 2, a).unwrap();
            let m2 = Matrix::from_vec(2, 2, b).unwrap();
            let lhs = contract(&f, &m2.mul(&f, &m1).unwrap(), d, &t).unwrap();
            let rhs = contract(&f, &m2, d, &contract(&f, &m1, d, &t).unwrap()).unwrap();
            // independent evaluation of the left side
            let mm = m2.mul(&f, &m1).unwrap();
            let direct = Tensor::from_fn(vec![2, 2, 2], |idx| {
                let mut s = 0u32;
                for i in 0..2 {
                    let mut src = idx.to_vec();
                    src[d] = i;
                    s ^= mm.get(idx[d], i) & t.get(&src);
                }
                s
            });
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(lhs, direct);
        }
    }
}
