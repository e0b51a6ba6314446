//! The leaf step: with every trailing column fixed, solve for `Q~ = [Q | C]`.

use super::augmented::{normalized_vectors, outer_flat, AugmentedTensor};
use super::Branch;
use crate::algebra::{invert, kernel_basis, vectors, EchelonBasis, Matrix, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::tensor::{rank1_decompose, Cpd, Tensor};

/// Which strategy `good_pairs` uses for an `R`-column assignment.
pub fn resolve_branch(branch: Branch, shape: &[usize], r: usize) -> Branch {
    match branch {
        Branch::Auto => {
            if r <= shape.iter().skip(2).sum::<usize>() {
                Branch::EnumerateV
            } else {
                Branch::Kernel
            }
        }
        b => b,
    }
}

/// Products `⊗_{d>=2} u_d` over normalized `u_d`; a single `[1]` when `D = 2`.
pub fn kernel_units(field: &PrimeField, shape: &[usize]) -> Result<Vec<Vec<u32>>> {
    let per_axis: Vec<Vec<Vec<u32>>> = shape
        .iter()
        .skip(2)
        .map(|&n| normalized_vectors(field, n))
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new()];
    for choices in &per_axis {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for v in choices {
                let mut t: Vec<Vec<u32>> = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    Ok(out.iter().map(|vs| outer_flat(field, vs)).collect())
}

/// Kernel rows `(v, c, u_1)` of `(v, c, u_1) ↦ [v|c] ×_0 T' - u_1 ⊗ unit`.
fn kernel_rows(aug: &AugmentedTensor, unit: &[u32]) -> Matrix<u32> {
    let f = aug.field();
    let r = aug.r();
    let n1 = aug.shape()[1];
    let inner = unit.len();
    let eqs = aug.slice_len();
    let m = Matrix::from_fn(eqs, r + n1, |e, z| {
        if z < r {
            aug.row(z)[e]
        } else if z - r == e / inner {
            f.neg(&unit[e % inner])
        } else {
            0
        }
    });
    kernel_basis(f, &m)
}

/// All pairs `(v, c)` with `rank([v|c] ×_0 T') <= 1` (enumerate branch), or the
/// kernel-basis pairs whose span equals theirs (kernel branch). Lazy.
pub fn good_pairs<'a>(
    aug: &'a AugmentedTensor,
    branch: Branch,
) -> Result<Box<dyn Iterator<Item = (Vec<u32>, Vec<u32>)> + 'a>> {
    let n0 = aug.n0();
    let m = aug.r() - n0;
    let f = *aug.field();
    match resolve_branch(branch, aug.shape(), aug.r()) {
        Branch::Kernel => {
            let units = kernel_units(&f, aug.shape())?;
            Ok(Box::new(units.into_iter().flat_map(move |u| {
                let k = kernel_rows(aug, &u);
                (0..k.rows())
                    .map(|i| {
                        let row = k.row(i);
                        (row[..n0].to_vec(), row[n0..n0 + m].to_vec())
                    })
                    .collect::<Vec<_>>()
            })))
        }
        _ => {
            let q = f.modulus() as u64;
            let total = q.checked_pow((n0 + m) as u32).ok_or_else(|| Error::TooLarge("F^R".into()))?;
            Ok(Box::new((0..total).filter_map(move |idx| {
                let v = crate::algebra::vector_at(&f, n0 + m, idx);
                let s = aug.combine(&v);
                aug.slice_rank_le_one(&s).then(|| (v[..n0].to_vec(), v[n0..].to_vec()))
            })))
        }
    }
}

/// Rows `(v, c)` accumulated greedily while `v` raises the rank of `Q`.
fn accumulate(aug: &AugmentedTensor, branch: Branch) -> Result<Option<Vec<(Vec<u32>, Vec<u32>)>>> {
    let f = *aug.field();
    let n0 = aug.n0();
    let m = aug.r() - n0;
    let mut basis = EchelonBasis::new(f, n0);
    let mut picked = Vec::with_capacity(n0);
    match resolve_branch(branch, aug.shape(), aug.r()) {
        Branch::Kernel => {
            for u in kernel_units(&f, aug.shape())? {
                let k = kernel_rows(aug, &u);
                for i in 0..k.rows() {
                    let row = k.row(i);
                    if basis.insert(&row[..n0]) {
                        picked.push((row[..n0].to_vec(), row[n0..n0 + m].to_vec()));
                        if basis.is_full() {
                            return Ok(Some(picked));
                        }
                    }
                }
            }
        }
        _ => {
            // v-major order; prefixes already in the span cannot help
            for v in vectors(&f, n0).skip(1) {
                if basis.contains(&v) {
                    continue;
                }
                let base = aug.combine(&v);
                for c in vectors(&f, m) {
                    let mut s = base.clone();
                    for (j, cj) in c.iter().enumerate() {
                        if *cj == 0 {
                            continue;
                        }
                        for (o, x) in s.iter_mut().zip(aug.row(n0 + j)) {
                            *o = f.mul_add(o, cj, x);
                        }
                    }
                    if aug.slice_rank_le_one(&s) {
                        basis.insert(&v);
                        picked.push((v.clone(), c));
                        break;
                    }
                }
                if basis.is_full() {
                    return Ok(Some(picked));
                }
            }
        }
    }
    Ok(basis.is_full().then_some(picked))
}

/// Solves a fully fixed search state. Returns a CPD of the base tensor with
/// `r` columns, `A_0 = Q^{-1}[I | C]` and `A_d = [X_d | Y_d]`.
pub fn test_assignment(aug: &AugmentedTensor, branch: Branch) -> Result<Option<Cpd<u32>>> {
    let Some(picked) = accumulate(aug, branch)? else {
        return Ok(None);
    };
    assemble(aug, &picked).map(Some)
}

pub(crate) fn assemble(aug: &AugmentedTensor, picked: &[(Vec<u32>, Vec<u32>)]) -> Result<Cpd<u32>> {
    let f = *aug.field();
    let n0 = aug.n0();
    let r = aug.r();
    let dims = aug.shape().len();
    let q = Matrix::from_fn(n0, n0, |i, j| picked[i].0[j]);
    let qinv = invert(&f, &q).map_err(|_| Error::InternalInconsistency("accumulated Q is singular".into()))?;
    let ic = Matrix::from_fn(n0, r, |i, j| {
        if j < n0 {
            (i == j) as u32
        } else {
            picked[i].1[j - n0]
        }
    });
    let a0 = qinv.mul(&f, &ic)?;
    let mut x: Vec<Matrix<u32>> = (1..dims).map(|d| Matrix::zeros(&f, aug.shape()[d], n0)).collect();
    for (i, (v, c)) in picked.iter().enumerate() {
        let mut qrow = v.clone();
        qrow.extend_from_slice(c);
        let s = aug.combine(&qrow);
        if s.iter().all(|&e| e == 0) {
            continue;
        }
        let st = Tensor::new(aug.slice_shape().to_vec(), s).expect("slice shape");
        let Some(one) = rank1_decompose(&f, &st) else {
            return Err(Error::InternalInconsistency(format!(
                "accepted row {i} does not give a rank-1 slice"
            )));
        };
        for (d, xd) in x.iter_mut().enumerate() {
            for k in 0..xd.rows() {
                xd.set(k, i, *one.factors[d].get(k, 0));
            }
        }
    }
    let mut factors = vec![a0];
    for (d, xd) in x.into_iter().enumerate() {
        factors.push(xd.hstack(&aug.y(d + 1))?);
    }
    debug_assert_eq!(factors[0].cols(), r);
    Cpd::new(factors)
}
