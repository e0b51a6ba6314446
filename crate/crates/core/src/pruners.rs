//! Feasibility tests for partial search states of 3-axis tensors.
//!
//! Negative pruners (`rref_prune`, `lask_prune`, and the root-only
//! `kth_order_rref_prune` and `frequency_prune`) return `false` only when no
//! CPD consistent with the fixed columns exists. `rref_heuristic` is positive:
//! it may return a CPD directly.

use crate::algebra::{invert, rref, vector_at, vectors, EchelonBasis, Matrix, PrimeField, Ring};
use crate::cpd_search::augmented::{matrix_rank, AugmentedTensor};
use crate::cpd_search::{search_rank_le, PrunerSet, SearchConfig};
use crate::error::{Error, Result};
use crate::tensor::{contract, cpd_eval, Cpd, Tensor};

fn require_3d(shape: &[usize]) -> Result<()> {
    if shape.len() != 3 {
        return Err(Error::UnsupportedD(shape.len()));
    }
    Ok(())
}

fn slice_rank(aug: &AugmentedTensor, s: &[u32]) -> usize {
    let sh = aug.slice_shape();
    matrix_rank(aug.field(), sh[0], sh[1], s)
}

/// Calls `f` on `base + Σ_j w_j T'_{n_0 + j}` for every `w`, stopping once it returns true.
fn any_suffix(aug: &AugmentedTensor, base: &[u32], mut f: impl FnMut(&[u32]) -> bool) -> bool {
    let field = aug.field();
    let n0 = aug.n0();
    let m = aug.r() - n0;
    let mut s = base.to_vec();
    for w in vectors(field, m) {
        s.copy_from_slice(base);
        for (j, wj) in w.iter().enumerate() {
            if *wj == 0 {
                continue;
            }
            for (o, x) in s.iter_mut().zip(aug.row(n0 + j)) {
                *o = field.mul_add(o, wj, x);
            }
        }
        if f(&s) {
            return true;
        }
    }
    false
}

/// Whether `{v ∈ F^r : rk(v ×_0 T') <= R - r + 1}` has prefixes `v_{:n_0}` spanning `F^{n_0}`.
pub fn rref_prune(aug: &AugmentedTensor, r_max: usize) -> Result<bool> {
    require_3d(aug.shape())?;
    let r = aug.r();
    if r > r_max {
        return Ok(false);
    }
    let thr = r_max - r + 1;
    let sh = aug.slice_shape();
    if thr >= sh[0].min(sh[1]) {
        return Ok(true);
    }
    let field = *aug.field();
    let n0 = aug.n0();
    let mut basis = EchelonBasis::new(field, n0);
    for v in vectors(&field, n0).skip(1) {
        if basis.contains(&v) {
            continue;
        }
        let base = aug.combine(&v);
        if any_suffix(aug, &base, |s| slice_rank(aug, s) <= thr) {
            basis.insert(&v);
            if basis.is_full() {
                return Ok(true);
            }
        }
    }
    Ok(basis.is_full())
}

/// The Laskowski-sum test: `Σ_v min_w rk(v ×_0 T - ⟨⟨w, Y_1, Y_2⟩⟩)` must not
/// exceed `(R - (r - n_0)) (p^{n_0} - p^{n_0 - 1})`.
pub fn lask_prune(aug: &AugmentedTensor, r_max: usize) -> Result<bool> {
    require_3d(aug.shape())?;
    let field = *aug.field();
    let n0 = aug.n0();
    let m = aug.r() - n0;
    if m > r_max {
        return Ok(false);
    }
    let p = field.modulus() as u64;
    let bound = (r_max - m) as u64 * (p.pow(n0 as u32) - p.pow(n0 as u32 - 1));
    lask_sum_exceeds(aug, bound).map(|over| !over)
}

/// Whether the Laskowski sum of `aug` is larger than `bound`; stops early.
pub fn lask_sum_exceeds(aug: &AugmentedTensor, bound: u64) -> Result<bool> {
    require_3d(aug.shape())?;
    let field = *aug.field();
    let mut sum = 0u64;
    for v in vectors(&field, aug.n0()).skip(1) {
        let base = aug.combine(&v);
        let mut best = usize::MAX;
        any_suffix(aug, &base, |s| {
            best = best.min(slice_rank(aug, s));
            best == 0
        });
        sum += best as u64;
        if sum > bound {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The full Laskowski sum, for diagnostics.
pub fn lask_sum(aug: &AugmentedTensor) -> Result<u64> {
    require_3d(aug.shape())?;
    let field = *aug.field();
    let mut sum = 0u64;
    for v in vectors(&field, aug.n0()).skip(1) {
        let base = aug.combine(&v);
        let mut best = usize::MAX;
        any_suffix(aug, &base, |s| {
            best = best.min(slice_rank(aug, s));
            best == 0
        });
        sum += best as u64;
    }
    Ok(sum)
}

/// Rank factorization `M = B_1 B_2^T` with `rank(M)` columns.
fn rank_factor(field: &PrimeField, rows: usize, cols: usize, data: &[u32]) -> (Matrix<u32>, Matrix<u32>) {
    let m = Matrix::from_vec(rows, cols, data.to_vec()).expect("shape");
    let r = rref(field, &m);
    let qinv = invert(field, &r.transform).expect("transform is invertible");
    (qinv.col_range(0, r.rank), r.reduced.row_range(0, r.rank).transpose())
}

/// Largest `r` for which the heuristic enumerates `F^r`.
const HEURISTIC_MAX_VECTORS: u64 = 1 << 22;

/// Greedily picks low-rank rows of `Q~`, then factors each slice of
/// `Q~ ×_0 T'`. Returns the CPD if it has at most `R` terms.
pub fn rref_heuristic(aug: &AugmentedTensor, r_max: usize) -> Result<Option<Cpd<u32>>> {
    require_3d(aug.shape())?;
    let field = *aug.field();
    let n0 = aug.n0();
    let r = aug.r();
    let m = r - n0;
    if m > r_max {
        return Ok(None);
    }
    let total = match (field.modulus() as u64).checked_pow(r as u32) {
        Some(t) if t <= HEURISTIC_MAX_VECTORS => t,
        _ => return Ok(None),
    };
    let sh = aug.slice_shape().to_vec();
    let max_rank = sh[0].min(sh[1]);
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); max_rank + 1];
    for idx in 1..total {
        let q = vector_at(&field, r, idx);
        let s = aug.combine(&q);
        buckets[slice_rank(aug, &s)].push(idx);
    }
    let budget = r_max - m;
    let mut basis = EchelonBasis::new(field, n0);
    let mut picked: Vec<(Vec<u32>, usize)> = Vec::with_capacity(n0);
    let mut spent = 0usize;
    'outer: for (rk, bucket) in buckets.iter().enumerate() {
        for &idx in bucket {
            let q = vector_at(&field, r, idx);
            if basis.insert(&q[..n0]) {
                spent += rk;
                if spent > budget {
                    return Ok(None);
                }
                picked.push((q, rk));
                if basis.is_full() {
                    break 'outer;
                }
            }
        }
    }
    if !basis.is_full() {
        return Ok(None);
    }
    let q = Matrix::from_fn(n0, n0, |i, j| picked[i].0[j]);
    let qinv = invert(&field, &q).map_err(|_| Error::InternalInconsistency("heuristic Q is singular".into()))?;
    let mut a = [Vec::new(), Vec::new(), Vec::new()];
    for (i, (row, _)) in picked.iter().enumerate() {
        let s = aug.combine(row);
        let (b1, b2) = rank_factor(&field, sh[0], sh[1], &s);
        for k in 0..b1.cols() {
            a[0].push(qinv.column(i));
            a[1].push(b1.column(k));
            a[2].push(b2.column(k));
        }
    }
    let c = Matrix::from_fn(n0, m, |i, j| picked[i].0[n0 + j]);
    let qc = qinv.mul(&field, &c)?;
    for (j, cols) in aug.fixed().iter().enumerate() {
        a[0].push(qc.column(j));
        a[1].push(cols[0].clone());
        a[2].push(cols[1].clone());
    }
    let shape = aug.shape();
    let factors = (0..3)
        .map(|d| Matrix::from_fn(shape[d], a[d].len(), |i, j| a[d][j][i]))
        .collect();
    let cpd = Cpd::new(factors)?;
    let base = Tensor::new(shape.to_vec(), (0..n0).flat_map(|i| aug.row(i).to_vec()).collect())?;
    if cpd_eval(&field, &cpd) != base {
        return Err(Error::InternalInconsistency("heuristic CPD does not evaluate to T".into()));
    }
    Ok(Some(cpd))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn column_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn determinant(field: &PrimeField, m: &Matrix<u32>) -> u32 {
    let n = m.rows();
    let mut a = m.clone();
    let mut det = 1u32;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| *a.get(i, c) != 0) else {
            return 0;
        };
        if p != c {
            a.swap_rows(p, c);
            det = field.neg(&det);
        }
        let pv = *a.get(c, c);
        det = field.mul(&det, &pv);
        let inv = field.inverse(pv).expect("nonzero pivot");
        for i in c + 1..n {
            let factor = field.neg(&field.mul(a.get(i, c), &inv));
            a.add_row_multiple(field, i, c, &factor);
        }
    }
    det
}

/// Coordinates of `v_0 ∧ .. ∧ v_{k-1}`: the `k x k` minors of the stacked rows.
pub fn wedge(field: &PrimeField, v: &Matrix<u32>) -> Vec<u32> {
    let k = v.rows();
    column_subsets(v.cols(), k)
        .iter()
        .map(|cols| determinant(field, &Matrix::from_fn(k, k, |i, j| *v.get(i, cols[j]))))
        .collect()
}

/// `k`-th order rref pruning with no columns fixed: the wedges of all
/// `k`-dimensional row spaces `V` with `rk(V ×_0 T) <= R - n_0 + k` must span
/// the exterior power.
pub fn kth_order_rref_prune(field: &PrimeField, t: &Tensor<u32>, k: usize, r_max: usize) -> Result<bool> {
    require_3d(t.shape())?;
    let n0 = t.shape()[0];
    if k == 0 || k > n0 {
        return Err(Error::UnsupportedK { k, max: n0 });
    }
    if r_max + k < n0 {
        return Ok(false);
    }
    let thr = r_max + k - n0;
    let dim = binomial(n0, k);
    let mut basis = EchelonBasis::new(*field, dim);
    let cfg = SearchConfig {
        pruners: PrunerSet::default(),
        deterministic: true,
        ..SearchConfig::default()
    };
    let q = field.modulus() as u64;
    let total = q
        .checked_pow((k * n0) as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::TooLarge(format!("{q}^{} subspace candidates", k * n0)))?;
    for idx in 0..total {
        let v = Matrix::from_vec(k, n0, vector_at(field, k * n0, idx))?;
        let red = rref(field, &v);
        if red.rank < k || red.reduced != v {
            continue;
        }
        let w = wedge(field, &v);
        if basis.contains(&w) {
            continue;
        }
        let sub = contract(field, &v, 0, t)?;
        if search_rank_le(field, &sub, thr, &cfg)?.witness.is_some() {
            basis.insert(&w);
            if basis.is_full() {
                return Ok(true);
            }
        }
    }
    Ok(basis.is_full())
}

/// Frequency pruning with no columns fixed: for each `1 <= k <= n_0`, at
/// least `p^k` vectors `v` have `rk(v ×_0 T) <= R - n_0 + k`.
pub fn frequency_prune(field: &PrimeField, t: &Tensor<u32>, r_max: usize) -> Result<bool> {
    require_3d(t.shape())?;
    let (n0, n1, n2) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let ranks: Vec<usize> = vectors(field, n0)
        .map(|v| matrix_rank(field, n1, n2, t.contract_vec0(field, &v).data()))
        .collect();
    let p = field.modulus() as u64;
    for k in 1..=n0 {
        let count = if r_max + k < n0 {
            0
        } else {
            let thr = r_max + k - n0;
            ranks.iter().filter(|&&r| r <= thr).count() as u64
        };
        if count < p.pow(k as u32) {
            return Ok(false);
        }
    }
    Ok(true)
}
