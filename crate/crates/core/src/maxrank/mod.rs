//! Bounds on the maximum rank of a tensor shape, and exhaustive max-rank
//! search over canonical GF(2) tensors.

pub mod canonical;

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use canonical::{canonical_count, canonical_stream, for_each_canonical, CanonicalOptions, SliceFilter};

use crate::algebra::{PrimeField, Ring};
use crate::cpd_search::{rank_exact, search_rank_le, trivial_upper_bound, SearchConfig};
use crate::error::{Error, Result};
use crate::tensor::{Cpd, Tensor};

/// `ceil(Π n_d / Σ n_d)`.
pub fn bound_counting(shape: &[usize]) -> usize {
    let prod: usize = shape.iter().product();
    let sum: usize = shape.iter().sum();
    if sum == 0 {
        0
    } else {
        prod.div_ceil(sum)
    }
}

/// `min_d Π_{d' != d} n_{d'}`.
pub fn bound_trivial_upper(shape: &[usize]) -> usize {
    trivial_upper_bound(shape)
}

/// Upper bound from `R(m, n, p) <= R(m-1, n-1, p) + p`, applied recursively
/// over every choice of the untouched axis and capped by the trivial bound.
pub fn bound_howell_upper(shape: &[usize]) -> Result<usize> {
    if shape.len() != 3 {
        return Err(Error::UnsupportedD(shape.len()));
    }
    fn rec(s: [usize; 3], memo: &mut HashMap<[usize; 3], usize>) -> usize {
        let mut key = s;
        key.sort_unstable();
        if key[0] == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut best = trivial_upper_bound(&key);
        for keep in 0..3 {
            let mut t = key;
            for (d, x) in t.iter_mut().enumerate() {
                if d != keep {
                    *x -= 1;
                }
            }
            best = best.min(rec(t, memo) + key[keep]);
        }
        memo.insert(key, best);
        best
    }
    Ok(rec([shape[0], shape[1], shape[2]], &mut HashMap::new()))
}

/// Exact `R(m, n, 2)` for `m >= n >= 2` over the field of size `q`.
pub fn bound_nn2(m: usize, n: usize, q: u64) -> Result<usize> {
    if !(m >= n && n >= 2) {
        return Err(Error::InvalidShape(format!("need m >= n >= 2, got m = {m}, n = {n}")));
    }
    Ok(if q == 2 {
        if m <= 2 * n - 2 {
            n + m.div_ceil(2)
        } else if m == 2 * n - 1 {
            2 * n - 1
        } else {
            2 * n
        }
    } else if m <= 2 * n - 1 {
        n + m / 2
    } else {
        2 * n
    })
}

/// `R(m, n, mn - k) >= max_{r <= m, s <= n, rs >= k} counting(r, s, rs - k) + mn - rs`.
pub fn bound_skinny_lower(m: usize, n: usize, k: usize) -> Result<usize> {
    if k > m * n {
        return Err(Error::InvalidShape(format!("k = {k} exceeds mn = {}", m * n)));
    }
    let mut best = 0;
    for r in 1..=m {
        for s in 1..=n {
            if r * s < k {
                continue;
            }
            best = best.max(bound_counting(&[r, s, r * s - k]) + m * n - r * s);
        }
    }
    Ok(best)
}

/// Bound for `m x n x p` by cutting axis 2 into `m x n x 2` pieces (plus a
/// `m x n x 1` remainder) and bounding each piece over any field.
fn slab_upper(m: usize, n: usize, p: usize) -> usize {
    let (hi, lo) = (m.max(n), m.min(n));
    let piece = if lo >= 2 {
        bound_nn2(hi, lo, 2)
            .expect("valid")
            .max(bound_nn2(hi, lo, 3).expect("valid"))
    } else {
        trivial_upper_bound(&[hi, lo, 2])
    };
    (p / 2) * piece + (p % 2) * lo
}

/// Finite-`n` value of the chain `R(n,n,n) <= R(n, n-k, n-k) + kn`, each
/// term bounded by slabs, minimized over admissible `k`.
pub fn bound_improved_nnn(n: usize) -> usize {
    (0..=n)
        .filter(|&k| n <= 2 * (n - k))
        .map(|k| slab_upper(n, n - k, n - k) + k * n)
        .min()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub value: usize,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeBounds {
    pub shape: Vec<usize>,
    pub field: u64,
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

impl ShapeBounds {
    pub fn best_lower(&self) -> &Bound {
        self.lower.iter().max_by_key(|b| b.value).expect("counting bound is always present")
    }

    pub fn best_upper(&self) -> &Bound {
        self.upper.iter().min_by_key(|b| b.value).expect("trivial bound is always present")
    }
}

/// Every bound that applies to `shape` over the field of size `q`.
pub fn shape_bounds(shape: &[usize], q: u64) -> Result<ShapeBounds> {
    if shape.is_empty() {
        return Err(Error::InvalidShape("empty shape".into()));
    }
    let b = |value, source: &str| Bound {
        value,
        source: source.to_string(),
    };
    let mut lower = vec![b(bound_counting(shape), "counting")];
    let mut upper = vec![b(bound_trivial_upper(shape), "trivial")];
    if shape.len() == 2 {
        let v = shape[0].min(shape[1]);
        lower.push(b(v, "matrix"));
        upper.push(b(v, "matrix"));
    }
    if shape.len() == 3 {
        upper.push(b(bound_howell_upper(shape)?, "howell"));
        let mut s = shape.to_vec();
        s.sort_unstable();
        if s[0] == 2 && s[1] >= 2 {
            let v = bound_nn2(s[2], s[1], q)?;
            lower.push(b(v, "nn2"));
            upper.push(b(v, "nn2"));
        }
        for keep in 0..3 {
            let (x, y) = match keep {
                0 => (shape[1], shape[2]),
                1 => (shape[0], shape[2]),
                _ => (shape[0], shape[1]),
            };
            if shape[keep] <= x * y {
                lower.push(b(bound_skinny_lower(x, y, x * y - shape[keep])?, "skinny"));
            }
            upper.push(b(slab_upper(x, y, shape[keep]), "slabs"));
        }
        if shape[0] == shape[1] && shape[1] == shape[2] {
            upper.push(b(bound_improved_nnn(shape[0]), "improved-nnn"));
        }
    }
    Ok(ShapeBounds {
        shape: shape.to_vec(),
        field: q,
        lower,
        upper,
    })
}

/// `v ×_0 T` as a matrix of linear forms in `v_0, v_1, ..`.
pub fn characteristic_matrix(t: &Tensor<u32>) -> Result<Vec<Vec<String>>> {
    if t.ndim() != 3 {
        return Err(Error::UnsupportedD(t.ndim()));
    }
    let (m, n, p) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    Ok((0..n)
        .map(|j| {
            (0..p)
                .map(|k| {
                    let terms: Vec<String> = (0..m)
                        .filter_map(|i| {
                            let c = *t.get(&[i, j, k]);
                            match c {
                                0 => None,
                                1 => Some(format!("v{i}")),
                                c => Some(format!("{c}v{i}")),
                            }
                        })
                        .collect();
                    if terms.is_empty() {
                        "0".to_string()
                    } else {
                        terms.join("+")
                    }
                })
                .collect()
        })
        .collect())
}

pub fn render_characteristic(t: &Tensor<u32>) -> Result<String> {
    let rows = characteristic_matrix(t)?;
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    Ok(rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
            format!("[ {} ]", cells.join("  "))
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Parses a characteristic matrix such as `[["v0", "0"], ["v1+2v0", "v1"]]`
/// into an `m x n x p` tensor.
pub fn parse_characteristic(field: &PrimeField, m: usize, rows: &[Vec<&str>]) -> Result<Tensor<u32>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let mut t = Tensor::zeros(field, vec![m, n, p]);
    for (j, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(Error::ShapeMismatch(format!("row {j} has {} entries, expected {p}", row.len())));
        }
        for (k, cell) in row.iter().enumerate() {
            let cell = cell.replace(' ', "");
            if cell == "0" || cell.is_empty() {
                continue;
            }
            for term in cell.split('+') {
                let bad = || Error::InvalidShape(format!("cannot parse term `{term}`"));
                let (coef, var) = term.split_once('v').ok_or_else(bad)?;
                let c: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
                let i: usize = var.parse().map_err(|_| bad())?;
                if i >= m {
                    return Err(Error::ShapeMismatch(format!("v{i} with only {m} slices")));
                }
                let cur = *t.get(&[i, j, k]);
                t.set(&[i, j, k], field.add(&cur, &field.reduce(c)));
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxRankReport {
    pub shape: Vec<usize>,
    pub field: u64,
    /// Prior lower bound used to derive the slice-rank filter.
    pub prior_lower: usize,
    pub r0: usize,
    pub tensors_searched: u64,
    pub max_rank: usize,
    pub witness: Tensor<u32>,
    pub witness_cpd: Cpd<u32>,
    pub wall_time_secs: f64,
}

impl MaxRankReport {
    pub fn table_row(&self) -> String {
        format!(
            "{:>3} {:>3} {:>3} | {:>4} {:>4} | {:>10} {:>10.2} {:>4}",
            self.shape[0],
            self.shape[1],
            self.shape[2],
            self.prior_lower,
            self.r0,
            self.tensors_searched,
            self.wall_time_secs,
            self.max_rank
        )
    }
}

/// `floor(R0 / m) + 1`.
pub fn slice_rank_filter(prior_lower: usize, m: usize) -> usize {
    prior_lower / m + 1
}

#[derive(Clone, Debug)]
pub struct MaxRankConfig {
    pub filter: SliceFilter,
    pub search: SearchConfig,
    /// Tensors evaluated per parallel batch.
    pub batch: usize,
}

impl Default for MaxRankConfig {
    fn default() -> Self {
        Self {
            filter: SliceFilter::None,
            search: SearchConfig {
                deterministic: true,
                ..SearchConfig::default()
            },
            batch: 4096,
        }
    }
}

/// Exact rank if it exceeds `floor`, else `None`.
fn rank_above(field: &PrimeField, t: &Tensor<u32>, floor: usize, cfg: &SearchConfig) -> Result<Option<(usize, Cpd<u32>)>> {
    if search_rank_le(field, t, floor, cfg)?.witness.is_some() {
        return Ok(None);
    }
    let upper = trivial_upper_bound(t.shape());
    for r in floor + 1..=upper {
        if let Some(w) = search_rank_le(field, t, r, cfg)?.witness {
            return Ok(Some((r, w)));
        }
    }
    Err(Error::InternalInconsistency(format!("no CPD up to the trivial bound {upper}")))
}

/// Largest rank among canonical GF(2) tensors of `shape` whose slice 0 has
/// rank at least `floor(R0 / m) + 1`. The witness is the first tensor in
/// stream order attaining it.
pub fn maxrank_exhaustive(shape: &[usize], prior_lower: usize, cfg: &MaxRankConfig) -> Result<MaxRankReport> {
    let started = Instant::now();
    let field = PrimeField::gf2();
    if shape.len() != 3 {
        return Err(Error::UnsupportedD(shape.len()));
    }
    let r0 = slice_rank_filter(prior_lower, shape[0]);
    let opts = CanonicalOptions {
        filter: cfg.filter,
        ..CanonicalOptions::new(r0)
    };
    let mut best: Option<(usize, Tensor<u32>, Cpd<u32>)> = None;
    let mut count = 0u64;
    let mut batch: Vec<Tensor<u32>> = Vec::with_capacity(cfg.batch);
    let mut err = None;
    let flush = |batch: &mut Vec<Tensor<u32>>, best: &mut Option<(usize, Tensor<u32>, Cpd<u32>)>| -> Result<()> {
        let floor = best.as_ref().map_or(0, |b| b.0);
        let results: Vec<Result<Option<(usize, Cpd<u32>)>>> = batch
            .par_iter()
            .map(|t| rank_above(&field, t, floor, &cfg.search))
            .collect();
        for (t, res) in batch.drain(..).zip(results) {
            if let Some((r, w)) = res? {
                if best.as_ref().map_or(true, |b| r > b.0) {
                    *best = Some((r, t, w));
                }
            }
        }
        Ok(())
    };
    for_each_canonical(shape, &opts, |t| {
        count += 1;
        batch.push(t.clone());
        if batch.len() >= cfg.batch.max(1) {
            if let Err(e) = flush(&mut batch, &mut best) {
                err = Some(e);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    flush(&mut batch, &mut best)?;
    let (max_rank, witness, witness_cpd) =
        best.ok_or_else(|| Error::InvalidShape(format!("no tensors of shape {shape:?} pass r0 = {r0}")))?;
    Ok(MaxRankReport {
        shape: shape.to_vec(),
        field: 2,
        prior_lower,
        r0,
        tensors_searched: count,
        max_rank,
        witness,
        witness_cpd,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Exact rank of a tensor given by its characteristic matrix.
pub fn characteristic_rank(field: &PrimeField, m: usize, rows: &[Vec<&str>]) -> Result<usize> {
    let t = parse_characteristic(field, m, rows)?;
    Ok(rank_exact(field, &t, &SearchConfig::default())?.rank)
}
