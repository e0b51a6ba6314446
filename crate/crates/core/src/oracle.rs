//! Brute-force baselines for differential testing.
//!
//! Nothing here calls into the search engines; only the algebra layer and the
//! plain tensor containers are shared.

use std::collections::{HashMap, VecDeque};

use crate::algebra::{vector_at, vector_index, Field, Matrix, Ring};
use crate::error::{Error, Result};
use crate::tensor::{Cpd, Tensor};

/// Default step budget for [`brute_rank`] and [`brute_cpd`].
pub const DEFAULT_BUDGET: u64 = 1 << 28;

/// All nonzero rank-1 tensors of a shape, each exactly once, with factors.
/// Vectors on axes `d >= 1` are normalized to a leading one.
pub fn rank_one_tensors<F: Field>(field: &F, shape: &[usize]) -> Result<Vec<(Vec<F::Elem>, Vec<Vec<F::Elem>>)>> {
    let q = field.cardinality();
    let mut choices: Vec<Vec<Vec<F::Elem>>> = Vec::new();
    for (d, &n) in shape.iter().enumerate() {
        let total = q
            .checked_pow(n as u32)
            .filter(|&t| t <= 1 << 20)
            .ok_or_else(|| Error::BudgetExceeded(format!("axis of length {n} too long to enumerate")))?;
        let vs: Vec<Vec<F::Elem>> = (1..total)
            .map(|i| vector_at(field, n, i))
            .filter(|v| d == 0 || v.iter().find(|e| !field.is_zero(e)).is_some_and(|e| field.is_one(e)))
            .collect();
        choices.push(vs);
    }
    let count: u64 = choices.iter().map(|c| c.len() as u64).product();
    if count > 1 << 24 {
        return Err(Error::BudgetExceeded(format!("{count} rank-one tensors")));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut pick = vec![0usize; shape.len()];
    if choices.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    loop {
        let vs: Vec<Vec<F::Elem>> = pick.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        out.push((outer_flat(field, &vs), vs));
        let mut d = shape.len();
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            pick[d] += 1;
            if pick[d] < choices[d].len() {
                break;
            }
            pick[d] = 0;
        }
    }
}

fn outer_flat<R: Ring>(ring: &R, vs: &[Vec<R::Elem>]) -> Vec<R::Elem> {
    let mut acc = vec![ring.one()];
    for v in vs {
        acc = acc
            .iter()
            .flat_map(|a| v.iter().map(move |b| ring.mul(a, b)))
            .collect();
    }
    acc
}

struct Brute<'a, F: Field> {
    field: &'a F,
    gens: &'a [(Vec<F::Elem>, Vec<Vec<F::Elem>>)],
    lookup: HashMap<&'a [F::Elem], usize>,
    steps: u64,
    budget: u64,
}

impl<F: Field> Brute<'_, F> {
    /// Indices of at most `r` distinct generators (all `>= start`) summing to `t`.
    fn find(&mut self, t: &[F::Elem], r: usize, start: usize) -> Result<Option<Vec<usize>>> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded(format!("more than {} oracle steps", self.budget)));
        }
        if t.iter().all(|e| self.field.is_zero(e)) {
            return Ok(Some(Vec::new()));
        }
        if r == 0 {
            return Ok(None);
        }
        if r == 1 {
            return Ok(self.lookup.get(t).filter(|&&i| i >= start).map(|&i| vec![i]));
        }
        for i in start..self.gens.len() {
            let g = &self.gens[i].0;
            let rest: Vec<F::Elem> = t.iter().zip(g).map(|(a, b)| self.field.sub(a, b)).collect();
            if let Some(mut v) = self.find(&rest, r - 1, i + 1)? {
                v.push(i);
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
}

/// A minimum-rank CPD of `t` with at most `r` terms, if one exists.
pub fn brute_cpd<F: Field>(field: &F, t: &Tensor<F::Elem>, r: usize) -> Result<Option<Cpd<F::Elem>>> {
    brute_cpd_with_budget(field, t, r, DEFAULT_BUDGET)
}

pub fn brute_cpd_with_budget<F: Field>(
    field: &F,
    t: &Tensor<F::Elem>,
    r: usize,
    budget: u64,
) -> Result<Option<Cpd<F::Elem>>> {
    let gens = rank_one_tensors(field, t.shape())?;
    let lookup = gens.iter().enumerate().map(|(i, g)| (g.0.as_slice(), i)).collect();
    let mut b = Brute {
        field,
        gens: &gens,
        lookup,
        steps: 0,
        budget,
    };
    for k in 0..=r {
        if let Some(idx) = b.find(t.data(), k, 0)? {
            let factors = (0..t.ndim())
                .map(|d| {
                    let n = t.shape()[d];
                    Matrix::from_fn(n, idx.len(), |i, j| gens[idx[j]].1[d][i].clone())
                })
                .collect();
            return Ok(Some(Cpd { factors }));
        }
    }
    Ok(None)
}

/// Exact rank by iterative deepening over sets of distinct rank-1 tensors.
pub fn brute_rank<F: Field>(field: &F, t: &Tensor<F::Elem>) -> Result<usize> {
    let n = t.len();
    for r in 0..=n {
        if brute_cpd(field, t, r)?.is_some() {
            return Ok(r);
        }
    }
    Err(Error::InternalInconsistency("no CPD with one term per entry".into()))
}

/// Rank of every tensor of a shape, indexed by lexicographic position (see
/// [`enumerate_all_tensors`]), computed by breadth-first search from zero.
pub fn rank_table<F: Field>(field: &F, shape: &[usize]) -> Result<Vec<u8>> {
    let n: usize = shape.iter().product();
    let q = field.cardinality();
    let total = q
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::BudgetExceeded(format!("{q}^{n} tensors")))? as usize;
    let gens = rank_one_tensors(field, shape)?;
    let mut dist = vec![u8::MAX; total];
    dist[0] = 0;
    let mut queue = VecDeque::from([0u64]);
    while let Some(idx) = queue.pop_front() {
        let t = vector_at(field, n, idx);
        let dnext = dist[idx as usize] + 1;
        for (g, _) in &gens {
            let s: Vec<F::Elem> = t.iter().zip(g).map(|(a, b)| field.add(a, b)).collect();
            let k = vector_index(field, &s) as usize;
            if dist[k] == u8::MAX {
                dist[k] = dnext;
                queue.push_back(k as u64);
            }
        }
    }
    Ok(dist)
}

/// Every tensor of the shape, in lexicographic order of the row-major entries.
pub fn enumerate_all_tensors<'a, F: Field>(
    field: &'a F,
    shape: &[usize],
) -> Result<impl Iterator<Item = Tensor<F::Elem>> + 'a> {
    let n: usize = shape.iter().product();
    let total = field
        .cardinality()
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 32)
        .ok_or_else(|| Error::BudgetExceeded(format!("{}^{n} tensors", field.cardinality())))?;
    let shape = shape.to_vec();
    Ok((0..total).map(move |i| Tensor::new(shape.clone(), vector_at(field, n, i)).expect("shape")))
}

/// First multi-index where the CPD disagrees with `t`, evaluated term by term.
pub fn first_mismatch<R: Ring>(ring: &R, t: &Tensor<R::Elem>, cpd: &Cpd<R::Elem>) -> Result<Option<Vec<usize>>> {
    let shape: Vec<usize> = cpd.factors.iter().map(|f| f.rows()).collect();
    if shape != t.shape() {
        return Err(Error::ShapeMismatch(format!(
            "CPD shape {:?} vs tensor shape {:?}",
            shape,
            t.shape()
        )));
    }
    let terms = cpd.factors[0].cols();
    for (flat, want) in t.data().iter().enumerate() {
        let idx = t.multi_index(flat);
        let mut sum = ring.zero();
        for r in 0..terms {
            let mut prod = ring.one();
            for (d, f) in cpd.factors.iter().enumerate() {
                prod = ring.mul(&prod, f.get(idx[d], r));
            }
            sum = ring.add(&sum, &prod);
        }
        if sum != *want {
            return Ok(Some(idx));
        }
    }
    Ok(None)
}

/// Whether the CPD evaluates to `t` entrywise.
pub fn verify_cpd<R: Ring>(ring: &R, t: &Tensor<R::Elem>, cpd: &Cpd<R::Elem>) -> Result<bool> {
    Ok(first_mismatch(ring, t, cpd)?.is_none())
}
