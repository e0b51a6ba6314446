//! Rank search over the border ring GF(p)[x]/(x^H) by recursive rank-one
//! subtraction.
//!
//! Each node makes its tensor concise, gives up if some side exceeds the
//! remaining budget of terms, and otherwise tries every rank-one tensor.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BorderRing, Matrix, Poly, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::tensor::{
    cpd_eval, expand_cpd, make_concise, outer, ConcisenessCertificate, Cpd, Tensor,
};

/// Default refusal threshold for `log2` of the search-space estimate.
pub const DEFAULT_BUDGET_LOG2: f64 = 36.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderSearchConfig {
    pub budget_log2: f64,
    /// Run even when the estimate exceeds the budget.
    pub force: bool,
    pub deterministic: bool,
    pub threads: Option<usize>,
}

impl Default for BorderSearchConfig {
    fn default() -> Self {
        Self {
            budget_log2: DEFAULT_BUDGET_LOG2,
            force: false,
            deterministic: false,
            threads: None,
        }
    }
}

/// Per-depth counters; depth 0 is the root.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BorderSearchStats {
    pub nodes_per_depth: Vec<u64>,
    /// Nodes that stopped because a concise side exceeded the remaining rank.
    pub too_long_per_depth: Vec<u64>,
    /// Nodes that reached the zero tensor.
    pub zero_per_depth: Vec<u64>,
    /// Children visited, and the sum of `p^{H Σ_d r_d}` over expanded nodes.
    pub children_per_depth: Vec<u64>,
    pub child_bound_per_depth: Vec<u128>,
    pub wall_time_secs: f64,
}

impl BorderSearchStats {
    fn with_depth(n: usize) -> Self {
        Self {
            nodes_per_depth: vec![0; n],
            too_long_per_depth: vec![0; n],
            zero_per_depth: vec![0; n],
            children_per_depth: vec![0; n],
            child_bound_per_depth: vec![0; n],
            wall_time_secs: 0.0,
        }
    }

    pub fn merge(&mut self, o: &Self) {
        fn add<T: Copy + std::ops::AddAssign + Default>(a: &mut Vec<T>, b: &[T]) {
            if a.len() < b.len() {
                a.resize(b.len(), T::default());
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        add(&mut self.nodes_per_depth, &o.nodes_per_depth);
        add(&mut self.too_long_per_depth, &o.too_long_per_depth);
        add(&mut self.zero_per_depth, &o.zero_per_depth);
        add(&mut self.children_per_depth, &o.children_per_depth);
        add(&mut self.child_bound_per_depth, &o.child_bound_per_depth);
        self.wall_time_secs += o.wall_time_secs;
    }

    pub fn nodes(&self) -> u64 {
        self.nodes_per_depth.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderSearchOutcome {
    pub witness: Option<Cpd<Poly>>,
    pub exhausted: bool,
    pub stats: BorderSearchStats,
}

/// Concise form over the border ring. The certificate's lifts are
/// `(Q_d^{-1})_{:, :r_d}`, so `T = lift_0 ×_0 (.. lift_{D-1} ×_{D-1} Tc)`.
pub fn border_concise(
    ring: &BorderRing,
    t: &Tensor<Poly>,
) -> (Tensor<Poly>, ConcisenessCertificate<Poly>, Vec<usize>) {
    let (tc, cert) = make_concise(ring, t);
    let shape = tc.shape().to_vec();
    (tc, cert, shape)
}

/// `log2` of `p^{H Σ_{1<=r<=R} Σ_d min(r, n_d)}` for a concise shape.
pub fn border_cost_log2(shape: &[usize], r_max: usize, p: u64, h: usize) -> f64 {
    let exp: usize = (1..=r_max)
        .map(|r| shape.iter().map(|&n| n.min(r)).sum::<usize>())
        .sum();
    (h * exp) as f64 * (p as f64).log2()
}

struct Engine<'a> {
    ring: &'a BorderRing,
    depth: usize,
    found: AtomicUsize,
}

impl Engine<'_> {
    fn children(&self, shape: &[usize]) -> u128 {
        let q = self.ring.cardinality() as u128;
        let len: usize = shape.iter().sum();
        q.checked_pow(len as u32).unwrap_or(u128::MAX)
    }

    fn term(&self, shape: &[usize], idx: u128) -> Vec<Vec<Poly>> {
        let len: usize = shape.iter().sum();
        let q = self.ring.cardinality() as u128;
        let mut flat = Vec::with_capacity(len);
        let mut rest = idx;
        for _ in 0..len {
            flat.push(self.ring.element((rest % q) as u64));
            rest /= q;
        }
        flat.reverse();
        let mut out = Vec::with_capacity(shape.len());
        let mut it = flat.into_iter();
        for &n in shape {
            out.push(it.by_ref().take(n).collect());
        }
        out
    }

    /// Returns the concise tensor, its certificate, and the early result if the node is a leaf.
    fn enter(
        &self,
        t: &Tensor<Poly>,
        r: usize,
        level: usize,
        stats: &mut BorderSearchStats,
    ) -> std::result::Result<(Tensor<Poly>, ConcisenessCertificate<Poly>), Option<Cpd<Poly>>> {
        stats.nodes_per_depth[level] += 1;
        let (tc, cert, shape) = border_concise(self.ring, t);
        if shape.iter().any(|&n| n > r) {
            stats.too_long_per_depth[level] += 1;
            return Err(None);
        }
        if shape.iter().any(|&n| n == 0) {
            stats.zero_per_depth[level] += 1;
            return Err(Some(Cpd::empty(t.shape())));
        }
        stats.child_bound_per_depth[level] += self.children(&shape);
        Ok((tc, cert))
    }

    fn child(
        &self,
        tc: &Tensor<Poly>,
        idx: u128,
        r: usize,
        level: usize,
        stats: &mut BorderSearchStats,
        token: usize,
    ) -> Result<Option<Cpd<Poly>>> {
        let u = self.term(tc.shape(), idx);
        let rank_one = outer(self.ring, &u);
        if rank_one.is_zero(self.ring) {
            return Ok(None);
        }
        stats.children_per_depth[level] += 1;
        let sub = tc.sub(self.ring, &rank_one)?;
        let Some(mut a) = self.dfs(&sub, r - 1, level + 1, stats, token)? else {
            return Ok(None);
        };
        a.push_term(&u);
        Ok(Some(a))
    }

    fn dfs(
        &self,
        t: &Tensor<Poly>,
        r: usize,
        level: usize,
        stats: &mut BorderSearchStats,
        token: usize,
    ) -> Result<Option<Cpd<Poly>>> {
        if self.found.load(Ordering::Relaxed) < token {
            return Ok(None);
        }
        let (tc, cert) = match self.enter(t, r, level, stats) {
            Ok(x) => x,
            Err(done) => return Ok(done),
        };
        let total = self.children(tc.shape());
        for idx in 0..total {
            if let Some(a) = self.child(&tc, idx, r, level, stats, token)? {
                return expand_cpd(self.ring, &cert, &a).map(Some);
            }
        }
        Ok(None)
    }

    fn run(&self, t: &Tensor<Poly>, r: usize, cfg: &BorderSearchConfig, stats: &mut BorderSearchStats) -> Result<Option<Cpd<Poly>>> {
        let (tc, cert) = match self.enter(t, r, 0, stats) {
            Ok(x) => x,
            Err(done) => return Ok(done),
        };
        let total = self.children(tc.shape());
        let found = if cfg.deterministic || cfg.threads == Some(1) || total > usize::MAX as u128 {
            let mut res = None;
            for idx in 0..total {
                if let Some(a) = self.child(&tc, idx, r, 0, stats, 0)? {
                    res = Some(a);
                    break;
                }
            }
            res
        } else {
            let merged = Mutex::new(BorderSearchStats::with_depth(self.depth));
            let hit = (0..total as usize).into_par_iter().find_map_first(|idx| {
                if self.found.load(Ordering::Relaxed) < idx {
                    return None;
                }
                let mut sub = BorderSearchStats::with_depth(self.depth);
                let res = self.child(&tc, idx as u128, r, 0, &mut sub, idx);
                merged.lock().expect("stats lock").merge(&sub);
                match res {
                    Ok(None) => None,
                    other => {
                        self.found.fetch_min(idx, Ordering::Relaxed);
                        Some(other)
                    }
                }
            });
            stats.merge(&merged.into_inner().expect("stats lock"));
            hit.transpose()?.flatten()
        };
        found.map(|a| expand_cpd(self.ring, &cert, &a)).transpose()
    }
}

/// Decides whether `t` has a CPD of length at most `r_max` over the border ring.
pub fn border_search_rank_le(
    ring: &BorderRing,
    t: &Tensor<Poly>,
    r_max: usize,
    cfg: &BorderSearchConfig,
) -> Result<BorderSearchOutcome> {
    let started = Instant::now();
    let (_, _, shape) = border_concise(ring, t);
    let cost = border_cost_log2(&shape, r_max, ring.base().modulus() as u64, ring.threshold());
    if cost > cfg.budget_log2 && !cfg.force {
        return Err(Error::BudgetExceeded(format!(
            "search space estimate 2^{cost:.1} exceeds 2^{}",
            cfg.budget_log2
        )));
    }
    let engine = Engine {
        ring,
        depth: r_max + 1,
        found: AtomicUsize::new(usize::MAX),
    };
    let mut stats = BorderSearchStats::with_depth(r_max + 1);
    let witness = match cfg.threads {
        Some(n) if n > 1 && !cfg.deterministic => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InternalInconsistency(format!("thread pool: {e}")))?
            .install(|| engine.run(t, r_max, cfg, &mut stats))?,
        _ => engine.run(t, r_max, cfg, &mut stats)?,
    };
    if let Some(w) = &witness {
        if w.rank() > r_max || cpd_eval(ring, w) != *t {
            return Err(Error::InternalInconsistency(
                "border witness does not evaluate to the input".into(),
            ));
        }
    }
    stats.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(BorderSearchOutcome {
        exhausted: witness.is_none(),
        witness,
        stats,
    })
}

/// Embeds a field tensor as `x^{H-1} T` over GF(p)[x]/(x^H).
pub fn embed_scaled(ring: &BorderRing, t: &Tensor<u32>) -> Tensor<Poly> {
    let top = ring.x_pow(ring.threshold() - 1);
    t.map(|&c| ring.mul(&ring.constant(c), &top))
}

/// Border rank at threshold `H`: the least `R` with a CPD of `x^{H-1} T`.
pub fn border_rank(
    field: &PrimeField,
    t: &Tensor<u32>,
    h: usize,
    cfg: &BorderSearchConfig,
) -> Result<(usize, Cpd<Poly>)> {
    let ring = BorderRing::new(*field, h)?;
    let bt = embed_scaled(&ring, t);
    let max = t.shape().iter().copied().max().unwrap_or(0).max(1);
    let upper = t.shape().iter().product::<usize>() / max;
    for r in 0..=upper {
        let out = border_search_rank_le(&ring, &bt, r, cfg)?;
        if let Some(w) = out.witness {
            return Ok((r, w));
        }
    }
    Err(Error::InternalInconsistency(format!(
        "no border CPD found up to the trivial bound {upper}"
    )))
}

/// Exhaustive field-rank test by rank-one subtraction (threshold `H = 1`).
pub fn brute_rank_via_border(field: &PrimeField, t: &Tensor<u32>, r: usize) -> Result<bool> {
    let ring = BorderRing::new(*field, 1)?;
    let cfg = BorderSearchConfig {
        force: true,
        deterministic: true,
        ..BorderSearchConfig::default()
    };
    Ok(border_search_rank_le(&ring, &embed_scaled(&ring, t), r, &cfg)?.witness.is_some())
}

/// Drops the `x`-adic part of a witness found at `H = 1`.
pub fn witness_to_field(cpd: &Cpd<Poly>) -> Cpd<u32> {
    cpd.map(|p| p.0[0])
}

/// `x^{H-1} I_n` as a 2-axis tensor.
pub fn identity_scaled(ring: &BorderRing, n: usize) -> Tensor<Poly> {
    let x = ring.x_pow(ring.threshold() - 1);
    let m = Matrix::from_fn(n, n, |i, j| if i == j { x.clone() } else { ring.zero() });
    Tensor::from_matrix(&m)
}
