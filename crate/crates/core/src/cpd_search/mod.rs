//! Exhaustive search for CPDs of bounded length over a prime field.
//!
//! The search fixes the trailing columns `(A_d)_{:, n_0:R}` for `d >= 1` one
//! level at a time and finishes each assignment by solving for `[Q | C]`.
//! On 3-axis inputs the pruners run at every internal node.

pub mod assign;
pub mod augmented;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use assign::{good_pairs, resolve_branch, test_assignment};
pub use augmented::{canonical_tuples, AugmentedTensor, LevelTuple};

use crate::algebra::{BorderRing, Matrix, Poly, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::pruners;
use crate::tensor::{cpd_eval, expand_cpd, make_concise, sort_axes_desc, Cpd, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Auto,
    EnumerateV,
    Kernel,
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Branch::Auto),
            "enumerate-v" => Ok(Branch::EnumerateV),
            "kernel" => Ok(Branch::Kernel),
            _ => Err(format!("unknown branch `{s}` (expected auto, enumerate-v or kernel)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunerSet {
    pub rref: bool,
    pub lask: bool,
    pub heuristic: bool,
    /// Highest order `k` for the root-only k-th order rref pruner.
    pub rref_k: Option<usize>,
    pub frequency: bool,
}

impl Default for PrunerSet {
    fn default() -> Self {
        Self {
            rref: true,
            lask: true,
            heuristic: true,
            rref_k: None,
            frequency: false,
        }
    }
}

impl PrunerSet {
    pub fn none() -> Self {
        Self {
            rref: false,
            lask: false,
            heuristic: false,
            rref_k: None,
            frequency: false,
        }
    }

    /// Parses a comma-separated list such as `rref,lask,rref-k:2`. `none` and
    /// the empty string disable everything.
    pub fn parse(list: &str) -> std::result::Result<Self, String> {
        let mut set = Self::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "none" => {}
                "rref" => set.rref = true,
                "lask" => set.lask = true,
                "heuristic" => set.heuristic = true,
                "frequency" => set.frequency = true,
                "rref-k" => set.rref_k = Some(2),
                _ => match name.strip_prefix("rref-k:") {
                    Some(k) => {
                        let k: usize = k.parse().map_err(|_| format!("bad order in `{name}`"))?;
                        set.rref_k = Some(k);
                    }
                    None => return Err(format!("unknown pruner `{name}`")),
                },
            }
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.rref {
            v.push("rref".to_string());
        }
        if self.lask {
            v.push("lask".to_string());
        }
        if self.heuristic {
            v.push("heuristic".to_string());
        }
        if let Some(k) = self.rref_k {
            v.push(format!("rref-k:{k}"));
        }
        if self.frequency {
            v.push("frequency".to_string());
        }
        v
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunerHits {
    pub rref: u64,
    pub lask: u64,
    pub heuristic: u64,
    pub rref_k: u64,
    pub frequency: u64,
}

impl PrunerHits {
    pub fn total(&self) -> u64 {
        self.rref + self.lask + self.heuristic + self.rref_k + self.frequency
    }

    fn merge(&mut self, o: &Self) {
        self.rref += o.rref;
        self.lask += o.lask;
        self.heuristic += o.heuristic;
        self.rref_k += o.rref_k;
        self.frequency += o.frequency;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Internal nodes visited at each depth, root first.
    pub nodes_per_level: Vec<u64>,
    pub leaves: u64,
    pub pruner_hits: PrunerHits,
    pub wall_time_secs: f64,
}

impl SearchStats {
    fn with_levels(n: usize) -> Self {
        Self {
            nodes_per_level: vec![0; n],
            ..Self::default()
        }
    }

    pub fn merge(&mut self, o: &Self) {
        if self.nodes_per_level.len() < o.nodes_per_level.len() {
            self.nodes_per_level.resize(o.nodes_per_level.len(), 0);
        }
        for (a, b) in self.nodes_per_level.iter_mut().zip(&o.nodes_per_level) {
            *a += b;
        }
        self.leaves += o.leaves;
        self.pruner_hits.merge(&o.pruner_hits);
        self.wall_time_secs += o.wall_time_secs;
    }

    pub fn nodes(&self) -> u64 {
        self.nodes_per_level.iter().sum()
    }
}

/// Snapshot passed to the progress callback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progress {
    pub level: usize,
    pub done: u64,
    pub total: u64,
    pub pruner_hits: u64,
}

pub type ProgressFn = Arc<dyn Fn(&Progress) + Send + Sync>;

#[derive(Clone)]
pub struct SearchConfig {
    pub pruners: PrunerSet,
    pub branch: Branch,
    /// Run sequentially. Parallel runs return the same witness.
    pub deterministic: bool,
    pub threads: Option<usize>,
    /// Restrict each level's tuple to be no smaller than the previous one.
    pub symmetry_breaking: bool,
    pub progress: Option<ProgressFn>,
    pub progress_interval: Duration,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            pruners: PrunerSet::default(),
            branch: Branch::Auto,
            deterministic: false,
            threads: None,
            symmetry_breaking: true,
            progress: None,
            progress_interval: Duration::from_secs(1),
        }
    }
}

impl fmt::Debug for SearchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchConfig")
            .field("pruners", &self.pruners)
            .field("branch", &self.branch)
            .field("deterministic", &self.deterministic)
            .field("threads", &self.threads)
            .field("symmetry_breaking", &self.symmetry_breaking)
            .field("progress", &self.progress.as_ref().map(|_| "<callback>"))
            .field("progress_interval", &self.progress_interval)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// A CPD of the input with at most `R` terms and no zero terms.
    pub witness: Option<Cpd<u32>>,
    /// The whole space was searched without finding a witness.
    pub exhausted: bool,
    pub stats: SearchStats,
    /// Side lengths of the concise, axis-sorted tensor that was searched.
    pub concise_shape: Vec<usize>,
}

/// `log2` of the unpruned search-space size at length `R`, for a concise
/// shape with nonincreasing sides.
pub fn search_cost_log2(shape: &[usize], r: usize, p: u64) -> f64 {
    let Some(&n0) = shape.first() else {
        return 0.0;
    };
    if r < n0 {
        return 0.0;
    }
    let tail: usize = shape.iter().skip(1).sum();
    let kernel: usize = shape.iter().skip(2).sum();
    (((r - n0) * tail) + r.min(kernel)) as f64 * (p as f64).log2()
}

enum Prune {
    Infeasible,
    Witness(Cpd<u32>),
    Continue,
}

struct Engine<'a> {
    field: PrimeField,
    r_max: usize,
    n0: usize,
    cfg: &'a SearchConfig,
    tuples: Vec<LevelTuple>,
    branch: Branch,
    d3: bool,
    found: AtomicUsize,
}

impl Engine<'_> {
    fn next_start(&self, idx: usize) -> usize {
        if !self.cfg.symmetry_breaking || idx == 0 {
            0
        } else {
            idx + 1
        }
    }

    fn prune(&self, aug: &AugmentedTensor, stats: &mut SearchStats) -> Result<Prune> {
        if !self.d3 {
            return Ok(Prune::Continue);
        }
        let p = &self.cfg.pruners;
        if p.rref && !pruners::rref_prune(aug, self.r_max)? {
            stats.pruner_hits.rref += 1;
            return Ok(Prune::Infeasible);
        }
        if p.lask && !pruners::lask_prune(aug, self.r_max)? {
            stats.pruner_hits.lask += 1;
            return Ok(Prune::Infeasible);
        }
        if p.heuristic {
            if let Some(c) = pruners::rref_heuristic(aug, self.r_max)? {
                stats.pruner_hits.heuristic += 1;
                return Ok(Prune::Witness(c));
            }
        }
        Ok(Prune::Continue)
    }

    fn root_prune(&self, t: &Tensor<u32>, stats: &mut SearchStats) -> Result<bool> {
        if !self.d3 {
            return Ok(true);
        }
        let p = &self.cfg.pruners;
        if let Some(kmax) = p.rref_k {
            for k in 1..=kmax.min(self.n0) {
                if !pruners::kth_order_rref_prune(&self.field, t, k, self.r_max)? {
                    stats.pruner_hits.rref_k += 1;
                    return Ok(false);
                }
            }
        }
        if p.frequency && !pruners::frequency_prune(&self.field, t, self.r_max)? {
            stats.pruner_hits.frequency += 1;
            return Ok(false);
        }
        Ok(true)
    }

    fn dfs(
        &self,
        aug: &mut AugmentedTensor,
        start: usize,
        stats: &mut SearchStats,
        token: usize,
    ) -> Result<Option<Cpd<u32>>> {
        if self.found.load(Ordering::Relaxed) < token {
            return Ok(None);
        }
        let r = aug.r();
        if r == self.r_max {
            stats.leaves += 1;
            return test_assignment(aug, self.branch);
        }
        stats.nodes_per_level[r - self.n0] += 1;
        match self.prune(aug, stats)? {
            Prune::Infeasible => return Ok(None),
            Prune::Witness(c) => return Ok(Some(c)),
            Prune::Continue => {}
        }
        for idx in start..self.tuples.len() {
            aug.push(&self.tuples[idx]);
            let res = self.dfs(aug, self.next_start(idx), stats, token);
            aug.pop();
            match res {
                Ok(None) => {}
                other => return other,
            }
        }
        Ok(None)
    }

    fn run(&self, base: &Tensor<u32>, stats: &mut SearchStats) -> Result<Option<Cpd<u32>>> {
        let mut aug = AugmentedTensor::new(self.field, base)?;
        if !self.root_prune(base, stats)? {
            return Ok(None);
        }
        if self.r_max == self.n0 {
            stats.leaves += 1;
            return test_assignment(&aug, self.branch);
        }
        stats.nodes_per_level[0] += 1;
        match self.prune(&aug, stats)? {
            Prune::Infeasible => return Ok(None),
            Prune::Witness(c) => return Ok(Some(c)),
            Prune::Continue => {}
        }
        let total = self.tuples.len() as u64;
        let done = AtomicU64::new(0);
        let hits = AtomicU64::new(stats.pruner_hits.total());
        let last = Mutex::new(Instant::now());
        let report = |sub: &SearchStats| {
            let d = done.fetch_add(1, Ordering::Relaxed) + 1;
            let h = hits.fetch_add(sub.pruner_hits.total(), Ordering::Relaxed) + sub.pruner_hits.total();
            if let Some(cb) = &self.cfg.progress {
                let mut l = last.lock().expect("progress lock");
                if d == total || l.elapsed() >= self.cfg.progress_interval {
                    *l = Instant::now();
                    cb(&Progress {
                        level: 1,
                        done: d,
                        total,
                        pruner_hits: h,
                    });
                }
            }
        };
        let levels = self.r_max - self.n0;
        if self.cfg.deterministic || self.cfg.threads == Some(1) {
            for idx in 0..self.tuples.len() {
                let mut sub = SearchStats::with_levels(levels);
                aug.push(&self.tuples[idx]);
                let res = self.dfs(&mut aug, self.next_start(idx), &mut sub, 0);
                aug.pop();
                report(&sub);
                stats.merge(&sub);
                match res {
                    Ok(None) => {}
                    other => return other,
                }
            }
            return Ok(None);
        }
        let merged = Mutex::new(SearchStats::with_levels(levels));
        let found = (0..self.tuples.len()).into_par_iter().find_map_first(|idx| {
            if self.found.load(Ordering::Relaxed) < idx {
                return None;
            }
            let mut a = aug.clone();
            a.push(&self.tuples[idx]);
            let mut sub = SearchStats::with_levels(levels);
            let res = self.dfs(&mut a, self.next_start(idx), &mut sub, idx);
            report(&sub);
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
        match found {
            None => Ok(None),
            Some(r) => r,
        }
    }
}

fn strip_zero_terms(field: &PrimeField, cpd: &Cpd<u32>) -> Cpd<u32> {
    let keep: Vec<usize> = (0..cpd.rank())
        .filter(|&j| cpd.factors.iter().all(|a| a.column(j).iter().any(|e| !field.is_zero(e))))
        .collect();
    let factors = cpd
        .factors
        .iter()
        .map(|a| Matrix::from_fn(a.rows(), keep.len(), |i, j| *a.get(i, keep[j])))
        .collect();
    Cpd { factors }
}

fn finish(
    field: &PrimeField,
    t: &Tensor<u32>,
    witness: Option<Cpd<u32>>,
    cert: &crate::tensor::ConcisenessCertificate<u32>,
    concise: &Tensor<u32>,
) -> Result<Option<Cpd<u32>>> {
    let Some(w) = witness else { return Ok(None) };
    let w = strip_zero_terms(field, &w);
    if cpd_eval(field, &w) != *concise {
        return Err(Error::InternalInconsistency(
            "witness does not evaluate to the concise tensor".into(),
        ));
    }
    let full = expand_cpd(field, cert, &w)?;
    if cpd_eval(field, &full) != *t {
        return Err(Error::InternalInconsistency(
            "expanded witness does not evaluate to the input".into(),
        ));
    }
    Ok(Some(full))
}

/// Decides whether `t` has a CPD of length at most `r_max` over `field`.
pub fn search_rank_le(
    field: &PrimeField,
    t: &Tensor<u32>,
    r_max: usize,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    if t.ndim() == 0 {
        return Err(Error::InvalidShape("tensors need at least one axis".into()));
    }
    if t.data().iter().any(|&e| e >= field.modulus()) {
        return Err(Error::ShapeMismatch(format!(
            "entries must lie in 0..{}",
            field.modulus()
        )));
    }
    let started = Instant::now();
    let outcome = |witness: Option<Cpd<u32>>, stats: SearchStats, shape: Vec<usize>| {
        let mut stats = stats;
        stats.wall_time_secs = started.elapsed().as_secs_f64();
        SearchOutcome {
            exhausted: witness.is_none(),
            witness,
            stats,
            concise_shape: shape,
        }
    };
    if t.is_zero(field) {
        let shape = vec![0; t.ndim()];
        return Ok(outcome(Some(Cpd::empty(t.shape())), SearchStats::default(), shape));
    }
    if t.ndim() == 1 {
        let w = (r_max >= 1).then(|| Cpd {
            factors: vec![Matrix::from_vec(t.len(), 1, t.data().to_vec()).expect("column")],
        });
        return Ok(outcome(w, SearchStats::default(), vec![1]));
    }
    let (tc, cert) = make_concise(field, t);
    let (ts, cert) = sort_axes_desc(&tc, &cert);
    let shape = ts.shape().to_vec();
    let n0 = shape[0];
    if r_max < n0 {
        return Ok(outcome(None, SearchStats::default(), shape));
    }
    let mut stats = SearchStats::with_levels(r_max - n0);
    let tuples = canonical_tuples(field, &shape[1..])?;
    let engine = Engine {
        field: *field,
        r_max,
        n0,
        cfg,
        tuples,
        branch: resolve_branch(cfg.branch, &shape, r_max),
        d3: shape.len() == 3,
        found: AtomicUsize::new(usize::MAX),
    };
    let witness = match cfg.threads {
        Some(n) if n > 1 && !cfg.deterministic => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InternalInconsistency(format!("thread pool: {e}")))?;
            pool.install(|| engine.run(&ts, &mut stats))?
        }
        _ => engine.run(&ts, &mut stats)?,
    };
    let witness = finish(field, t, witness, &cert, &ts)?;
    Ok(outcome(witness, stats, shape))
}

/// Like [`search_rank_le`], for tensors over `F[x]/(x^H)` with `H = 1`.
pub fn search_rank_le_border(
    ring: &BorderRing,
    t: &Tensor<Poly>,
    r_max: usize,
    cfg: &SearchConfig,
) -> Result<(Option<Cpd<Poly>>, SearchOutcome)> {
    if ring.threshold() != 1 {
        return Err(Error::BorderRingUnsupported);
    }
    let ft = t.map(|e| e.coeffs().first().copied().unwrap_or(0));
    let out = search_rank_le(ring.base(), &ft, r_max, cfg)?;
    let w = out.witness.as_ref().map(|c| c.map(|&e| ring.constant(e)));
    Ok((w, out))
}

/// Trivial upper bound: product of all side lengths but the largest.
pub fn trivial_upper_bound(shape: &[usize]) -> usize {
    let max = shape.iter().copied().max().unwrap_or(0);
    shape.iter().product::<usize>() / max.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub witness: Cpd<u32>,
    /// One outcome per length tried, smallest first.
    pub attempts: Vec<(usize, SearchStats)>,
}

/// Exact rank: tries `R = max concise side, ..` until a witness appears.
pub fn rank_exact(field: &PrimeField, t: &Tensor<u32>, cfg: &SearchConfig) -> Result<RankResult> {
    if t.is_zero(field) {
        return Ok(RankResult {
            rank: 0,
            witness: Cpd::empty(t.shape()),
            attempts: Vec::new(),
        });
    }
    let (tc, _) = make_concise(field, t);
    let lower = tc.shape().iter().copied().max().unwrap_or(1);
    let upper = trivial_upper_bound(tc.shape()).max(lower);
    let mut attempts = Vec::new();
    for r in lower..=upper {
        let out = search_rank_le(field, t, r, cfg)?;
        attempts.push((r, out.stats));
        if let Some(w) = out.witness {
            return Ok(RankResult {
                rank: w.rank(),
                witness: w,
                attempts,
            });
        }
    }
    Err(Error::InternalInconsistency(format!(
        "no CPD found up to the trivial bound {upper}"
    )))
}
