//! Orbit representatives of GF(2) tensors under `GL(n) x GL(p)` acting on axes 1 and 2.
//!
//! Slice 0 is fixed to `[[I_r, 0], [0, 0]]`. Each later slice is the lex-min
//! of its orbit under the stabilizer of the slices before it, and the
//! stabilizer is refined after every slice.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Default cap on stabilizer size.
pub const DEFAULT_STABILIZER_BUDGET: usize = 1 << 22;
const MAX_SLICE_BITS: usize = 24;

/// An `n x p` GF(2) matrix: one `p`-bit mask per row, column 0 in the top bit,
/// so comparing codes compares matrices lexicographically.
type Code = u32;

#[derive(Clone, Debug)]
struct Pair {
    /// Rows of `P`, each an `n`-bit mask in the same convention.
    p: Vec<u32>,
    /// Rows of `Q^T`.
    qt: Vec<u32>,
}

#[derive(Clone, Copy, Debug)]
struct Dims {
    n: usize,
    p: usize,
}

impl Dims {
    fn row(&self, code: Code, i: usize) -> u32 {
        (code >> (self.p * (self.n - 1 - i))) & ((1 << self.p) - 1)
    }

    fn from_rows(&self, rows: &[u32]) -> Code {
        rows.iter().fold(0, |acc, &r| (acc << self.p) | r)
    }

    /// `P M Q^T`.
    fn act(&self, g: &Pair, code: Code) -> Code {
        let mut mq = [0u32; 32];
        for i in 0..self.n {
            let x = self.row(code, i);
            let mut y = 0;
            for k in 0..self.p {
                if x >> (self.p - 1 - k) & 1 == 1 {
                    y ^= g.qt[k];
                }
            }
            mq[i] = y;
        }
        let mut out = 0;
        for i in 0..self.n {
            let mut y = 0;
            for k in 0..self.n {
                if g.p[i] >> (self.n - 1 - k) & 1 == 1 {
                    y ^= mq[k];
                }
            }
            out = (out << self.p) | y;
        }
        out
    }

    fn rank(&self, code: Code) -> usize {
        let rows: Vec<u64> = (0..self.n).map(|i| self.row(code, i) as u64).collect();
        crate::algebra::gf2::rank(&rows)
    }
}

/// All invertible `k x k` GF(2) matrices, as row masks.
fn general_linear(k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut rows = vec![0u32; k];
    fn rec(i: usize, k: usize, rows: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == k {
            out.push(rows.clone());
            return;
        }
        for r in 1..(1u32 << k) {
            rows[i] = r;
            let packed: Vec<u64> = rows[..=i].iter().map(|&x| x as u64).collect();
            if crate::algebra::gf2::rank(&packed) == i + 1 {
                rec(i + 1, k, rows, out);
            }
        }
    }
    rec(0, k, &mut rows, &mut out);
    out
}

fn all_matrices(rows: usize, cols: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rows {
        out = out
            .into_iter()
            .flat_map(|pre| {
                (0..1u32 << cols).map(move |r| {
                    let mut v = pre.clone();
                    v.push(r);
                    v
                })
            })
            .collect();
    }
    out
}

fn invert_rows(m: &[u32], k: usize) -> Vec<u32> {
    // Gauss-Jordan on [M | I]
    let mut a: Vec<(u32, u32)> = m.iter().enumerate().map(|(i, &r)| (r, 1 << (k - 1 - i))).collect();
    for c in 0..k {
        let bit = 1 << (k - 1 - c);
        let piv = (c..k).find(|&i| a[i].0 & bit != 0).expect("invertible");
        a.swap(c, piv);
        let pr = a[c];
        for (i, row) in a.iter_mut().enumerate() {
            if i != c && row.0 & bit != 0 {
                row.0 ^= pr.0;
                row.1 ^= pr.1;
            }
        }
    }
    a.into_iter().map(|(_, inv)| inv).collect()
}

/// Stabilizer of `[[I_r, 0], [0, 0]]`: `P = [[A, B], [0, E]]`,
/// `Q^T = [[A^{-1}, 0], [C, F]]`.
fn slice0_stabilizer(d: Dims, r: usize, budget: usize) -> Result<Vec<Pair>> {
    let (n, p) = (d.n, d.p);
    let gl_r = general_linear(r);
    let gl_nr = general_linear(n - r);
    let gl_pr = general_linear(p - r);
    let size = gl_r.len() as u128
        * (1u128 << (r * (n - r)))
        * gl_nr.len() as u128
        * (1u128 << (r * (p - r)))
        * gl_pr.len() as u128;
    if size > budget as u128 {
        return Err(Error::TooLarge(format!("stabilizer of size {size} exceeds {budget}")));
    }
    let bs = all_matrices(r, n - r);
    let cs = all_matrices(p - r, r);
    let mut out = Vec::with_capacity(size as usize);
    for a in &gl_r {
        let ainv = invert_rows(a, r);
        for b in &bs {
            for e in &gl_nr {
                let prow: Vec<u32> = (0..n)
                    .map(|i| if i < r { (a[i] << (n - r)) | b[i] } else { e[i - r] })
                    .collect();
                for c in &cs {
                    for f in &gl_pr {
                        let qt: Vec<u32> = (0..p)
                            .map(|i| {
                                if i < r {
                                    ainv[i] << (p - r)
                                } else {
                                    (c[i - r] << (p - r)) | f[i - r]
                                }
                            })
                            .collect();
                        out.push(Pair { p: prow.clone(), qt });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// How slices after the first are filtered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SliceFilter {
    /// No restriction beyond lex-minimality.
    #[default]
    None,
    /// Later slices may not exceed the rank of slice 0.
    SliceZeroMaxRank,
}

#[derive(Clone, Copy, Debug)]
pub struct CanonicalOptions {
    pub r0: usize,
    pub filter: SliceFilter,
    pub stabilizer_budget: usize,
}

impl CanonicalOptions {
    pub fn new(r0: usize) -> Self {
        Self {
            r0,
            filter: SliceFilter::None,
            stabilizer_budget: DEFAULT_STABILIZER_BUDGET,
        }
    }
}

fn to_tensor(d: Dims, m: usize, codes: &[Code]) -> Tensor<u32> {
    let mut data = Vec::with_capacity(m * d.n * d.p);
    for &c in codes {
        for i in 0..d.n {
            let row = d.row(c, i);
            for j in 0..d.p {
                data.push(row >> (d.p - 1 - j) & 1);
            }
        }
    }
    Tensor::new(vec![m, d.n, d.p], data).expect("shape")
}

struct Walker<'a, F> {
    d: Dims,
    m: usize,
    r: usize,
    filter: SliceFilter,
    visit: &'a mut F,
    seen: Vec<u64>,
}

impl<F: FnMut(&Tensor<u32>) -> ControlFlow<()>> Walker<'_, F> {
    fn walk(&mut self, codes: &mut Vec<Code>, stab: &[Pair]) -> ControlFlow<()> {
        if codes.len() == self.m {
            return (self.visit)(&to_tensor(self.d, self.m, codes));
        }
        let total = 1usize << (self.d.n * self.d.p);
        self.seen.clear();
        self.seen.resize(total.div_ceil(64), 0);
        let mut reps = Vec::new();
        for code in 0..total as Code {
            let c = code as usize;
            if self.seen[c / 64] >> (c % 64) & 1 == 1 {
                continue;
            }
            for g in stab {
                let x = self.d.act(g, code) as usize;
                self.seen[x / 64] |= 1 << (x % 64);
            }
            if self.filter == SliceFilter::SliceZeroMaxRank && self.d.rank(code) > self.r {
                continue;
            }
            reps.push(code);
        }
        for code in reps {
            let sub: Vec<Pair> = stab.iter().filter(|g| self.d.act(g, code) == code).cloned().collect();
            codes.push(code);
            let flow = self.walk(codes, &sub);
            codes.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Calls `visit` on each canonical `m x n x p` tensor whose slice 0 has rank
/// at least `r0`, in order of slice-0 rank and then lex order of later slices.
pub fn for_each_canonical(
    shape: &[usize],
    opts: &CanonicalOptions,
    mut visit: impl FnMut(&Tensor<u32>) -> ControlFlow<()>,
) -> Result<()> {
    if shape.len() != 3 {
        return Err(Error::UnsupportedD(shape.len()));
    }
    let (m, n, p) = (shape[0], shape[1], shape[2]);
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::InvalidShape(format!("{shape:?} has an empty axis")));
    }
    if n * p > MAX_SLICE_BITS || p > 31 || n > 31 {
        return Err(Error::TooLarge(format!("slices of {n}x{p} entries")));
    }
    let d = Dims { n, p };
    for r in opts.r0.max(1)..=n.min(p) {
        let stab = slice0_stabilizer(d, r, opts.stabilizer_budget)?;
        let t0 = d.from_rows(&(0..n).map(|i| if i < r { 1 << (p - 1 - i) } else { 0 }).collect::<Vec<_>>());
        let mut walker = Walker {
            d,
            m,
            r,
            filter: opts.filter,
            visit: &mut visit,
            seen: Vec::new(),
        };
        let mut codes = vec![t0];
        if walker.walk(&mut codes, &stab).is_break() {
            break;
        }
    }
    Ok(())
}

/// Collects the canonical tensors.
pub fn canonical_stream(shape: &[usize], opts: &CanonicalOptions) -> Result<Vec<Tensor<u32>>> {
    let mut out = Vec::new();
    for_each_canonical(shape, opts, |t| {
        out.push(t.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn canonical_count(shape: &[usize], opts: &CanonicalOptions) -> Result<u64> {
    let mut n = 0u64;
    for_each_canonical(shape, opts, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}
