//! Bit-packed GF(2) kernels for the search hot loops.
//!
//! A matrix with at most 64 columns is stored as one `u64` per row; bit `j`
//! holds column `j`.

use super::matrix::Matrix;

/// Packs a dense 0/1 matrix. Panics if it has more than 64 columns.
pub fn pack_rows(m: &Matrix<u32>) -> Vec<u64> {
    assert!(m.cols() <= 64, "bit-packed rows hold at most 64 columns");
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &e)| acc | (((e & 1) as u64) << j))
        })
        .collect()
}

pub fn unpack_rows(rows: &[u64], cols: usize) -> Matrix<u32> {
    Matrix::from_fn(rows.len(), cols, |i, j| ((rows[i] >> j) & 1) as u32)
}

/// Rank of a packed matrix. Uses a fixed-size scratch buffer for up to 64 rows.
#[inline]
pub fn rank(rows: &[u64]) -> usize {
    let mut buf = [0u64; 64];
    let n = rows.len().min(64);
    buf[..n].copy_from_slice(&rows[..n]);
    let mut rank = 0;
    let mut rest = &mut buf[..n];
    while let Some((first, tail)) = rest.split_first_mut() {
        let mut pivot = *first;
        if pivot == 0 {
            // find a nonzero row to swap in
            match tail.iter().position(|&r| r != 0) {
                Some(k) => std::mem::swap(&mut pivot, &mut tail[k]),
                None => break,
            }
        }
        let low = pivot & pivot.wrapping_neg();
        for r in tail.iter_mut() {
            if *r & low != 0 {
                *r ^= pivot;
            }
        }
        rank += 1;
        rest = tail;
    }
    if rows.len() > 64 {
        // tall matrices: rank is bounded by the column count anyway
        let mut extra: Vec<u64> = rows.to_vec();
        return rank_slow(&mut extra);
    }
    rank
}

fn rank_slow(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let mask = 1u64 << bit;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pv = rows[rank];
        for r in rows.iter_mut().skip(rank + 1) {
            if *r & mask != 0 {
                *r ^= pv;
            }
        }
        rank += 1;
    }
    rank
}

/// Whether the packed matrix has rank at most one: all nonzero rows equal.
#[inline]
pub fn rank_le_one(rows: &[u64]) -> bool {
    let mut seen = 0u64;
    for &r in rows {
        if r != 0 {
            if seen == 0 {
                seen = r;
            } else if r != seen {
                return false;
            }
        }
    }
    true
}

/// Rank, giving up early once it exceeds `bound`; returns `bound + 1` in that case.
#[inline]
pub fn rank_capped(rows: &[u64], bound: usize) -> usize {
    if bound == 0 {
        return if rows.iter().all(|&r| r == 0) { 0 } else { 1 };
    }
    if bound == 1 {
        return if rows.iter().all(|&r| r == 0) {
            0
        } else if rank_le_one(rows) {
            1
        } else {
            2
        };
    }
    rank(rows).min(bound + 1)
}
