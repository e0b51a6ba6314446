//! Named tensor families. Entries are 0/1, so every family is valid over any field.

use super::{kron, Tensor};
use crate::algebra::PrimeField;
use crate::error::{Error, Result};

/// Family names accepted by [`generate`], with their parameter counts.
pub const FAMILIES: &[(&str, usize)] = &[
    ("wstate", 0),
    ("wstate_rev", 0),
    ("wstate_sq", 0),
    ("addmod2", 0),
    ("counterexample3", 0),
    ("t1", 0),
    ("t2", 0),
    ("polymul", 1),
    ("diagshift", 1),
    ("lm2", 1),
    ("lm3", 1),
    ("mm", 3),
];

fn from_nested(slices: &[[[u32; 3]; 3]]) -> Tensor<u32> {
    let data = slices.iter().flatten().flatten().copied().collect();
    Tensor::new(vec![slices.len(), 3, 3], data).expect("3x3 slices")
}

fn cube2(d: [u32; 8]) -> Tensor<u32> {
    Tensor::new(vec![2, 2, 2], d.to_vec()).expect("2x2x2")
}

/// Splits `name:a,b,c` into the family name and its parameters.
pub fn parse_family(text: &str) -> Result<(String, Vec<usize>)> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (text, None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|_| Error::InvalidFamilyParams {
                    family: name.to_string(),
                    reason: format!("`{s}` is not a nonnegative integer"),
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok((name.to_string(), params))
}

/// The `(m, k, n)` matrix multiplication tensor of shape `mk x kn x nm`,
/// with a one at `(i*k + j, j*n + l, l*m + i)`.
pub fn mm_tensor(m: usize, k: usize, n: usize) -> Tensor<u32> {
    let mut t = Tensor::filled(vec![m * k, k * n, n * m], 0u32);
    for i in 0..m {
        for j in 0..k {
            for l in 0..n {
                t.set(&[i * k + j, j * n + l, l * m + i], 1);
            }
        }
    }
    t
}

/// Slices `T_s` with a one at `(i, j)` whenever `i + j = s`.
fn anti_diagonals(slices: usize, n: usize) -> Tensor<u32> {
    Tensor::from_fn(vec![slices, n, n], |idx| (idx[1] + idx[2] == idx[0]) as u32)
}

fn lm2(k: usize) -> Tensor<u32> {
    let n = 1usize << k;
    Tensor::from_fn(vec![k + 1, n, n], |idx| {
        let (s, i, j) = (idx[0], idx[1], idx[2]);
        let on = if s == 0 {
            i == 0 && j == 0
        } else {
            let b = 1usize << s;
            i < b && j < b && i + j == b - 1
        };
        on as u32
    })
}

fn lm3(k: usize) -> Tensor<u32> {
    let n = 1usize << k;
    let head = lm2(k);
    Tensor::from_fn(vec![n, n, n], |idx| {
        let (s, i, j) = (idx[0], idx[1], idx[2]);
        if s <= k {
            *head.get(idx)
        } else {
            (i == n - 1 && j == n - 1 - (s - k)) as u32
        }
    })
}

pub fn generate(family: &str, params: &[usize]) -> Result<Tensor<u32>> {
    let Some(&(_, arity)) = FAMILIES.iter().find(|(n, _)| *n == family) else {
        return Err(Error::UnknownFamily(family.to_string()));
    };
    let bad = |reason: String| Error::InvalidFamilyParams {
        family: family.to_string(),
        reason,
    };
    if params.len() != arity {
        return Err(bad(format!("expected {arity} parameters, got {}", params.len())));
    }
    if params.iter().any(|&p| p == 0) {
        return Err(bad("parameters must be positive".into()));
    }
    Ok(match family {
        "wstate" => cube2([1, 0, 0, 0, 0, 1, 1, 0]),
        "wstate_rev" => cube2([0, 1, 1, 0, 1, 0, 0, 0]),
        "wstate_sq" => {
            let w = cube2([1, 0, 0, 0, 0, 1, 1, 0]);
            kron(&PrimeField::gf2(), &w, &w)?
        }
        "addmod2" => cube2([0, 1, 1, 0, 1, 0, 0, 1]),
        "counterexample3" => from_nested(&[
            [[1, 1, 0], [0, 1, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 1, 1], [0, 0, 1]],
            [[1, 0, 0], [0, 0, 0], [1, 0, 1]],
        ]),
        "t1" => from_nested(&[
            [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[1, 1, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        ]),
        "t2" => from_nested(&[
            [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            [[0, 0, 1], [0, 0, 1], [1, 1, 0]],
        ]),
        "polymul" => anti_diagonals(2 * params[0] - 1, params[0]),
        "diagshift" => anti_diagonals(params[0], params[0]),
        "lm2" | "lm3" if params[0] > 10 => return Err(bad("k must be at most 10".into())),
        "lm2" => lm2(params[0]),
        "lm3" => lm3(params[0]),
        "mm" => mm_tensor(params[0], params[1], params[2]),
        _ => unreachable!("family table and match agree"),
    })
}
