use crate::algebra::{gf2, rank, vector_at, Matrix, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// The concise tensor `T` stacked with the negated rank-1 terms of the fixed
/// trailing columns: row `r' < n_0` is `T_{r'}`, row `r' >= n_0` is
/// `-⊗_{d>=1} (A_d)_{:,r'}`. Rows are flattened axis-0 slices.
#[derive(Clone, Debug)]
pub struct AugmentedTensor {
    field: PrimeField,
    shape: Vec<usize>,
    rows: Vec<Vec<u32>>,
    columns: Vec<Vec<Vec<u32>>>,
}

/// One canonical choice of trailing columns `((A_d)_{:,r})_{d>=1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTuple {
    pub columns: Vec<Vec<u32>>,
    /// `-⊗_d columns[d]`, flattened.
    pub neg_product: Vec<u32>,
}

impl LevelTuple {
    pub fn is_zero(&self) -> bool {
        self.neg_product.iter().all(|&e| e == 0)
    }
}

pub(crate) fn outer_flat(field: &PrimeField, vs: &[Vec<u32>]) -> Vec<u32> {
    let mut acc = vec![1u32];
    for v in vs {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for a in &acc {
            for b in v {
                next.push(field.mul(a, b));
            }
        }
        acc = next;
    }
    acc
}

/// Nonzero vectors of `F^n` whose first nonzero coordinate is one, in lexicographic order.
pub fn normalized_vectors(field: &PrimeField, n: usize) -> Result<Vec<Vec<u32>>> {
    let total = (field.modulus() as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::TooLarge(format!("F^{n} is too large to enumerate")))?;
    Ok((1..total)
        .map(|i| vector_at(field, n, i))
        .filter(|v| v.iter().find(|&&e| e != 0) == Some(&1))
        .collect())
}

/// All canonical column tuples for one search level: the zero tuple, then every
/// tuple of normalized vectors, in lexicographic order of the concatenation.
///
/// Scalars are absorbed by the free axis-0 column of the term, and two terms
/// with proportional products can be merged, so these cover every CPD.
pub fn canonical_tuples(field: &PrimeField, slice_shape: &[usize]) -> Result<Vec<LevelTuple>> {
    let per_axis: Vec<Vec<Vec<u32>>> = slice_shape
        .iter()
        .map(|&n| normalized_vectors(field, n))
        .collect::<Result<_>>()?;
    let count: u128 = per_axis.iter().map(|v| v.len() as u128).product();
    if count > 1 << 24 {
        return Err(Error::TooLarge(format!("{count} column tuples per level")));
    }
    let mut out = Vec::with_capacity(count as usize + 1);
    let zero: Vec<Vec<u32>> = slice_shape.iter().map(|&n| vec![0; n]).collect();
    out.push(LevelTuple {
        neg_product: vec![0; slice_shape.iter().product()],
        columns: zero,
    });
    if per_axis.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    let mut pick = vec![0usize; slice_shape.len()];
    loop {
        let columns: Vec<Vec<u32>> = pick.iter().zip(&per_axis).map(|(&i, v)| v[i].clone()).collect();
        let neg_product = outer_flat(field, &columns).iter().map(|e| field.neg(e)).collect();
        out.push(LevelTuple { columns, neg_product });
        let mut d = slice_shape.len();
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            pick[d] += 1;
            if pick[d] < per_axis[d].len() {
                break;
            }
            pick[d] = 0;
        }
    }
}

impl AugmentedTensor {
    /// Starts from a concise tensor with at least two axes and no fixed columns.
    pub fn new(field: PrimeField, t: &Tensor<u32>) -> Result<Self> {
        if t.ndim() < 2 {
            return Err(Error::ShapeMismatch("augmented tensors need at least two axes".into()));
        }
        let rows = (0..t.shape()[0]).map(|i| t.slice0(i).into_data()).collect();
        Ok(Self {
            field,
            shape: t.shape().to_vec(),
            rows,
            columns: Vec::new(),
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Shape of the base tensor.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn n0(&self) -> usize {
        self.shape[0]
    }

    /// Current axis-0 length `r` of the augmented tensor.
    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn slice_shape(&self) -> &[usize] {
        &self.shape[1..]
    }

    pub fn slice_len(&self) -> usize {
        self.shape[1..].iter().product()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// Fixed column tuples, in level order.
    pub fn fixed(&self) -> &[Vec<Vec<u32>>] {
        &self.columns
    }

    pub fn push(&mut self, t: &LevelTuple) {
        self.columns.push(t.columns.clone());
        self.rows.push(t.neg_product.clone());
    }

    pub fn push_columns(&mut self, columns: Vec<Vec<u32>>) {
        let neg = outer_flat(&self.field, &columns).iter().map(|e| self.field.neg(e)).collect();
        self.columns.push(columns);
        self.rows.push(neg);
    }

    pub fn pop(&mut self) {
        if self.rows.len() > self.n0() {
            self.rows.pop();
            self.columns.pop();
        }
    }

    /// `q ×_0 T'` for `q` of length at most `r`, flattened.
    pub fn combine(&self, q: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let mut out = vec![0u32; self.slice_len()];
        for (qi, row) in q.iter().zip(&self.rows) {
            if *qi == 0 {
                continue;
            }
            if f.modulus() == 2 {
                for (o, x) in out.iter_mut().zip(row) {
                    *o ^= x;
                }
            } else {
                for (o, x) in out.iter_mut().zip(row) {
                    *o = f.mul_add(o, qi, x);
                }
            }
        }
        out
    }

    /// Factor block `Y_d = (A_d)_{:, n_0:r}` for `d >= 1`.
    pub fn y(&self, d: usize) -> Matrix<u32> {
        Matrix::from_fn(self.shape[d], self.columns.len(), |i, j| self.columns[j][d - 1][i])
    }

    /// The augmented tensor `T'` of shape `r x n_1 x ..`.
    pub fn materialize(&self) -> Tensor<u32> {
        let mut shape = self.shape.clone();
        shape[0] = self.r();
        Tensor::new(shape, self.rows.concat()).expect("rows have slice length")
    }

    /// Whether a flattened slice has rank at most one.
    pub fn slice_rank_le_one(&self, data: &[u32]) -> bool {
        slice_rank_le_one(&self.field, self.slice_shape(), data)
    }
}

/// Rank-at-most-one test for a flattened tensor of the given shape.
pub fn slice_rank_le_one(field: &PrimeField, shape: &[usize], data: &[u32]) -> bool {
    let Some(k) = data.iter().position(|&e| e != 0) else {
        return true;
    };
    if shape.len() <= 1 {
        return true;
    }
    if shape.len() == 2 {
        let (n1, n2) = (shape[0], shape[1]);
        let (i0, j0) = (k / n2, k % n2);
        if field.modulus() == 2 {
            // every nonzero row must equal row i0
            let r0 = &data[i0 * n2..(i0 + 1) * n2];
            return (0..n1).all(|i| {
                let r = &data[i * n2..(i + 1) * n2];
                r.iter().all(|&e| e == 0) || r == r0
            });
        }
        let p = data[k];
        return (0..n1).all(|i| {
            let a = data[i * n2 + j0];
            (0..n2).all(|j| field.mul(&data[i * n2 + j], &p) == field.mul(&a, &data[i0 * n2 + j]))
        });
    }
    // general case: compare against the product of fibers through the pivot
    let mut idx = vec![0usize; shape.len()];
    let mut rem = k;
    for d in (0..shape.len()).rev() {
        idx[d] = rem % shape[d];
        rem /= shape[d];
    }
    let strides: Vec<usize> = (0..shape.len()).map(|d| shape[d + 1..].iter().product()).collect();
    let inv = field.inverse(data[k]).expect("nonzero");
    let fibers: Vec<Vec<u32>> = (0..shape.len())
        .map(|d| {
            (0..shape[d])
                .map(|i| {
                    let e = data[k - idx[d] * strides[d] + i * strides[d]];
                    if d == 0 {
                        e
                    } else {
                        field.mul(&e, &inv)
                    }
                })
                .collect()
        })
        .collect();
    outer_flat(field, &fibers) == data
}

/// Rank of a flattened `rows x cols` matrix.
pub fn matrix_rank(field: &PrimeField, rows: usize, cols: usize, data: &[u32]) -> usize {
    if field.modulus() == 2 && cols <= 64 && rows <= 64 {
        let mut packed = [0u64; 64];
        for i in 0..rows {
            let mut w = 0u64;
            for (j, &e) in data[i * cols..(i + 1) * cols].iter().enumerate() {
                w |= ((e & 1) as u64) << j;
            }
            packed[i] = w;
        }
        return gf2::rank(&packed[..rows]);
    }
    rank(field, &Matrix::from_vec(rows, cols, data.to_vec()).expect("shape"))
}
