use std::fmt;

use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use super::ring::Ring;
use crate::error::{Error, Result};

/// An element of GF(p)[x]/(x^H): coefficients `c_0 .. c_{H-1}` of `1, x, .., x^{H-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Poly(pub Vec<u32>);

impl Poly {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match (deg, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("x")?,
                (1, c) => write!(f, "{c}*x")?,
                (d, 1) => write!(f, "x^{d}")?,
                (d, c) => write!(f, "{c}*x^{d}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// The truncated polynomial ring GF(p)[x]/(x^H). `H = 1` is the base field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BorderRing {
    base: PrimeField,
    h: usize,
}

impl BorderRing {
    pub fn new(base: PrimeField, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidThreshold);
        }
        Ok(Self { base, h })
    }

    pub fn base(&self) -> &PrimeField {
        &self.base
    }

    /// Exponent threshold `H`.
    pub fn threshold(&self) -> usize {
        self.h
    }

    /// Embeds a base-field residue as a constant.
    pub fn constant(&self, c: u32) -> Poly {
        let mut v = vec![0; self.h];
        v[0] = c % self.base.modulus();
        Poly(v)
    }

    /// `x^k`; zero once `k >= H`.
    pub fn x_pow(&self, k: usize) -> Poly {
        let mut v = vec![0; self.h];
        if k < self.h {
            v[k] = 1;
        }
        Poly(v)
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<Poly> {
        if coeffs.len() > self.h {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for threshold H = {}",
                coeffs.len(),
                self.h
            )));
        }
        let mut v = vec![0; self.h];
        for (slot, &c) in v.iter_mut().zip(coeffs) {
            *slot = self.base.reduce(c);
        }
        Ok(Poly(v))
    }

    /// Largest `k` with `x^k | a`; `H` for zero.
    pub fn valuation(&self, a: &Poly) -> usize {
        a.0.iter().position(|&c| c != 0).unwrap_or(self.h)
    }

    /// Multiplies by `x^k`, dropping terms of degree `>= H`.
    pub fn shift_up(&self, a: &Poly, k: usize) -> Poly {
        let mut v = vec![0; self.h];
        for i in k..self.h {
            v[i] = a.0[i - k];
        }
        Poly(v)
    }

    /// Divides by `x^k`; the top `k` coefficients of the result are zero.
    /// Caller guarantees `valuation(a) >= k`.
    pub fn shift_down(&self, a: &Poly, k: usize) -> Poly {
        debug_assert!(self.valuation(a) >= k);
        let mut v = vec![0; self.h];
        for i in k..self.h {
            v[i - k] = a.0[i];
        }
        Poly(v)
    }

    /// Inverse via the coefficient recurrence
    /// `b_0 = 1/a_0`, `b_h = -(1/a_0) * sum_{h' < h} a_{h-h'} b_{h'}`.
    pub fn inverse(&self, a: &Poly) -> Result<Poly> {
        let f = &self.base;
        let a0 = a.0[0];
        if a0 == 0 {
            return Err(Error::NotInvertible);
        }
        let inv0 = f.inverse(a0)?;
        let mut b = vec![0u32; self.h];
        b[0] = inv0;
        for h in 1..self.h {
            let mut acc = 0u32;
            for hp in 0..h {
                acc = f.add(&acc, &f.mul(&a.0[h - hp], &b[hp]));
            }
            b[h] = f.neg(&f.mul(&inv0, &acc));
        }
        Ok(Poly(b))
    }
}

impl Ring for BorderRing {
    type Elem = Poly;

    fn zero(&self) -> Poly {
        Poly(vec![0; self.h])
    }
    fn one(&self) -> Poly {
        self.constant(1)
    }
    fn from_int(&self, v: i64) -> Poly {
        self.constant(self.base.reduce(v))
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        Poly(a.0.iter().zip(&b.0).map(|(x, y)| self.base.add(x, y)).collect())
    }
    fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        Poly(a.0.iter().zip(&b.0).map(|(x, y)| self.base.sub(x, y)).collect())
    }
    fn neg(&self, a: &Poly) -> Poly {
        Poly(a.0.iter().map(|x| self.base.neg(x)).collect())
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.base;
        let mut v = vec![0u32; self.h];
        for (i, ai) in a.0.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.0.iter().enumerate().take(self.h - i) {
                v[i + j] = f.add(&v[i + j], &f.mul(ai, bj));
            }
        }
        Poly(v)
    }
    fn is_zero(&self, a: &Poly) -> bool {
        a.0.iter().all(|&c| c == 0)
    }
    fn try_inverse(&self, a: &Poly) -> Option<Poly> {
        self.inverse(a).ok()
    }
    fn is_unit(&self, a: &Poly) -> bool {
        a.0[0] != 0
    }
    fn cardinality(&self) -> u64 {
        (self.base.modulus() as u64)
            .checked_pow(self.h as u32)
            .expect("border ring too large to enumerate")
    }
    fn element(&self, mut idx: u64) -> Poly {
        let p = self.base.modulus() as u64;
        let mut v = vec![0u32; self.h];
        for slot in v.iter_mut().rev() {
            *slot = (idx % p) as u32;
            idx /= p;
        }
        Poly(v)
    }
    fn index_of(&self, a: &Poly) -> u64 {
        let p = self.base.modulus() as u64;
        a.0.iter().fold(0, |acc, &c| acc * p + c as u64)
    }
}
