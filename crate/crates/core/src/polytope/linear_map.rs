use super::Point;
use crate::error::{Error, Result};
use crate::polytope::ring::det_bareiss;
use crate::scalar::{common_denominator, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Affine map `x -> M x + t` with a rational `d_out x d_in` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    rows: Vec<Vec<Scalar>>,
    dim_in: usize,
    translation: Option<Point>,
}

impl LinearMap {
    pub fn new(rows: Vec<Vec<Scalar>>, dim_in: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != dim_in) {
            return Err(Error::DimensionMismatch { expected: dim_in, found: r.len() });
        }
        Ok(LinearMap { rows, dim_in, translation: None })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        let dim_in = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| Scalar::from_integer(BigInt::from(x))).collect()).collect();
        Self::new(rows, dim_in)
    }

    pub fn with_translation(mut self, t: Point) -> Result<Self> {
        if t.dim() != self.dim_out() {
            return Err(Error::DimensionMismatch { expected: self.dim_out(), found: t.dim() });
        }
        self.translation = Some(t);
        Ok(self)
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, &Scalar::one())
    }

    /// `x -> s x`.
    pub fn scalar(d: usize, s: &Scalar) -> Self {
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { s.clone() } else { Scalar::zero() }).collect())
            .collect();
        LinearMap { rows, dim_in: d, translation: None }
    }

    /// Inclusion of `R^n` as the `slot`-th block of `(R^n)^blocks`.
    pub fn block_inclusion(n: usize, blocks: usize, slot: usize) -> Self {
        assert!(slot < blocks, "block index out of range");
        let d = n * blocks;
        let rows = (0..d)
            .map(|i| (0..n).map(|j| if i == slot * n + j { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        LinearMap { rows, dim_in: n, translation: None }
    }

    /// `w -> (c w, c w, ..., c w)` into `(R^n)^blocks`.
    pub fn block_diagonal(n: usize, blocks: usize, c: &Scalar) -> Self {
        let d = n * blocks;
        let rows = (0..d)
            .map(|i| (0..n).map(|j| if i % n == j { c.clone() } else { Scalar::zero() }).collect())
            .collect();
        LinearMap { rows, dim_in: n, translation: None }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn translation(&self) -> Option<&Point> {
        self.translation.as_ref()
    }

    pub fn apply(&self, p: &Point) -> Point {
        let mut out: Vec<Scalar> = self.rows.iter().map(|r| r.iter().zip(&p.0).map(|(a, b)| a * b).sum()).collect();
        if let Some(t) = &self.translation {
            for (o, x) in out.iter_mut().zip(&t.0) {
                *o += x;
            }
        }
        Point(out)
    }

    /// `self o other`.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.dim_in != other.dim_out() {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: other.dim_out() });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| (0..other.dim_in).map(|j| r.iter().zip(&other.rows).map(|(a, orow)| a * &orow[j]).sum()).collect())
            .collect();
        let translation = match (&other.translation, &self.translation) {
            (None, t) => t.clone(),
            (Some(t2), t1) => {
                let lin = LinearMap { rows: self.rows.clone(), dim_in: self.dim_in, translation: t1.clone() };
                Some(lin.apply(t2))
            }
        };
        Ok(LinearMap { rows, dim_in: other.dim_in, translation })
    }

    /// Determinant of the linear part of a square map.
    pub fn determinant(&self) -> Result<Scalar> {
        let d = self.dim_out();
        if d != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: d });
        }
        let denom = common_denominator(self.rows.iter().flatten());
        let scaled: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| (x * Scalar::from_integer(denom.clone())).to_integer()).collect())
            .collect();
        let det = det_bareiss(scaled).expect("BigInt arithmetic cannot overflow");
        Ok(Scalar::new(det, denom.pow(d as u32)))
    }
}
