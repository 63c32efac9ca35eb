//! Integer arithmetic used by the hull kernel.
//!
//! The kernel runs first over checked `i128` and falls back to `BigInt`
//! when any intermediate value overflows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt::Debug;

/// Marker returned when a checked operation leaves the representable range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) type RingResult<T> = Result<T, Overflow>;

pub(crate) trait Ring: Clone + Ord + std::hash::Hash + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_bigint(v: &BigInt) -> RingResult<Self>;
    fn to_bigint(&self) -> BigInt;
    fn add(&self, o: &Self) -> RingResult<Self>;
    fn sub(&self, o: &Self) -> RingResult<Self>;
    fn mul(&self, o: &Self) -> RingResult<Self>;
    /// Division known to be exact (Bareiss steps, gcd reduction).
    fn div_exact(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn gcd(&self, o: &Self) -> Self;
    fn sign(&self) -> Ordering;

    fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

impl Ring for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_bigint(v: &BigInt) -> RingResult<Self> {
        // Keep inputs well inside the range so products of a few entries stay checkable.
        let x = v.to_i128().ok_or(Overflow)?;
        if x.unsigned_abs() > (1u128 << 62) {
            return Err(Overflow);
        }
        Ok(x)
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    #[inline]
    fn add(&self, o: &Self) -> RingResult<Self> {
        self.checked_add(*o).ok_or(Overflow)
    }
    #[inline]
    fn sub(&self, o: &Self) -> RingResult<Self> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    #[inline]
    fn mul(&self, o: &Self) -> RingResult<Self> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    #[inline]
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    #[inline]
    fn sign(&self) -> Ordering {
        self.cmp(&0)
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn from_bigint(v: &BigInt) -> RingResult<Self> {
        Ok(v.clone())
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> RingResult<Self> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> RingResult<Self> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> RingResult<Self> {
        Ok(self * o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

pub(crate) fn dot<R: Ring>(a: &[R], b: &[R]) -> RingResult<R> {
    let mut acc = R::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y)?)?;
    }
    Ok(acc)
}

/// Determinant of a square matrix by fraction-free (Bareiss) elimination.
pub(crate) fn det_bareiss<R: Ring>(mut m: Vec<Vec<R>>) -> RingResult<R> {
    let n = m.len();
    if n == 0 {
        return Ok(R::one());
    }
    let mut negate = false;
    let mut prev = R::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(R::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].mul(&m[k][k])?.sub(&m[i][k].mul(&m[k][j])?)?;
                m[i][j] = t.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// Rank of a (rows x cols) matrix together with the pivot columns of its
/// row echelon form.
pub(crate) fn rank_and_pivots<R: Ring>(mut m: Vec<Vec<R>>, cols: usize) -> RingResult<(usize, Vec<usize>)> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    let mut prev = R::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let t = m[i][j].mul(&m[r][c])?.sub(&m[i][c].mul(&m[r][j])?)?;
                m[i][j] = t.div_exact(&prev);
            }
            m[i][c] = R::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Ok((r, pivots))
}

/// Cofactor normal of the hyperplane through `k` points in `Z^k`:
/// `n_j = (-1)^j det(D without column j)` where `D` holds the differences
/// `p_i - p_0`. For any `x`, `n . (x - p_0)` equals the determinant of the
/// difference matrix extended by `x - p_0`.
///
/// All maximal minors are built by Laplace expansion over column subsets,
/// which avoids divisions entirely.
pub(crate) fn cofactor_normal<R: Ring>(pts: &[&[R]]) -> RingResult<Vec<R>> {
    let k = pts[0].len();
    debug_assert_eq!(pts.len(), k);
    debug_assert!(k <= 16);
    let base = pts[0];
    let mut diffs = Vec::with_capacity(k - 1);
    for p in &pts[1..] {
        let row = p.iter().zip(base).map(|(a, b)| a.sub(b)).collect::<RingResult<Vec<R>>>()?;
        diffs.push(row);
    }
    // minors[S] = det of the first |S| rows restricted to the columns in S.
    let full = (1usize << k) - 1;
    let mut minors: Vec<R> = vec![R::zero(); 1 << k];
    minors[0] = R::one();
    let mut by_size: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for s in 0..=full {
        by_size[s.count_ones() as usize].push(s);
    }
    for r in 1..k {
        let row = &diffs[r - 1];
        for &s in &by_size[r] {
            let mut acc = R::zero();
            let mut t = 0;
            for (c, a) in row.iter().enumerate() {
                if s & (1 << c) == 0 {
                    continue;
                }
                if !a.is_zero() {
                    let sub = &minors[s & !(1 << c)];
                    if !sub.is_zero() {
                        let term = a.mul(sub)?;
                        // Expansion along row r-1 of an r x r matrix at column position t.
                        acc = if (r - 1 + t) % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
                    }
                }
                t += 1;
            }
            minors[s] = acc;
        }
    }
    let mut normal = Vec::with_capacity(k);
    for j in 0..k {
        let d = minors[full & !(1 << j)].clone();
        // Sign chosen so that the extended determinant has x - p_0 as its last row.
        let sign_neg = (j + k - 1) % 2 == 1;
        normal.push(if sign_neg { d.neg() } else { d });
    }
    Ok(normal)
}
