//! Small exact linear algebra over rationals.

use crate::polytope::Point;
use crate::scalar::Scalar;
use num_traits::{One, Zero};

/// Reduced row echelon form; returns the pivot columns.
fn rref(m: &mut [Vec<Scalar>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Scalar::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a set of vectors.
pub fn rank(vectors: &[Point]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let mut m: Vec<Vec<Scalar>> = vectors.iter().map(|v| v.0.clone()).collect();
    rref(&mut m, first.dim()).len()
}

/// Basis of `{x : <v, x> = 0 for all v}` in `Q^dim`.
pub fn null_space(vectors: &[Point], dim: usize) -> Vec<Point> {
    let mut m: Vec<Vec<Scalar>> = vectors.iter().map(|v| v.0.clone()).collect();
    let pivots = rref(&mut m, dim);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Scalar::zero(); dim];
            x[f] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[row][f].clone();
            }
            Point(x)
        })
        .collect()
}

/// Gram determinant `det(<b_i, b_j>)`, the squared `k`-volume of the
/// parallelepiped spanned by the basis.
pub fn gram_determinant(basis: &[Point]) -> Scalar {
    let k = basis.len();
    let mut m: Vec<Vec<Scalar>> = (0..k).map(|i| (0..k).map(|j| basis[i].dot(&basis[j])).collect()).collect();
    determinant(&mut m)
}

/// Determinant by elimination (consumes the matrix contents).
pub fn determinant(m: &mut [Vec<Scalar>]) -> Scalar {
    let n = m.len();
    let mut det = Scalar::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Scalar::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &piv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn rank_and_null_space() {
        let v = [Point::from_ints(&[1, 2, 3]), Point::from_ints(&[2, 4, 6]), Point::from_ints(&[0, 1, 1])];
        assert_eq!(rank(&v), 2);
        let ns = null_space(&v, 3);
        assert_eq!(ns.len(), 1);
        for x in &v {
            assert_eq!(x.dot(&ns[0]), int(0));
        }
    }

    #[test]
    fn gram_of_orthogonal_basis() {
        let b = [Point::from_ints(&[2, 0, 0]), Point::from_ints(&[0, 3, 0])];
        assert_eq!(gram_determinant(&b), int(36));
        let mut m = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(determinant(&mut m), int(-1));
    }
}
