//! Higher-rank mixed volumes.
//!
//! The cokernel of the diagonal `W -> W^l` is realized as `W^{l-1}` through
//! `(w_1, ..., w_l) -> (w_1 - w_l, ..., w_{l-1} - w_l)`. The induced maps are
//! the block inclusions for `i < l` and `w -> (-w, ..., -w)` for `i = l`. The
//! vectors `Delta(e_i)` and `iota_j(e_i)` (`j < l`) span a unit parallelepiped
//! in `W^l` and map to the standard basis, so the quotient measure is the
//! coordinate measure of `W^{l-1}`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::mixed::{mixed_volume, projection_body};
use crate::polytope::{LinearMap, Point, Polytope};
use crate::scalar::{factorial, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Largest ambient dimension handed to the exact hull kernel.
pub const MAX_COKERNEL_DIM: usize = 8;

/// `n = k_1 + ... + k_l` with every `k_i >= 1` and `l >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, parts: Vec<usize>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidSize("a partition needs at least two parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidSize("partition parts must be positive".into()));
        }
        let s: usize = parts.iter().sum();
        if s != n {
            return Err(Error::InvalidSize(format!("parts sum to {s}, expected {n}")));
        }
        Ok(Partition { n, parts })
    }

    /// `n = 1 + ... + 1`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(n, vec![1; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Dimension `n (l - 1)` of the cokernel.
    pub fn cokernel_dim(&self) -> usize {
        self.n * (self.parts.len() - 1)
    }

    /// `k_1! ... k_l! (n(l-1))! / (n!)^l`.
    pub fn product_constant(&self) -> Scalar {
        let num = self.parts.iter().fold(factorial(self.cokernel_dim()), |acc, &k| acc * factorial(k));
        let den = factorial(self.n).pow(self.parts.len() as u32);
        Scalar::new(num, den)
    }
}

/// An `(n - k_i)`-tuple of bodies for one slot of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyTuple {
    pub bodies: Vec<Polytope>,
}

impl BodyTuple {
    pub fn new(bodies: Vec<Polytope>) -> Self {
        BodyTuple { bodies }
    }

    /// `(A, ..., A)` with `m` copies.
    pub fn repeated(a: &Polytope, m: usize) -> Self {
        BodyTuple { bodies: vec![a.clone(); m] }
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn reflect(&self) -> Self {
        BodyTuple { bodies: self.bodies.iter().map(Polytope::reflect).collect() }
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        self.bodies.iter().all(Polytope::is_centrally_symmetric)
    }
}

/// Concrete model of `coker Delta_l` as `W^{l-1}`.
#[derive(Clone, Debug)]
pub struct CokernelModel {
    n: usize,
    l: usize,
    maps: Vec<LinearMap>,
}

impl CokernelModel {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 || l < 2 {
            return Err(Error::InvalidSize(format!("cokernel model needs n >= 1 and l >= 2, got n={n}, l={l}")));
        }
        let mut maps: Vec<LinearMap> = (0..l - 1).map(|i| LinearMap::block_inclusion(n, l - 1, i)).collect();
        maps.push(LinearMap::block_diagonal(n, l - 1, &-Scalar::one()));
        Ok(CokernelModel { n, l, maps })
    }

    pub fn dim(&self) -> usize {
        self.n * (self.l - 1)
    }

    /// The map `f_i` (zero-based slot index).
    pub fn map(&self, slot: usize) -> &LinearMap {
        &self.maps[slot]
    }

    /// The identification `W^l -> W^{l-1}`.
    pub fn quotient_map(&self) -> LinearMap {
        let (n, l) = (self.n, self.l);
        let rows = (0..n * (l - 1))
            .map(|r| {
                (0..n * l)
                    .map(|c| {
                        if c == r {
                            Scalar::one()
                        } else if c == (l - 1) * n + r % n {
                            -Scalar::one()
                        } else {
                            Scalar::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        LinearMap::new(rows, n * l).expect("consistent shape")
    }

    /// Determinant of the matrix whose columns are `Delta(e_i)` and
    /// `iota_j(e_i)` for `j < l`. Its absolute value is the measure factor of
    /// the identification.
    pub fn identification_determinant(&self) -> Scalar {
        let (n, l) = (self.n, self.l);
        let dim = n * l;
        let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(dim);
        for i in 0..n {
            cols.push((0..dim).map(|r| if r % n == i { Scalar::one() } else { Scalar::zero() }).collect());
        }
        for j in 0..l - 1 {
            for i in 0..n {
                cols.push((0..dim).map(|r| if r == j * n + i { Scalar::one() } else { Scalar::zero() }).collect());
            }
        }
        let mut m: Vec<Vec<Scalar>> = (0..dim).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        linalg::determinant(&mut m)
    }

    pub fn embed(&self, slot: usize, body: &Polytope) -> Result<Polytope> {
        body.apply_map(&self.maps[slot])
    }
}

fn check_tuples(p: &Partition, tuples: &[BodyTuple]) -> Result<()> {
    if tuples.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: tuples.len() });
    }
    for (t, &k) in tuples.iter().zip(p.parts()) {
        if t.len() != p.n() - k {
            return Err(Error::LengthMismatch { expected: p.n() - k, found: t.len() });
        }
        if let Some(b) = t.bodies.iter().find(|b| b.dim() != p.n()) {
            return Err(Error::DimensionMismatch { expected: p.n(), found: b.dim() });
        }
    }
    Ok(())
}

/// Bodies `f_i(A_{i,j})` in the cokernel model.
pub fn embedded_bodies(p: &Partition, tuples: &[BodyTuple]) -> Result<Vec<Polytope>> {
    check_tuples(p, tuples)?;
    if p.cokernel_dim() > MAX_COKERNEL_DIM {
        return Err(Error::InvalidSize(format!("cokernel dimension {} exceeds {MAX_COKERNEL_DIM}", p.cokernel_dim())));
    }
    let model = CokernelModel::new(p.n(), p.len())?;
    let mut out = Vec::new();
    for (slot, t) in tuples.iter().enumerate() {
        for b in &t.bodies {
            out.push(model.embed(slot, b)?);
        }
    }
    Ok(out)
}

/// Higher-rank mixed volume of rank `l - 1`.
pub fn tilde_mixed_volume(p: &Partition, tuples: &[BodyTuple]) -> Result<Scalar> {
    let bodies = embedded_bodies(p, tuples)?;
    mixed_volume(&bodies)
}

/// `V(A_1, ..., A_{n-k}, -B_1, ..., -B_k)`.
pub fn rank_one_reduction(a: &[Polytope], b: &[Polytope]) -> Result<Scalar> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSize("both tuples must be nonempty".into()));
    }
    let mut bodies = a.to_vec();
    bodies.extend(b.iter().map(Polytope::reflect));
    mixed_volume(&bodies)
}

/// `n! ((n-1)!)^n / (2^n (n(n-1))!)`.
pub fn projection_body_constant(n: usize) -> Scalar {
    let num = factorial(n) * factorial(n - 1).pow(n as u32);
    let den = BigInt::from(2).pow(n as u32) * factorial(n * (n - 1));
    Scalar::new(num, den)
}

/// Both sides of the projection-body formula for rank `n - 1`.
pub fn projection_body_formula_check(tuples: &[BodyTuple]) -> Result<(Scalar, Scalar)> {
    let n = tuples.len();
    let p = Partition::ones(n)?;
    check_tuples(&p, tuples)?;
    for (i, t) in tuples[..n - 1].iter().enumerate() {
        if !t.is_centrally_symmetric() {
            return Err(Error::NotSymmetric(format!("tuple {} must consist of centrally symmetric bodies", i + 1)));
        }
    }
    let lhs = tilde_mixed_volume(&p, tuples)?;
    let pis: Vec<Polytope> = tuples.iter().map(|t| projection_body(&t.bodies)).collect::<Result<_>>()?;
    let rhs = projection_body_constant(n) * mixed_volume(&pis)?;
    Ok((lhs, rhs))
}

/// `w -> (w, xi_1(w), ..., xi_m(w))`.
pub fn graph_embedding(n: usize, xi: &[Point]) -> Result<LinearMap> {
    if let Some(x) = xi.iter().find(|x| x.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
    }
    let mut rows: Vec<Vec<Scalar>> = (0..n).map(|i| Point::unit(n, i).0).collect();
    rows.extend(xi.iter().map(|x| x.0.clone()));
    LinearMap::new(rows, n)
}

/// `w -> (w, 0, ..., 0)` into `W x R^m`.
pub fn zero_graph_embedding(n: usize, m: usize) -> LinearMap {
    graph_embedding(n, &vec![Point::origin(n); m]).expect("consistent shape")
}

/// Both sides of the identity relating a rank `n-1` mixed volume with
/// hyperplane tuples to a mixed volume in `W^{n-k-1} x R^k`:
/// `lhs = V~((A_1[n-1]), ..., (A_{n-k}[n-1]), (C_1[n-1]), ..., (C_k[n-1]))` and
/// `rhs = V(iota_1(A_1)[n-1], ..., iota_{n-k-1}(A_{n-k-1})[n-1], (Delta x L)(-A_{n-k})[n-1])`.
pub fn graphing_sides(a: &[Polytope], c: &[Polytope], xi: &[Point]) -> Result<(Scalar, Scalar)> {
    let first = a.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    let k = c.len();
    if k == 0 || k >= n || xi.len() != k || a.len() + k != n {
        return Err(Error::LengthMismatch { expected: n - k.max(1), found: a.len() });
    }
    if linalg::rank(xi) < k {
        return Err(Error::Precondition("functionals must be linearly independent".into()));
    }
    for (ci, x) in c.iter().zip(xi) {
        if ci.affine_dim() + 1 != n {
            return Err(Error::Precondition("each C_i must have dimension n - 1".into()));
        }
        if ci.vertices().iter().any(|v| !v.dot(x).is_zero()) {
            return Err(Error::Precondition("C_i must lie in the kernel of xi_i".into()));
        }
    }
    let p = Partition::ones(n)?;
    let mut tuples: Vec<BodyTuple> = a.iter().map(|b| BodyTuple::repeated(b, n - 1)).collect();
    tuples.extend(c.iter().map(|b| BodyTuple::repeated(b, n - 1)));
    let lhs = tilde_mixed_volume(&p, &tuples)?;

    // Target W^{n-k-1} x R^k.
    let blocks = n - k - 1;
    let dim = n * blocks + k;
    let mut bodies = Vec::with_capacity(dim);
    for (j, aj) in a[..blocks].iter().enumerate() {
        let rows = (0..dim)
            .map(|r| (0..n).map(|col| if r == j * n + col { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        let iota = LinearMap::new(rows, n)?;
        let img = aj.apply_map(&iota)?;
        bodies.extend(std::iter::repeat_n(img, n - 1));
    }
    let rows: Vec<Vec<Scalar>> = (0..dim)
        .map(|r| if r < n * blocks { Point::unit(n, r % n).0 } else { xi[r - n * blocks].0.clone() })
        .collect();
    let diag = LinearMap::new(rows, n)?;
    let last = a[blocks].reflect().apply_map(&diag)?;
    bodies.extend(std::iter::repeat_n(last, n - 1));
    let rhs = mixed_volume(&bodies)?;
    Ok((lhs, rhs))
}

/// Outcome of comparing both sides over several choices of the `A`-bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphingReport {
    pub sides: Vec<(Scalar, Scalar)>,
    /// Common ratio `lhs / rhs` over the choices with `rhs != 0`.
    pub constant: Option<Scalar>,
    /// All ratios agree, are positive, and `lhs = 0` exactly when `rhs = 0`.
    pub consistent: bool,
}

pub fn graphing_ratio_check(a_choices: &[Vec<Polytope>], c: &[Polytope], xi: &[Point]) -> Result<GraphingReport> {
    let mut sides = Vec::with_capacity(a_choices.len());
    for a in a_choices {
        sides.push(graphing_sides(a, c, xi)?);
    }
    let mut constant: Option<Scalar> = None;
    let mut consistent = true;
    for (l, r) in &sides {
        if r.is_zero() || l.is_zero() {
            consistent &= r.is_zero() && l.is_zero();
            continue;
        }
        let q = l / r;
        consistent &= q.is_positive();
        match &constant {
            Some(c0) => consistent &= *c0 == q,
            None => constant = Some(q),
        }
    }
    Ok(GraphingReport { sides, constant, consistent })
}

/// Segment directions witnessing positivity: for each slot `i`, `n - k_i`
/// directions of segments in the respective bodies, with `dim H_i = n - k_i`
/// and trivial intersection of the spans `H_i`. Searches vertex-difference
/// directions, which suffice for polytopes.
pub fn positivity_witness(p: &Partition, tuples: &[BodyTuple]) -> Result<Option<Vec<Vec<Point>>>> {
    check_tuples(p, tuples)?;
    let candidates: Vec<Vec<Vec<Point>>> = tuples
        .iter()
        .map(|t| {
            t.bodies
                .iter()
                .map(|b| {
                    let vs = b.vertices();
                    let mut dirs = Vec::new();
                    for i in 0..vs.len() {
                        for j in i + 1..vs.len() {
                            dirs.push(vs[j].sub(&vs[i]));
                        }
                    }
                    dirs
                })
                .collect()
        })
        .collect();
    let mut chosen: Vec<Vec<Point>> = vec![Vec::new(); tuples.len()];
    Ok(search_witness(p.n(), &candidates, 0, 0, &mut chosen).then_some(chosen))
}

fn search_witness(n: usize, cand: &[Vec<Vec<Point>>], slot: usize, body: usize, chosen: &mut Vec<Vec<Point>>) -> bool {
    if slot == cand.len() {
        let annihilators: Vec<Point> = chosen.iter().flat_map(|h| linalg::null_space(h, n)).collect();
        return linalg::rank(&annihilators) == n;
    }
    if body == cand[slot].len() {
        return search_witness(n, cand, slot + 1, 0, chosen);
    }
    for d in &cand[slot][body] {
        chosen[slot].push(d.clone());
        if linalg::rank(&chosen[slot]) == chosen[slot].len() && search_witness(n, cand, slot, body + 1, chosen) {
            return true;
        }
        chosen[slot].pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{cube, segment, simplex};
    use crate::scalar::{int, ratio};

    #[test]
    fn partitions() {
        assert!(Partition::new(3, vec![1, 1, 1]).is_ok());
        assert!(Partition::new(3, vec![1, 1]).is_err());
        assert!(Partition::new(3, vec![3]).is_err());
        assert!(Partition::new(3, vec![0, 3]).is_err());
        assert_eq!(Partition::ones(3).unwrap().cokernel_dim(), 6);
        assert_eq!(Partition::ones(3).unwrap().product_constant(), ratio(720, 216));
    }

    #[test]
    fn cokernel_measure_factor_is_one() {
        for (n, l) in [(2, 2), (3, 3), (4, 2), (2, 4)] {
            let m = CokernelModel::new(n, l).unwrap();
            assert_eq!(m.identification_determinant().abs(), int(1));
            let q = m.quotient_map();
            let diag = LinearMap::block_diagonal(n, l, &int(1));
            let zero = q.compose(&diag).unwrap();
            assert!(zero.rows().iter().flatten().all(Zero::is_zero));
            for slot in 0..l {
                let iota = LinearMap::block_inclusion(n, l, slot);
                assert_eq!(q.compose(&iota).unwrap(), *m.map(slot));
            }
        }
    }

    #[test]
    fn planar_squares() {
        let sq = cube(2, &int(1)).unwrap();
        let p = Partition::new(2, vec![1, 1]).unwrap();
        let t = BodyTuple::new(vec![sq.clone()]);
        assert_eq!(tilde_mixed_volume(&p, &[t.clone(), t]).unwrap(), int(1));
        assert_eq!(rank_one_reduction(&[sq.clone()], &[sq]).unwrap(), int(1));
    }

    #[test]
    fn segment_rank_one() {
        let s = |v: &[i64]| segment(&Point::from_ints(v)).unwrap();
        let v = rank_one_reduction(&[s(&[1, 0, 0]), s(&[0, 1, 0])], &[s(&[0, 0, 1])]).unwrap();
        assert_eq!(v, ratio(1, 6));
    }

    #[test]
    fn cube_value_and_projection_constant() {
        assert_eq!(projection_body_constant(3), ratio(1, 120));
        let c = cube(3, &int(1)).unwrap();
        let t = BodyTuple::repeated(&c, 2);
        let tuples = vec![t.clone(), t.clone(), t];
        let (lhs, rhs) = projection_body_formula_check(&tuples).unwrap();
        assert_eq!(lhs, ratio(1, 15));
        assert_eq!(rhs, ratio(1, 15));
    }

    #[test]
    fn projection_formula_requires_symmetry() {
        let s = simplex(3).unwrap();
        let c = cube(3, &int(1)).unwrap();
        let tuples = vec![BodyTuple::repeated(&s, 2), BodyTuple::repeated(&c, 2), BodyTuple::repeated(&c, 2)];
        assert!(matches!(projection_body_formula_check(&tuples), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn slot_errors() {
        let c = cube(3, &int(1)).unwrap();
        let p = Partition::ones(3).unwrap();
        let short = vec![BodyTuple::repeated(&c, 2), BodyTuple::repeated(&c, 1), BodyTuple::repeated(&c, 2)];
        assert!(matches!(tilde_mixed_volume(&p, &short), Err(Error::LengthMismatch { .. })));
        let p4 = Partition::ones(4).unwrap();
        let c4 = cube(4, &int(1)).unwrap();
        let big = vec![BodyTuple::repeated(&c4, 3); 4];
        assert!(matches!(tilde_mixed_volume(&p4, &big), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn graphing_map() {
        let g = graph_embedding(3, &[Point::from_ints(&[1, 0, 0])]).unwrap();
        assert_eq!(g.apply(&Point::unit(3, 0)), Point::from_ints(&[1, 0, 0, 1]));
        let z = zero_graph_embedding(3, 1);
        assert_eq!(z.apply(&Point::from_ints(&[1, 2, 3])), Point::from_ints(&[1, 2, 3, 0]));
    }

    #[test]
    fn witness_search() {
        let c = cube(3, &int(1)).unwrap();
        let p = Partition::ones(3).unwrap();
        let t = BodyTuple::repeated(&c, 2);
        assert!(positivity_witness(&p, &[t.clone(), t.clone(), t.clone()]).unwrap().is_some());
        // Every H_i equal to the same plane: the intersection is not trivial.
        let sq = crate::polytope::zonotope(&[Point::unit(3, 0), Point::unit(3, 1)]).unwrap();
        let f = BodyTuple::repeated(&sq, 2);
        assert!(positivity_witness(&p, &[f.clone(), f.clone(), f]).unwrap().is_none());
    }
}
