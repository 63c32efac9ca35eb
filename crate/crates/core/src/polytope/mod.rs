//! Exact vertex-representation polytopes.
//!
//! A [`Polytope`] is stored as its canonical vertex set: redundant points
//! removed, vertices sorted lexicographically. Flat polytopes are ordinary
//! values with volume zero. All arithmetic is rational; hull and volume are
//! delegated to an integer beneath-beyond kernel after clearing denominators.

pub(crate) mod hull;
pub(crate) mod ring;

mod generators;
mod io;
mod linear_map;

pub use generators::*;
pub use io::BodyJson;
pub use linear_map::LinearMap;

use crate::error::{Error, Result};
use crate::scalar::{common_denominator, factorial, Scalar};
use hull::{int_hull, IntHull};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::OnceLock;

/// A point of `Q^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Scalar>);

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| Scalar::from_integer(BigInt::from(c))).collect())
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![Scalar::zero(); dim])
    }

    /// Unit vector `e_i` (zero-based).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut c = vec![Scalar::zero(); dim];
        c[i] = Scalar::one();
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn dot(&self, other: &Point) -> Scalar {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Scalar) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Point {
        Point(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn norm_squared(&self) -> Scalar {
        self.dot(self)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Convex polytope given by its canonical vertex set.
#[derive(Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    affine_dim: usize,
    volume: OnceLock<Scalar>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope").field("dim", &self.dim).field("vertices", &self.vertices).finish()
    }
}

/// Points scaled by a common denominator into `Z^d`.
pub(crate) struct Lattice {
    pub points: Vec<Vec<BigInt>>,
    pub denom: BigInt,
}

impl Lattice {
    pub fn from_points(points: &[Point]) -> Self {
        let denom = common_denominator(points.iter().flat_map(|p| p.0.iter()));
        Self::with_denominator(points, &denom)
    }

    pub fn with_denominator(points: &[Point], denom: &BigInt) -> Self {
        let pts = points
            .iter()
            .map(|p| p.0.iter().map(|c| (c * Scalar::from_integer(denom.clone())).to_integer()).collect())
            .collect();
        Lattice { points: pts, denom: denom.clone() }
    }

    pub fn to_point(&self, p: &[BigInt]) -> Point {
        Point(p.iter().map(|c| Scalar::new(c.clone(), self.denom.clone())).collect())
    }
}

/// Convex hull of a nonempty point set.
pub fn convex_hull(points: &[Point]) -> Result<Polytope> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    Polytope::from_points(first.dim(), points)
}

impl Polytope {
    /// Hull of `points`, all of dimension `dim`.
    pub fn from_points(dim: usize, points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let lat = Lattice::from_points(points);
        let h = int_hull(&lat.points, false);
        Ok(Self::from_int_hull(dim, &lat.denom, &h))
    }

    pub(crate) fn from_int_hull(dim: usize, denom: &BigInt, h: &IntHull) -> Self {
        let lat = Lattice { points: vec![], denom: denom.clone() };
        let vertices: Vec<Point> = h.vertices.iter().map(|v| lat.to_point(v)).collect();
        let mut vertices = vertices;
        vertices.sort();
        let volume = OnceLock::new();
        let vol = if h.affine_dim == dim {
            Scalar::new(h.volume_factorial.clone(), factorial(dim) * denom.pow(dim as u32))
        } else {
            Scalar::zero()
        };
        let _ = volume.set(vol);
        Polytope { dim, vertices, affine_dim: h.affine_dim, volume }
    }

    /// Builds a polytope from points already known to be its vertices in
    /// canonical order. Used for images under maps that preserve extremality.
    fn from_canonical(dim: usize, vertices: Vec<Point>, affine_dim: usize) -> Self {
        Polytope { dim, vertices, affine_dim, volume: OnceLock::new() }
    }

    pub fn point(p: Point) -> Self {
        let dim = p.dim();
        Polytope { dim, vertices: vec![p], affine_dim: 0, volume: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Dimension of the affine span.
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim
    }

    /// Exact `d`-dimensional volume; zero for flat polytopes.
    pub fn volume(&self) -> Scalar {
        self.volume
            .get_or_init(|| {
                if self.affine_dim < self.dim {
                    return Scalar::zero();
                }
                let lat = Lattice::from_points(&self.vertices);
                let h = int_hull(&lat.points, false);
                Scalar::new(h.volume_factorial, factorial(self.dim) * lat.denom.pow(self.dim as u32))
            })
            .clone()
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.add(b));
            }
        }
        Polytope::from_points(self.dim, &pts)
    }

    /// Minkowski sum of a nonempty list of polytopes.
    pub fn sum_all(bodies: &[Polytope]) -> Result<Polytope> {
        let (first, rest) = bodies.split_first().ok_or(Error::EmptyInput)?;
        rest.iter().try_fold(first.clone(), |acc, b| acc.minkowski_sum(b))
    }

    pub fn apply_map(&self, map: &LinearMap) -> Result<Polytope> {
        if map.dim_in() != self.dim {
            return Err(Error::DimensionMismatch { expected: map.dim_in(), found: self.dim });
        }
        let pts: Vec<Point> = self.vertices.iter().map(|v| map.apply(v)).collect();
        Polytope::from_points(map.dim_out(), &pts)
    }

    /// `max_v <u, v>`.
    pub fn support(&self, u: &Point) -> Result<Scalar> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.dim() });
        }
        Ok(self.vertices.iter().map(|v| v.dot(u)).max().expect("polytope has a vertex"))
    }

    /// The reflection `-P`.
    pub fn reflect(&self) -> Polytope {
        let mut v: Vec<Point> = self.vertices.iter().map(Point::neg).collect();
        v.sort();
        let out = Polytope::from_canonical(self.dim, v, self.affine_dim);
        if let Some(vol) = self.volume.get() {
            let _ = out.volume.set(vol.clone());
        }
        out
    }

    pub fn translate(&self, t: &Point) -> Result<Polytope> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: t.dim() });
        }
        let mut v: Vec<Point> = self.vertices.iter().map(|p| p.add(t)).collect();
        v.sort();
        let out = Polytope::from_canonical(self.dim, v, self.affine_dim);
        if let Some(vol) = self.volume.get() {
            let _ = out.volume.set(vol.clone());
        }
        Ok(out)
    }

    /// Dilation by a nonnegative factor.
    pub fn scale(&self, s: &Scalar) -> Result<Polytope> {
        if s.is_negative() {
            return Err(Error::Precondition("dilation factor must be nonnegative".into()));
        }
        if s.is_zero() {
            return Ok(Polytope::point(Point::origin(self.dim)));
        }
        let mut v: Vec<Point> = self.vertices.iter().map(|p| p.scale(s)).collect();
        v.sort();
        Ok(Polytope::from_canonical(self.dim, v, self.affine_dim))
    }

    /// Integer hull of the vertex set scaled by the common denominator.
    pub(crate) fn lattice_hull(&self, want_facets: bool) -> (IntHull, BigInt) {
        let lat = Lattice::from_points(&self.vertices);
        (int_hull(&lat.points, want_facets), lat.denom)
    }

    /// Edge-like vectors `v - v_0` spanning the direction space of the affine hull.
    pub fn direction_vectors(&self) -> Vec<Point> {
        self.vertices[1..].iter().map(|v| v.sub(&self.vertices[0])).collect()
    }

    /// Translate with the lexicographically smallest vertex at the origin.
    pub fn normalized(&self) -> Polytope {
        if self.vertices[0].is_zero() {
            return self.clone();
        }
        self.translate(&self.vertices[0].neg()).expect("same dimension")
    }

    /// Lexicographically smallest vertex.
    pub fn min_vertex(&self) -> &Point {
        &self.vertices[0]
    }

    /// Center of symmetry, if the vertex set is symmetric about some point.
    pub fn symmetry_center(&self) -> Option<Point> {
        let n = Scalar::from_integer(BigInt::from(self.vertices.len()));
        let sum = self.vertices.iter().skip(1).fold(self.vertices[0].clone(), |acc, v| acc.add(v));
        let c = sum.scale(&(Scalar::one() / n));
        let twice = c.scale(&Scalar::from_integer(BigInt::from(2)));
        let mut mirrored: Vec<Point> = self.vertices.iter().map(|v| twice.sub(v)).collect();
        mirrored.sort();
        (mirrored == self.vertices).then_some(c)
    }

    /// `P = -P` as vertex sets.
    pub fn is_origin_symmetric(&self) -> bool {
        self.reflect() == *self
    }

    /// Symmetric about some center (translation of an origin-symmetric body).
    pub fn is_centrally_symmetric(&self) -> bool {
        self.symmetry_center().is_some()
    }

    /// Whether `p` lies in the polytope.
    pub fn contains(&self, p: &Point) -> Result<bool> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.dim() });
        }
        let mut pts = self.vertices.clone();
        pts.push(p.clone());
        let h = Polytope::from_points(self.dim, &pts)?;
        Ok(h == *self)
    }

    pub fn contains_polytope(&self, other: &Polytope) -> Result<bool> {
        for v in other.vertices() {
            if !self.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn interior_point_is_removed() {
        let p = convex_hull(&[
            Point::from_ints(&[0, 0]),
            Point::from_ints(&[1, 0]),
            Point::from_ints(&[0, 1]),
            Point(vec![ratio(1, 4), ratio(1, 4)]),
        ])
        .unwrap();
        assert_eq!(p.vertices(), &[Point::from_ints(&[0, 0]), Point::from_ints(&[0, 1]), Point::from_ints(&[1, 0])]);
        assert_eq!(p.volume(), ratio(1, 2));
    }

    #[test]
    fn single_point_and_empty_input() {
        let p = convex_hull(&[Point::from_ints(&[3, 4])]).unwrap();
        assert_eq!(p.vertices().len(), 1);
        assert_eq!(p.volume(), int(0));
        assert_eq!(convex_hull(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = convex_hull(&[Point::from_ints(&[0, 0]), Point::from_ints(&[1, 0, 0])]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unit_cube_and_segment_volumes() {
        assert_eq!(cube(3, &int(1)).unwrap().volume(), int(1));
        let seg = segment(&Point::from_ints(&[1, 2])).unwrap();
        assert_eq!(seg.volume(), int(0));
        assert_eq!(seg.affine_dim(), 1);
    }

    #[test]
    fn simplex_volume_in_dimension_six() {
        assert_eq!(simplex(6).unwrap().volume(), ratio(1, 720));
    }

    #[test]
    fn minkowski_sums() {
        let s1 = segment(&Point::unit(2, 0)).unwrap();
        let s2 = segment(&Point::unit(2, 1)).unwrap();
        assert_eq!(s1.minkowski_sum(&s2).unwrap(), cube(2, &int(1)).unwrap());
        let c = cube(3, &int(1)).unwrap();
        let cc = c.minkowski_sum(&c).unwrap();
        assert_eq!(cc, cube(3, &int(2)).unwrap());
        assert_eq!(cc.volume(), int(8));
        let pt = Polytope::point(Point::from_ints(&[1, -1, 2]));
        assert_eq!(c.minkowski_sum(&pt).unwrap(), c.translate(&Point::from_ints(&[1, -1, 2])).unwrap());
        assert!(c.minkowski_sum(&s1).is_err());
    }

    #[test]
    fn maps_and_support() {
        let c = cube(3, &int(1)).unwrap();
        assert_eq!(c.apply_map(&LinearMap::identity(3)).unwrap(), c);
        let minus = c.apply_map(&LinearMap::scalar(3, &int(-1))).unwrap();
        assert_eq!(minus, cube(3, &int(1)).unwrap().translate(&Point::from_ints(&[-1, -1, -1])).unwrap());
        assert_eq!(minus, c.reflect());
        assert_eq!(c.support(&Point::from_ints(&[1, 1, 1])).unwrap(), int(3));
        let u = Point::from_ints(&[2, -1, 3]);
        assert_eq!(c.reflect().support(&u).unwrap(), c.support(&u.neg()).unwrap());
        assert!(c.support(&Point::from_ints(&[1, 1])).is_err());
    }

    #[test]
    fn embedded_triangle_is_flat() {
        let tri = simplex(3).unwrap();
        let tri2 = convex_hull(&tri.vertices()[1..]).unwrap();
        let emb = tri2.apply_map(&LinearMap::block_inclusion(3, 2, 0)).unwrap();
        assert_eq!(emb.dim(), 6);
        assert_eq!(emb.affine_dim(), 2);
        assert_eq!(emb.volume(), int(0));
    }

    #[test]
    fn symmetry_detection() {
        let c = cube(3, &int(1)).unwrap();
        assert!(c.is_centrally_symmetric());
        assert!(!c.is_origin_symmetric());
        assert!(!simplex(2).unwrap().is_centrally_symmetric());
        assert_eq!(c.symmetry_center(), Some(Point(vec![ratio(1, 2); 3])));
    }
}
