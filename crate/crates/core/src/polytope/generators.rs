use super::{convex_hull, Point, Polytope};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `[0, side]^d`.
pub fn cube(d: usize, side: &Scalar) -> Result<Polytope> {
    if d == 0 {
        return Err(Error::InvalidSize("cube dimension must be positive".into()));
    }
    if !side.is_positive() {
        return Err(Error::InvalidSize("cube side must be positive".into()));
    }
    let gens: Vec<Point> = (0..d).map(|i| Point::unit(d, i).scale(side)).collect();
    zonotope(&gens)
}

/// `conv{0, e_1, ..., e_d}`.
pub fn simplex(d: usize) -> Result<Polytope> {
    if d == 0 {
        return Err(Error::InvalidSize("simplex dimension must be positive".into()));
    }
    let mut pts = vec![Point::origin(d)];
    pts.extend((0..d).map(|i| Point::unit(d, i)));
    convex_hull(&pts)
}

/// `[0, v]`.
pub fn segment(v: &Point) -> Result<Polytope> {
    if v.dim() == 0 {
        return Err(Error::InvalidSize("segment needs a positive dimension".into()));
    }
    convex_hull(&[Point::origin(v.dim()), v.clone()])
}

/// `[0, g_1] + ... + [0, g_m]`.
pub fn zonotope(gens: &[Point]) -> Result<Polytope> {
    let first = gens.first().ok_or(Error::EmptyInput)?;
    let d = first.dim();
    let mut acc = Polytope::point(Point::origin(d));
    for g in gens {
        acc = acc.minkowski_sum(&segment(g)?)?;
    }
    Ok(acc)
}

/// `[-g_1, g_1] + ... + [-g_m, g_m]`, symmetric about the origin.
pub fn centered_zonotope(gens: &[Point]) -> Result<Polytope> {
    let first = gens.first().ok_or(Error::EmptyInput)?;
    let d = first.dim();
    let mut acc = Polytope::point(Point::origin(d));
    for g in gens {
        acc = acc.minkowski_sum(&convex_hull(&[g.neg(), g.clone()])?)?;
    }
    Ok(acc)
}

/// Rational in `[-bound, bound]` with denominator at most 4.
pub fn random_scalar<R: Rng>(rng: &mut R, bound: &Scalar) -> Scalar {
    let q: i64 = rng.gen_range(1..=4);
    let hi = (bound * Scalar::from_integer(BigInt::from(q))).floor().to_integer().to_i64().unwrap_or(i64::MAX / 8);
    let p = rng.gen_range(-hi..=hi);
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize, bound: &Scalar) -> Point {
    Point((0..d).map(|_| random_scalar(rng, bound)).collect())
}

/// Nonzero random point.
pub fn random_nonzero_point<R: Rng>(rng: &mut R, d: usize, bound: &Scalar) -> Point {
    loop {
        let p = random_point(rng, d, bound);
        if !p.is_zero() {
            return p;
        }
    }
}

fn check_sizes(d: usize, nverts: usize, bound: &Scalar) -> Result<()> {
    if d == 0 || d > 8 {
        return Err(Error::InvalidSize(format!("dimension {d} outside 1..=8")));
    }
    if nverts == 0 {
        return Err(Error::InvalidSize("need at least one vertex".into()));
    }
    if bound < &Scalar::one() {
        return Err(Error::InvalidSize("coordinate bound must be at least 1".into()));
    }
    Ok(())
}

/// Hull of `nverts` seeded random rational points in `[-bound, bound]^d`.
pub fn random_polytope(seed: u64, d: usize, nverts: usize, bound: &Scalar) -> Result<Polytope> {
    check_sizes(d, nverts, bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..nverts).map(|_| random_point(&mut rng, d, bound)).collect();
    convex_hull(&pts)
}

/// Hull of `{±p_1, ..., ±p_m}` for `m = nverts` seeded random points.
pub fn random_centrally_symmetric(seed: u64, d: usize, nverts: usize) -> Result<Polytope> {
    let bound = Scalar::from_integer(BigInt::from(4));
    check_sizes(d, nverts, &bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(2 * nverts);
    for _ in 0..nverts {
        let p = random_point(&mut rng, d, &bound);
        pts.push(p.neg());
        pts.push(p);
    }
    convex_hull(&pts)
}
