//! Classical mixed volumes, mixed area measures, mixed projection bodies and
//! Klain values of mixed-volume valuations.
//!
//! Segment arguments are first removed with the exact identity
//! `n V([0,v], K_2, ..., K_n) = |v_j| V'(pi K_2, ..., pi K_n)`, where `pi`
//! projects along `v` onto the coordinate hyperplane `x_j = 0`. The remaining
//! tuple is expanded over the facet normals of a partial Minkowski sum, which
//! needs one hull per level instead of one per subset. Polarization over
//! subset sums, with repeated arguments grouped into multiplicities, is kept
//! as a second route and for mixed area measures.

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{centered_zonotope, segment, LinearMap, Point, Polytope};
use crate::scalar::{binomial, common_denominator, exact_sqrt, factorial, to_f64, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Mixed volume `V(K_1, ..., K_n)` of `n` polytopes in `R^n`.
pub fn mixed_volume(bodies: &[Polytope]) -> Result<Scalar> {
    let n = bodies.first().ok_or(Error::EmptyInput)?.dim();
    check_dims(bodies, n)?;
    if bodies.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: bodies.len() });
    }
    Ok(mv_core(bodies.iter().map(Polytope::normalized).collect()))
}

/// Mixed volume with repeated arguments, `V(K_1[m_1], ..., K_r[m_r])`.
pub fn mixed_volume_repeated(groups: &[(&Polytope, usize)]) -> Result<Scalar> {
    let bodies: Vec<Polytope> = groups.iter().flat_map(|(k, m)| std::iter::repeat_n((*k).clone(), *m)).collect();
    mixed_volume(&bodies)
}

fn check_dims(bodies: &[Polytope], n: usize) -> Result<()> {
    match bodies.iter().find(|b| b.dim() != n) {
        Some(b) => Err(Error::DimensionMismatch { expected: n, found: b.dim() }),
        None => Ok(()),
    }
}

/// Projection `x -> x - (x_j / v_j) v` followed by dropping coordinate `j`.
fn projection_along(v: &Point, j: usize) -> LinearMap {
    let n = v.dim();
    let rows = (0..n)
        .filter(|&r| r != j)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let e = if c == r { Scalar::one() } else { Scalar::zero() };
                    if c == j {
                        e - &v.0[r] / &v.0[j]
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    LinearMap::new(rows, n).expect("consistent shape")
}

/// Same value as [`mixed_volume`], computed only by polarization over subset
/// sums (after segment reduction). Kept as an independent route.
pub fn mixed_volume_by_polarization(bodies: &[Polytope]) -> Result<Scalar> {
    let n = bodies.first().ok_or(Error::EmptyInput)?.dim();
    check_dims(bodies, n)?;
    if bodies.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: bodies.len() });
    }
    Ok(mv_recursive(bodies.iter().map(Polytope::normalized).collect(), Route::Polarization))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Route {
    Faces,
    Polarization,
}

fn mv_core(bodies: Vec<Polytope>) -> Scalar {
    mv_recursive(bodies, Route::Faces)
}

/// Bodies are translated so their smallest vertex is the origin.
fn mv_recursive(bodies: Vec<Polytope>, route: Route) -> Scalar {
    let n = bodies.len();
    if n == 0 {
        return Scalar::one();
    }
    if bodies.iter().any(|b| b.affine_dim() == 0) {
        return Scalar::zero();
    }
    if let Some(i) = bodies.iter().position(|b| b.affine_dim() == 1) {
        let mut rest = bodies;
        let seg = rest.remove(i);
        let v = seg.vertices()[1].clone();
        let j = v.0.iter().position(|x| !x.is_zero()).expect("nonzero segment");
        let factor = v.0[j].abs() / Scalar::from_integer(BigInt::from(n));
        if n == 1 {
            return factor;
        }
        let map = projection_along(&v, j);
        let projected = rest.iter().map(|b| b.apply_map(&map).expect("matching dimension").normalized()).collect();
        return factor * mv_recursive(projected, route);
    }
    let dirs: Vec<Point> = bodies.iter().flat_map(Polytope::direction_vectors).collect();
    if linalg::rank(&dirs) < n {
        return Scalar::zero();
    }
    match route {
        Route::Faces => mv_by_faces(bodies),
        Route::Polarization => mv_by_polarization(bodies),
    }
}

fn mv_by_polarization(bodies: Vec<Polytope>) -> Scalar {
    let n = bodies.len();
    let groups = group_bodies(bodies);
    let mut acc = Scalar::zero();
    polarize(&groups, |coef, sum| {
        if sum.is_full_dimensional() {
            acc += Scalar::from_integer(coef.clone()) * sum.volume();
        }
    });
    acc / Scalar::from_integer(factorial(n))
}

/// `V(K_1, ..., K_n) = (1/n) sum_u h(K_n, u) v(F(K_1, u), ..., F(K_{n-1}, u))`
/// over the facet normals `u` of `K_1 + ... + K_{n-1}`. With a primitive
/// integer normal `p` and the face volumes measured after dropping a
/// coordinate `j` with `p_j != 0`, each term is `h(K_n, p) v' / |p_j|`.
fn mv_by_faces(mut bodies: Vec<Polytope>) -> Scalar {
    let n = bodies.len();
    let last_idx = (0..n).max_by_key(|&i| bodies[i].vertices().len()).expect("nonempty");
    let last = bodies.swap_remove(last_idx);
    let sum = Polytope::sum_all(&bodies).expect("matching dimension");
    let normals: Vec<Point> = if sum.affine_dim() == n {
        let (h, _) = sum.lattice_hull(true);
        h.facets.iter().map(|f| primitive(&f.area_normal)).collect()
    } else if sum.affine_dim() + 1 == n {
        let p = &linalg::null_space(&sum.direction_vectors(), n)[0];
        vec![p.clone(), p.neg()]
    } else {
        return Scalar::zero();
    };
    let mut acc = Scalar::zero();
    for p in &normals {
        let j = (0..n).max_by_key(|&c| p.0[c].abs()).expect("nonzero normal");
        let faces: Vec<Polytope> = bodies.iter().map(|b| face_projection(b, p, j)).collect();
        let v = mv_recursive(faces, Route::Faces);
        if v.is_zero() {
            continue;
        }
        acc += last.support(p).expect("matching dimension") * v / p.0[j].abs();
    }
    acc / Scalar::from_integer(BigInt::from(n))
}

fn primitive(v: &[BigInt]) -> Point {
    let g = v.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    Point(v.iter().map(|x| Scalar::from_integer(x / &g)).collect())
}

/// Face of `b` maximizing `<p, .>`, with coordinate `j` dropped and the
/// smallest vertex moved to the origin.
fn face_projection(b: &Polytope, p: &Point, j: usize) -> Polytope {
    let vals: Vec<Scalar> = b.vertices().iter().map(|v| v.dot(p)).collect();
    let max = vals.iter().max().expect("nonempty").clone();
    let pts: Vec<Point> = b
        .vertices()
        .iter()
        .zip(&vals)
        .filter(|(_, x)| **x == max)
        .map(|(v, _)| Point(v.0.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()))
        .collect();
    Polytope::from_points(b.dim() - 1, &pts).expect("nonempty face").normalized()
}

fn group_bodies(bodies: Vec<Polytope>) -> Vec<(Polytope, usize)> {
    let mut groups: Vec<(Polytope, usize)> = Vec::new();
    for b in bodies {
        match groups.iter_mut().find(|(g, _)| *g == b) {
            Some((_, m)) => *m += 1,
            None => groups.push((b, 1)),
        }
    }
    groups
}

/// Calls `visit(coef, sum)` for every nonzero multiplicity vector `c <= m`
/// with `coef = prod binom(m_j, c_j) * (-1)^(N - |c|)` and
/// `sum = c_1 K_1 + ... + c_r K_r`.
fn polarize(groups: &[(Polytope, usize)], mut visit: impl FnMut(&BigInt, &Polytope)) {
    let r = groups.len();
    let total: usize = groups.iter().map(|g| g.1).sum();
    let radix: Vec<usize> = groups.iter().map(|g| g.1 + 1).collect();
    let count: usize = radix.iter().product();
    let dim = groups[0].0.dim();
    let mut sums: Vec<Option<Polytope>> = vec![None; count];
    sums[0] = Some(Polytope::point(Point::origin(dim)));
    let mut digits = vec![0usize; r];
    for idx in 1..count {
        // Increment the mixed-radix counter.
        for d in digits.iter_mut().zip(&radix) {
            *d.0 += 1;
            if *d.0 < *d.1 {
                break;
            }
            *d.0 = 0;
        }
        let t = digits.iter().position(|&c| c > 0).expect("nonzero index");
        let stride: usize = radix[..t].iter().product();
        let prev = sums[idx - stride].as_ref().expect("computed earlier");
        let sum = prev.minkowski_sum(&groups[t].0).expect("matching dimension");
        let size: usize = digits.iter().sum();
        let mut coef = BigInt::one();
        for (c, g) in digits.iter().zip(groups) {
            coef *= binomial(g.1, *c);
        }
        if (total - size) % 2 == 1 {
            coef = -coef;
        }
        visit(&coef, &sum);
        sums[idx] = Some(sum);
    }
}

/// One atom of a discrete measure on the sphere: weight `c |v|` at the unit
/// direction `v / |v|`, with `v` a primitive integer vector. The weighted
/// normal `c v` is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereAtom {
    direction: Vec<BigInt>,
    norm_squared: BigInt,
    coefficient: Scalar,
}

impl SphereAtom {
    /// Primitive integer direction `v`.
    pub fn direction(&self) -> &[BigInt] {
        &self.direction
    }

    pub fn direction_point(&self) -> Point {
        Point(self.direction.iter().map(|x| Scalar::from_integer(x.clone())).collect())
    }

    /// `|v|^2`.
    pub fn norm_squared(&self) -> &BigInt {
        &self.norm_squared
    }

    /// `c` with weight `= c |v|`.
    pub fn coefficient(&self) -> &Scalar {
        &self.coefficient
    }

    /// Weight times unit direction, `c v`.
    pub fn weighted_normal(&self) -> Point {
        self.direction_point().scale(&self.coefficient)
    }

    /// Exact squared weight `c^2 |v|^2`.
    pub fn weight_squared(&self) -> Scalar {
        &self.coefficient * &self.coefficient * Scalar::from_integer(self.norm_squared.clone())
    }

    pub fn weight(&self) -> f64 {
        to_f64(&self.coefficient) * to_f64(&Scalar::from_integer(self.norm_squared.clone())).sqrt()
    }

    pub fn unit_direction(&self) -> Vec<f64> {
        let len = to_f64(&Scalar::from_integer(self.norm_squared.clone())).sqrt();
        self.direction.iter().map(|x| to_f64(&Scalar::from_integer(x.clone())) / len).collect()
    }
}

/// Finite atomic measure on `S^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteSphereMeasure {
    dim: usize,
    atoms: Vec<SphereAtom>,
}

/// Accumulates weighted normals keyed by primitive direction.
struct MeasureBuilder {
    dim: usize,
    map: BTreeMap<Vec<BigInt>, Scalar>,
}

impl MeasureBuilder {
    fn new(dim: usize) -> Self {
        MeasureBuilder { dim, map: BTreeMap::new() }
    }

    /// Adds `scale * w` where `w` is a weighted normal.
    fn add(&mut self, w: &Point, scale: &Scalar) {
        if w.is_zero() || scale.is_zero() {
            return;
        }
        let den = common_denominator(w.0.iter());
        let ints: Vec<BigInt> = w.0.iter().map(|x| (x * Scalar::from_integer(den.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
        let v: Vec<BigInt> = ints.iter().map(|x| x / &g).collect();
        let c = Scalar::new(g, den) * scale;
        *self.map.entry(v).or_insert_with(Scalar::zero) += c;
    }

    fn finish(self) -> DiscreteSphereMeasure {
        let atoms = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| {
                let norm_squared = v.iter().map(|x| x * x).sum();
                SphereAtom { direction: v, norm_squared, coefficient: c }
            })
            .collect();
        DiscreteSphereMeasure { dim: self.dim, atoms }
    }
}

impl DiscreteSphereMeasure {
    pub fn zero(dim: usize) -> Self {
        DiscreteSphereMeasure { dim, atoms: Vec::new() }
    }

    /// Measure with weighted normals `w_k` (parallel ones are merged).
    pub fn from_weighted_normals(dim: usize, normals: &[Point]) -> Result<Self> {
        let mut b = MeasureBuilder::new(dim);
        for w in normals {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: w.dim() });
            }
            b.add(w, &Scalar::one());
        }
        Ok(b.finish())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[SphereAtom] {
        &self.atoms
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| !a.coefficient.is_negative())
    }

    /// `sum_k weight_k u_k`.
    pub fn total_weighted_normal(&self) -> Point {
        self.atoms.iter().fold(Point::origin(self.dim), |acc, a| acc.add(&a.weighted_normal()))
    }

    /// `int h_P dS`, exact since `weight * h_P(v/|v|) = c h_P(v)`.
    pub fn integrate_support(&self, p: &Polytope) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for a in &self.atoms {
            acc += &a.coefficient * p.support(&a.direction_point())?;
        }
        Ok(acc)
    }

    /// `int f dS` for a function of the unit direction.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight() * f(&a.unit_direction())).sum()
    }

    /// Pushforward under `u -> -u`.
    pub fn reflect(&self) -> Self {
        let mut b = MeasureBuilder::new(self.dim);
        for a in &self.atoms {
            b.add(&a.weighted_normal().neg(), &Scalar::one());
        }
        b.finish()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut b = MeasureBuilder::new(self.dim);
        for a in self.atoms.iter().chain(&other.atoms) {
            b.add(&a.weighted_normal(), &Scalar::one());
        }
        Ok(b.finish())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut b = MeasureBuilder::new(self.dim);
        for a in &self.atoms {
            b.add(&a.weighted_normal(), s);
        }
        b.finish()
    }

    /// `(1/2) int |<u, v>| dS(v)`, the support function of the associated
    /// projection body at `u`.
    pub fn projection_support(&self, u: &Point) -> Result<Scalar> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.dim() });
        }
        let s: Scalar = self.atoms.iter().map(|a| a.weighted_normal().dot(u).abs()).sum();
        Ok(s / Scalar::from_integer(BigInt::from(2)))
    }
}

/// Surface area measure `S_{n-1}(P)`.
///
/// For a full-dimensional `P` there is one atom per facet. For a body of
/// dimension `n-1` the result is the two-sided measure with mass
/// `vol_{n-1}(P)` at both unit normals of its hyperplane. Bodies of lower
/// dimension have zero surface area measure.
pub fn surface_area_measure(p: &Polytope) -> DiscreteSphereMeasure {
    let mut b = MeasureBuilder::new(p.dim());
    add_surface_area(&mut b, p, &Scalar::one());
    b.finish()
}

fn add_surface_area(b: &mut MeasureBuilder, p: &Polytope, scale: &Scalar) {
    let n = p.dim();
    let k = p.affine_dim();
    if k == n {
        let (h, d) = p.lattice_hull(true);
        let denom = Scalar::from_integer(factorial(n - 1) * d.pow(n as u32 - 1));
        for f in &h.facets {
            let w = Point(f.area_normal.iter().map(|x| Scalar::from_integer(x.clone()) / &denom).collect());
            b.add(&w, scale);
        }
    } else if k + 1 == n {
        let normal = &linalg::null_space(&p.direction_vectors(), n)[0];
        if n == 1 {
            b.add(normal, scale);
            b.add(&normal.neg(), scale);
            return;
        }
        let (h, d) = p.lattice_hull(false);
        let j = (0..n).find(|c| !h.pivots.contains(c)).expect("one coordinate is not a pivot");
        let proj_vol = Scalar::new(h.volume_factorial.clone(), factorial(n - 1) * d.pow(n as u32 - 1));
        // vol_{n-1}(P) = proj_vol |p| / |p_j|, so the weighted normal is (proj_vol / |p_j|) p.
        let w = normal.scale(&(proj_vol / normal.0[j].abs()));
        b.add(&w, scale);
        b.add(&w.neg(), scale);
    }
}

/// Mixed area measure `S(K_1, ..., K_{n-1})` by polarization of `S_{n-1}`.
pub fn mixed_area_measure(bodies: &[Polytope]) -> Result<DiscreteSphereMeasure> {
    let first = bodies.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    check_dims(bodies, n)?;
    if bodies.len() + 1 != n {
        return Err(Error::LengthMismatch { expected: n - 1, found: bodies.len() });
    }
    let groups = group_bodies(bodies.iter().map(Polytope::normalized).collect());
    let mut b = MeasureBuilder::new(n);
    let norm = Scalar::one() / Scalar::from_integer(factorial(n - 1));
    polarize(&groups, |coef, sum| {
        add_surface_area(&mut b, sum, &(Scalar::from_integer(coef.clone()) * &norm));
    });
    let m = b.finish();
    debug_assert!(m.is_nonnegative(), "mixed area measure must be nonnegative");
    Ok(m)
}

/// Mixed projection body `Pi(K_1, ..., K_{n-1})`, the zonotope
/// `sum_k (1/2)[-w_k, w_k]` over the weighted normals of the mixed area measure.
pub fn projection_body(bodies: &[Polytope]) -> Result<Polytope> {
    let m = mixed_area_measure(bodies)?;
    projection_body_of_measure(&m)
}

pub fn projection_body_of_measure(m: &DiscreteSphereMeasure) -> Result<Polytope> {
    // Antipodal atoms give the same segment; merge them before summing.
    let half = Scalar::new(BigInt::one(), BigInt::from(2));
    let mut merged: BTreeMap<Vec<BigInt>, Scalar> = BTreeMap::new();
    for a in m.atoms() {
        let neg = a.direction.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
        let key: Vec<BigInt> = if neg { a.direction.iter().map(|x| -x).collect() } else { a.direction.clone() };
        *merged.entry(key).or_insert_with(Scalar::zero) += &a.coefficient * &half;
    }
    let gens: Vec<Point> = merged
        .into_iter()
        .map(|(v, c)| Point(v.into_iter().map(|x| Scalar::from_integer(x) * &c).collect()))
        .collect();
    if gens.is_empty() {
        return Ok(Polytope::point(Point::origin(m.dim())));
    }
    centered_zonotope(&gens)
}

/// Klain value of `phi(A) = V(A[k], C_1, ..., C_{n-k})` on the span of a basis.
///
/// The value is `k! V([0,b_1], ..., [0,b_k], C_1, ..., C_{n-k}) / sqrt(G)` with
/// `G` the Gram determinant of the basis. It is stored as the exact pair
/// (numerator, `G`) since the square root is usually irrational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KlainValue {
    pub basis: Vec<Point>,
    pub numerator: Scalar,
    pub gram_determinant: Scalar,
}

impl KlainValue {
    pub fn value(&self) -> f64 {
        to_f64(&self.numerator) / to_f64(&self.gram_determinant).sqrt()
    }

    /// Exact value when the Gram determinant is a rational square.
    pub fn exact_value(&self) -> Option<Scalar> {
        exact_sqrt(&self.gram_determinant).map(|s| &self.numerator / s)
    }

    /// Exact squared value.
    pub fn value_squared(&self) -> Scalar {
        &self.numerator * &self.numerator / &self.gram_determinant
    }
}

pub fn klain(phi_bodies: &[Polytope], basis: &[Point]) -> Result<KlainValue> {
    let n = basis.first().map(Point::dim).or_else(|| phi_bodies.first().map(Polytope::dim)).ok_or(Error::EmptyInput)?;
    check_dims(phi_bodies, n)?;
    if let Some(b) = basis.iter().find(|b| b.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
    }
    let k = basis.len();
    if k + phi_bodies.len() != n {
        return Err(Error::LengthMismatch { expected: n - k, found: phi_bodies.len() });
    }
    if linalg::rank(basis) < k {
        return Err(Error::DependentBasis);
    }
    let mut bodies: Vec<Polytope> = basis.iter().map(segment).collect::<Result<_>>()?;
    bodies.extend(phi_bodies.iter().cloned());
    let v = mixed_volume(&bodies)?;
    Ok(KlainValue {
        basis: basis.to_vec(),
        numerator: Scalar::from_integer(factorial(k)) * v,
        gram_determinant: linalg::gram_determinant(basis),
    })
}
