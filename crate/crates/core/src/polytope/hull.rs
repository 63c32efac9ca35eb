//! Beneath-beyond convex hull over integer points.
//!
//! Points are inserted one at a time into a placing triangulation. Each
//! boundary simplex carries an outward hyperplane; the simplices created when
//! a point sees a boundary simplex are exactly the cones over visible
//! boundary simplices, so the triangulation volume is accumulated from the
//! hyperplane evaluations without extra determinants. Conflict lists follow
//! Clarkson and Shor.
//!
//! Lower-dimensional inputs are projected onto pivot coordinates of their
//! affine span, which is injective on that span.

use super::ring::{cofactor_normal, dot, rank_and_pivots, Overflow, Ring, RingResult};
use num_bigint::BigInt;
use std::cmp::Ordering;
use std::collections::HashMap;

/// One facet of a full-dimensional hull.
#[derive(Debug, Clone)]
pub(crate) struct IntFacet {
    /// Sum of the unreduced cofactor normals of the boundary simplices of the
    /// facet. Divided by `(d-1)!` this is the area-weighted outward normal.
    pub area_normal: Vec<BigInt>,
}

#[derive(Debug, Clone)]
pub(crate) struct IntHull {
    pub affine_dim: usize,
    /// Coordinates kept by the projection onto the affine span.
    pub pivots: Vec<usize>,
    /// Extreme points in ambient coordinates, sorted.
    pub vertices: Vec<Vec<BigInt>>,
    /// `k! * vol_k` of the projection onto the pivot coordinates.
    pub volume_factorial: BigInt,
    /// Facets in the projected coordinates. Filled only when requested.
    pub facets: Vec<IntFacet>,
}

/// Convex hull of a nonempty set of integer points sharing one dimension.
pub(crate) fn int_hull(points: &[Vec<BigInt>], want_facets: bool) -> IntHull {
    assert!(!points.is_empty(), "int_hull requires at least one point");
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    match run::<i128>(&pts, want_facets) {
        Ok(h) => h,
        Err(Overflow) => run::<BigInt>(&pts, want_facets).expect("BigInt arithmetic cannot overflow"),
    }
}

fn run<R: Ring>(pts: &[Vec<BigInt>], want_facets: bool) -> RingResult<IntHull> {
    let dim = pts[0].len();
    let conv: Vec<Vec<R>> = pts
        .iter()
        .map(|p| p.iter().map(R::from_bigint).collect::<RingResult<Vec<R>>>())
        .collect::<RingResult<_>>()?;

    // Affine span.
    let diffs: Vec<Vec<R>> = conv[1..]
        .iter()
        .map(|p| p.iter().zip(&conv[0]).map(|(a, b)| a.sub(b)).collect::<RingResult<Vec<R>>>())
        .collect::<RingResult<_>>()?;
    let (k, pivots) = if diffs.is_empty() { (0, vec![]) } else { rank_and_pivots(diffs, dim)? };

    if k == 0 {
        return Ok(IntHull {
            affine_dim: 0,
            pivots,
            vertices: vec![pts[0].clone()],
            volume_factorial: BigInt::from(1),
            facets: vec![],
        });
    }

    let proj: Vec<Vec<R>> = conv.iter().map(|p| pivots.iter().map(|&c| p[c].clone()).collect()).collect();

    if k == 1 {
        let (lo, hi) = proj
            .iter()
            .enumerate()
            .fold((0, 0), |(lo, hi), (i, p)| (if p[0] < proj[lo][0] { i } else { lo }, if p[0] > proj[hi][0] { i } else { hi }));
        let mut vertices = vec![pts[lo].clone(), pts[hi].clone()];
        vertices.sort();
        let len = proj[hi][0].sub(&proj[lo][0])?.to_bigint();
        let facets = if want_facets && dim == 1 {
            vec![
                IntFacet { area_normal: vec![BigInt::from(-1)] },
                IntFacet { area_normal: vec![BigInt::from(1)] },
            ]
        } else {
            vec![]
        };
        return Ok(IntHull { affine_dim: 1, pivots, vertices, volume_factorial: len, facets });
    }

    let tri = Triangulation::build(&proj, k)?;
    let (vertex_ids, facets) = tri.extract(k, want_facets && k == dim)?;
    let mut vertices: Vec<Vec<BigInt>> = vertex_ids.into_iter().map(|i| pts[i].clone()).collect();
    vertices.sort();
    Ok(IntHull { affine_dim: k, pivots, vertices, volume_factorial: tri.volume.to_bigint(), facets })
}

struct Facet<R> {
    verts: Vec<u32>,
    normal: Vec<R>,
    offset: R,
    /// Positive factor with `cofactor normal = scale * normal`.
    scale: R,
    neighbors: Vec<usize>,
    alive: bool,
    conflicts: Vec<u32>,
}

struct Triangulation<R> {
    facets: Vec<Facet<R>>,
    volume: R,
}

impl<R: Ring> Triangulation<R> {
    fn build(pts: &[Vec<R>], k: usize) -> RingResult<Self> {
        let n = pts.len();
        let simplex = initial_simplex(pts, k)?;

        // Strictly interior reference point, scaled by k + 1.
        let mut interior = vec![R::zero(); k];
        for &i in &simplex {
            for (c, x) in interior.iter_mut().zip(&pts[i]) {
                *c = c.add(x)?;
            }
        }
        let kp1 = {
            let mut v = R::zero();
            for _ in 0..=k {
                v = v.add(&R::one())?;
            }
            v
        };

        let mut tri = Triangulation { facets: Vec::new(), volume: R::zero() };
        for skip in 0..=k {
            let verts: Vec<u32> = simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v as u32).collect();
            let neighbors: Vec<usize> = (0..=k).filter(|&j| j != skip).collect();
            let f = make_facet(pts, verts, neighbors, &interior, &kp1)?;
            tri.facets.push(f);
        }
        {
            let f0 = &tri.facets[0];
            let p = &pts[simplex[0]];
            let gap = f0.offset.sub(&dot(&f0.normal, p)?)?;
            tri.volume = f0.scale.mul(&gap)?;
        }

        let in_simplex: Vec<bool> = {
            let mut v = vec![false; n];
            for &i in &simplex {
                v[i] = true;
            }
            v
        };
        let order: Vec<usize> = insertion_order(n).into_iter().filter(|&i| !in_simplex[i]).collect();

        let mut point_conflicts: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &q in &order {
            for (fi, f) in tri.facets.iter_mut().enumerate() {
                if dot(&f.normal, &pts[q])? > f.offset {
                    f.conflicts.push(q as u32);
                    point_conflicts[q].push(fi);
                }
            }
        }

        let mut processed = vec![false; n];
        for &i in &simplex {
            processed[i] = true;
        }
        let mut visible_mark: Vec<bool> = Vec::new();
        let mut stamp_of_point: Vec<u32> = vec![0; n];
        let mut stamp: u32 = 0;

        for &p in &order {
            processed[p] = true;
            let visible: Vec<usize> = std::mem::take(&mut point_conflicts[p]).into_iter().filter(|&f| tri.facets[f].alive).collect();
            if visible.is_empty() {
                continue;
            }
            visible_mark.resize(tri.facets.len(), false);
            for &f in &visible {
                visible_mark[f] = true;
            }
            for &f in &visible {
                let fac = &tri.facets[f];
                let h = dot(&fac.normal, &pts[p])?.sub(&fac.offset)?;
                tri.volume = tri.volume.add(&fac.scale.mul(&h)?)?;
            }

            let mut ridge_map: HashMap<Vec<u32>, (usize, usize)> = HashMap::new();
            for &f in &visible {
                for i in 0..k {
                    let nb = tri.facets[f].neighbors[i];
                    if visible_mark.get(nb).copied().unwrap_or(false) {
                        continue;
                    }
                    let mut verts = tri.facets[f].verts.clone();
                    verts[i] = p as u32;
                    let mut neighbors = vec![usize::MAX; k];
                    neighbors[i] = nb;
                    let g = make_facet(pts, verts, neighbors, &interior, &kp1)?;
                    let gid = tri.facets.len();
                    tri.facets.push(g);
                    if let Some(slot) = tri.facets[nb].neighbors.iter_mut().find(|x| **x == f) {
                        *slot = gid;
                    }

                    // Conflicts of the new facet come from the two facets on its horizon ridge.
                    stamp += 1;
                    let mut cands: Vec<u32> = Vec::new();
                    for src in [f, nb] {
                        for &q in &tri.facets[src].conflicts {
                            let qi = q as usize;
                            if !processed[qi] && stamp_of_point[qi] != stamp {
                                stamp_of_point[qi] = stamp;
                                cands.push(q);
                            }
                        }
                    }
                    let mut conf = Vec::new();
                    {
                        let g = &tri.facets[gid];
                        for q in cands {
                            if dot(&g.normal, &pts[q as usize])? > g.offset {
                                conf.push(q);
                            }
                        }
                    }
                    for &q in &conf {
                        point_conflicts[q as usize].push(gid);
                    }
                    tri.facets[gid].conflicts = conf;

                    // Pair up new facets across ridges that contain p.
                    for j in 0..k {
                        if j == i {
                            continue;
                        }
                        let mut key: Vec<u32> = tri.facets[gid].verts.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &v)| v).collect();
                        key.sort_unstable();
                        match ridge_map.remove(&key) {
                            Some((other, oj)) => {
                                tri.facets[gid].neighbors[j] = other;
                                tri.facets[other].neighbors[oj] = gid;
                            }
                            None => {
                                ridge_map.insert(key, (gid, j));
                            }
                        }
                    }
                }
            }
            debug_assert!(ridge_map.is_empty(), "unpaired ridges in horizon");
            for &f in &visible {
                let fac = &mut tri.facets[f];
                fac.alive = false;
                fac.conflicts = Vec::new();
            }
            for &f in &visible {
                visible_mark[f] = false;
            }
        }
        Ok(tri)
    }

    /// Vertex indices and (optionally) grouped facets of the final hull.
    fn extract(&self, k: usize, want_facets: bool) -> RingResult<(Vec<usize>, Vec<IntFacet>)> {
        let mut planes: HashMap<(Vec<R>, R), usize> = HashMap::new();
        let mut plane_list: Vec<(Vec<R>, R, Vec<R>)> = Vec::new();
        let mut point_planes: HashMap<u32, Vec<usize>> = HashMap::new();
        for f in self.facets.iter().filter(|f| f.alive) {
            let key = (f.normal.clone(), f.offset.clone());
            let id = match planes.get(&key) {
                Some(&id) => id,
                None => {
                    let id = plane_list.len();
                    planes.insert(key, id);
                    plane_list.push((f.normal.clone(), f.offset.clone(), vec![R::zero(); k]));
                    id
                }
            };
            if want_facets {
                let acc = &mut plane_list[id].2;
                for (a, x) in acc.iter_mut().zip(&f.normal) {
                    *a = a.add(&x.mul(&f.scale)?)?;
                }
            }
            for &v in &f.verts {
                let e = point_planes.entry(v).or_default();
                if !e.contains(&id) {
                    e.push(id);
                }
            }
        }
        let mut vertices = Vec::new();
        for (&v, ids) in &point_planes {
            if ids.len() < k {
                continue;
            }
            let m: Vec<Vec<R>> = ids.iter().map(|&id| plane_list[id].0.clone()).collect();
            // Products of large normals can overflow even when the hull itself fits.
            let r = match rank_and_pivots(m.clone(), k) {
                Ok((r, _)) => r,
                Err(Overflow) => {
                    let big: Vec<Vec<BigInt>> = m.iter().map(|row| row.iter().map(R::to_bigint).collect()).collect();
                    rank_and_pivots(big, k).expect("BigInt arithmetic cannot overflow").0
                }
            };
            if r == k {
                vertices.push(v as usize);
            }
        }
        let facets = if want_facets {
            plane_list
                .into_iter()
                .map(|(_, _, a)| IntFacet { area_normal: a.iter().map(R::to_bigint).collect() })
                .collect()
        } else {
            vec![]
        };
        Ok((vertices, facets))
    }
}

fn make_facet<R: Ring>(pts: &[Vec<R>], verts: Vec<u32>, neighbors: Vec<usize>, interior: &[R], kp1: &R) -> RingResult<Facet<R>> {
    let refs: Vec<&[R]> = verts.iter().map(|&v| pts[v as usize].as_slice()).collect();
    let mut normal = cofactor_normal(&refs)?;
    let mut g = R::zero();
    for x in &normal {
        g = g.gcd(x);
    }
    debug_assert!(!g.is_zero(), "degenerate boundary simplex");
    for x in normal.iter_mut() {
        *x = x.div_exact(&g);
    }
    let mut scale = if g.sign() == Ordering::Less { g.neg() } else { g };
    let mut offset = dot(&normal, refs[0])?;
    // Outward: the interior point lies strictly below.
    let lhs = dot(&normal, interior)?;
    let rhs = offset.mul(kp1)?;
    if lhs > rhs {
        for x in normal.iter_mut() {
            *x = x.neg();
        }
        offset = offset.neg();
    }
    if scale.is_zero() {
        scale = R::one();
    }
    Ok(Facet { verts, normal, offset, scale, neighbors, alive: true, conflicts: Vec::new() })
}

fn initial_simplex<R: Ring>(pts: &[Vec<R>], k: usize) -> RingResult<Vec<usize>> {
    let mut chosen = vec![0usize];
    let mut rows: Vec<Vec<R>> = Vec::new();
    for (i, p) in pts.iter().enumerate().skip(1) {
        if chosen.len() == k + 1 {
            break;
        }
        let d: Vec<R> = p.iter().zip(&pts[0]).map(|(a, b)| a.sub(b)).collect::<RingResult<_>>()?;
        let mut trial = rows.clone();
        trial.push(d.clone());
        let (r, _) = rank_and_pivots(trial, k)?;
        if r == rows.len() + 1 {
            rows.push(d);
            chosen.push(i);
        }
    }
    assert_eq!(chosen.len(), k + 1, "affine rank mismatch");
    Ok(chosen)
}

/// Deterministic pseudo-random insertion order.
fn insertion_order(n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    for i in (1..n).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let j = (state % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}
