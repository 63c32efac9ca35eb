//! Band-limited functions on the 2-sphere, the operator
//! `Df = D(f, h_C)` built from spherical Hessians, and the quadrature forms
//! behind Aleksandrov's theorem for `n = 3`.
//!
//! Harmonics are carried as homogeneous harmonic polynomials `P` of degree
//! `l`. The 1-homogeneous extension `|x|^{1-l} P(x)` has tangential Hessian
//! `(1 - l) P(u) g + (Hess P)(u)|_T` on the unit sphere, which equals
//! `grad^2 f + f g`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Symmetric 2x2 matrix `[[a, b], [b, c]]` stored as `[a, b, c]`.
pub type Sym2 = [f64; 3];

/// Complex symmetric 2x2 matrix.
pub type CSym2 = [Complex64; 3];

pub const DEFAULT_BAND: usize = 8;

/// Extra quadrature degree on top of `3L`, so that integrands involving
/// non-polynomial support functions are resolved.
pub const EXTRA_EXACTNESS: usize = 48;

/// `D(M_1, M_2) = (tr M_1 tr M_2 - tr(M_1 M_2)) / 2`.
pub fn mixed_discriminant(m1: &CSym2, m2: &CSym2) -> Complex64 {
    let tr1 = m1[0] + m1[2];
    let tr2 = m2[0] + m2[2];
    let tr12 = m1[0] * m2[0] + 2.0 * m1[1] * m2[1] + m1[2] * m2[2];
    (tr1 * tr2 - tr12) * 0.5
}

fn real_mixed_discriminant(m1: &Sym2, m2: &Sym2) -> f64 {
    0.5 * ((m1[0] + m1[2]) * (m2[0] + m2[2]) - (m1[0] * m2[0] + 2.0 * m1[1] * m2[1] + m1[2] * m2[2]))
}

fn complexify(m: &Sym2) -> CSym2 {
    [m[0].into(), m[1].into(), m[2].into()]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Gauss-Legendre in `cos(theta)` times uniform longitude.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    frames: Vec<[[f64; 3]; 2]>,
    exactness: usize,
}

impl QuadratureGrid {
    /// Integrates polynomials of degree `<= exactness` exactly.
    pub fn new(exactness: usize) -> Self {
        let nt = exactness / 2 + 1;
        let np = exactness + 1;
        let (xs, ws) = gauss_legendre(nt);
        let mut nodes = Vec::with_capacity(nt * np);
        let mut weights = Vec::with_capacity(nt * np);
        let mut frames = Vec::with_capacity(nt * np);
        for (z, w) in xs.iter().zip(&ws) {
            let s = (1.0 - z * z).sqrt();
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                let (sp, cp) = phi.sin_cos();
                nodes.push([s * cp, s * sp, *z]);
                weights.push(w * 2.0 * PI / np as f64);
                frames.push([[z * cp, z * sp, -s], [-sp, cp, 0.0]]);
            }
        }
        QuadratureGrid { nodes, weights, frames, exactness }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Orthonormal tangent frame `(e_theta, e_phi)` at each node.
    pub fn frames(&self) -> &[[[f64; 3]; 2]] {
        &self.frames
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `T^T M T` for an ambient symmetric matrix `M` at node `k`.
    fn restrict(&self, k: usize, m: &[[f64; 3]; 3]) -> Sym2 {
        let [t1, t2] = &self.frames[k];
        let q = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += a[i] * m[i][j] * b[j];
                }
            }
            s
        };
        [q(t1, t1), q(t1, t2), q(t2, t2)]
    }
}

/// Homogeneous polynomial in `x, y, z`.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<[u32; 3], f64>);

impl Poly {
    fn constant(c: f64) -> Self {
        Poly(BTreeMap::from([([0, 0, 0], c)]))
    }

    fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Poly(BTreeMap::from([(e, 1.0)]))
    }

    fn add(&self, other: &Poly, s: f64) -> Poly {
        let mut out = self.0.clone();
        for (e, c) in &other.0 {
            *out.entry(*e).or_insert(0.0) += s * c;
        }
        Poly(out)
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = BTreeMap::new();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &other.0 {
                *out.entry([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]]).or_insert(0.0) += c1 * c2;
            }
        }
        Poly(out)
    }

    /// Value and ambient Hessian.
    fn value_hessian(&self, u: &[f64; 3]) -> (f64, [[f64; 3]; 3]) {
        let pw = |b: f64, e: u32| if e == 0 { 1.0 } else { b.powi(e as i32) };
        let mut v = 0.0;
        let mut h = [[0.0; 3]; 3];
        for (e, c) in &self.0 {
            let p = [pw(u[0], e[0]), pw(u[1], e[1]), pw(u[2], e[2])];
            v += c * p[0] * p[1] * p[2];
            for i in 0..3 {
                for j in i..3 {
                    let mut ee = *e;
                    let mut coef = *c;
                    for &d in &[i, j] {
                        if ee[d] == 0 {
                            coef = 0.0;
                            break;
                        }
                        coef *= ee[d] as f64;
                        ee[d] -= 1;
                    }
                    if coef != 0.0 {
                        let t = coef * pw(u[0], ee[0]) * pw(u[1], ee[1]) * pw(u[2], ee[2]);
                        h[i][j] += t;
                        if i != j {
                            h[j][i] += t;
                        }
                    }
                }
            }
        }
        (v, h)
    }
}

/// Real solid harmonics `r^l P_l^m(z/r) (cos | sin)(m phi)` as polynomials,
/// indexed by `l^2 + l + m`, `-l <= m <= l`.
fn solid_harmonics(l_max: usize) -> Vec<(usize, Poly)> {
    let r2 = Poly::var(0).mul(&Poly::var(0)).add(&Poly::var(1).mul(&Poly::var(1)), 1.0).add(&Poly::var(2).mul(&Poly::var(2)), 1.0);
    let z = Poly::var(2);
    let mut cs = vec![(Poly::constant(1.0), Poly::default())];
    for m in 0..l_max {
        let (a, b) = &cs[m];
        let na = a.mul(&Poly::var(0)).add(&b.mul(&Poly::var(1)), -1.0);
        let nb = b.mul(&Poly::var(0)).add(&a.mul(&Poly::var(1)), 1.0);
        cs.push((na, nb));
    }
    let mut out: Vec<(usize, Poly)> = (0..(l_max + 1) * (l_max + 1)).map(|_| (0, Poly::default())).collect();
    for m in 0..=l_max {
        let mut dfact = 1.0;
        for k in (1..2 * m).step_by(2) {
            dfact *= k as f64;
        }
        let mut prev2 = Poly::default();
        let mut prev = Poly::constant(dfact);
        for l in m..=l_max {
            let pi_lm = if l == m {
                prev.clone()
            } else {
                let t = z.mul(&prev).scale((2 * l - 1) as f64).add(&r2.mul(&prev2), -((l + m - 1) as f64));
                t.scale(1.0 / (l - m) as f64)
            };
            if l > m {
                prev2 = std::mem::replace(&mut prev, pi_lm.clone());
            }
            let base = l * l + l;
            out[base + m] = (l, pi_lm.mul(&cs[m].0));
            if m > 0 {
                out[base - m] = (l, pi_lm.mul(&cs[m].1));
            }
        }
    }
    out
}

/// Quadrature grid together with the orthonormal real harmonic basis up to
/// band `L`, sampled with tangential Hessians at every node.
#[derive(Debug)]
pub struct SphereBasis {
    grid: QuadratureGrid,
    band: usize,
    degrees: Vec<usize>,
    polys: Vec<Poly>,
    values: Vec<Vec<f64>>,
    hessians: Vec<Vec<Sym2>>,
}

/// Shared handle to a [`SphereBasis`].
#[derive(Clone, Debug)]
pub struct Sphere(Arc<SphereBasis>);

impl Sphere {
    /// Band `L` with quadrature exactness `3L + EXTRA_EXACTNESS`.
    pub fn new(band: usize) -> Self {
        Self::with_exactness(band, 3 * band + EXTRA_EXACTNESS).expect("default exactness is sufficient")
    }

    pub fn with_exactness(band: usize, exactness: usize) -> Result<Self> {
        if exactness < 3 * band {
            return Err(Error::Precondition(format!("quadrature exactness {exactness} below 3L = {}", 3 * band)));
        }
        let grid = QuadratureGrid::new(exactness);
        let polys = solid_harmonics(band);
        let mut degrees = Vec::with_capacity(polys.len());
        let mut normalized = Vec::with_capacity(polys.len());
        let mut values = Vec::with_capacity(polys.len());
        let mut hessians = Vec::with_capacity(polys.len());
        for (l, p) in &polys {
            let mut vals = Vec::with_capacity(grid.len());
            let mut hs = Vec::with_capacity(grid.len());
            for (k, u) in grid.nodes.iter().enumerate() {
                let (v, h) = p.value_hessian(u);
                let mut t = grid.restrict(k, &h);
                let c = (1.0 - *l as f64) * v;
                t[0] += c;
                t[2] += c;
                vals.push(v);
                hs.push(t);
            }
            let norm = grid.integrate(&vals.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
            for v in &mut vals {
                *v /= norm;
            }
            for t in &mut hs {
                for x in t.iter_mut() {
                    *x /= norm;
                }
            }
            degrees.push(*l);
            normalized.push(p.scale(1.0 / norm));
            values.push(vals);
            hessians.push(hs);
        }
        Ok(Sphere(Arc::new(SphereBasis { grid, band, degrees, polys: normalized, values, hessians })))
    }

    pub fn band(&self) -> usize {
        self.0.band
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.0.grid
    }

    /// Number of basis harmonics, `(L + 1)^2`.
    pub fn basis_len(&self) -> usize {
        self.0.degrees.len()
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.0.degrees[index]
    }

    /// Orthogonal projection of nodal samples onto the band.
    pub fn analyze(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let g = &self.0.grid;
        self.0
            .values
            .iter()
            .map(|y| y.iter().zip(samples).zip(&g.weights).map(|((y, s), w)| s * (y * w)).sum())
            .collect()
    }

    fn same(&self, other: &Sphere) -> Result<()> {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ok(())
        } else {
            Err(Error::Precondition("fields live on different sphere grids".into()))
        }
    }
}

fn basis_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Band-limited complex function on the sphere: harmonic coefficients and
/// the samples they synthesize on the grid.
#[derive(Clone, Debug)]
pub struct SphereField {
    sphere: Sphere,
    coeffs: Vec<Complex64>,
    samples: Vec<Complex64>,
}

impl SphereField {
    pub fn from_coefficients(sphere: &Sphere, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() > sphere.basis_len() {
            return Err(Error::InvalidSize(format!("{} coefficients exceed band {}", coeffs.len(), sphere.band())));
        }
        let mut c = coeffs;
        c.resize(sphere.basis_len(), Complex64::new(0.0, 0.0));
        let samples = (0..sphere.grid().len())
            .map(|k| c.iter().zip(&sphere.0.values).map(|(a, y)| a * y[k]).sum())
            .collect();
        Ok(SphereField { sphere: sphere.clone(), coeffs: c, samples })
    }

    pub fn zero(sphere: &Sphere) -> Self {
        Self::from_coefficients(sphere, Vec::new()).expect("empty coefficients")
    }

    /// Single real harmonic `Y_{l,m}`.
    pub fn harmonic(sphere: &Sphere, l: usize, m: i64) -> Result<Self> {
        if l > sphere.band() || m.unsigned_abs() as usize > l {
            return Err(Error::InvalidSize(format!("harmonic ({l}, {m}) outside band {}", sphere.band())));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); sphere.basis_len()];
        c[basis_index(l, m)] = Complex64::new(1.0, 0.0);
        Self::from_coefficients(sphere, c)
    }

    /// Band projection of a function given on the unit sphere.
    pub fn from_fn(sphere: &Sphere, f: impl Fn(&[f64; 3]) -> Complex64) -> Self {
        let samples: Vec<Complex64> = sphere.grid().nodes().iter().map(&f).collect();
        Self::from_coefficients(sphere, sphere.analyze(&samples)).expect("analysis stays in band")
    }

    /// Seeded random coefficients in `[-1, 1]` (real and imaginary parts) for
    /// degrees up to `band`.
    pub fn random(sphere: &Sphere, seed: u64, band: usize, complex: bool) -> Result<Self> {
        if band > sphere.band() {
            return Err(Error::InvalidSize(format!("band {band} exceeds {}", sphere.band())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..(band + 1) * (band + 1))
            .map(|_| {
                let re = rng.gen_range(-1.0..=1.0);
                let im = if complex { rng.gen_range(-1.0..=1.0) } else { 0.0 };
                Complex64::new(re, im)
            })
            .collect();
        Self::from_coefficients(sphere, c)
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[basis_index(l, m)]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Value at an arbitrary unit vector.
    pub fn evaluate(&self, u: &[f64; 3]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.sphere.0.polys)
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(c, p)| c * p.value_hessian(u).0)
            .sum()
    }

    pub fn conj(&self) -> Self {
        SphereField {
            sphere: self.sphere.clone(),
            coeffs: self.coeffs.iter().map(Complex64::conj).collect(),
            samples: self.samples.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn add(&self, other: &SphereField, s: Complex64) -> Result<Self> {
        self.sphere.same(&other.sphere)?;
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect();
        Self::from_coefficients(&self.sphere, c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        SphereField {
            sphere: self.sphere.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            samples: self.samples.iter().map(|c| c * s).collect(),
        }
    }

    /// Field with the degree-`l` components removed.
    pub fn without_degree(&self, l: usize) -> Self {
        let c = self.coeffs.iter().enumerate().map(|(i, c)| if self.sphere.degree_of(i) == l { Complex64::new(0.0, 0.0) } else { *c }).collect();
        Self::from_coefficients(&self.sphere, c).expect("same band")
    }

    /// L2 norm of the degree-`l` component.
    pub fn degree_norm(&self, l: usize) -> f64 {
        self.coeffs.iter().enumerate().filter(|(i, _)| self.sphere.degree_of(*i) == l).map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    /// `grad^2 f + f g` in the tangent frame at node `k`.
    pub fn hessian_form(&self, k: usize) -> CSym2 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (c, hs) in self.coeffs.iter().zip(&self.sphere.0.hessians) {
            if c.re != 0.0 || c.im != 0.0 {
                for i in 0..3 {
                    out[i] += c * hs[k][i];
                }
            }
        }
        out
    }

    /// `(Delta f)` applied coefficient-wise, `-l(l+1)` per degree.
    pub fn laplacian(&self) -> Self {
        let c = self.coeffs.iter().enumerate().map(|(i, c)| {
            let l = self.sphere.degree_of(i) as f64;
            c * (-l * (l + 1.0))
        });
        Self::from_coefficients(&self.sphere, c.collect()).expect("same band")
    }
}

/// Support function of a smooth convex body with positive curvature.
#[derive(Clone, Debug)]
pub enum SmoothBodySupport {
    Ball { radius: f64 },
    /// `h(u) = sqrt(u^T Q u)` with `Q` positive definite.
    Ellipsoid { q: [[f64; 3]; 3] },
    /// `h = radius + perturbation`, perturbation a real band-limited field.
    Perturbed { radius: f64, perturbation: SphereField },
}

/// Smallest eigenvalue allowed for `grad^2 h + h g` on perturbed balls.
pub const CONVEXITY_MARGIN: f64 = 0.1;

fn sym2_min_eigenvalue(m: &Sym2) -> f64 {
    let mean = 0.5 * (m[0] + m[2]);
    let d = (0.25 * (m[0] - m[2]).powi(2) + m[1] * m[1]).sqrt();
    mean - d
}

impl SmoothBodySupport {
    pub fn ball(radius: f64) -> Result<Self> {
        if radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Precondition("ball radius must be positive".into()));
        }
        Ok(SmoothBodySupport::Ball { radius })
    }

    pub fn ellipsoid(q: [[f64; 3]; 3]) -> Result<Self> {
        let sym = (0..3).all(|i| (0..3).all(|j| q[i][j] == q[j][i]));
        let m1 = q[0][0];
        let m2 = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        let m3 = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
            + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
        if !sym || m1 <= 0.0 || m2 <= 0.0 || m3 <= 0.0 {
            return Err(Error::Precondition("ellipsoid matrix must be symmetric positive definite".into()));
        }
        Ok(SmoothBodySupport::Ellipsoid { q })
    }

    pub fn diagonal_ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::ellipsoid([[a * a, 0.0, 0.0], [0.0, b * b, 0.0], [0.0, 0.0, c * c]])
    }

    /// Ball plus a real perturbation, rejected unless the convexity margin
    /// holds at every grid node.
    pub fn perturbed(radius: f64, perturbation: SphereField) -> Result<Self> {
        if !perturbation.is_real(0.0) {
            return Err(Error::Precondition("support perturbation must be real".into()));
        }
        let body = SmoothBodySupport::Perturbed { radius, perturbation };
        let margin = body.convexity_margin(body.sphere_hint().expect("perturbed body has a grid"));
        if margin < CONVEXITY_MARGIN {
            return Err(Error::Precondition(format!("convexity margin {margin:.4} below {CONVEXITY_MARGIN}")));
        }
        Ok(body)
    }

    /// Seeded ellipsoid `Q = A A^T + I/2` with entries of `A` in `[-1, 1]`.
    pub fn random_ellipsoid(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut q = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = (0..3).map(|k| a[3 * i + k] * a[3 * j + k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        Self::ellipsoid(q).expect("A A^T + I/2 is positive definite")
    }

    fn sphere_hint(&self) -> Option<&Sphere> {
        match self {
            SmoothBodySupport::Perturbed { perturbation, .. } => Some(perturbation.sphere()),
            _ => None,
        }
    }

    pub fn support(&self, u: &[f64; 3]) -> f64 {
        match self {
            SmoothBodySupport::Ball { radius } => radius * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt(),
            SmoothBodySupport::Ellipsoid { q } => {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += u[i] * q[i][j] * u[j];
                    }
                }
                s.sqrt()
            }
            SmoothBodySupport::Perturbed { radius, perturbation } => {
                let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                let v = [u[0] / norm, u[1] / norm, u[2] / norm];
                norm * (radius + perturbation.evaluate(&v).re)
            }
        }
    }

    /// Samples of `h` at the grid nodes.
    pub fn samples(&self, sphere: &Sphere) -> Vec<f64> {
        match self {
            SmoothBodySupport::Perturbed { radius, perturbation } if Arc::ptr_eq(&perturbation.sphere().0, &sphere.0) => {
                perturbation.samples().iter().map(|c| radius + c.re).collect()
            }
            _ => sphere.grid().nodes().iter().map(|u| self.support(u)).collect(),
        }
    }

    /// `grad^2 h + h g` at every node of `sphere`.
    pub fn hessian_forms(&self, sphere: &Sphere) -> Result<Vec<Sym2>> {
        let g = sphere.grid();
        match self {
            SmoothBodySupport::Ball { radius } => Ok(vec![[*radius, 0.0, *radius]; g.len()]),
            SmoothBodySupport::Ellipsoid { q } => Ok((0..g.len())
                .map(|k| {
                    let u = &g.nodes[k];
                    let qu: Vec<f64> = (0..3).map(|i| (0..3).map(|j| q[i][j] * u[j]).sum()).collect();
                    let h = (0..3).map(|i| u[i] * qu[i]).sum::<f64>().sqrt();
                    let mut m = [[0.0; 3]; 3];
                    for i in 0..3 {
                        for j in 0..3 {
                            m[i][j] = q[i][j] / h - qu[i] * qu[j] / (h * h * h);
                        }
                    }
                    g.restrict(k, &m)
                })
                .collect()),
            SmoothBodySupport::Perturbed { radius, perturbation } => {
                sphere.same(perturbation.sphere())?;
                Ok((0..g.len())
                    .map(|k| {
                        let h = perturbation.hessian_form(k);
                        [radius + h[0].re, h[1].re, radius + h[2].re]
                    })
                    .collect())
            }
        }
    }

    /// Smallest eigenvalue of `grad^2 h + h g` over the grid.
    pub fn convexity_margin(&self, sphere: &Sphere) -> f64 {
        match self.hessian_forms(sphere) {
            Ok(hs) => hs.iter().map(sym2_min_eigenvalue).fold(f64::INFINITY, f64::min),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Band projection of `h` as a field.
    pub fn to_field(&self, sphere: &Sphere) -> SphereField {
        let s: Vec<Complex64> = self.samples(sphere).into_iter().map(Complex64::from).collect();
        SphereField::from_coefficients(sphere, sphere.analyze(&s)).expect("analysis stays in band")
    }

    /// Exact volume for balls and ellipsoids.
    pub fn closed_form_volume(&self) -> Option<f64> {
        match self {
            SmoothBodySupport::Ball { radius } => Some(4.0 * PI / 3.0 * radius.powi(3)),
            SmoothBodySupport::Ellipsoid { q } => {
                let det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
                    + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
                Some(4.0 * PI / 3.0 * det.sqrt())
            }
            SmoothBodySupport::Perturbed { .. } => None,
        }
    }
}

fn check_band(f: &SphereField, bodies: usize) -> Result<()> {
    let g = f.sphere().grid();
    if g.exactness() < 3 * f.sphere().band() {
        return Err(Error::Precondition(format!(
            "grid exactness {} insufficient for band {} with {bodies} support functions",
            g.exactness(),
            f.sphere().band()
        )));
    }
    Ok(())
}

/// `Df = D(f, h_C)` at the nodes, projected back onto the band.
pub fn operator_d(f: &SphereField, c: &SmoothBodySupport) -> Result<SphereField> {
    check_band(f, 1)?;
    let hc = c.hessian_forms(f.sphere())?;
    let samples: Vec<Complex64> = (0..hc.len()).map(|k| mixed_discriminant(&f.hessian_form(k), &complexify(&hc[k]))).collect();
    SphereField::from_coefficients(f.sphere(), f.sphere().analyze(&samples))
}

/// `V(f, C_1, C_2) = (1/3) int f D(h_{C_1}, h_{C_2}) du`.
pub fn mv_function(f: &SphereField, bodies: [&SmoothBodySupport; 2]) -> Result<Complex64> {
    check_band(f, 2)?;
    let s = f.sphere();
    let h1 = bodies[0].hessian_forms(s)?;
    let h2 = bodies[1].hessian_forms(s)?;
    let vals: Vec<Complex64> = (0..h1.len()).map(|k| f.samples()[k] * real_mixed_discriminant(&h1[k], &h2[k])).collect();
    Ok(s.grid().integrate_complex(&vals) / 3.0)
}

/// `V(A, C_1, C_2)` for three smooth bodies, `(1/3) int h_A D(h_{C_1}, h_{C_2}) du`.
pub fn mixed_volume_smooth(sphere: &Sphere, a: &SmoothBodySupport, c1: &SmoothBodySupport, c2: &SmoothBodySupport) -> Result<f64> {
    let h = a.samples(sphere);
    let h1 = c1.hessian_forms(sphere)?;
    let h2 = c2.hessian_forms(sphere)?;
    let vals: Vec<f64> = (0..h.len()).map(|k| h[k] * real_mixed_discriminant(&h1[k], &h2[k])).collect();
    Ok(sphere.grid().integrate(&vals) / 3.0)
}

/// `(1/3) int conj(g) D(f, h_C) du`.
pub fn hr_form(f: &SphereField, g: &SphereField, c: &SmoothBodySupport) -> Result<Complex64> {
    check_band(f, 1)?;
    f.sphere().same(g.sphere())?;
    let s = f.sphere();
    let hc = c.hessian_forms(s)?;
    let vals: Vec<Complex64> =
        (0..hc.len()).map(|k| g.samples()[k].conj() * mixed_discriminant(&f.hessian_form(k), &complexify(&hc[k]))).collect();
    Ok(s.grid().integrate_complex(&vals) / 3.0)
}

/// `f - (V(f, C_1, C_2) / V(h_B, C_1, C_2)) h_B`, with `h_B` band-projected
/// so that the result is primitive for the same quadrature.
pub fn make_primitive(f: &SphereField, cs: [&SmoothBodySupport; 2], b: &SmoothBodySupport) -> Result<SphereField> {
    let hb = b.to_field(f.sphere());
    let denom = mv_function(&hb, cs)?;
    if denom.norm() < 1e-12 {
        return Err(Error::Precondition("normalizing body has vanishing mixed volume".into()));
    }
    let num = mv_function(f, cs)?;
    f.add(&hb, -(num / denom))
}

/// Both sides of `int f D(h_A, h_C) du = int h_A D(f, h_C) du`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub magnitude: f64,
}

impl DiagramReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.magnitude.max(1.0)
    }
}

/// Commuting-diagram identity on `f` with its linear part removed.
pub fn fg_diagram_check(f: &SphereField, a: &SmoothBodySupport, c: &SmoothBodySupport) -> Result<DiagramReport> {
    let f = f.without_degree(1);
    let s = f.sphere();
    let ha = a.hessian_forms(s)?;
    let hc = c.hessian_forms(s)?;
    let ha_vals = a.samples(s);
    let lhs_vals: Vec<Complex64> = (0..ha.len()).map(|k| f.samples()[k] * real_mixed_discriminant(&ha[k], &hc[k])).collect();
    let rhs_vals: Vec<Complex64> =
        (0..ha.len()).map(|k| mixed_discriminant(&f.hessian_form(k), &complexify(&hc[k])) * ha_vals[k]).collect();
    let lhs = s.grid().integrate_complex(&lhs_vals);
    let rhs = s.grid().integrate_complex(&rhs_vals);
    Ok(DiagramReport { lhs, rhs, residual: (lhs - rhs).norm(), magnitude: lhs.norm().max(rhs.norm()) })
}

/// Coefficient-wise comparison of `D` with the ball reference against
/// `(2 - l(l+1)) / 2` on every basis harmonic.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub band: usize,
    pub max_residual: f64,
    pub kernel_residual: f64,
    pub min_gap: f64,
}

pub fn ball_spectrum_check(sphere: &Sphere) -> Result<SpectrumReport> {
    let ball = SmoothBodySupport::ball(1.0)?;
    let mut max_residual = 0.0f64;
    let mut kernel_residual = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for l in 0..=sphere.band() {
        let lambda = (2.0 - (l * (l + 1)) as f64) / 2.0;
        for m in -(l as i64)..=(l as i64) {
            let y = SphereField::harmonic(sphere, l, m)?;
            let dy = operator_d(&y, &ball)?;
            let expected = y.scale(Complex64::new(lambda, 0.0));
            let r = dy.add(&expected, Complex64::new(-1.0, 0.0))?.norm();
            max_residual = max_residual.max(r);
            if l == 1 {
                kernel_residual = kernel_residual.max(dy.norm());
            } else {
                min_gap = min_gap.min(dy.norm());
            }
        }
    }
    Ok(SpectrumReport { band: sphere.band(), max_residual, kernel_residual, min_gap })
}

/// Summary of one aggregate sphere check.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SphereCheck {
    pub check: &'static str,
    pub band: usize,
    pub passed: bool,
    pub values: BTreeMap<&'static str, f64>,
}

/// Kernel of `D` with ball reference is exactly the degree-1 harmonics.
pub fn kernel_check(sphere: &Sphere) -> Result<SphereCheck> {
    let r = ball_spectrum_check(sphere)?;
    let passed = r.kernel_residual < 1e-10 && r.max_residual < 1e-8 && r.min_gap > 0.0;
    let values = BTreeMap::from([("kernel_residual", r.kernel_residual), ("max_residual", r.max_residual), ("min_gap", r.min_gap)]);
    Ok(SphereCheck { check: "kernel", band: sphere.band(), passed, values })
}

/// `|int f Dg - int g Df|` with an ellipsoid reference on `count` random
/// pairs, measured through `hr_form(f, conj g) - hr_form(g, conj f)`.
pub fn selfadjoint_check(sphere: &Sphere, seed: u64, count: usize) -> Result<SphereCheck> {
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let f = SphereField::random(sphere, 2 * s, sphere.band(), true)?;
        let g = SphereField::random(sphere, 2 * s + 1, sphere.band(), true)?;
        let c = SmoothBodySupport::random_ellipsoid(s);
        let a = hr_form(&f, &g.conj(), &c)?;
        let b = hr_form(&g, &f.conj(), &c)?;
        worst = worst.max((a - b).norm() / a.norm().max(1.0));
    }
    Ok(SphereCheck { check: "selfadjoint", band: sphere.band(), passed: worst < 1e-8, values: BTreeMap::from([("max_residual", worst)]) })
}

/// `Y_2` value, sign of the form on `count` primitive random fields and
/// the linear equality witness.
pub fn hr_check(sphere: &Sphere, seed: u64, count: usize) -> Result<SphereCheck> {
    let ball = SmoothBodySupport::ball(1.0)?;
    let y2 = SphereField::from_fn(sphere, |u| (u[0] * u[1]).into());
    let y2_value = hr_form(&y2, &y2, &ball)?.re;
    let y2_error = (y2_value + 8.0 * PI / 45.0).abs();
    let mut max_form = f64::NEG_INFINITY;
    let mut max_primitivity = 0.0f64;
    for i in 0..count as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let c1 = SmoothBodySupport::random_ellipsoid(3 * s);
        let c2 = SmoothBodySupport::random_ellipsoid(3 * s + 1);
        let f = SphereField::random(sphere, 3 * s + 2, sphere.band(), i % 2 == 1)?;
        let p = make_primitive(&f, [&c1, &c2], &ball)?;
        max_primitivity = max_primitivity.max(mv_function(&p, [&c1, &c2])?.norm());
        max_form = max_form.max(hr_form(&p, &p, &c1)?.re);
    }
    let lin = SphereField::from_fn(sphere, |u| (u[0] - 2.0 * u[1] + 0.5 * u[2]).into());
    let witness = hr_form(&lin, &lin, &SmoothBodySupport::random_ellipsoid(seed))?.norm();
    let passed = y2_error < 1e-6 && max_form <= 1e-9 && max_primitivity < 1e-10 && witness < 1e-10;
    let values = BTreeMap::from([
        ("y2_value", y2_value),
        ("y2_error", y2_error),
        ("max_primitive_form", max_form),
        ("max_primitivity_residual", max_primitivity),
        ("linear_witness", witness),
    ]);
    Ok(SphereCheck { check: "hr", band: sphere.band(), passed, values })
}

/// Commuting-diagram residual over `count` random fields and ellipsoids.
pub fn diagram_check(sphere: &Sphere, seed: u64, count: usize) -> Result<SphereCheck> {
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let f = SphereField::random(sphere, 3 * s, sphere.band(), i % 2 == 1)?;
        let a = SmoothBodySupport::random_ellipsoid(3 * s + 1);
        let c = SmoothBodySupport::random_ellipsoid(3 * s + 2);
        worst = worst.max(fg_diagram_check(&f, &a, &c)?.relative_residual());
    }
    Ok(SphereCheck { check: "diagram", band: sphere.band(), passed: worst < 1e-8, values: BTreeMap::from([("max_relative_residual", worst)]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> Sphere {
        Sphere::new(DEFAULT_BAND)
    }

    #[test]
    fn grid_weights_and_exactness() {
        let g = QuadratureGrid::new(24);
        assert!((g.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        let v: Vec<f64> = g.nodes().iter().map(|u| u[0].powi(4) * u[1].powi(2) * u[2].powi(6)).collect();
        // int x^4 y^2 z^6 over S^2 = 2 G(5/2) G(3/2) G(7/2) / G(15/2)
        let exact = 2.0 * (3.0 * PI.sqrt() / 4.0) * (PI.sqrt() / 2.0) * (15.0 * PI.sqrt() / 8.0) / (135135.0 * PI.sqrt() / 128.0);
        assert!((g.integrate(&v) - exact).abs() < 1e-13);
    }

    #[test]
    fn basis_is_orthonormal() {
        let s = Sphere::new(4);
        let n = s.basis_len();
        for i in 0..n {
            for j in 0..n {
                let v: Vec<f64> = (0..s.grid().len()).map(|k| s.0.values[i][k] * s.0.values[j][k]).collect();
                let ip = s.grid().integrate(&v);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "({i},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn hessian_of_constant_and_linear() {
        let s = sphere();
        let one = SphereField::from_fn(&s, |_| 1.0.into());
        let lin = SphereField::from_fn(&s, |u| (2.0 * u[0] - u[2]).into());
        for k in (0..s.grid().len()).step_by(37) {
            let h = one.hessian_form(k);
            assert!((h[0].re - 1.0).abs() < 1e-12 && h[1].norm() < 1e-12 && (h[2].re - 1.0).abs() < 1e-12);
            assert!(lin.hessian_form(k).iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn trace_matches_laplacian() {
        let s = sphere();
        let f = SphereField::random(&s, 3, 6, true).unwrap();
        let lap = f.laplacian();
        for k in (0..s.grid().len()).step_by(11) {
            let h = f.hessian_form(k);
            let want = lap.samples()[k] + 2.0 * f.samples()[k];
            assert!((h[0] + h[2] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn mixed_discriminant_examples() {
        let i = complexify(&[1.0, 0.0, 1.0]);
        assert!((mixed_discriminant(&i, &i) - 1.0).norm() < 1e-15);
        let m = complexify(&[2.0, 0.5, 3.0]);
        assert!((mixed_discriminant(&m, &i) - 2.5).norm() < 1e-15);
        assert!((mixed_discriminant(&m, &m) - (6.0 - 0.25)).norm() < 1e-15);
        let a = complexify(&[2.0, 0.0, 3.0]);
        let b = complexify(&[5.0, 0.0, 7.0]);
        assert!((mixed_discriminant(&a, &b) - (2.0 * 7.0 + 3.0 * 5.0) / 2.0).norm() < 1e-15);
    }

    #[test]
    fn ball_spectrum() {
        let r = ball_spectrum_check(&sphere()).unwrap();
        assert!(r.kernel_residual < 1e-10, "{r:?}");
        assert!(r.max_residual < 1e-9, "{r:?}");
        assert!(r.min_gap > 0.5, "{r:?}");
    }

    #[test]
    fn ball_spectrum_band_12() {
        let r = ball_spectrum_check(&Sphere::new(12)).unwrap();
        assert!(r.kernel_residual < 1e-10 && r.max_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn y2_hr_value() {
        let s = sphere();
        let ball = SmoothBodySupport::ball(1.0).unwrap();
        let f = SphereField::from_fn(&s, |u| (u[0] * u[1]).into());
        let v = hr_form(&f, &f, &ball).unwrap();
        assert!((v.re + 8.0 * PI / 45.0).abs() < 1e-10 && v.im.abs() < 1e-12, "{v}");
        let df = operator_d(&f, &ball).unwrap();
        assert!(df.add(&f, 2.0.into()).unwrap().norm() < 1e-10);
    }

    #[test]
    fn ball_volume_and_primitive_y2() {
        let s = sphere();
        let ball = SmoothBodySupport::ball(1.0).unwrap();
        let one = ball.to_field(&s);
        let v = mv_function(&one, [&ball, &ball]).unwrap();
        assert!((v.re - 4.0 * PI / 3.0).abs() < 1e-10);
        let y2 = SphereField::harmonic(&s, 2, 1).unwrap();
        assert!(mv_function(&y2, [&ball, &ball]).unwrap().norm() < 1e-12);
        let lin = SphereField::harmonic(&s, 1, 0).unwrap();
        let e = SmoothBodySupport::random_ellipsoid(4);
        assert!(mv_function(&lin, [&e, &ball]).unwrap().norm() < 1e-10);
    }

    #[test]
    fn self_adjoint_with_ellipsoid() {
        let s = sphere();
        let c = SmoothBodySupport::random_ellipsoid(11);
        let f = SphereField::random(&s, 1, 8, true).unwrap();
        let g = SphereField::random(&s, 2, 8, true).unwrap();
        let a = hr_form(&f, &g, &c).unwrap();
        let b = hr_form(&g, &f, &c).unwrap();
        assert!((a - b.conj()).norm() < 1e-8 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn primitive_fields_are_negative() {
        let s = sphere();
        let c1 = SmoothBodySupport::random_ellipsoid(5);
        let c2 = SmoothBodySupport::random_ellipsoid(6);
        let b = SmoothBodySupport::ball(1.0).unwrap();
        for seed in 0..5 {
            let f = SphereField::random(&s, seed, 8, seed % 2 == 0).unwrap();
            let p = make_primitive(&f, [&c1, &c2], &b).unwrap();
            assert!(mv_function(&p, [&c1, &c2]).unwrap().norm() < 1e-10);
            assert!(hr_form(&p, &p, &c1).unwrap().re <= 1e-9);
        }
        let hb = b.to_field(&s);
        assert!(make_primitive(&hb, [&c1, &c2], &b).unwrap().norm() < 1e-10);
    }

    #[test]
    fn diagram_commutes() {
        let s = sphere();
        let f = SphereField::random(&s, 9, 8, false).unwrap();
        let a = SmoothBodySupport::random_ellipsoid(1);
        let c = SmoothBodySupport::random_ellipsoid(2);
        let r = fg_diagram_check(&f, &a, &c).unwrap();
        assert!(r.relative_residual() < 1e-8, "{r:?}");
        let ball = SmoothBodySupport::ball(1.0).unwrap();
        let one = SphereField::from_fn(&s, |_| 1.0.into());
        assert!(fg_diagram_check(&one, &ball, &ball).unwrap().residual < 1e-12);
    }

    #[test]
    fn ellipsoid_mixed_volumes() {
        let s = sphere();
        let e = SmoothBodySupport::random_ellipsoid(3);
        let b = SmoothBodySupport::ball(1.0).unwrap();
        let vol = mixed_volume_smooth(&s, &e, &e, &e).unwrap();
        assert!((vol - e.closed_form_volume().unwrap()).abs() < 1e-8 * vol);
        let a = mixed_volume_smooth(&s, &e, &b, &b).unwrap();
        let c = mixed_volume_smooth(&s, &b, &e, &b).unwrap();
        assert!((a - c).abs() < 1e-8);
    }

    #[test]
    fn aggregate_checks() {
        let s = sphere();
        for c in [kernel_check(&s), selfadjoint_check(&s, 1, 5), hr_check(&s, 1, 5), diagram_check(&s, 1, 5)] {
            let c = c.unwrap();
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn perturbed_ball_margin() {
        let s = sphere();
        let small = SphereField::random(&s, 1, 4, false).unwrap().scale(0.01.into());
        assert!(SmoothBodySupport::perturbed(1.0, small).is_ok());
        let big = SphereField::random(&s, 1, 4, false).unwrap().scale(5.0.into());
        assert!(SmoothBodySupport::perturbed(1.0, big).is_err());
    }
}
