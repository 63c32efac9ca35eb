//! Formal mixed-volume valuations `A -> V(A[k], C_1, ..., C_{n-k})`, their
//! convolution, the Euler-Verdier involution and top-degree products.

use crate::error::{Error, Result};
use crate::higher_rank::{tilde_mixed_volume, BodyTuple, Partition};
use crate::mixed::mixed_volume_repeated;
use crate::polytope::{BodyJson, Point, Polytope};
use crate::scalar::{binomial, factorial, format_scalar, int, parse_scalar, Scalar};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Complex rational coefficient.
pub type Coeff = Complex<Scalar>;

pub fn real(v: Scalar) -> Coeff {
    Complex::new(v, Scalar::zero())
}

/// `A -> V(A[k], C_1, ..., C_{n-k})` on `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    n: usize,
    degree: usize,
    bodies: Vec<Polytope>,
}

impl Generator {
    pub fn new(n: usize, degree: usize, bodies: Vec<Polytope>) -> Result<Self> {
        if degree > n {
            return Err(Error::Degree(format!("degree {degree} exceeds dimension {n}")));
        }
        if bodies.len() != n - degree {
            return Err(Error::LengthMismatch { expected: n - degree, found: bodies.len() });
        }
        if let Some(b) = bodies.iter().find(|b| b.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
        Ok(Generator { n, degree, bodies })
    }

    /// The volume, degree `n`.
    pub fn volume(n: usize) -> Self {
        Generator { n, degree: n, bodies: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bodies(&self) -> &[Polytope] {
        &self.bodies
    }

    pub fn evaluate(&self, a: &Polytope) -> Result<Scalar> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: a.dim() });
        }
        let mut groups: Vec<(&Polytope, usize)> = Vec::with_capacity(self.bodies.len() + 1);
        if self.degree > 0 {
            groups.push((a, self.degree));
        }
        groups.extend(self.bodies.iter().map(|c| (c, 1)));
        mixed_volume_repeated(&groups)
    }

    pub fn reflect(&self) -> Self {
        Generator { n: self.n, degree: self.degree, bodies: self.bodies.iter().map(Polytope::reflect).collect() }
    }

    /// `(n-a)! (n-b)! / ((n-a-b)! n!)` for `a` and `b` reference bodies.
    pub fn convolution_constant(n: usize, k: usize, l: usize) -> Result<Scalar> {
        let (a, b) = (n - k, n - l);
        if a + b > n {
            return Err(Error::Degree(format!("degrees {k} and {l} give a negative degree in dimension {n}")));
        }
        Ok(Scalar::new(factorial(k) * factorial(l), factorial(n - a - b) * factorial(n)))
    }

    /// Bernig-Fu convolution of two generators.
    pub fn convolve(&self, other: &Generator) -> Result<(Scalar, Generator)> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let c = Self::convolution_constant(self.n, self.degree, other.degree)?;
        let mut bodies = self.bodies.clone();
        bodies.extend(other.bodies.iter().cloned());
        Ok((c, Generator { n: self.n, degree: self.degree + other.degree - self.n, bodies }))
    }
}

/// Coefficient of `vol` in the Alesker product of complementary-degree
/// generators: `binom(n,k)^{-1} V(A_1, ..., A_{n-k}, -B_1, ..., -B_k)`.
pub fn product_top_degree(phi: &Generator, psi: &Generator) -> Result<Scalar> {
    let n = phi.n;
    if psi.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: psi.n });
    }
    if phi.degree + psi.degree != n {
        return Err(Error::Degree(format!("degrees {} and {} are not complementary", phi.degree, psi.degree)));
    }
    let mut bodies: Vec<(&Polytope, usize)> = phi.bodies.iter().map(|c| (c, 1)).collect();
    let reflected: Vec<Polytope> = psi.bodies.iter().map(Polytope::reflect).collect();
    bodies.extend(reflected.iter().map(|c| (c, 1)));
    Ok(mixed_volume_repeated(&bodies)? / Scalar::from_integer(binomial(n, phi.degree)))
}

/// Coefficient of `vol` in `phi_1 ... phi_l` when the degrees sum to `n`,
/// through `k_1! ... k_l! (n(l-1))! / (n!)^l` times the higher-rank mixed
/// volume of the reference tuples.
pub fn product(factors: &[Generator]) -> Result<Scalar> {
    let n = factors.first().ok_or(Error::EmptyInput)?.n;
    if let Some(g) = factors.iter().find(|g| g.n != n) {
        return Err(Error::DimensionMismatch { expected: n, found: g.n });
    }
    let degrees: Vec<usize> = factors.iter().map(|g| g.degree).collect();
    if degrees.iter().sum::<usize>() != n {
        return Err(Error::Degree(format!("degrees {degrees:?} do not sum to {n}")));
    }
    // Degree-0 factors are constant multiples of the Euler characteristic.
    let nontrivial: Vec<&Generator> = factors.iter().filter(|g| g.degree > 0).collect();
    let zero_deg: Scalar = factors
        .iter()
        .filter(|g| g.degree == 0)
        .map(|g| g.evaluate(&Polytope::point(Point::origin(n))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Scalar::one(), |acc, v| acc * v);
    if nontrivial.len() == 1 {
        return Ok(zero_deg);
    }
    let parts: Vec<usize> = nontrivial.iter().map(|g| g.degree).collect();
    let p = Partition::new(n, parts)?;
    let tuples: Vec<BodyTuple> = nontrivial.iter().map(|g| BodyTuple::new(g.bodies.clone())).collect();
    Ok(zero_deg * p.product_constant() * tilde_mixed_volume(&p, &tuples)?)
}

/// Formal complex linear combination of generators.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedVolumeValuation {
    n: usize,
    terms: Vec<(Coeff, Generator)>,
}

impl MixedVolumeValuation {
    pub fn zero(n: usize) -> Self {
        MixedVolumeValuation { n, terms: Vec::new() }
    }

    pub fn from_generator(g: Generator) -> Self {
        MixedVolumeValuation { n: g.n, terms: vec![(real(Scalar::one()), g)] }
    }

    pub fn from_terms(n: usize, terms: Vec<(Coeff, Generator)>) -> Result<Self> {
        if let Some((_, g)) = terms.iter().find(|(_, g)| g.n != n) {
            return Err(Error::DimensionMismatch { expected: n, found: g.n });
        }
        Ok(MixedVolumeValuation { n, terms })
    }

    pub fn volume(n: usize) -> Self {
        Self::from_generator(Generator::volume(n))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Coeff, Generator)] {
        &self.terms
    }

    pub fn evaluate(&self, a: &Polytope) -> Result<Coeff> {
        let mut acc = real(Scalar::zero());
        for (c, g) in &self.terms {
            let v = g.evaluate(a)?;
            acc += Complex::new(&c.re * &v, &c.im * &v);
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(MixedVolumeValuation { n: self.n, terms })
    }

    pub fn scale(&self, s: &Coeff) -> Self {
        MixedVolumeValuation { n: self.n, terms: self.terms.iter().map(|(c, g)| (c * s, g.clone())).collect() }
    }

    /// Coefficient-wise complex conjugation.
    pub fn conj(&self) -> Self {
        MixedVolumeValuation { n: self.n, terms: self.terms.iter().map(|(c, g)| (c.conj(), g.clone())).collect() }
    }

    /// Degree-`k` part.
    pub fn component(&self, k: usize) -> Self {
        MixedVolumeValuation { n: self.n, terms: self.terms.iter().filter(|(_, g)| g.degree == k).cloned().collect() }
    }

    /// Bilinear extension of the generator convolution.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, g) in &self.terms {
            for (b, h) in &other.terms {
                let (c, gh) = g.convolve(h)?;
                terms.push((a * b * real(c), gh));
            }
        }
        Ok(MixedVolumeValuation { n: self.n, terms })
    }

    /// `(sigma phi)(A) = (-1)^k phi(-A)` on each degree-`k` term.
    pub fn euler_verdier(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, g)| {
                let c = if g.degree % 2 == 1 { -c.clone() } else { c.clone() };
                (c, g.reflect())
            })
            .collect();
        MixedVolumeValuation { n: self.n, terms }
    }

    /// Multilinear extension of [`product`] over the terms of each factor.
    pub fn product_top_degree(factors: &[Self]) -> Result<Coeff> {
        let first = factors.first().ok_or(Error::EmptyInput)?;
        let mut acc = real(Scalar::zero());
        let mut idx = vec![0usize; factors.len()];
        if factors.iter().any(|f| f.terms.is_empty()) {
            return Ok(acc);
        }
        loop {
            let gens: Vec<Generator> = idx.iter().zip(factors).map(|(&i, f)| f.terms[i].1.clone()).collect();
            let coeff = idx.iter().zip(factors).fold(real(Scalar::one()), |c, (&i, f)| c * &f.terms[i].0);
            if gens.iter().any(|g| g.n != first.n) {
                return Err(Error::DimensionMismatch { expected: first.n, found: gens.iter().map(|g| g.n).find(|&m| m != first.n).unwrap_or(0) });
            }
            let v = product(&gens)?;
            acc += Complex::new(&coeff.re * &v, &coeff.im * &v);
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return Ok(acc);
                }
                idx[pos] += 1;
                if idx[pos] < factors[pos].terms.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn to_json(&self) -> ValuationJson {
        ValuationJson {
            dim: Some(self.n),
            terms: self
                .terms
                .iter()
                .map(|(c, g)| TermJson {
                    coeff: format_scalar(&c.re),
                    coeff_im: (!c.im.is_zero()).then(|| format_scalar(&c.im)),
                    degree: g.degree,
                    bodies: g.bodies.iter().map(BodyJson::from_polytope).collect(),
                })
                .collect(),
        }
    }
}

/// `{"dim": n, "terms": [{"coeff": "p/q", "degree": k, "bodies": [...]}]}`.
/// `dim` may be omitted when some term has reference bodies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_im: Option<String>,
    pub degree: usize,
    pub bodies: Vec<BodyJson>,
}

impl ValuationJson {
    pub fn to_valuation(&self) -> Result<MixedVolumeValuation> {
        let n = match self.dim {
            Some(n) => n,
            None => self
                .terms
                .iter()
                .find_map(|t| t.bodies.first().map(|b| b.dim))
                .ok_or_else(|| Error::Parse("valuation dimension cannot be inferred; add \"dim\"".into()))?,
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let re = parse_scalar(&t.coeff)?;
            let im = t.coeff_im.as_deref().map(parse_scalar).transpose()?.unwrap_or_else(Scalar::zero);
            let bodies = t.bodies.iter().map(BodyJson::to_polytope).collect::<Result<Vec<_>>>()?;
            terms.push((Complex::new(re, im), Generator::new(n, t.degree, bodies)?));
        }
        MixedVolumeValuation::from_terms(n, terms)
    }

    pub fn parse_str(text: &str) -> Result<MixedVolumeValuation> {
        let doc: ValuationJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.to_valuation()
    }
}

/// Coefficients of the Lagrange basis on the nodes `0, 1, ..., d`:
/// `out[j][a]` is the coefficient of `t^a` in the `j`-th basis polynomial.
fn lagrange_coefficients(d: usize) -> Vec<Vec<Scalar>> {
    (0..=d)
        .map(|j| {
            let mut poly = vec![Scalar::one()];
            let mut denom = Scalar::one();
            for m in (0..=d).filter(|&m| m != j) {
                let mut next = vec![Scalar::zero(); poly.len() + 1];
                for (a, c) in poly.iter().enumerate() {
                    next[a + 1] += c;
                    next[a] -= c * int(m as i64);
                }
                poly = next;
                denom *= int(j as i64 - m as i64);
            }
            poly.into_iter().map(|c| c / &denom).collect()
        })
        .collect()
}

/// Coefficient of `t^alpha` in the polynomial `f(t_1, ..., t_m)` of degree at
/// most `d` in each variable, from its values on the grid `{0, ..., d}^m`.
pub fn interpolate_coefficient(d: usize, alpha: &[usize], mut f: impl FnMut(&[usize]) -> Result<Scalar>) -> Result<Scalar> {
    if alpha.iter().any(|&a| a > d) {
        return Ok(Scalar::zero());
    }
    let lag = lagrange_coefficients(d);
    let m = alpha.len();
    let mut acc = Scalar::zero();
    let mut node = vec![0usize; m];
    loop {
        let w = node.iter().zip(alpha).fold(Scalar::one(), |w, (&j, &a)| w * &lag[j][a]);
        if !w.is_zero() {
            acc += w * f(&node)?;
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(acc);
            }
            node[pos] += 1;
            if node[pos] <= d {
                break;
            }
            node[pos] = 0;
            pos += 1;
        }
    }
}

/// `d^alpha / dt^alpha vol(A + t_1 C_1 + ... + t_m C_m)` at `t = 0`, obtained
/// by exact interpolation of the volume polynomial.
pub fn coefficient_extraction(a: &Polytope, cs: &[Polytope], alpha: &[usize]) -> Result<Scalar> {
    let n = a.dim();
    if cs.len() != alpha.len() {
        return Err(Error::LengthMismatch { expected: cs.len(), found: alpha.len() });
    }
    if let Some(c) = cs.iter().find(|c| c.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: c.dim() });
    }
    let total: usize = alpha.iter().sum();
    if total > n {
        return Err(Error::Degree(format!("multi-index of order {total} exceeds dimension {n}")));
    }
    let coeff = interpolate_coefficient(n, alpha, |t| {
        let mut sum = a.clone();
        for (c, &ti) in cs.iter().zip(t) {
            if ti > 0 {
                sum = sum.minkowski_sum(&c.scale(&int(ti as i64))?)?;
            }
        }
        Ok(sum.volume())
    })?;
    let alpha_fact = alpha.iter().fold(num_bigint::BigInt::one(), |acc, &a| acc * factorial(a));
    Ok(coeff * Scalar::from_integer(alpha_fact))
}

/// `(1/n) d/dt phi(A + tC)` at `t = 0`, by exact interpolation in `t`.
pub fn derivative_along(phi: &MixedVolumeValuation, a: &Polytope, c: &Polytope) -> Result<Coeff> {
    let n = phi.n;
    let mut re = Scalar::zero();
    let mut im = Scalar::zero();
    for (coef, g) in &phi.terms {
        let d = interpolate_coefficient(g.degree.max(1), &[1], |t| g.evaluate(&a.minkowski_sum(&c.scale(&int(t[0] as i64))?)?))?;
        re += &coef.re * &d;
        im += &coef.im * &d;
    }
    let inv_n = Scalar::new(1.into(), (n as i64).into());
    Ok(Complex::new(re * &inv_n, im * inv_n))
}
