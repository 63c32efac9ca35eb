//! Seeded verification campaigns for the mixed-volume inequalities.
//!
//! Every instance draws its bodies from its own ChaCha stream `(seed, index)`,
//! so reports do not depend on the thread count or evaluation order.

use crate::error::{Error, Result};
use crate::higher_rank::{graph_embedding, rank_one_reduction, tilde_mixed_volume, zero_graph_embedding, BodyTuple, Partition};
use crate::linalg;
use crate::mixed::mixed_volume;
use crate::polytope::{centered_zonotope, convex_hull, random_nonzero_point, random_point, BodyJson, Point, Polytope};
use crate::scalar::{format_scalar, int, to_f64, Scalar};
use crate::spherical::{hr_form, make_primitive, SmoothBodySupport, Sphere, SphereField};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::time::Instant;

/// Relative threshold of the near-equality bucket.
pub const NEAR_EQUALITY: f64 = 1e-6;

/// Tolerance of the floating-point Hodge-Riemann sign check.
pub const HR_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "campaign", rename_all = "lowercase")]
pub enum Campaign {
    /// `V(A,B,C..)^2 >= V(A,A,C..) V(B,B,C..)`, `n` in 2..=4.
    Af { n: usize },
    /// `(-1)^m det(v_ij) <= 0` and `v_ij = v_ji` at `n = 3`.
    Daf { m: usize },
    /// The `m = 2` form `v_12^2 >= v_11 v_22` for `n` in 2..=3.
    Daf2 { n: usize },
    /// `V~(A,-A,C..) <= V~(A,A,C..)` at `n = 3`.
    Dmv,
    /// Graphing-map inequality in `W x R^{n-2}`, `n` in 3..=4.
    Graphing { n: usize },
    /// Sign of the Hodge-Riemann form on primitive band-limited fields.
    Hr { band: usize },
}

impl Campaign {
    pub fn name(&self) -> &'static str {
        match self {
            Campaign::Af { .. } => "af",
            Campaign::Daf { .. } => "daf",
            Campaign::Daf2 { .. } => "daf2",
            Campaign::Dmv => "dmv",
            Campaign::Graphing { .. } => "graphing",
            Campaign::Hr { .. } => "hr",
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            Campaign::Af { n } => 0x100 + *n as u64,
            Campaign::Daf { m } => 0x200 + *m as u64,
            Campaign::Daf2 { n } => 0x300 + *n as u64,
            Campaign::Dmv => 0x400,
            Campaign::Graphing { n } => 0x500 + *n as u64,
            Campaign::Hr { band } => 0x600 + *band as u64,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Campaign::Af { n } => (2..=4).contains(&n),
            Campaign::Daf { m } => (2..=3).contains(&m),
            Campaign::Daf2 { n } => (2..=3).contains(&n),
            Campaign::Dmv => true,
            Campaign::Graphing { n } => (3..=4).contains(&n),
            Campaign::Hr { band } => (2..=16).contains(&band),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSize(format!("unsupported parameters for campaign {self:?}")))
        }
    }
}

/// Exact slack when available, always with a decimal rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub n: usize,
    pub inputs: Value,
    pub lhs: Slack,
    pub rhs: Slack,
    /// `lhs - rhs`, oriented so that `slack >= 0` means the inequality holds.
    pub slack: Slack,
    pub scale: f64,
    pub near_equality: bool,
    pub pass: bool,
    #[serde(skip)]
    exact_slack: Option<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    #[serde(flatten)]
    pub campaign: Campaign,
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub violations: usize,
    pub near_equality: usize,
    pub min_slack: Option<Slack>,
    pub median_slack: Option<Slack>,
    pub worst: Option<Instance>,
    pub failing: Vec<Instance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<Value>,
    pub runtime_ms: u64,
}

impl CampaignReport {
    /// 0 when every instance passes, 2 when a violation was found.
    pub fn exit_code(&self) -> i32 {
        if self.violations == 0 {
            0
        } else {
            2
        }
    }

    /// JSON without the wall-clock field; identical for identical inputs.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("runtime_ms");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

fn exact(v: &Scalar) -> Slack {
    Slack { exact: Some(format_scalar(v)), decimal: to_f64(v) }
}

fn approx(v: f64) -> Slack {
    Slack { exact: None, decimal: v }
}

fn exact_instance(index: usize, n: usize, inputs: Value, lhs: Scalar, rhs: Scalar, scale: f64) -> Instance {
    let slack = &lhs - &rhs;
    let near = slack.abs() <= Scalar::from_float(NEAR_EQUALITY * scale.max(f64::MIN_POSITIVE)).unwrap_or_else(Scalar::zero);
    Instance {
        index,
        n,
        inputs,
        lhs: exact(&lhs),
        rhs: exact(&rhs),
        slack: exact(&slack),
        scale,
        near_equality: near,
        pass: !slack.is_negative(),
        exact_slack: Some(slack),
    }
}

fn instance_rng(seed: u64, campaign: &Campaign, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((campaign.stream_tag() << 32) | index as u64);
    rng
}

/// Segment, triangle or tetrahedron (up to `n + 1` random points).
fn small_body<R: Rng>(rng: &mut R, n: usize) -> Result<Polytope> {
    let bound = int(4);
    let k = rng.gen_range(2..=(n + 1).min(4));
    let pts: Vec<Point> = (0..k).map(|_| random_point(rng, n, &bound)).collect();
    convex_hull(&pts)
}

/// Centered zonotope with one or two generators.
fn symmetric_body<R: Rng>(rng: &mut R, n: usize) -> Result<Polytope> {
    let bound = int(4);
    let k = rng.gen_range(1..=2);
    let gens: Vec<Point> = (0..k).map(|_| random_nonzero_point(rng, n, &bound)).collect();
    centered_zonotope(&gens)
}

/// Hull of a few random points; used where bodies stay in low dimension.
fn general_body<R: Rng>(rng: &mut R, n: usize) -> Result<Polytope> {
    let bound = int(4);
    let k = rng.gen_range(n + 1..=n + 3);
    let pts: Vec<Point> = (0..k).map(|_| random_point(rng, n, &bound)).collect();
    convex_hull(&pts)
}

fn tuple<R: Rng>(rng: &mut R, n: usize, symmetric: bool) -> Result<BodyTuple> {
    let bodies = (0..n - 1).map(|_| if symmetric { symmetric_body(rng, n) } else { small_body(rng, n) }).collect::<Result<_>>()?;
    Ok(BodyTuple::new(bodies))
}

fn bodies_json(bodies: &[Polytope]) -> Value {
    serde_json::to_value(bodies.iter().map(BodyJson::from_polytope).collect::<Vec<_>>()).expect("bodies serialize")
}

fn tuples_json(tuples: &[(&str, &BodyTuple)]) -> Value {
    Value::Object(tuples.iter().map(|(k, t)| (k.to_string(), bodies_json(&t.bodies))).collect())
}

fn points_json(pts: &[Point]) -> Value {
    json!(pts.iter().map(|p| p.coords().iter().map(format_scalar).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// `V~(A_i, -A_j, C_1, ..., C_{n-2})` for the ones-partition.
fn v_tilde(a: &BodyTuple, b: &BodyTuple, cs: &[BodyTuple]) -> Result<Scalar> {
    let n = a.bodies[0].dim();
    let p = Partition::ones(n)?;
    let mut tuples = vec![a.clone(), b.reflect()];
    tuples.extend(cs.iter().cloned());
    let v = tilde_mixed_volume(&p, &tuples)?;
    if n == 2 {
        let r = rank_one_reduction(&a.bodies, &b.reflect().bodies)?;
        if r != v {
            return Err(Error::CrossRoute(format!("rank-one reduction gives {r}, cokernel model gives {v}")));
        }
    }
    Ok(v)
}

fn determinant(m: &[Vec<Scalar>]) -> Scalar {
    let mut a = m.to_vec();
    linalg::determinant(&mut a)
}

fn run_af(rng: &mut ChaCha8Rng, index: usize, n: usize) -> Result<Instance> {
    let a = general_body(rng, n)?;
    let b = general_body(rng, n)?;
    let cs: Vec<Polytope> = (0..n - 2).map(|_| general_body(rng, n)).collect::<Result<_>>()?;
    let mv = |x: &Polytope, y: &Polytope| {
        let mut v = vec![x.clone(), y.clone()];
        v.extend(cs.iter().cloned());
        mixed_volume(&v)
    };
    let ab = mv(&a, &b)?;
    let aa = mv(&a, &a)?;
    let bb = mv(&b, &b)?;
    let lhs = &ab * &ab;
    let rhs = &aa * &bb;
    let scale = to_f64(&lhs).abs().max(to_f64(&rhs).abs());
    let inputs = json!({"A": bodies_json(&[a]), "B": bodies_json(&[b]), "C": bodies_json(&cs)});
    Ok(exact_instance(index, n, inputs, lhs, rhs, scale))
}

fn run_daf(rng: &mut ChaCha8Rng, index: usize, m: usize) -> Result<Instance> {
    let n = 3;
    let mut a: Vec<BodyTuple> = (0..m - 1).map(|_| tuple(rng, n, false)).collect::<Result<_>>()?;
    a.push(tuple(rng, n, true)?);
    let c = vec![tuple(rng, n, true)?];
    let mut v = vec![vec![Scalar::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            v[i][j] = v_tilde(&a[i], &a[j], &c)?;
        }
    }
    let symmetric = (0..m).all(|i| (0..m).all(|j| v[i][j] == v[j][i]));
    let det = determinant(&v);
    // (-1)^m det <= 0, written as lhs - rhs >= 0 with rhs = 0.
    let lhs = if m.is_multiple_of(2) { -det } else { det };
    let rhs = Scalar::zero();
    let scale = v.iter().flatten().map(|x| to_f64(x).abs()).fold(0.0, f64::max).powi(m as i32);
    let names: Vec<String> = (1..=m).map(|i| format!("A{i}")).collect();
    let mut pairs: Vec<(&str, &BodyTuple)> = names.iter().map(String::as_str).zip(a.iter()).collect();
    pairs.push(("C1", &c[0]));
    let matrix: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(format_scalar).collect()).collect();
    let inputs = json!({"tuples": tuples_json(&pairs), "v": matrix, "v_symmetric": symmetric});
    let mut inst = exact_instance(index, n, inputs, lhs, rhs, scale);
    inst.pass &= symmetric;
    Ok(inst)
}

fn run_daf2(rng: &mut ChaCha8Rng, index: usize, n: usize) -> Result<Instance> {
    let a1 = tuple(rng, n, false)?;
    let a2 = tuple(rng, n, true)?;
    let cs: Vec<BodyTuple> = (0..n - 2).map(|_| tuple(rng, n, true)).collect::<Result<_>>()?;
    let v12 = v_tilde(&a1, &a2, &cs)?;
    let v11 = v_tilde(&a1, &a1, &cs)?;
    let v22 = v_tilde(&a2, &a2, &cs)?;
    let lhs = &v12 * &v12;
    let rhs = &v11 * &v22;
    let scale = to_f64(&lhs).abs().max(to_f64(&rhs).abs());
    let mut pairs = vec![("A1", &a1), ("A2", &a2)];
    let names: Vec<String> = (1..=cs.len()).map(|i| format!("C{i}")).collect();
    pairs.extend(names.iter().map(String::as_str).zip(cs.iter()));
    Ok(exact_instance(index, n, json!({"tuples": tuples_json(&pairs)}), lhs, rhs, scale))
}

fn run_dmv(rng: &mut ChaCha8Rng, index: usize) -> Result<Instance> {
    let n = 3;
    let a = tuple(rng, n, false)?;
    let c = vec![tuple(rng, n, true)?];
    let p = Partition::ones(n)?;
    let plus = tilde_mixed_volume(&p, &[a.clone(), a.clone(), c[0].clone()])?;
    let minus = v_tilde(&a, &a, &c)?;
    let scale = to_f64(&plus).abs();
    let inputs = json!({"tuples": tuples_json(&[("A", &a), ("C1", &c[0])])});
    Ok(exact_instance(index, n, inputs, plus, minus, scale))
}

fn run_graphing(rng: &mut ChaCha8Rng, index: usize, n: usize) -> Result<Instance> {
    let a: Vec<Polytope> = (0..n - 1).map(|_| small_body(rng, n)).collect::<Result<_>>()?;
    let b: Vec<Polytope> = (0..n - 1).map(|_| symmetric_body(rng, n)).collect::<Result<_>>()?;
    let xi: Vec<Point> = (0..n - 2).map(|_| random_point(rng, n, &int(2))).collect();
    let graph = graph_embedding(n, &xi)?;
    let flat = zero_graph_embedding(n, n - 2);
    let lift = |xs: &[Polytope], map: &crate::polytope::LinearMap| xs.iter().map(|x| x.apply_map(map)).collect::<Result<Vec<_>>>();
    let a0 = lift(&a, &flat)?;
    let b0 = lift(&b, &flat)?;
    let ag = lift(&a, &graph)?;
    let bg = lift(&b, &graph)?;
    let mv = |x: &[Polytope], y: &[Polytope]| {
        let mut v = x.to_vec();
        v.extend(y.iter().cloned());
        mixed_volume(&v)
    };
    let ab = mv(&a0, &bg)?;
    let aa = mv(&a0, &ag)?;
    let bb = mv(&b0, &bg)?;
    let lhs = &ab * &ab;
    let rhs = &aa * &bb;
    let scale = to_f64(&lhs).abs().max(to_f64(&rhs).abs());
    let inputs = json!({"A": bodies_json(&a), "B": bodies_json(&b), "xi": points_json(&xi)});
    Ok(exact_instance(index, n, inputs, lhs, rhs, scale))
}

fn run_hr(rng: &mut ChaCha8Rng, index: usize, sphere: &Sphere) -> Result<Instance> {
    let field_seed: u64 = rng.gen();
    let complex = rng.gen_bool(0.5);
    let c1_seed: u64 = rng.gen();
    let c2_seed: u64 = rng.gen();
    let c1 = SmoothBodySupport::random_ellipsoid(c1_seed);
    let c2 = SmoothBodySupport::random_ellipsoid(c2_seed);
    let b = SmoothBodySupport::ball(1.0)?;
    let f = SphereField::random(sphere, field_seed, sphere.band(), complex)?;
    let p = make_primitive(&f, [&c1, &c2], &b)?;
    let value = hr_form(&p, &p, &c1)?;
    let nonlinear = p.without_degree(1).norm();
    let inputs = json!({"field_seed": field_seed, "complex": complex, "c1_seed": c1_seed, "c2_seed": c2_seed, "band": sphere.band()});
    Ok(Instance {
        index,
        n: 3,
        inputs,
        lhs: approx(0.0),
        rhs: approx(value.re),
        slack: approx(-value.re),
        scale: nonlinear * nonlinear,
        near_equality: nonlinear < NEAR_EQUALITY,
        pass: value.re <= HR_TOLERANCE,
        exact_slack: None,
    })
}

/// Equality witness: a linear field gives a vanishing form.
fn hr_equality_witness(sphere: &Sphere, seed: u64) -> Result<f64> {
    let lin = SphereField::from_fn(sphere, |u| (u[0] - 2.0 * u[1] + 0.5 * u[2]).into());
    let c = SmoothBodySupport::random_ellipsoid(seed);
    Ok(hr_form(&lin, &lin, &c)?.norm())
}

fn slack_order(a: &Instance, b: &Instance) -> std::cmp::Ordering {
    match (&a.exact_slack, &b.exact_slack) {
        (Some(x), Some(y)) => x.cmp(y),
        _ => a.slack.decimal.total_cmp(&b.slack.decimal),
    }
    .then(a.index.cmp(&b.index))
}

/// Runs `count` instances of `campaign` on `threads` workers (0 = default).
pub fn run_campaign(campaign: Campaign, seed: u64, count: usize, threads: usize) -> Result<CampaignReport> {
    campaign.validate()?;
    let start = Instant::now();
    let sphere = match campaign {
        Campaign::Hr { band } => Some(Sphere::new(band)),
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Precondition(e.to_string()))?;
    let instances: Vec<Instance> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = instance_rng(seed, &campaign, i);
                match campaign {
                    Campaign::Af { n } => run_af(&mut rng, i, n),
                    Campaign::Daf { m } => run_daf(&mut rng, i, m),
                    Campaign::Daf2 { n } => run_daf2(&mut rng, i, n),
                    Campaign::Dmv => run_dmv(&mut rng, i),
                    Campaign::Graphing { n } => run_graphing(&mut rng, i, n),
                    Campaign::Hr { .. } => run_hr(&mut rng, i, sphere.as_ref().expect("sphere built for hr")),
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let extra = match &sphere {
        Some(s) => Some(json!({"equality_witness_residual": hr_equality_witness(s, seed)?})),
        None => None,
    };
    let mut sorted: Vec<&Instance> = instances.iter().collect();
    sorted.sort_by(|a, b| slack_order(a, b));
    let passed = instances.iter().filter(|i| i.pass).count();
    let worst = instances.iter().find(|i| !i.pass).or(sorted.first().copied()).cloned();
    Ok(CampaignReport {
        campaign,
        seed,
        count,
        passed,
        violations: count - passed,
        near_equality: instances.iter().filter(|i| i.near_equality).count(),
        min_slack: sorted.first().map(|i| i.slack.clone()),
        median_slack: sorted.get(sorted.len().saturating_sub(1) / 2).map(|i| i.slack.clone()),
        worst,
        failing: instances.iter().filter(|i| !i.pass).cloned().collect(),
        extra,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
