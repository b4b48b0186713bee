//! Extended-real-valued functions `f: R^n → (−∞, +∞]`, domain sampling and
//! calmness estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::convex_bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::gauge::Gauge;
use crate::linalg::{dist2, dot, norm2, Covector, ExtReal, PNorm, Vector};
use crate::lp::{self, LinearProgram, LpOptions, LpOutcome};

/// Membership tolerance for polytope and half-space regions.
pub const REGION_TOL: f64 = 1e-13;
/// Coordinate tolerance for point-cloud and table key matching.
pub const KEY_TOL: f64 = 1e-12;
/// Hit-and-run steps between consecutive samples.
pub const HIT_AND_RUN_STEPS: usize = 64;
/// Consecutive rejected draws after which a domain is declared empty.
pub const MAX_FAILED_TRIALS: usize = 60;

/// A nonempty subset Ω of R^n.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    PointCloud(Vec<Vector>),
    /// Convex hull of the listed vertices.
    VPolytope(Vec<Vector>),
    /// `{x : ⟨a_i, x⟩ ≤ b_i for all rows}`. Emptiness is detected at use.
    HalfspaceIntersection { rows: Vec<(Covector, f64)>, dim: usize },
    Union(Vec<Region>),
}

impl Region {
    pub fn point_cloud(points: Vec<Vector>) -> Result<Self> {
        same_dims(&points, "point cloud")?;
        Ok(Region::PointCloud(points))
    }

    pub fn vpolytope(vertices: Vec<Vector>) -> Result<Self> {
        same_dims(&vertices, "polytope region")?;
        Ok(Region::VPolytope(vertices))
    }

    pub fn halfspaces(rows: Vec<(Covector, f64)>, dim: usize) -> Result<Self> {
        for (a, b) in &rows {
            check_dim(dim, a.dim())?;
            if !b.is_finite() {
                return Err(Error::InvalidInput("half-space offset must be finite".into()));
            }
        }
        Ok(Region::HalfspaceIntersection { rows, dim })
    }

    pub fn union(parts: Vec<Region>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("union needs at least one region".into()))?;
        let n = first.dim();
        for p in &parts {
            check_dim(n, p.dim())?;
        }
        Ok(Region::Union(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::PointCloud(p) | Region::VPolytope(p) => p[0].dim(),
            Region::HalfspaceIntersection { dim, .. } => *dim,
            Region::Union(parts) => parts[0].dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(match self {
            Region::PointCloud(points) => points.iter().any(|p| keys_match(p, x)),
            Region::VPolytope(vertices) => {
                ConvexBody::VPolytope { vertices: vertices.clone() }.contains_scaled(x, 1.0, REGION_TOL)?
            }
            Region::HalfspaceIntersection { rows, .. } => {
                rows.iter().all(|(a, b)| a.pair(x) <= b + REGION_TOL)
            }
            Region::Union(parts) => {
                for p in parts {
                    if p.contains(x)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// The points of a finite region (point clouds and unions of them).
    pub fn finite_points(&self) -> Option<Vec<Vector>> {
        match self {
            Region::PointCloud(p) => Some(p.clone()),
            Region::Union(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.finite_points()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    fn sample(&self, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        match self {
            Region::PointCloud(points) => Ok((0..k).map(|i| points[i % points.len()].to_vec()).collect()),
            Region::VPolytope(vertices) => Ok((0..k).map(|_| random_convex_combination(vertices, rng)).collect()),
            Region::HalfspaceIntersection { rows, dim } => hit_and_run(rows, *dim, k, rng),
            Region::Union(parts) => {
                let mut streams = Vec::new();
                for p in parts {
                    let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
                    match p.sample(k.div_ceil(parts.len()), &mut sub) {
                        Ok(s) => streams.push(s),
                        Err(Error::DomainEmpty(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                if streams.is_empty() {
                    return Err(Error::DomainEmpty("every part of the union is empty".into()));
                }
                let mut out = Vec::with_capacity(k);
                let mut i = 0;
                while out.len() < k {
                    let s = &streams[i % streams.len()];
                    out.push(s[(i / streams.len()) % s.len()].clone());
                    i += 1;
                }
                Ok(out)
            }
        }
    }
}

fn same_dims(points: &[Vector], what: &str) -> Result<()> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be nonempty")))?;
    for p in points {
        check_dim(first.dim(), p.dim())?;
    }
    Ok(())
}

fn keys_match(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= KEY_TOL)
}

fn random_convex_combination(vertices: &[Vector], rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Normalized exponentials are uniform on the simplex of weights.
    let w: Vec<f64> = vertices.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; vertices[0].dim()];
    for (wi, v) in w.iter().zip(vertices) {
        for (xc, vc) in x.iter_mut().zip(v.iter()) {
            *xc += wi / total * vc;
        }
    }
    x
}

fn hit_and_run(rows: &[(Covector, f64)], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    // Unbounded intersections are sampled inside a box scaled to the offsets.
    let scale = rows
        .iter()
        .map(|(a, b)| b.abs() / a.norm().max(1e-300))
        .fold(0.0, f64::max);
    let half_width = 10.0 * (1.0 + scale);
    let mut all: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, b)| (a.to_vec(), *b)).collect();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        all.push((e.clone(), half_width));
        e[i] = -1.0;
        all.push((e, half_width));
    }
    let (mut x, margin) = interior_point(&all, dim)?;
    if margin <= 1e-12 {
        // No interior: the chain cannot move, every sample is the feasible point.
        return Ok(vec![x; k]);
    }
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        for _ in 0..HIT_AND_RUN_STEPS {
            let d: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for (a, b) in &all {
                let ad = dot(a, &d);
                let slack = b - dot(a, &x);
                if ad > 1e-15 {
                    hi = hi.min(slack / ad);
                } else if ad < -1e-15 {
                    lo = lo.max(slack / ad);
                }
            }
            if lo < hi && lo.is_finite() && hi.is_finite() {
                let t = rng.gen_range(lo..=hi);
                for (xc, dc) in x.iter_mut().zip(&d) {
                    *xc += t * dc;
                }
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// A point maximizing the inscribed margin of `{⟨a_i, y⟩ ≤ b_i}`, capped at 1.
fn interior_point(rows: &[(Vec<f64>, f64)], dim: usize) -> Result<(Vec<f64>, f64)> {
    // Variables (y⁺, y⁻, s) ≥ 0, maximize s.
    let nv = 2 * dim + 1;
    let mut le: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = vec![0.0; nv];
            for i in 0..dim {
                r[i] = a[i];
                r[dim + i] = -a[i];
            }
            r[2 * dim] = norm2(a);
            (r, *b)
        })
        .collect();
    let mut cap = vec![0.0; nv];
    cap[2 * dim] = 1.0;
    le.push((cap, 1.0));
    let mut cost = vec![0.0; nv];
    cost[2 * dim] = -1.0;
    let lp = LinearProgram { cost, eq: vec![], le };
    let opts = LpOptions { infeasibility_tol: 1e-10, ..LpOptions::default() };
    match lp::solve(&lp, &opts)? {
        LpOutcome::Optimal { z, .. } => {
            let y = (0..dim).map(|i| z[i] - z[dim + i]).collect();
            Ok((y, z[2 * dim]))
        }
        LpOutcome::Infeasible { .. } => Err(Error::DomainEmpty("half-space intersection is empty".into())),
        LpOutcome::Unbounded => Err(Error::Internal("interior-point LP unbounded".into())),
    }
}

/// An extended-real-valued function on R^n.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarField {
    /// `δ_Ω`: 0 on the region, +∞ elsewhere.
    Indicator(Region),
    /// Finite values at listed points, +∞ elsewhere.
    Table(Vec<(Vector, f64)>),
    /// `J + δ_Ω`.
    Perturbed { j: Box<ScalarField>, region: Region },
    Norm { p: PNorm, dim: usize },
    Gauge(Gauge),
    Constant { value: f64, dim: usize },
    Sum(Vec<ScalarField>),
    /// `y ↦ inner(y − center)`, or `inner(center − y)` when `reflect` is set.
    ShiftedArg { inner: Box<ScalarField>, center: Vector, reflect: bool },
}

impl ScalarField {
    pub fn indicator(region: Region) -> Self {
        ScalarField::Indicator(region)
    }

    pub fn table(entries: Vec<(Vector, f64)>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidInput("table must have at least one entry".into()))?;
        let n = first.0.dim();
        for (p, v) in &entries {
            check_dim(n, p.dim())?;
            if !v.is_finite() {
                return Err(Error::InvalidInput("table values must be finite".into()));
            }
        }
        Ok(ScalarField::Table(entries))
    }

    pub fn perturbed(j: ScalarField, region: Region) -> Result<Self> {
        check_dim(region.dim(), j.dim())?;
        Ok(ScalarField::Perturbed { j: Box::new(j), region })
    }

    pub fn constant(value: f64, dim: usize) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidInput("constant field must be finite".into()));
        }
        Ok(ScalarField::Constant { value, dim })
    }

    pub fn sum(parts: Vec<ScalarField>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("sum needs at least one term".into()))?;
        let n = first.dim();
        for p in &parts {
            check_dim(n, p.dim())?;
        }
        Ok(ScalarField::Sum(parts))
    }

    pub fn shifted(inner: ScalarField, center: Vector, reflect: bool) -> Result<Self> {
        check_dim(inner.dim(), center.dim())?;
        Ok(ScalarField::ShiftedArg { inner: Box::new(inner), center, reflect })
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarField::Indicator(r) => r.dim(),
            ScalarField::Table(e) => e[0].0.dim(),
            ScalarField::Perturbed { region, .. } => region.dim(),
            ScalarField::Norm { dim, .. } | ScalarField::Constant { dim, .. } => *dim,
            ScalarField::Gauge(g) => g.dim(),
            ScalarField::Sum(parts) => parts[0].dim(),
            ScalarField::ShiftedArg { center, .. } => center.dim(),
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<ExtReal> {
        check_dim(self.dim(), x.dim())?;
        self.eval_raw(x)
    }

    pub(crate) fn eval_raw(&self, x: &[f64]) -> Result<ExtReal> {
        Ok(match self {
            ScalarField::Indicator(r) => {
                if r.contains(x)? {
                    ExtReal::ZERO
                } else {
                    ExtReal::PlusInfinity
                }
            }
            ScalarField::Table(entries) => entries
                .iter()
                .find(|(p, _)| keys_match(p, x))
                .map_or(ExtReal::PlusInfinity, |(_, v)| ExtReal::Finite(*v)),
            ScalarField::Perturbed { j, region } => {
                if region.contains(x)? {
                    j.eval_raw(x)?
                } else {
                    ExtReal::PlusInfinity
                }
            }
            ScalarField::Norm { p, .. } => ExtReal::Finite(p.eval(x)),
            ScalarField::Gauge(g) => g.eval_raw(x)?,
            ScalarField::Constant { value, .. } => ExtReal::Finite(*value),
            ScalarField::Sum(parts) => {
                let mut acc = ExtReal::ZERO;
                for p in parts {
                    acc = acc + p.eval_raw(x)?;
                    if !acc.is_finite() {
                        break;
                    }
                }
                acc
            }
            ScalarField::ShiftedArg { inner, center, reflect } => {
                let y: Vec<f64> = if *reflect {
                    center.iter().zip(x).map(|(c, v)| c - v).collect()
                } else {
                    x.iter().zip(center.iter()).map(|(v, c)| v - c).collect()
                };
                inner.eval_raw(&y)?
            }
        })
    }

    /// Gauge representation when the field is a gauge or a norm.
    pub fn as_gauge(&self) -> Option<Gauge> {
        match self {
            ScalarField::Gauge(g) => Some(g.clone()),
            ScalarField::Norm { p, dim } => Some(Gauge::new(ConvexBody::NormBall { p: *p, radius: 1.0, dim: *dim })),
            _ => None,
        }
    }

    /// The finite effective domain with its values, when dom f is finite.
    pub fn finite_domain(&self) -> Result<Option<Vec<(Vector, f64)>>> {
        let candidates: Vec<Vector> = match self {
            ScalarField::Table(entries) => entries.iter().map(|(p, _)| p.clone()).collect(),
            ScalarField::Indicator(r) => match r.finite_points() {
                Some(p) => p,
                None => return Ok(None),
            },
            ScalarField::Perturbed { j, region } => match region.finite_points() {
                Some(p) => p,
                None => match j.finite_domain()? {
                    Some(d) => d.into_iter().map(|(p, _)| p).collect(),
                    None => return Ok(None),
                },
            },
            ScalarField::Sum(parts) => {
                let mut found = None;
                for p in parts {
                    if let Some(d) = p.finite_domain()? {
                        found = Some(d.into_iter().map(|(p, _)| p).collect());
                        break;
                    }
                }
                match found {
                    Some(f) => f,
                    None => return Ok(None),
                }
            }
            _ => return Ok(None),
        };
        let mut out: Vec<(Vector, f64)> = Vec::with_capacity(candidates.len());
        for p in candidates {
            if out.iter().any(|(q, _)| keys_match(q, &p)) {
                continue;
            }
            if let ExtReal::Finite(v) = self.eval_raw(&p)? {
                out.push((p, v));
            }
        }
        Ok(Some(out))
    }

    fn is_plain_indicator(&self) -> bool {
        matches!(self, ScalarField::Indicator(_))
    }

    /// Raw proposals whose finite-valued members sample dom f.
    fn propose(&self, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        match self {
            ScalarField::Indicator(r) | ScalarField::Perturbed { region: r, .. } => r.sample(k, rng),
            ScalarField::Table(entries) => Ok((0..k).map(|i| entries[i % entries.len()].0.to_vec()).collect()),
            ScalarField::Norm { .. } | ScalarField::Constant { .. } => {
                Ok((0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect())
            }
            ScalarField::Gauge(g) => Ok((0..k)
                .map(|_| {
                    let t: f64 = rng.gen_range(0.0..=1.0);
                    let u = match g.body().polytope_vertices() {
                        Some(vs) => {
                            let vs: Vec<Vector> = vs.into_iter().map(Vector::from_raw).collect();
                            random_convex_combination(&vs, rng)
                        }
                        None => {
                            let d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                            let s = g.body().body_norm() * rng.gen_range(0.0..=1.0f64) / norm2(&d).max(1e-300);
                            d.iter().map(|c| c * s).collect()
                        }
                    };
                    u.iter().map(|c| c * t).collect()
                })
                .collect()),
            ScalarField::Sum(parts) => {
                let restrictive = parts
                    .iter()
                    .find(|p| !matches!(p, ScalarField::Norm { .. } | ScalarField::Constant { .. }))
                    .unwrap_or(&parts[0]);
                restrictive.propose(k, rng)
            }
            ScalarField::ShiftedArg { inner, center, reflect } => Ok(inner
                .propose(k, rng)?
                .into_iter()
                .map(|y| {
                    if *reflect {
                        center.iter().zip(&y).map(|(c, v)| c - v).collect()
                    } else {
                        y.iter().zip(center.iter()).map(|(v, c)| v + c).collect()
                    }
                })
                .collect()),
        }
    }
}

/// Anything that can be evaluated pointwise as an extended-real function.
pub trait Evaluate {
    fn dim(&self) -> usize;
    /// Value at `x`; callers guarantee `x.len() == self.dim()`.
    fn eval_at(&self, x: &[f64]) -> Result<ExtReal>;
}

impl Evaluate for ScalarField {
    fn dim(&self) -> usize {
        ScalarField::dim(self)
    }

    fn eval_at(&self, x: &[f64]) -> Result<ExtReal> {
        self.eval_raw(x)
    }
}

/// A closure viewed as a field, mainly for tests and one-off predicates.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> ExtReal> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> ExtReal> Evaluate for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_at(&self, x: &[f64]) -> Result<ExtReal> {
        Ok((self.f)(x))
    }
}

/// `k` points of dom f, deterministic per seed; the samples for `k` are a
/// prefix of the samples for any larger `k`.
pub fn domain_sample(f: &ScalarField, k: usize, seed: u64) -> Result<Vec<Vector>> {
    if k == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    let mut failures = 0;
    while out.len() < k {
        let batch = f.propose(k - out.len(), &mut rng)?;
        let mut accepted = false;
        for x in batch {
            if f.eval_raw(&x)?.is_finite() {
                out.push(Vector::from_raw(x));
                accepted = true;
                failures = 0;
            } else {
                failures += 1;
                if failures >= MAX_FAILED_TRIALS {
                    return Err(Error::DomainEmpty(format!(
                        "{MAX_FAILED_TRIALS} consecutive proposals fell outside the domain"
                    )));
                }
            }
        }
        if !accepted && failures == 0 {
            break;
        }
    }
    out.truncate(k);
    Ok(out)
}

/// Sampled center-Lipschitz constant of a field at a point of its domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalmnessEstimate {
    pub ell: f64,
    pub sample_count: usize,
    /// The estimate reached `cap` and was clamped.
    pub saturated: bool,
}

/// Lower estimate of ℓ in `|f(x) − f(x̄)| ≤ ℓ‖x − x̄‖` over dom f.
/// Indicators are calm with ℓ = 0 on their domain and return that exactly.
pub fn calm_constant(f: &ScalarField, xbar: &Vector, k: usize, seed: u64, cap: f64) -> Result<CalmnessEstimate> {
    let fbar = anchor_value(f, xbar)?;
    if f.is_plain_indicator() {
        return Ok(CalmnessEstimate { ell: 0.0, sample_count: 0, saturated: false });
    }
    let samples = domain_sample(f, k, seed)?;
    Ok(calm_from_samples(f, xbar, fbar, &samples, cap)?)
}

/// As [`calm_constant`] but over an explicit set D, using only the points of
/// D where f is finite.
pub fn calm_constant_over(
    f: &ScalarField,
    domain: &Region,
    xbar: &Vector,
    k: usize,
    seed: u64,
    cap: f64,
) -> Result<CalmnessEstimate> {
    check_dim(f.dim(), domain.dim())?;
    let fbar = anchor_value(f, xbar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vector> = domain
        .sample(k, &mut rng)?
        .into_iter()
        .map(Vector::from_raw)
        .collect();
    calm_from_samples(f, xbar, fbar, &samples, cap)
}

fn anchor_value(f: &ScalarField, xbar: &Vector) -> Result<f64> {
    check_dim(f.dim(), xbar.dim())?;
    f.eval_raw(xbar)?
        .finite()
        .ok_or_else(|| Error::Precondition("anchor point lies outside dom f".into()))
}

fn calm_from_samples(f: &ScalarField, xbar: &[f64], fbar: f64, samples: &[Vector], cap: f64) -> Result<CalmnessEstimate> {
    if !(cap > 0.0) {
        return Err(Error::InvalidInput(format!("cap must be positive, got {cap}")));
    }
    let mut ell: f64 = 0.0;
    for x in samples {
        let d = dist2(x, xbar);
        if d <= KEY_TOL {
            continue;
        }
        if let ExtReal::Finite(v) = f.eval_raw(x)? {
            ell = ell.max((v - fbar).abs() / d);
        }
    }
    let saturated = ell >= cap;
    Ok(CalmnessEstimate {
        ell: if saturated { cap } else { ell },
        sample_count: samples.len(),
        saturated,
    })
}
