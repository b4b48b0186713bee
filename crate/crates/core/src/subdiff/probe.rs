//! Cached radial difference quotients of a field around a base point.
//!
//! A probe evaluates `g(x̄ + r_j d_i) − g(x̄)` once per plan point; every
//! covector query then only pays for pairings. Queries that land close to
//! their threshold trigger extra evaluations along refined directions.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{MembershipResult, SamplingPlan, Verdict, Witness};
use crate::error::{check_dim, Error, Result};
use crate::fields::Evaluate;
use crate::linalg::{dot, norm2, Covector, ExtReal, Vector};

/// Golden-section iterations per refined minimum.
const GOLDEN_ITERATIONS: usize = 24;
/// Local minima of the fine ring that may be refined per query.
const MAX_REFINED_MINIMA: usize = 8;
/// Starting points for pattern search in three and more dimensions.
const PATTERN_STARTS: usize = 3;
const PATTERN_MAX_EVALS: usize = 80;

#[derive(Clone, Debug)]
struct Sample {
    /// `g(x) − g(x̄)`, `+∞` when `g(x) = +∞`.
    delta: f64,
    /// `x − x̄` as actually realized in floating point.
    step: Vec<f64>,
    norm: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Kernel {
    Frechet,
    Holder(f64),
}

impl Kernel {
    fn key(self) -> u64 {
        match self {
            Kernel::Frechet => u64::MAX,
            Kernel::Holder(e) => e.to_bits(),
        }
    }

    fn weight(self, norm: f64) -> f64 {
        match self {
            Kernel::Frechet => 1.0 / norm,
            Kernel::Holder(e) => 1.0 / norm.powf(1.0 + e),
        }
    }

    fn quotient(self, s: &Sample, xstar: &[f64]) -> f64 {
        if !s.delta.is_finite() {
            return f64::INFINITY;
        }
        let num = s.delta - dot(xstar, &s.step);
        match self {
            Kernel::Frechet => num / s.norm,
            Kernel::Holder(e) => num / s.norm.powf(1.0 + e),
        }
    }
}

/// Smallest quotient found at the finest level, with its direction.
struct Worst {
    q: f64,
    dir: Vec<f64>,
    sample: Sample,
}

/// Samples of one ring with their pairing data stored per coordinate, and
/// the per-kernel weights `1/‖x − x̄‖^{1+e}` computed on first use. Infinite
/// increments stay infinite through the quotient arithmetic.
struct Ring {
    samples: Vec<Sample>,
    coords: Vec<Vec<f64>>,
    deltas: Vec<f64>,
    weights: Vec<(u64, Vec<f64>)>,
}

impl Ring {
    fn new(samples: Vec<Sample>, n: usize) -> Self {
        let coords = (0..n).map(|k| samples.iter().map(|s| s.step[k]).collect()).collect();
        let deltas = samples.iter().map(|s| s.delta).collect();
        Self { samples, coords, deltas, weights: Vec::new() }
    }

    fn weight_index(&mut self, kernel: Kernel) -> usize {
        let key = kernel.key();
        if let Some(i) = self.weights.iter().position(|(k, _)| *k == key) {
            return i;
        }
        let w = self.samples.iter().map(|s| kernel.weight(s.norm)).collect();
        self.weights.push((key, w));
        self.weights.len() - 1
    }

    fn quotients_into(&mut self, kernel: Kernel, xstar: &[f64], out: &mut Vec<f64>) {
        let wi = self.weight_index(kernel);
        out.clear();
        out.extend_from_slice(&self.deltas);
        for (c, col) in xstar.iter().zip(&self.coords) {
            for (o, s) in out.iter_mut().zip(col) {
                *o -= c * s;
            }
        }
        for (o, w) in out.iter_mut().zip(&self.weights[wi].1) {
            *o *= w;
        }
    }
}

impl Ring {
    /// Shrinks `r` to the largest radius along `u` at which every quotient
    /// of the ring stays at or above `thr`; each quotient is affine in the
    /// covector.
    fn radial_bound(&mut self, kernel: Kernel, u: &[f64], thr: f64, r: f64) -> f64 {
        let wi = self.weight_index(kernel);
        let w = &self.weights[wi].1;
        let mut r = r;
        for i in 0..self.deltas.len() {
            if !self.deltas[i].is_finite() {
                continue;
            }
            let a = self.deltas[i] * w[i];
            if a < thr {
                return 0.0;
            }
            let b = u.iter().zip(&self.coords).map(|(c, col)| c * col[i]).sum::<f64>() * w[i];
            if b > 0.0 {
                r = r.min((a - thr) / b);
            }
        }
        r
    }
}

pub struct Probe<'a> {
    g: &'a dyn Evaluate,
    xbar: Vec<f64>,
    gbar: f64,
    plan: SamplingPlan,
    radii: Vec<f64>,
    dirs: Vec<Vec<f64>>,
    levels: Vec<Option<Ring>>,
    fine_dirs: Vec<Vec<f64>>,
    fine: Option<Ring>,
    scratch: Vec<f64>,
}

impl<'a> Probe<'a> {
    pub fn new(g: &'a dyn Evaluate, xbar: &Vector, plan: &SamplingPlan) -> Result<Self> {
        check_dim(g.dim(), xbar.dim())?;
        plan.validate()?;
        let gbar = g
            .eval_at(xbar)?
            .finite()
            .ok_or_else(|| Error::Precondition("g is infinite at the base point".into()))?;
        let n = xbar.dim();
        let radii = (1..=plan.levels).map(|j| plan.radius(j)).collect();
        let dirs = directions(n, plan.directions, plan.seed);
        let fine_dirs = if n == 2 { directions(2, plan.directions * plan.refinement_factor.max(1), 0) } else { Vec::new() };
        Ok(Self {
            g,
            xbar: xbar.to_vec(),
            gbar,
            plan: plan.clone(),
            radii,
            dirs,
            levels: (0..plan.levels).map(|_| None).collect(),
            fine_dirs,
            fine: None,
            scratch: Vec::new(),
        })
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn base_value(&self) -> f64 {
        self.gbar
    }

    /// ε-Fréchet verdict for `x*`.
    pub fn frechet(&mut self, xstar: &Covector, epsilon: f64) -> Result<MembershipResult> {
        check_dim(self.xbar.len(), xstar.dim())?;
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let thr = -epsilon - self.plan.quotient_tolerance;
        let worst = self.worst_at_finest(xstar, Kernel::Frechet, thr)?;
        if worst.q >= thr {
            return Ok(MembershipResult::member(worst.q));
        }
        let last = self.radii.len() - 1;
        if last == 0 {
            return Ok(MembershipResult::undetermined(worst.q));
        }
        let prev = self.sample(last - 1, &worst.dir)?;
        if Kernel::Frechet.quotient(&prev, xstar) < thr {
            Ok(self.non_member(worst))
        } else {
            Ok(MembershipResult::undetermined(worst.q))
        }
    }

    /// s-Hölder verdict for `x*` with lower bound `-sigma_cap`.
    pub fn holder(&mut self, xstar: &Covector, s: f64, sigma_cap: f64) -> Result<MembershipResult> {
        check_dim(self.xbar.len(), xstar.dim())?;
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
        }
        if !(sigma_cap > 0.0) {
            return Err(Error::InvalidInput(format!("sigma cap must be positive, got {sigma_cap}")));
        }
        let kernel = Kernel::Holder(s);
        let thr = -sigma_cap;
        let worst = self.worst_at_finest(xstar, kernel, thr)?;
        let last = self.radii.len() - 1;
        if worst.q >= thr {
            let mut overall = worst.q;
            for j in 0..last {
                let mut buf = std::mem::take(&mut self.scratch);
                self.level(j)?.quotients_into(kernel, xstar, &mut buf);
                overall = overall.min(argmin(&buf).1);
                self.scratch = buf;
                if overall < thr {
                    return Ok(MembershipResult::undetermined(overall));
                }
            }
            return Ok(MembershipResult::member(overall));
        }
        if self.radii.len() >= 4 {
            let mut seq = Vec::with_capacity(4);
            for j in last - 3..last {
                seq.push(kernel.quotient(&self.sample(j, &worst.dir)?, xstar));
            }
            seq.push(worst.q);
            if seq.windows(2).all(|w| w[1] < w[0]) {
                return Ok(self.non_member(worst));
            }
        }
        Ok(MembershipResult::undetermined(worst.q))
    }

    /// Largest `r ≤ cap` such that `r·u` is an ε-Fréchet member. Needs a
    /// plan without refinement, where the member set is an intersection of
    /// half-spaces.
    pub fn frechet_radius(&mut self, u: &[f64], epsilon: f64, cap: f64) -> Result<f64> {
        let thr = -epsilon - self.plan.quotient_tolerance;
        self.radius(u, Kernel::Frechet, thr, cap, false)
    }

    /// Largest `r ≤ cap` such that `r·u` is an s-Hölder member; see
    /// [`Probe::frechet_radius`].
    pub fn holder_radius(&mut self, u: &[f64], s: f64, sigma_cap: f64, cap: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
        }
        self.radius(u, Kernel::Holder(s), -sigma_cap, cap, true)
    }

    fn radius(&mut self, u: &[f64], kernel: Kernel, thr: f64, cap: f64, all_levels: bool) -> Result<f64> {
        check_dim(self.xbar.len(), u.len())?;
        if self.plan.refine {
            return Err(Error::InvalidInput("radial bounds need a plan without refinement".into()));
        }
        if !(cap > 0.0) {
            return Err(Error::InvalidInput(format!("radius cap must be positive, got {cap}")));
        }
        let last = self.radii.len() - 1;
        let first = if all_levels { 0 } else { last };
        let mut r = cap;
        for j in first..=last {
            r = self.level(j)?.radial_bound(kernel, u, thr, r);
        }
        if self.xbar.len() == 2 {
            r = self.fine_ring()?.radial_bound(kernel, u, thr, r);
        }
        Ok(r.max(0.0))
    }

    fn non_member(&self, worst: Worst) -> MembershipResult {
        let x: Vec<f64> = self.xbar.iter().zip(&worst.sample.step).map(|(a, b)| a + b).collect();
        MembershipResult {
            verdict: Verdict::NonMember,
            witness: Some(Witness { x: Vector::from_raw(x), quotient: worst.q }),
            worst_quotient: worst.q,
        }
    }

    fn eval_step(&self, r: f64, dir: &[f64]) -> Result<Sample> {
        let x: Vec<f64> = self.xbar.iter().zip(dir).map(|(a, d)| a + r * d).collect();
        let step: Vec<f64> = x.iter().zip(&self.xbar).map(|(a, b)| a - b).collect();
        let norm = norm2(&step);
        let delta = match self.g.eval_at(&x)? {
            ExtReal::Finite(v) => v - self.gbar,
            ExtReal::PlusInfinity => f64::INFINITY,
        };
        Ok(Sample { delta, step, norm })
    }

    fn sample(&self, level: usize, dir: &[f64]) -> Result<Sample> {
        self.eval_step(self.radii[level], dir)
    }

    fn level(&mut self, j: usize) -> Result<&mut Ring> {
        if self.levels[j].is_none() {
            let r = self.radii[j];
            let samples = self.dirs.iter().map(|d| self.eval_step(r, d)).collect::<Result<Vec<_>>>()?;
            self.levels[j] = Some(Ring::new(samples, self.xbar.len()));
        }
        Ok(self.levels[j].as_mut().expect("filled above"))
    }

    fn fine_ring(&mut self) -> Result<&mut Ring> {
        if self.fine.is_none() {
            let r = *self.radii.last().expect("at least one level");
            let samples = self.fine_dirs.iter().map(|d| self.eval_step(r, d)).collect::<Result<Vec<_>>>()?;
            self.fine = Some(Ring::new(samples, self.xbar.len()));
        }
        Ok(self.fine.as_mut().expect("filled above"))
    }

    fn worst_at_finest(&mut self, xstar: &Covector, kernel: Kernel, thr: f64) -> Result<Worst> {
        let last = self.radii.len() - 1;
        let mut coarse = Vec::new();
        self.level(last)?.quotients_into(kernel, xstar, &mut coarse);
        let (ci, cq) = argmin(&coarse);
        let mut worst = Worst { q: cq, dir: self.dirs[ci].clone(), sample: self.levels[last].as_ref().unwrap().samples[ci].clone() };
        match self.xbar.len() {
            1 => {}
            2 => self.refine_ring(xstar, kernel, thr, &mut worst)?,
            _ => self.refine_pattern(xstar, kernel, thr, &coarse, &mut worst)?,
        }
        Ok(worst)
    }

    fn refine_ring(&mut self, xstar: &Covector, kernel: Kernel, thr: f64, worst: &mut Worst) -> Result<()> {
        let mut fine = std::mem::take(&mut self.scratch);
        self.fine_ring()?.quotients_into(kernel, xstar, &mut fine);
        let (fi, fq) = argmin(&fine);
        if fq < worst.q {
            worst.q = fq;
            worst.dir = self.fine_dirs[fi].clone();
            worst.sample = self.fine.as_ref().unwrap().samples[fi].clone();
        }
        if worst.q < thr || !self.plan.refine {
            self.scratch = fine;
            return Ok(());
        }
        // Between ring points the quotient can dip by at most about the
        // largest neighbour jump; only minima within that band can hide a
        // violation.
        let m = fine.len();
        let jump = (0..m)
            .map(|i| (fine[i], fine[(i + 1) % m]))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let band = thr + 2.0 * jump;
        let mut minima: Vec<usize> = (0..m)
            .filter(|&i| {
                let (l, r) = (fine[(i + m - 1) % m], fine[(i + 1) % m]);
                fine[i] < band && l.is_finite() && r.is_finite() && fine[i] <= l && fine[i] <= r
            })
            .collect();
        minima.sort_by(|&a, &b| fine[a].total_cmp(&fine[b]).then(a.cmp(&b)));
        minima.truncate(MAX_REFINED_MINIMA);
        self.scratch = fine;
        let step = TAU / m as f64;
        let r = *self.radii.last().unwrap();
        for i in minima {
            let theta0 = step * i as f64;
            let f = |t: f64| -> Result<(f64, Sample)> {
                let s = self.eval_step(r, &[t.cos(), t.sin()])?;
                Ok((kernel.quotient(&s, xstar), s))
            };
            let inv = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (theta0 - step, theta0 + step);
            let mut c = b - inv * (b - a);
            let mut d = a + inv * (b - a);
            let mut fc = f(c)?;
            let mut fd = f(d)?;
            let mut best = if fc.0 <= fd.0 { (c, fc.clone()) } else { (d, fd.clone()) };
            for _ in 0..GOLDEN_ITERATIONS {
                if fc.0 < fd.0 {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv * (b - a);
                    fc = f(c)?;
                    if fc.0 < best.1 .0 {
                        best = (c, fc.clone());
                    }
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv * (b - a);
                    fd = f(d)?;
                    if fd.0 < best.1 .0 {
                        best = (d, fd.clone());
                    }
                }
            }
            if best.1 .0 < worst.q {
                worst.q = best.1 .0;
                worst.dir = vec![best.0.cos(), best.0.sin()];
                worst.sample = best.1 .1;
            }
        }
        Ok(())
    }

    fn refine_pattern(&mut self, xstar: &Covector, kernel: Kernel, thr: f64, coarse: &[f64], worst: &mut Worst) -> Result<()> {
        if worst.q < thr || !self.plan.refine {
            return Ok(());
        }
        let n = self.xbar.len();
        let r = *self.radii.last().unwrap();
        let mut order: Vec<usize> = (0..coarse.len()).filter(|&i| coarse[i].is_finite()).collect();
        order.sort_by(|&a, &b| coarse[a].total_cmp(&coarse[b]).then(a.cmp(&b)));
        order.truncate(PATTERN_STARTS);
        let spacing = (4.0 * std::f64::consts::PI / self.dirs.len() as f64).sqrt();
        for start in order {
            let mut d = self.dirs[start].clone();
            let mut q = coarse[start];
            let mut h = spacing;
            let mut evals = 0;
            while h > 1e-7 && evals < PATTERN_MAX_EVALS {
                let basis = tangent_basis(&d);
                let mut improved = None;
                for t in &basis {
                    for sgn in [1.0, -1.0] {
                        let mut cand: Vec<f64> = (0..n).map(|k| d[k] + sgn * h * t[k]).collect();
                        let nc = norm2(&cand);
                        cand.iter_mut().for_each(|c| *c /= nc);
                        let s = self.eval_step(r, &cand)?;
                        evals += 1;
                        let cq = kernel.quotient(&s, xstar);
                        if cq < q && improved.as_ref().map_or(true, |(bq, _, _)| cq < *bq) {
                            improved = Some((cq, cand, s));
                        }
                    }
                }
                match improved {
                    Some((cq, cand, s)) => {
                        q = cq;
                        d = cand;
                        if q < worst.q {
                            worst.q = q;
                            worst.dir = d.clone();
                            worst.sample = s;
                        }
                    }
                    None => h *= 0.5,
                }
            }
        }
        Ok(())
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &q) in v.iter().enumerate() {
        if q < best.1 {
            best = (i, q);
        }
    }
    best
}

/// Orthonormal basis of the tangent space of the sphere at unit `d`.
fn tangent_basis(d: &[f64]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let mut v: Vec<f64> = e.iter().zip(d).map(|(a, b)| a - dot(&e, d) * b).collect();
        for b in &basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let nv = norm2(&v);
        if nv > 1e-8 {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Unit directions: ±1 in one dimension, equally spaced angles from 0 in two,
/// a seed-rotated Fibonacci sphere in three and seeded Gaussian directions above.
pub(crate) fn directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let a = TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let offset: f64 = rng.gen_range(0.0..TAU);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = offset + golden * i as f64;
                    vec![rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let nv = norm2(&v);
                    v.into_iter().map(|c| c / nv).collect()
                })
                .collect()
        }
    }
}
