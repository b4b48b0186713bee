use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::fixtures::{bundled_fixture, Fixture};
use super::{CheckRecord, CheckVerdict, Counterexample, Fault, GaugeOracle};
use crate::convex_bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{calm_constant, domain_sample, Region};
use crate::gauge::Gauge;
use crate::infconv::{minimal_time, InfConvolution};
use crate::linalg::{dot, norm2, Covector, ExtReal, Vector};
use crate::output::format_number as fmt;
use crate::subdiff::{
    alpha_factor, boundary_polygon_2d, rhs_frechet, rhs_holder, MembershipResult, Probe, SamplingPlan, Verdict,
};

/// Radii of sampled covectors.
pub const COVECTOR_RADII: [f64; 8] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
/// Largest Undetermined fraction a check may report and still pass.
pub const UNDETERMINED_CAP: f64 = 0.05;
/// Counterexamples kept per record; the disagreement count is exact.
pub const MAX_COUNTEREXAMPLES: usize = 10;
/// Radius cap of the boundary polygons.
pub const POLYGON_RADIUS_CAP: f64 = 3.0;
/// Sample size of the calmness estimate used by the ℓ < m gate.
pub const CALM_SAMPLES: usize = 1000;

const GAUGE_TOL: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-10;
const LP_BISECTION_TOL: f64 = 1e-7;

/// Shared knobs of the checks.
#[derive(Clone, Debug)]
pub struct CheckSettings {
    pub seed: u64,
    pub budget: Duration,
    pub covectors: usize,
    pub gauge_trials: usize,
    pub polar_covectors: usize,
    pub polygon_resolution: usize,
    pub hausdorff_tol: f64,
    pub alpha_covectors: usize,
    pub brute_force_queries: usize,
    pub s_values: Vec<f64>,
    pub fault: Option<Fault>,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: Duration::from_secs(30),
            covectors: 500,
            gauge_trials: 10_000,
            polar_covectors: 500,
            polygon_resolution: 720,
            hausdorff_tol: 0.05,
            alpha_covectors: 200,
            brute_force_queries: 10_000,
            s_values: vec![0.5, 1.0, 2.0],
            fault: None,
        }
    }
}

struct Budget {
    start: Instant,
    limit: Duration,
    hit: bool,
}

impl Budget {
    fn new(limit: Duration) -> Self {
        Self { start: Instant::now(), limit, hit: false }
    }

    fn exceeded(&mut self) -> bool {
        if self.start.elapsed() > self.limit {
            self.hit = true;
        }
        self.hit
    }
}

#[derive(Default)]
struct Tally {
    trials: usize,
    disagreements: usize,
    undetermined: usize,
    members_agree: usize,
    nonmembers_agree: usize,
    worst_gap: Option<f64>,
    counterexamples: Vec<Counterexample>,
    inconclusive: bool,
}

impl Tally {
    fn violation(&mut self, base: Option<&[f64]>, input: &[f64], detail: String) {
        self.disagreements += 1;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(Counterexample {
                base_point: base.map(|b| b.to_vec()),
                input: input.to_vec(),
                detail,
            });
        }
    }

    fn compare(&mut self, base: &[f64], xstar: &Covector, lhs: &MembershipResult, rhs: &MembershipResult, label: &str) {
        self.trials += 1;
        match (lhs.verdict, rhs.verdict) {
            (Verdict::Undetermined, _) | (_, Verdict::Undetermined) => self.undetermined += 1,
            (a, b) if a == b => {
                if a == Verdict::Member {
                    self.members_agree += 1;
                } else {
                    self.nonmembers_agree += 1;
                }
            }
            (a, b) => self.violation(
                Some(base),
                xstar,
                format!("{label}: lhs {a:?} (worst quotient {}), rhs {b:?}", fmt(lhs.worst_quotient)),
            ),
        }
    }

    fn gap(&mut self, g: f64) {
        self.worst_gap = Some(self.worst_gap.map_or(g, |w| w.max(g)));
    }

    fn finish(mut self, check_id: &str, fixture: &str, budget: &Budget, cap_undetermined: bool) -> CheckRecord {
        let mut fail = self.disagreements > 0 || self.inconclusive;
        if budget.hit {
            fail = true;
            self.counterexamples.push(Counterexample::note(format!(
                "budget: exceeded {} s",
                fmt(budget.limit.as_secs_f64())
            )));
        }
        if cap_undetermined && self.trials > 0 && self.undetermined as f64 > UNDETERMINED_CAP * self.trials as f64 {
            fail = true;
            self.counterexamples.push(Counterexample::note(format!(
                "inconclusive: {} of {} verdicts undetermined",
                self.undetermined, self.trials
            )));
        }
        CheckRecord {
            check_id: check_id.to_string(),
            fixture: fixture.to_string(),
            verdict: if fail { CheckVerdict::Fail } else { CheckVerdict::Pass },
            trials: self.trials,
            disagreements: self.disagreements,
            undetermined: self.undetermined,
            worst_gap: self.worst_gap,
            counterexamples: self.counterexamples,
            members_agree: self.members_agree,
            nonmembers_agree: self.nonmembers_agree,
        }
    }
}

/// Deterministic per-check seed.
pub(crate) fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn gaussian_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let nv = norm2(&v);
        if nv > 1e-12 {
            return v.into_iter().map(|c| c / nv).collect();
        }
    }
}

/// Random directions scaled by radii from [`COVECTOR_RADII`].
pub fn sample_covectors(n: usize, count: usize, seed: u64) -> Vec<Covector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = gaussian_unit(&mut rng, n);
            let r = COVECTOR_RADII[rng.gen_range(0..COVECTOR_RADII.len())];
            Covector::from_raw(d.into_iter().map(|c| c * r).collect())
        })
        .collect()
}

fn fixture_covectors(fx: &Fixture, count: usize, seed: u64) -> Vec<Covector> {
    let mut out = fx.boundary_covectors.clone();
    out.extend(sample_covectors(fx.dim(), count, seed));
    out
}

fn probe_plan(fx: &Fixture, seed: u64) -> SamplingPlan {
    let mut plan = SamplingPlan::for_dim(fx.dim());
    plan.seed = seed;
    plan
}

fn polygon_plan(fx: &Fixture, seed: u64) -> SamplingPlan {
    let mut plan = probe_plan(fx, seed);
    plan.refine = false;
    plan
}

/// Right-hand side predicate, optionally replaced by a corrupted double that
/// answers for `2x*`.
fn rhs_at(
    fx: &Fixture,
    xbar: &Vector,
    xstar: &Covector,
    kind: Kind,
    plan: &SamplingPlan,
    fault: Option<Fault>,
) -> Result<MembershipResult> {
    let y = if fault == Some(Fault::RhsPredicate) { xstar.scale(2.0) } else { xstar.clone() };
    match kind {
        Kind::Frechet(eps) => rhs_frechet(fx.transform(), xbar, &y, eps, plan),
        Kind::Holder(s) => rhs_holder(fx.transform(), xbar, &y, s, plan, plan.matched_sigma_cap(s)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Frechet(f64),
    Holder(f64),
}

impl Kind {
    fn lhs(self, probe: &mut Probe, xstar: &Covector) -> Result<MembershipResult> {
        match self {
            Kind::Frechet(eps) => probe.frechet(xstar, eps),
            Kind::Holder(s) => {
                let cap = probe.plan().matched_sigma_cap(s);
                probe.holder(xstar, s, cap)
            }
        }
    }

    /// Boundary radius of the LHS member set along the unit vector `u`.
    fn lhs_radius(self, probe: &mut Probe, u: &[f64], cap: f64) -> Result<f64> {
        match self {
            Kind::Frechet(eps) => probe.frechet_radius(u, eps, cap),
            Kind::Holder(s) => {
                let sigma = probe.plan().matched_sigma_cap(s);
                probe.holder_radius(u, s, sigma, cap)
            }
        }
    }

    fn label(self) -> String {
        match self {
            Kind::Frechet(eps) => format!("frechet eps={}", fmt(eps)),
            Kind::Holder(s) => format!("holder s={}", fmt(s)),
        }
    }
}

/// Gauge axioms on seeded samples, LP against bisection,
/// and the polar predicate against the subgradient inequality.
pub fn check_gauge_properties(fixture: &str, oracle: &dyn GaugeOracle, settings: &CheckSettings) -> CheckRecord {
    let mut budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    let seed = derive_seed(settings.seed, &["gauge_properties", fixture]);
    if let Err(e) = gauge_properties_into(oracle, settings, seed, &mut tally, &mut budget) {
        tally.violation(None, &[], format!("error: {e}"));
    }
    tally.finish("gauge_properties", fixture, &budget, false)
}

fn gauge_properties_into(
    oracle: &dyn GaugeOracle,
    settings: &CheckSettings,
    seed: u64,
    tally: &mut Tally,
    budget: &mut Budget,
) -> Result<()> {
    let n = oracle.dim();
    let m = oracle.coercivity_constant();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales = [0.01, 0.5, 2.0, 10.0];
    let point = |rng: &mut ChaCha8Rng| -> Vector {
        let d = gaussian_unit(rng, n);
        let s = scales[rng.gen_range(0..scales.len())] * rng.gen_range(0.1..1.0);
        Vector::from_raw(d.into_iter().map(|c| c * s).collect())
    };
    tally.trials += 1;
    let zero = oracle.gauge(&Vector::zeros(n))?;
    if zero != ExtReal::ZERO {
        tally.violation(None, &vec![0.0; n], format!("rho(0) = {zero}"));
    }
    let bisection_every = 10;
    for i in 0..settings.gauge_trials {
        if budget.exceeded() {
            return Ok(());
        }
        tally.trials += 1;
        let x = point(&mut rng);
        let y = point(&mut rng);
        let t: f64 = rng.gen_range(0.0..5.0);
        let rx = oracle.gauge(&x)?;
        let ry = oracle.gauge(&y)?;
        let rtx = oracle.gauge(&x.scale(t))?;
        let rxy = oracle.gauge(&x.add(&y))?;
        // Homogeneity.
        let expect = if t == 0.0 { ExtReal::ZERO } else { rx.finite().map_or(ExtReal::PlusInfinity, |v| ExtReal::Finite(t * v)) };
        let ok = match (rtx, expect) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= GAUGE_TOL * (1.0 + b.abs()),
            (a, b) => a == b,
        };
        if !ok {
            tally.violation(None, &x, format!("homogeneity at t = {}: rho(tx) = {rtx}, t rho(x) = {expect}", fmt(t)));
        }
        // Subadditivity.
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (rx, ry) {
            let ok = match rxy {
                ExtReal::Finite(c) => c <= a + b + GAUGE_TOL * (1.0 + a + b),
                ExtReal::PlusInfinity => false,
            };
            if !ok {
                let mut input = x.to_vec();
                input.extend_from_slice(&y);
                tally.violation(None, &input, format!("subadditivity: rho(x+y) = {rxy} > {} + {}", fmt(a), fmt(b)));
            }
        }
        // Coercivity.
        if let ExtReal::Finite(a) = rx {
            if m * x.norm() > a + GAUGE_TOL * (1.0 + x.norm()) {
                tally.violation(None, &x, format!("coercivity: m|x| = {} > rho(x) = {}", fmt(m * x.norm()), fmt(a)));
            }
        }
        // LP against bisection.
        if i % bisection_every == 0 {
            let rb = oracle.gauge_bisection(&x)?;
            let ok = match (rx, rb) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= LP_BISECTION_TOL,
                (a, b) => a == b,
            };
            if !ok {
                tally.violation(None, &x, format!("lp {rx} vs bisection {rb}"));
            }
        }
    }
    // Polar predicate against ⟨y, x⟩ ≤ ρ(x) on the body's extreme points,
    // y itself and random points.
    let mut test_points: Vec<Vec<f64>> = oracle.probe_points();
    for _ in 0..32 {
        test_points.push(point(&mut rng).into_inner());
    }
    let test_values = test_points
        .iter()
        .map(|p| oracle.gauge(&Vector::from_raw(p.clone())))
        .collect::<Result<Vec<_>>>()?;
    for y in sample_covectors(n, settings.polar_covectors, seed ^ 0x9e37_79b9) {
        if budget.exceeded() {
            return Ok(());
        }
        tally.trials += 1;
        let polar = oracle.polar_contains(&y)?;
        let own = oracle.gauge(&Vector::from_raw(y.to_vec()))?;
        let violated = test_points
            .iter()
            .zip(&test_values)
            .chain(std::iter::once((&y.to_vec(), &own)))
            .any(|(p, v)| match v {
                ExtReal::Finite(r) => dot(&y, p) > r + GAUGE_TOL * (1.0 + norm2(p)),
                ExtReal::PlusInfinity => false,
            });
        if polar == violated {
            tally.violation(None, &y, format!("polar predicate {polar}, inequality test {}", !violated));
        }
    }
    Ok(())
}

/// Runs `body` per base point with a fresh probe, turning errors into
/// counterexamples.
/// Runs `body` at every base point; with `cap_undetermined` each base point
/// must keep its own Undetermined rate within [`UNDETERMINED_CAP`].
fn per_base_point(
    fx: &Fixture,
    tally: &mut Tally,
    budget: &mut Budget,
    cap_undetermined: bool,
    mut body: impl FnMut(&Vector, &mut Tally, &mut Budget) -> Result<()>,
) {
    for xbar in &fx.base_points {
        if budget.exceeded() {
            return;
        }
        let (trials, undetermined) = (tally.trials, tally.undetermined);
        if let Err(e) = body(xbar, tally, budget) {
            tally.violation(Some(xbar), &[], format!("error: {e}"));
        }
        let (t, u) = (tally.trials - trials, tally.undetermined - undetermined);
        if cap_undetermined && t > 0 && u as f64 > UNDETERMINED_CAP * t as f64 {
            tally.inconclusive = true;
            tally.counterexamples.push(Counterexample {
                base_point: Some(xbar.to_vec()),
                input: Vec::new(),
                detail: format!("inconclusive: {u} of {t} verdicts undetermined at this base point"),
            });
        }
    }
}

/// Inclusion: no covector in `∂̂_ε T(x̄)` lies outside `∂̂_ε f(x̄) ∩ [−∂̂_ε φ(0)]`.
pub fn check_upper_estimate(fx: &Fixture, epsilon: f64, settings: &CheckSettings) -> CheckRecord {
    let check_id = format!("upper_estimate_eps{}", fmt(epsilon));
    let seed = derive_seed(settings.seed, &[&check_id, &fx.name]);
    let mut budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    let plan = probe_plan(fx, seed);
    let covectors = fixture_covectors(fx, settings.covectors, seed);
    per_base_point(fx, &mut tally, &mut budget, true, |xbar, tally, budget| {
        let mut probe = Probe::new(fx.transform(), xbar, &plan)?;
        for xstar in &covectors {
            if budget.exceeded() {
                break;
            }
            tally.trials += 1;
            let lhs = probe.frechet(xstar, epsilon)?;
            match lhs.verdict {
                Verdict::Undetermined => tally.undetermined += 1,
                Verdict::NonMember => tally.nonmembers_agree += 1,
                Verdict::Member => {
                    let rhs = rhs_at(fx, xbar, xstar, Kind::Frechet(epsilon), &plan, settings.fault)?;
                    match rhs.verdict {
                        Verdict::Member => tally.members_agree += 1,
                        Verdict::Undetermined => tally.undetermined += 1,
                        Verdict::NonMember => tally.violation(
                            Some(xbar),
                            xstar,
                            format!("member of the lhs at eps = {} but not of the rhs", fmt(epsilon)),
                        ),
                    }
                }
            }
        }
        Ok(())
    });
    tally.finish(&check_id, &fx.name, &budget, true)
}

/// The ℓ < m hypothesis: `Ok(None)` when it holds, otherwise a description.
pub fn hypothesis_violation(fx: &Fixture, seed: u64) -> Result<Option<String>> {
    let m = fx.coercivity_constant();
    let ell = match fx.known_ell {
        Some(l) => l,
        None => {
            let mut worst: f64 = 0.0;
            for xbar in &fx.base_points {
                worst = worst.max(calm_constant(fx.transform().f(), xbar, CALM_SAMPLES, seed, 1e6)?.ell);
            }
            worst
        }
    };
    if ell < m {
        Ok(None)
    } else {
        Ok(Some(format!("hypothesis ell < m violated: ell = {}, m = {}", fmt(ell), fmt(m))))
    }
}

fn skipped(check_id: &str, fixture: &str, reason: String) -> CheckRecord {
    CheckRecord {
        check_id: check_id.into(),
        fixture: fixture.into(),
        verdict: CheckVerdict::SkippedHypothesis,
        trials: 0,
        disagreements: 0,
        undetermined: 0,
        worst_gap: None,
        counterexamples: vec![Counterexample::note(reason)],
        members_agree: 0,
        nonmembers_agree: 0,
    }
}

/// Largest radial gap between the LHS boundary, given by its radius along
/// each direction, and the bisected boundary of the RHS predicate.
fn polygon_gap(
    mut lhs_radius: impl FnMut(&[f64]) -> Result<f64>,
    mut rhs: impl FnMut(&Covector) -> Result<bool>,
    resolution: usize,
) -> Result<(f64, f64, f64, f64)> {
    let b = boundary_polygon_2d(&mut rhs, resolution, POLYGON_RADIUS_CAP)?;
    let mut worst = (0.0, 0.0, 0.0, 0.0);
    for &(angle, rb) in &b {
        let ra = lhs_radius(&[angle.cos(), angle.sin()])?;
        let g = (ra - rb).abs();
        if g > worst.0 {
            worst = (g, angle, ra, rb);
        }
    }
    Ok(worst)
}

fn equality(fx: &Fixture, check_id: &str, kinds: &[Kind], cross_s: bool, settings: &CheckSettings) -> CheckRecord {
    let seed = derive_seed(settings.seed, &[check_id, &fx.name]);
    match hypothesis_violation(fx, seed) {
        Ok(None) => {}
        Ok(Some(reason)) => return skipped(check_id, &fx.name, reason),
        Err(e) => {
            let mut tally = Tally::default();
            tally.violation(None, &[], format!("error: {e}"));
            return tally.finish(check_id, &fx.name, &Budget::new(settings.budget), false);
        }
    }
    let mut budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    let plan = probe_plan(fx, seed);
    let poly_plan = polygon_plan(fx, seed);
    let covectors = fixture_covectors(fx, settings.covectors, seed);
    per_base_point(fx, &mut tally, &mut budget, true, |xbar, tally, budget| {
        let mut probe = Probe::new(fx.transform(), xbar, &plan)?;
        for xstar in &covectors {
            if budget.exceeded() {
                return Ok(());
            }
            let mut decided: Vec<Verdict> = Vec::new();
            for &kind in kinds {
                let lhs = kind.lhs(&mut probe, xstar)?;
                let rhs = rhs_at(fx, xbar, xstar, kind, &plan, settings.fault)?;
                tally.compare(xbar, xstar, &lhs, &rhs, &kind.label());
                if lhs.verdict != Verdict::Undetermined {
                    decided.push(lhs.verdict);
                }
            }
            if cross_s && decided.windows(2).any(|w| w[0] != w[1]) {
                tally.violation(Some(xbar), xstar, format!("lhs verdicts differ across s: {decided:?}"));
            }
        }
        if fx.polygons && fx.dim() == 2 {
            let mut poly_probe = Probe::new(fx.transform(), xbar, &poly_plan)?;
            for &kind in kinds {
                if budget.exceeded() {
                    return Ok(());
                }
                let (gap, angle, ra, rb) = polygon_gap(
                    |u| kind.lhs_radius(&mut poly_probe, u, POLYGON_RADIUS_CAP),
                    |y| Ok(rhs_at(fx, xbar, y, kind, &plan, settings.fault)?.is_member()),
                    settings.polygon_resolution,
                )?;
                tally.gap(gap);
                if gap > settings.hausdorff_tol {
                    tally.violation(
                        Some(xbar),
                        &[angle],
                        format!("{}: radial gap {} at angle {}: lhs {}, rhs {}", kind.label(), fmt(gap), fmt(angle), fmt(ra), fmt(rb)),
                    );
                }
            }
        }
        Ok(())
    });
    tally.finish(check_id, &fx.name, &budget, true)
}

/// Fréchet equality at every base point: pointwise verdicts and, in two
/// dimensions, boundary polygons.
pub fn check_frechet_equality(fx: &Fixture, settings: &CheckSettings) -> CheckRecord {
    equality(fx, "frechet_equality", &[Kind::Frechet(0.0)], false, settings)
}

/// Hölder equality for each s, plus agreement of the decided sets across s.
pub fn check_holder_equality(fx: &Fixture, settings: &CheckSettings) -> CheckRecord {
    let kinds: Vec<Kind> = settings.s_values.iter().map(|&s| Kind::Holder(s)).collect();
    equality(fx, "holder_equality", &kinds, true, settings)
}

/// Covectors in both ε-parts of the right-hand side are not rejected by
/// the `αε` test on T.
pub fn check_alpha_inflation(fx: &Fixture, epsilon: f64, settings: &CheckSettings) -> CheckRecord {
    let check_id = "alpha_inflation";
    let seed = derive_seed(settings.seed, &[check_id, &fx.name]);
    let ell = match (fx.known_ell, hypothesis_violation(fx, seed)) {
        (_, Ok(Some(reason))) => return skipped(check_id, &fx.name, reason),
        (Some(l), Ok(None)) => l,
        (None, Ok(None)) => fx
            .base_points
            .iter()
            .map(|x| calm_constant(fx.transform().f(), x, CALM_SAMPLES, seed, 1e6).map(|c| c.ell))
            .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
            .unwrap_or(f64::INFINITY),
        (_, Err(e)) => {
            let mut tally = Tally::default();
            tally.violation(None, &[], format!("error: {e}"));
            return tally.finish(check_id, &fx.name, &Budget::new(settings.budget), false);
        }
    };
    let m = fx.coercivity_constant();
    let mut budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    let plan = probe_plan(fx, seed);
    let pool = sample_covectors(fx.dim(), 40 * settings.alpha_covectors, seed);
    per_base_point(fx, &mut tally, &mut budget, true, |xbar, tally, budget| {
        let mut probe = Probe::new(fx.transform(), xbar, &plan)?;
        let mut accepted = 0;
        for xstar in &pool {
            if accepted == settings.alpha_covectors || budget.exceeded() {
                break;
            }
            if !rhs_at(fx, xbar, xstar, Kind::Frechet(epsilon), &plan, settings.fault)?.is_member() {
                continue;
            }
            accepted += 1;
            tally.trials += 1;
            let alpha = alpha_factor(xstar.norm(), m, ell)?;
            let lhs = probe.frechet(xstar, alpha * epsilon)?;
            match lhs.verdict {
                Verdict::Member => tally.members_agree += 1,
                Verdict::Undetermined => tally.undetermined += 1,
                Verdict::NonMember => tally.violation(
                    Some(xbar),
                    xstar,
                    format!("rejected at alpha eps = {} (alpha = {})", fmt(alpha * epsilon), fmt(alpha)),
                ),
            }
        }
        if accepted < settings.alpha_covectors && !budget.hit {
            return Err(Error::Internal(format!("only {accepted} covectors passed the rhs predicates")));
        }
        Ok(())
    });
    tally.finish(check_id, &fx.name, &budget, true)
}

/// Distance to the lower half-plane at the origin: the subdifferential is
/// the segment from 0 to (0, 1). Also compares minimal time with the unit
/// ball against brute-force distances to random point clouds.
pub fn check_distance_specialization(fx: &Fixture, settings: &CheckSettings) -> CheckRecord {
    let check_id = "distance_specialization";
    let seed = derive_seed(settings.seed, &[check_id, &fx.name]);
    let mut budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    if let Err(e) = distance_into(fx, settings, seed, &mut tally, &mut budget) {
        tally.violation(None, &[], format!("error: {e}"));
    }
    tally.finish(check_id, &fx.name, &budget, false)
}

/// Tolerance for the segment endpoints.
pub const SEGMENT_TOL: f64 = 1e-3;
/// Tolerance for minimal time against brute force.
pub const BRUTE_FORCE_TOL: f64 = 1e-9;

fn distance_into(fx: &Fixture, settings: &CheckSettings, seed: u64, tally: &mut Tally, budget: &mut Budget) -> Result<()> {
    let origin = Vector::zeros(2);
    let mut probe = Probe::new(fx.transform(), &origin, &polygon_plan(fx, seed))?;
    let mut far = (0.0, 0.0, 0.0);
    for i in 0..settings.polygon_resolution {
        let a = TAU * i as f64 / settings.polygon_resolution as f64;
        let r = probe.frechet_radius(&[a.cos(), a.sin()], 0.0, POLYGON_RADIUS_CAP)?;
        tally.trials += 1;
        let p = [r * a.cos(), r * a.sin()];
        // Distance to the segment {(0, t) : 0 ≤ t ≤ 1}.
        let t = p[1].clamp(0.0, 1.0);
        let d = (p[0] * p[0] + (p[1] - t) * (p[1] - t)).sqrt();
        tally.gap(d);
        if d > SEGMENT_TOL {
            tally.violation(Some(&origin), &p, format!("polygon vertex {} off the segment", fmt(d)));
        }
        if r > far.0 {
            far = (r, p[0], p[1]);
        }
    }
    let end_err = (far.1 * far.1 + (far.2 - 1.0) * (far.2 - 1.0)).sqrt();
    tally.gap(end_err);
    if end_err > SEGMENT_TOL {
        tally.violation(Some(&origin), &[far.1, far.2], format!("far endpoint misses (0, 1) by {}", fmt(end_err)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..settings.brute_force_queries {
        if budget.exceeded() {
            return Ok(());
        }
        tally.trials += 1;
        let n = rng.gen_range(2..=3);
        let k = rng.gen_range(1..=8);
        let pts: Vec<Vector> =
            (0..k).map(|_| Vector::from_raw((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect())).collect();
        let x = Vector::from_raw((0..n).map(|_| rng.gen_range(-6.0..6.0)).collect());
        let brute = pts.iter().map(|p| norm2(&p.sub(&x))).fold(f64::INFINITY, f64::min);
        let cloud = Region::point_cloud(pts)?;
        let got = minimal_time(&ConvexBody::euclidean_ball(n), &cloud, &x)?.value;
        let ok = matches!(got, ExtReal::Finite(v) if (v - brute).abs() <= BRUTE_FORCE_TOL);
        if !ok {
            tally.violation(None, &x, format!("minimal time {got} vs brute force {}", fmt(brute)));
        }
    }
    Ok(())
}

/// Degenerate branches: the zero body, infeasible cones, empty regions,
/// the ℓ < m gate, fixture invariants and byte-identical reruns.
pub fn check_degenerate_branches(settings: &CheckSettings) -> CheckRecord {
    let check_id = "degenerate_branches";
    let budget = Budget::new(settings.budget);
    let mut tally = Tally::default();
    let cases: Vec<(&str, fn(&CheckSettings) -> Result<Option<String>>)> = vec![
        ("zero_body", zero_body),
        ("infeasible_cone", infeasible_cone),
        ("ray_body", ray_body),
        ("empty_region", empty_region),
        ("hypothesis_gate", hypothesis_gate),
        ("base_point_outside_s0", base_point_outside_s0),
        ("deterministic_rerun", deterministic_rerun),
    ];
    for (name, case) in cases {
        tally.trials += 1;
        match case(settings) {
            Ok(None) => tally.members_agree += 1,
            Ok(Some(detail)) => tally.violation(None, &[], format!("{name}: {detail}")),
            Err(e) => tally.violation(None, &[], format!("{name}: unexpected error: {e}")),
        }
    }
    tally.finish(check_id, "builtin", &budget, false)
}

fn expect(cond: bool, what: impl FnOnce() -> String) -> Option<String> {
    if cond {
        None
    } else {
        Some(what())
    }
}

fn vec2(a: f64, b: f64) -> Vector {
    Vector::from_raw(vec![a, b])
}

fn zero_body(_: &CheckSettings) -> Result<Option<String>> {
    let g = Gauge::new(ConvexBody::singleton(Vector::zeros(2)));
    let at0 = g.eval(&Vector::zeros(2))?;
    let at1 = g.eval(&vec2(1.0, 0.0))?;
    let bis = g.eval_bisection(&vec2(1.0, 0.0), BISECTION_TOL)?;
    if let Some(d) = expect(at0 == ExtReal::ZERO && at1 == ExtReal::PlusInfinity && bis == ExtReal::PlusInfinity, || {
        format!("rho(0) = {at0}, rho(e1) = {at1}, bisection {bis}")
    }) {
        return Ok(Some(d));
    }
    let omega = Region::point_cloud(vec![vec2(1.0, 1.0)])?;
    let inside = minimal_time(g.body(), &omega, &vec2(1.0, 1.0))?.value;
    let outside = minimal_time(g.body(), &omega, &vec2(0.0, 0.0))?.value;
    Ok(expect(inside == ExtReal::ZERO && outside == ExtReal::PlusInfinity, || {
        format!("T at the target {inside}, away from it {outside}")
    }))
}

fn infeasible_cone(_: &CheckSettings) -> Result<Option<String>> {
    let g = Gauge::new(ConvexBody::vpolytope(vec![vec2(1.0, 0.0), vec2(0.0, 1.0)])?);
    let off = g.eval(&vec2(-1.0, 0.0))?;
    let off_b = g.eval_bisection(&vec2(-1.0, 0.0), BISECTION_TOL)?;
    let on = g.eval(&vec2(2.0, 2.0))?;
    if let Some(d) = expect(off == ExtReal::PlusInfinity && off_b == ExtReal::PlusInfinity && on == ExtReal::Finite(4.0), || {
        format!("rho(-1, 0) = {off} (bisection {off_b}), rho(2, 2) = {on}")
    }) {
        return Ok(Some(d));
    }
    let fx = bundled_fixture("square_offset_simplex")?;
    let t = fx.transform().eval(&vec2(2.0, 2.0), 0.0)?.value;
    let below = fx.transform().eval(&vec2(-0.5, -0.25), 0.0)?.value;
    Ok(expect(t == ExtReal::PlusInfinity && below == ExtReal::Finite(0.5), || {
        format!("T(2, 2) = {t}, T(-0.5, -0.25) = {below}")
    }))
}

fn ray_body(_: &CheckSettings) -> Result<Option<String>> {
    let body = ConvexBody::singleton(vec2(1.0, 0.0));
    let omega = Region::point_cloud(vec![vec2(2.0, 0.0)])?;
    let a = minimal_time(&body, &omega, &vec2(0.0, 0.0))?.value;
    let b = minimal_time(&body, &omega, &vec2(3.0, 0.0))?.value;
    Ok(expect(a == ExtReal::Finite(2.0) && b == ExtReal::PlusInfinity, || format!("T(0) = {a}, T(3, 0) = {b}")))
}

fn empty_region(_: &CheckSettings) -> Result<Option<String>> {
    let omega = Region::halfspaces(
        vec![(Covector::from_raw(vec![1.0, 0.0]), -1.0), (Covector::from_raw(vec![-1.0, 0.0]), 0.0)],
        2,
    )?;
    let sample = domain_sample(&crate::fields::ScalarField::indicator(omega.clone()), 3, 0);
    let build = InfConvolution::minimal_time(Gauge::new(ConvexBody::euclidean_ball(2)), omega);
    Ok(expect(
        matches!(sample, Err(Error::DomainEmpty(_))) && matches!(build, Err(Error::DomainEmpty(_))),
        || format!("sampling gave {:?}, construction gave {:?}", sample.err(), build.err()),
    ))
}

fn hypothesis_gate(settings: &CheckSettings) -> Result<Option<String>> {
    let fx = bundled_fixture("steep_perturbation")?;
    let gate = hypothesis_violation(&fx, settings.seed)?;
    let record = check_frechet_equality(&fx, settings);
    let alpha = alpha_factor(0.0, 1.0, 1.0);
    Ok(expect(
        gate.is_some() && record.verdict == CheckVerdict::SkippedHypothesis && matches!(alpha, Err(Error::Precondition(_))),
        || format!("gate {gate:?}, verdict {:?}, alpha {alpha:?}", record.verdict),
    ))
}

fn base_point_outside_s0(_: &CheckSettings) -> Result<Option<String>> {
    let pts = vec![vec2(0.0, 0.0), vec2(3.0, 0.0)];
    let j = crate::fields::ScalarField::table(vec![(vec2(0.0, 0.0), 0.0), (vec2(3.0, 0.0), 10.0)])?;
    let fx = Fixture::new(
        "outside",
        Gauge::new(ConvexBody::euclidean_ball(2)),
        Region::point_cloud(pts)?,
        Some(j),
        vec![vec2(3.0, 0.0)],
        None,
    );
    Ok(expect(matches!(fx, Err(Error::Precondition(_))), || "fixture accepted a base point outside S0".into()))
}

fn deterministic_rerun(settings: &CheckSettings) -> Result<Option<String>> {
    let fx = bundled_fixture("two_point_ball")?;
    let small = CheckSettings { covectors: 50, ..settings.clone() };
    let a = serde_json::to_string(&check_upper_estimate(&fx, 0.0, &small)).map_err(|e| Error::Internal(e.to_string()))?;
    let b = serde_json::to_string(&check_upper_estimate(&fx, 0.0, &small)).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(expect(a == b, || "two runs with the same seed differ".into()))
}
