//! ε-Fréchet and s-Hölder subdifferential membership: numeric falsifiers,
//! exact predicates for structured data, and the intersection formulas for
//! infimal convolutions at points of S₀.

mod exact;
mod probe;

use std::f64::consts::TAU;

use serde::Serialize;

pub use exact::{ACTIVE_TOL, EXACT_TOL};
pub use probe::Probe;

use crate::error::{check_dim, Error, Result};
use crate::fields::{Evaluate, Region, ScalarField};
use crate::infconv::InfConvolution;
use crate::linalg::{Covector, Vector};

/// Tolerance for the S₀ precondition of the intersection formulas.
pub const S0_TOL: f64 = 1e-7;
/// Bisection steps per ray in [`boundary_polygon_2d`].
pub const POLYGON_BISECTION_STEPS: usize = 40;
/// Lower bound used by the Hölder heuristic when no cap is given.
pub const DEFAULT_SIGMA_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubdiffKind {
    Frechet { epsilon: f64 },
    /// `s = 1` is the proximal subdifferential.
    Holder { s: f64 },
}

impl SubdiffKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            SubdiffKind::Frechet { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {epsilon}")))
            }
            SubdiffKind::Holder { s } if !(s > 0.0 && s.is_finite()) => {
                Err(Error::InvalidInput(format!("s must be positive, got {s}")))
            }
            k => Ok(k),
        }
    }
}

/// Radii `r_j = r₀ θ^j` for `j = 1..=levels` and directions per level.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPlan {
    pub base_radius: f64,
    pub decay: f64,
    pub levels: usize,
    pub directions: usize,
    pub seed: u64,
    pub quotient_tolerance: f64,
    /// Fine ring density relative to `directions` (two dimensions only).
    pub refinement_factor: usize,
    /// Local search around near-threshold minima.
    pub refine: bool,
}

impl SamplingPlan {
    pub fn for_dim(n: usize) -> Self {
        let directions = match n {
            1 => 2,
            2 => 720,
            _ => 2000,
        };
        Self {
            base_radius: 0.5,
            decay: 0.5,
            levels: 20,
            directions,
            seed: 0,
            quotient_tolerance: 1e-6,
            refinement_factor: 8,
            refine: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_radius > 0.0 && self.base_radius.is_finite()) {
            return Err(Error::InvalidInput("base radius must be positive".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidInput("decay must lie in (0, 1)".into()));
        }
        if self.levels == 0 || self.directions == 0 {
            return Err(Error::InvalidInput("levels and directions must be positive".into()));
        }
        if !(self.quotient_tolerance >= 0.0) {
            return Err(Error::InvalidInput("quotient tolerance must be nonnegative".into()));
        }
        Ok(())
    }

    /// Radius of level `j`, counted from 1.
    pub fn radius(&self, j: usize) -> f64 {
        self.base_radius * self.decay.powi(j as i32)
    }

    pub fn smallest_radius(&self) -> f64 {
        self.radius(self.levels)
    }

    /// The Hölder lower bound matching the Fréchet tolerance at the finest
    /// level: a quotient of order `1 + s` below `−tol / r_min^s` means the
    /// first-order quotient there is below `−tol`.
    pub fn matched_sigma_cap(&self, s: f64) -> f64 {
        self.quotient_tolerance.max(f64::MIN_POSITIVE) / self.smallest_radius().powf(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Member,
    NonMember,
    Undetermined,
}

/// A point whose difference quotient violates the membership threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub x: Vector,
    pub quotient: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipResult {
    pub verdict: Verdict,
    /// Present for every numeric NonMember and for exact ones whose witness
    /// could be realized inside the domain.
    pub witness: Option<Witness>,
    pub worst_quotient: f64,
}

impl MembershipResult {
    pub(crate) fn member(worst: f64) -> Self {
        Self { verdict: Verdict::Member, witness: None, worst_quotient: worst }
    }

    pub(crate) fn undetermined(worst: f64) -> Self {
        Self { verdict: Verdict::Undetermined, witness: None, worst_quotient: worst }
    }

    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

/// Numeric ε-Fréchet falsifier. Member means no violation was found.
pub fn frechet_test(
    g: &dyn Evaluate,
    xbar: &Vector,
    xstar: &Covector,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<MembershipResult> {
    Probe::new(g, xbar, plan)?.frechet(xstar, epsilon)
}

/// Numeric s-Hölder falsifier with lower bound `-sigma_cap`.
pub fn holder_test(
    g: &dyn Evaluate,
    xbar: &Vector,
    xstar: &Covector,
    s: f64,
    plan: &SamplingPlan,
    sigma_cap: f64,
) -> Result<MembershipResult> {
    Probe::new(g, xbar, plan)?.holder(xstar, s, sigma_cap)
}

/// `x* ∈ N̂(x̄; Ω)`: exact for half-space intersections, polytopes and point
/// clouds, numeric for other unions.
pub fn normal_cone_contains(omega: &Region, xbar: &Vector, xstar: &Covector, plan: &SamplingPlan) -> Result<MembershipResult> {
    normal_cone_eps(omega, xbar, xstar, 0.0, plan)
}

fn normal_cone_eps(
    omega: &Region,
    xbar: &Vector,
    xstar: &Covector,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<MembershipResult> {
    check_dim(omega.dim(), xbar.dim())?;
    check_dim(omega.dim(), xstar.dim())?;
    if !omega.contains(xbar)? {
        return Err(Error::Precondition("base point lies outside the region".into()));
    }
    match exact::normal_cone(omega, xbar, xstar, epsilon)? {
        Some(r) => Ok(r),
        None => frechet_test(&ScalarField::indicator(omega.clone()), xbar, xstar, epsilon, plan),
    }
}

/// `x* ∈ ∂̂_ε f(x̄) ∩ [−∂̂_ε φ(0)]`.
pub fn rhs_frechet(
    t: &InfConvolution,
    xbar: &Vector,
    xstar: &Covector,
    epsilon: f64,
    plan: &SamplingPlan,
) -> Result<MembershipResult> {
    SubdiffKind::Frechet { epsilon }.validate()?;
    rhs(t, xbar, xstar, SubdiffKind::Frechet { epsilon }, plan, 0.0)
}

/// `x* ∈ ∂_s f(x̄) ∩ [−∂_s φ(0)]`.
pub fn rhs_holder(
    t: &InfConvolution,
    xbar: &Vector,
    xstar: &Covector,
    s: f64,
    plan: &SamplingPlan,
    sigma_cap: f64,
) -> Result<MembershipResult> {
    SubdiffKind::Holder { s }.validate()?;
    rhs(t, xbar, xstar, SubdiffKind::Holder { s }, plan, sigma_cap)
}

fn rhs(
    t: &InfConvolution,
    xbar: &Vector,
    xstar: &Covector,
    kind: SubdiffKind,
    plan: &SamplingPlan,
    sigma_cap: f64,
) -> Result<MembershipResult> {
    check_dim(t.dim(), xbar.dim())?;
    check_dim(t.dim(), xstar.dim())?;
    if !t.is_in_s0(xbar, S0_TOL)? {
        return Err(Error::Precondition("base point is not in S0".into()));
    }
    let neg = xstar.neg();
    // Convex φ: the Hölder subdifferential at 0 is the convex one.
    let phi_eps = match kind {
        SubdiffKind::Frechet { epsilon } => epsilon,
        SubdiffKind::Holder { .. } => 0.0,
    };
    let phi_part = match t.phi().as_gauge() {
        Some(g) => exact::gauge_subgradient(&g, &neg, phi_eps)?,
        None => {
            let origin = Vector::zeros(t.dim());
            match kind {
                SubdiffKind::Frechet { epsilon } => frechet_test(t.phi(), &origin, &neg, epsilon, plan)?,
                SubdiffKind::Holder { s } => holder_test(t.phi(), &origin, &neg, s, plan, sigma_cap)?,
            }
        }
    };
    if phi_part.verdict == Verdict::NonMember {
        return Ok(phi_part);
    }
    let f_part = f_subgradient(t.f(), xbar, xstar, kind, plan, sigma_cap)?;
    Ok(combine(f_part, phi_part))
}

fn f_subgradient(
    f: &ScalarField,
    xbar: &Vector,
    xstar: &Covector,
    kind: SubdiffKind,
    plan: &SamplingPlan,
    sigma_cap: f64,
) -> Result<MembershipResult> {
    // Points of a finite domain are isolated, so every covector qualifies.
    if f.finite_domain()?.is_some() {
        return Ok(MembershipResult::member(0.0));
    }
    if let ScalarField::Indicator(omega) = f {
        // Convex polyhedral Ω: the Hölder normal cone equals the Fréchet one.
        let eps = match kind {
            SubdiffKind::Frechet { epsilon } => epsilon,
            SubdiffKind::Holder { .. } => 0.0,
        };
        if let Some(r) = exact::normal_cone(omega, xbar, xstar, eps)? {
            return Ok(r);
        }
    }
    match kind {
        SubdiffKind::Frechet { epsilon } => frechet_test(f, xbar, xstar, epsilon, plan),
        SubdiffKind::Holder { s } => holder_test(f, xbar, xstar, s, plan, sigma_cap),
    }
}

fn combine(a: MembershipResult, b: MembershipResult) -> MembershipResult {
    let worst = a.worst_quotient.min(b.worst_quotient);
    match (a.verdict, b.verdict) {
        (Verdict::NonMember, _) => a,
        (_, Verdict::NonMember) => b,
        (Verdict::Member, Verdict::Member) => MembershipResult::member(worst),
        _ => MembershipResult::undetermined(worst),
    }
}

/// `α = 2(‖x*‖ + m)/(m − ℓ) + 1`.
pub fn alpha_factor(norm_xstar: f64, m: f64, ell: f64) -> Result<f64> {
    if !(m > 0.0) || !(norm_xstar >= 0.0) || !(ell >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha needs m > 0, ell ≥ 0, |x*| ≥ 0; got m = {m}, ell = {ell}, |x*| = {norm_xstar}"
        )));
    }
    if ell >= m {
        return Err(Error::Precondition(format!("requires ell < m, got ell = {ell}, m = {m}")));
    }
    Ok(2.0 * (norm_xstar + m) / (m - ell) + 1.0)
}

/// For each of `resolution` equally spaced angles, the largest radius
/// `r ≤ radius_cap` with `predicate(r·(cos θ, sin θ))` true, by bisection.
pub fn boundary_polygon_2d(
    mut predicate: impl FnMut(&Covector) -> Result<bool>,
    resolution: usize,
    radius_cap: f64,
) -> Result<Vec<(f64, f64)>> {
    if resolution == 0 || !(radius_cap > 0.0) {
        return Err(Error::InvalidInput("resolution and radius cap must be positive".into()));
    }
    let mut out = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let a = TAU * i as f64 / resolution as f64;
        let (c, s) = (a.cos(), a.sin());
        let mut at = |r: f64| predicate(&Covector::from_raw(vec![r * c, r * s]));
        let r = if at(radius_cap)? {
            radius_cap
        } else {
            let (mut lo, mut hi) = (0.0, radius_cap);
            for _ in 0..POLYGON_BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if at(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        out.push((a, r));
    }
    Ok(out)
}
