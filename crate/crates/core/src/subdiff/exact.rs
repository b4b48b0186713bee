//! Closed-form membership in ε-normal cones of polyhedral regions and in
//! ε-subdifferentials of gauges at the origin.

use super::{MembershipResult, Verdict, Witness};
use crate::error::Result;
use crate::fields::Region;
use crate::gauge::Gauge;
use crate::linalg::{dot, norm2, project_onto_cone, project_onto_polyhedron, sub, ExtReal, Vector};
use crate::lp::{self, LinearProgram, LpOptions, LpOutcome};

/// Absolute tolerance of the exact predicates.
pub const EXACT_TOL: f64 = 1e-9;
/// Row activity tolerance for half-space regions.
pub const ACTIVE_TOL: f64 = 1e-9;

/// `x* ∈ ∂̂_ε δ_Ω(x̄) = N(x̄; Ω) + ε·B` when Ω is convex polyhedral or x̄ is
/// isolated; `None` when no closed form applies.
pub(crate) fn normal_cone(omega: &Region, xbar: &[f64], xstar: &[f64], epsilon: f64) -> Result<Option<MembershipResult>> {
    match omega {
        Region::PointCloud(_) => Ok(Some(MembershipResult::member(0.0))),
        Region::Union(_) if omega.finite_points().is_some() => Ok(Some(MembershipResult::member(0.0))),
        Region::Union(_) => Ok(None),
        Region::HalfspaceIntersection { rows, .. } => {
            let active: Vec<Vec<f64>> = rows
                .iter()
                .filter(|(a, b)| a.pair(xbar) >= b - ACTIVE_TOL)
                .map(|(a, _)| a.to_vec())
                .collect();
            let (proj, dist) = project_onto_cone(&active, xstar);
            let inside = if epsilon == 0.0 {
                in_cone_lp(&active, xstar)?
            } else {
                dist <= epsilon + EXACT_TOL
            };
            if inside {
                return Ok(Some(MembershipResult::member(-dist)));
            }
            let d = sub(xstar, &proj);
            let witness = tangent_witness(xbar, xstar, &d, |x| {
                rows.iter().all(|(a, b)| a.pair(x) <= *b + 1e-12)
            });
            Ok(Some(non_member(witness, -dist)))
        }
        Region::VPolytope(vertices) => {
            let edges: Vec<Vec<f64>> = vertices.iter().map(|w| sub(w, xbar)).collect();
            let polar_rows: Vec<(Vec<f64>, f64)> = edges.iter().map(|e| (e.clone(), 0.0)).collect();
            let (proj, dist) = project_onto_polyhedron(&polar_rows, xstar).expect("cone contains 0");
            let (inside, d) = if epsilon == 0.0 {
                let (k, worst) = edges
                    .iter()
                    .enumerate()
                    .map(|(k, e)| (k, dot(xstar, e) - EXACT_TOL * (1.0 + norm2(xstar) * norm2(e))))
                    .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
                (worst <= 0.0, edges[k].clone())
            } else {
                (dist <= epsilon + EXACT_TOL, sub(xstar, &proj))
            };
            if inside {
                return Ok(Some(MembershipResult::member(-dist)));
            }
            let hull = omega.clone();
            let witness = tangent_witness(xbar, xstar, &d, |x| hull.contains(x).unwrap_or(false));
            Ok(Some(non_member(witness, -dist)))
        }
    }
}

/// `y ∈ ∂̂_ε ρ_F(0) = ∂ρ_F(0) + ε·B`. The witness, if any, is a point `x`
/// with `ρ_F(x) − ⟨y, x⟩ < −ε‖x‖`.
pub(crate) fn gauge_subgradient(gauge: &Gauge, y: &[f64], epsilon: f64) -> Result<MembershipResult> {
    if epsilon == 0.0 && gauge.body().support_raw(y) <= 1.0 + EXACT_TOL {
        return Ok(MembershipResult::member(0.0));
    }
    let (proj, dist) = gauge.polar_projection(y)?;
    if epsilon > 0.0 && dist <= epsilon + EXACT_TOL {
        return Ok(MembershipResult::member(-dist));
    }
    // y − proj lies in the normal cone of the polar set at proj, i.e. in the
    // cone generated by F, so the gauge is finite there and the quotient
    // along it equals −dist.
    let mut d = sub(y, &proj);
    if norm2(&d) == 0.0 {
        // Only reachable when the support test and the projection disagree
        // within rounding; fall back to the maximizing direction.
        d = y.to_vec();
    }
    let nd = norm2(&d);
    let x: Vec<f64> = d.iter().map(|c| 1e-3 * c / nd).collect();
    let q = match gauge.eval_raw(&x)? {
        ExtReal::Finite(v) => (v - dot(y, &x)) / norm2(&x),
        ExtReal::PlusInfinity => f64::INFINITY,
    };
    Ok(MembershipResult {
        verdict: Verdict::NonMember,
        witness: Some(Witness { x: Vector::from_raw(x), quotient: q }),
        worst_quotient: -dist,
    })
}

fn in_cone_lp(generators: &[Vec<f64>], target: &[f64]) -> Result<bool> {
    let n = target.len();
    if generators.is_empty() {
        return Ok(target.iter().all(|c| c.abs() <= EXACT_TOL));
    }
    let eq = (0..n).map(|i| (generators.iter().map(|g| g[i]).collect(), target[i])).collect();
    let lp = LinearProgram { cost: vec![0.0; generators.len()], eq, le: vec![] };
    let opts = LpOptions { infeasibility_tol: EXACT_TOL * (1.0 + norm2(target)), ..LpOptions::default() };
    Ok(matches!(lp::solve(&lp, &opts)?, LpOutcome::Optimal { .. }))
}

/// Witness `x = x̄ + t·d` inside Ω for a tangent direction `d`, with the
/// indicator quotient `−⟨x*, x − x̄⟩/‖x − x̄‖`.
fn tangent_witness(xbar: &[f64], xstar: &[f64], d: &[f64], inside: impl Fn(&[f64]) -> bool) -> Option<Witness> {
    let nd = norm2(d);
    if nd == 0.0 {
        return None;
    }
    let mut t = 1e-3 / nd;
    for _ in 0..60 {
        let x: Vec<f64> = xbar.iter().zip(d).map(|(a, b)| a + t * b).collect();
        if inside(&x) {
            let step = sub(&x, xbar);
            let q = -dot(xstar, &step) / norm2(&step);
            return Some(Witness { x: Vector::from_raw(x), quotient: q });
        }
        t *= 0.5;
    }
    None
}

fn non_member(witness: Option<Witness>, worst: f64) -> MembershipResult {
    MembershipResult { verdict: Verdict::NonMember, witness, worst_quotient: worst }
}
