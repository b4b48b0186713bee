//! The Minkowski gauge `ρ_F(x) = inf{t ≥ 0 : x ∈ tF}` of a convex body.

use crate::convex_bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, project_onto_polyhedron, Covector, ExtReal, PNorm, Vector};
use crate::lp::{self, LinearProgram, LpOptions, LpOutcome};

/// Gauge of a convex body. `zero_body_constant` is the coercivity constant
/// reported when the body is `{0}`, where any positive constant works.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge {
    body: ConvexBody,
    zero_body_constant: f64,
}

impl Gauge {
    pub const DEFAULT_ZERO_BODY_CONSTANT: f64 = 1.0;

    pub fn new(body: ConvexBody) -> Self {
        Self { body, zero_body_constant: Self::DEFAULT_ZERO_BODY_CONSTANT }
    }

    pub fn with_zero_body_constant(body: ConvexBody, m0: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(Error::InvalidInput(format!("zero-body constant must be positive, got {m0}")));
        }
        Ok(Self { body, zero_body_constant: m0 })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn eval(&self, x: &Vector) -> Result<ExtReal> {
        check_dim(self.dim(), x.dim())?;
        self.eval_raw(x)
    }

    pub(crate) fn eval_raw(&self, x: &[f64]) -> Result<ExtReal> {
        if x.iter().all(|&c| c == 0.0) {
            return Ok(ExtReal::ZERO);
        }
        match &self.body {
            ConvexBody::NormBall { p, radius, .. } => Ok(ExtReal::Finite(p.eval(x) / radius)),
            ConvexBody::Singleton { point } => Ok(ray_gauge(point, x)),
            ConvexBody::VPolytope { vertices } => {
                // x ∈ tF with x = Σ λ_i v_i, Σλ = 1 becomes Vμ = x, μ = tλ ≥ 0,
                // and t = Σμ: a linear program in μ.
                let n = x.len();
                let k = vertices.len();
                let eq = (0..n).map(|i| (vertices.iter().map(|v| v[i]).collect(), x[i])).collect();
                let lp = LinearProgram { cost: vec![1.0; k], eq, le: vec![] };
                let opts = LpOptions {
                    infeasibility_tol: 1e-8 * (1.0 + norm2(x)),
                    ..LpOptions::default()
                };
                match lp::solve(&lp, &opts)? {
                    LpOutcome::Optimal { objective, .. } => Ok(ExtReal::Finite(objective.max(0.0))),
                    LpOutcome::Infeasible { .. } => Ok(ExtReal::PlusInfinity),
                    LpOutcome::Unbounded => Err(Error::Internal("gauge LP reported unbounded".into())),
                }
            }
        }
    }

    /// Independent evaluation by bisection on `t` with the membership test
    /// `x ∈ t·conv(F ∪ {0})`, whose dilates are nested, so the test is monotone.
    pub fn eval_bisection(&self, x: &Vector, tol: f64) -> Result<ExtReal> {
        check_dim(self.dim(), x.dim())?;
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("bisection tolerance must be positive, got {tol}")));
        }
        let xn = x.norm();
        if xn == 0.0 {
            return Ok(ExtReal::ZERO);
        }
        // Bisection uses a tight residual; the gauge LP's looser threshold only
        // settles points that fail the tight test at every dilate.
        let tight = 1e-12 * (1.0 + xn);
        let mut slack = tight;
        let mut hi = xn * 10.0 / self.coercivity_constant();
        let mut doublings = 0;
        while !self.reaches(x, hi, slack)? {
            doublings += 1;
            if doublings > 60 {
                if slack > tight || !self.reaches(x, hi, 1e-8 * (1.0 + xn))? {
                    return Ok(ExtReal::PlusInfinity);
                }
                slack = 1e-8 * (1.0 + xn);
                break;
            }
            hi *= 2.0;
        }
        let inside = |t: f64| self.reaches(x, t, slack);
        let mut lo = 0.0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(ExtReal::Finite(hi))
    }

    /// `x ∈ t·conv(F ∪ {0})`. The residual is measured in the units of `x`
    /// so the decision does not drift as `t` grows.
    fn reaches(&self, x: &[f64], t: f64, tol: f64) -> Result<bool> {
        match &self.body {
            ConvexBody::NormBall { p, radius, .. } => Ok(p.eval(x) <= t * radius),
            ConvexBody::Singleton { point } => {
                let vv = dot(point, point);
                let s = if vv == 0.0 { 0.0 } else { (dot(x, point) / vv).clamp(0.0, t) };
                let resid = x.iter().zip(point.iter()).map(|(a, b)| (a - s * b).powi(2)).sum::<f64>().sqrt();
                Ok(resid <= tol.max(1e-9 * (1.0 + norm2(x))))
            }
            ConvexBody::VPolytope { vertices } => {
                let n = x.len();
                let k = vertices.len();
                let eq = (0..n).map(|i| (vertices.iter().map(|v| v[i]).collect(), x[i])).collect();
                let lp = LinearProgram { cost: vec![0.0; k], eq, le: vec![(vec![1.0; k], t)] };
                let opts = LpOptions { infeasibility_tol: tol, ..LpOptions::default() };
                Ok(matches!(lp::solve(&lp, &opts)?, LpOutcome::Optimal { .. }))
            }
        }
    }

    /// Coercivity constant `m = 1/‖F‖`, or the configured constant for `{0}`.
    pub fn coercivity_constant(&self) -> f64 {
        if self.body.is_origin() {
            self.zero_body_constant
        } else {
            1.0 / self.body.body_norm()
        }
    }

    /// Membership in `∂ρ_F(0) = {x* : sup_{u∈F} ⟨x*, u⟩ ≤ 1}`.
    pub fn polar_contains(&self, xstar: &Covector, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
        }
        Ok(self.body.support(xstar)? <= 1.0 + tol)
    }

    /// Euclidean projection of `y` onto `∂ρ_F(0)` and the distance. For a
    /// convex gauge `∂̂_ε ρ_F(0) = ∂ρ_F(0) + ε·B`, so the distance decides
    /// ε-subgradients at 0.
    pub(crate) fn polar_projection(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        if let ConvexBody::NormBall { p: PNorm::L2, radius, .. } = &self.body {
            let ny = norm2(y);
            let bound = 1.0 / radius;
            if ny <= bound {
                return Ok((y.to_vec(), 0.0));
            }
            return Ok((y.iter().map(|c| c * bound / ny).collect(), ny - bound));
        }
        let vertices = self
            .body
            .polytope_vertices()
            .ok_or_else(|| Error::InvalidInput("polar projection unsupported for this body".into()))?;
        let rows: Vec<(Vec<f64>, f64)> = vertices.into_iter().map(|v| (v, 1.0)).collect();
        project_onto_polyhedron(&rows, y).ok_or_else(|| Error::Internal("polar set cannot be empty".into()))
    }
}

/// Gauge of `{v}`: the `t ≥ 0` with `x = t·v`, found by projection onto the ray.
fn ray_gauge(v: &[f64], x: &[f64]) -> ExtReal {
    let vv = dot(v, v);
    if vv == 0.0 {
        return ExtReal::PlusInfinity;
    }
    let t = (dot(x, v) / vv).max(0.0);
    let resid: f64 = x.iter().zip(v).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt();
    if resid <= 1e-9 * (1.0 + norm2(x)) {
        ExtReal::Finite(t)
    } else {
        ExtReal::PlusInfinity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn simplex() -> Gauge {
        Gauge::new(ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap())
    }

    // Oracle for two-vertex bodies: solve x = p·a + q·b directly; the gauge is
    // p + q when both weights are nonnegative.
    fn two_vertex_gauge(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> Option<f64> {
        let det = a[0] * b[1] - a[1] * b[0];
        let p = (x[0] * b[1] - x[1] * b[0]) / det;
        let q = (a[0] * x[1] - a[1] * x[0]) / det;
        (p >= 0.0 && q >= 0.0).then_some(p + q)
    }

    #[test]
    fn polytope_examples() {
        let g = simplex();
        let oracle = two_vertex_gauge([1.0, 0.0], [0.0, 1.0], [2.0, 2.0]).unwrap();
        assert_eq!(oracle, 4.0);
        assert_eq!(g.eval(&v(&[2.0, 2.0])).unwrap(), ExtReal::Finite(4.0));
        assert!(two_vertex_gauge([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]).is_none());
        assert_eq!(g.eval(&v(&[-1.0, 0.0])).unwrap(), ExtReal::PlusInfinity);
        assert_eq!(g.eval(&v(&[0.0, 0.0])).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn euclidean_ball_is_norm() {
        let g = Gauge::new(ConvexBody::euclidean_ball(2));
        assert_eq!(g.eval(&v(&[3.0, 4.0])).unwrap(), ExtReal::Finite(5.0));
    }

    #[test]
    fn bisection_matches_lp() {
        let g = simplex();
        let b = g.eval_bisection(&v(&[2.0, 2.0]), 1e-8).unwrap().finite().unwrap();
        assert!((b - 4.0).abs() <= 1e-8);
        assert_eq!(g.eval_bisection(&v(&[0.0, 0.0]), 1e-8).unwrap(), ExtReal::ZERO);
        assert_eq!(g.eval_bisection(&v(&[-1.0, 0.5]), 1e-8).unwrap(), ExtReal::PlusInfinity);
        let zero = Gauge::new(ConvexBody::singleton(Vector::zeros(2)));
        assert_eq!(zero.eval_bisection(&v(&[1.0, 0.0]), 1e-8).unwrap(), ExtReal::PlusInfinity);
    }

    #[test]
    fn zero_body_and_ray() {
        let zero = Gauge::with_zero_body_constant(ConvexBody::singleton(Vector::zeros(2)), 7.0).unwrap();
        assert_eq!(zero.coercivity_constant(), 7.0);
        assert_eq!(zero.eval(&v(&[0.0, 0.0])).unwrap(), ExtReal::ZERO);
        assert_eq!(zero.eval(&v(&[1e-3, 0.0])).unwrap(), ExtReal::PlusInfinity);
        let ray = Gauge::new(ConvexBody::singleton(v(&[1.0, 0.0])));
        assert_eq!(ray.eval(&v(&[2.0, 0.0])).unwrap(), ExtReal::Finite(2.0));
        assert_eq!(ray.eval(&v(&[-1.0, 0.0])).unwrap(), ExtReal::PlusInfinity);
        assert!(Gauge::with_zero_body_constant(ConvexBody::euclidean_ball(2), 0.0).is_err());
    }

    #[test]
    fn coercivity_examples() {
        let diamond = ConvexBody::norm_ball(PNorm::L1, 1.0, 2).unwrap();
        assert_eq!(Gauge::new(diamond).coercivity_constant(), 1.0);
        let cube = ConvexBody::norm_ball(PNorm::LInf, 1.0, 2).unwrap();
        assert!((Gauge::new(cube).coercivity_constant() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polar_examples() {
        let g = Gauge::new(ConvexBody::euclidean_ball(2));
        assert!(g.polar_contains(&Covector::new(vec![0.6, 0.8]).unwrap(), 1e-12).unwrap());
        assert!(!g.polar_contains(&Covector::new(vec![0.9, 0.8]).unwrap(), 1e-9).unwrap());
        assert!(simplex().polar_contains(&Covector::zeros(2), 0.0).unwrap());
    }

    #[test]
    fn polar_projection_of_box() {
        // Polar of the ∞-ball of radius 1 is the 1-ball; (1, 1) is at distance 1/√2.
        let g = Gauge::new(ConvexBody::norm_ball(PNorm::LInf, 1.0, 2).unwrap());
        let (p, d) = g.polar_projection(&[1.0, 1.0]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        assert_eq!(g.polar_projection(&[0.2, -0.3]).unwrap().1, 0.0);
        let ball = Gauge::new(ConvexBody::norm_ball(PNorm::L2, 2.0, 2).unwrap());
        assert!((ball.polar_projection(&[0.0, 3.0]).unwrap().1 - 2.5).abs() < 1e-15);
    }
}
