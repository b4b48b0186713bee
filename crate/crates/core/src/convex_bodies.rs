//! Closed bounded convex sets used as velocity sets for gauges.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist2, dot, norm2, Covector, PNorm, Vector};
use crate::lp::{self, LinearProgram, LpOptions, LpOutcome};

/// A nonempty closed bounded convex set in R^n.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    /// Convex hull of finitely many points.
    VPolytope { vertices: Vec<Vector> },
    /// `{x : ‖x‖_p ≤ radius}` centred at the origin.
    NormBall { p: PNorm, radius: f64, dim: usize },
    Singleton { point: Vector },
}

impl ConvexBody {
    pub fn vpolytope(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidInput("polytope needs at least one vertex".into()))?;
        let n = first.dim();
        for v in &vertices {
            check_dim(n, v.dim())?;
        }
        Ok(ConvexBody::VPolytope { vertices })
    }

    pub fn norm_ball(p: PNorm, radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        if dim == 0 || dim > crate::linalg::MAX_DIM {
            return Err(Error::InvalidInput(format!("ball dimension {dim} out of range")));
        }
        Ok(ConvexBody::NormBall { p, radius, dim })
    }

    pub fn euclidean_ball(dim: usize) -> Self {
        ConvexBody::NormBall { p: PNorm::L2, radius: 1.0, dim }
    }

    pub fn singleton(point: Vector) -> Self {
        ConvexBody::Singleton { point }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::VPolytope { vertices } => vertices[0].dim(),
            ConvexBody::NormBall { dim, .. } => *dim,
            ConvexBody::Singleton { point } => point.dim(),
        }
    }

    /// True when the body is `{0}`.
    pub fn is_origin(&self) -> bool {
        match self {
            ConvexBody::VPolytope { vertices } => vertices.iter().all(|v| v.iter().all(|&c| c == 0.0)),
            ConvexBody::NormBall { .. } => false,
            ConvexBody::Singleton { point } => point.iter().all(|&c| c == 0.0),
        }
    }

    /// Support function `sup_{u∈F} ⟨x*, u⟩`.
    pub fn support(&self, xstar: &Covector) -> Result<f64> {
        check_dim(self.dim(), xstar.dim())?;
        Ok(self.support_raw(xstar))
    }

    pub(crate) fn support_raw(&self, xstar: &[f64]) -> f64 {
        match self {
            ConvexBody::VPolytope { vertices } => vertices
                .iter()
                .map(|v| dot(xstar, v))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::NormBall { p, radius, .. } => radius * p.dual().eval(xstar),
            ConvexBody::Singleton { point } => dot(xstar, point),
        }
    }

    /// Membership of `x` in F up to `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
        }
        self.contains_scaled(x, 1.0, tol)
    }

    /// Membership of `x` in `t·F` for `t > 0`, decided without dividing by `t`
    /// so that the feasibility residual stays in the units of `x`.
    pub(crate) fn contains_scaled(&self, x: &[f64], t: f64, tol: f64) -> Result<bool> {
        match self {
            ConvexBody::VPolytope { vertices } => {
                let n = x.len();
                let k = vertices.len();
                let mut eq: Vec<(Vec<f64>, f64)> = (0..n)
                    .map(|i| (vertices.iter().map(|v| v[i]).collect(), x[i]))
                    .collect();
                eq.push((vec![1.0; k], t));
                let lp = LinearProgram { cost: vec![0.0; k], eq, le: vec![] };
                let opts = LpOptions {
                    infeasibility_tol: tol + 1e-14 * (1.0 + norm2(x) + t),
                    ..LpOptions::default()
                };
                Ok(matches!(lp::solve(&lp, &opts)?, LpOutcome::Optimal { .. }))
            }
            ConvexBody::NormBall { p, radius, .. } => Ok(p.eval(x) <= t * radius + tol),
            ConvexBody::Singleton { point } => {
                let scaled: Vec<f64> = point.iter().map(|c| c * t).collect();
                Ok(dist2(x, &scaled) <= tol + 1e-12 * (1.0 + norm2(x)))
            }
        }
    }

    /// `‖F‖ = sup_{u∈F} ‖u‖` (Euclidean).
    pub fn body_norm(&self) -> f64 {
        match self {
            ConvexBody::VPolytope { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            ConvexBody::NormBall { p, radius, dim } => radius * p.max_euclidean_on_unit_ball(*dim),
            ConvexBody::Singleton { point } => point.norm(),
        }
    }

    /// Vertex list when the body is a polytope (every variant except the
    /// Euclidean ball). Sign-vector enumeration for the ∞-ball is limited to
    /// n ≤ 12.
    pub fn polytope_vertices(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            ConvexBody::VPolytope { vertices } => Some(vertices.iter().map(|v| v.to_vec()).collect()),
            ConvexBody::Singleton { point } => Some(vec![point.to_vec()]),
            ConvexBody::NormBall { p: PNorm::L2, .. } => None,
            ConvexBody::NormBall { p: PNorm::L1, radius, dim } => {
                let mut out = Vec::with_capacity(2 * dim);
                for i in 0..*dim {
                    for s in [1.0, -1.0] {
                        let mut v = vec![0.0; *dim];
                        v[i] = s * radius;
                        out.push(v);
                    }
                }
                Some(out)
            }
            ConvexBody::NormBall { p: PNorm::LInf, radius, dim } => {
                if *dim > 12 {
                    return None;
                }
                Some(
                    (0..1usize << dim)
                        .map(|mask| {
                            (0..*dim)
                                .map(|i| if mask >> i & 1 == 1 { -radius } else { *radius })
                                .collect()
                        })
                        .collect(),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn diamond() -> ConvexBody {
        ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])]).unwrap()
    }

    #[test]
    fn support_examples() {
        let simplex = ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let c = Covector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(simplex.support(&c).unwrap(), 1.0);
        let ball = ConvexBody::euclidean_ball(2);
        assert_eq!(ball.support(&Covector::new(vec![3.0, 4.0]).unwrap()).unwrap(), 5.0);
        let zero = ConvexBody::singleton(Vector::zeros(2));
        assert_eq!(zero.support(&Covector::new(vec![-7.0, 2.0]).unwrap()).unwrap(), 0.0);
        assert!(matches!(
            ball.support(&Covector::new(vec![1.0]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn contains_examples() {
        let d = diamond();
        assert!(d.contains(&v(&[0.5, 0.5]), 0.0).unwrap());
        assert!(!d.contains(&v(&[0.6, 0.6]), 0.0).unwrap());
        let seg = ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap();
        assert!(seg.contains(&v(&[0.0, 0.0]), 0.0).unwrap());
        assert!(!seg.contains(&v(&[0.0, 0.1]), 1e-9).unwrap());
    }

    #[test]
    fn body_norm_examples() {
        assert_eq!(diamond().body_norm(), 1.0);
        let cube = ConvexBody::norm_ball(PNorm::LInf, 1.0, 2).unwrap();
        assert!((cube.body_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ConvexBody::singleton(Vector::zeros(3)).body_norm(), 0.0);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(ConvexBody::vpolytope(vec![]).is_err());
        assert!(ConvexBody::vpolytope(vec![v(&[1.0]), v(&[1.0, 2.0])]).is_err());
        assert!(ConvexBody::norm_ball(PNorm::L2, 0.0, 2).is_err());
    }

    #[test]
    fn ball_vertices_reproduce_support() {
        let c = Covector::new(vec![0.3, -1.2, 0.5]).unwrap();
        for p in [PNorm::L1, PNorm::LInf] {
            let ball = ConvexBody::norm_ball(p, 1.5, 3).unwrap();
            let vs = ball.polytope_vertices().unwrap();
            let poly = ConvexBody::vpolytope(vs.into_iter().map(|x| Vector::new(x).unwrap()).collect()).unwrap();
            assert!((ball.support(&c).unwrap() - poly.support(&c).unwrap()).abs() < 1e-12);
        }
    }
}
