//! Infimal convolution `T(x) = inf_y φ(y − x) + f(y)` and its presets.

use std::cmp::Ordering;

use crate::convex_bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::fields::{domain_sample, Evaluate, Region, ScalarField};
use crate::gauge::Gauge;
use crate::linalg::{dot, project_onto_hull, project_onto_polyhedron, ExtReal, PNorm, Vector};
use crate::lp::{self, LinearProgram, LpOptions, LpOutcome};

/// Tolerance on `φ(0) = 0` at construction.
pub const PHI_ZERO_TOL: f64 = 1e-12;
/// Slack used when the caller does not care about near-minimizers.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Box and resolution for grid search over `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vector,
    pub upper: Vector,
    /// Cells per axis at the coarsest level.
    pub resolution: usize,
    pub refinement_levels: usize,
}

impl GridSpec {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidInput("grid bounds must satisfy lower < upper".into()));
        }
        Ok(Self { lower, upper, resolution: 64, refinement_levels: 3 })
    }
}

/// How `T` is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// f has a finite effective domain; `T` is an exact minimum.
    ExactEnumeration,
    /// f is the indicator of a polyhedral region and φ a gauge of a polytope
    /// or Euclidean ball; each piece is an LP or an exact projection.
    Polyhedral,
    /// Upper bound by refined grid search, flagged approximate.
    GridSearch(GridSpec),
}

/// Result of an evaluation of `T` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct InfConvValue {
    pub value: ExtReal,
    /// Points `y` with objective within `slack` of `value`, sorted
    /// lexicographically by coordinates.
    pub minimizers: Vec<(Vector, f64)>,
    pub slack: f64,
    pub approximate: bool,
    /// Set when grid search found no finite objective in its box.
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
enum Piece {
    Points(Vec<Vec<f64>>),
    Halfspaces(Vec<(Vec<f64>, f64)>),
    Hull(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
enum Engine {
    Exact(Vec<(Vector, f64)>),
    /// `vertices` is `None` for the Euclidean ball of the given radius.
    Polyhedral { gauge: Gauge, vertices: Option<Vec<Vec<f64>>>, radius: f64, pieces: Vec<Piece> },
    Grid(GridSpec),
}

/// The pair (φ, f) together with its evaluation engine.
#[derive(Clone, Debug)]
pub struct InfConvolution {
    phi: ScalarField,
    f: ScalarField,
    engine: Engine,
}

impl InfConvolution {
    /// Picks an exact strategy; fails when neither applies, in which case
    /// [`InfConvolution::with_grid`] must be used.
    pub fn new(phi: ScalarField, f: ScalarField) -> Result<Self> {
        check_phi(&phi, &f)?;
        if let Some(domain) = f.finite_domain()? {
            if domain.is_empty() {
                return Err(Error::DomainEmpty("f has an empty effective domain".into()));
            }
            return Ok(Self { phi, f, engine: Engine::Exact(domain) });
        }
        if let Some(engine) = polyhedral_engine(&phi, &f)? {
            domain_sample(&f, 1, 0)?;
            return Ok(Self { phi, f, engine });
        }
        Err(Error::InvalidInput(
            "no exact strategy for this pair; grid bounds are required".into(),
        ))
    }

    pub fn with_grid(phi: ScalarField, f: ScalarField, grid: GridSpec) -> Result<Self> {
        check_phi(&phi, &f)?;
        check_dim(f.dim(), grid.lower.dim())?;
        if grid.resolution == 0 {
            return Err(Error::InvalidInput("grid resolution must be positive".into()));
        }
        Ok(Self { phi, f, engine: Engine::Grid(grid) })
    }

    /// `T_F(·; Ω)`: φ = ρ_F, f = δ_Ω.
    pub fn minimal_time(gauge: Gauge, omega: Region) -> Result<Self> {
        Self::new(ScalarField::Gauge(gauge), ScalarField::indicator(omega))
    }

    /// `d(·; Ω)`.
    pub fn distance(omega: Region) -> Result<Self> {
        let n = omega.dim();
        Self::new(ScalarField::Norm { p: PNorm::L2, dim: n }, ScalarField::indicator(omega))
    }

    /// φ = ρ_F, f = J + δ_Ω.
    pub fn perturbed_minimal_time(gauge: Gauge, j: ScalarField, omega: Region) -> Result<Self> {
        Self::new(ScalarField::Gauge(gauge), ScalarField::perturbed(j, omega)?)
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn strategy(&self) -> Strategy {
        match &self.engine {
            Engine::Exact(_) => Strategy::ExactEnumeration,
            Engine::Polyhedral { .. } => Strategy::Polyhedral,
            Engine::Grid(g) => Strategy::GridSearch(g.clone()),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.engine, Engine::Grid(_))
    }

    pub fn eval(&self, x: &Vector, slack: f64) -> Result<InfConvValue> {
        check_dim(self.dim(), x.dim())?;
        if !(slack >= 0.0) {
            return Err(Error::InvalidInput(format!("slack must be nonnegative, got {slack}")));
        }
        let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut approximate = false;
        let mut warning = None;
        match &self.engine {
            Engine::Exact(domain) => {
                for (y, fy) in domain {
                    let z: Vec<f64> = y.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
                    if let ExtReal::Finite(p) = self.phi.eval_raw(&z)? {
                        candidates.push((y.to_vec(), p + fy));
                    }
                }
            }
            Engine::Polyhedral { gauge, vertices, radius, pieces } => {
                for piece in pieces {
                    piece_minima(gauge, vertices.as_deref(), *radius, piece, x, &mut candidates)?;
                }
            }
            Engine::Grid(grid) => {
                approximate = true;
                candidates = self.grid_search(grid, x, slack)?;
                if candidates.is_empty() {
                    warning = Some("grid bounds contain no point of dom f".to_string());
                }
            }
        }
        Ok(assemble(candidates, slack, approximate, warning))
    }

    /// Value only, skipping minimizer bookkeeping.
    pub(crate) fn value_raw(&self, x: &[f64]) -> Result<ExtReal> {
        match &self.engine {
            Engine::Exact(domain) => {
                let mut best = ExtReal::PlusInfinity;
                let mut z = vec![0.0; x.len()];
                for (y, fy) in domain {
                    for i in 0..x.len() {
                        z[i] = y[i] - x[i];
                    }
                    if let ExtReal::Finite(p) = self.phi.eval_raw(&z)? {
                        best = best.min(ExtReal::Finite(p + fy));
                    }
                }
                Ok(best)
            }
            Engine::Polyhedral { gauge, vertices, radius, pieces } => {
                let mut candidates = Vec::new();
                for piece in pieces {
                    piece_minima(gauge, vertices.as_deref(), *radius, piece, x, &mut candidates)?;
                }
                Ok(candidates
                    .iter()
                    .map(|c| c.1)
                    .fold(ExtReal::PlusInfinity, |a, v| a.min(ExtReal::Finite(v))))
            }
            Engine::Grid(grid) => Ok(self
                .grid_search(grid, x, 0.0)?
                .iter()
                .map(|c| c.1)
                .fold(ExtReal::PlusInfinity, |a, v| a.min(ExtReal::Finite(v)))),
        }
    }

    /// Membership in `S₀ = {x ∈ dom T : T(x) = f(x)}` up to `tol`.
    pub fn is_in_s0(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
        }
        let Some(fx) = self.f.eval_raw(x)?.finite() else { return Ok(false) };
        Ok(match self.value_raw(x)? {
            ExtReal::Finite(t) => (t - fx).abs() <= tol,
            ExtReal::PlusInfinity => false,
        })
    }

    fn objective(&self, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
        let Some(fy) = self.f.eval_raw(y)?.finite() else { return Ok(None) };
        let z: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        Ok(self.phi.eval_raw(&z)?.finite().map(|p| p + fy))
    }

    fn grid_search(&self, grid: &GridSpec, x: &[f64], slack: f64) -> Result<Vec<(Vec<f64>, f64)>> {
        let n = x.len();
        let res = grid.resolution;
        let mut h: Vec<f64> = (0..n).map(|i| (grid.upper[i] - grid.lower[i]) / res as f64).collect();
        let mut axes: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..=res).map(|k| grid.lower[i] + k as f64 * h[i]).collect())
            .collect();
        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        let mut last_level: Vec<(Vec<f64>, f64)> = Vec::new();
        for level in 0..=grid.refinement_levels {
            last_level.clear();
            for_each_node(&axes, |y| {
                if let Some(v) = self.objective(x, y)? {
                    last_level.push((y.to_vec(), v));
                    let better = match &incumbent {
                        None => true,
                        Some((iy, iv)) => v < *iv || (v == *iv && lex_cmp(y, iy) == Ordering::Less),
                    };
                    if better {
                        incumbent = Some((y.to_vec(), v));
                    }
                }
                Ok(())
            })?;
            let Some((c, _)) = &incumbent else { return Ok(Vec::new()) };
            if level == grid.refinement_levels {
                break;
            }
            // Halve the spacing and centre a window of the same node count on
            // the incumbent, keeping the incumbent itself as a node.
            for i in 0..n {
                h[i] *= 0.5;
                let half = (res / 2) as i64;
                axes[i] = (-half..=half)
                    .map(|k| c[i] + k as f64 * h[i])
                    .filter(|&t| t >= grid.lower[i] && t <= grid.upper[i])
                    .collect();
            }
        }
        if let Some(inc) = &incumbent {
            if !last_level.iter().any(|(y, _)| y == &inc.0) {
                last_level.push(inc.clone());
            }
            let best = inc.1;
            last_level.retain(|(_, v)| *v <= best + slack);
        }
        Ok(last_level)
    }
}

impl Evaluate for InfConvolution {
    fn dim(&self) -> usize {
        InfConvolution::dim(self)
    }

    fn eval_at(&self, x: &[f64]) -> Result<ExtReal> {
        self.value_raw(x)
    }
}

/// Preset evaluation of the minimal time function `T_F(x; Ω)`.
pub fn minimal_time(body: &ConvexBody, omega: &Region, x: &Vector) -> Result<InfConvValue> {
    InfConvolution::minimal_time(Gauge::new(body.clone()), omega.clone())?.eval(x, DEFAULT_SLACK)
}

fn check_phi(phi: &ScalarField, f: &ScalarField) -> Result<()> {
    check_dim(phi.dim(), f.dim())?;
    let at_zero = phi.eval_raw(&vec![0.0; phi.dim()])?;
    match at_zero {
        ExtReal::Finite(v) if v.abs() <= PHI_ZERO_TOL => Ok(()),
        other => Err(Error::Precondition(format!("phi(0) must be 0, got {other}"))),
    }
}

fn polyhedral_engine(phi: &ScalarField, f: &ScalarField) -> Result<Option<Engine>> {
    let (Some(gauge), ScalarField::Indicator(region)) = (phi.as_gauge(), f) else { return Ok(None) };
    let (vertices, radius) = match gauge.body() {
        ConvexBody::NormBall { p: PNorm::L2, radius, .. } => (None, *radius),
        body => match body.polytope_vertices() {
            Some(v) => (Some(v), 1.0),
            None => return Ok(None),
        },
    };
    let mut pieces = Vec::new();
    flatten(region, &mut pieces);
    Ok(Some(Engine::Polyhedral { gauge, vertices, radius, pieces }))
}

fn flatten(region: &Region, out: &mut Vec<Piece>) {
    match region {
        Region::PointCloud(p) => out.push(Piece::Points(p.iter().map(|v| v.to_vec()).collect())),
        Region::VPolytope(v) => out.push(Piece::Hull(v.iter().map(|v| v.to_vec()).collect())),
        Region::HalfspaceIntersection { rows, .. } => {
            out.push(Piece::Halfspaces(rows.iter().map(|(a, b)| (a.to_vec(), *b)).collect()))
        }
        Region::Union(parts) => parts.iter().for_each(|p| flatten(p, out)),
    }
}

fn lp_tol(rhs: impl Iterator<Item = f64>) -> LpOptions {
    let r: f64 = rhs.map(|v| v * v).sum::<f64>().sqrt();
    LpOptions { infeasibility_tol: 1e-13 * (1.0 + r), ..LpOptions::default() }
}

/// Pushes `(y, φ(y − x))` minimizing over one piece, if the piece is reachable.
fn piece_minima(
    gauge: &Gauge,
    vertices: Option<&[Vec<f64>]>,
    radius: f64,
    piece: &Piece,
    x: &[f64],
    out: &mut Vec<(Vec<f64>, f64)>,
) -> Result<()> {
    let n = x.len();
    match piece {
        Piece::Points(points) => {
            let mut z = vec![0.0; n];
            for p in points {
                for i in 0..n {
                    z[i] = p[i] - x[i];
                }
                if let ExtReal::Finite(v) = gauge.eval_raw(&z)? {
                    out.push((p.clone(), v));
                }
            }
        }
        Piece::Halfspaces(rows) => match vertices {
            None => {
                if let Some((y, d)) = project_onto_polyhedron(rows, x) {
                    out.push((y, d / radius));
                }
            }
            Some(vs) => {
                // y = x + Vμ, cost Σμ, A(x + Vμ) ≤ b.
                let le: Vec<(Vec<f64>, f64)> = rows
                    .iter()
                    .map(|(a, b)| (vs.iter().map(|v| dot(a, v)).collect(), b - dot(a, x)))
                    .collect();
                let opts = lp_tol(le.iter().map(|r| r.1));
                let lp = LinearProgram { cost: vec![1.0; vs.len()], eq: vec![], le };
                if let LpOutcome::Optimal { z, objective } = lp::solve(&lp, &opts)? {
                    let mut y = x.to_vec();
                    for (mu, v) in z.iter().zip(vs) {
                        for i in 0..n {
                            y[i] += mu * v[i];
                        }
                    }
                    out.push((y, objective.max(0.0)));
                }
            }
        },
        Piece::Hull(ws) => match vertices {
            None => {
                let (y, d) = project_onto_hull(ws, x);
                out.push((y, d / radius));
            }
            Some(vs) => {
                // Vμ − Wλ = −x, Σλ = 1, cost Σμ; then y = Wλ.
                let k = vs.len();
                let mut eq: Vec<(Vec<f64>, f64)> = (0..n)
                    .map(|i| {
                        let mut row: Vec<f64> = vs.iter().map(|v| v[i]).collect();
                        row.extend(ws.iter().map(|w| -w[i]));
                        (row, -x[i])
                    })
                    .collect();
                let mut sum = vec![0.0; k];
                sum.extend(std::iter::repeat(1.0).take(ws.len()));
                eq.push((sum, 1.0));
                let mut cost = vec![1.0; k];
                cost.extend(std::iter::repeat(0.0).take(ws.len()));
                let opts = lp_tol(x.iter().copied().chain([1.0]));
                let lp = LinearProgram { cost, eq, le: vec![] };
                if let LpOutcome::Optimal { z, objective } = lp::solve(&lp, &opts)? {
                    let mut y = vec![0.0; n];
                    for (l, w) in z[k..].iter().zip(ws) {
                        for i in 0..n {
                            y[i] += l * w[i];
                        }
                    }
                    out.push((y, objective.max(0.0)));
                }
            }
        },
    }
    Ok(())
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn assemble(
    candidates: Vec<(Vec<f64>, f64)>,
    slack: f64,
    approximate: bool,
    warning: Option<String>,
) -> InfConvValue {
    let best = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return InfConvValue { value: ExtReal::PlusInfinity, minimizers: vec![], slack, approximate, warning };
    }
    let mut minimizers: Vec<(Vec<f64>, f64)> = candidates.into_iter().filter(|c| c.1 <= best + slack).collect();
    minimizers.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    minimizers.dedup_by(|a, b| a.0 == b.0);
    InfConvValue {
        value: ExtReal::Finite(best),
        minimizers: minimizers.into_iter().map(|(y, v)| (Vector::from_raw(y), v)).collect(),
        slack,
        approximate,
        warning,
    }
}

fn for_each_node(axes: &[Vec<f64>], mut visit: impl FnMut(&[f64]) -> Result<()>) -> Result<()> {
    if axes.iter().any(|a| a.is_empty()) {
        return Ok(());
    }
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut y: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&y)?;
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                y[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            y[d] = axes[d][0];
            d += 1;
            if d == n {
                return Ok(());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Covector;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn two_points() -> Region {
        Region::point_cloud(vec![v(&[3.0, 0.0]), v(&[0.0, 4.0])]).unwrap()
    }

    fn l2() -> ScalarField {
        ScalarField::Norm { p: PNorm::L2, dim: 2 }
    }

    #[test]
    fn two_point_distance_examples() {
        let t = InfConvolution::new(l2(), ScalarField::indicator(two_points())).unwrap();
        assert_eq!(t.strategy(), Strategy::ExactEnumeration);
        let r = t.eval(&v(&[0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(r.value, ExtReal::Finite(3.0));
        assert_eq!(r.minimizers, vec![(v(&[3.0, 0.0]), 3.0)]);
        let r = t.eval(&v(&[3.0, 0.0]), 1e-9).unwrap();
        assert_eq!(r.value, ExtReal::ZERO);
        assert_eq!(r.minimizers[0].0, v(&[3.0, 0.0]));
        // With slack 2 both points are near-minimizers, in lexicographic order.
        let r = t.eval(&v(&[0.0, 0.0]), 2.0).unwrap();
        assert_eq!(r.minimizers.iter().map(|m| m.0.clone()).collect::<Vec<_>>(), vec![v(&[0.0, 4.0]), v(&[3.0, 0.0])]);
    }

    #[test]
    fn perturbed_example() {
        let j = ScalarField::table(vec![(v(&[3.0, 0.0]), 5.0), (v(&[0.0, 4.0]), 0.0)]).unwrap();
        let t = InfConvolution::new(l2(), ScalarField::perturbed(j, two_points()).unwrap()).unwrap();
        let r = t.eval(&v(&[0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(r.value, ExtReal::Finite(4.0));
        assert_eq!(r.minimizers, vec![(v(&[0.0, 4.0]), 4.0)]);
    }

    #[test]
    fn ray_minimal_time() {
        let ray = ConvexBody::singleton(v(&[1.0, 0.0]));
        let omega = Region::point_cloud(vec![v(&[2.0, 0.0])]).unwrap();
        assert_eq!(minimal_time(&ray, &omega, &v(&[0.0, 0.0])).unwrap().value, ExtReal::Finite(2.0));
        assert_eq!(minimal_time(&ray, &omega, &v(&[3.0, 0.0])).unwrap().value, ExtReal::PlusInfinity);
    }

    #[test]
    fn s0_examples() {
        let t = InfConvolution::new(l2(), ScalarField::indicator(two_points())).unwrap();
        assert!(t.is_in_s0(&v(&[0.0, 4.0]), 1e-9).unwrap());
        assert!(!t.is_in_s0(&v(&[1.0, 1.0]), 1e-9).unwrap());
        let pts = Region::point_cloud(vec![v(&[0.0, 0.0]), v(&[3.0, 0.0])]).unwrap();
        let j = ScalarField::table(vec![(v(&[0.0, 0.0]), 0.0), (v(&[3.0, 0.0]), 10.0)]).unwrap();
        let t = InfConvolution::new(l2(), ScalarField::perturbed(j, pts).unwrap()).unwrap();
        assert!(!t.is_in_s0(&v(&[3.0, 0.0]), 1e-9).unwrap());
        assert!(t.is_in_s0(&v(&[0.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn rejects_phi_nonzero_at_origin() {
        let phi = ScalarField::constant(1.0, 2).unwrap();
        assert!(matches!(
            InfConvolution::new(phi, ScalarField::indicator(two_points())),
            Err(Error::Precondition(_))
        ));
    }

    fn halfplane() -> Region {
        Region::halfspaces(vec![(Covector::new(vec![0.0, 1.0]).unwrap(), 0.0)], 2).unwrap()
    }

    #[test]
    fn halfplane_distance_is_positive_part() {
        let t = InfConvolution::distance(halfplane()).unwrap();
        assert_eq!(t.strategy(), Strategy::Polyhedral);
        for (x, want) in [([0.3, 2.0], 2.0), ([-1.0, -5.0], 0.0), ([4.0, 0.5], 0.5)] {
            let r = t.eval(&v(&x), 0.0).unwrap();
            assert!((r.value.to_f64() - want).abs() < 1e-12);
            assert!((r.minimizers[0].0[1] - x[1].min(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn polytope_gauge_to_square() {
        // F = conv{(1,0),(0,1),(1,1)} misses 0; from (−1, 0.5) one reaches the
        // square [0,1]² in time 1 moving along (1,0).
        let f = ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])]).unwrap();
        let square = Region::vpolytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 1.0])]).unwrap();
        let rows = vec![
            (Covector::new(vec![1.0, 0.0]).unwrap(), 1.0),
            (Covector::new(vec![-1.0, 0.0]).unwrap(), 0.0),
            (Covector::new(vec![0.0, 1.0]).unwrap(), 1.0),
            (Covector::new(vec![0.0, -1.0]).unwrap(), 0.0),
        ];
        let square_h = Region::halfspaces(rows, 2).unwrap();
        for region in [square, square_h] {
            let t = InfConvolution::minimal_time(Gauge::new(f.clone()), region).unwrap();
            let r = t.eval(&v(&[-1.0, 0.5]), 0.0).unwrap();
            assert!((r.value.to_f64() - 1.0).abs() < 1e-12, "{:?}", r.value);
            // Up-right cone only: from (2, 0.5) the square is unreachable.
            assert_eq!(t.eval(&v(&[2.0, 0.5]), 0.0).unwrap().value, ExtReal::PlusInfinity);
        }
    }

    #[test]
    fn union_takes_the_nearer_part() {
        let u = Region::union(vec![halfplane(), Region::point_cloud(vec![v(&[0.0, 3.0])]).unwrap()]).unwrap();
        let t = InfConvolution::distance(u).unwrap();
        assert!((t.eval(&v(&[0.0, 2.0]), 0.0).unwrap().value.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_search_bounds_exact_value_and_is_monotone() {
        let j = ScalarField::Norm { p: PNorm::L1, dim: 2 };
        let disc = Region::vpolytope(
            (0..16)
                .map(|i| {
                    let a = i as f64 * std::f64::consts::TAU / 16.0;
                    v(&[2.0 + a.cos(), 1.0 + a.sin()])
                })
                .collect(),
        )
        .unwrap();
        let f = ScalarField::perturbed(j, disc).unwrap();
        let x = v(&[0.0, 0.0]);
        let mut prev = f64::INFINITY;
        for levels in 0..=3 {
            let mut g = GridSpec::new(v(&[-1.0, -1.0]), v(&[4.0, 3.0])).unwrap();
            g.refinement_levels = levels;
            let t = InfConvolution::with_grid(l2(), f.clone(), g).unwrap();
            let r = t.eval(&x, 0.0).unwrap();
            assert!(r.approximate);
            let val = r.value.to_f64();
            assert!(val <= prev + 1e-15);
            prev = val;
        }
        // The disc vertex (1, 1) gives objective √2 + 2; the grid must do no worse.
        assert!(prev <= 2f64.sqrt() + 2.0 + 1e-12);
    }

    #[test]
    fn grid_outside_domain_warns() {
        let f = ScalarField::indicator(two_points());
        let g = GridSpec::new(v(&[10.0, 10.0]), v(&[11.0, 11.0])).unwrap();
        let t = InfConvolution::with_grid(l2(), f, g).unwrap();
        let r = t.eval(&v(&[0.0, 0.0]), 0.0).unwrap();
        assert_eq!(r.value, ExtReal::PlusInfinity);
        assert!(r.warning.is_some());
    }

    #[test]
    fn empty_halfspace_region_is_reported() {
        let rows = vec![
            (Covector::new(vec![1.0, 0.0]).unwrap(), -1.0),
            (Covector::new(vec![-1.0, 0.0]).unwrap(), 0.0),
        ];
        let r = Region::halfspaces(rows, 2).unwrap();
        assert!(matches!(InfConvolution::distance(r), Err(Error::DomainEmpty(_))));
    }
}
