use crate::convex_bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{Region, ScalarField};
use crate::gauge::Gauge;
use crate::infconv::InfConvolution;
use crate::linalg::{Covector, PNorm, Vector};
use crate::scene::Scene;
use crate::subdiff::S0_TOL;

/// A minimal time instance `T = ρ_F □ (J + δ_Ω)` with base points in S₀.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub gauge: Gauge,
    pub omega: Region,
    pub j: Option<ScalarField>,
    pub base_points: Vec<Vector>,
    /// Calmness constant of f at the base points; estimated by sampling
    /// when absent.
    pub known_ell: Option<f64>,
    /// Covectors on or near the boundary of the expected sets, tried in
    /// addition to the random sample.
    pub boundary_covectors: Vec<Covector>,
    /// Compare boundary polygons (two dimensions only).
    pub polygons: bool,
    /// Run the Hölder checks, including the cross-s comparison.
    pub holder: bool,
    t: InfConvolution,
}

impl Fixture {
    pub fn new(
        name: &str,
        gauge: Gauge,
        omega: Region,
        j: Option<ScalarField>,
        base_points: Vec<Vector>,
        known_ell: Option<f64>,
    ) -> Result<Self> {
        let t = match &j {
            None => InfConvolution::minimal_time(gauge.clone(), omega.clone()),
            Some(j) => InfConvolution::perturbed_minimal_time(gauge.clone(), j.clone(), omega.clone()),
        }
        .map_err(|e| tag(name, e))?;
        if base_points.is_empty() {
            return Err(Error::InvalidInput(format!("fixture {name}: no base points")));
        }
        for p in &base_points {
            if p.dim() != t.dim() || !t.is_in_s0(p, S0_TOL).map_err(|e| tag(name, e))? {
                return Err(Error::Precondition(format!("fixture {name}: base point {:?} is not in S0", p.coords())));
            }
        }
        let m = gauge.coercivity_constant();
        if let Some(ell) = known_ell {
            if !(ell >= 0.0 && ell < m) {
                return Err(Error::InvalidInput(format!(
                    "fixture {name}: known ell = {ell} must satisfy 0 <= ell < m = {m}"
                )));
            }
        }
        let polygons = t.dim() == 2;
        Ok(Self {
            name: name.to_string(),
            gauge,
            omega,
            j,
            base_points,
            known_ell,
            boundary_covectors: Vec::new(),
            polygons,
            holder: true,
            t,
        })
    }

    /// A fixture from a scene. Only gauge φ is supported.
    pub fn from_scene(name: &str, scene: &Scene, base_points: &[Vec<f64>], known_ell: Option<f64>) -> Result<Self> {
        let n = scene.dimension;
        if scene.phi.is_some() && !matches!(scene.phi, Some(crate::scene::PhiSpec::Gauge)) {
            return Err(Error::InvalidInput(format!("fixture {name}: phi must be the gauge of F")));
        }
        let gauge = scene.gauge().map_err(|e| tag(name, e))?;
        let omega = scene.region().map_err(|e| tag(name, e))?;
        let j = scene.j.as_ref().map(|j| j.build(n)).transpose().map_err(|e| tag(name, e))?;
        let base = base_points
            .iter()
            .map(|p| {
                if p.len() != n {
                    return Err(Error::InvalidInput(format!("fixture {name}: base point {p:?} has wrong dimension")));
                }
                Vector::new(p.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, gauge, omega, j, base, known_ell)
    }

    pub fn with_boundary_covectors(mut self, covectors: &[&[f64]]) -> Self {
        self.boundary_covectors = covectors.iter().map(|c| Covector::from_raw(c.to_vec())).collect();
        self
    }

    pub fn transform(&self) -> &InfConvolution {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    /// `m = 1/‖F‖`.
    pub fn coercivity_constant(&self) -> f64 {
        self.gauge.coercivity_constant()
    }
}

fn tag(name: &str, e: Error) -> Error {
    match e {
        Error::DomainEmpty(m) => Error::DomainEmpty(format!("fixture {name}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("fixture {name}: {m}")),
        Error::Precondition(m) => Error::Precondition(format!("fixture {name}: {m}")),
        other => other,
    }
}

fn v(c: &[f64]) -> Vector {
    Vector::from_raw(c.to_vec())
}

fn c(c: &[f64]) -> Covector {
    Covector::from_raw(c.to_vec())
}

fn vertices(pts: &[[f64; 2]]) -> Vec<Vector> {
    pts.iter().map(|p| v(p)).collect()
}

fn ball() -> Gauge {
    Gauge::new(ConvexBody::euclidean_ball(2))
}

fn unit_square_rows() -> Vec<(Covector, f64)> {
    vec![(c(&[1.0, 0.0]), 1.0), (c(&[-1.0, 0.0]), 0.0), (c(&[0.0, 1.0]), 1.0), (c(&[0.0, -1.0]), 0.0)]
}

/// Five points pairwise at least 3 apart.
pub(crate) const CLOUD: [[f64; 2]; 5] = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0], [-3.0, 1.5]];

pub const BUNDLED_NAMES: [&str; 9] = [
    "two_point_ball",
    "halfplane_ball",
    "square_simplex",
    "square_offset_simplex",
    "cloud_const_ball",
    "cloud_sloped_box",
    "ray_interval_1d",
    "steep_perturbation",
    "l_shape_ball",
];

pub fn bundled_fixture(name: &str) -> Result<Fixture> {
    let fx = match name {
        "two_point_ball" => Fixture::new(
            name,
            ball(),
            Region::point_cloud(vertices(&[[3.0, 0.0], [0.0, 4.0]]))?,
            None,
            vertices(&[[3.0, 0.0], [0.0, 4.0]]),
            None,
        )?
        .with_boundary_covectors(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, -1.0], &[0.6, 0.8], &[-0.8, 0.6], &[1.2, 0.0]]),
        "halfplane_ball" => Fixture::new(
            name,
            ball(),
            Region::halfspaces(vec![(c(&[0.0, 1.0]), 0.0)], 2)?,
            None,
            vertices(&[[0.0, 0.0], [-1.5, 0.0], [0.0, -1.0]]),
            None,
        )?
        .with_boundary_covectors(&[
            &[0.0, 0.0],
            &[0.0, 0.5],
            &[0.0, 1.0],
            &[0.0, 1.5],
            &[0.0, -0.5],
            &[1e-3, 0.5],
            &[-1e-3, 0.5],
        ]),
        "square_simplex" => Fixture::new(
            name,
            Gauge::new(ConvexBody::vpolytope(vertices(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]))?),
            Region::vpolytope(vertices(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))?,
            None,
            vertices(&[[1.0, 1.0], [1.0, 0.5], [0.0, 0.0]]),
            None,
        )?
        .with_boundary_covectors(&[
            &[0.5, 0.5],
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[0.5, 0.0],
            &[1.2, 0.0],
            &[-1.0, -1.0],
            &[-1.1, 0.0],
            &[0.6, 0.6],
        ]),
        "square_offset_simplex" => Fixture::new(
            name,
            Gauge::new(ConvexBody::vpolytope(vertices(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))?),
            Region::halfspaces(unit_square_rows(), 2)?,
            None,
            vertices(&[[1.0, 1.0], [0.0, 0.0], [0.5, 0.0]]),
            None,
        )?
        .with_boundary_covectors(&[
            &[-0.5, -0.5],
            &[-1.0, 0.0],
            &[0.0, -1.0],
            &[1.0, 1.0],
            &[2.0, 0.0],
            &[0.0, -0.5],
            &[-0.6, -0.6],
        ]),
        "cloud_const_ball" => Fixture::new(
            name,
            ball(),
            Region::point_cloud(vertices(&CLOUD))?,
            Some(ScalarField::table(CLOUD.iter().map(|p| (v(p), 1.0)).collect())?),
            vertices(&CLOUD),
            Some(0.0),
        )?
        .with_boundary_covectors(&[&[0.0, 0.0], &[1.0, 0.0], &[0.6, -0.8], &[1.05, 0.0]]),
        "cloud_sloped_box" => {
            let dir = [0.6, 0.8];
            let table = CLOUD.iter().map(|p| (v(p), 0.3 * (dir[0] * p[0] + dir[1] * p[1]))).collect();
            Fixture::new(
                name,
                Gauge::new(ConvexBody::norm_ball(PNorm::LInf, 2f64.sqrt(), 2)?),
                Region::point_cloud(vertices(&CLOUD))?,
                Some(ScalarField::table(table)?),
                vertices(&CLOUD),
                Some(0.3),
            )?
            .with_boundary_covectors(&[&[0.0, 0.0], &[0.5, 0.0], &[0.25, 0.25], &[-0.3, 0.3], &[0.4, 0.4]])
        }
        "ray_interval_1d" => {
            let mut fx = Fixture::new(
                name,
                Gauge::new(ConvexBody::vpolytope(vec![v(&[-1.0]), v(&[2.0])])?),
                Region::halfspaces(vec![(c(&[-1.0]), 0.0)], 1)?,
                None,
                vec![v(&[0.0]), v(&[1.5])],
                None,
            )?
            .with_boundary_covectors(&[&[-0.5], &[0.0], &[-0.6], &[0.25], &[-0.25], &[1.0]]);
            fx.polygons = false;
            fx
        }
        "steep_perturbation" => {
            let pts = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]];
            Fixture::new(
                name,
                ball(),
                Region::point_cloud(vertices(&pts))?,
                Some(ScalarField::table(pts.iter().map(|p| (v(p), 2.0 * p[0])).collect())?),
                vertices(&[[0.0, 0.0]]),
                None,
            )?
        }
        "l_shape_ball" => {
            let rect = |w: f64, h: f64| {
                Region::halfspaces(
                    vec![(c(&[1.0, 0.0]), w), (c(&[-1.0, 0.0]), 0.0), (c(&[0.0, 1.0]), h), (c(&[0.0, -1.0]), 0.0)],
                    2,
                )
            };
            let mut fx = Fixture::new(
                name,
                ball(),
                Region::union(vec![rect(2.0, 1.0)?, rect(1.0, 2.0)?])?,
                None,
                vertices(&[[1.0, 1.0], [2.0, 1.0]]),
                None,
            )?
            .with_boundary_covectors(&[&[0.0, 0.0], &[0.5, 0.5], &[0.5, 0.0], &[0.0, 0.5]]);
            fx.polygons = false;
            fx.holder = false;
            fx
        }
        _ => return Err(Error::InvalidInput(format!("unknown fixture `{name}`"))),
    };
    Ok(fx)
}

pub fn bundled_fixtures() -> Vec<Fixture> {
    BUNDLED_NAMES.iter().map(|n| bundled_fixture(n).expect("bundled fixtures are valid")).collect()
}
