//! JSON scene files: a velocity body, a target region, an optional
//! perturbation and sampling overrides.

use serde::Deserialize;

use crate::convex_bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::fields::{Region, ScalarField};
use crate::gauge::Gauge;
use crate::infconv::{GridSpec, InfConvolution};
use crate::linalg::{Covector, PNorm, Vector};
use crate::subdiff::SamplingPlan;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub dimension: usize,
    #[serde(rename = "F")]
    pub body: BodySpec,
    #[serde(rename = "Omega")]
    pub omega: RegionSpec,
    #[serde(rename = "J", default)]
    pub j: Option<FieldSpec>,
    #[serde(default)]
    pub phi: Option<PhiSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub plan: Option<PlanSpec>,
    #[serde(default)]
    pub grid: Option<GridOverride>,
}

/// `p` of a norm: 1, 2 or "inf".
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(try_from = "RawP")]
pub struct PSpec(pub PNorm);

#[derive(Deserialize)]
#[serde(untagged)]
enum RawP {
    Number(f64),
    Name(String),
}

impl TryFrom<RawP> for PSpec {
    type Error = String;

    fn try_from(raw: RawP) -> std::result::Result<Self, String> {
        match raw {
            RawP::Number(p) if p == 1.0 => Ok(PSpec(PNorm::L1)),
            RawP::Number(p) if p == 2.0 => Ok(PSpec(PNorm::L2)),
            RawP::Name(n) if n == "inf" => Ok(PSpec(PNorm::LInf)),
            RawP::Number(p) => Err(format!("p must be 1, 2 or \"inf\", got {p}")),
            RawP::Name(n) => Err(format!("p must be 1, 2 or \"inf\", got \"{n}\"")),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Vpolytope { vertices: Vec<Vec<f64>> },
    Ball { p: PSpec, radius: f64 },
    Singleton { point: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Points { points: Vec<Vec<f64>> },
    Vpolytope { vertices: Vec<Vec<f64>> },
    Halfspaces { rows: Vec<HalfspaceSpec> },
    Union { parts: Vec<RegionSpec> },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Table { entries: Vec<TableEntry> },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhiSpec {
    Gauge,
    Norm { p: PSpec },
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub base_radius: Option<f64>,
    pub decay: Option<f64>,
    pub levels: Option<usize>,
    pub directions: Option<usize>,
    pub quotient_tolerance: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridOverride {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Option<usize>,
    pub refinement_levels: Option<usize>,
}

/// Parses a scene, reporting the JSON path, line and column of the first
/// offending key.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| {
        Error::InvalidInput(format!("scene: at `{}`: {}", e.path(), e.inner()))
    })?;
    scene.check_dimensions()?;
    Ok(scene)
}

fn vector(coords: &[f64], n: usize, key: &str) -> Result<Vector> {
    if coords.len() != n {
        return Err(Error::InvalidInput(format!(
            "scene: `{key}` has {} coordinates, dimension is {n}",
            coords.len()
        )));
    }
    Vector::new(coords.to_vec()).map_err(|e| Error::InvalidInput(format!("scene: `{key}`: {e}")))
}

impl BodySpec {
    pub fn build(&self, n: usize) -> Result<ConvexBody> {
        match self {
            BodySpec::Vpolytope { vertices } => ConvexBody::vpolytope(
                vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vector(v, n, &format!("F.vertices[{i}]")))
                    .collect::<Result<_>>()?,
            ),
            BodySpec::Ball { p, radius } => ConvexBody::norm_ball(p.0, *radius, n),
            BodySpec::Singleton { point } => Ok(ConvexBody::singleton(vector(point, n, "F.point")?)),
        }
    }
}

impl RegionSpec {
    pub fn build(&self, n: usize) -> Result<Region> {
        self.build_at(n, "Omega")
    }

    fn build_at(&self, n: usize, key: &str) -> Result<Region> {
        match self {
            RegionSpec::Points { points } => Region::point_cloud(
                points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vector(p, n, &format!("{key}.points[{i}]")))
                    .collect::<Result<_>>()?,
            ),
            RegionSpec::Vpolytope { vertices } => Region::vpolytope(
                vertices
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vector(p, n, &format!("{key}.vertices[{i}]")))
                    .collect::<Result<_>>()?,
            ),
            RegionSpec::Halfspaces { rows } => Region::halfspaces(
                rows.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let a = vector(&r.normal, n, &format!("{key}.rows[{i}].normal"))?;
                        Ok((Covector::new(a.into_inner())?, r.offset))
                    })
                    .collect::<Result<_>>()?,
                n,
            ),
            RegionSpec::Union { parts } => Region::union(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.build_at(n, &format!("{key}.parts[{i}]")))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

impl FieldSpec {
    pub fn build(&self, n: usize) -> Result<ScalarField> {
        match self {
            FieldSpec::Zero => ScalarField::constant(0.0, n),
            FieldSpec::Table { entries } => ScalarField::table(
                entries
                    .iter()
                    .enumerate()
                    .map(|(i, e)| Ok((vector(&e.point, n, &format!("J.entries[{i}].point"))?, e.value)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

impl Scene {
    fn check_dimensions(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::InvalidInput("scene: `dimension` must be positive".into()));
        }
        self.body.build(n)?;
        self.omega.build(n)?;
        if let Some(j) = &self.j {
            j.build(n)?;
        }
        if let Some(g) = &self.grid {
            vector(&g.lower, n, "grid.lower")?;
            vector(&g.upper, n, "grid.upper")?;
        }
        Ok(())
    }

    pub fn gauge(&self) -> Result<Gauge> {
        Ok(Gauge::new(self.body.build(self.dimension)?))
    }

    pub fn region(&self) -> Result<Region> {
        self.omega.build(self.dimension)
    }

    pub fn phi(&self) -> Result<ScalarField> {
        match &self.phi {
            None | Some(PhiSpec::Gauge) => Ok(ScalarField::Gauge(self.gauge()?)),
            Some(PhiSpec::Norm { p }) => Ok(ScalarField::Norm { p: p.0, dim: self.dimension }),
        }
    }

    /// `δ_Ω`, or `J + δ_Ω` when a perturbation is given.
    pub fn f(&self) -> Result<ScalarField> {
        let omega = self.region()?;
        match &self.j {
            None => Ok(ScalarField::indicator(omega)),
            Some(j) => ScalarField::perturbed(j.build(self.dimension)?, omega),
        }
    }

    pub fn infconv(&self) -> Result<InfConvolution> {
        match &self.grid {
            None => InfConvolution::new(self.phi()?, self.f()?),
            Some(g) => {
                let n = self.dimension;
                let mut spec = GridSpec::new(vector(&g.lower, n, "grid.lower")?, vector(&g.upper, n, "grid.upper")?)?;
                if let Some(r) = g.resolution {
                    spec.resolution = r;
                }
                if let Some(l) = g.refinement_levels {
                    spec.refinement_levels = l;
                }
                InfConvolution::with_grid(self.phi()?, self.f()?, spec)
            }
        }
    }

    pub fn plan(&self) -> Result<SamplingPlan> {
        let mut plan = SamplingPlan::for_dim(self.dimension);
        if let Some(seed) = self.seed {
            plan.seed = seed;
        }
        if let Some(o) = &self.plan {
            if let Some(v) = o.base_radius {
                plan.base_radius = v;
            }
            if let Some(v) = o.decay {
                plan.decay = v;
            }
            if let Some(v) = o.levels {
                plan.levels = v;
            }
            if let Some(v) = o.directions {
                plan.directions = v;
            }
            if let Some(v) = o.quotient_tolerance {
                plan.quotient_tolerance = v;
            }
        }
        plan.validate()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLEX: &str = r#"{
        "dimension": 2,
        "F": {"kind": "vpolytope", "vertices": [[1, 0], [0, 1]]},
        "Omega": {"kind": "points", "points": [[0, 0]]}
    }"#;

    #[test]
    fn parses_a_minimal_scene() {
        let s = parse_scene(SIMPLEX).unwrap();
        assert_eq!(s.dimension, 2);
        assert_eq!(s.gauge().unwrap().eval(&Vector::new(vec![2.0, 2.0]).unwrap()).unwrap().to_f64(), 4.0);
        assert!(matches!(s.f().unwrap(), ScalarField::Indicator(_)));
    }

    #[test]
    fn balls_and_tables() {
        let s = parse_scene(
            r#"{"dimension": 2, "F": {"kind": "ball", "p": "inf", "radius": 2},
                "Omega": {"kind": "points", "points": [[3, 0], [0, 4]]},
                "J": {"kind": "table", "entries": [{"point": [3, 0], "value": 5}, {"point": [0, 4], "value": 0}]},
                "phi": {"kind": "norm", "p": 2}, "seed": 3, "plan": {"levels": 12}}"#,
        )
        .unwrap();
        assert!(matches!(s.f().unwrap(), ScalarField::Perturbed { .. }));
        let t = s.infconv().unwrap();
        assert_eq!(t.eval(&Vector::zeros(2), 0.0).unwrap().value.to_f64(), 4.0);
        let plan = s.plan().unwrap();
        assert_eq!((plan.levels, plan.seed), (12, 3));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_scene(r#"{"dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1, "color": 1}, "Omega": {"kind": "points", "points": [[0,0]]}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("F") && err.contains("color") && err.contains("line 1"), "{err}");
        let err = parse_scene(r#"{"dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1}, "Omega": {"kind": "points", "points": [[0,0]]}, "extra": 0}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn dimensions_must_agree() {
        let err = parse_scene(r#"{"dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1}, "Omega": {"kind": "points", "points": [[0,0,0]]}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("Omega.points[0]"), "{err}");
    }

    #[test]
    fn unions_and_halfspaces() {
        let s = parse_scene(
            r#"{"dimension": 1, "F": {"kind": "vpolytope", "vertices": [[-1], [2]]},
                "Omega": {"kind": "union", "parts": [
                    {"kind": "halfspaces", "rows": [{"normal": [-1], "offset": 0}]},
                    {"kind": "vpolytope", "vertices": [[-5], [-4]]}]}}"#,
        )
        .unwrap();
        let r = s.region().unwrap();
        assert!(r.contains(&[3.0]).unwrap() && r.contains(&[-4.5]).unwrap() && !r.contains(&[-2.0]).unwrap());
    }
}
