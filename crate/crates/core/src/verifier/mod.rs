//! Falsifiable replays of the inclusion and equality formulas over fixture
//! instances, reported as one flat record per check.

mod checks;
mod fixtures;

use std::time::Duration;

use serde::{Deserialize, Serialize, Serializer};

pub use checks::{
    check_alpha_inflation, check_degenerate_branches, check_distance_specialization, check_frechet_equality,
    check_gauge_properties, check_holder_equality, check_upper_estimate, hypothesis_violation, sample_covectors,
    CheckSettings, BRUTE_FORCE_TOL, CALM_SAMPLES, COVECTOR_RADII, MAX_COUNTEREXAMPLES, POLYGON_RADIUS_CAP,
    SEGMENT_TOL, UNDETERMINED_CAP,
};
pub use fixtures::{bundled_fixture, bundled_fixtures, Fixture, BUNDLED_NAMES};

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::linalg::{Covector, ExtReal, Vector};
use crate::output::{nums, Num};
use crate::scene::Scene;

/// ε used by the inflation check.
pub const ALPHA_EPSILON: f64 = 0.1;
/// ε levels of the inclusion check.
pub const UPPER_ESTIMATE_EPSILONS: [f64; 2] = [0.0, 0.25];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    SkippedHypothesis,
}

/// An input that violated a check, or a note explaining a verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub base_point: Option<Vec<f64>>,
    pub input: Vec<f64>,
    pub detail: String,
}

impl Counterexample {
    pub fn note(detail: String) -> Self {
        Self { base_point: None, input: Vec::new(), detail }
    }
}

impl Serialize for Counterexample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            base_point: Option<Vec<Num>>,
            input: Vec<Num>,
            detail: &'a str,
        }
        Out { base_point: self.base_point.as_deref().map(nums), input: nums(&self.input), detail: &self.detail }
            .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub check_id: String,
    pub fixture: String,
    pub verdict: CheckVerdict,
    pub trials: usize,
    pub disagreements: usize,
    pub undetermined: usize,
    pub worst_gap: Option<f64>,
    pub counterexamples: Vec<Counterexample>,
    pub members_agree: usize,
    pub nonmembers_agree: usize,
}

impl Serialize for CheckRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            check_id: &'a str,
            fixture: &'a str,
            verdict: CheckVerdict,
            trials: usize,
            disagreements: usize,
            undetermined: usize,
            worst_gap: Option<Num>,
            counterexamples: &'a [Counterexample],
        }
        Out {
            check_id: &self.check_id,
            fixture: &self.fixture,
            verdict: self.verdict,
            trials: self.trials,
            disagreements: self.disagreements,
            undetermined: self.undetermined,
            worst_gap: self.worst_gap.map(Num),
            counterexamples: &self.counterexamples,
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    /// Sorted by `(check_id, fixture)`.
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict != CheckVerdict::Fail)
    }

    pub fn count(&self, verdict: CheckVerdict) -> usize {
        self.records.iter().filter(|r| r.verdict == verdict).count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Faults that the suite can inject into its own oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// The gauge oracle answers for the body scaled by 2.
    GaugeRadius,
    /// The right-hand side predicates answer for `2x*`.
    RhsPredicate,
}

/// Gauge evaluations used by the property check.
pub trait GaugeOracle {
    fn dim(&self) -> usize;
    fn gauge(&self, x: &Vector) -> Result<ExtReal>;
    fn gauge_bisection(&self, x: &Vector) -> Result<ExtReal>;
    fn coercivity_constant(&self) -> f64;
    fn polar_contains(&self, y: &Covector) -> Result<bool>;
    /// Points at which the subgradient inequality decides polar membership,
    /// typically the extreme points of the body.
    fn probe_points(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

impl GaugeOracle for Gauge {
    fn dim(&self) -> usize {
        Gauge::dim(self)
    }

    fn gauge(&self, x: &Vector) -> Result<ExtReal> {
        self.eval(x)
    }

    fn gauge_bisection(&self, x: &Vector) -> Result<ExtReal> {
        self.eval_bisection(x, 1e-10)
    }

    fn coercivity_constant(&self) -> f64 {
        Gauge::coercivity_constant(self)
    }

    fn polar_contains(&self, y: &Covector) -> Result<bool> {
        Gauge::polar_contains(self, y, 1e-9)
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        self.body().polytope_vertices().unwrap_or_default()
    }
}

/// Test double whose LP gauge is that of `2F` while everything else still
/// describes F.
#[derive(Clone, Debug)]
pub struct CorruptedGauge(pub Gauge);

impl GaugeOracle for CorruptedGauge {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn gauge(&self, x: &Vector) -> Result<ExtReal> {
        Ok(match self.0.eval(x)? {
            ExtReal::Finite(v) => ExtReal::Finite(v / 2.0),
            inf => inf,
        })
    }

    fn gauge_bisection(&self, x: &Vector) -> Result<ExtReal> {
        self.0.gauge_bisection(x)
    }

    fn coercivity_constant(&self) -> f64 {
        self.0.coercivity_constant()
    }

    fn polar_contains(&self, y: &Covector) -> Result<bool> {
        GaugeOracle::polar_contains(&self.0, y)
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        self.0.probe_points()
    }
}

/// A fixture named from the bundled set or given inline as a scene.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum FixtureEntry {
    Named(String),
    Inline(InlineFixture),
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InlineFixture {
    pub name: String,
    pub scene: Scene,
    pub base_points: Vec<Vec<f64>>,
    #[serde(default)]
    pub known_ell: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub fixtures: Vec<FixtureEntry>,
    pub seed: u64,
    pub budget_secs: f64,
    pub covectors: usize,
    pub gauge_trials: usize,
    pub polygon_resolution: usize,
    pub hausdorff_tol: f64,
    pub alpha_covectors: usize,
    pub brute_force_queries: usize,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let s = CheckSettings::default();
        Self {
            fixtures: BUNDLED_NAMES.iter().map(|n| FixtureEntry::Named(n.to_string())).collect(),
            seed: s.seed,
            budget_secs: s.budget.as_secs_f64(),
            covectors: s.covectors,
            gauge_trials: s.gauge_trials,
            polygon_resolution: s.polygon_resolution,
            hausdorff_tol: s.hausdorff_tol,
            alpha_covectors: s.alpha_covectors,
            brute_force_queries: s.brute_force_queries,
            fault: None,
        }
    }
}

impl SuiteConfig {
    pub fn bundled(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Parses a JSON config, naming the offending key on error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::InvalidInput(format!("config: at `{}`: {}", e.path(), e.inner())))
    }

    fn settings(&self) -> Result<CheckSettings> {
        if self.fixtures.is_empty() {
            return Err(Error::InvalidInput("config: fixture list is empty".into()));
        }
        if !(self.budget_secs > 0.0 && self.budget_secs.is_finite()) {
            return Err(Error::InvalidInput("config: budget_secs must be positive".into()));
        }
        if self.covectors == 0 || self.polygon_resolution == 0 || self.alpha_covectors == 0 {
            return Err(Error::InvalidInput("config: sample counts must be positive".into()));
        }
        if !(self.hausdorff_tol >= 0.0) {
            return Err(Error::InvalidInput("config: hausdorff_tol must be nonnegative".into()));
        }
        Ok(CheckSettings {
            seed: self.seed,
            budget: Duration::from_secs_f64(self.budget_secs),
            covectors: self.covectors,
            gauge_trials: self.gauge_trials,
            polar_covectors: 500,
            polygon_resolution: self.polygon_resolution,
            hausdorff_tol: self.hausdorff_tol,
            alpha_covectors: self.alpha_covectors,
            brute_force_queries: self.brute_force_queries,
            s_values: vec![0.5, 1.0, 2.0],
            fault: self.fault,
        })
    }

    fn build_fixtures(&self) -> Result<Vec<Fixture>> {
        let mut out: Vec<Fixture> = Vec::new();
        for entry in &self.fixtures {
            let fx = match entry {
                FixtureEntry::Named(name) => bundled_fixture(name)?,
                FixtureEntry::Inline(f) => Fixture::from_scene(&f.name, &f.scene, &f.base_points, f.known_ell)?,
            };
            if out.iter().any(|o| o.name == fx.name) {
                return Err(Error::InvalidInput(format!("config: fixture `{}` listed twice", fx.name)));
            }
            out.push(fx);
        }
        Ok(out)
    }
}

/// Every check applicable to one fixture.
pub fn run_fixture(fx: &Fixture, settings: &CheckSettings) -> Vec<CheckRecord> {
    let mut records = Vec::new();
    let record = if settings.fault == Some(Fault::GaugeRadius) {
        check_gauge_properties(&fx.name, &CorruptedGauge(fx.gauge.clone()), settings)
    } else {
        check_gauge_properties(&fx.name, &fx.gauge, settings)
    };
    records.push(record);
    for eps in UPPER_ESTIMATE_EPSILONS {
        records.push(check_upper_estimate(fx, eps, settings));
    }
    records.push(check_frechet_equality(fx, settings));
    if fx.holder {
        records.push(check_holder_equality(fx, settings));
    }
    if fx.j.is_some() {
        records.push(check_alpha_inflation(fx, ALPHA_EPSILON, settings));
    }
    if fx.name == "halfplane_ball" {
        records.push(check_distance_specialization(fx, settings));
    }
    records
}

/// Runs all checks on the configured fixtures. Errors are input errors:
/// malformed config or fixtures that cannot be built.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let settings = config.settings()?;
    let fixtures = config.build_fixtures()?;
    let mut records: Vec<CheckRecord> = fixtures.iter().flat_map(|fx| run_fixture(fx, &settings)).collect();
    records.push(check_degenerate_branches(&settings));
    records.sort_by(|a, b| (&a.check_id, &a.fixture).cmp(&(&b.check_id, &b.fixture)));
    Ok(VerificationReport { records })
}
