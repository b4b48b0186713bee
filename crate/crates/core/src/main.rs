use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infconv::output::{format_number, nums, Num};
use infconv::scene::{parse_scene, Scene};
use infconv::subdiff::{
    boundary_polygon_2d, frechet_test, holder_test, rhs_frechet, rhs_holder, MembershipResult, SubdiffKind, S0_TOL,
};
use infconv::verifier::{run_suite, Fault, SuiteConfig};
use infconv::{Covector, Error, ExtReal, Vector};

#[derive(Parser)]
#[command(name = "infconv", version, about = "Gauges, infimal convolutions and their subdifferentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gauge of the scene body at a point.
    Gauge {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Value and near-minimizers of T = φ □ f.
    Infconv {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = infconv::infconv::DEFAULT_SLACK)]
        slack: f64,
    },
    /// Whether the infimum of T at the point is attained at the point itself.
    S0 {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Membership of a covector in a subdifferential of T at a point.
    Subdiff {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        covector: String,
        /// `frechet:ε` or `holder:s`.
        #[arg(long)]
        kind: String,
    },
    /// Boundary of the gauge unit ball as a closed polyline (CSV).
    EmitBall {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        resolution: usize,
    },
    /// Boundary polygon of the right-hand side set at a point (CSV).
    EmitSubdiff {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value = "frechet:0")]
        kind: String,
        /// Largest radius searched along each angle.
        #[arg(long, default_value_t = 3.0)]
        cap: f64,
    },
    /// Run the verification suite and print one JSON record per check.
    Verify {
        #[arg(long, value_enum, conflicts_with = "config")]
        suite: Option<Suite>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the records to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corrupt one of the suite's own oracles.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Bundled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    GaugeRadius,
    RhsPredicate,
}

enum Failure {
    Input(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Gauge { scene, point } => {
            let scene = load_scene(&scene)?;
            let x = parse_point(&point, "point", scene.dimension)?;
            let value = scene.gauge()?.eval(&x)?;
            Ok(line(&GaugeOut { value: ext(value) }))
        }
        Command::Infconv { scene, point, slack } => {
            let scene = load_scene(&scene)?;
            let x = parse_point(&point, "point", scene.dimension)?;
            let t = scene.infconv()?;
            let v = t.eval(&x, slack)?;
            let minimizers = v
                .minimizers
                .iter()
                .map(|(y, obj)| MinimizerOut { point: nums(y.coords()), objective: Num(*obj) })
                .collect();
            Ok(line(&InfconvOut {
                value: ext(v.value),
                minimizers,
                slack: Num(v.slack),
                approximate: v.approximate,
                warning: v.warning,
            }))
        }
        Command::S0 { scene, point } => {
            let scene = load_scene(&scene)?;
            let x = parse_point(&point, "point", scene.dimension)?;
            let inside = scene.infconv()?.is_in_s0(&x, S0_TOL)?;
            Ok(line(&S0Out { in_s0: inside }))
        }
        Command::Subdiff { scene, point, covector, kind } => {
            let scene = load_scene(&scene)?;
            let n = scene.dimension;
            let x = parse_point(&point, "point", n)?;
            let y = Covector::new(parse_point(&covector, "covector", n)?.into_inner())?;
            let kind = parse_kind(&kind)?;
            let t = scene.infconv()?;
            let plan = scene.plan()?;
            let (lhs, rhs) = match kind {
                SubdiffKind::Frechet { epsilon } => {
                    (frechet_test(&t, &x, &y, epsilon, &plan)?, rhs_frechet(&t, &x, &y, epsilon, &plan)?)
                }
                SubdiffKind::Holder { s } => {
                    let cap = plan.matched_sigma_cap(s);
                    (holder_test(&t, &x, &y, s, &plan, cap)?, rhs_holder(&t, &x, &y, s, &plan, cap)?)
                }
            };
            let lhs = membership(&lhs);
            Ok(line(&SubdiffOut {
                verdict: lhs.verdict,
                worst_quotient: lhs.worst_quotient,
                witness: lhs.witness,
                rhs: membership(&rhs),
            }))
        }
        Command::EmitBall { scene, resolution } => {
            let scene = load_scene(&scene)?;
            require_plane(&scene)?;
            if resolution == 0 {
                return Err(Failure::Input("resolution must be positive".into()));
            }
            let gauge = scene.gauge()?;
            let mut pts = Vec::new();
            for i in 0..resolution {
                let a = TAU * i as f64 / resolution as f64;
                let u = Vector::new(vec![a.cos(), a.sin()])?;
                // ρ = 0 marks an unbounded ray and ρ = ∞ a direction the body never reaches.
                if let ExtReal::Finite(r) = gauge.eval(&u)? {
                    if r > 0.0 {
                        pts.push((u.coords()[0] / r, u.coords()[1] / r));
                    }
                }
            }
            if let Some(&first) = pts.first() {
                pts.push(first);
            }
            Ok(csv("x,y", &pts))
        }
        Command::EmitSubdiff { scene, point, resolution, kind, cap } => {
            let scene = load_scene(&scene)?;
            require_plane(&scene)?;
            let x = parse_point(&point, "point", 2)?;
            let kind = parse_kind(&kind)?;
            let t = scene.infconv()?;
            let plan = scene.plan()?;
            let polygon = boundary_polygon_2d(
                |y| {
                    Ok(match kind {
                        SubdiffKind::Frechet { epsilon } => rhs_frechet(&t, &x, y, epsilon, &plan)?,
                        SubdiffKind::Holder { s } => rhs_holder(&t, &x, y, s, &plan, plan.matched_sigma_cap(s))?,
                    }
                    .is_member())
                },
                resolution,
                cap,
            )?;
            Ok(csv("angle,radius", &polygon))
        }
        Command::Verify { suite: _, config, seed, out, inject_fault } => {
            let mut cfg = match &config {
                Some(path) => SuiteConfig::from_json(&read(path)?)?,
                None => SuiteConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(f) = inject_fault {
                cfg.fault = Some(match f {
                    FaultArg::GaugeRadius => Fault::GaugeRadius,
                    FaultArg::RhsPredicate => Fault::RhsPredicate,
                });
            }
            let report = run_suite(&cfg)?;
            let text = report.to_jsonl();
            if let Some(path) = out {
                std::fs::write(&path, &text)
                    .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            if report.passed() {
                Ok(text)
            } else {
                print!("{text}");
                Err(Failure::Verification)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    Ok(parse_scene(&read(path)?)?)
}

fn require_plane(scene: &Scene) -> Result<(), Failure> {
    if scene.dimension != 2 {
        return Err(Failure::Input(format!("this command needs a planar scene, got dimension {}", scene.dimension)));
    }
    Ok(())
}

fn parse_point(text: &str, what: &str, n: usize) -> Result<Vector, Failure> {
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("--{what} `{text}`: {e}")))?;
    if coords.len() != n {
        return Err(Failure::Input(format!("--{what} `{text}`: expected {n} coordinates, found {}", coords.len())));
    }
    Ok(Vector::new(coords)?)
}

fn parse_kind(text: &str) -> Result<SubdiffKind, Failure> {
    let bad = || Failure::Input(format!("--kind `{text}`: expected frechet:<epsilon> or holder:<s>"));
    let (name, value) = text.split_once(':').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    let kind = match name {
        "frechet" => SubdiffKind::Frechet { epsilon: value },
        "holder" => SubdiffKind::Holder { s: value },
        _ => return Err(bad()),
    };
    Ok(kind.validate()?)
}

fn ext(v: ExtReal) -> Num {
    match v {
        ExtReal::Finite(x) => Num(x),
        ExtReal::PlusInfinity => Num(f64::INFINITY),
    }
}

#[derive(Serialize)]
struct GaugeOut {
    value: Num,
}

#[derive(Serialize)]
struct MinimizerOut {
    point: Vec<Num>,
    objective: Num,
}

#[derive(Serialize)]
struct InfconvOut {
    value: Num,
    minimizers: Vec<MinimizerOut>,
    slack: Num,
    approximate: bool,
    warning: Option<String>,
}

#[derive(Serialize)]
struct S0Out {
    in_s0: bool,
}

#[derive(Serialize)]
struct WitnessOut {
    x: Vec<Num>,
    quotient: Num,
}

#[derive(Serialize)]
struct MembershipOut {
    verdict: String,
    worst_quotient: Num,
    witness: Option<WitnessOut>,
}

#[derive(Serialize)]
struct SubdiffOut {
    verdict: String,
    worst_quotient: Num,
    witness: Option<WitnessOut>,
    rhs: MembershipOut,
}

fn membership(r: &MembershipResult) -> MembershipOut {
    MembershipOut {
        verdict: format!("{:?}", r.verdict),
        worst_quotient: Num(r.worst_quotient),
        witness: r.witness.as_ref().map(|w| WitnessOut { x: nums(w.x.coords()), quotient: Num(w.quotient) }),
    }
}

fn line(v: &impl Serialize) -> String {
    format!("{}\n", serde_json::to_string(v).expect("plain data serializes"))
}

fn csv(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        out.push_str(&format!("{},{}\n", format_number(*a), format_number(*b)));
    }
    out
}
