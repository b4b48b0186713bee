use proptest::prelude::*;

use infconv::infconv::InfConvolution;
use infconv::output::format_number;
use infconv::{ConvexBody, Covector, ExtReal, Gauge, PNorm, Region, ScalarField, Vector};

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn finite(e: ExtReal) -> Option<f64> {
    match e {
        ExtReal::Finite(x) => Some(x),
        ExtReal::PlusInfinity => None,
    }
}

fn point2() -> impl Strategy<Value = [f64; 2]> {
    [-2.0..2.0f64, -2.0..2.0f64]
}

/// Polytopes in the plane, not necessarily containing the origin.
fn polytope() -> impl Strategy<Value = Gauge> {
    prop::collection::vec(point2(), 3..8)
        .prop_map(|pts| Gauge::new(ConvexBody::vpolytope(pts.iter().map(|p| v(p)).collect()).unwrap()))
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 96, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn positive_homogeneity(g in polytope(), x in point2(), t in 0.01..10.0f64) {
        let a = g.eval(&v(&x)).unwrap();
        let b = g.eval(&v(&[t * x[0], t * x[1]])).unwrap();
        match (finite(a), finite(b)) {
            (Some(a), Some(b)) => prop_assert!((t * a - b).abs() <= 1e-7 * (1.0 + b)),
            (None, None) => {}
            other => prop_assert!(false, "finiteness differs: {:?}", other),
        }
    }

    #[test]
    fn subadditivity(g in polytope(), x in point2(), y in point2()) {
        let s = [x[0] + y[0], x[1] + y[1]];
        if let (Some(a), Some(b)) = (finite(g.eval(&v(&x)).unwrap()), finite(g.eval(&v(&y)).unwrap())) {
            let c = finite(g.eval(&v(&s)).unwrap());
            prop_assert!(c.is_some());
            prop_assert!(c.unwrap() <= a + b + 1e-7 * (1.0 + a + b));
        }
    }

    #[test]
    fn lp_matches_bisection(g in polytope(), x in point2()) {
        let x = v(&x);
        let a = g.eval(&x).unwrap();
        let b = g.eval_bisection(&x, 1e-10).unwrap();
        match (finite(a), finite(b)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-7, "{} vs {}", a, b),
            (None, None) => {}
            other => prop_assert!(false, "finiteness differs: {:?}", other),
        }
    }

    #[test]
    fn coercivity(g in polytope(), x in point2()) {
        let m = g.coercivity_constant();
        if let Some(r) = finite(g.eval(&v(&x)).unwrap()) {
            let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
            prop_assert!(r >= m * n - 1e-9 * (1.0 + n));
        }
    }

    #[test]
    fn polar_is_the_subgradient_inequality(g in polytope(), y in point2(), x in point2()) {
        let y = Covector::new(y.to_vec()).unwrap();
        let inside = g.polar_contains(&y, 1e-9).unwrap();
        prop_assert_eq!(inside, g.body().support(&y).unwrap() <= 1.0 + 1e-9);
        if inside {
            if let Some(r) = finite(g.eval(&v(&x)).unwrap()) {
                prop_assert!(y.pair(&x) <= r + 1e-7 * (1.0 + r));
            }
        }
    }

    #[test]
    fn unit_ball_minimal_time_is_distance(
        cloud in prop::collection::vec(point2(), 1..6),
        x in point2(),
    ) {
        let pts: Vec<Vector> = cloud.iter().map(|p| v(p)).collect();
        let t = InfConvolution::minimal_time(Gauge::new(ConvexBody::euclidean_ball(2)), Region::point_cloud(pts).unwrap()).unwrap();
        let got = finite(t.eval(&v(&x), 1e-9).unwrap().value).unwrap();
        let want = cloud.iter().map(|p| ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
        prop_assert!((got - want).abs() <= 1e-9);
    }

    #[test]
    fn infimal_convolution_is_a_lower_bound(
        table in prop::collection::vec((point2(), -1.0..1.0f64), 1..6),
        x in point2(),
    ) {
        let entries: Vec<(Vector, f64)> = table.iter().map(|(p, z)| (v(p), *z)).collect();
        let f = ScalarField::table(entries).unwrap();
        let phi = ScalarField::Norm { p: PNorm::L1, dim: 2 };
        let t = InfConvolution::new(phi, f).unwrap();
        let r = t.eval(&v(&x), 1e-9).unwrap();
        let value = finite(r.value).unwrap();
        for (p, z) in &table {
            prop_assert!(value <= (x[0] - p[0]).abs() + (x[1] - p[1]).abs() + z + 1e-12);
        }
        prop_assert!(!r.minimizers.is_empty());
        prop_assert!(!r.approximate);
    }

    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = format_number(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), if x == 0.0 { 0.0 } else { x });
        let digits = s.trim_start_matches('-').split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_matches('0').len() <= 17);
    }
}
