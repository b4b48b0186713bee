//! Points, covectors, extended reals and the small dense routines used by the
//! exact predicates (projections onto polyhedra, hulls and finitely generated
//! cones).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Deref};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 16;

fn validate(coords: &[f64], what: &str) -> Result<()> {
    if coords.is_empty() || coords.len() > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "{what} dimension {} outside 1..={MAX_DIM}",
            coords.len()
        )));
    }
    if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} coordinate {i} is not finite"
        )));
    }
    Ok(())
}

/// A point of the ambient space R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

/// An element of the dual space, paired with points by the dot product.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector(Vec<f64>);

macro_rules! coord_type {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(coords: Vec<f64>) -> Result<Self> {
                validate(&coords, $what)?;
                Ok(Self(coords))
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            /// Wraps coordinates already known to be finite.
            pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
                debug_assert!(coords.iter().all(|c| c.is_finite()));
                Self(coords)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn norm(&self) -> f64 {
                norm2(&self.0)
            }

            pub fn scale(&self, s: f64) -> Self {
                Self(self.0.iter().map(|c| c * s).collect())
            }
        }

        impl Deref for $ty {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl TryFrom<Vec<f64>> for $ty {
            type Error = Error;
            fn try_from(v: Vec<f64>) -> Result<Self> {
                Self::new(v)
            }
        }
    };
}

coord_type!(Vector, "vector");
coord_type!(Covector, "covector");

impl Vector {
    pub fn add(&self, other: &[f64]) -> Vector {
        Vector(add(&self.0, other))
    }

    pub fn sub(&self, other: &[f64]) -> Vector {
        Vector(sub(&self.0, other))
    }
}

impl Covector {
    /// The pairing ⟨x*, x⟩.
    pub fn pair(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    pub fn neg(&self) -> Covector {
        self.scale(-1.0)
    }
}

/// Value in (-inf, +inf].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64::INFINITY` to `PlusInfinity`. Panics on NaN or -inf, which no
    /// field in this crate may produce.
    pub fn from_f64(v: f64) -> ExtReal {
        assert!(!v.is_nan() && v != f64::NEG_INFINITY, "invalid extended real {v}");
        if v == f64::INFINITY {
            ExtReal::PlusInfinity
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PlusInfinity => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PlusInfinity => f64::INFINITY,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PlusInfinity,
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::PlusInfinity) => Ordering::Less,
            (ExtReal::PlusInfinity, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::PlusInfinity, ExtReal::PlusInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// Norms admitted for norm balls and norm fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PNorm {
    L1,
    L2,
    LInf,
}

impl PNorm {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            PNorm::L1 => x.iter().map(|c| c.abs()).sum(),
            PNorm::L2 => norm2(x),
            PNorm::LInf => x.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }

    pub fn dual(self) -> PNorm {
        match self {
            PNorm::L1 => PNorm::LInf,
            PNorm::L2 => PNorm::L2,
            PNorm::LInf => PNorm::L1,
        }
    }

    /// Largest Euclidean norm on the unit ball of this norm in R^n.
    pub fn max_euclidean_on_unit_ball(self, n: usize) -> f64 {
        match self {
            PNorm::L1 | PNorm::L2 => 1.0,
            PNorm::LInf => (n as f64).sqrt(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Calls `visit` for every subset of `0..m` with at most `max_size` elements,
/// in lexicographic order by size.
pub(crate) fn for_each_subset(m: usize, max_size: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, left: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        visit(cur);
        if left == 0 {
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, left - 1, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(max_size);
    rec(0, m, max_size.min(m), &mut cur, &mut visit);
}

/// Least-squares coefficients `c` minimizing ‖target − Σ c_k g_k‖ when the
/// generators are linearly independent; `None` when they are (numerically) not.
pub(crate) fn independent_least_squares(generators: &[&[f64]], target: &[f64]) -> Option<Vec<f64>> {
    let k = generators.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k > target.len() {
        return None;
    }
    let n = target.len();
    let g = DMatrix::from_fn(n, k, |i, j| generators[j][i]);
    let svd = g.svd(true, true);
    let smax = svd.singular_values.max();
    if smax <= 0.0 || svd.singular_values.min() <= 1e-10 * smax {
        return None;
    }
    let b = DVector::from_column_slice(target);
    let sol = svd.solve(&b, 0.0).ok()?;
    Some(sol.iter().copied().collect())
}

fn linearly_independent(generators: &[&[f64]]) -> bool {
    let k = generators.len();
    let n = generators[0].len();
    if k > n {
        return false;
    }
    let g = DMatrix::from_fn(n, k, |i, j| generators[j][i]);
    let sv = g.singular_values();
    let smax = sv.max();
    smax > 0.0 && sv.min() > 1e-10 * smax
}

/// Euclidean projection of `x` onto `{y : ⟨a_i, y⟩ ≤ b_i}` by enumerating
/// candidate active sets. The nearest point is the projection onto the affine
/// set of some linearly independent subset of active rows, so the minimum over
/// feasible candidates is exact. Returns `None` for an empty polyhedron.
pub(crate) fn project_onto_polyhedron(rows: &[(Vec<f64>, f64)], x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = x.len();
    let feasible = |y: &[f64]| {
        rows.iter()
            .all(|(a, b)| dot(a, y) <= b + 1e-15 * (1.0 + b.abs() + norm2(a) * norm2(y)))
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for_each_subset(rows.len(), n, |subset| {
        let y = if subset.is_empty() {
            x.to_vec()
        } else {
            let gens: Vec<&[f64]> = subset.iter().map(|&i| rows[i].0.as_slice()).collect();
            // y = x − Aᵀλ with A y = b  ⇔  (A Aᵀ) λ = A x − b.
            if !linearly_independent(&gens) {
                return;
            }
            let k = gens.len();
            let gram = DMatrix::from_fn(k, k, |i, j| dot(gens[i], gens[j]));
            let rhs = DVector::from_fn(k, |i, _| dot(gens[i], x) - rows[subset[i]].1);
            let Some(lu) = gram.lu().solve(&rhs) else { return };
            let mut y = x.to_vec();
            for (i, g) in gens.iter().enumerate() {
                for (yc, gc) in y.iter_mut().zip(g.iter()) {
                    *yc -= lu[i] * gc;
                }
            }
            y
        };
        if !feasible(&y) {
            return;
        }
        let d = dist2(&y, x);
        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
            best = Some((y, d));
        }
    });
    best
}

/// Euclidean projection of `x` onto the convex hull of `points`.
pub(crate) fn project_onto_hull(points: &[Vec<f64>], x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for_each_subset(points.len(), n + 1, |subset| {
        if subset.is_empty() {
            return;
        }
        let base = &points[subset[0]];
        let diffs: Vec<Vec<f64>> = subset[1..].iter().map(|&i| sub(&points[i], base)).collect();
        let refs: Vec<&[f64]> = diffs.iter().map(|d| d.as_slice()).collect();
        let target = sub(x, base);
        let Some(c) = independent_least_squares(&refs, &target) else { return };
        let lead = 1.0 - c.iter().sum::<f64>();
        if lead < -1e-15 || c.iter().any(|&ci| ci < -1e-15) {
            return;
        }
        let mut y = base.clone();
        for (ci, d) in c.iter().zip(&diffs) {
            for (yc, dc) in y.iter_mut().zip(d) {
                *yc += ci * dc;
            }
        }
        let d = dist2(&y, x);
        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
            best = Some((y, d));
        }
    });
    best.expect("a single point is always a candidate")
}

/// Projection of `x` onto the cone generated by `generators` (nonnegative
/// combinations) and its distance, via enumeration of independent supports.
pub(crate) fn project_onto_cone(generators: &[Vec<f64>], x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut best = (vec![0.0; n], norm2(x));
    for_each_subset(generators.len(), n, |subset| {
        if subset.is_empty() {
            return;
        }
        let refs: Vec<&[f64]> = subset.iter().map(|&i| generators[i].as_slice()).collect();
        let Some(c) = independent_least_squares(&refs, x) else { return };
        if c.iter().any(|&ci| ci < -1e-12) {
            return;
        }
        let mut p = vec![0.0; n];
        for (ci, g) in c.iter().zip(&refs) {
            for (pc, gc) in p.iter_mut().zip(g.iter()) {
                *pc += ci.max(0.0) * gc;
            }
        }
        let d = dist2(&p, x);
        if d < best.1 {
            best = (p, d);
        }
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_oversized() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![0.0; 17]).is_err());
        assert!(Covector::new(vec![0.0; 16]).is_ok());
    }

    #[test]
    fn ext_real_order_and_sum() {
        let a = ExtReal::Finite(3.0);
        assert!(a < ExtReal::PlusInfinity);
        assert_eq!(a + ExtReal::PlusInfinity, ExtReal::PlusInfinity);
        assert_eq!(a + ExtReal::Finite(-1.0), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::from_f64(f64::INFINITY), ExtReal::PlusInfinity);
    }

    #[test]
    fn halfplane_projection() {
        let rows = vec![(vec![0.0, 1.0], 0.0)];
        let (y, d) = project_onto_polyhedron(&rows, &[2.0, 3.0]).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
        assert!((y[0] - 2.0).abs() < 1e-12 && y[1].abs() < 1e-12);
    }

    #[test]
    fn square_projection_hits_corner() {
        let rows = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, -1.0], 0.0),
        ];
        let (_, d) = project_onto_polyhedron(&rows, &[2.0, 2.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let empty = vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], 0.0)];
        assert!(project_onto_polyhedron(&empty, &[0.0, 0.0]).is_none());
    }

    #[test]
    fn hull_projection_matches_square() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let (_, d) = project_onto_hull(&pts, &[0.5, 3.0]);
        assert!((d - 2.0).abs() < 1e-12);
        let (_, inside) = project_onto_hull(&pts, &[0.3, 0.6]);
        assert!(inside < 1e-12);
    }

    #[test]
    fn cone_distance() {
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(project_onto_cone(&gens, &[1.0, 2.0]).1 < 1e-12);
        let (p, d) = project_onto_cone(&gens, &[-3.0, 2.0]);
        assert!((d - 3.0).abs() < 1e-12 && (p[1] - 2.0).abs() < 1e-12);
    }
}
