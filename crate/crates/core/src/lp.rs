//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problems are tiny (a handful of rows, a few dozen columns), so a full
//! tableau is the simplest representation that stays exact up to rounding.

use crate::error::{Error, Result};

/// minimize `cost · z` subject to `eq` rows (`a · z = b`), `le` rows
/// (`a · z ≤ b`) and `z ≥ 0`.
#[derive(Clone, Debug, Default)]
pub(crate) struct LinearProgram {
    pub cost: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LpOptions {
    pub pivot_tol: f64,
    /// Phase-1 optimum above this declares infeasibility.
    pub infeasibility_tol: f64,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-10,
            infeasibility_tol: 1e-9,
            max_pivots: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { z: Vec<f64>, objective: f64 },
    Infeasible { residual: f64 },
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize, // excluding rhs
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize, opts: &LpOptions) -> Result<()> {
        self.pivots += 1;
        if self.pivots > opts.max_pivots {
            return Err(Error::Internal(format!(
                "simplex exceeded {} pivots",
                opts.max_pivots
            )));
        }
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        // rows + 1 includes the objective row stored last.
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[pr * w + c];
                if v != 0.0 {
                    self.data[r * w + c] -= f * v;
                }
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
        Ok(())
    }

    /// Runs Bland-rule iterations on the objective row (reduced costs stored
    /// as `c_j − z_j`, minimization). Returns false on unboundedness.
    fn iterate(&mut self, allow: impl Fn(usize) -> bool, opts: &LpOptions) -> Result<bool> {
        let w = self.cols + 1;
        let obj = self.rows * w;
        loop {
            let entering = (0..self.cols).find(|&c| allow(c) && self.data[obj + c] < -opts.pivot_tol);
            let Some(pc) = entering else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(r).max(0.0) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if (ratio < best && !tie) || (tie && self.basis[r] < self.basis[lr]) {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, _)) = leave else { return Ok(false) };
            self.pivot(pr, pc, opts)?;
        }
    }
}

pub(crate) fn solve(lp: &LinearProgram, opts: &LpOptions) -> Result<LpOutcome> {
    let n = lp.cost.len();
    let m = lp.eq.len() + lp.le.len();
    let slacks = lp.le.len();
    let structural = n + slacks;

    // Assemble rows with nonnegative right-hand sides; a slack with +1 after
    // sign normalization can start in the basis, all other rows get artificials.
    let mut rows: Vec<(Vec<f64>, f64, Option<usize>)> = Vec::with_capacity(m);
    for (a, b) in &lp.eq {
        debug_assert_eq!(a.len(), n);
        let mut row = vec![0.0; structural];
        row[..n].copy_from_slice(a);
        let (row, b) = if *b < 0.0 { (row.iter().map(|v| -v).collect(), -b) } else { (row, *b) };
        rows.push((row, b, None));
    }
    for (k, (a, b)) in lp.le.iter().enumerate() {
        debug_assert_eq!(a.len(), n);
        let mut row = vec![0.0; structural];
        row[..n].copy_from_slice(a);
        row[n + k] = 1.0;
        if *b < 0.0 {
            rows.push((row.iter().map(|v| -v).collect(), -b, None));
        } else {
            rows.push((row, *b, Some(n + k)));
        }
    }
    let artificial_rows: Vec<usize> = (0..m).filter(|&r| rows[r].2.is_none()).collect();
    let cols = structural + artificial_rows.len();
    let w = cols + 1;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * w],
        basis: vec![0; m],
        first_artificial: structural,
        pivots: 0,
    };
    let mut next_art = structural;
    for (r, (row, b, slack)) in rows.iter().enumerate() {
        t.data[r * w..r * w + structural].copy_from_slice(row);
        t.data[r * w + cols] = *b;
        t.basis[r] = match slack {
            Some(s) => *s,
            None => {
                t.data[r * w + next_art] = 1.0;
                next_art += 1;
                next_art - 1
            }
        };
    }

    let obj = m * w;
    if !artificial_rows.is_empty() {
        // Phase 1: minimize the sum of artificials.
        for c in structural..cols {
            t.data[obj + c] = 1.0;
        }
        for &r in &artificial_rows {
            for c in 0..w {
                t.data[obj + c] -= t.data[r * w + c];
            }
        }
        t.iterate(|_| true, opts)?;
        let residual = -t.data[obj + cols];
        if residual > opts.infeasibility_tol {
            return Ok(LpOutcome::Infeasible { residual });
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows {
            if t.basis[r] >= t.first_artificial {
                let pc = (0..structural).find(|&c| t.at(r, c).abs() > opts.pivot_tol);
                match pc {
                    Some(pc) => t.pivot(r, pc, opts)?,
                    None => {
                        remove_row(&mut t, r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // Phase 2 objective row: c_j − c_B B⁻¹ A_j.
    let obj = t.rows * w;
    for c in 0..w {
        t.data[obj + c] = if c < n { lp.cost[c] } else { 0.0 };
    }
    for r in 0..t.rows {
        let b = t.basis[r];
        let cb = if b < n { lp.cost[b] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..w {
                t.data[obj + c] -= cb * t.data[r * w + c];
            }
        }
    }
    let first_art = t.first_artificial;
    if !t.iterate(|c| c < first_art, opts)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut z = vec![0.0; n];
    for r in 0..t.rows {
        if t.basis[r] < n {
            z[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective = lp.cost.iter().zip(&z).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { z, objective })
}

fn remove_row(t: &mut Tableau, r: usize) {
    let w = t.cols + 1;
    t.data.drain(r * w..(r + 1) * w);
    t.basis.remove(r);
    t.rows -= 1;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match solve(lp, &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { z, objective } => (z, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_minimization() {
        // min −x − y s.t. x + 2y ≤ 4, 3x + y ≤ 6 → (1.6, 1.2), −2.8
        let lp = LinearProgram {
            cost: vec![-1.0, -1.0],
            eq: vec![],
            le: vec![(vec![1.0, 2.0], 4.0), (vec![3.0, 1.0], 6.0)],
        };
        let (z, obj) = optimal(&lp);
        assert!((obj + 2.8).abs() < 1e-12);
        assert!((z[0] - 1.6).abs() < 1e-12 && (z[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn equality_with_negative_rhs_and_redundancy() {
        // x − y = −1 twice (redundant), min x + y → (0, 1)
        let lp = LinearProgram {
            cost: vec![1.0, 1.0],
            eq: vec![(vec![1.0, -1.0], -1.0), (vec![2.0, -2.0], -2.0)],
            le: vec![],
        };
        let (z, obj) = optimal(&lp);
        assert!((obj - 1.0).abs() < 1e-12);
        assert!(z[0].abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            cost: vec![1.0],
            eq: vec![(vec![1.0], -1.0)],
            le: vec![],
        };
        assert!(matches!(
            solve(&infeasible, &LpOptions::default()).unwrap(),
            LpOutcome::Infeasible { .. }
        ));
        let unbounded = LinearProgram {
            cost: vec![-1.0, 0.0],
            eq: vec![],
            le: vec![(vec![-1.0, 1.0], 1.0)],
        };
        assert_eq!(solve(&unbounded, &LpOptions::default()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance; Bland's rule must terminate.
        let lp = LinearProgram {
            cost: vec![-0.75, 150.0, -0.02, 6.0],
            eq: vec![],
            le: vec![
                (vec![0.25, -60.0, -0.04, 9.0], 0.0),
                (vec![0.5, -90.0, -0.02, 3.0], 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], 1.0),
            ],
        };
        let (_, obj) = optimal(&lp);
        assert!((obj + 0.05).abs() < 1e-12);
    }
}
