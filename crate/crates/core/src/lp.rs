//! Dense two-phase simplex with Bland's rule.
//!
//! Meant for the tiny programs of the face test (a handful of rows and
//! columns). Free variables are split into positive and negative parts.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c^T x` subject to linear constraints; variables flagged in
/// `free` are unrestricted, the rest nonnegative.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self { objective: vec![0.0; num_vars], constraints: Vec::new(), free: vec![false; num_vars] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Solves the program. Unboundedness is reported as an error since none
    /// of the callers expect it.
    pub fn minimize(&self) -> Result<LpOutcome> {
        let nv = self.num_vars();
        // structural columns after splitting free variables
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(nv);
        let mut ns = 0;
        for &free in &self.free {
            if free {
                col_of.push((ns, Some(ns + 1)));
                ns += 2;
            } else {
                col_of.push((ns, None));
                ns += 1;
            }
        }
        let m = self.constraints.len();
        let num_slack = self.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let art_start = ns + num_slack;
        let width = art_start + m; // one artificial per row, rhs stored separately
        let mut t = Tableau { rows: vec![vec![0.0; width]; m], rhs: vec![0.0; m], basis: vec![0; m] };

        let mut slack = ns;
        for (r, c) in self.constraints.iter().enumerate() {
            let flip = c.rhs < 0.0;
            let sgn = if flip { -1.0 } else { 1.0 };
            for (v, &a) in c.coeffs.iter().enumerate() {
                let (pos, neg) = col_of[v];
                t.rows[r][pos] = sgn * a;
                if let Some(neg) = neg {
                    t.rows[r][neg] = -sgn * a;
                }
            }
            match c.relation {
                Relation::Le => {
                    t.rows[r][slack] = sgn;
                    slack += 1;
                }
                Relation::Ge => {
                    t.rows[r][slack] = -sgn;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            t.rhs[r] = sgn * c.rhs;
            t.rows[r][art_start + r] = 1.0;
            t.basis[r] = art_start + r;
        }

        let max_pivots = 50 * (width + m + 10);

        // phase 1: minimize the sum of artificials
        let mut cost1 = vec![0.0; width];
        cost1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        match t.optimize(&cost1, width, max_pivots)? {
            Phase::Optimal => {}
            Phase::Unbounded => unreachable!("phase 1 objective is bounded below by zero"),
        }
        let infeasibility: f64 = (0..m).filter(|&r| t.basis[r] >= art_start).map(|r| t.rhs[r]).sum();
        let rhs_scale = 1.0 + self.constraints.iter().fold(0.0_f64, |a, c| a.max(c.rhs.abs()));
        if infeasibility > FEASIBILITY_TOL * rhs_scale {
            return Ok(LpOutcome::Infeasible);
        }
        // drive remaining artificials out of the basis; drop redundant rows
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                if let Some(col) = (0..art_start).find(|&c| t.rows[r][c].abs() > PIVOT_TOL) {
                    t.pivot(r, col);
                } else {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }

        // phase 2 over structural and slack columns only
        let mut cost2 = vec![0.0; width];
        for (v, &c) in self.objective.iter().enumerate() {
            let (pos, neg) = col_of[v];
            cost2[pos] = c;
            if let Some(neg) = neg {
                cost2[neg] = -c;
            }
        }
        match t.optimize(&cost2, art_start, max_pivots)? {
            Phase::Optimal => {}
            Phase::Unbounded => return Err(Error::LpUnbounded),
        }
        let mut values = vec![0.0; width];
        for (r, &b) in t.basis.iter().enumerate() {
            values[b] = t.rhs[r];
        }
        let x: Vec<f64> = col_of
            .iter()
            .map(|&(pos, neg)| values[pos] - neg.map_or(0.0, |n| values[n]))
            .collect();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|v| *v /= p);
        self.rhs[row] /= p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let f = self.rows[r][col];
            if f != 0.0 {
                for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rows[r][col] = 0.0;
                self.rhs[r] -= f * pivot_rhs;
                if self.rhs[r].abs() < 1e-14 {
                    self.rhs[r] = self.rhs[r].max(0.0);
                }
            }
        }
        self.basis[row] = col;
    }

    /// Primal simplex restricted to entering columns `< allowed`, using
    /// Bland's smallest-index rule for both entering and leaving choices.
    fn optimize(&mut self, cost: &[f64], allowed: usize, max_pivots: usize) -> Result<Phase> {
        for _ in 0..max_pivots {
            let entering = (0..allowed).find(|&c| {
                if self.basis.contains(&c) {
                    return false;
                }
                let reduced = cost[c]
                    - self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.rows[r][c]).sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(col) = entering else { return Ok(Phase::Optimal) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else { return Ok(Phase::Unbounded) };
            self.pivot(row, col);
        }
        Err(Error::LpIterationLimit)
    }
}
