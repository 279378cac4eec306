//! Dense two-phase simplex for the small linear programs behind the ν-close
//! stochastic policy.
//!
//! Problems here have a handful of variables (the ν-close actions) and one
//! row per cost constraint plus the simplex row, so a dense tableau with
//! Bland's anti-cycling rule is plenty.

use alloc::vec;
use alloc::vec::Vec;

use crate::{CoreError, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    kind: RowKind,
    rhs: f64,
}

/// `maximize cᵀx` subject to linear rows and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn push(mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) -> Self {
        assert_eq!(coeffs.len(), self.n_vars(), "row width must match objective");
        self.rows.push(Row { coeffs, kind, rhs });
        self
    }

    pub fn less_eq(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.push(coeffs, RowKind::Le, rhs)
    }

    pub fn greater_eq(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.push(coeffs, RowKind::Ge, rhs)
    }

    pub fn equal(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.push(coeffs, RowKind::Eq, rhs)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    /// `m × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_vars: usize,
    first_artificial: usize,
    cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars();
        let rows: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    Row {
                        coeffs: r.coeffs.iter().map(|c| -c).collect(),
                        kind: match r.kind {
                            RowKind::Le => RowKind::Ge,
                            RowKind::Ge => RowKind::Le,
                            RowKind::Eq => RowKind::Eq,
                        },
                        rhs: -r.rhs,
                    }
                } else {
                    r.clone()
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.kind != RowKind::Eq).count();
        let n_art = rows.iter().filter(|r| r.kind != RowKind::Le).count();
        let first_artificial = n + n_slack;
        let cols = first_artificial + n_art;

        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (n, first_artificial);
        for r in &rows {
            let mut line = vec![0.0; cols + 1];
            line[..n].copy_from_slice(&r.coeffs);
            line[cols] = r.rhs;
            match r.kind {
                RowKind::Le => {
                    line[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                RowKind::Ge => {
                    line[slack] = -1.0;
                    slack += 1;
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                RowKind::Eq => {
                    line[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            t.push(line);
        }
        Self {
            t,
            basis,
            n_vars: n,
            first_artificial,
            cols,
        }
    }

    /// Reduced-cost row `c − c_B B⁻¹A`; the last entry is `−z`.
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.cols + 1];
        r[..costs.len()].copy_from_slice(costs);
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = costs.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (rj, tj) in r.iter_mut().zip(row) {
                    *rj -= cb * tj;
                }
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize, obj: &mut [f64]) {
        let p = self.t[row][col];
        self.t[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[row].clone();
        for (i, line) in self.t.iter_mut().enumerate() {
            if i != row {
                let f = line[col];
                if f != 0.0 {
                    line.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = obj[col];
        if f != 0.0 {
            obj.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
        self.basis[row] = col;
    }

    /// Bland's-rule iterations over columns `< col_limit`.
    fn run(&mut self, obj: &mut [f64], col_limit: usize) -> Result<()> {
        loop {
            let Some(col) = (0..col_limit).find(|&j| obj[j] > EPS) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, line) in self.t.iter().enumerate() {
                let a = line[col];
                if a > EPS {
                    let ratio = line[self.cols] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - EPS || ((ratio - br).abs() <= EPS && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Err(CoreError::Unbounded);
            };
            self.pivot(row, col, obj);
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        if self.first_artificial < self.cols {
            let mut phase1: Vec<f64> = vec![0.0; self.cols];
            phase1[self.first_artificial..].iter_mut().for_each(|c| *c = -1.0);
            let mut obj = self.reduced_costs(&phase1);
            self.run(&mut obj, self.cols)?;
            // obj[last] = −z and z = −Σ artificials
            if obj[self.cols] > 1e-7 {
                return Err(CoreError::Infeasible);
            }
            for row in 0..self.t.len() {
                if self.basis[row] >= self.first_artificial {
                    if let Some(col) = (0..self.first_artificial).find(|&j| self.t[row][j].abs() > EPS) {
                        self.pivot(row, col, &mut obj);
                    }
                }
            }
        }
        let mut obj = self.reduced_costs(&lp.objective);
        self.run(&mut obj, self.first_artificial)?;

        let mut x = vec![0.0; self.n_vars];
        for (row, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                x[b] = self.t[row][self.cols].max(0.0);
            }
        }
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y; x ≤ 4; 2y ≤ 12; 3x + 2y ≤ 18 → (2, 6), 36
        let sol = LinearProgram::maximize(vec![3.0, 5.0])
            .less_eq(vec![1.0, 0.0], 4.0)
            .less_eq(vec![0.0, 2.0], 12.0)
            .less_eq(vec![3.0, 2.0], 18.0)
            .solve()
            .unwrap();
        assert!((sol.value - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_greater_rows() {
        // max x1 + 2 x2 + 3 x3 on the simplex with x3 ≤ 0.25 and x1 ≥ 0.5
        let sol = LinearProgram::maximize(vec![1.0, 2.0, 3.0])
            .equal(vec![1.0, 1.0, 1.0], 1.0)
            .less_eq(vec![0.0, 0.0, 1.0], 0.25)
            .greater_eq(vec![1.0, 0.0, 0.0], 0.5)
            .solve()
            .unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-9);
        assert!((sol.x[1] - 0.25).abs() < 1e-9);
        assert!((sol.x[2] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram::maximize(vec![1.0, 1.0])
            .equal(vec![1.0, 1.0], 1.0)
            .less_eq(vec![1.0, 1.0], 0.5)
            .solve();
        assert_eq!(infeasible, Err(CoreError::Infeasible));
        let unbounded = LinearProgram::maximize(vec![1.0, 0.0])
            .less_eq(vec![0.0, 1.0], 1.0)
            .solve();
        assert_eq!(unbounded, Err(CoreError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let sol = LinearProgram::maximize(vec![1.0, 0.0])
            .equal(vec![1.0, 1.0], 1.0)
            .equal(vec![2.0, 2.0], 2.0)
            .solve()
            .unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
    }
}
