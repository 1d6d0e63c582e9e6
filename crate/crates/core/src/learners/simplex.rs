//! A self-contained dense two-phase simplex solver with Bland's rule.
//!
//! Sized for the occupancy-matching programs in this crate (a few hundred
//! rows and columns); no external solver dependency.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Le,
    Eq,
    Ge,
}

/// One row `sum_j coeffs_j x_j (op) rhs` with sparse coefficients.
#[derive(Debug, Clone)]
pub struct LpConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub op: RelOp,
    pub rhs: f64,
}

/// Minimize `objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-9;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    num_cols: usize,
    first_artificial: usize,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    /// Bland's rule: entering variable is the lowest-index column with a
    /// negative reduced cost; the leaving row takes the smallest ratio,
    /// ties broken by the lowest basic variable index.
    fn solve_min(&mut self, cost: &[f64], allow_artificials: bool) -> Result<f64> {
        loop {
            let m = self.rows.len();
            // y = costs of the current basic variables.
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let limit = if allow_artificials {
                self.num_cols
            } else {
                self.first_artificial
            };
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for i in 0..m {
                    if cb[i] != 0.0 {
                        reduced -= cb[i] * self.rows[i][j];
                    }
                }
                if reduced < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                let objective = self
                    .basis
                    .iter()
                    .zip(&self.rhs)
                    .map(|(&b, &v)| cost[b] * v)
                    .sum();
                return Ok(objective);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[i][j];
                if a > EPS {
                    let ratio = self.rhs[i] / a;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((best_i, best_ratio)) => {
                            if ratio < best_ratio - EPS
                                || (ratio < best_ratio + EPS && self.basis[i] < self.basis[best_i])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return Err(Error::LpInfeasible("objective unbounded below".into()));
            };
            self.pivot(r, j);
            self.pivots += 1;
            if self.pivots > self.max_pivots {
                return Err(Error::LpDidNotConverge {
                    iterations: self.pivots,
                });
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rhs[r] /= piv;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][j];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row, row) = if i < r {
                let (lo, hi) = self.rows.split_at_mut(r);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = self.rows.split_at_mut(i);
                (&lo[r], &mut hi[0])
            };
            for (x, p) in row.iter_mut().zip(pivot_row) {
                *x -= factor * p;
            }
            self.rhs[i] -= factor * self.rhs[r];
        }
        self.basis[r] = j;
    }
}

/// Solves the linear program; errors on infeasibility, unboundedness, or
/// pivot-count exhaustion.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let n = problem.num_vars;
    if problem.objective.len() != n {
        return Err(Error::ShapeMismatch("objective length".into()));
    }
    let m = problem.constraints.len();

    // Normalize rows so every rhs is nonnegative.
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut ops = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for c in &problem.constraints {
        let mut row = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            if j >= n {
                return Err(Error::ShapeMismatch("constraint index".into()));
            }
            row[j] += v;
        }
        let (row, op, b) = if c.rhs < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
            let flipped = match c.op {
                RelOp::Le => RelOp::Ge,
                RelOp::Ge => RelOp::Le,
                RelOp::Eq => RelOp::Eq,
            };
            (row, flipped, -c.rhs)
        } else {
            (row, c.op, c.rhs)
        };
        dense.push(row);
        ops.push(op);
        rhs.push(b);
    }

    let num_slack = ops
        .iter()
        .filter(|&&op| matches!(op, RelOp::Le | RelOp::Ge))
        .count();
    let num_artificial = ops
        .iter()
        .filter(|&&op| matches!(op, RelOp::Eq | RelOp::Ge))
        .count();
    let first_artificial = n + num_slack;
    let num_cols = first_artificial + num_artificial;

    let mut rows: Vec<Vec<f64>> = dense
        .into_iter()
        .map(|mut row| {
            row.resize(num_cols, 0.0);
            row
        })
        .collect();
    let mut basis = vec![usize::MAX; m];
    let mut next_slack = n;
    let mut next_artificial = first_artificial;
    for i in 0..m {
        match ops[i] {
            RelOp::Le => {
                rows[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            RelOp::Ge => {
                rows[i][next_slack] = -1.0;
                next_slack += 1;
                rows[i][next_artificial] = 1.0;
                basis[i] = next_artificial;
                next_artificial += 1;
            }
            RelOp::Eq => {
                rows[i][next_artificial] = 1.0;
                basis[i] = next_artificial;
                next_artificial += 1;
            }
        }
    }

    let mut tableau = Tableau {
        rows,
        rhs,
        basis,
        num_cols,
        first_artificial,
        pivots: 0,
        max_pivots: 400 * (m + num_cols) + 10_000,
    };

    // Phase 1: drive the artificial variables to zero.
    if num_artificial > 0 {
        let mut phase1_cost = vec![0.0; num_cols];
        for c in phase1_cost.iter_mut().skip(first_artificial) {
            *c = 1.0;
        }
        let infeasibility = tableau.solve_min(&phase1_cost, true)?;
        if infeasibility > 1e-7 {
            return Err(Error::LpInfeasible(format!(
                "phase-1 objective {infeasibility}"
            )));
        }
        // Pivot leftover artificials out of the basis; a row that cannot
        // pivot is redundant and is dropped.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= first_artificial {
                let col = (0..first_artificial).find(|&j| tableau.rows[i][j].abs() > EPS);
                match col {
                    Some(j) => tableau.pivot(i, j),
                    None => {
                        tableau.rows.remove(i);
                        tableau.rhs.remove(i);
                        tableau.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2: original objective, artificials barred from re-entering.
    let mut cost = vec![0.0; num_cols];
    cost[..n].copy_from_slice(&problem.objective);
    let objective = tableau.solve_min(&cost, false)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] = tableau.rhs[i];
        }
    }
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(coeffs: &[(usize, f64)], op: RelOp, rhs: f64) -> LpConstraint {
        LpConstraint {
            coeffs: coeffs.to_vec(),
            op,
            rhs,
        }
    }

    #[test]
    fn simple_le_program() {
        // min -x - y  s.t.  x + y <= 1.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![-1.0, -1.0],
            constraints: vec![c(&[(0, 1.0), (1, 1.0)], RelOp::Le, 1.0)],
        };
        let sol = solve(&p).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_equality_program() {
        // min x + 2y  s.t.  x + y = 1, y >= 0.25.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 2.0],
            constraints: vec![
                c(&[(0, 1.0), (1, 1.0)], RelOp::Eq, 1.0),
                c(&[(1, 1.0)], RelOp::Ge, 0.25),
            ],
        };
        let sol = solve(&p).unwrap();
        assert!((sol.x[0] - 0.75).abs() < 1e-9);
        assert!((sol.x[1] - 0.25).abs() < 1e-9);
        assert!((sol.objective - 1.25).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x  s.t.  -x <= -2  (i.e. x >= 2).
        let p = LpProblem {
            num_vars: 1,
            objective: vec![1.0],
            constraints: vec![c(&[(0, -1.0)], RelOp::Le, -2.0)],
        };
        let sol = solve(&p).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_program_errors() {
        let p = LpProblem {
            num_vars: 1,
            objective: vec![0.0],
            constraints: vec![
                c(&[(0, 1.0)], RelOp::Ge, 2.0),
                c(&[(0, 1.0)], RelOp::Le, 1.0),
            ],
        };
        assert!(matches!(solve(&p), Err(Error::LpInfeasible(_))));
    }

    #[test]
    fn unbounded_program_errors() {
        let p = LpProblem {
            num_vars: 1,
            objective: vec![-1.0],
            constraints: vec![c(&[(0, 1.0)], RelOp::Ge, 0.0)],
        };
        assert!(solve(&p).is_err());
    }

    #[test]
    fn degenerate_program_terminates() {
        // Degenerate vertex at the origin.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![-1.0, -1.0],
            constraints: vec![
                c(&[(0, 1.0)], RelOp::Le, 0.0),
                c(&[(0, 1.0), (1, 1.0)], RelOp::Le, 1.0),
                c(&[(1, 1.0)], RelOp::Le, 1.0),
            ],
        };
        let sol = solve(&p).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_handled() {
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 1.0],
            constraints: vec![
                c(&[(0, 1.0), (1, 1.0)], RelOp::Eq, 1.0),
                c(&[(0, 2.0), (1, 2.0)], RelOp::Eq, 2.0),
            ],
        };
        let sol = solve(&p).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
