//! Exact two-phase simplex over rationals.
//!
//! Programs are stated as `maximize c·x` subject to rows `a·x {<=,=,>=} b`
//! and per-variable lower bounds (free variables allowed). The solver is a
//! dense tableau method. Pivot selection uses the largest reduced cost while
//! the objective keeps improving and falls back to Bland's smallest-index
//! rule during runs of degenerate pivots, which rules out cycling.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = crate::rational::dot(&self.coeffs, x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Maximized.
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// `Some(l)` means `x_j >= l`; `None` means the variable is free.
    pub lower: Vec<Option<Rational>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        witness: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, objective has {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("lower-bound vector has {found} entries, objective has {expected}")]
    BoundsMismatch { expected: usize, found: usize },
}

impl LinearProgram {
    /// A program over `objective.len()` variables, all with lower bound 0.
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            lower: vec![Some(Rational::zero()); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.lower[var] = None;
        self
    }

    pub fn set_lower(&mut self, var: usize, bound: Rational) -> &mut Self {
        self.lower[var] = Some(bound);
        self
    }

    /// True iff `x` satisfies every row and every lower bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self
                .lower
                .iter()
                .zip(x)
                .all(|(l, v)| l.as_ref().map_or(true, |l| v >= l))
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n {
            return Err(LpError::BoundsMismatch {
                expected: n,
                found: self.lower.len(),
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch {
                    row,
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
        }
        Ok(())
    }
}

/// How an original variable maps onto nonnegative tableau columns.
enum VarMap {
    Shifted { col: usize, lower: Rational },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds minus the current objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

enum PivotResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.width]
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let inv = Rational::one() / &self.rows[prow][pcol];
        if !inv.is_one() {
            for v in self.rows[prow].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let support: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[prow][j].is_zero())
            .collect();
        let pivot_row = self.rows[prow].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[pcol].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r != prow {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[prow] = pcol;
    }

    /// Runs primal simplex on the current cost row over the allowed columns.
    fn optimize(&mut self, allowed: usize) -> PivotResult {
        // Consecutive degenerate pivots tolerated before switching to Bland.
        const DEGENERATE_LIMIT: usize = 8;
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let entering = if bland {
                (0..allowed).find(|&j| self.cost[j].is_positive())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if self.cost[j].is_positive()
                        && best.map_or(true, |b| self.cost[j] > self.cost[b])
                    {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                return PivotResult::Optimal;
            };
            // Minimum ratio test; ties go to the smallest basic variable index.
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, ratio)) = leave else {
                return PivotResult::Unbounded;
            };
            if ratio.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
        }
    }

    fn set_cost(&mut self, c: &[Rational]) {
        let mut cost = vec![Rational::zero(); self.width + 1];
        cost[..c.len()].clone_from_slice(c);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = c.get(b).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    cost[j] -= &cb * v;
                }
            }
        }
        self.cost = cost;
    }
}

/// Solves `lp` exactly. Deterministic for a fixed program.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.check_dimensions()?;
    let n = lp.num_vars();

    // Columns for the original variables after shifting and splitting.
    let mut maps = Vec::with_capacity(n);
    let mut cols = 0usize;
    for l in &lp.lower {
        match l {
            Some(l) => {
                maps.push(VarMap::Shifted {
                    col: cols,
                    lower: l.clone(),
                });
                cols += 1;
            }
            None => {
                maps.push(VarMap::Split {
                    pos: cols,
                    neg: cols + 1,
                });
                cols += 2;
            }
        }
    }
    let structural = cols;

    // Rewrite rows over structural columns with nonnegative right-hand sides.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); structural];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Shifted { col, lower } => {
                    coeffs[*col] = a.clone();
                    if !lower.is_zero() {
                        rhs -= a * lower;
                    }
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] = a.clone();
                    coeffs[*neg] = -a;
                }
            }
        }
        let mut relation = c.relation;
        if rhs.is_negative() {
            for v in coeffs.iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        if coeffs.iter().all(|v| v.is_zero()) {
            let ok = match relation {
                Relation::Le => true,
                Relation::Eq | Relation::Ge => rhs.is_zero(),
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        rows.push((coeffs, relation, rhs));
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = structural + slack_count;
    let width = art_start + art_count;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(rows.len()),
        cost: Vec::new(),
        basis: Vec::with_capacity(rows.len()),
        width,
    };
    let mut next_slack = structural;
    let mut next_art = art_start;
    for (coeffs, relation, rhs) in rows {
        let mut row = coeffs;
        row.resize(width + 1, Rational::zero());
        row[width] = rhs;
        match relation {
            Relation::Le => {
                row[next_slack] = Rational::one();
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
        }
        tableau.rows.push(row);
    }

    if art_count > 0 {
        let mut phase1 = vec![Rational::zero(); width];
        for v in phase1.iter_mut().skip(art_start) {
            *v = -Rational::one();
        }
        tableau.set_cost(&phase1);
        // Phase one is bounded above by zero, so it cannot report unbounded.
        tableau.optimize(width);
        if !tableau.cost[width].is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tableau.rows[r][j].is_zero()) {
                    Some(j) => {
                        tableau.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        // Redundant row.
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in tableau.rows.iter_mut() {
            let rhs = row[width].clone();
            row.truncate(art_start);
            row.push(rhs);
        }
        tableau.width = art_start;
    }
    let width = tableau.width;

    let mut cost = vec![Rational::zero(); width];
    for (j, c) in lp.objective.iter().enumerate() {
        match &maps[j] {
            VarMap::Shifted { col, .. } => cost[*col] = c.clone(),
            VarMap::Split { pos, neg } => {
                cost[*pos] = c.clone();
                cost[*neg] = -c;
            }
        }
    }
    tableau.set_cost(&cost);
    if let PivotResult::Unbounded = tableau.optimize(width) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut column_values = vec![Rational::zero(); width];
    for (r, &b) in tableau.basis.iter().enumerate() {
        column_values[b] = tableau.rows[r][width].clone();
    }
    let witness: Vec<Rational> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shifted { col, lower } => &column_values[*col] + lower,
            VarMap::Split { pos, neg } => &column_values[*pos] - &column_values[*neg],
        })
        .collect();
    let value = crate::rational::dot(&lp.objective, &witness);
    debug_assert!(lp.is_feasible(&witness));
    Ok(LpOutcome::Optimal { value, witness })
}
