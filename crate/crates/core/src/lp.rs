//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problems are stated over bounded or free variables and `<=`, `>=`, `=`
//! rows; [`solve_lp`] shifts every variable to a nonnegative column, adds
//! slack, surplus and artificial columns, and pivots on a full tableau.
//! Solutions are re-checked against the original rows before being
//! reported; a violated row is a [`Error::NumericalBreakdown`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub lower: Option<S>,
    pub upper: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub coeffs: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

/// `minimize objective . x + objective_constant` subject to the rows and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub variables: Vec<Variable<S>>,
    pub constraints: Vec<Constraint<S>>,
    pub objective: Vec<S>,
    pub objective_constant: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Variable values; meaningful only when optimal.
    pub values: Vec<S>,
    pub objective: S,
}

impl<S: Scalar> Default for LinearProgram<S> {
    fn default() -> Self {
        LinearProgram {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: S::zero(),
        }
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: Option<S>, upper: Option<S>, cost: S) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(cost);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coeffs: Vec<(usize, S)>, sense: Sense, rhs: S) {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    pub fn objective_value(&self, values: &[S]) -> S {
        self.objective
            .iter()
            .zip(values)
            .fold(self.objective_constant.clone(), |acc, (c, x)| {
                acc + c.clone() * x.clone()
            })
    }

    /// Largest violation of any row or bound at `values`, scaled per row by
    /// `1 + |rhs| + sum |a_j x_j|`.
    pub fn max_scaled_violation(&self, values: &[S]) -> S {
        let mut worst = S::zero();
        let mut note = |violation: S, scale: S| {
            let v = violation / scale;
            if v > worst {
                worst = v;
            }
        };
        for row in &self.constraints {
            let mut lhs = S::zero();
            let mut scale = S::one() + row.rhs.abs();
            for (j, a) in &row.coeffs {
                let term = a.clone() * values[*j].clone();
                scale = scale + term.abs();
                lhs = lhs + term;
            }
            let diff = lhs - row.rhs.clone();
            let violation = match row.sense {
                Sense::Le => diff,
                Sense::Ge => -diff,
                Sense::Eq => diff.abs(),
            };
            note(violation, scale);
        }
        for (var, x) in self.variables.iter().zip(values) {
            if let Some(lo) = &var.lower {
                note(lo.clone() - x.clone(), S::one() + lo.abs());
            }
            if let Some(hi) = &var.upper {
                note(x.clone() - hi.clone(), S::one() + hi.abs());
            }
        }
        worst
    }

    /// Renders the program in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let name = |j: usize| sanitize(&self.variables[j].name, j);
        let mut out = String::new();
        let _ = writeln!(out, "\\ objective constant: {}", self.objective_constant.to_f64_lossy());
        out.push_str("Minimize\n obj:");
        let terms: Vec<(usize, S)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.clone()))
            .collect();
        write_terms(&mut out, &terms, &name);
        out.push_str("\nSubject To\n");
        for (k, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, " {}:", sanitize(&row.name, k));
            write_terms(&mut out, &row.coeffs, &name);
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs.to_f64_lossy());
        }
        out.push_str("Bounds\n");
        for (j, var) in self.variables.iter().enumerate() {
            let n = name(j);
            let _ = match (&var.lower, &var.upper) {
                (Some(lo), Some(hi)) => writeln!(out, " {} <= {n} <= {}", lo.to_f64_lossy(), hi.to_f64_lossy()),
                (Some(lo), None) => writeln!(out, " {n} >= {}", lo.to_f64_lossy()),
                (None, Some(hi)) => writeln!(out, " -inf <= {n} <= {}", hi.to_f64_lossy()),
                (None, None) => writeln!(out, " {n} free"),
            };
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize(name: &str, index: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit()) {
        format!("v{index}_{cleaned}")
    } else {
        cleaned
    }
}

fn write_terms<S: Scalar>(out: &mut String, terms: &[(usize, S)], name: &dyn Fn(usize) -> String) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (j, c) in terms {
        let v = c.to_f64_lossy();
        let sign = if v < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", v.abs(), name(*j));
    }
}

/// How an original variable maps onto nonnegative tableau columns:
/// `x = offset + sum(sign * column)`.
struct ColumnMap<S> {
    offset: S,
    columns: Vec<(usize, S)>,
}

struct Tableau<S> {
    /// `rows x (cols + 1)`; the last entry of each row is the right-hand side.
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    cols: usize,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

const MAX_PIVOTS: usize = 50_000;

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [S]) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *x = x.clone() - f.clone() * pr.clone();
                }
            }
            row[c] = S::zero();
        }
        if !cost[c].is_zero() {
            let f = cost[c].clone();
            for (x, pr) in cost.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *x = x.clone() - f.clone() * pr.clone();
                }
            }
            cost[c] = S::zero();
        }
        self.basis[r] = c;
    }

    /// Minimizes the reduced-cost row `cost` (length `cols + 1`, last entry
    /// is minus the objective) over columns where `allowed` is true.
    fn optimize(&mut self, cost: &mut [S], allowed: &dyn Fn(usize) -> bool) -> Result<PivotOutcome> {
        let tol = S::tolerance();
        let pivot_tol = S::pivot_tolerance();
        for _ in 0..MAX_PIVOTS {
            let Some(entering) = (0..self.cols).find(|&j| allowed(j) && cost[j] < -tol.clone()) else {
                return Ok(PivotOutcome::Optimal);
            };
            let mut leaving: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][entering];
                if *a <= pivot_tol {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br.clone() - tol.clone()
                            || (ratio <= br.clone() + tol.clone() && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leaving else {
                return Ok(PivotOutcome::Unbounded);
            };
            self.pivot(r, entering, cost);
        }
        Err(Error::NumericalBreakdown(format!(
            "no convergence after {MAX_PIVOTS} pivots"
        )))
    }
}

/// Solves `program` to optimality, or reports infeasibility / unboundedness.
/// Sparse row: coefficients, sense and right-hand side.
type Row<S> = (Vec<(usize, S)>, Sense, S);

pub fn solve_lp<S: Scalar>(program: &LinearProgram<S>) -> Result<LpSolution<S>> {
    let tol = S::tolerance();
    let pivot_tol = S::pivot_tolerance();

    // Column layout: shifted structural columns first.
    let mut maps = Vec::with_capacity(program.variables.len());
    let mut n_struct = 0usize;
    let mut bound_rows: Vec<Row<S>> = Vec::new();
    for var in &program.variables {
        match (&var.lower, &var.upper) {
            (Some(lo), hi) => {
                let col = n_struct;
                n_struct += 1;
                if let Some(hi) = hi {
                    if hi < lo {
                        return Ok(infeasible(program));
                    }
                    bound_rows.push((vec![(col, S::one())], Sense::Le, hi.clone() - lo.clone()));
                }
                maps.push(ColumnMap {
                    offset: lo.clone(),
                    columns: vec![(col, S::one())],
                });
            }
            (None, Some(hi)) => {
                let col = n_struct;
                n_struct += 1;
                maps.push(ColumnMap {
                    offset: hi.clone(),
                    columns: vec![(col, -S::one())],
                });
            }
            (None, None) => {
                let (pos, neg) = (n_struct, n_struct + 1);
                n_struct += 2;
                maps.push(ColumnMap {
                    offset: S::zero(),
                    columns: vec![(pos, S::one()), (neg, -S::one())],
                });
            }
        }
    }

    // Rows over structural columns, with nonnegative right-hand sides.
    let mut rows: Vec<(Vec<S>, Sense, S)> = Vec::new();
    for row in &program.constraints {
        let mut dense = vec![S::zero(); n_struct];
        let mut rhs = row.rhs.clone();
        for (j, a) in &row.coeffs {
            let map = &maps[*j];
            rhs = rhs - a.clone() * map.offset.clone();
            for (col, sign) in &map.columns {
                dense[*col] = dense[*col].clone() + a.clone() * sign.clone();
            }
        }
        rows.push((dense, row.sense, rhs));
    }
    for (coeffs, sense, rhs) in bound_rows {
        let mut dense = vec![S::zero(); n_struct];
        for (col, a) in coeffs {
            dense[col] = a;
        }
        rows.push((dense, sense, rhs));
    }
    for (dense, sense, rhs) in rows.iter_mut() {
        if *rhs < S::zero() {
            for a in dense.iter_mut() {
                *a = -a.clone();
            }
            *rhs = -rhs.clone();
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let n_slack = rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
    let n_art = rows.iter().filter(|(_, s, _)| *s != Sense::Le).count();
    let art_start = n_struct + n_slack;
    let cols = art_start + n_art;
    let m = rows.len();

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        cols,
    };
    let (mut next_slack, mut next_art) = (n_struct, art_start);
    for (dense, sense, rhs) in rows {
        let mut row = dense;
        row.resize(cols + 1, S::zero());
        row[cols] = rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = S::one();
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -S::one();
                next_slack += 1;
                row[next_art] = S::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = S::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
        }
        tableau.rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![S::zero(); cols + 1];
        for c in &mut cost[art_start..cols] {
            *c = S::one();
        }
        for i in 0..m {
            if tableau.basis[i] >= art_start {
                for (c, a) in cost.iter_mut().zip(&tableau.rows[i]) {
                    *c = c.clone() - a.clone();
                }
            }
        }
        let all = |_: usize| true;
        tableau.optimize(&mut cost, &all)?;
        let infeasibility = -cost[cols].clone();
        let scale = (0..m).fold(S::one(), |acc, i| acc + tableau.rhs(i).abs());
        if infeasibility > tol.clone() * scale {
            return Ok(infeasible(program));
        }
        // Drive remaining artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= art_start {
                let replacement = (0..art_start).find(|&j| tableau.rows[i][j].abs() > pivot_tol);
                match replacement {
                    Some(j) => {
                        tableau.pivot(i, j, &mut cost);
                        i += 1;
                    }
                    None => {
                        tableau.rows.remove(i);
                        tableau.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2 over structural and slack columns.
    let mut cost = vec![S::zero(); cols + 1];
    for (j, c) in program.objective.iter().enumerate() {
        for (col, sign) in &maps[j].columns {
            cost[*col] = cost[*col].clone() + c.clone() * sign.clone();
        }
    }
    for i in 0..tableau.rows.len() {
        let b = tableau.basis[i];
        if !cost[b].is_zero() {
            let f = cost[b].clone();
            for (c, a) in cost.iter_mut().zip(&tableau.rows[i]) {
                *c = c.clone() - f.clone() * a.clone();
            }
        }
    }
    let structural = |j: usize| j < art_start;
    if let PivotOutcome::Unbounded = tableau.optimize(&mut cost, &structural)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: vec![S::zero(); program.variables.len()],
            objective: S::zero(),
        });
    }

    let mut column_values = vec![S::zero(); cols];
    for (i, &b) in tableau.basis.iter().enumerate() {
        column_values[b] = tableau.rhs(i).clone();
    }
    let values: Vec<S> = maps
        .iter()
        .map(|map| {
            map.columns.iter().fold(map.offset.clone(), |acc, (col, sign)| {
                acc + sign.clone() * column_values[*col].clone()
            })
        })
        .collect();
    let violation = program.max_scaled_violation(&values);
    if violation > tol {
        return Err(Error::NumericalBreakdown(format!(
            "solution violates a constraint by {} (scaled)",
            violation.to_f64_lossy()
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: program.objective_value(&values),
        values,
    })
}

fn infeasible<S: Scalar>(program: &LinearProgram<S>) -> LpSolution<S> {
    LpSolution {
        status: LpStatus::Infeasible,
        values: vec![S::zero(); program.variables.len()],
        objective: S::zero(),
    }
}
