//! Linear programs and a dense two-phase primal simplex solver.
//!
//! The solver works on a full tableau with Dantzig pricing and falls back to
//! Bland's rule during long degenerate runs, so it always terminates and a
//! given model always yields the same vertex.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} references variable {var}, but the model has {count} variables")]
    UnknownVariable { row: usize, var: usize, count: usize },
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(String),
    #[error("point has {got} values, model has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("simplex pivot limit of {0} reached")]
    PivotLimit(usize),
    #[error("time limit reached")]
    TimeLimit,
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("model too large for the dense solver ({0} tableau cells)")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Constraint family used for grouped violation reports.
    pub family: String,
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * point[v]).sum()
    }

    /// Signed amount by which `point` misses this row; zero when satisfied.
    pub fn violation(&self, point: &[f64]) -> f64 {
        let diff = self.activity(point) - self.rhs;
        match self.relation {
            Relation::Eq => diff,
            Relation::Le => diff.max(0.0),
            Relation::Ge => diff.min(0.0),
        }
    }
}

/// A minimization LP: `min c'x + c0` subject to linear rows and box bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    pub vars: Vec<Variable>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub rows: Vec<Constraint>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper });
        self.objective.push(0.0);
        self.vars.len() - 1
    }

    /// Adds `coeff` to the objective coefficient of `var`.
    pub fn add_cost(&mut self, var: usize, coeff: f64) {
        self.objective[var] += coeff;
    }

    pub fn add_row(
        &mut self,
        family: impl Into<String>,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.rows.push(Constraint { family: family.into(), name: name.into(), coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum::<f64>() + self.objective_constant
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for v in &self.vars {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(LpError::InvertedBounds(v.name.clone()));
            }
        }
        let count = self.vars.len();
        for (row, c) in self.rows.iter().enumerate() {
            if let Some(&(var, _)) = c.coeffs.iter().find(|(v, _)| *v >= count) {
                return Err(LpError::UnknownVariable { row, var, count });
            }
        }
        Ok(())
    }

    /// Distinct family labels in first-appearance order.
    pub fn families(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.family) {
                out.push(r.family.clone());
            }
        }
        out
    }

    /// CPLEX LP-format rendering for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        let names: Vec<String> = self.vars.iter().enumerate().map(|(i, v)| lp_name(&v.name, i)).collect();
        let mut out = String::from("\\ generated by vnfscale\nMinimize\n obj:");
        let mut any = false;
        for (i, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                write_term(&mut out, c, &names[i], !any);
                any = true;
            }
        }
        if self.objective_constant != 0.0 || !any {
            let _ = write!(out, " {} {}", if self.objective_constant < 0.0 { "-" } else { "+" }, self.objective_constant.abs());
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " {}:", lp_name(&row.name, r));
            if row.coeffs.is_empty() {
                let _ = write!(out, " 0 {}", names.first().map_or("x", |n| n.as_str()));
            }
            for (k, &(v, a)) in row.coeffs.iter().enumerate() {
                write_term(&mut out, a, &names[v], k == 0);
            }
            let rel = match row.relation {
                Relation::Eq => "=",
                Relation::Le => "<=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {} {}", rel, row.rhs);
        }
        out.push_str("Bounds\n");
        for (i, v) in self.vars.iter().enumerate() {
            let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
            let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
            if !v.lower.is_finite() && !v.upper.is_finite() {
                let _ = writeln!(out, " {} free", names[i]);
            } else {
                let _ = writeln!(out, " {} <= {} <= {}", lo, names[i], hi);
            }
        }
        out.push_str("End\n");
        out
    }
}

fn lp_name(raw: &str, index: usize) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| match c {
            '[' => '(',
            ']' => ')',
            c if c.is_ascii_alphanumeric() || "_.(),".contains(c) => c,
            _ => '_',
        })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("x{}_{}", index, cleaned)
    } else {
        cleaned
    }
}

fn write_term(out: &mut String, coeff: f64, name: &str, first: bool) {
    let sign = if coeff < 0.0 { "-" } else { "+" };
    if first && coeff >= 0.0 {
        let _ = write!(out, " {} {}", coeff, name);
    } else {
        let _ = write!(out, " {} {} {}", sign, coeff.abs(), name);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per model variable; empty unless optimal.
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Absolute feasibility/optimality tolerance.
    pub tol: f64,
    pub max_pivots: usize,
    pub deadline: Option<Instant>,
    /// Refuse tableaus larger than this many cells.
    pub max_cells: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_pivots: 1_000_000, deadline: None, max_cells: 400_000_000 }
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;

pub fn solve(model: &LpModel, tol: f64) -> Result<LpSolution, LpError> {
    solve_with(model, &SolveOptions { tol, ..SolveOptions::default() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub row: usize,
    pub amount: f64,
}

/// Rows violated by more than `tol` at `point`, with signed amounts.
pub fn check_feasibility(model: &LpModel, point: &[f64], tol: f64) -> Result<Vec<RowViolation>, LpError> {
    if point.len() != model.vars.len() {
        return Err(LpError::DimensionMismatch { expected: model.vars.len(), got: point.len() });
    }
    Ok(model
        .rows
        .iter()
        .enumerate()
        .filter_map(|(row, c)| {
            let amount = c.violation(point);
            (amount.abs() > tol).then_some(RowViolation { row, amount })
        })
        .collect())
}

/// Variables outside their bounds by more than `tol`.
pub fn bound_violations(model: &LpModel, point: &[f64], tol: f64) -> Vec<usize> {
    model
        .vars
        .iter()
        .zip(point)
        .enumerate()
        .filter(|(_, (v, &x))| x < v.lower - tol || x > v.upper + tol)
        .map(|(i, _)| i)
        .collect()
}

// ---------------------------------------------------------------------------
// Standard-form conversion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Mapping {
    Fixed(f64),
    /// x = offset + y
    Shift { col: usize, offset: f64 },
    /// x = offset - y
    Negate { col: usize, offset: f64 },
    /// x = y+ - y-
    Split { pos: usize, neg: usize },
}

struct Standard {
    /// Dense constraint matrix rows over structural + slack columns.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Column index of a slack with coefficient +1 usable as initial basis.
    basic_slack: Vec<Option<usize>>,
    cost: Vec<f64>,
    ncols: usize,
    mapping: Vec<Mapping>,
    constant: f64,
}

fn standardize(model: &LpModel) -> Standard {
    let mut ncols = 0usize;
    let mut cost = Vec::new();
    let mut mapping = Vec::with_capacity(model.vars.len());
    let mut constant = model.objective_constant;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for (i, v) in model.vars.iter().enumerate() {
        let c = model.objective[i];
        let m = if v.lower == v.upper {
            constant += c * v.lower;
            Mapping::Fixed(v.lower)
        } else if v.lower.is_finite() {
            let col = ncols;
            ncols += 1;
            cost.push(c);
            constant += c * v.lower;
            if v.upper.is_finite() {
                bound_rows.push((col, v.upper - v.lower));
            }
            Mapping::Shift { col, offset: v.lower }
        } else if v.upper.is_finite() {
            let col = ncols;
            ncols += 1;
            cost.push(-c);
            constant += c * v.upper;
            Mapping::Negate { col, offset: v.upper }
        } else {
            let pos = ncols;
            let neg = ncols + 1;
            ncols += 2;
            cost.push(c);
            cost.push(-c);
            Mapping::Split { pos, neg }
        };
        mapping.push(m);
    }

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut relations = Vec::new();
    for row in &model.rows {
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(row.coeffs.len());
        let mut b = row.rhs;
        for &(v, a) in &row.coeffs {
            if a == 0.0 {
                continue;
            }
            match mapping[v] {
                Mapping::Fixed(x) => b -= a * x,
                Mapping::Shift { col, offset } => {
                    b -= a * offset;
                    coeffs.push((col, a));
                }
                Mapping::Negate { col, offset } => {
                    b -= a * offset;
                    coeffs.push((col, -a));
                }
                Mapping::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        rows.push(merge_duplicates(coeffs));
        rhs.push(b);
        relations.push(row.relation);
    }
    for (col, ub) in bound_rows {
        rows.push(vec![(col, 1.0)]);
        rhs.push(ub);
        relations.push(Relation::Le);
    }

    // Slack/surplus columns, then flip rows so every rhs is nonnegative.
    let mut basic_slack = vec![None; rows.len()];
    for (r, rel) in relations.iter().enumerate() {
        let sign = match rel {
            Relation::Eq => continue,
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
        };
        let col = ncols;
        ncols += 1;
        cost.push(0.0);
        rows[r].push((col, sign));
        basic_slack[r] = Some(col);
    }
    for r in 0..rows.len() {
        if rhs[r] < 0.0 {
            rhs[r] = -rhs[r];
            for e in rows[r].iter_mut() {
                e.1 = -e.1;
            }
        }
        if let Some(col) = basic_slack[r] {
            let positive = rows[r].iter().any(|&(c, a)| c == col && a > 0.0);
            if !positive {
                basic_slack[r] = None;
            }
        }
    }
    Standard { rows, rhs, basic_slack, cost, ncols, mapping, constant }
}

fn merge_duplicates(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (c, a) in coeffs {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += a,
            _ => out.push((c, a)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

// ---------------------------------------------------------------------------
// Tableau
// ---------------------------------------------------------------------------

const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_RUN: usize = 50;

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    scratch: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        self.scratch.clear();
        for j in 0..w {
            if self.data[r * w + j] != 0.0 {
                self.scratch.push(j);
            }
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let nz = &self.scratch;
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for &j in nz {
                    let v = row[j] - f * prow[j];
                    row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[c] = 0.0;
            }
        };
        for row in before.chunks_mut(w) {
            eliminate(row);
        }
        for row in after.chunks_mut(w) {
            eliminate(row);
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn run(&mut self, opts: &SolveOptions, allow: usize) -> Result<Outcome, LpError> {
        let rhs = self.rhs_col();
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= opts.max_pivots {
                return Err(LpError::PivotLimit(opts.max_pivots));
            }
            if self.pivots.is_multiple_of(64) {
                if let Some(deadline) = opts.deadline {
                    if Instant::now() > deadline {
                        return Err(LpError::TimeLimit);
                    }
                }
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -1e-9;
            for j in 0..allow {
                let d = self.obj[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = entering else { return Ok(Outcome::Optimal) };

            let mut leave: Option<usize> = None;
            let mut min_ratio = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            let scale = 1e-12 * min_ratio.abs().max(1.0);
                            if ratio < min_ratio - scale {
                                true
                            } else if ratio <= min_ratio + scale {
                                if bland {
                                    self.basis[r] < self.basis[l]
                                } else {
                                    a > self.at(l, c)
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(r);
                        min_ratio = min_ratio.min(ratio);
                    }
                }
            }
            let Some(r) = leave else { return Ok(Outcome::Unbounded) };
            if min_ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            if !self.obj[rhs].is_finite() {
                return Err(LpError::Numerical("non-finite objective".into()));
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        let last = self.m - 1;
        if r != last {
            let (head, tail) = self.data.split_at_mut(last * w);
            head[r * w..(r + 1) * w].copy_from_slice(&tail[..w]);
            self.basis[r] = self.basis[last];
        }
        self.data.truncate(last * w);
        self.basis.truncate(last);
        self.m -= 1;
    }
}

pub fn solve_with(model: &LpModel, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    model.validate()?;
    let std = standardize(model);
    let m = std.rows.len();
    let n_art = std.basic_slack.iter().filter(|s| s.is_none()).count();
    let first_artificial = std.ncols;
    let width = std.ncols + n_art + 1;
    let cells = m.saturating_mul(width);
    if cells > opts.max_cells {
        return Err(LpError::TooLarge(cells));
    }

    let mut data = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut next_art = first_artificial;
    for r in 0..m {
        for &(c, a) in &std.rows[r] {
            data[r * width + c] = a;
        }
        data[r * width + width - 1] = std.rhs[r];
        basis[r] = match std.basic_slack[r] {
            Some(col) => col,
            None => {
                data[r * width + next_art] = 1.0;
                next_art += 1;
                next_art - 1
            }
        };
    }
    let mut t = Tableau { m, width, data, obj: vec![0.0; width], basis, pivots: 0, scratch: Vec::new() };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        for j in first_artificial..width - 1 {
            t.obj[j] = 1.0;
        }
        for r in 0..t.m {
            if t.basis[r] >= first_artificial {
                for j in 0..width {
                    t.obj[j] -= t.data[r * width + j];
                }
            }
        }
        t.run(opts, first_artificial)?;
        let scale = 1.0 + std.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let infeasibility = -t.obj[width - 1];
        if infeasibility > opts.tol * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, point: vec![], objective_value: f64::NAN, pivots: t.pivots });
        }
        // Drive remaining artificials out of the basis or drop redundant rows.
        let mut r = 0;
        while r < t.m {
            if t.basis[r] >= first_artificial {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..first_artificial {
                    let a = t.at(r, j).abs();
                    if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                match best {
                    Some((j, _)) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => t.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase 2.
    t.obj.iter_mut().for_each(|v| *v = 0.0);
    t.obj[..std.ncols].copy_from_slice(&std.cost);
    for r in 0..t.m {
        let cb = if t.basis[r] < std.ncols { std.cost[t.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                let v = t.data[r * width + j];
                if v != 0.0 {
                    t.obj[j] -= cb * v;
                }
            }
        }
    }
    for r in 0..t.m {
        let b = t.basis[r];
        t.obj[b] = 0.0;
    }
    if let Outcome::Unbounded = t.run(opts, first_artificial)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, point: vec![], objective_value: f64::NEG_INFINITY, pivots: t.pivots });
    }

    let mut y = vec![0.0; std.ncols];
    for r in 0..t.m {
        let b = t.basis[r];
        if b < std.ncols {
            y[b] = t.at(r, width - 1).max(0.0);
        }
    }
    let point: Vec<f64> = std
        .mapping
        .iter()
        .map(|m| match *m {
            Mapping::Fixed(x) => x,
            Mapping::Shift { col, offset } => offset + y[col],
            Mapping::Negate { col, offset } => offset - y[col],
            Mapping::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let _ = std.constant;
    let objective_value = model.objective_value(&point);
    if !objective_value.is_finite() {
        return Err(LpError::Numerical("non-finite objective at optimum".into()));
    }
    Ok(LpSolution { status: LpStatus::Optimal, point, objective_value, pivots: t.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lower_bound() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_cost(x, 1.0);
        lp.add_row("r", "x>=3", vec![(x, 1.0)], Relation::Ge, 3.0);
        let s = solve(&lp, DEFAULT_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.point[0] - 3.0).abs() < 1e-9);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_edge() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_cost(x, 1.0);
        lp.add_cost(y, 1.0);
        lp.add_row("r", "sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        let s = solve(&lp, DEFAULT_TOL).unwrap();
        assert!((s.objective_value - 1.0).abs() < 1e-9);
        assert!(check_feasibility(&lp, &s.point, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row("r", "le", vec![(x, 1.0)], Relation::Le, 1.0);
        lp.add_row("r", "ge", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp, DEFAULT_TOL).unwrap().status, LpStatus::Infeasible);

        let mut lp = LpModel::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, 5.0);
        lp.add_cost(x, 1.0);
        assert_eq!(solve(&lp, DEFAULT_TOL).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounded_and_negated_variables() {
        // max x + 2y, x in [-1, 4], y <= 3 (free below), x + y <= 5
        let mut lp = LpModel::new();
        let x = lp.add_var("x", -1.0, 4.0);
        let y = lp.add_var("y", f64::NEG_INFINITY, 3.0);
        lp.add_cost(x, -1.0);
        lp.add_cost(y, -2.0);
        lp.add_row("r", "cap", vec![(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        let s = solve(&lp, DEFAULT_TOL).unwrap();
        assert!((s.point[0] - 2.0).abs() < 1e-9);
        assert!((s.point[1] - 3.0).abs() < 1e-9);
        assert!((s.objective_value + 8.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_and_redundant_rows() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", 2.0, 2.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_cost(y, 1.0);
        lp.add_row("r", "a", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 5.0);
        lp.add_row("r", "b", vec![(x, 2.0), (y, 2.0)], Relation::Eq, 10.0);
        let s = solve(&lp, DEFAULT_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.point[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn violations_are_signed() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.add_row("r", "eq", vec![(x, 1.0)], Relation::Eq, 1.0);
        assert!(check_feasibility(&lp, &[1.0], 1e-9).unwrap().is_empty());
        let v = check_feasibility(&lp, &[1.5], 1e-9).unwrap();
        assert_eq!(v, vec![RowViolation { row: 0, amount: 0.5 }]);
        assert!(matches!(check_feasibility(&lp, &[1.0, 2.0], 1e-9), Err(LpError::DimensionMismatch { .. })));
    }

    #[test]
    fn malformed_models_rejected() {
        let mut lp = LpModel::new();
        lp.add_var("x", 1.0, 0.0);
        assert!(matches!(solve(&lp, DEFAULT_TOL), Err(LpError::InvertedBounds(_))));
        let mut lp = LpModel::new();
        lp.add_var("x", 0.0, 1.0);
        lp.add_row("r", "bad", vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&lp, DEFAULT_TOL), Err(LpError::UnknownVariable { .. })));
    }

    #[test]
    fn lp_format_rendering() {
        let mut lp = LpModel::new();
        let x = lp.add_var("n[P1>tor0,0]", 0.0, f64::INFINITY);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_cost(x, 10.0);
        lp.add_row("I", "flow[tor0]", vec![(x, 1.0), (y, -2.5)], Relation::Eq, 0.0);
        let text = lp.to_lp_format();
        assert!(text.contains("Minimize\n obj: 10 n(P1_tor0,0)"));
        assert!(text.contains(" flow(tor0): 1 n(P1_tor0,0) - 2.5 y = 0"));
        assert!(text.contains(" y free"));
        assert!(text.ends_with("End\n"));
    }
}
