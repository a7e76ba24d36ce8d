//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! The programs solved here are tiny (a few dozen variables and rows at
//! most), so the solver keeps the whole tableau in memory and favours
//! determinism over speed: the same input always walks the same pivot
//! sequence and returns the same vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primal feasibility tolerance applied to returned solutions.
pub const TOL_FEAS: f64 = 1e-9;
/// Objective tolerance for reported optimal values.
pub const TOL_OBJ: f64 = 1e-9;
/// Pivots smaller than this are treated as a numerical breakdown.
pub const MIN_PIVOT: f64 = 1e-12;

const EPS_REDUCED_COST: f64 = 1e-11;
const EPS_RATIO_TIE: f64 = 1e-12;
const EPS_PHASE_ONE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bounds {
    pub const NON_NEGATIVE: Bounds = Bounds { lower: Some(0.0), upper: None };
    pub const FREE: Bounds = Bounds { lower: None, upper: None };

    pub fn between(lower: f64, upper: f64) -> Self {
        Bounds { lower: Some(lower), upper: Some(upper) }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::NON_NEGATIVE
    }
}

/// A linear program over `n` variables and `m` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraint_matrix: Vec<Vec<f64>>,
    pub constraint_rhs: Vec<f64>,
    pub constraint_sense: Vec<Sense>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// A program with no rows whose variables are all non-negative.
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            direction,
            objective,
            constraint_matrix: Vec::new(),
            constraint_rhs: Vec::new(),
            constraint_sense: Vec::new(),
            bounds: vec![Bounds::NON_NEGATIVE; n],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Direction::Minimize, objective)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Direction::Maximize, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraint_matrix.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraint_matrix.push(coeffs);
        self.constraint_sense.push(sense);
        self.constraint_rhs.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) -> &mut Self {
        self.bounds[var] = bounds;
        self
    }

    /// Checks dimensions and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::input("linear program has no variables"));
        }
        let m = self.constraint_matrix.len();
        if self.constraint_rhs.len() != m || self.constraint_sense.len() != m {
            return Err(Error::input(format!(
                "linear program has {m} matrix rows but {} right-hand sides and {} senses",
                self.constraint_rhs.len(),
                self.constraint_sense.len()
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::input(format!(
                "linear program has {n} variables but {} bounds",
                self.bounds.len()
            )));
        }
        if let Some((i, row)) = self.constraint_matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::input(format!(
                "constraint row {i} has {} coefficients, expected {n}",
                row.len()
            )));
        }
        let all_finite = self.objective.iter().all(|v| v.is_finite())
            && self.constraint_rhs.iter().all(|v| v.is_finite())
            && self.constraint_matrix.iter().flatten().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::input("linear program contains NaN or infinite coefficients"));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let finite = b.lower.is_none_or(f64::is_finite) && b.upper.is_none_or(f64::is_finite);
            if !finite {
                return Err(Error::input(format!("variable {j} has a non-finite bound")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or bound at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for ((row, &sense), &rhs) in self
            .constraint_matrix
            .iter()
            .zip(&self.constraint_sense)
            .zip(&self.constraint_rhs)
        {
            let lhs = dot(row, x);
            let v = match sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
                Sense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (b, &xj) in self.bounds.iter().zip(x) {
            if let Some(l) = b.lower {
                worst = worst.max(l - xj);
            }
            if let Some(u) = b.upper {
                worst = worst.max(xj - u);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at `primal`; NaN unless optimal.
    pub optimal_value: f64,
    /// Optimal point; empty unless optimal.
    pub primal: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, optimal_value: f64::NAN, primal: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How an original variable is expressed through non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + y
    Shifted { col: usize, offset: f64 },
    /// x = offset - y
    Mirrored { col: usize, offset: f64 },
    /// x = y_pos - y_neg
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// m rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced costs followed by minus the current objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) -> Result<()> {
        let piv = self.rows[r][e];
        if !piv.is_finite() || piv.abs() < MIN_PIVOT {
            return Err(Error::Numeric(format!(
                "pivot element {piv:e} in row {r}, column {e} is below {MIN_PIVOT:e}"
            )));
        }
        let inv = 1.0 / piv;
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][e] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
        Ok(())
    }

    /// Installs `costs` (length `ncols`) as the objective to minimise.
    fn set_objective(&mut self, costs: &[f64]) {
        let mut obj = costs.to_vec();
        obj.push(0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = obj[b];
            if cb != 0.0 {
                for (v, a) in obj.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
        self.obj = obj;
    }

    fn current_value(&self) -> f64 {
        -self.obj[self.ncols]
    }

    /// Runs simplex iterations over the columns `< allowed`.
    fn run(&mut self, allowed: usize, max_iter: usize) -> Result<PhaseOutcome> {
        for _ in 0..max_iter {
            // Bland: lowest-index improving column enters.
            let Some(e) = (0..allowed).find(|&j| self.obj[j] < -EPS_REDUCED_COST) else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[e];
                if a <= MIN_PIVOT {
                    continue;
                }
                let ratio = row[self.ncols].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= EPS_RATIO_TIE * (1.0 + lratio.abs());
                        if (!tie && ratio < lratio) || (tie && self.basis[r] < self.basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(PhaseOutcome::Unbounded),
                Some((r, _)) => self.pivot(r, e)?,
            }
        }
        Err(Error::Numeric(format!(
            "simplex did not terminate within {max_iter} pivots"
        )))
    }
}

/// Solves `lp`. The result is a pure function of the input.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Substitute bounded variables by non-negative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let map = match (b.lower, b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(LpSolution::without_point(LpStatus::Infeasible));
                    }
                    upper_rows.push((ny, u - l));
                }
                VarMap::Shifted { col: ny, offset: l }
            }
            (None, Some(u)) => VarMap::Mirrored { col: ny, offset: u },
            (None, None) => {
                ny += 1;
                VarMap::Split { pos: ny - 1, neg: ny }
            }
        };
        ny += 1;
        maps.push(map);
    }

    let substitute = |coeffs: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ny];
        let mut constant = 0.0;
        for (&a, map) in coeffs.iter().zip(&maps) {
            match *map {
                VarMap::Shifted { col, offset } => {
                    out[col] += a;
                    constant += a * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    out[col] -= a;
                    constant += a * offset;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, constant)
    };

    // Rows in y-space with non-negative right-hand sides.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(lp.num_rows() + upper_rows.len());
    for ((coeffs, &sense), &rhs) in lp.constraint_matrix.iter().zip(&lp.constraint_sense).zip(&lp.constraint_rhs) {
        let (a, constant) = substitute(coeffs);
        rows.push((a, sense, rhs - constant));
    }
    for &(col, cap) in &upper_rows {
        let mut a = vec![0.0; ny];
        a[col] = 1.0;
        rows.push((a, Sense::Le, cap));
    }
    for (a, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let first_art = ny + n_slack;
    let ncols = first_art + n_art;

    let mut tab = Tableau { rows: Vec::with_capacity(m), obj: Vec::new(), basis: Vec::with_capacity(m), ncols };
    let (mut next_slack, mut next_art) = (ny, first_art);
    for (a, sense, rhs) in &rows {
        let mut row = vec![0.0; ncols + 1];
        row[..ny].copy_from_slice(a);
        row[ncols] = *rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = 1.0;
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = 1.0;
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
    }

    let max_iter = 50_000 + 200 * (m + ncols);

    // Phase one: drive artificial variables to zero.
    if n_art > 0 {
        let mut costs = vec![0.0; ncols];
        costs[first_art..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_objective(&costs);
        tab.run(ncols, max_iter)?;
        if tab.current_value() > EPS_PHASE_ONE {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        // Pivot remaining (zero-level) artificials out of the basis, or drop
        // their rows when they are redundant.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= first_art {
                let col = (0..first_art).find(|&j| tab.rows[r][j].abs() > 1e-9);
                match col {
                    Some(j) => {
                        tab.pivot(r, j)?;
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase two on the original objective, expressed as a minimisation.
    let sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let (c_y, _) = substitute(&lp.objective);
    let mut costs = vec![0.0; ncols];
    for (c, v) in costs.iter_mut().zip(&c_y) {
        *c = sign * v;
    }
    tab.set_objective(&costs);
    if let PhaseOutcome::Unbounded = tab.run(first_art, max_iter)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut y = vec![0.0; ncols];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        y[b] = row[ncols].max(0.0);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + y[col],
            VarMap::Mirrored { col, offset } => offset - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();

    if primal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in the optimal point".into()));
    }
    let violation = lp.max_violation(&primal);
    if violation > TOL_FEAS {
        return Err(Error::Numeric(format!(
            "optimal vertex violates the constraints by {violation:e} (tolerance {TOL_FEAS:e})"
        )));
    }
    Ok(LpSolution { status: LpStatus::Optimal, optimal_value: lp.objective_value(&primal), primal })
}
