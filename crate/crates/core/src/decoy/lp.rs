//! Small dense linear programs with boxed variables.
//!
//! Solved by a two-phase bounded-variable primal simplex on a full tableau.
//! Rows are scaled to unit ∞-norm and columns to unit ∞-norm before solving,
//! since the Poisson coefficients of the decoy programs span dozens of orders
//! of magnitude. Bland's rule keeps the pivot sequence deterministic and
//! cycle-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `[lo, hi]` per variable.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Number of inequality rows implied by the variable boxes.
    pub fn bound_row_count(&self) -> usize {
        2 * self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::MalformedLp("no variables".into()));
        }
        if self.bounds.len() != n {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::MalformedLp(format!("bad bounds [{lo}, {hi}] on x{j}")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedLp(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.bound.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedLp(format!("row {i} is not finite")));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any row (rows scaled to unit ∞-norm) or box.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let norm = c.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let scale = if norm > 0.0 { norm } else { 1.0 };
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, x)| a * x).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.bound,
                Relation::Ge => c.bound - lhs,
            };
            worst = worst.max(v / scale);
        }
        for (&(lo, hi), &x) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - x).max(x - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
}

/// Phase-one residual above which the program is declared infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 50_000;

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Rows in `a·z <= b` form over shifted variables z = (x - lo) / col_scale.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        let sign = match c.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
        };
        let shift: f64 = c.coeffs.iter().zip(&lp.bounds).map(|(a, (lo, _))| a * lo).sum();
        let coeffs: Vec<f64> = c.coeffs.iter().map(|a| sign * a).collect();
        let rhs = sign * (c.bound - shift);
        let norm = coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if norm == 0.0 {
            if rhs < -FEASIBILITY_TOL {
                return Err(Error::Infeasible(format!("empty row requires 0 <= {rhs}")));
            }
            continue;
        }
        rows.push((coeffs.iter().map(|a| a / norm).collect(), rhs / norm));
    }

    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let m = rows.iter().fold(0.0f64, |m, (a, _)| m.max(a[j].abs()));
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    for (a, _) in rows.iter_mut() {
        for j in 0..n {
            a[j] *= col_scale[j];
        }
    }
    let upper: Vec<f64> = (0..n)
        .map(|j| (lp.bounds[j].1 - lp.bounds[j].0) / col_scale[j])
        .collect();
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let cost: Vec<f64> = (0..n).map(|j| sign * lp.objective[j] * col_scale[j]).collect();

    let z = Tableau::solve(&rows, &upper, &cost)?;
    let point: Vec<f64> = (0..n)
        .map(|j| {
            let (lo, hi) = lp.bounds[j];
            (lo + z[j] * col_scale[j]).clamp(lo, hi)
        })
        .collect();
    Ok(LpSolution {
        value: lp.objective_at(&point),
        point,
    })
}

/// Full tableau over structural, slack and artificial columns.
struct Tableau {
    m: usize,
    cols: usize,
    /// `B⁻¹A`, row-major `m × cols`.
    t: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
}

impl Tableau {
    fn solve(rows: &[(Vec<f64>, f64)], upper: &[f64], cost: &[f64]) -> Result<Vec<f64>> {
        let n = upper.len();
        let m = rows.len();
        let art_start = n + m;
        let cols = n + 2 * m;
        let mut t = vec![0.0; m * cols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut ub = vec![f64::INFINITY; cols];
        ub[..n].copy_from_slice(upper);
        let mut artificial_rows = Vec::new();

        for (i, (a, b)) in rows.iter().enumerate() {
            let row = &mut t[i * cols..(i + 1) * cols];
            if *b >= 0.0 {
                row[..n].copy_from_slice(a);
                row[n + i] = 1.0;
                basis[i] = n + i;
                beta[i] = *b;
            } else {
                for j in 0..n {
                    row[j] = -a[j];
                }
                row[n + i] = -1.0;
                row[art_start + i] = 1.0;
                basis[i] = art_start + i;
                beta[i] = -b;
                artificial_rows.push(i);
            }
        }
        // Artificials never used are pinned at zero from the start.
        for i in 0..m {
            if basis[i] != art_start + i {
                ub[art_start + i] = 0.0;
            }
        }

        let mut tab = Tableau {
            m,
            cols,
            t,
            beta,
            basis,
            upper: ub,
            at_upper: vec![false; cols],
        };

        if !artificial_rows.is_empty() {
            let mut phase1 = vec![0.0; cols];
            for i in 0..m {
                phase1[art_start + i] = 1.0;
            }
            tab.optimize(&phase1)?;
            let residual: f64 = (0..m)
                .filter(|&i| tab.basis[i] >= art_start)
                .map(|i| tab.beta[i])
                .sum();
            if residual > FEASIBILITY_TOL {
                return Err(Error::Infeasible(format!(
                    "phase-one residual {residual:.3e} exceeds {FEASIBILITY_TOL:e}"
                )));
            }
            tab.expel_artificials(art_start);
            for j in art_start..cols {
                tab.upper[j] = 0.0;
                tab.at_upper[j] = false;
            }
        }

        let mut phase2 = vec![0.0; cols];
        phase2[..n].copy_from_slice(cost);
        tab.optimize(&phase2)?;

        let mut z = vec![0.0; n];
        for j in 0..n {
            if tab.at_upper[j] {
                z[j] = tab.upper[j];
            }
        }
        for i in 0..m {
            if tab.basis[i] < n {
                z[tab.basis[i]] = tab.beta[i].clamp(0.0, tab.upper[tab.basis[i]]);
            }
        }
        Ok(z)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn is_basic(&self, j: usize) -> bool {
        self.basis.contains(&j)
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.cols {
                    d[j] -= cb * self.at(i, j);
                }
            }
        }
        d
    }

    /// Minimizes `cost · x` from the current basic feasible solution.
    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        let mut d = self.reduced_costs(cost);
        for _ in 0..MAX_ITERATIONS {
            // Bland: lowest-index improving column.
            let entering = (0..self.cols).find(|&j| {
                if self.is_basic(j) || self.upper[j] == 0.0 {
                    return false;
                }
                if self.at_upper[j] {
                    d[j] > COST_TOL
                } else {
                    d[j] < -COST_TOL
                }
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // Ratio test; ties broken by lowest basic index.
            let mut step = self.upper[j];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let alpha = self.at(i, j) * dir;
                let b = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOL {
                    (self.beta[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < step,
                    Some((r, _)) => limit < step || (limit == step && b < self.basis[r]),
                };
                if better {
                    step = limit;
                    leave = Some((i, to_upper));
                }
            }
            if !step.is_finite() {
                return Err(Error::Unbounded);
            }

            for i in 0..self.m {
                let alpha = self.at(i, j) * dir;
                self.beta[i] -= alpha * step;
            }
            match leave {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((r, to_upper)) => {
                    let entering_value = if self.at_upper[j] {
                        self.upper[j] - step
                    } else {
                        step
                    };
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper;
                    self.at_upper[j] = false;
                    self.pivot(r, j);
                    self.beta[r] = entering_value;
                    let dj = d[j];
                    if dj != 0.0 {
                        for k in 0..self.cols {
                            d[k] -= dj * self.at(r, k);
                        }
                    }
                }
            }
        }
        Err(Error::MalformedLp(format!(
            "simplex did not converge in {MAX_ITERATIONS} iterations"
        )))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.at(r, j);
        for k in 0..cols {
            self.t[r * cols + k] /= p;
        }
        self.t[r * cols + j] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f != 0.0 {
                for k in 0..cols {
                    let v = self.t[r * cols + k];
                    if v != 0.0 {
                        self.t[i * cols + k] -= f * v;
                    }
                }
                self.t[i * cols + j] = 0.0;
            }
        }
        self.basis[r] = j;
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    fn expel_artificials(&mut self, art_start: usize) {
        for r in 0..self.m {
            if self.basis[r] < art_start {
                continue;
            }
            let candidate = (0..art_start)
                .filter(|&j| !self.is_basic(j))
                .max_by(|&a, &b| self.at(r, a).abs().total_cmp(&self.at(r, b).abs()));
            if let Some(j) = candidate {
                if self.at(r, j).abs() > PIVOT_TOL {
                    let value = if self.at_upper[j] { self.upper[j] } else { 0.0 };
                    self.at_upper[j] = false;
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = false;
                    // The artificial is (numerically) zero, so the entering
                    // variable keeps its current value.
                    self.pivot(r, j);
                    self.beta[r] = value;
                }
            }
        }
    }
}
