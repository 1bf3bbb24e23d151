//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `max c^T x` subject to `A_ub x <= b_ub`, `A_eq x = b_eq` with each
//! variable either non-negative or free. Optimal solutions are basic
//! feasible solutions, so at most `m` (total rows) variables are nonzero.

use crate::error::{invalid, Result};

/// Sign restriction on a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

/// `max c^T x` s.t. `A_ub x <= b_ub`, `A_eq x = b_eq`, per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// Maximize `objective`; every variable starts non-negative.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            bounds: vec![VarBound::NonNegative; n],
        }
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn free(mut self, var: usize) -> Self {
        self.bounds[var] = VarBound::Free;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Total constraint rows, `m`.
    pub fn num_rows(&self) -> usize {
        self.a_ub.len() + self.a_eq.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(invalid(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.a_ub.len() != self.b_ub.len() || self.a_eq.len() != self.b_eq.len() {
            return Err(invalid(
                "constraint matrix and right-hand side differ in length",
            ));
        }
        for row in self.a_ub.iter().chain(&self.a_eq) {
            if row.len() != n {
                return Err(invalid(format!(
                    "constraint row has {} coefficients, expected {n}",
                    row.len()
                )));
            }
        }
        let finite = self
            .objective
            .iter()
            .chain(self.a_ub.iter().flatten())
            .chain(&self.b_ub)
            .chain(self.a_eq.iter().flatten())
            .chain(&self.b_eq)
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("LP data must be finite"));
        }
        Ok(())
    }
}

/// Solver tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Absolute feasibility tolerance.
    pub feasibility_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    pub max_pivots: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-12,
            max_pivots: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot breakdown or a failed residual check; `x` is not trustworthy.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution in the original variables (empty unless optimal).
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Original variables that are basic at the optimum, ascending.
    pub basis: Vec<usize>,
    /// Multipliers of the `<=` rows (non-negative at the optimum).
    pub duals_ub: Vec<f64>,
    /// Multipliers of the `=` rows.
    pub duals_eq: Vec<f64>,
    pub pivots: usize,
    /// True when the all-slack basis was feasible and phase 1 was skipped.
    pub phase_one_skipped: bool,
    pub detail: Option<String>,
}

impl LpSolution {
    fn failed(status: LpStatus, pivots: usize, skipped: bool, detail: impl Into<String>) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective_value: f64::NAN,
            basis: Vec::new(),
            duals_ub: Vec::new(),
            duals_eq: Vec::new(),
            pivots,
            phase_one_skipped: skipped,
            detail: Some(detail.into()),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves with default tolerances.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    solve_with(lp, &SolverOptions::default())
}

/// Solves with the given tolerances. When the final residual check fails,
/// the solve is repeated from scratch with the pivot threshold raised by
/// `PIVOT_RETRY_FACTOR`, up to `PIVOT_RETRIES` times; only a result that
/// passes the residual check is reported as optimal.
pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    lp.validate()?;
    let mut attempt = *opts;
    let mut sol = solve_two_phase(lp, &attempt);
    let mut pivots = sol.pivots;
    for _ in 0..PIVOT_RETRIES {
        if sol.status != LpStatus::NumericalFailure || pivots >= opts.max_pivots {
            break;
        }
        attempt.pivot_tol *= PIVOT_RETRY_FACTOR;
        attempt.max_pivots = opts.max_pivots - pivots;
        sol = solve_two_phase(lp, &attempt);
        pivots += sol.pivots;
    }
    sol.pivots = pivots;
    Ok(sol)
}

pub const PIVOT_RETRIES: usize = 2;
pub const PIVOT_RETRY_FACTOR: f64 = 1e3;

/// Column layout of the standard-form tableau.
struct Layout {
    /// For each original variable, `(positive column, negative column)`.
    var_cols: Vec<(usize, Option<usize>)>,
    total_cols: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row; last entry is `-c_B^T x_B`.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Column that held `+e_i` in the initial system, for dual recovery.
    unit_col: Vec<usize>,
    /// Row sign applied to make the right-hand side non-negative.
    row_sign: Vec<f64>,
    /// Original row index (ub rows first, then eq rows).
    origin: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        *self.rows[i].last().expect("non-empty row")
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = 1.0 / self.rows[p][q];
        for v in self.rows[p].iter_mut() {
            *v *= inv;
        }
        self.rows[p][q] = 1.0;
        let pivot_row = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let factor = row[q];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[q] = 0.0;
            }
        }
        let factor = self.cost[q];
        if factor != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.cost[q] = 0.0;
        }
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// Resets the cost row to `c - c_B^T B^{-1} A` for column costs `c`.
    fn price(&mut self, c: &[f64]) {
        let width = self.cost.len();
        let mut cost = c.to_vec();
        cost.resize(width, 0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = c.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, r) in cost.iter_mut().zip(row) {
                    *v -= cb * r;
                }
            }
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        self.cost = cost;
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    Stalled(String),
}

/// Bland's rule: lowest-index improving column enters; among minimum-ratio
/// rows the one whose basic variable has the lowest index leaves.
fn iterate(t: &mut Tableau, allowed: usize, opts: &SolverOptions) -> Outcome {
    loop {
        if t.pivots >= opts.max_pivots {
            return Outcome::Stalled(format!("pivot limit {} reached", opts.max_pivots));
        }
        let Some(q) = (0..allowed).find(|&j| t.cost[j] > opts.optimality_tol) else {
            return Outcome::Optimal;
        };
        // entries this small next to the rest of the column are round-off
        let col_max = t.rows.iter().fold(1.0f64, |m, r| m.max(r[q].abs()));
        let threshold = opts.pivot_tol * col_max;
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.rows.len() {
            let a = t.rows[i][q];
            if a <= threshold {
                continue;
            }
            let ratio = t.rhs(i).max(0.0) / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    let tie = 1e-12 * best.abs().max(1.0);
                    if ratio < best - tie || (ratio <= best + tie && t.basis[i] < t.basis[k]) {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        match leave {
            Some((p, _)) => t.pivot(p, q),
            None => return Outcome::Unbounded,
        }
    }
}

pub(crate) fn solve_two_phase(lp: &LinearProgram, opts: &SolverOptions) -> LpSolution {
    let n = lp.num_vars();
    let n_ub = lp.a_ub.len();
    let m = lp.num_rows();

    let mut var_cols = Vec::with_capacity(n);
    let mut col = 0;
    for b in &lp.bounds {
        match b {
            VarBound::NonNegative => {
                var_cols.push((col, None));
                col += 1;
            }
            VarBound::Free => {
                var_cols.push((col, Some(col + 1)));
                col += 2;
            }
        }
    }
    let slack0 = col;
    let num_real = slack0 + n_ub;

    // rows needing an artificial: equalities, and <= rows with b < 0
    let needs_art: Vec<bool> = (0..m)
        .map(|i| if i < n_ub { lp.b_ub[i] < 0.0 } else { true })
        .collect();
    let num_art = needs_art.iter().filter(|&&x| x).count();
    let layout = Layout {
        var_cols,
        total_cols: num_real + num_art,
    };
    let width = layout.total_cols + 1;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        cost: vec![0.0; width],
        basis: Vec::with_capacity(m),
        unit_col: Vec::with_capacity(m),
        row_sign: Vec::with_capacity(m),
        origin: Vec::with_capacity(m),
        pivots: 0,
    };
    let mut art = num_real;
    for i in 0..m {
        let (coeffs, rhs) = if i < n_ub {
            (&lp.a_ub[i], lp.b_ub[i])
        } else {
            (&lp.a_eq[i - n_ub], lp.b_eq[i - n_ub])
        };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for (j, &a) in coeffs.iter().enumerate() {
            let (p, neg) = layout.var_cols[j];
            row[p] = sign * a;
            if let Some(q) = neg {
                row[q] = -sign * a;
            }
        }
        if i < n_ub {
            row[slack0 + i] = sign;
        }
        row[width - 1] = sign * rhs;
        if needs_art[i] {
            row[art] = 1.0;
            t.basis.push(art);
            t.unit_col.push(art);
            art += 1;
        } else {
            t.basis.push(slack0 + i);
            t.unit_col.push(slack0 + i);
        }
        t.row_sign.push(sign);
        t.origin.push(i);
        t.rows.push(row);
    }

    let skipped = num_art == 0;
    if !skipped {
        // phase 1: maximize -(sum of artificials)
        let mut c1 = vec![0.0; layout.total_cols];
        for c in c1.iter_mut().skip(num_real) {
            *c = -1.0;
        }
        t.price(&c1);
        if let Outcome::Stalled(msg) = iterate(&mut t, layout.total_cols, opts) {
            return LpSolution::failed(LpStatus::NumericalFailure, t.pivots, skipped, msg);
        }
        let infeasibility = t.cost[width - 1];
        let scale = 1.0
            + lp.b_eq
                .iter()
                .chain(&lp.b_ub)
                .fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > opts.feasibility_tol * scale {
            return LpSolution::failed(
                LpStatus::Infeasible,
                t.pivots,
                skipped,
                format!("phase 1 residual {infeasibility:e}"),
            );
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] < num_real {
                i += 1;
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..num_real {
                let a = t.rows[i][j].abs();
                if a > 1e-9 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((q, _)) => {
                    t.pivot(i, q);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    t.unit_col.remove(i);
                    t.row_sign.remove(i);
                    t.origin.remove(i);
                }
            }
        }
    }

    // phase 2
    let mut c2 = vec![0.0; layout.total_cols];
    for (j, &(p, neg)) in layout.var_cols.iter().enumerate() {
        c2[p] = lp.objective[j];
        if let Some(q) = neg {
            c2[q] = -lp.objective[j];
        }
    }
    t.price(&c2);
    match iterate(&mut t, num_real, opts) {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return LpSolution::failed(LpStatus::Unbounded, t.pivots, skipped, "unbounded ray");
        }
        Outcome::Stalled(msg) => {
            return LpSolution::failed(LpStatus::NumericalFailure, t.pivots, skipped, msg);
        }
    }

    extract(lp, &layout, &t, opts, skipped)
}

fn extract(
    lp: &LinearProgram,
    layout: &Layout,
    t: &Tableau,
    opts: &SolverOptions,
    skipped: bool,
) -> LpSolution {
    let n = lp.num_vars();
    let mut col_value = vec![0.0; layout.total_cols];
    for (i, &b) in t.basis.iter().enumerate() {
        let v = t.rhs(i);
        // round-off below zero
        col_value[b] = if v < 0.0 && v > -opts.feasibility_tol {
            0.0
        } else {
            v
        };
    }
    let mut x = vec![0.0; n];
    let mut basis = Vec::new();
    for (j, &(p, neg)) in layout.var_cols.iter().enumerate() {
        x[j] = col_value[p] - neg.map_or(0.0, |q| col_value[q]);
        let is_basic = t.basis.contains(&p) || neg.is_some_and(|q| t.basis.contains(&q));
        if is_basic {
            basis.push(j);
        }
    }

    let mut duals = vec![0.0; lp.num_rows()];
    for i in 0..t.rows.len() {
        duals[t.origin[i]] = -t.row_sign[i] * t.cost[t.unit_col[i]];
    }
    let n_ub = lp.a_ub.len();
    let duals_eq = duals.split_off(n_ub);
    let duals_ub = duals;

    // residual check against the original data
    let tol = opts.feasibility_tol;
    let mut worst: f64 = 0.0;
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        let (lhs, mag) = dot_with_magnitude(row, &x);
        worst = worst.max((lhs - b) / mag.max(b.abs()).max(1.0));
    }
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let (lhs, mag) = dot_with_magnitude(row, &x);
        worst = worst.max((lhs - b).abs() / mag.max(b.abs()).max(1.0));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if *b == VarBound::NonNegative {
            worst = worst.max(-x[j]);
        }
    }
    if worst.is_nan() || worst > tol {
        return LpSolution::failed(
            LpStatus::NumericalFailure,
            t.pivots,
            skipped,
            format!("primal residual {worst:e} exceeds {tol:e}"),
        );
    }

    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        basis,
        duals_ub,
        duals_eq,
        pivots: t.pivots,
        phase_one_skipped: skipped,
        detail: None,
    }
}

fn dot_with_magnitude(row: &[f64], x: &[f64]) -> (f64, f64) {
    row.iter()
        .zip(x)
        .fold((0.0, 0.0), |(s, m), (a, v)| (s + a * v, m + (a * v).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nonzeros(x: &[f64]) -> usize {
        x.iter().filter(|v| v.abs() > 1e-9).count()
    }

    #[test]
    fn single_bound() {
        let lp = LinearProgram::maximize(vec![1.0]).le(vec![1.0], 5.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, vec![5.0]);
        assert_eq!(s.objective_value, 5.0);
        assert!(s.phase_one_skipped);
        assert_eq!(s.duals_ub, vec![1.0]);
    }

    #[test]
    fn negative_bound_is_infeasible() {
        let lp = LinearProgram::maximize(vec![1.0]).le(vec![1.0], -1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn two_state_game() {
        // variables (tau, l0, l1); tau <= l1, tau <= l0, l0 + l1 = 1
        let lp = LinearProgram::maximize(vec![1.0, 0.0, 0.0])
            .free(0)
            .le(vec![1.0, 0.0, -1.0], 0.0)
            .le(vec![1.0, -1.0, 0.0], 0.0)
            .eq(vec![0.0, 1.0, 1.0], 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 0.5).abs() < 1e-12);
        assert!((s.x[1] - 0.5).abs() < 1e-12 && (s.x[2] - 0.5).abs() < 1e-12);
        assert!(nonzeros(&s.x) <= lp.num_rows());
        assert!(!s.phase_one_skipped);
        let dual_obj: f64 = s.duals_eq[0];
        assert!((dual_obj - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equality_only() {
        let lp = LinearProgram::maximize(vec![1.0, 0.0]).eq(vec![1.0, 1.0], 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.x, vec![1.0, 0.0]);
    }

    #[test]
    fn unbounded() {
        let lp = LinearProgram::maximize(vec![1.0, 1.0]).le(vec![1.0, -1.0], 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
        let free = LinearProgram::maximize(vec![-1.0]).free(0);
        assert_eq!(solve(&free).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_goes_negative() {
        // max -x s.t. x >= -3 (i.e. -x <= 3), x free
        let lp = LinearProgram::maximize(vec![-1.0])
            .free(0)
            .le(vec![-1.0], 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.x, vec![-3.0]);
        assert_eq!(s.basis, vec![0]);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram::maximize(vec![1.0, 2.0])
            .eq(vec![1.0, 1.0], 1.0)
            .eq(vec![2.0, 2.0], 2.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let lp = LinearProgram::maximize(vec![1.0, 1.0]).le(vec![1.0], 1.0);
        assert!(solve(&lp).is_err());
        let mut nan = LinearProgram::maximize(vec![1.0]).le(vec![1.0], 1.0);
        nan.b_ub[0] = f64::NAN;
        assert!(solve(&nan).is_err());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule
        let lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0])
            .le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn pivot_limit_reports_numerical_failure() {
        let lp = LinearProgram::maximize(vec![1.0, 1.0])
            .le(vec![1.0, 0.0], 1.0)
            .le(vec![0.0, 1.0], 1.0);
        let opts = SolverOptions {
            max_pivots: 1,
            ..SolverOptions::default()
        };
        let s = solve_with(&lp, &opts).unwrap();
        assert_eq!(s.status, LpStatus::NumericalFailure);
        assert!(s.detail.is_some());
    }
}
