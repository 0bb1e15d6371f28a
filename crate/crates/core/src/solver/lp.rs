//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every constraint row carries a slack variable whose bounds encode the
//! sense (`<=` gives s in [0, inf), `>=` gives s in (-inf, 0], `==` fixes
//! s at 0), so the all-slack basis is always available. Feasibility is
//! restored in a first phase that minimizes the sum of artificial
//! variables attached to the violated rows. Each solve starts cold; at
//! desk scale this is cheap, keeps runs deterministic, and avoids basis
//! bookkeeping across the tree.
//!
//! The final tableau, basis and bound states are retained in
//! [`LpSolution`] so that cut generation can read tableau rows of
//! fractional integer basics.

use crate::instance::RowSense;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost tolerance for declaring optimality.
pub const DUAL_TOL: f64 = 1e-9;
/// Smallest acceptable pivot magnitude.
pub const PIVOT_TOL: f64 = 1e-9;
/// Dense dimension limit.
pub const DENSE_LIMIT: usize = 500;

/// Deterministic work meter: one unit per simplex iteration.
#[derive(Debug, Clone)]
pub struct WorkBudget {
    pub used: u64,
    pub limit: u64,
}

impl WorkBudget {
    pub fn new(limit: u64) -> Self {
        WorkBudget { used: 0, limit }
    }

    /// Counts one unit; false once the budget is exhausted.
    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.limit
    }

    pub fn exhausted(&self) -> bool {
        self.used > self.limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("work limit reached during LP solve")]
    WorkLimit,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("problem too large for the dense simplex ({rows}x{cols} > {limit}x{limit})")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VState {
    Basic,
    AtLower,
    AtUpper,
    FreeZero,
}

/// The LP handed to the simplex: structural data plus, per row, whether
/// the slack of that row is integer-valued (all-integer row with
/// integral coefficients and right-hand side).
pub struct LpTask<'a> {
    pub rows: &'a [Vec<(usize, f64)>],
    pub senses: &'a [RowSense],
    pub rhs: &'a [f64],
    pub objective: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub int_col: &'a [bool],
    pub int_slack: &'a [bool],
}

/// Solved LP with tableau access for cut generation.
pub struct LpSolution {
    pub status: LpStatus,
    /// `c'x` over structural variables; meaningful only when Optimal.
    pub objective: f64,
    /// Structural variable values.
    pub x: Vec<f64>,
    pub n_structural: usize,
    pub n_rows: usize,
    pub(crate) tab: Vec<f64>,
    pub(crate) stride: usize,
    pub(crate) beta: Vec<f64>,
    pub(crate) basis: Vec<usize>,
    pub(crate) state: Vec<VState>,
    pub(crate) lo: Vec<f64>,
    pub(crate) up: Vec<f64>,
    pub(crate) integral_var: Vec<bool>,
    pub(crate) row_defs: Vec<Vec<(usize, f64)>>,
    pub(crate) row_rhs: Vec<f64>,
}

impl LpSolution {
    /// Value of any variable (structural or slack) at the solution.
    pub(crate) fn var_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic var");
                self.beta[r]
            }
            VState::AtLower => self.lo[j],
            VState::AtUpper => self.up[j],
            VState::FreeZero => 0.0,
        }
    }
}

struct Tableau {
    m: usize,
    n_struct: usize,
    nv: usize,     // structural + slack + artificial columns
    n_real: usize, // structural + slack (artificials live beyond)
    stride: usize, // nv + 1, last column is B^-1 b
    tab: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VState>,
    lo: Vec<f64>,
    up: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.stride + j]
    }

    /// Current value of a nonbasic variable.
    #[inline]
    fn nb_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VState::AtLower => self.lo[j],
            VState::AtUpper => self.up[j],
            VState::FreeZero => 0.0,
            VState::Basic => unreachable!("nb_value on basic"),
        }
    }

    fn build(task: &LpTask) -> Tableau {
        let m = task.rows.len();
        let n = task.objective.len();
        let nv = n + 2 * m;
        let stride = nv + 1;
        let mut tab = vec![0.0; m * stride];
        let mut lo = Vec::with_capacity(nv);
        let mut up = Vec::with_capacity(nv);
        lo.extend_from_slice(task.lower);
        up.extend_from_slice(task.upper);
        for sense in task.senses {
            match sense {
                RowSense::Le => {
                    lo.push(0.0);
                    up.push(f64::INFINITY);
                }
                RowSense::Ge => {
                    lo.push(f64::NEG_INFINITY);
                    up.push(0.0);
                }
                RowSense::Eq => {
                    lo.push(0.0);
                    up.push(0.0);
                }
            }
        }
        // Artificial columns start fixed; phase 1 opens the ones it needs.
        lo.extend(std::iter::repeat(0.0).take(m));
        up.extend(std::iter::repeat(0.0).take(m));

        for (i, row) in task.rows.iter().enumerate() {
            let base = i * stride;
            for &(j, v) in row {
                tab[base + j] = v;
            }
            tab[base + n + i] = 1.0; // slack
            tab[base + nv] = task.rhs[i]; // b column
        }

        let mut state = Vec::with_capacity(nv);
        for j in 0..nv {
            state.push(if j >= n && j < n + m {
                VState::Basic // slacks start basic
            } else if lo[j].is_finite() {
                VState::AtLower
            } else if up[j].is_finite() {
                VState::AtUpper
            } else {
                VState::FreeZero
            });
        }

        let mut t = Tableau {
            m,
            n_struct: n,
            nv,
            n_real: n + m,
            stride,
            tab,
            beta: vec![0.0; m],
            basis: (n..n + m).collect(),
            state,
            lo,
            up,
        };
        t.recompute_beta();
        t
    }

    /// beta = B^-1 b - sum over nonbasic j of tab[:,j] * value(j).
    fn recompute_beta(&mut self) {
        for i in 0..self.m {
            let mut v = self.at(i, self.nv);
            for j in 0..self.nv {
                if self.state[j] != VState::Basic {
                    let a = self.at(i, j);
                    if a != 0.0 {
                        v -= a * self.nb_value(j);
                    }
                }
            }
            self.beta[i] = v;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.at(r, j);
        let rbase = r * self.stride;
        let inv = 1.0 / piv;
        for k in 0..self.stride {
            self.tab[rbase + k] *= inv;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f == 0.0 {
                continue;
            }
            let ibase = i * self.stride;
            for k in 0..self.stride {
                self.tab[ibase + k] -= f * self.tab[rbase + k];
            }
            // Kill drift on the pivot column.
            self.tab[ibase + j] = 0.0;
        }
        self.tab[rbase + j] = 1.0;
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Runs the pivot loop for a fixed cost vector until the phase optimum.
fn run_phase(
    t: &mut Tableau,
    cost: &[f64],
    work: &mut WorkBudget,
    mut iter_count: u64,
) -> Result<PhaseOutcome, LpError> {
    let bland_after = 200 * (t.m as u64 + t.nv as u64) + 2000;
    let mut reduced = vec![0.0; t.nv];
    loop {
        iter_count += 1;
        let bland = iter_count > bland_after;

        // Reduced costs d = c - c_B' tab, accumulated row-major.
        reduced.copy_from_slice(&cost[..t.nv]);
        for i in 0..t.m {
            let yv = cost[t.basis[i]];
            if yv != 0.0 {
                let base = i * t.stride;
                for (j, r) in reduced.iter_mut().enumerate() {
                    *r -= yv * t.tab[base + j];
                }
            }
        }

        let mut entering: Option<(usize, i8, f64)> = None; // (var, direction, rate)
        for j in 0..t.nv {
            if t.state[j] == VState::Basic || t.lo[j] == t.up[j] {
                continue;
            }
            let d = reduced[j];
            let (dir, rate) = match t.state[j] {
                VState::AtLower => (1i8, -d),
                VState::AtUpper => (-1i8, d),
                VState::FreeZero => {
                    if d < 0.0 {
                        (1i8, -d)
                    } else {
                        (-1i8, d)
                    }
                }
                VState::Basic => unreachable!(),
            };
            if rate > DUAL_TOL {
                if bland {
                    entering = Some((j, dir, rate));
                    break;
                }
                if entering.map_or(true, |(_, _, best)| rate > best) {
                    entering = Some((j, dir, rate));
                }
            }
        }
        let Some((j, dir, _)) = entering else {
            return Ok(PhaseOutcome::Optimal);
        };

        if !work.tick() {
            return Err(LpError::WorkLimit);
        }

        // Ratio test. The entering variable moves by t >= 0 in direction
        // dir; each basic variable changes by -dir * tab[i][j] * t.
        let dirf = dir as f64;
        let own_range = t.up[j] - t.lo[j]; // infinite for free or half-bounded vars
        let mut best_t = if own_range.is_finite() {
            own_range
        } else {
            f64::INFINITY
        };
        let mut leave: Option<(usize, bool)> = None; // (row, hits_lower)
        let mut leave_piv = 0.0f64;
        for i in 0..t.m {
            let coef = dirf * t.at(i, j);
            let b = t.basis[i];
            let (limit, hits_lower) = if coef > PIVOT_TOL {
                if t.lo[b].is_finite() {
                    ((t.beta[i] - t.lo[b]) / coef, true)
                } else {
                    continue;
                }
            } else if coef < -PIVOT_TOL {
                if t.up[b].is_finite() {
                    ((t.up[b] - t.beta[i]) / -coef, false)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let piv_mag = t.at(i, j).abs();
            // Smallest step wins; on ties prefer the larger pivot, then
            // the earlier row (first encountered stays).
            let better = match leave {
                None => limit < best_t - 1e-12,
                Some(_) => {
                    limit < best_t - 1e-12
                        || (limit <= best_t + 1e-12 && piv_mag > leave_piv + 1e-12)
                }
            };
            if better {
                best_t = limit.min(best_t);
                leave = Some((i, hits_lower));
                leave_piv = piv_mag;
            }
        }

        match leave {
            None => {
                if best_t.is_infinite() {
                    return Ok(PhaseOutcome::Unbounded);
                }
                // Bound flip: entering variable runs to its other bound.
                for i in 0..t.m {
                    let a = t.at(i, j);
                    if a != 0.0 {
                        t.beta[i] -= dirf * best_t * a;
                    }
                }
                t.state[j] = match t.state[j] {
                    VState::AtLower => VState::AtUpper,
                    VState::AtUpper => VState::AtLower,
                    s => s,
                };
            }
            Some((r, hits_lower)) => {
                if t.at(r, j).abs() < PIVOT_TOL {
                    return Err(LpError::Numerical(format!(
                        "pivot magnitude {:.3e} below tolerance with no alternative",
                        t.at(r, j).abs()
                    )));
                }
                let step = best_t;
                let entering_value = match t.state[j] {
                    VState::AtLower => t.lo[j] + step,
                    VState::AtUpper => t.up[j] - step,
                    VState::FreeZero => dirf * step,
                    VState::Basic => unreachable!(),
                };
                for i in 0..t.m {
                    if i == r {
                        continue;
                    }
                    let a = t.at(i, j);
                    if a != 0.0 {
                        t.beta[i] -= dirf * step * a;
                    }
                }
                let leaving = t.basis[r];
                t.state[leaving] = if hits_lower {
                    VState::AtLower
                } else {
                    VState::AtUpper
                };
                t.pivot(r, j);
                t.basis[r] = j;
                t.state[j] = VState::Basic;
                t.beta[r] = entering_value;
                if work.used % 128 == 0 {
                    t.recompute_beta();
                }
            }
        }
    }
}

/// Solves the LP. Statuses Infeasible/Unbounded are reported in the
/// solution; hard failures (budget, numerics) are errors.
pub fn solve_lp(task: &LpTask, work: &mut WorkBudget) -> Result<LpSolution, LpError> {
    let m = task.rows.len();
    let n = task.objective.len();
    if m > DENSE_LIMIT || n > DENSE_LIMIT {
        return Err(LpError::TooLarge {
            rows: m,
            cols: n,
            limit: DENSE_LIMIT,
        });
    }
    let mut t = Tableau::build(task);

    // Phase 1: attach an artificial to every row whose slack value lies
    // outside the slack bounds, then minimize the artificial sum.
    let mut needs_phase1 = false;
    let mut phase1_cost = vec![0.0; t.nv];
    for i in 0..t.m {
        let s = t.basis[i]; // slack of row i
        let (slo, sup) = (t.lo[s], t.up[s]);
        if t.beta[i] >= slo - FEAS_TOL && t.beta[i] <= sup + FEAS_TOL {
            continue;
        }
        needs_phase1 = true;
        // Park the slack at its nearest bound and seat the artificial.
        let s_val = if t.beta[i] < slo { slo } else { sup };
        let residual = t.beta[i] - s_val;
        let art = t.n_real + i;
        let sign = if residual >= 0.0 { 1.0 } else { -1.0 };
        // Row currently reads: basic slack = beta. Re-express with the
        // artificial basic: multiply the row so the artificial column
        // (coefficient `sign`) becomes 1.
        let rbase = i * t.stride;
        t.tab[rbase + art] = sign;
        if sign < 0.0 {
            for k in 0..t.stride {
                t.tab[rbase + k] = -t.tab[rbase + k];
            }
        }
        t.state[s] = if s_val == slo {
            VState::AtLower
        } else {
            VState::AtUpper
        };
        t.up[art] = f64::INFINITY;
        t.basis[i] = art;
        t.state[art] = VState::Basic;
        t.beta[i] = residual.abs();
        phase1_cost[art] = 1.0;
    }

    if needs_phase1 {
        match run_phase(&mut t, &phase1_cost, work, 0)? {
            PhaseOutcome::Unbounded => {
                return Err(LpError::Numerical(
                    "phase 1 reported unbounded".to_string(),
                ))
            }
            PhaseOutcome::Optimal => {}
        }
        t.recompute_beta();
        let infeas: f64 = (0..t.m)
            .filter(|&i| t.basis[i] >= t.n_real)
            .map(|i| t.beta[i].max(0.0))
            .sum();
        if infeas > FEAS_TOL * 10.0 {
            return Ok(finish(t, task, LpStatus::Infeasible));
        }
        // Drive leftover artificials out of the basis where possible;
        // rows that resist are redundant and keep a zero artificial.
        for r in 0..t.m {
            let b = t.basis[r];
            if b < t.n_real {
                continue;
            }
            let mut col = None;
            for j in 0..t.n_real {
                if t.state[j] != VState::Basic && t.lo[j] < t.up[j] && t.at(r, j).abs() > 1e-7 {
                    col = Some(j);
                    break;
                }
            }
            if let Some(j) = col {
                let old_val = t.nb_value(j);
                t.state[t.basis[r]] = VState::AtLower; // artificial back to 0
                t.up[b] = 0.0;
                t.pivot(r, j);
                t.basis[r] = j;
                t.state[j] = VState::Basic;
                t.beta[r] = old_val;
            } else {
                t.up[b] = 0.0; // stays basic at zero on a redundant row
            }
        }
        // All remaining artificials are closed for phase 2.
        for a in t.n_real..t.nv {
            t.up[a] = 0.0;
        }
        t.recompute_beta();
    }

    // Phase 2.
    let mut cost = vec![0.0; t.nv];
    cost[..n].copy_from_slice(task.objective);
    let status = match run_phase(&mut t, &cost, work, 0)? {
        PhaseOutcome::Optimal => LpStatus::Optimal,
        PhaseOutcome::Unbounded => LpStatus::Unbounded,
    };
    t.recompute_beta();

    if status == LpStatus::Optimal {
        for i in 0..t.m {
            let b = t.basis[i];
            let viol = (t.lo[b] - t.beta[i]).max(t.beta[i] - t.up[b]).max(0.0);
            if viol > FEAS_TOL * 100.0 {
                return Err(LpError::Numerical(format!(
                    "basic variable violates its bounds by {viol:.3e}"
                )));
            }
        }
    }
    Ok(finish(t, task, status))
}

fn finish(t: Tableau, task: &LpTask, status: LpStatus) -> LpSolution {
    let n = t.n_struct;
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = match t.state[j] {
            VState::AtLower => t.lo[j],
            VState::AtUpper => t.up[j],
            VState::FreeZero => 0.0,
            VState::Basic => 0.0, // filled below
        };
    }
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.beta[i];
        }
    }
    let objective = task
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>();

    let mut integral_var = vec![false; t.n_real];
    integral_var[..n].copy_from_slice(task.int_col);
    for (i, &int_slack) in task.int_slack.iter().enumerate() {
        integral_var[n + i] = int_slack;
    }

    LpSolution {
        status,
        objective,
        x,
        n_structural: n,
        n_rows: t.m,
        stride: t.stride,
        tab: t.tab,
        beta: t.beta,
        basis: t.basis,
        state: t.state,
        lo: t.lo,
        up: t.up,
        integral_var,
        row_defs: task.rows.to_vec(),
        row_rhs: task.rhs.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_task<'a>(
        rows: &'a [Vec<(usize, f64)>],
        senses: &'a [RowSense],
        rhs: &'a [f64],
        obj: &'a [f64],
        lower: &'a [f64],
        upper: &'a [f64],
        ints: &'a [bool],
        slacks: &'a [bool],
    ) -> LpTask<'a> {
        LpTask {
            rows,
            senses,
            rhs,
            objective: obj,
            lower,
            upper,
            int_col: ints,
            int_slack: slacks,
        }
    }

    #[test]
    fn one_var_upper_bounded() {
        // min -x s.t. x <= 3, x >= 0
        let rows = vec![vec![(0, 1.0)]];
        let senses = [RowSense::Le];
        let rhs = [3.0];
        let obj = [-1.0];
        let lower = [0.0];
        let upper = [f64::INFINITY];
        let ints = [false];
        let slacks = [false];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1000);
        let sol = solve_lp(&task, &mut work).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - -3.0).abs() < 1e-9);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        // min -x, x >= 0, no rows
        let rows: Vec<Vec<(usize, f64)>> = vec![];
        let senses: [RowSense; 0] = [];
        let rhs: [f64; 0] = [];
        let obj = [-1.0];
        let lower = [0.0];
        let upper = [f64::INFINITY];
        let ints = [false];
        let slacks: [bool; 0] = [];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1000);
        let sol = solve_lp(&task, &mut work).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // x <= 1 and x >= 2
        let rows = vec![vec![(0, 1.0)], vec![(0, 1.0)]];
        let senses = [RowSense::Le, RowSense::Ge];
        let rhs = [1.0, 2.0];
        let obj = [0.0];
        let lower = [0.0];
        let upper = [f64::INFINITY];
        let ints = [false];
        let slacks = [false, false];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1000);
        let sol = solve_lp(&task, &mut work).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_row_honored() {
        // min x + y s.t. x + y == 2, 0 <= x,y <= 5
        let rows = vec![vec![(0, 1.0), (1, 1.0)]];
        let senses = [RowSense::Eq];
        let rhs = [2.0];
        let obj = [1.0, 1.0];
        let lower = [0.0, 0.0];
        let upper = [5.0, 5.0];
        let ints = [false, false];
        let slacks = [false];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1000);
        let sol = solve_lp(&task, &mut work).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_lower_bounds() {
        // min x s.t. x >= -4 (bound), x + y <= 1, y in [-2, 2]
        let rows = vec![vec![(0, 1.0), (1, 1.0)]];
        let senses = [RowSense::Le];
        let rhs = [1.0];
        let obj = [1.0, 0.0];
        let lower = [-4.0, -2.0];
        let upper = [f64::INFINITY, 2.0];
        let ints = [false, false];
        let slacks = [false];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1000);
        let sol = solve_lp(&task, &mut work).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - -4.0).abs() < 1e-9);
    }

    #[test]
    fn work_limit_is_an_error() {
        let rows = vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 3.0), (1, 1.0)]];
        let senses = [RowSense::Ge, RowSense::Ge];
        let rhs = [6.0, 9.0];
        let obj = [1.0, 1.0];
        let lower = [0.0, 0.0];
        let upper = [f64::INFINITY, f64::INFINITY];
        let ints = [false, false];
        let slacks = [false, false];
        let task = simple_task(&rows, &senses, &rhs, &obj, &lower, &upper, &ints, &slacks);
        let mut work = WorkBudget::new(1);
        assert!(matches!(
            solve_lp(&task, &mut work),
            Err(LpError::WorkLimit)
        ));
    }
}
