//! Gomory cuts from tableau rows of fractional integer basics.
//!
//! Each cut is derived in the displacement space of the current basis
//! (every nonbasic measured from the bound it sits at), with the mixed
//! rounding applied per nonbasic: integer-valued variables displaced
//! from an integral bound get the fractional-part coefficient, anything
//! else the continuous one. Slack displacements are then substituted
//! away so the returned cut lives purely in structural space, as a `>=`
//! inequality. Because node bounds are used for the displacement, a cut
//! is valid for the subtree of the node whose LP produced it; at the
//! root this means globally valid.

use super::lp::{LpSolution, LpStatus, VState};

/// Minimum violation of the LP point for a cut to be kept.
pub const CUT_VIOLATION_MIN: f64 = 1e-4;
/// Maximum ratio between the largest and smallest cut coefficient.
pub const CUT_DYNAMISM_MAX: f64 = 1e6;
/// Integrality tolerance.
pub const INT_TOL: f64 = 1e-6;

/// A `coefs' x >= rhs` inequality in structural space.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Cut {
    /// `rhs - coefs'x`; positive means violated.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.rhs - self.coefs.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
    }
}

fn frac(v: f64) -> f64 {
    v - v.floor()
}

fn is_integral(v: f64) -> bool {
    (v - v.round()).abs() <= 1e-9
}

/// Generates up to `max_cuts` Gomory cuts from an optimal LP solution.
/// Returns an empty list when the point is already integral.
pub fn gomory_cuts(lp: &LpSolution, max_cuts: usize) -> Vec<Cut> {
    if lp.status != LpStatus::Optimal || max_cuts == 0 {
        return Vec::new();
    }
    // Candidate rows: basic structural integer variables with a
    // fractional value far enough from both integers.
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for (r, &q) in lp.basis.iter().enumerate() {
        if q >= lp.n_structural || !lp.integral_var[q] {
            continue;
        }
        let f0 = frac(lp.beta[r]);
        if f0 >= CUT_VIOLATION_MIN && f0 <= 1.0 - CUT_VIOLATION_MIN {
            candidates.push((r, f0));
        }
    }
    // Deepest violation first; ties by variable index for determinism.
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(lp.basis[a.0].cmp(&lp.basis[b.0])));

    let mut cuts = Vec::new();
    for &(r, f0) in candidates.iter() {
        if cuts.len() >= max_cuts {
            break;
        }
        if let Some(cut) = cut_from_row(lp, r, f0) {
            cuts.push(cut);
        }
    }
    cuts
}

fn cut_from_row(lp: &LpSolution, r: usize, f0: f64) -> Option<Cut> {
    let n = lp.n_structural;
    let ratio = f0 / (1.0 - f0);
    let mut gamma = vec![0.0; n];
    let mut delta = f0;

    for j in 0..lp.lo.len() {
        if lp.state[j] == VState::Basic || lp.lo[j] == lp.up[j] {
            continue; // fixed vars (and closed artificials) contribute nothing
        }
        let t = lp.tab[r * lp.stride + j];
        if t.abs() <= 1e-12 {
            continue;
        }
        // Displacement from the resident bound; free nonbasics have no
        // sign restriction and poison the derivation.
        let (alpha, at_lower, bound) = match lp.state[j] {
            VState::AtLower => (t, true, lp.lo[j]),
            VState::AtUpper => (-t, false, lp.up[j]),
            VState::FreeZero => return None,
            VState::Basic => unreachable!(),
        };
        let integer_displacement = j < lp.integral_var.len()
            && lp.integral_var[j]
            && bound.is_finite()
            && is_integral(bound);
        let coef = if integer_displacement {
            let fj = frac(alpha);
            if fj <= f0 + 1e-12 {
                fj
            } else {
                ratio * (1.0 - fj)
            }
        } else if alpha >= 0.0 {
            alpha
        } else {
            -alpha * ratio
        };
        if coef.abs() <= 1e-12 {
            continue;
        }
        let signed = if at_lower { coef } else { -coef };
        if j < n {
            // coef * (x_j - lo) or coef * (up - x_j)
            gamma[j] += signed;
            delta += signed * bound;
        } else {
            // Slack of row k: s_k = rhs_k - a_k'x.
            let k = j - n;
            for &(l, a) in &lp.row_defs[k] {
                gamma[l] -= signed * a;
            }
            delta -= signed * (lp.row_rhs[k] - bound);
        }
    }

    // Drop negligible coefficients, paying for each with a conservative
    // rhs correction over the node box.
    let mut coefs: Vec<(usize, f64)> = Vec::new();
    for (j, &g) in gamma.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        if g.abs() < 1e-10 {
            let worst = (g * lp.lo[j]).max(g * lp.up[j]);
            if worst.is_finite() {
                delta -= worst.max(0.0);
                continue;
            }
        }
        coefs.push((j, g));
    }
    if coefs.is_empty() {
        return None;
    }
    let max_mag = coefs.iter().map(|&(_, v)| v.abs()).fold(0.0, f64::max);
    let min_mag = coefs
        .iter()
        .map(|&(_, v)| v.abs())
        .fold(f64::INFINITY, f64::min);
    if max_mag / min_mag > CUT_DYNAMISM_MAX {
        return None;
    }
    let cut = Cut { coefs, rhs: delta };
    if cut.violation(&lp.x) < CUT_VIOLATION_MIN {
        return None;
    }
    Some(cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::RowSense;
    use crate::solver::lp::{solve_lp, LpTask, WorkBudget};

    fn solve(
        rows: &[Vec<(usize, f64)>],
        senses: &[RowSense],
        rhs: &[f64],
        obj: &[f64],
        lower: &[f64],
        upper: &[f64],
        ints: &[bool],
        slacks: &[bool],
    ) -> LpSolution {
        let task = LpTask {
            rows,
            senses,
            rhs,
            objective: obj,
            lower,
            upper,
            int_col: ints,
            int_slack: slacks,
        };
        let mut work = WorkBudget::new(100_000);
        solve_lp(&task, &mut work).unwrap()
    }

    #[test]
    fn integral_point_gives_no_cuts() {
        // min -x - y s.t. x + y <= 2, binaries; LP optimum is integral.
        let rows = vec![vec![(0, 1.0), (1, 1.0)]];
        let lp = solve(
            &rows,
            &[RowSense::Le],
            &[2.0],
            &[-1.0, -1.0],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &[true, true],
            &[true],
        );
        assert!(gomory_cuts(&lp, 10).is_empty());
    }

    #[test]
    fn fractional_knapsack_point_is_separated() {
        // min -2x1 - x2 s.t. x1 + x2 <= 3.5, x1 <= 2, x2 <= 2 integer.
        // LP optimum: x1 = 2, x2 = 1.5.
        let rows = vec![vec![(0, 1.0), (1, 1.0)]];
        let lp = solve(
            &rows,
            &[RowSense::Le],
            &[3.5],
            &[-2.0, -1.0],
            &[0.0, 0.0],
            &[2.0, 2.0],
            &[true, true],
            &[false],
        );
        assert!((lp.x[0] - 2.0).abs() < 1e-9);
        assert!((lp.x[1] - 1.5).abs() < 1e-9);
        let cuts = gomory_cuts(&lp, 10);
        assert!(!cuts.is_empty());
        for cut in &cuts {
            assert!(cut.violation(&lp.x) >= CUT_VIOLATION_MIN);
            // Valid for every integer point of the box that satisfies the row.
            for x0 in 0..=2 {
                for x1 in 0..=2 {
                    if x0 as f64 + x1 as f64 <= 3.5 {
                        let p = [x0 as f64, x1 as f64];
                        assert!(
                            cut.violation(&p) <= 1e-9,
                            "cut {cut:?} rejects integer point {p:?}"
                        );
                    }
                }
            }
        }
    }
}
