//! Fixpoint presolve: empty rows/columns, singleton rows to bounds,
//! fixed-variable substitution, redundant rows by activity bounds, and
//! integer bound rounding. Objective contributions of removed columns
//! accumulate in the instance offset, so optimal values are preserved.

use crate::instance::{MipInstance, RowSense, VarKind};

use super::SolverError;

const TOL: f64 = 1e-7;

/// Result of presolving: the reduced instance plus the surviving row
/// and column counts.
pub struct Presolved {
    pub instance: MipInstance,
    pub m_presolved: usize,
    pub n_presolved: usize,
}

pub fn presolve(inst: &MipInstance) -> Result<Presolved, SolverError> {
    let m = inst.n_rows();
    let n = inst.n_cols();
    let mut rows: Vec<Vec<(usize, f64)>> = inst.rows.clone();
    let mut rhs = inst.rhs.clone();
    let mut lower = inst.lower.clone();
    let mut upper = inst.upper.clone();
    let integrality = inst.integrality.clone();
    let mut offset = inst.objective_offset;
    let mut row_active = vec![true; m];
    let mut col_active = vec![true; n];

    let infeasible = |why: &str| Err(SolverError::ProvenInfeasible(why.to_string()));

    loop {
        let mut changed = false;

        // Integer bound rounding and crossed-bound detection.
        for j in 0..n {
            if !col_active[j] {
                continue;
            }
            if integrality[j].is_integral() {
                let l = if lower[j].is_finite() {
                    (lower[j] - 1e-6).ceil()
                } else {
                    lower[j]
                };
                let u = if upper[j].is_finite() {
                    (upper[j] + 1e-6).floor()
                } else {
                    upper[j]
                };
                if l != lower[j] || u != upper[j] {
                    lower[j] = l;
                    upper[j] = u;
                    changed = true;
                }
            }
            if lower[j] > upper[j] + 1e-9 {
                return infeasible("crossed variable bounds");
            }
        }

        // Fixed columns: substitute into rows and the objective.
        for j in 0..n {
            if !col_active[j] || upper[j] - lower[j] > 1e-9 {
                continue;
            }
            let val = lower[j];
            for (i, row) in rows.iter_mut().enumerate() {
                if !row_active[i] {
                    continue;
                }
                if let Some(pos) = row.iter().position(|&(c, _)| c == j) {
                    rhs[i] -= row[pos].1 * val;
                    row.remove(pos);
                }
            }
            offset += inst.objective[j] * val;
            col_active[j] = false;
            changed = true;
        }

        // Row reductions.
        for i in 0..m {
            if !row_active[i] {
                continue;
            }
            match rows[i].len() {
                0 => {
                    let ok = match inst.row_sense[i] {
                        RowSense::Le => rhs[i] >= -TOL,
                        RowSense::Ge => rhs[i] <= TOL,
                        RowSense::Eq => rhs[i].abs() <= TOL,
                    };
                    if !ok {
                        return infeasible("empty row is unsatisfiable");
                    }
                    row_active[i] = false;
                    changed = true;
                }
                1 => {
                    let (j, a) = rows[i][0];
                    let bound = rhs[i] / a;
                    match (inst.row_sense[i], a > 0.0) {
                        (RowSense::Le, true) | (RowSense::Ge, false) => {
                            if bound < upper[j] {
                                upper[j] = bound;
                            }
                        }
                        (RowSense::Le, false) | (RowSense::Ge, true) => {
                            if bound > lower[j] {
                                lower[j] = bound;
                            }
                        }
                        (RowSense::Eq, _) => {
                            if bound > lower[j] {
                                lower[j] = bound;
                            }
                            if bound < upper[j] {
                                upper[j] = bound;
                            }
                        }
                    }
                    if lower[j] > upper[j] + 1e-9 {
                        return infeasible("singleton row forces crossed bounds");
                    }
                    row_active[i] = false;
                    changed = true;
                }
                _ => {
                    // Activity bounds over the current box.
                    let mut min_act = 0.0f64;
                    let mut max_act = 0.0f64;
                    for &(j, a) in &rows[i] {
                        let (lo_c, hi_c) = if a > 0.0 {
                            (a * lower[j], a * upper[j])
                        } else {
                            (a * upper[j], a * lower[j])
                        };
                        min_act += lo_c;
                        max_act += hi_c;
                    }
                    let b = rhs[i];
                    let (redundant, impossible) = match inst.row_sense[i] {
                        RowSense::Le => (max_act <= b + TOL, min_act > b + TOL),
                        RowSense::Ge => (min_act >= b - TOL, max_act < b - TOL),
                        RowSense::Eq => (
                            (max_act - b).abs() <= TOL && (min_act - b).abs() <= TOL,
                            min_act > b + TOL || max_act < b - TOL,
                        ),
                    };
                    if impossible {
                        return infeasible("row activity bounds exclude the rhs");
                    }
                    if redundant {
                        row_active[i] = false;
                        changed = true;
                    }
                }
            }
        }

        // Empty columns: fix at the objective-preferred finite bound.
        let mut col_used = vec![false; n];
        for (i, row) in rows.iter().enumerate() {
            if row_active[i] {
                for &(j, _) in row {
                    col_used[j] = true;
                }
            }
        }
        for j in 0..n {
            if !col_active[j] || col_used[j] {
                continue;
            }
            let c = inst.objective[j];
            let val = if c > 0.0 {
                lower[j]
            } else if c < 0.0 {
                upper[j]
            } else if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            };
            if !val.is_finite() {
                // Unbounded improving direction: leave the column for the
                // solver to diagnose.
                continue;
            }
            offset += c * val;
            col_active[j] = false;
            changed = true;
        }

        if !changed {
            break;
        }
    }

    // Compact the surviving rows and columns.
    let mut col_map = vec![usize::MAX; n];
    let mut new_n = 0;
    for j in 0..n {
        if col_active[j] {
            col_map[j] = new_n;
            new_n += 1;
        }
    }
    let mut out_rows = Vec::new();
    let mut out_sense = Vec::new();
    let mut out_rhs = Vec::new();
    for i in 0..m {
        if !row_active[i] {
            continue;
        }
        let mut row: Vec<(usize, f64)> = rows[i].iter().map(|&(j, a)| (col_map[j], a)).collect();
        row.sort_by_key(|&(j, _)| j);
        out_rows.push(row);
        out_sense.push(inst.row_sense[i]);
        out_rhs.push(rhs[i]);
    }
    let mut out_obj = Vec::with_capacity(new_n);
    let mut out_lower = Vec::with_capacity(new_n);
    let mut out_upper = Vec::with_capacity(new_n);
    let mut out_kind = Vec::with_capacity(new_n);
    for j in 0..n {
        if !col_active[j] {
            continue;
        }
        out_obj.push(inst.objective[j]);
        out_lower.push(lower[j]);
        out_upper.push(upper[j]);
        // Integer columns squeezed into [0, 1] are binary from here on.
        let kind = if integrality[j] == VarKind::Integer
            && lower[j] >= 0.0
            && upper[j] <= 1.0
        {
            VarKind::Binary
        } else {
            integrality[j]
        };
        out_kind.push(kind);
    }

    let m_presolved = out_rows.len();
    let n_presolved = new_n;
    Ok(Presolved {
        instance: MipInstance {
            name: inst.name.clone(),
            rows: out_rows,
            row_sense: out_sense,
            rhs: out_rhs,
            objective: out_obj,
            objective_offset: offset,
            lower: out_lower,
            upper: out_upper,
            integrality: out_kind,
        },
        m_presolved,
        n_presolved,
    })
}
