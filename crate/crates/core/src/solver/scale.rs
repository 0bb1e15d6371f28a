//! Geometric-mean scaling, two passes, factors rounded to powers of two.
//!
//! Rows are divided by the (rounded) geometric mean of their nonzero
//! magnitudes, then columns, then both once more. Integer columns keep
//! factor 1 so integrality is untouched; the objective and right-hand
//! side are scaled consistently, and because column factors substitute
//! `x = g * z`, the objective VALUE of any solution is unchanged.

use crate::instance::MipInstance;

/// Scaled instance plus the applied factors (original = scaled * factor).
pub struct Scaled {
    pub instance: MipInstance,
    pub row_factors: Vec<f64>,
    pub col_factors: Vec<f64>,
}

fn round_pow2(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}

fn geomean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v.abs().ln();
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some((sum / count as f64).exp())
    }
}

pub fn scale(inst: &MipInstance) -> Scaled {
    let m = inst.n_rows();
    let n = inst.n_cols();
    let mut rows = inst.rows.clone();
    let mut row_factors = vec![1.0; m];
    let mut col_factors = vec![1.0; n];

    for _pass in 0..2 {
        for (i, row) in rows.iter_mut().enumerate() {
            if let Some(g) = geomean(row.iter().map(|&(_, v)| v)) {
                let f = round_pow2(g);
                if f != 1.0 {
                    for e in row.iter_mut() {
                        e.1 /= f;
                    }
                    row_factors[i] *= f;
                }
            }
        }
        let mut col_mags: Vec<Vec<f64>> = vec![Vec::new(); n];
        for row in &rows {
            for &(j, v) in row {
                col_mags[j].push(v);
            }
        }
        let mut factors = vec![1.0; n];
        for j in 0..n {
            if inst.integrality[j].is_integral() {
                continue;
            }
            if let Some(g) = geomean(col_mags[j].iter().copied()) {
                factors[j] = round_pow2(g);
            }
        }
        for row in rows.iter_mut() {
            for e in row.iter_mut() {
                if factors[e.0] != 1.0 {
                    e.1 /= factors[e.0];
                }
            }
        }
        for j in 0..n {
            col_factors[j] *= factors[j];
        }
    }

    // x = g * z: bounds shrink by g, objective coefficients grow by g.
    let instance = MipInstance {
        name: inst.name.clone(),
        rows,
        row_sense: inst.row_sense.clone(),
        rhs: inst
            .rhs
            .iter()
            .zip(&row_factors)
            .map(|(b, f)| b / f)
            .collect(),
        objective: inst
            .objective
            .iter()
            .zip(&col_factors)
            .map(|(c, g)| c * g)
            .collect(),
        objective_offset: inst.objective_offset,
        lower: inst
            .lower
            .iter()
            .zip(&col_factors)
            .map(|(l, g)| l / g)
            .collect(),
        upper: inst
            .upper
            .iter()
            .zip(&col_factors)
            .map(|(u, g)| u / g)
            .collect(),
        integrality: inst.integrality.clone(),
    };
    Scaled {
        instance,
        row_factors,
        col_factors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RowSense, VarKind};

    fn inst(rows: Vec<Vec<(usize, f64)>>, n: usize, kinds: Vec<VarKind>) -> MipInstance {
        let m = rows.len();
        MipInstance {
            name: "s".into(),
            rows,
            row_sense: vec![RowSense::Le; m],
            rhs: vec![8.0; m],
            objective: vec![1.0; n],
            objective_offset: 0.0,
            lower: vec![0.0; n],
            upper: vec![10.0; n],
            integrality: kinds,
        }
    }

    #[test]
    fn uniform_matrix_scales_to_ones() {
        let i = inst(
            vec![vec![(0, 4.0), (1, 4.0)], vec![(0, 4.0), (1, 4.0)]],
            2,
            vec![VarKind::Continuous; 2],
        );
        let s = scale(&i);
        for row in &s.instance.rows {
            for &(_, v) in row {
                assert_eq!(v, 1.0);
            }
        }
        assert_eq!(s.row_factors, vec![4.0, 4.0]);
        // rhs scaled by the row factor
        assert_eq!(s.instance.rhs, vec![2.0, 2.0]);
    }

    #[test]
    fn well_scaled_matrix_keeps_unit_factors() {
        // Geometric means of each row/col land on 1 exactly.
        let i = inst(
            vec![vec![(0, 0.5), (1, 2.0)], vec![(0, 2.0), (1, 0.5)]],
            2,
            vec![VarKind::Continuous; 2],
        );
        let s = scale(&i);
        assert_eq!(s.row_factors, vec![1.0, 1.0]);
        assert_eq!(s.col_factors, vec![1.0, 1.0]);
        assert_eq!(s.instance.rows, i.rows);
    }

    #[test]
    fn wide_magnitude_row_lands_near_one() {
        let i = inst(
            vec![vec![(0, 1000.0), (1, 0.001)]],
            2,
            vec![VarKind::Continuous; 2],
        );
        let s = scale(&i);
        for row in &s.instance.rows {
            for &(_, v) in row {
                assert!(
                    v.abs() <= 32.0 && v.abs() >= 1.0 / 32.0,
                    "entry {v} escaped [1/32, 32]"
                );
            }
        }
    }

    #[test]
    fn integer_columns_are_never_column_scaled() {
        let i = inst(
            vec![vec![(0, 1000.0), (1, 1000.0)]],
            2,
            vec![VarKind::Integer, VarKind::Continuous],
        );
        let s = scale(&i);
        assert_eq!(s.col_factors[0], 1.0);
        // Row scaling still applies to the whole row.
        assert!(s.row_factors[0] > 1.0);
        assert_eq!(s.instance.lower[0], 0.0);
        assert_eq!(s.instance.upper[0], 10.0);
    }

    #[test]
    fn objective_value_is_preserved_under_scaling() {
        let i = inst(
            vec![vec![(0, 100.0), (1, 0.25)]],
            2,
            vec![VarKind::Continuous; 2],
        );
        let s = scale(&i);
        // Original point x and scaled point z = x / g give equal c'x.
        let x = [3.0, 5.0];
        let z: Vec<f64> = x
            .iter()
            .zip(&s.col_factors)
            .map(|(xi, g)| xi / g)
            .collect();
        let orig = i.objective_value(&x);
        let scaled = s.instance.objective_value(&z);
        assert!((orig - scaled).abs() < 1e-12);
    }
}
