//! The 32-feature representation of an instance.
//!
//! Features f01..f18 are static: size, sparsity, structural symmetry
//! proxies, variable composition and a constraint-class histogram, all
//! computed from the instance alone and invariant under row/column
//! permutation. Features f19..f32 are dynamic: presolve reductions,
//! post-scaling magnitudes and the effect of the root cutting loop,
//! read off the solver's root statistics.

use crate::instance::{MipInstance, RowSense, VarKind};
use crate::solver::RootStats;

pub const FEATURE_COUNT: usize = 32;

/// Column names, in dataset order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "f01_ln_rows",
    "f02_ln_cols",
    "f03_nnz_density",
    "f04_row_symmetry",
    "f05_col_symmetry",
    "f06_frac_binary",
    "f07_frac_general_integer",
    "f08_frac_continuous",
    "f09_frac_obj_support",
    "f10_singleton",
    "f11_aggregation",
    "f12_precedence",
    "f13_knapsack",
    "f14_set_partitioning",
    "f15_set_packing",
    "f16_set_covering",
    "f17_cardinality",
    "f18_general_linear",
    "f19_ln_presolved_rows",
    "f20_ln_presolved_cols",
    "f21_row_reduction",
    "f22_col_reduction",
    "f23_ln_max_a",
    "f24_ln_min_a",
    "f25_ln_max_b",
    "f26_ln_min_b",
    "f27_ln_max_c",
    "f28_ln_min_c",
    "f29_gap_closed",
    "f30_rel_dual_improvement",
    "f31_cut_density",
    "f32_lp_growth",
];

pub type FeatureVector = [f64; FEATURE_COUNT];

fn class_id(kind: VarKind) -> u8 {
    match kind {
        VarKind::Continuous => 0,
        VarKind::Binary => 1,
        VarKind::Integer => 2,
    }
}

/// Canonical byte pattern of a row: sense-normalized (>= rows are
/// negated into <=, == rows take the lexicographically smaller
/// orientation), then the multiset of (column class, coefficient) pairs
/// plus the right-hand side. Two rows with equal patterns are
/// structural candidates for a symmetry mapping them onto each other.
fn row_pattern(inst: &MipInstance, i: usize) -> Vec<u64> {
    let encode = |sense_tag: u64, rhs: f64, entries: &mut Vec<(u8, f64)>| -> Vec<u64> {
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out = Vec::with_capacity(entries.len() * 2 + 2);
        out.push(sense_tag);
        out.push(canon_bits(rhs));
        for &(c, v) in entries.iter() {
            out.push(c as u64);
            out.push(canon_bits(v));
        }
        out
    };
    let entries = |flip: bool| -> Vec<(u8, f64)> {
        inst.rows[i]
            .iter()
            .map(|&(j, v)| (class_id(inst.integrality[j]), if flip { -v } else { v }))
            .collect()
    };
    match inst.row_sense[i] {
        RowSense::Le => encode(0, inst.rhs[i], &mut entries(false)),
        RowSense::Ge => encode(0, -inst.rhs[i], &mut entries(true)),
        RowSense::Eq => {
            let a = encode(1, inst.rhs[i], &mut entries(false));
            let b = encode(1, -inst.rhs[i], &mut entries(true));
            a.min(b)
        }
    }
}

/// Canonical pattern of a column: its own class, objective coefficient
/// and bounds, plus the multiset of (normalized row sense, coefficient)
/// incidences.
fn col_pattern(inst: &MipInstance, cols: &[Vec<(usize, f64)>], j: usize) -> Vec<u64> {
    let mut incid: Vec<(u64, f64)> = cols[j]
        .iter()
        .map(|&(i, v)| match inst.row_sense[i] {
            RowSense::Le => (0u64, v),
            RowSense::Ge => (0u64, -v),
            RowSense::Eq => (1u64, v.abs()),
        })
        .collect();
    incid.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::with_capacity(incid.len() * 2 + 4);
    out.push(class_id(inst.integrality[j]) as u64);
    out.push(canon_bits(inst.objective[j]));
    out.push(canon_bits(inst.lower[j]));
    out.push(canon_bits(inst.upper[j]));
    for &(s, v) in &incid {
        out.push(s);
        out.push(canon_bits(v));
    }
    out
}

/// Bit pattern with -0.0 folded into 0.0 so equal values hash equally.
fn canon_bits(v: f64) -> u64 {
    let v = if v == 0.0 { 0.0 } else { v };
    v.to_bits()
}

fn count_distinct(patterns: Vec<Vec<u64>>) -> usize {
    let mut p = patterns;
    p.sort();
    p.dedup();
    p.len()
}

/// Constraint classes for f10..f18, assigned by first match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowClass {
    Singleton,
    Aggregation,
    Precedence,
    Knapsack,
    SetPartitioning,
    SetPacking,
    SetCovering,
    Cardinality,
    GeneralLinear,
}

fn classify_row(inst: &MipInstance, i: usize) -> RowClass {
    let row = &inst.rows[i];
    let sense = inst.row_sense[i];
    let rhs = inst.rhs[i];
    let all_binary = row
        .iter()
        .all(|&(j, _)| inst.integrality[j] == VarKind::Binary);
    let all_unit = row.iter().all(|&(_, v)| v == 1.0);
    let all_positive = row.iter().all(|&(_, v)| v > 0.0);

    if row.len() == 1 {
        return RowClass::Singleton;
    }
    if sense == RowSense::Eq && row.len() == 2 {
        return RowClass::Aggregation;
    }
    if row.len() == 2 && (row[0].1 > 0.0) != (row[1].1 > 0.0) {
        return RowClass::Precedence;
    }
    if sense == RowSense::Le && all_binary && all_positive && rhs > 1.0 {
        return RowClass::Knapsack;
    }
    if sense == RowSense::Eq && all_binary && all_unit && rhs == 1.0 {
        return RowClass::SetPartitioning;
    }
    if sense == RowSense::Le && all_binary && all_unit && rhs == 1.0 {
        return RowClass::SetPacking;
    }
    if sense == RowSense::Ge && all_binary && all_unit && rhs == 1.0 {
        return RowClass::SetCovering;
    }
    if sense == RowSense::Eq && all_unit && rhs > 1.0 {
        return RowClass::Cardinality;
    }
    RowClass::GeneralLinear
}

/// Static features f01..f18.
pub fn extract_static(inst: &MipInstance) -> [f64; 18] {
    let m = inst.n_rows();
    let n = inst.n_cols();
    assert!(m >= 1 && n >= 1, "static features need m, n >= 1");
    let mut f = [0.0; 18];
    f[0] = (m as f64).ln();
    f[1] = (n as f64).ln();
    f[2] = inst.nnz() as f64 / (m as f64 * n as f64);

    let row_patterns: Vec<Vec<u64>> = (0..m).map(|i| row_pattern(inst, i)).collect();
    f[3] = 1.0 - count_distinct(row_patterns) as f64 / m as f64;
    let cols = inst.columns();
    let col_patterns: Vec<Vec<u64>> = (0..n).map(|j| col_pattern(inst, &cols, j)).collect();
    f[4] = 1.0 - count_distinct(col_patterns) as f64 / n as f64;

    let mut counts = [0usize; 3];
    for &k in &inst.integrality {
        counts[class_id(k) as usize] += 1;
    }
    f[5] = counts[1] as f64 / n as f64;
    f[6] = counts[2] as f64 / n as f64;
    f[7] = counts[0] as f64 / n as f64;
    f[8] = inst.objective.iter().filter(|c| **c != 0.0).count() as f64 / n as f64;

    for i in 0..m {
        let slot = match classify_row(inst, i) {
            RowClass::Singleton => 9,
            RowClass::Aggregation => 10,
            RowClass::Precedence => 11,
            RowClass::Knapsack => 12,
            RowClass::SetPartitioning => 13,
            RowClass::SetPacking => 14,
            RowClass::SetCovering => 15,
            RowClass::Cardinality => 16,
            RowClass::GeneralLinear => 17,
        };
        f[slot] += 1.0;
    }
    for slot in 9..18 {
        f[slot] /= m as f64;
    }
    f
}

fn ln_or_zero(v: Option<f64>) -> f64 {
    match v {
        Some(x) if x > 0.0 => x.ln(),
        _ => 0.0,
    }
}

/// Dynamic features f19..f32, from the root statistics of a run and
/// the original (pre-presolve) row/column counts.
pub fn extract_dynamic(root: &RootStats, m: usize, n: usize) -> [f64; 14] {
    let mut f = [0.0; 14];
    let mt = root.m_presolved as f64;
    let nt = root.n_presolved as f64;
    f[0] = (mt + 1.0).ln();
    f[1] = (nt + 1.0).ln();
    f[2] = 1.0 - mt / m as f64;
    f[3] = 1.0 - nt / n as f64;
    f[4] = ln_or_zero(root.scaled.a_max);
    f[5] = ln_or_zero(root.scaled.a_min);
    f[6] = ln_or_zero(root.scaled.b_max);
    f[7] = ln_or_zero(root.scaled.b_min);
    f[8] = ln_or_zero(root.scaled.c_max);
    f[9] = ln_or_zero(root.scaled.c_min);

    match (root.c_i, root.c_d, root.c_p) {
        (Some(ci), Some(cd), Some(cp)) if (cp - ci).abs() > 1e-9 => {
            f[10] = ((cd - ci) / (cp - ci)).clamp(0.0, 1.0);
        }
        _ => f[10] = 0.0,
    }
    if let (Some(ci), Some(cd)) = (root.c_i, root.c_d) {
        f[11] = (cd - ci) / ci.abs().max(1.0);
    }
    f[12] = root.cuts_added as f64 / mt.max(1.0);
    f[13] = ((root.nnz_after.max(1)) as f64 / (root.nnz_before.max(1)) as f64).ln();
    f
}

/// Full 32-entry vector: static part from the instance, dynamic part
/// from the root statistics.
pub fn featurize(inst: &MipInstance, root: &RootStats) -> FeatureVector {
    let s = extract_static(inst);
    let d = extract_dynamic(root, inst.n_rows(), inst.n_cols());
    let mut out = [0.0; FEATURE_COUNT];
    out[..18].copy_from_slice(&s);
    out[18..].copy_from_slice(&d);
    debug_assert!(out.iter().all(|v| v.is_finite()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, permute_instance, Family, GenParams};
    use crate::solver::MagnitudeSummary;

    fn one_row(
        coefs: Vec<f64>,
        sense: RowSense,
        rhs: f64,
        kinds: Vec<VarKind>,
    ) -> MipInstance {
        let n = coefs.len();
        MipInstance {
            name: "f".into(),
            rows: vec![coefs
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect()],
            row_sense: vec![sense],
            rhs: vec![rhs],
            objective: vec![1.0; n],
            objective_offset: 0.0,
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            integrality: kinds,
        }
    }

    #[test]
    fn set_partitioning_row_classified() {
        let inst = one_row(
            vec![1.0, 1.0, 1.0],
            RowSense::Eq,
            1.0,
            vec![VarKind::Binary; 3],
        );
        let f = extract_static(&inst);
        assert_eq!(f[13], 1.0, "f14 set_partitioning");
        let others: f64 = f[9..18].iter().sum::<f64>() - f[13];
        assert_eq!(others, 0.0);
    }

    #[test]
    fn one_by_one_instance() {
        let inst = one_row(vec![2.0], RowSense::Le, 1.0, vec![VarKind::Binary]);
        let f = extract_static(&inst);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 1.0);
    }

    #[test]
    fn duplicated_row_raises_row_symmetry() {
        let mut inst = generate_instance(Family::SetCover, &GenParams::default(), 2).unwrap();
        let before = extract_static(&inst)[3];
        inst.rows.push(inst.rows[0].clone());
        inst.row_sense.push(inst.row_sense[0]);
        inst.rhs.push(inst.rhs[0]);
        let after = extract_static(&inst)[3];
        assert!(after > before, "duplicate row must increase f04");
    }

    #[test]
    fn classification_partitions_rows() {
        for seed in 0..20 {
            for family in [Family::Knapsack, Family::Mixed, Family::AssignmentPlusKnapsack] {
                let inst = generate_instance(family, &GenParams::default(), seed).unwrap();
                let f = extract_static(&inst);
                let sum: f64 = f[9..18].iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "row classes must partition");
            }
        }
    }

    #[test]
    fn static_features_are_permutation_invariant() {
        for seed in 0..10 {
            let inst = generate_instance(Family::Mixed, &GenParams::default(), seed).unwrap();
            let base = extract_static(&inst);
            for pseed in 1..4 {
                let perm = permute_instance(&inst, pseed);
                assert_eq!(base, extract_static(&perm), "seed {seed} perm {pseed}");
            }
        }
    }

    #[test]
    fn dynamic_features_from_root_landmarks() {
        let root = RootStats {
            c_i: Some(10.0),
            c_d: Some(12.0),
            c_p: Some(14.0),
            cuts_added: 3,
            rounds: 1,
            nnz_before: 10,
            nnz_after: 16,
            m_presolved: 4,
            n_presolved: 6,
            scaled: MagnitudeSummary::default(),
        };
        let f = extract_dynamic(&root, 8, 6);
        assert_eq!(f[10], 0.5, "gap_closed");
        assert!((f[11] - 0.2).abs() < 1e-12, "rel dual improvement");
        assert_eq!(f[2], 0.5, "row reduction");
        assert_eq!(f[3], 0.0, "col reduction");
        assert!((f[13] - (1.6f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn missing_incumbent_zeroes_gap_closed() {
        let root = RootStats {
            c_i: Some(5.0),
            c_d: Some(5.0),
            c_p: None,
            m_presolved: 3,
            n_presolved: 3,
            ..RootStats::default()
        };
        let f = extract_dynamic(&root, 3, 3);
        assert_eq!(f[10], 0.0);
        assert_eq!(f[11], 0.0);
        assert_eq!(f[2], 0.0);
        assert_eq!(f[0], 4.0f64.ln());
    }

    #[test]
    fn vectors_are_finite_across_a_corpus() {
        let root_empty = RootStats::default();
        for seed in 0..50 {
            for family in [
                Family::Knapsack,
                Family::SetCover,
                Family::AssignmentPlusKnapsack,
                Family::Mixed,
            ] {
                let inst = generate_instance(family, &GenParams::default(), seed).unwrap();
                let v = featurize(&inst, &root_empty);
                assert!(v.iter().all(|x| x.is_finite()));
            }
        }
    }
}
