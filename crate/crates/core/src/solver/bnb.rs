//! Root cutting loop and best-bound branch-and-cut tree.
//!
//! Pipeline per run: presolve -> scale -> root cutting loop -> tree.
//! Root cuts are materialized into the working problem, so both
//! strategies share an identical root phase and identical work counts
//! up to the point where the tree starts. Under LC, each node beyond
//! the root runs its own cut rounds and the resulting cuts belong to
//! that node's subtree only (children inherit them, siblings never see
//! them).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::instance::{magnitude_sets, MagnitudeSets, MipInstance, RowSense, VarKind};

use super::cuts::{gomory_cuts, Cut, INT_TOL};
use super::lp::{solve_lp, LpError, LpSolution, LpStatus, LpTask, WorkBudget};
use super::pdi::{compute_pdi, BoundEvent};
use super::presolve::presolve;
use super::scale::scale;
use super::{MagnitudeSummary, RootStats, RunRecord, RunStatus, SolverConfig, SolverError};

/// A cut together with the variable bounds of the node that produced
/// it: the box on which the cut claims validity.
#[derive(Debug, Clone)]
pub struct TracedCut {
    pub cut: Cut,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Diagnostic byproduct of a run, for validity audits: the working
/// problem (presolved + scaled, before any cut rows) and every cut that
/// was generated, root or local.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub working: Option<MipInstance>,
    pub cuts: Vec<TracedCut>,
}

/// Base problem shared by the whole tree.
struct Working {
    inst: MipInstance,
    int_col: Vec<bool>,
    int_slack: Vec<bool>,
}

impl Working {
    fn new(inst: MipInstance) -> Working {
        let int_col: Vec<bool> = inst.integrality.iter().map(|k| k.is_integral()).collect();
        let int_slack = (0..inst.n_rows())
            .map(|i| row_has_integral_slack(&inst, &int_col, i))
            .collect();
        Working {
            inst,
            int_col,
            int_slack,
        }
    }

    /// Appends a globally valid cut row (`coefs'x >= rhs`).
    fn push_row(&mut self, cut: &Cut) {
        self.inst.rows.push(cut.coefs.clone());
        self.inst.row_sense.push(RowSense::Ge);
        self.inst.rhs.push(cut.rhs);
        self.int_slack.push(false);
    }
}

/// A slack is integer-valued when its row couples only integer columns
/// through integral coefficients to an integral right-hand side.
fn row_has_integral_slack(inst: &MipInstance, int_col: &[bool], i: usize) -> bool {
    let integral = |v: f64| (v - v.round()).abs() <= 1e-9;
    integral(inst.rhs[i])
        && inst.rows[i]
            .iter()
            .all(|&(j, v)| int_col[j] && integral(v))
}

fn is_point_integral(x: &[f64], int_col: &[bool]) -> bool {
    x.iter()
        .zip(int_col)
        .all(|(v, is_int)| !is_int || (v - v.round()).abs() <= INT_TOL)
}

/// Most fractional integer variable, ties by smallest index.
fn pick_branch_var(x: &[f64], int_col: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !int_col[j] {
            continue;
        }
        let f = v - v.floor();
        let dist = f.min(1.0 - f);
        if dist <= INT_TOL {
            continue;
        }
        let score = (dist - 0.5).abs();
        if best.map_or(true, |(_, s)| score < s - 1e-15) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

fn solve_node_lp(
    w: &Working,
    cuts: &[Cut],
    lower: &[f64],
    upper: &[f64],
    work: &mut WorkBudget,
) -> Result<LpSolution, LpError> {
    if cuts.is_empty() {
        let task = LpTask {
            rows: &w.inst.rows,
            senses: &w.inst.row_sense,
            rhs: &w.inst.rhs,
            objective: &w.inst.objective,
            lower,
            upper,
            int_col: &w.int_col,
            int_slack: &w.int_slack,
        };
        return solve_lp(&task, work);
    }
    let mut rows = w.inst.rows.clone();
    let mut senses = w.inst.row_sense.clone();
    let mut rhs = w.inst.rhs.clone();
    let mut int_slack = w.int_slack.clone();
    for cut in cuts {
        rows.push(cut.coefs.clone());
        senses.push(RowSense::Ge);
        rhs.push(cut.rhs);
        int_slack.push(false);
    }
    let task = LpTask {
        rows: &rows,
        senses: &senses,
        rhs: &rhs,
        objective: &w.inst.objective,
        lower,
        upper,
        int_col: &w.int_col,
        int_slack: &int_slack,
    };
    solve_lp(&task, work)
}

/// Fix integer variables at their rounded LP values and look for the
/// best completion; the root incumbent source next to plain LP
/// integrality.
fn rounding_probe(
    w: &Working,
    lp_x: &[f64],
    work: &mut WorkBudget,
) -> Result<Option<(f64, Vec<f64>)>, LpError> {
    let n = w.inst.n_cols();
    let mut lower = w.inst.lower.clone();
    let mut upper = w.inst.upper.clone();
    let mut any_continuous = false;
    for j in 0..n {
        if w.int_col[j] {
            let v = lp_x[j].round().clamp(lower[j], upper[j]);
            lower[j] = v;
            upper[j] = v;
        } else {
            any_continuous = true;
        }
    }
    if !any_continuous {
        let x: Vec<f64> = lower.clone();
        if w.inst.is_feasible(&x, 1e-6, 1e-6) {
            let obj = w.inst.objective_value(&x);
            return Ok(Some((obj, x)));
        }
        return Ok(None);
    }
    let task = LpTask {
        rows: &w.inst.rows,
        senses: &w.inst.row_sense,
        rhs: &w.inst.rhs,
        objective: &w.inst.objective,
        lower: &lower,
        upper: &upper,
        int_col: &w.int_col,
        int_slack: &w.int_slack,
    };
    match solve_lp(&task, work) {
        Ok(sol) if sol.status == LpStatus::Optimal => {
            let obj = sol.objective + w.inst.objective_offset;
            Ok(Some((obj, sol.x)))
        }
        Ok(_) => Ok(None),
        Err(LpError::Numerical(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// What the root phase settles, if anything.
pub struct RootOutcome {
    /// Presolved + scaled problem with root cut rows appended.
    pub working: MipInstance,
    pub stats: RootStats,
    /// Incumbent found at the root (objective includes the offset).
    pub incumbent: Option<(f64, Vec<f64>)>,
    /// Best dual bound, offset included.
    pub dual_bound: Option<f64>,
    /// `Some` when the run is already decided at the root.
    pub settled: Option<RunStatus>,
    pub events: Vec<BoundEvent>,
    pub traced_cuts: Vec<TracedCut>,
}

/// Runs the root cutting loop on an already presolved and scaled
/// instance. Alternates LP solves and cut rounds until no violated cut
/// is found or `max_root_rounds` is reached.
pub fn root_cut_loop(
    scaled_inst: &MipInstance,
    config: &SolverConfig,
    work: &mut WorkBudget,
) -> Result<RootOutcome, SolverError> {
    let mut w = Working::new(scaled_inst.clone());
    let offset = w.inst.objective_offset;
    let mut stats = RootStats {
        nnz_before: w.inst.nnz() as u64,
        ..RootStats::default()
    };
    let mut events = Vec::new();
    let mut traced = Vec::new();

    // Fully presolved away: the optimum is the accumulated offset.
    if w.inst.n_cols() == 0 {
        stats.c_i = Some(offset);
        stats.c_d = Some(offset);
        stats.c_p = Some(offset);
        stats.nnz_after = stats.nnz_before;
        events.push(BoundEvent {
            work: work.used,
            primal: Some(offset),
            dual: Some(offset),
        });
        return Ok(RootOutcome {
            working: w.inst,
            stats,
            incumbent: Some((offset, Vec::new())),
            dual_bound: Some(offset),
            settled: Some(RunStatus::Optimal),
            events,
            traced_cuts: traced,
        });
    }

    let lower = w.inst.lower.clone();
    let upper = w.inst.upper.clone();
    let mut lp = solve_node_lp(&w, &[], &lower, &upper, work)?;
    match lp.status {
        LpStatus::Infeasible => {
            stats.nnz_after = w.inst.nnz() as u64;
            return Ok(RootOutcome {
                working: w.inst,
                stats,
                incumbent: None,
                dual_bound: None,
                settled: Some(RunStatus::Infeasible),
                events,
                traced_cuts: traced,
            });
        }
        LpStatus::Unbounded => {
            return Err(SolverError::Lp(LpError::Numerical(
                "root LP is unbounded".to_string(),
            )))
        }
        LpStatus::Optimal => {}
    }
    let c_i = lp.objective + offset;
    stats.c_i = Some(c_i);
    let mut c_d = c_i;
    events.push(BoundEvent {
        work: work.used,
        primal: None,
        dual: Some(c_d),
    });

    let mut solved_at_root = false;
    for _ in 0..config.max_root_rounds {
        if is_point_integral(&lp.x, &w.int_col) {
            solved_at_root = true;
            break;
        }
        let cuts = gomory_cuts(&lp, config.max_cuts_per_round);
        if cuts.is_empty() {
            break;
        }
        for cut in &cuts {
            traced.push(TracedCut {
                cut: cut.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
            });
            w.push_row(cut);
        }
        stats.cuts_added += cuts.len() as u64;
        stats.rounds += 1;
        lp = solve_node_lp(&w, &[], &lower, &upper, work)?;
        match lp.status {
            LpStatus::Infeasible => {
                // Cuts only remove fractional points, so the root has no
                // integer-feasible point at all.
                stats.nnz_after = w.inst.nnz() as u64;
                stats.c_d = Some(c_d);
                return Ok(RootOutcome {
                    working: w.inst,
                    stats,
                    incumbent: None,
                    dual_bound: Some(c_d),
                    settled: Some(RunStatus::Infeasible),
                    events,
                    traced_cuts: traced,
                });
            }
            LpStatus::Unbounded => {
                return Err(SolverError::Lp(LpError::Numerical(
                    "root LP became unbounded after cutting".to_string(),
                )))
            }
            LpStatus::Optimal => {}
        }
        // The dual bound never deteriorates; the max guards roundoff.
        c_d = c_d.max(lp.objective + offset);
        events.push(BoundEvent {
            work: work.used,
            primal: None,
            dual: Some(c_d),
        });
    }
    if !solved_at_root {
        solved_at_root = is_point_integral(&lp.x, &w.int_col);
    }
    stats.c_d = Some(c_d);
    stats.nnz_after = w.inst.nnz() as u64;

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if solved_at_root {
        incumbent = Some((lp.objective + offset, lp.x.clone()));
    } else if let Some((obj, x)) = rounding_probe(&w, &lp.x, work)? {
        incumbent = Some((obj, x));
    }
    if let Some((obj, _)) = &incumbent {
        stats.c_p = Some(*obj);
        events.push(BoundEvent {
            work: work.used,
            primal: Some(*obj),
            dual: Some(c_d),
        });
    }

    Ok(RootOutcome {
        working: w.inst,
        stats,
        incumbent,
        dual_bound: Some(c_d),
        settled: if solved_at_root {
            Some(RunStatus::Optimal)
        } else {
            None
        },
        events,
        traced_cuts: traced,
    })
}

struct TreeNode {
    id: u64,
    depth: u32,
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cuts: Vec<Cut>,
}

struct HeapEntry {
    node: TreeNode,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.node.bound == other.node.bound && self.node.id == other.node.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap pops the maximum: invert so the smallest bound
        // (then the oldest node) comes out first.
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then(other.node.id.cmp(&self.node.id))
    }
}

/// Relative pruning epsilon.
fn prune_eps(incumbent: f64) -> f64 {
    1e-9 * incumbent.abs().max(1.0)
}

/// Solves the instance with the configured strategy and returns the run
/// record together with the cut trace.
pub fn branch_and_cut_traced(inst: &MipInstance, config: &SolverConfig) -> (RunRecord, RunTrace) {
    let start = Instant::now();
    let mut work = WorkBudget::new(config.work_limit);
    let mut record = RunRecord {
        v: 1,
        problem_id: inst.name.clone(),
        seed: 0,
        strategy: config.strategy(),
        status: RunStatus::Error,
        work: 0,
        wall_s: 0.0,
        nodes: 1,
        pdi: 0.0,
        obj_primal: None,
        obj_dual: None,
        root: RootStats::default(),
        diag: None,
        config_hash: None,
    };
    let mut trace = RunTrace::default();

    let pre = match presolve(inst) {
        Ok(p) => p,
        Err(SolverError::ProvenInfeasible(_)) => {
            record.status = RunStatus::Infeasible;
            record.wall_s = start.elapsed().as_secs_f64();
            return (record, trace);
        }
        Err(e) => {
            record.diag = Some(e.to_string());
            record.wall_s = start.elapsed().as_secs_f64();
            return (record, trace);
        }
    };
    let scaled = scale(&pre.instance);
    record.root.m_presolved = pre.m_presolved as u64;
    record.root.n_presolved = pre.n_presolved as u64;
    record.root.scaled = summarize_magnitudes(&magnitude_sets(&scaled.instance));
    trace.working = Some(scaled.instance.clone());

    let mut events: Vec<BoundEvent>;
    let root = match root_cut_loop(&scaled.instance, config, &mut work) {
        Ok(r) => r,
        Err(SolverError::Lp(LpError::WorkLimit)) => {
            record.status = RunStatus::Limit;
            record.work = work.used;
            record.pdi = compute_pdi(&[], work.used);
            record.wall_s = start.elapsed().as_secs_f64();
            return (record, trace);
        }
        Err(e) => {
            record.diag = Some(e.to_string());
            record.wall_s = start.elapsed().as_secs_f64();
            return (record, trace);
        }
    };
    let root_stats_partial = root.stats.clone();
    record.root.c_i = root_stats_partial.c_i;
    record.root.c_d = root_stats_partial.c_d;
    record.root.c_p = root_stats_partial.c_p;
    record.root.cuts_added = root_stats_partial.cuts_added;
    record.root.rounds = root_stats_partial.rounds;
    record.root.nnz_before = root_stats_partial.nnz_before;
    record.root.nnz_after = root_stats_partial.nnz_after;
    trace.cuts.extend(root.traced_cuts.iter().cloned());
    events = root.events.clone();

    let mut incumbent = root.incumbent.clone();
    let mut dual_bound = root.dual_bound;

    if let Some(status) = root.settled {
        record.status = status;
        record.nodes = 1;
        record.work = work.used;
        record.obj_primal = incumbent.as_ref().map(|(o, _)| *o);
        record.obj_dual = match status {
            RunStatus::Optimal => record.obj_primal,
            _ => dual_bound,
        };
        record.pdi = compute_pdi(&events, work.used);
        record.wall_s = start.elapsed().as_secs_f64();
        return (record, trace);
    }

    // Tree search over the working problem (root cuts are global rows).
    let w = Working::new(root.working);
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut next_id: u64 = 0;
    heap.push(HeapEntry {
        node: TreeNode {
            id: next_id,
            depth: 0,
            bound: dual_bound.unwrap_or(f64::NEG_INFINITY),
            lower: w.inst.lower.clone(),
            upper: w.inst.upper.clone(),
            cuts: Vec::new(),
        },
    });
    next_id += 1;

    let mut nodes_processed: u64 = 0;
    let mut final_status: Option<RunStatus> = None;

    'tree: while let Some(entry) = heap.pop() {
        let mut node = entry.node;
        if start.elapsed().as_secs_f64() > config.wall_limit_s || work.exhausted() {
            final_status = Some(RunStatus::Limit);
            break;
        }
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= inc_obj - prune_eps(*inc_obj) {
                continue;
            }
        }
        // Best-bound order makes the popped bound the global dual bound.
        if node.bound > dual_bound.unwrap_or(f64::NEG_INFINITY) {
            dual_bound = Some(node.bound);
            events.push(BoundEvent {
                work: work.used,
                primal: incumbent.as_ref().map(|(o, _)| *o),
                dual: dual_bound,
            });
        }

        let mut lp = match solve_node_lp(&w, &node.cuts, &node.lower, &node.upper, &mut work) {
            Ok(s) => s,
            Err(LpError::WorkLimit) => {
                nodes_processed += 1;
                final_status = Some(RunStatus::Limit);
                break;
            }
            Err(e) => {
                record.diag = Some(e.to_string());
                final_status = Some(RunStatus::Error);
                break;
            }
        };
        nodes_processed += 1;
        if lp.status != LpStatus::Optimal {
            continue; // infeasible subtree (unbounded cannot appear below a bounded root)
        }

        let node_cut_rounds = if config.local_cuts && node.depth > 0 {
            config.node_cut_rounds
        } else {
            0
        };
        let mut pruned = false;
        for _ in 0..node_cut_rounds {
            if let Some((inc_obj, _)) = &incumbent {
                if lp.objective + w.inst.objective_offset >= inc_obj - prune_eps(*inc_obj) {
                    break;
                }
            }
            if is_point_integral(&lp.x, &w.int_col) {
                break;
            }
            let cuts = gomory_cuts(&lp, config.max_cuts_per_round);
            if cuts.is_empty() {
                break;
            }
            for cut in &cuts {
                trace.cuts.push(TracedCut {
                    cut: cut.clone(),
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                });
            }
            node.cuts.extend(cuts);
            lp = match solve_node_lp(&w, &node.cuts, &node.lower, &node.upper, &mut work) {
                Ok(s) => s,
                Err(LpError::WorkLimit) => {
                    final_status = Some(RunStatus::Limit);
                    break 'tree;
                }
                Err(e) => {
                    record.diag = Some(e.to_string());
                    final_status = Some(RunStatus::Error);
                    break 'tree;
                }
            };
            if lp.status != LpStatus::Optimal {
                pruned = true; // node became integer-infeasible
                break;
            }
        }
        if pruned {
            continue;
        }

        let lp_obj = lp.objective + w.inst.objective_offset;
        if let Some((inc_obj, _)) = &incumbent {
            if lp_obj >= inc_obj - prune_eps(*inc_obj) {
                continue;
            }
        }
        if is_point_integral(&lp.x, &w.int_col) {
            incumbent = Some((lp_obj, lp.x.clone()));
            events.push(BoundEvent {
                work: work.used,
                primal: Some(lp_obj),
                dual: dual_bound,
            });
            continue;
        }

        let Some(j) = pick_branch_var(&lp.x, &w.int_col) else {
            continue; // numerically integral
        };
        let v = lp.x[j];
        // Down child first, then up: ids keep sibling order deterministic.
        let mut down = TreeNode {
            id: next_id,
            depth: node.depth + 1,
            bound: lp_obj,
            lower: node.lower.clone(),
            upper: node.upper.clone(),
            cuts: node.cuts.clone(),
        };
        next_id += 1;
        down.upper[j] = v.floor();
        if down.lower[j] <= down.upper[j] {
            heap.push(HeapEntry { node: down });
        }
        let mut up = TreeNode {
            id: next_id,
            depth: node.depth + 1,
            bound: lp_obj,
            lower: node.lower,
            upper: node.upper,
            cuts: node.cuts,
        };
        next_id += 1;
        up.lower[j] = v.floor() + 1.0;
        if up.lower[j] <= up.upper[j] {
            heap.push(HeapEntry { node: up });
        }
    }

    let status = final_status.unwrap_or_else(|| {
        if incumbent.is_some() {
            RunStatus::Optimal
        } else {
            RunStatus::Infeasible
        }
    });
    if status == RunStatus::Optimal {
        dual_bound = incumbent.as_ref().map(|(o, _)| *o);
        events.push(BoundEvent {
            work: work.used,
            primal: dual_bound,
            dual: dual_bound,
        });
    }

    record.status = status;
    record.nodes = nodes_processed.max(1);
    record.work = work.used;
    record.obj_primal = incumbent.as_ref().map(|(o, _)| *o);
    record.obj_dual = dual_bound;
    record.pdi = compute_pdi(&events, work.used);
    record.wall_s = start.elapsed().as_secs_f64();
    (record, trace)
}

/// Solves the instance with the configured strategy.
pub fn branch_and_cut(inst: &MipInstance, config: &SolverConfig) -> RunRecord {
    branch_and_cut_traced(inst, config).0
}

fn summarize_magnitudes(mags: &MagnitudeSets) -> MagnitudeSummary {
    let a = MagnitudeSets::min_max(&mags.a_prime);
    let b = MagnitudeSets::min_max(&mags.b_prime);
    let c = MagnitudeSets::min_max(&mags.c_prime);
    MagnitudeSummary {
        a_min: a.map(|p| p.0),
        a_max: a.map(|p| p.1),
        b_min: b.map(|p| p.0),
        b_max: b.map(|p| p.1),
        c_min: c.map(|p| p.0),
        c_max: c.map(|p| p.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Family, GenParams};

    fn config(local: bool) -> SolverConfig {
        SolverConfig {
            local_cuts: local,
            work_limit: 500_000,
            ..SolverConfig::default()
        }
    }

    fn continuous_instance() -> MipInstance {
        MipInstance {
            name: "cont".into(),
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            row_sense: vec![RowSense::Le],
            rhs: vec![4.0],
            objective: vec![-1.0, -2.0],
            objective_offset: 0.0,
            lower: vec![0.0, 0.0],
            upper: vec![3.0, 3.0],
            integrality: vec![VarKind::Continuous, VarKind::Continuous],
        }
    }

    #[test]
    fn pure_continuous_root_has_no_cuts() {
        let inst = continuous_instance();
        let scaled = scale(&presolve(&inst).unwrap().instance);
        let mut work = WorkBudget::new(100_000);
        let root = root_cut_loop(&scaled.instance, &config(false), &mut work).unwrap();
        assert_eq!(root.stats.cuts_added, 0);
        assert_eq!(root.stats.rounds, 0);
        assert_eq!(root.stats.c_i, root.stats.c_d);
        assert_eq!(root.settled, Some(RunStatus::Optimal));
    }

    #[test]
    fn textbook_gomory_improves_dual_bound() {
        // min -y s.t. 3x + 2y <= 6, -3x + 2y <= 0, x,y >= 0 integer.
        // LP optimum y = 1.5; the integer optimum is y = 1.
        let inst = MipInstance {
            name: "gomory".into(),
            rows: vec![vec![(0, 3.0), (1, 2.0)], vec![(0, -3.0), (1, 2.0)]],
            row_sense: vec![RowSense::Le, RowSense::Le],
            rhs: vec![6.0, 0.0],
            objective: vec![0.0, -1.0],
            objective_offset: 0.0,
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY],
            integrality: vec![VarKind::Integer, VarKind::Integer],
        };
        let scaled = scale(&presolve(&inst).unwrap().instance);
        let mut work = WorkBudget::new(100_000);
        let root = root_cut_loop(&scaled.instance, &config(false), &mut work).unwrap();
        let c_i = root.stats.c_i.unwrap();
        let c_d = root.stats.c_d.unwrap();
        assert!((c_i - -1.5).abs() < 1e-6, "c_i = {c_i}");
        assert!(c_d > c_i + 1e-6, "cutting failed to move the bound");
        assert!(root.stats.cuts_added > 0);
    }

    #[test]
    fn zero_root_rounds_keep_initial_bound() {
        let inst = generate_instance(Family::Knapsack, &GenParams::default(), 3).unwrap();
        let scaled = scale(&presolve(&inst).unwrap().instance);
        let mut work = WorkBudget::new(100_000);
        let cfg = SolverConfig {
            max_root_rounds: 0,
            ..config(false)
        };
        let root = root_cut_loop(&scaled.instance, &cfg, &mut work).unwrap();
        assert_eq!(root.stats.cuts_added, 0);
        assert_eq!(root.stats.c_i, root.stats.c_d);
    }

    #[test]
    fn integral_root_gives_identical_strategies() {
        // LP optimum integral: one node, LC == NLC.
        let inst = MipInstance {
            name: "integral".into(),
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            row_sense: vec![RowSense::Le],
            rhs: vec![2.0],
            objective: vec![-1.0, -1.0],
            objective_offset: 0.0,
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            integrality: vec![VarKind::Binary, VarKind::Binary],
        };
        let mut lc = branch_and_cut(&inst, &config(true));
        let mut nlc = branch_and_cut(&inst, &config(false));
        assert_eq!(lc.nodes, 1);
        assert_eq!(lc.status, RunStatus::Optimal);
        lc.wall_s = 0.0;
        nlc.wall_s = 0.0;
        lc.strategy = nlc.strategy;
        assert_eq!(lc, nlc);
    }

    #[test]
    fn knapsack_solved_to_optimality_by_both_strategies() {
        let inst = generate_instance(
            Family::Knapsack,
            &GenParams {
                n: 12,
                m: 2,
                ..GenParams::default()
            },
            11,
        )
        .unwrap();
        let lc = branch_and_cut(&inst, &config(true));
        let nlc = branch_and_cut(&inst, &config(false));
        assert_eq!(lc.status, RunStatus::Optimal);
        assert_eq!(nlc.status, RunStatus::Optimal);
        let (a, b) = (lc.obj_primal.unwrap(), nlc.obj_primal.unwrap());
        assert!(
            (a - b).abs() <= 1e-6 * a.abs().max(1.0),
            "strategies disagree: {a} vs {b}"
        );
        // Optimal runs carry matching primal/dual bounds.
        assert_eq!(lc.obj_primal, lc.obj_dual);
    }

    #[test]
    fn runs_are_deterministic_modulo_wall_clock() {
        let inst = generate_instance(Family::Mixed, &GenParams::default(), 4).unwrap();
        let mut a = branch_and_cut(&inst, &config(true));
        let mut b = branch_and_cut(&inst, &config(true));
        a.wall_s = 0.0;
        b.wall_s = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_instance_reported() {
        let inst = MipInstance {
            name: "infeas".into(),
            rows: vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]],
            row_sense: vec![RowSense::Le, RowSense::Ge],
            rhs: vec![1.0, 3.0],
            objective: vec![1.0, 1.0],
            objective_offset: 0.0,
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            integrality: vec![VarKind::Binary, VarKind::Binary],
        };
        let rec = branch_and_cut(&inst, &config(false));
        assert_eq!(rec.status, RunStatus::Infeasible);
        assert!(rec.nodes >= 1);
    }

    #[test]
    fn dual_bound_is_monotone_at_root() {
        for seed in 0..20 {
            let inst = generate_instance(Family::Knapsack, &GenParams::default(), seed).unwrap();
            let rec = branch_and_cut(&inst, &config(false));
            if let (Some(ci), Some(cd)) = (rec.root.c_i, rec.root.c_d) {
                assert!(cd >= ci - 1e-9, "seed {seed}: c_d {cd} < c_i {ci}");
            }
            assert!(rec.pdi >= 0.0 && rec.pdi <= rec.work as f64);
        }
    }

    #[test]
    fn work_limit_yields_limit_status() {
        let inst = generate_instance(
            Family::Knapsack,
            &GenParams {
                n: 30,
                m: 5,
                ..GenParams::default()
            },
            2,
        )
        .unwrap();
        let cfg = SolverConfig {
            work_limit: 50,
            ..config(false)
        };
        let rec = branch_and_cut(&inst, &cfg);
        assert_eq!(rec.status, RunStatus::Limit);
        assert!(rec.work >= 50);
    }
}
