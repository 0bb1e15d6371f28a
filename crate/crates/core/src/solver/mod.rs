//! Miniature deterministic branch-and-cut solver.
//!
//! The solver provides exactly two strategies: cutting only at the root
//! (NLC) or also at tree nodes (LC). Everything else — presolve,
//! scaling, the root cutting loop, best-bound node selection and
//! most-fractional branching — is shared, so a run pair differs only in
//! the local-cut decision. Runs are deterministic in everything but
//! wall-clock time; "Time" for labeling purposes is the simplex
//! iteration counter (`work`).

mod bnb;
mod cuts;
mod lp;
mod pdi;
mod presolve;
mod scale;

pub use bnb::{branch_and_cut, branch_and_cut_traced, root_cut_loop, RootOutcome, RunTrace, TracedCut};
pub use cuts::{gomory_cuts, Cut, CUT_DYNAMISM_MAX, CUT_VIOLATION_MIN, INT_TOL};
pub use lp::{solve_lp, LpError, LpSolution, LpStatus, LpTask, WorkBudget, DENSE_LIMIT, FEAS_TOL};
pub use pdi::{compute_pdi, BoundEvent};
pub use presolve::{presolve, Presolved};
pub use scale::{scale, Scaled};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("proven infeasible during presolve: {0}")]
    ProvenInfeasible(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// The LC/NLC switch plus deterministic and wall-clock limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// true = LC (cut at tree nodes too), false = NLC (root only).
    pub local_cuts: bool,
    /// Simplex iteration budget for the whole run.
    pub work_limit: u64,
    pub wall_limit_s: f64,
    pub max_root_rounds: usize,
    pub max_cuts_per_round: usize,
    /// Cut rounds per tree node; ignored when `local_cuts` is false.
    pub node_cut_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            local_cuts: false,
            work_limit: 1_000_000,
            wall_limit_s: 600.0,
            max_root_rounds: 10,
            max_cuts_per_round: 10,
            node_cut_rounds: 2,
        }
    }
}

impl SolverConfig {
    pub fn strategy(&self) -> Strategy {
        if self.local_cuts {
            Strategy::Lc
        } else {
            Strategy::Nlc
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.local_cuts = strategy == Strategy::Lc;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "NLC")]
    Nlc,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Lc => "LC",
            Strategy::Nlc => "NLC",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    #[serde(rename = "OPTIMAL")]
    Optimal,
    #[serde(rename = "LIMIT")]
    Limit,
    #[serde(rename = "INFEASIBLE")]
    Infeasible,
    #[serde(rename = "ERROR")]
    Error,
}

/// Post-scaling magnitude extremes of `A'`, `b'`, `c'`; `None` when the
/// corresponding set is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MagnitudeSummary {
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
}

/// Everything observed at the root: objective landmarks (initial bound
/// `c_i`, post-cutting dual bound `c_d`, incumbent `c_p`), the cutting
/// loop counters, and the presolve/scaling summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootStats {
    pub c_i: Option<f64>,
    pub c_d: Option<f64>,
    pub c_p: Option<f64>,
    pub cuts_added: u64,
    pub rounds: u64,
    pub nnz_before: u64,
    pub nnz_after: u64,
    pub m_presolved: u64,
    pub n_presolved: u64,
    pub scaled: MagnitudeSummary,
}

impl Default for RootStats {
    fn default() -> Self {
        RootStats {
            c_i: None,
            c_d: None,
            c_p: None,
            cuts_added: 0,
            rounds: 0,
            nnz_before: 0,
            nnz_after: 0,
            m_presolved: 0,
            n_presolved: 0,
            scaled: MagnitudeSummary::default(),
        }
    }
}

/// Outcome of one solver run; the JSONL record format (`v` = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub v: u32,
    pub problem_id: String,
    pub seed: u64,
    pub strategy: Strategy,
    pub status: RunStatus,
    pub work: u64,
    pub wall_s: f64,
    pub nodes: u64,
    pub pdi: f64,
    pub obj_primal: Option<f64>,
    pub obj_dual: Option<f64>,
    pub root: RootStats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_hash: Option<String>,
}
