use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::Assignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Node or time limit hit before optimality was proven.
    Limit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::Infeasible => "INFEASIBLE",
            SolveStatus::Limit => "LIMIT",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Candidates enumerated (exhaustive) or nodes processed (branch-and-bound).
    pub nodes: u64,
    pub wall_time: Duration,
}

/// Why a slice has no feasible plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDiagnostic<S> {
    pub slice: u32,
    pub q_min: S,
    pub s_min: S,
    /// Best quality any admissible plan reaches.
    pub max_quality: S,
    /// Best security any admissible plan reaches.
    pub max_security: S,
}

impl<S: crate::Scalar> SliceDiagnostic<S> {
    pub fn qos_attainable(&self) -> bool {
        crate::scalar::ge_tol(&self.max_quality, &self.q_min)
    }

    pub fn security_attainable(&self) -> bool {
        crate::scalar::ge_tol(&self.max_security, &self.s_min)
    }
}

/// Incumbent quality when a search stops early.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitInfo<S> {
    /// Smallest bound among unexplored nodes.
    pub best_bound: S,
    /// Incumbent objective minus `best_bound`; `None` without an incumbent.
    pub gap: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S> {
    pub status: SolveStatus,
    /// The optimal plan, or the best incumbent under [`SolveStatus::Limit`].
    pub assignment: Option<Assignment<S>>,
    pub objective: Option<S>,
    pub stats: SolveStats,
    /// One entry per infeasible slice.
    pub infeasible: Vec<SliceDiagnostic<S>>,
    pub limit: Option<LimitInfo<S>>,
}

impl<S> SolveResult<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Combines per-slice results (ordered by slice id) into a scenario result.
pub(crate) fn merge_slice_results<S: crate::Scalar>(
    results: Vec<SolveResult<S>>,
    wall_time: Duration,
) -> SolveResult<S> {
    let nodes = results.iter().map(|r| r.stats.nodes).sum();
    let stats = SolveStats { nodes, wall_time };
    if results.iter().any(|r| r.status == SolveStatus::Infeasible) {
        return SolveResult {
            status: SolveStatus::Infeasible,
            assignment: None,
            objective: None,
            stats,
            infeasible: results.into_iter().flat_map(|r| r.infeasible).collect(),
            limit: None,
        };
    }
    let status = if results.iter().any(|r| r.status == SolveStatus::Limit) {
        SolveStatus::Limit
    } else {
        SolveStatus::Optimal
    };
    let mut assignment = Some(Assignment::new());
    let mut objective = Some(S::zero());
    let mut best_bound = S::zero();
    for r in results {
        best_bound = best_bound
            + match (&r.limit, &r.objective) {
                (Some(limit), _) => limit.best_bound.clone(),
                (None, Some(obj)) => obj.clone(),
                (None, None) => S::zero(),
            };
        match (assignment.as_mut(), r.assignment) {
            (Some(acc), Some(a)) => acc.merge(a),
            _ => assignment = None,
        }
        objective = match (objective, r.objective) {
            (Some(acc), Some(o)) => Some(acc + o),
            _ => None,
        };
    }
    let limit = (status == SolveStatus::Limit).then(|| LimitInfo {
        gap: objective.clone().map(|o| o - best_bound.clone()),
        best_bound,
    });
    SolveResult {
        status,
        assignment,
        objective,
        stats,
        infeasible: Vec::new(),
        limit,
    }
}
