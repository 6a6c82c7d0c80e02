//! Minimum-cost isolation planning for multi-tenant 5G network slices.
//!
//! Every slice picks, per protocol layer, an isolation level, the share of
//! control granted to the tenant (the operator keeps the rest) and whether
//! the layer runs on virtual or physical resources. The planner minimizes
//! total isolation cost subject to per-slice quality and security minima.
//!
//! Two exact solvers are provided: [`solve_exhaustive`] enumerates every
//! slice's decision grid, and [`solve_bnb`] runs branch-and-bound over the
//! same grids using a linear relaxation built from piecewise-linear
//! envelopes of the cost and quality tables. Both return identical plans.
//!
//! All model and solver code is generic over [`Scalar`]; the aliases below
//! name the common instantiations.

pub mod bnb;
pub mod catalog;
pub mod envelope;
pub mod error;
pub mod evaluator;
pub mod exhaustive;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod model;
pub mod relaxation;
pub mod scalar;
pub mod solution;
pub mod space;
pub mod sweep;

pub use bnb::{solve_bnb, solve_bnb_with, BnbOptions};
pub use error::{Error, Result};
pub use evaluator::{check_feasibility, EvaluationReport, SliceEvaluation};
pub use exhaustive::{solve_exhaustive, solve_exhaustive_within, solve_slice_exhaustive};
pub use model::{feasible_controls, validate_scenario, Assignment, AxiomCode, LayerChoice, PairKey, ValidationReport};
pub use scalar::{Rational, Scalar};
pub use solution::{SolveResult, SolveStatus};
pub use space::{Restriction, Restrictions};

pub type Scenario<S = f64> = model::Scenario<S>;
pub type Scenario32 = model::Scenario<f32>;
pub type ExactScenario = model::Scenario<Rational>;
pub type ExactAssignment = model::Assignment<Rational>;
pub type Plan = SolveResult<f64>;
pub type ExactPlan = SolveResult<Rational>;
