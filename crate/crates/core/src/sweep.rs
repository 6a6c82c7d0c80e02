//! Parameter sweeps and the security-versus-cost frontier.
//!
//! A sweep forces a floor on one decision of a target slice (all of its
//! layers, or one layer) and re-solves that slice for every forced value.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaustive::{advance, ensure_valid, scored_choices, solve_slice_exhaustive_within};
use crate::io::tidy;
use crate::model::{Assignment, PairKey, Scenario};
use crate::scalar::{ge_tol, lt_strict, Scalar};
use crate::solution::SolveStatus;
use crate::space::{Restrictions, SliceSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDimension {
    IsolationFloor,
    TenantControlFloor,
    MnoControlFloor,
}

impl FromStr for SweepDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isolation_floor" => Ok(SweepDimension::IsolationFloor),
            "tenant_control_floor" => Ok(SweepDimension::TenantControlFloor),
            "mno_control_floor" => Ok(SweepDimension::MnoControlFloor),
            other => Err(Error::InvalidSweep(format!("unknown dimension {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<S> {
    pub dimension: SweepDimension,
    pub slice: u32,
    /// `None` applies the floor to every layer of the slice.
    pub layer: Option<u32>,
    /// Forced values; empty means every value the target domains define.
    pub values: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<S> {
    pub forced_value: S,
    /// Optimal plan for the slice under the floor; `None` when infeasible.
    pub plan: Option<SweepPlan<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan<S> {
    pub cost: S,
    pub quality: S,
    pub security: S,
    pub tenant_control_sum: S,
    pub mno_control_sum: S,
    pub assignment: Assignment<S>,
}

impl<S: Scalar> SweepPlan<S> {
    fn from_assignment(scenario: &Scenario<S>, slice: u32, assignment: Assignment<S>, cost: S) -> Result<Self> {
        let mut quality = S::zero();
        let mut security = S::zero();
        let mut tenant = S::zero();
        let mut mno = S::zero();
        for key in scenario.slice_pairs(slice) {
            let pair = scenario.pair(key)?;
            let c = assignment.choice(key)?;
            quality = quality + crate::evaluator::layer_quality(pair, key, c)?;
            security = security + crate::evaluator::layer_security(pair, key, c)?;
            tenant = tenant + c.control.clone();
            mno = mno + c.mno_control();
        }
        Ok(SweepPlan {
            cost,
            quality,
            security,
            tenant_control_sum: tenant,
            mno_control_sum: mno,
            assignment,
        })
    }
}

fn targets<S: Scalar>(scenario: &Scenario<S>, spec: &SweepSpec<S>) -> Result<Vec<PairKey>> {
    scenario
        .slice(spec.slice)
        .map_err(|_| Error::InvalidSweep(format!("slice {} is not in the scenario", spec.slice)))?;
    match spec.layer {
        Some(p) => {
            let key = PairKey::new(spec.slice, p);
            scenario
                .pair(key)
                .map_err(|_| Error::InvalidSweep(format!("layer {p} is not in the scenario")))?;
            Ok(vec![key])
        }
        None => Ok(scenario.slice_pairs(spec.slice)),
    }
}

fn sorted_dedup<S: Scalar>(mut values: Vec<S>) -> Vec<S> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values.dedup_by(|a, b| !lt_strict(b, a));
    values
}

/// Forced values after validation, ascending.
fn forced_values<S: Scalar>(scenario: &Scenario<S>, spec: &SweepSpec<S>, keys: &[PairKey]) -> Result<Vec<S>> {
    let pairs = keys.iter().map(|k| scenario.pair(*k)).collect::<Result<Vec<_>>>()?;
    let values = match spec.dimension {
        SweepDimension::IsolationFloor => {
            let candidates: Vec<S> = if spec.values.is_empty() {
                pairs
                    .iter()
                    .flat_map(|p| p.domain.level_ids())
                    .map(|id| S::from_u32(id).expect("level id fits"))
                    .collect()
            } else {
                spec.values.clone()
            };
            for v in &candidates {
                let defined = pairs
                    .iter()
                    .all(|p| p.domain.level_ids().any(|id| S::from_u32(id).is_some_and(|x| x == *v)));
                if !defined {
                    return Err(Error::InvalidSweep(format!(
                        "isolation floor {v} is not a level of every target pair"
                    )));
                }
            }
            candidates
        }
        SweepDimension::TenantControlFloor | SweepDimension::MnoControlFloor => {
            let candidates: Vec<S> = if spec.values.is_empty() {
                pairs
                    .iter()
                    .flat_map(|p| p.domain.control_grid.iter().cloned())
                    .map(|t| match spec.dimension {
                        SweepDimension::MnoControlFloor => S::one() - t,
                        _ => t,
                    })
                    .collect()
            } else {
                spec.values.clone()
            };
            for v in &candidates {
                if !(ge_tol(v, &S::zero()) && ge_tol(&S::one(), v)) {
                    return Err(Error::InvalidSweep(format!("control floor {v} is outside [0, 1]")));
                }
            }
            candidates
        }
    };
    Ok(sorted_dedup(values))
}

fn restriction_for<S: Scalar>(
    scenario: &Scenario<S>,
    dimension: SweepDimension,
    keys: &[PairKey],
    value: &S,
) -> Result<Restrictions<S>> {
    let mut r = Restrictions::none();
    for key in keys {
        let pair = scenario.pair(*key)?;
        let entry = r.entry(*key);
        match dimension {
            SweepDimension::IsolationFloor => {
                let top = pair.domain.levels.last().expect("validated pair has levels").id;
                let floor = value.to_u32().expect("validated level id");
                entry.levels = Some((floor, top));
            }
            SweepDimension::TenantControlFloor => entry.controls = Some((value.clone(), S::one())),
            // m >= f  <=>  t <= 1 - f
            SweepDimension::MnoControlFloor => entry.controls = Some((S::zero(), S::one() - value.clone())),
        }
    }
    Ok(r)
}

/// Re-solves the target slice for every forced value. Rows are ascending in
/// the forced value regardless of solve order.
pub fn run_sweep<S: Scalar>(scenario: &Scenario<S>, spec: &SweepSpec<S>) -> Result<Vec<SweepRow<S>>> {
    ensure_valid(scenario)?;
    let keys = targets(scenario, spec)?;
    let values = forced_values(scenario, spec, &keys)?;
    values
        .into_par_iter()
        .map(|value| {
            let r = restriction_for(scenario, spec.dimension, &keys, &value)?;
            let res = solve_slice_exhaustive_within(scenario, spec.slice, &r)?;
            let plan = match (res.status, res.assignment, res.objective) {
                (SolveStatus::Optimal, Some(a), Some(cost)) => {
                    Some(SweepPlan::from_assignment(scenario, spec.slice, a, cost)?)
                }
                _ => None,
            };
            Ok(SweepRow {
                forced_value: value,
                plan,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    forced_value: f64,
    optimal_cost: Option<f64>,
    q: Option<f64>,
    s: Option<f64>,
    tenant_control_sum: Option<f64>,
    mno_control_sum: Option<f64>,
    feasible: bool,
}

pub fn write_sweep_csv<S: Scalar, W: Write>(rows: &[SweepRow<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let f = |v: &S| Some(tidy(v.to_f64_lossy()));
    for row in rows {
        let p = row.plan.as_ref();
        w.serialize(CsvRow {
            forced_value: tidy(row.forced_value.to_f64_lossy()),
            optimal_cost: p.and_then(|p| f(&p.cost)),
            q: p.and_then(|p| f(&p.quality)),
            s: p.and_then(|p| f(&p.security)),
            tenant_control_sum: p.and_then(|p| f(&p.tenant_control_sum)),
            mno_control_sum: p.and_then(|p| f(&p.mno_control_sum)),
            feasible: p.is_some(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One Pareto-optimal `(security, cost)` point with the canonically first
/// plan attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint<S> {
    pub slice: u32,
    pub plan: SweepPlan<S>,
}

/// Pareto set of feasible plans of `slice` under (minimize cost, maximize
/// security), ordered by ascending cost.
pub fn security_cost_frontier<S: Scalar>(scenario: &Scenario<S>, slice: u32) -> Result<Vec<FrontierPoint<S>>> {
    ensure_valid(scenario)?;
    let spec = scenario.slice(slice)?;
    let Some(space) = SliceSpace::resolve(scenario, slice, &Restrictions::none())? else {
        return Ok(Vec::new());
    };
    let layers = scored_choices(scenario, &space)?;
    let mut odometer = vec![0usize; layers.len()];
    // (cost, security, picks), feasible only, in canonical order
    let mut feasible: Vec<(S, S, Vec<usize>)> = Vec::new();
    loop {
        let (mut cost, mut q, mut s) = (S::zero(), S::zero(), S::zero());
        for (layer, &k) in layers.iter().zip(&odometer) {
            cost = cost + layer[k].cost.clone();
            q = q + layer[k].quality.clone();
            s = s + layer[k].security.clone();
        }
        if ge_tol(&q, &spec.q_min) && ge_tol(&s, &spec.s_min) {
            feasible.push((cost, s, odometer.clone()));
        }
        if !advance(&mut odometer, &layers) {
            break;
        }
    }
    // Stable sort keeps canonical order among equal (cost, security).
    feasible.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite")
            .then_with(|| b.1.partial_cmp(&a.1).expect("finite"))
    });
    let mut out = Vec::new();
    let mut best_security: Option<S> = None;
    let mut k = 0;
    while k < feasible.len() {
        // group plans whose cost ties within tolerance; the group leader has
        // the highest security and the canonically first plan among those
        let cost = &feasible[k].0;
        let mut end = k + 1;
        let mut leader = k;
        while end < feasible.len() && !lt_strict(cost, &feasible[end].0) {
            if lt_strict(&feasible[leader].1, &feasible[end].1) {
                leader = end;
            }
            end += 1;
        }
        let (cost, security, picks) = &feasible[leader];
        if best_security.as_ref().is_none_or(|b| lt_strict(b, security)) {
            let mut a = Assignment::new();
            for ((key, layer), &i) in space.keys.iter().zip(&layers).zip(picks) {
                a.set(*key, layer[i].choice.clone());
            }
            out.push(FrontierPoint {
                slice,
                plan: SweepPlan::from_assignment(scenario, slice, a, cost.clone())?,
            });
            best_security = Some(security.clone());
        }
        k = end;
    }
    Ok(out)
}

#[derive(Serialize)]
struct FrontierCsvRow {
    slice: u32,
    cost: f64,
    s: f64,
    q: f64,
    tenant_control_sum: f64,
    mno_control_sum: f64,
    /// `level:control:v|...` per layer in stack order.
    plan: String,
}

pub fn write_frontier_csv<S: Scalar, W: Write>(points: &[FrontierPoint<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let f = |v: &S| tidy(v.to_f64_lossy());
    for p in points {
        let plan = p
            .plan
            .assignment
            .iter()
            .map(|(_, c)| {
                format!(
                    "{}:{}:{}",
                    c.level,
                    f(&c.control),
                    if c.virtualized { "v" } else { "p" }
                )
            })
            .collect::<Vec<_>>()
            .join("|");
        w.serialize(FrontierCsvRow {
            slice: p.slice,
            cost: f(&p.plan.cost),
            s: f(&p.plan.security),
            q: f(&p.plan.quality),
            tenant_control_sum: f(&p.plan.tenant_control_sum),
            mno_control_sum: f(&p.plan.mno_control_sum),
            plan,
        })?;
    }
    w.flush()?;
    Ok(())
}
