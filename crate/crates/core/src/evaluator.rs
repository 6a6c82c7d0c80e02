//! Cost, quality and security of an assignment.
//!
//! Per layer the infrastructure cost is the virtual cost when the layer is
//! virtualized and the physical cost otherwise; the operations cost is read
//! from the control grid. Quality and security are additive over layers:
//!
//! ```text
//! q_n = sum_p phi(i) + dq * (1 - v)
//! s_n = sum_p alpha * t + sigma(i) + ds * (1 - v)
//! ```

use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{Assignment, LayerChoice, PairKey, PairModel, Scenario};
use crate::scalar::{ge_tol, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SliceEvaluation<S> {
    pub cost: S,
    pub quality: S,
    pub security: S,
    pub qos_ok: bool,
    pub security_ok: bool,
}

impl<S> SliceEvaluation<S> {
    pub fn feasible(&self) -> bool {
        self.qos_ok && self.security_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<S> {
    pub per_slice: BTreeMap<u32, SliceEvaluation<S>>,
    pub total_cost: S,
}

impl<S> EvaluationReport<S> {
    pub fn feasible(&self) -> bool {
        self.per_slice.values().all(SliceEvaluation::feasible)
    }
}

pub fn infrastructural_cost<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    layer: u32,
    level: u32,
    virtualized: bool,
) -> Result<S> {
    let key = PairKey::new(slice, layer);
    let pair = scenario.pair(key)?;
    let idx = pair.level_index(key, level)?;
    Ok(infra_at(pair, idx, virtualized))
}

pub fn operations_cost<S: Scalar>(scenario: &Scenario<S>, slice: u32, layer: u32, control: &S) -> Result<S> {
    let key = PairKey::new(slice, layer);
    let pair = scenario.pair(key)?;
    let idx = pair.control_index(key, control)?;
    Ok(pair.costs.operations[idx].clone())
}

fn infra_at<S: Scalar>(pair: &PairModel<S>, level_idx: usize, virtualized: bool) -> S {
    if virtualized {
        pair.costs.virtualized[level_idx].clone()
    } else {
        pair.costs.physical[level_idx].clone()
    }
}

fn physical_share<S: Scalar>(virtualized: bool) -> S {
    if virtualized {
        S::zero()
    } else {
        S::one()
    }
}

/// Cost of one layer decision.
pub(crate) fn layer_cost<S: Scalar>(pair: &PairModel<S>, key: PairKey, choice: &LayerChoice<S>) -> Result<S> {
    let level_idx = pair.level_index(key, choice.level)?;
    let control_idx = pair.control_index(key, &choice.control)?;
    Ok(infra_at(pair, level_idx, choice.virtualized) + pair.costs.operations[control_idx].clone())
}

pub(crate) fn layer_quality<S: Scalar>(pair: &PairModel<S>, key: PairKey, choice: &LayerChoice<S>) -> Result<S> {
    let level_idx = pair.level_index(key, choice.level)?;
    Ok(pair.quality.phi[level_idx].clone()
        + pair.quality.physical_bonus.clone() * physical_share::<S>(choice.virtualized))
}

pub(crate) fn layer_security<S: Scalar>(pair: &PairModel<S>, key: PairKey, choice: &LayerChoice<S>) -> Result<S> {
    let level_idx = pair.level_index(key, choice.level)?;
    Ok(pair.security.alpha.clone() * choice.control.clone()
        + pair.security.sigma[level_idx].clone()
        + pair.security.physical_bonus.clone() * physical_share::<S>(choice.virtualized))
}

fn sum_over_layers<S, F>(scenario: &Scenario<S>, slice: u32, assignment: &Assignment<S>, term: F) -> Result<S>
where
    S: Scalar,
    F: Fn(&PairModel<S>, PairKey, &LayerChoice<S>) -> Result<S>,
{
    scenario.slice(slice)?;
    let mut total = S::zero();
    for key in scenario.slice_pairs(slice) {
        let pair = scenario.pair(key)?;
        total = total + term(pair, key, assignment.choice(key)?)?;
    }
    Ok(total)
}

pub fn slice_cost<S: Scalar>(scenario: &Scenario<S>, slice: u32, assignment: &Assignment<S>) -> Result<S> {
    sum_over_layers(scenario, slice, assignment, layer_cost)
}

pub fn total_cost<S: Scalar>(scenario: &Scenario<S>, assignment: &Assignment<S>) -> Result<S> {
    let mut total = S::zero();
    for n in scenario.slice_ids() {
        total = total + slice_cost(scenario, n, assignment)?;
    }
    Ok(total)
}

pub fn quality<S: Scalar>(scenario: &Scenario<S>, slice: u32, assignment: &Assignment<S>) -> Result<S> {
    sum_over_layers(scenario, slice, assignment, layer_quality)
}

pub fn security<S: Scalar>(scenario: &Scenario<S>, slice: u32, assignment: &Assignment<S>) -> Result<S> {
    sum_over_layers(scenario, slice, assignment, layer_security)
}

/// Evaluates one slice; the slice's decisions must be structurally valid.
pub fn evaluate_slice<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    assignment: &Assignment<S>,
) -> Result<SliceEvaluation<S>> {
    scenario.check_slice_assignment(slice, assignment)?;
    let spec = scenario.slice(slice)?;
    let cost = slice_cost(scenario, slice, assignment)?;
    let q = quality(scenario, slice, assignment)?;
    let s = security(scenario, slice, assignment)?;
    for key in scenario.slice_pairs(slice) {
        let c = assignment.choice(key)?;
        debug_assert!((c.control.clone() + c.mno_control() - S::one()).is_zero());
    }
    Ok(SliceEvaluation {
        qos_ok: ge_tol(&q, &spec.q_min),
        security_ok: ge_tol(&s, &spec.s_min),
        cost,
        quality: q,
        security: s,
    })
}

pub fn check_feasibility<S: Scalar>(scenario: &Scenario<S>, assignment: &Assignment<S>) -> Result<EvaluationReport<S>> {
    scenario.check_assignment(assignment)?;
    let mut per_slice = BTreeMap::new();
    let mut total = S::zero();
    for n in scenario.slice_ids() {
        let eval = evaluate_slice(scenario, n, assignment)?;
        total = total + eval.cost.clone();
        per_slice.insert(n, eval);
    }
    Ok(EvaluationReport {
        per_slice,
        total_cost: total,
    })
}
