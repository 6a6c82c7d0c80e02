//! Small reference scenarios used in tests, docs and the CLI examples.
//!
//! `TINY` is one slice over two layers sharing the same tables:
//! levels {1: logical, 2: air-gap}, t_max = {0.4, 0.8}, control grid
//! {0, 0.4, 0.8}, virtual cost {1, 3}, physical cost {2, 5}, operations
//! cost {3, 2, 1}, phi {1, 2}, alpha 1, sigma {0.5, 1.0}, q_min 3, s_min 2.

use std::collections::BTreeMap;

use crate::model::{
    CostTables, IsolationDomain, IsolationLevel, LayerSpec, PairKey, PairModel, QualityModel, Scenario, SecurityModel,
    SliceSpec, SliceType,
};
use crate::scalar::Scalar;

fn num<S: Scalar>(text: &str) -> S {
    S::parse_decimal(text).expect("fixture literal")
}

fn nums<S: Scalar>(texts: &[&str]) -> Vec<S> {
    texts.iter().map(|t| num(t)).collect()
}

/// The shared per-layer tables of `TINY`.
pub fn tiny_pair<S: Scalar>() -> PairModel<S> {
    PairModel {
        domain: IsolationDomain {
            levels: vec![IsolationLevel::new(1, "logical"), IsolationLevel::new(2, "air-gap")],
            t_max: nums(&["0.4", "0.8"]),
            control_grid: nums(&["0", "0.4", "0.8"]),
        },
        costs: CostTables {
            physical: nums(&["2", "5"]),
            virtualized: nums(&["1", "3"]),
            operations: nums(&["3", "2", "1"]),
        },
        quality: QualityModel {
            phi: nums(&["1", "2"]),
            physical_bonus: S::zero(),
        },
        security: SecurityModel {
            alpha: S::one(),
            sigma: nums(&["0.5", "1.0"]),
            physical_bonus: S::zero(),
        },
    }
}

fn tiny_slice<S: Scalar>(id: u32, q_min: &str) -> SliceSpec<S> {
    SliceSpec {
        id,
        name: format!("slice-{id}"),
        slice_type: SliceType::Custom,
        q_min: num(q_min),
        s_min: num("2.0"),
    }
}

fn tiny_layers() -> Vec<LayerSpec> {
    vec![
        LayerSpec {
            id: 1,
            name: "phy".into(),
            stack_position: 1,
        },
        LayerSpec {
            id: 2,
            name: "mac".into(),
            stack_position: 2,
        },
    ]
}

fn scenario_of<S: Scalar>(slices: Vec<SliceSpec<S>>, pair: impl Fn(u32) -> PairModel<S>) -> Scenario<S> {
    let layers = tiny_layers();
    let mut pairs = BTreeMap::new();
    for s in &slices {
        for l in &layers {
            pairs.insert(PairKey::new(s.id, l.id), pair(s.id));
        }
    }
    Scenario { slices, layers, pairs }
}

pub fn tiny_in<S: Scalar>() -> Scenario<S> {
    scenario_of(vec![tiny_slice(1, "3")], |_| tiny_pair())
}

/// `TINY` with q_min = 5; infeasible since the best attainable quality is 4.
pub fn tiny_q5_in<S: Scalar>() -> Scenario<S> {
    scenario_of(vec![tiny_slice(1, "5")], |_| tiny_pair())
}

/// `TINY` with phi = {1, 3} and q_min = 5, which forces air-gap on both layers.
pub fn urllc_fix_in<S: Scalar>() -> Scenario<S> {
    let mut s = scenario_of(vec![tiny_slice(1, "5")], |_| {
        let mut p = tiny_pair();
        p.quality.phi = nums(&["1", "3"]);
        p
    });
    s.slices[0].slice_type = SliceType::Urllc;
    s
}

/// Two independent copies of the `TINY` slice.
pub fn two_tiny_in<S: Scalar>() -> Scenario<S> {
    scenario_of(vec![tiny_slice(1, "3"), tiny_slice(2, "3")], |_| tiny_pair())
}

/// A `TINY` slice (id 1) next to a `TINY-Q5` slice (id 2).
pub fn tiny_and_q5_in<S: Scalar>() -> Scenario<S> {
    scenario_of(vec![tiny_slice(1, "3"), tiny_slice(2, "5")], |_| tiny_pair())
}

pub fn tiny() -> Scenario<f64> {
    tiny_in()
}

pub fn tiny_q5() -> Scenario<f64> {
    tiny_q5_in()
}

pub fn urllc_fix() -> Scenario<f64> {
    urllc_fix_in()
}

pub fn two_tiny() -> Scenario<f64> {
    two_tiny_in()
}

pub fn tiny_and_q5() -> Scenario<f64> {
    tiny_and_q5_in()
}
