//! Exact solver by enumeration.
//!
//! Slices share no decisions or constraints, so each slice is solved on its
//! own by walking the Cartesian product of its per-layer choices in
//! canonical lexicographic order (layers in stack order). A candidate only
//! replaces the incumbent when it is cheaper by more than the tolerance, so
//! among equal-cost optima the lexicographically first one is kept.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluator::{layer_cost, layer_quality, layer_security};
use crate::model::{validate_scenario, Assignment, LayerChoice, PairKey, Scenario};
use crate::scalar::{ge_tol, lt_strict, max_of, Scalar};
use crate::solution::{merge_slice_results, SliceDiagnostic, SolveResult, SolveStats, SolveStatus};
use crate::space::{check_restriction_keys, PairBox, Restrictions, SliceSpace};

/// All `(level, control, virtualized)` triples of a pair in canonical order.
pub fn enumerate_layer_choices<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    layer: u32,
) -> Result<Vec<LayerChoice<S>>> {
    let pair = scenario.pair(PairKey::new(slice, layer))?;
    Ok(PairBox::full(pair).choices(pair))
}

/// A layer choice with its precomputed contributions.
pub(crate) struct ScoredChoice<S> {
    pub choice: LayerChoice<S>,
    pub cost: S,
    pub quality: S,
    pub security: S,
}

pub(crate) fn scored_choices<S: Scalar>(
    scenario: &Scenario<S>,
    space: &SliceSpace,
) -> Result<Vec<Vec<ScoredChoice<S>>>> {
    space
        .keys
        .iter()
        .zip(&space.boxes)
        .map(|(key, b)| {
            let pair = scenario.pair(*key)?;
            b.choices(pair)
                .into_iter()
                .map(|choice| {
                    Ok(ScoredChoice {
                        cost: layer_cost(pair, *key, &choice)?,
                        quality: layer_quality(pair, *key, &choice)?,
                        security: layer_security(pair, *key, &choice)?,
                        choice,
                    })
                })
                .collect()
        })
        .collect()
}

/// Best attainable quality and security over a slice space (each maximized
/// separately).
pub(crate) fn slice_diagnostic<S: Scalar>(scenario: &Scenario<S>, space: &SliceSpace) -> Result<SliceDiagnostic<S>> {
    let spec = scenario.slice(space.slice)?;
    let mut max_quality = S::zero();
    let mut max_security = S::zero();
    for layer in scored_choices(scenario, space)? {
        let mut q = None::<S>;
        let mut s = None::<S>;
        for c in layer {
            q = Some(q.map_or(c.quality.clone(), |q| max_of(q, c.quality.clone())));
            s = Some(s.map_or(c.security.clone(), |s| max_of(s, c.security.clone())));
        }
        max_quality = max_quality + q.unwrap_or_else(S::zero);
        max_security = max_security + s.unwrap_or_else(S::zero);
    }
    Ok(SliceDiagnostic {
        slice: space.slice,
        q_min: spec.q_min.clone(),
        s_min: spec.s_min.clone(),
        max_quality,
        max_security,
    })
}

/// Diagnostic for a slice whose restricted space is empty.
pub(crate) fn empty_space_diagnostic<S: Scalar>(scenario: &Scenario<S>, slice: u32) -> Result<SliceDiagnostic<S>> {
    let spec = scenario.slice(slice)?;
    Ok(SliceDiagnostic {
        slice,
        q_min: spec.q_min.clone(),
        s_min: spec.s_min.clone(),
        max_quality: S::zero(),
        max_security: S::zero(),
    })
}

pub(crate) fn infeasible_result<S: Scalar>(diagnostic: SliceDiagnostic<S>, stats: SolveStats) -> SolveResult<S> {
    SolveResult {
        status: SolveStatus::Infeasible,
        assignment: None,
        objective: None,
        stats,
        infeasible: vec![diagnostic],
        limit: None,
    }
}

pub(crate) fn ensure_valid<S: Scalar>(scenario: &Scenario<S>) -> Result<()> {
    let report = validate_scenario(scenario);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(report))
    }
}

/// Steps the odometer with the last layer varying fastest, which visits
/// combinations in lexicographic order over layers. False when exhausted.
pub(crate) fn advance<T>(odometer: &mut [usize], layers: &[Vec<T>]) -> bool {
    for pos in (0..odometer.len()).rev() {
        odometer[pos] += 1;
        if odometer[pos] < layers[pos].len() {
            return true;
        }
        odometer[pos] = 0;
    }
    false
}

fn solve_space<S: Scalar>(scenario: &Scenario<S>, space: &SliceSpace) -> Result<SolveResult<S>> {
    let start = Instant::now();
    let spec = scenario.slice(space.slice)?;
    let layers = scored_choices(scenario, space)?;
    let mut odometer = vec![0usize; layers.len()];
    let mut best: Option<(S, Vec<usize>)> = None;
    let mut candidates = 0u64;

    loop {
        candidates += 1;
        let mut cost = S::zero();
        let mut q = S::zero();
        let mut s = S::zero();
        for (layer, &k) in layers.iter().zip(&odometer) {
            cost = cost + layer[k].cost.clone();
            q = q + layer[k].quality.clone();
            s = s + layer[k].security.clone();
        }
        if ge_tol(&q, &spec.q_min) && ge_tol(&s, &spec.s_min) {
            let better = best.as_ref().is_none_or(|(b, _)| lt_strict(&cost, b));
            if better {
                best = Some((cost, odometer.clone()));
            }
        }
        if !advance(&mut odometer, &layers) {
            break;
        }
    }

    let stats = SolveStats {
        nodes: candidates,
        wall_time: start.elapsed(),
    };
    match best {
        Some((objective, picks)) => {
            let mut assignment = Assignment::new();
            for ((key, layer), k) in space.keys.iter().zip(&layers).zip(picks) {
                assignment.set(*key, layer[k].choice.clone());
            }
            Ok(SolveResult {
                status: SolveStatus::Optimal,
                assignment: Some(assignment),
                objective: Some(objective),
                stats,
                infeasible: Vec::new(),
                limit: None,
            })
        }
        None => Ok(infeasible_result(slice_diagnostic(scenario, space)?, stats)),
    }
}

/// Optimal plan for one slice within `restrictions`.
pub fn solve_slice_exhaustive_within<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    restrictions: &Restrictions<S>,
) -> Result<SolveResult<S>> {
    ensure_valid(scenario)?;
    check_restriction_keys(scenario, restrictions)?;
    solve_slice_unchecked(scenario, slice, restrictions)
}

fn solve_slice_unchecked<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    restrictions: &Restrictions<S>,
) -> Result<SolveResult<S>> {
    match SliceSpace::resolve(scenario, slice, restrictions)? {
        Some(space) => solve_space(scenario, &space),
        None => Ok(infeasible_result(
            empty_space_diagnostic(scenario, slice)?,
            SolveStats::default(),
        )),
    }
}

pub fn solve_slice_exhaustive<S: Scalar>(scenario: &Scenario<S>, slice: u32) -> Result<SolveResult<S>> {
    solve_slice_exhaustive_within(scenario, slice, &Restrictions::none())
}

/// Optimal plan for every slice within `restrictions`; slices are solved in
/// parallel and merged by slice id.
pub fn solve_exhaustive_within<S: Scalar>(
    scenario: &Scenario<S>,
    restrictions: &Restrictions<S>,
) -> Result<SolveResult<S>> {
    let start = Instant::now();
    ensure_valid(scenario)?;
    check_restriction_keys(scenario, restrictions)?;
    let results = scenario
        .slice_ids()
        .into_par_iter()
        .map(|n| solve_slice_unchecked(scenario, n, restrictions))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_slice_results(results, start.elapsed()))
}

pub fn solve_exhaustive<S: Scalar>(scenario: &Scenario<S>) -> Result<SolveResult<S>> {
    solve_exhaustive_within(scenario, &Restrictions::none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::check_feasibility;
    use crate::fixtures;
    use crate::scalar::Rational;

    fn choices_of(result: &SolveResult<f64>, slice: u32) -> Vec<(u32, f64, bool)> {
        let a = result.assignment.as_ref().unwrap();
        [1, 2]
            .iter()
            .map(|p| {
                let c = a.get(PairKey::new(slice, *p)).unwrap();
                (c.level, c.control, c.virtualized)
            })
            .collect()
    }

    #[test]
    fn layer_choice_counts() {
        let tiny = fixtures::tiny();
        let all = enumerate_layer_choices(&tiny, 1, 1).unwrap();
        assert_eq!(all.len(), 10);

        let mut single = fixtures::tiny();
        let pair = single.pair_mut(PairKey::new(1, 1)).unwrap();
        pair.domain.levels.truncate(1);
        pair.domain.t_max = vec![0.05];
        assert_eq!(enumerate_layer_choices(&single, 1, 1).unwrap().len(), 2);
    }

    #[test]
    fn tiny_optimum() {
        let r = solve_slice_exhaustive(&fixtures::tiny(), 1).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(7.0));
        assert_eq!(choices_of(&r, 1), vec![(1, 0.4, true), (2, 0.8, true)]);
        assert_eq!(r.stats.nodes, 100);
    }

    #[test]
    fn tiny_q5_infeasible_with_max_quality() {
        let r = solve_slice_exhaustive(&fixtures::tiny_q5(), 1).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.assignment.is_none());
        let d = &r.infeasible[0];
        assert_eq!(d.max_quality, 4.0);
        assert!(!d.qos_attainable());
        assert!(d.security_attainable());
    }

    #[test]
    fn urllc_fix_forces_air_gap() {
        let r = solve_slice_exhaustive(&fixtures::urllc_fix(), 1).unwrap();
        let levels: Vec<u32> = choices_of(&r, 1).iter().map(|c| c.0).collect();
        assert_eq!(levels, vec![2, 2]);
    }

    #[test]
    fn two_slices_double_the_objective() {
        let r = solve_exhaustive(&fixtures::two_tiny()).unwrap();
        assert_eq!(r.objective, Some(14.0));
        assert_eq!(choices_of(&r, 1), choices_of(&r, 2));
        let report = check_feasibility(&fixtures::two_tiny(), r.assignment.as_ref().unwrap()).unwrap();
        assert!(report.feasible());
    }

    #[test]
    fn one_infeasible_slice_makes_scenario_infeasible() {
        let r = solve_exhaustive(&fixtures::tiny_and_q5()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.infeasible.len(), 1);
        assert_eq!(r.infeasible[0].slice, 2);
    }

    #[test]
    fn exact_arithmetic_agrees() {
        let r = solve_exhaustive(&fixtures::tiny_in::<Rational>()).unwrap();
        assert_eq!(r.objective, Some(Rational::from_integer(7.into())));
    }

    #[test]
    fn invalid_scenario_is_rejected() {
        let mut s = fixtures::tiny();
        s.pair_mut(PairKey::new(1, 1)).unwrap().costs.physical[1] = 2.5;
        assert!(matches!(solve_exhaustive(&s), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn restriction_floor_changes_optimum() {
        let tiny = fixtures::tiny();
        let r = Restrictions::none()
            .with_levels(PairKey::new(1, 1), 2, 2)
            .with_levels(PairKey::new(1, 2), 2, 2);
        let res = solve_exhaustive_within(&tiny, &r).unwrap();
        assert_eq!(res.objective, Some(8.0));
    }
}
