//! Branch-and-bound over the discrete decision grids.
//!
//! Each slice is searched independently (slices run in parallel). Nodes are
//! boxes of per-pair index intervals; their bound is the relaxation optimum,
//! raised to the parent's bound when the LP comes out lower. The queue is
//! best-first by bound, deeper nodes first on ties, then creation order.
//!
//! A node is dropped when its bound exceeds the incumbent by more than the
//! tolerance, or when its bound ties the incumbent and no decision inside
//! it can precede the incumbent in the canonical order. The second rule is
//! what makes the returned plan match [`crate::solve_exhaustive`] exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::Result;
use crate::evaluator::{layer_cost, layer_quality, layer_security};
use crate::exhaustive::{empty_space_diagnostic, ensure_valid, infeasible_result, slice_diagnostic};
use crate::model::{Assignment, LayerChoice, PairKey, Scenario};
use crate::relaxation::{bound_for_spaces, LowerBound};
use crate::scalar::{ge_tol, lt_strict, Scalar};
use crate::solution::{merge_slice_results, LimitInfo, SolveResult, SolveStats, SolveStatus};
use crate::space::{PairBox, Restrictions, SliceSpace};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnbOptions {
    /// Maximum nodes processed per slice.
    pub node_limit: Option<u64>,
    /// Wall-clock budget per slice.
    pub time_limit: Option<Duration>,
}

/// Which decision of a pair a branch splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKind {
    Isolation,
    Control,
    Virtualization,
}

/// Branching decision for a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// Split pair `pair` (index into the slice's stack order) on `kind`:
    /// the children keep grid indices `..=below` and `above..`.
    Split {
        pair: usize,
        kind: VarKind,
        below: usize,
        above: usize,
    },
    /// Every relaxed value sits on an allowed grid point.
    Integral,
}

/// Relaxed `(i_hat, t_hat, v_hat)` of one pair.
pub type Relaxed<S> = (S, S, S);

/// A search node of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode<S> {
    pub boxes: Vec<PairBox>,
    pub bound: S,
    pub depth: u32,
    /// One entry per pair, in stack order.
    pub relaxed: Vec<Relaxed<S>>,
    seq: u64,
}

impl<S: Scalar> Eq for BnbNode<S> {}

impl<S: Scalar> PartialOrd for BnbNode<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for BnbNode<S> {
    // BinaryHeap is a max-heap: "greater" pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn nearest_split<S: Scalar>(x: &S, points: &[S], offset: usize) -> Option<(S, usize, usize)> {
    let mut best: Option<S> = None;
    for p in points {
        let d = (x.clone() - p.clone()).abs();
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    let dist = best?;
    if dist <= S::tolerance() {
        return None;
    }
    let below = points.iter().rposition(|p| p < x)?;
    let above = below + 1;
    if above >= points.len() {
        return None;
    }
    Some((dist, offset + below, offset + above))
}

/// Picks the relaxed value farthest from its nearest allowed grid point.
/// Ties go to the earliest `(pair, kind)` in stack order with `i < t < v`.
pub fn branch_variable<S: Scalar>(scenario: &Scenario<S>, keys: &[PairKey], node: &BnbNode<S>) -> Result<Branch> {
    let mut best: Option<(S, Branch)> = None;
    for (idx, (key, b)) in keys.iter().zip(&node.boxes).enumerate() {
        let pair = scenario.pair(*key)?;
        let (i_hat, t_hat, v_hat) = &node.relaxed[idx];
        let level_points: Vec<S> = (b.level.0..=b.level.1)
            .map(|k| S::from_u32(pair.domain.levels[k].id).expect("level id fits"))
            .collect();
        let control_points = &pair.domain.control_grid[b.control.0..=b.control.1];
        let virt_points: Vec<S> = (b.virt.0..=b.virt.1).map(|v| S::from_u8(v).expect("0 or 1")).collect();
        let candidates = [
            (VarKind::Isolation, nearest_split(i_hat, &level_points, b.level.0)),
            (VarKind::Control, nearest_split(t_hat, control_points, b.control.0)),
            (
                VarKind::Virtualization,
                nearest_split(v_hat, &virt_points, b.virt.0 as usize),
            ),
        ];
        for (kind, split) in candidates {
            let Some((dist, below, above)) = split else { continue };
            let farther = best.as_ref().is_none_or(|(d, _)| lt_strict(d, &dist));
            if farther {
                best = Some((
                    dist,
                    Branch::Split {
                        pair: idx,
                        kind,
                        below,
                        above,
                    },
                ));
            }
        }
    }
    Ok(best.map_or(Branch::Integral, |(_, b)| b))
}

fn nearest_index<S: Scalar>(x: &S, points: &[S]) -> usize {
    let mut best = 0;
    for (k, p) in points.iter().enumerate() {
        if (x.clone() - p.clone()).abs() < (x.clone() - points[best].clone()).abs() {
            best = k;
        }
    }
    best
}

/// Rounds the relaxed point to the nearest grid decision of each pair.
fn rounded<S: Scalar>(scenario: &Scenario<S>, keys: &[PairKey], node: &BnbNode<S>) -> Result<Vec<LayerChoice<S>>> {
    keys.iter()
        .zip(&node.boxes)
        .zip(&node.relaxed)
        .map(|((key, b), (i_hat, t_hat, v_hat))| {
            let pair = scenario.pair(*key)?;
            let ids: Vec<S> = (b.level.0..=b.level.1)
                .map(|k| S::from_u32(pair.domain.levels[k].id).expect("level id fits"))
                .collect();
            let li = b.level.0 + nearest_index(i_hat, &ids);
            let ci = b.control.0 + nearest_index(t_hat, &pair.domain.control_grid[b.control.0..=b.control.1]);
            let half = S::one() / (S::one() + S::one());
            let v = if b.virt.0 == b.virt.1 {
                b.virt.0 == 1
            } else {
                *v_hat >= half
            };
            Ok(LayerChoice::new(
                pair.domain.levels[li].id,
                pair.domain.control_grid[ci].clone(),
                v,
            ))
        })
        .collect()
}

fn lex_cmp<S: Scalar>(a: &[LayerChoice<S>], b: &[LayerChoice<S>]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.canonical_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Exact cost of a full slice decision if it is admissible and feasible.
fn evaluate<S: Scalar>(scenario: &Scenario<S>, space: &SliceSpace, choices: &[LayerChoice<S>]) -> Result<Option<S>> {
    let spec = scenario.slice(space.slice)?;
    let mut cost = S::zero();
    let mut q = S::zero();
    let mut s = S::zero();
    for ((key, b), choice) in space.keys.iter().zip(&space.boxes).zip(choices) {
        let pair = scenario.pair(*key)?;
        if !b.contains(pair, choice) {
            return Ok(None);
        }
        cost = cost + layer_cost(pair, *key, choice)?;
        q = q + layer_quality(pair, *key, choice)?;
        s = s + layer_security(pair, *key, choice)?;
    }
    Ok((ge_tol(&q, &spec.q_min) && ge_tol(&s, &spec.s_min)).then_some(cost))
}

/// Node information recorded by [`solve_bnb_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceTrace<S> {
    pub slice: u32,
    /// Nodes discarded by bound (with their bound) or by an infeasible
    /// relaxation (`None`), as restrictions over the slice's pairs.
    pub pruned: Vec<(Restrictions<S>, Option<S>)>,
    /// `(parent bound, raw child LP value)` for every feasible child.
    pub edges: Vec<(S, S)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbTrace<S> {
    pub slices: Vec<SliceTrace<S>>,
}

struct Incumbent<S> {
    cost: S,
    choices: Vec<LayerChoice<S>>,
}

impl<S: Scalar> Incumbent<S> {
    fn improved_by(&self, cost: &S, choices: &[LayerChoice<S>]) -> bool {
        let tol = S::tolerance();
        if *cost < self.cost.clone() - tol.clone() {
            return true;
        }
        *cost <= self.cost.clone() + tol && lex_cmp(choices, &self.choices) == Ordering::Less
    }
}

fn offer<S: Scalar>(incumbent: &mut Option<Incumbent<S>>, cost: S, choices: Vec<LayerChoice<S>>) {
    let take = incumbent.as_ref().is_none_or(|inc| inc.improved_by(&cost, &choices));
    if take {
        *incumbent = Some(Incumbent { cost, choices });
    }
}

fn prunable<S: Scalar>(
    scenario: &Scenario<S>,
    keys: &[PairKey],
    node: &BnbNode<S>,
    inc: &Incumbent<S>,
) -> Result<bool> {
    let tol = S::tolerance();
    if node.bound > inc.cost.clone() + tol.clone() {
        return Ok(true);
    }
    if node.bound < inc.cost.clone() - tol {
        return Ok(false);
    }
    let mins = keys
        .iter()
        .zip(&node.boxes)
        .map(|(key, b)| Ok(b.canonical_min(scenario.pair(*key)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(lex_cmp(&mins, &inc.choices) != Ordering::Less)
}

fn to_restrictions<S: Scalar>(scenario: &Scenario<S>, keys: &[PairKey], boxes: &[PairBox]) -> Result<Restrictions<S>> {
    let space = SliceSpace {
        slice: keys.first().map_or(0, |k| k.slice),
        keys: keys.to_vec(),
        boxes: boxes.to_vec(),
    };
    space.to_restrictions(scenario)
}

/// Children of `boxes` split on `kind` of pair `idx`; empty children are dropped.
fn split_boxes<S: Scalar>(
    scenario: &Scenario<S>,
    keys: &[PairKey],
    boxes: &[PairBox],
    idx: usize,
    kind: VarKind,
    below: usize,
    above: usize,
) -> Result<Vec<Vec<PairBox>>> {
    let pair = scenario.pair(keys[idx])?;
    let b = boxes[idx];
    let halves = match kind {
        VarKind::Isolation => [
            PairBox {
                level: (b.level.0, below),
                ..b
            },
            PairBox {
                level: (above, b.level.1),
                ..b
            },
        ],
        VarKind::Control => [
            PairBox {
                control: (b.control.0, below),
                ..b
            },
            PairBox {
                control: (above, b.control.1),
                ..b
            },
        ],
        VarKind::Virtualization => [
            PairBox {
                virt: (b.virt.0, below as u8),
                ..b
            },
            PairBox {
                virt: (above as u8, b.virt.1),
                ..b
            },
        ],
    };
    Ok(halves
        .into_iter()
        .filter_map(|h| h.tighten(pair))
        .map(|h| {
            let mut child = boxes.to_vec();
            child[idx] = h;
            child
        })
        .collect())
}

/// Midpoint split of the first non-singleton decision.
fn midpoint_split(boxes: &[PairBox]) -> Option<(usize, VarKind, usize, usize)> {
    for (idx, b) in boxes.iter().enumerate() {
        for (kind, (lo, hi)) in [
            (VarKind::Isolation, b.level),
            (VarKind::Control, b.control),
            (VarKind::Virtualization, (b.virt.0 as usize, b.virt.1 as usize)),
        ] {
            if lo < hi {
                let mid = lo + (hi - lo) / 2;
                return Some((idx, kind, mid, mid + 1));
            }
        }
    }
    None
}

fn relaxed_values<S: Scalar>(scenario: &Scenario<S>, space: &SliceSpace) -> Result<Option<(S, Vec<Relaxed<S>>)>> {
    let (bound, solved) = bound_for_spaces(scenario, std::slice::from_ref(space))?;
    match (bound, solved) {
        (LowerBound::Value(v), Some((problem, sol))) => {
            let relaxed = problem
                .pairs
                .iter()
                .map(|p| {
                    (
                        sol.values[p.isolation].clone(),
                        sol.values[p.control].clone(),
                        sol.values[p.virtualization].clone(),
                    )
                })
                .collect();
            Ok(Some((v, relaxed)))
        }
        _ => Ok(None),
    }
}

fn solve_slice<S: Scalar>(
    scenario: &Scenario<S>,
    slice: u32,
    options: &BnbOptions,
    trace: Option<&mut SliceTrace<S>>,
) -> Result<SolveResult<S>> {
    let start = Instant::now();
    let mut trace = trace;
    let Some(root) = SliceSpace::resolve(scenario, slice, &Restrictions::none())? else {
        return Ok(infeasible_result(
            empty_space_diagnostic(scenario, slice)?,
            SolveStats::default(),
        ));
    };
    let keys = root.keys.clone();
    let space_of = |boxes: &[PairBox]| SliceSpace {
        slice,
        keys: keys.clone(),
        boxes: boxes.to_vec(),
    };

    let mut incumbent: Option<Incumbent<S>> = None;
    let probe = keys
        .iter()
        .zip(&root.boxes)
        .map(|(key, b)| {
            let pair = scenario.pair(*key)?;
            let top = b.level.1;
            let ctrl = b.max_control_at(pair, top).unwrap_or(b.control.0);
            Ok(LayerChoice::new(
                pair.domain.levels[top].id,
                pair.domain.control_grid[ctrl].clone(),
                b.allows_virtual(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(cost) = evaluate(scenario, &root, &probe)? {
        offer(&mut incumbent, cost, probe);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0u64;
    match relaxed_values(scenario, &root)? {
        Some((bound, relaxed)) => heap.push(BnbNode {
            boxes: root.boxes.clone(),
            bound,
            depth: 0,
            relaxed,
            seq,
        }),
        None => {
            if let Some(t) = trace.as_deref_mut() {
                t.pruned.push((to_restrictions(scenario, &keys, &root.boxes)?, None));
            }
        }
    }

    let mut limited = false;
    while let Some(node) = heap.pop() {
        if let Some(inc) = &incumbent {
            if prunable(scenario, &keys, &node, inc)? {
                if let Some(t) = trace.as_deref_mut() {
                    t.pruned
                        .push((to_restrictions(scenario, &keys, &node.boxes)?, Some(node.bound.clone())));
                }
                continue;
            }
        }
        let over_nodes = options.node_limit.is_some_and(|l| nodes >= l);
        let over_time = options.time_limit.is_some_and(|l| start.elapsed() >= l);
        if over_nodes || over_time {
            heap.push(node);
            limited = true;
            break;
        }
        nodes += 1;

        if node.boxes.iter().all(PairBox::is_singleton) {
            let choices = node
                .boxes
                .iter()
                .zip(&keys)
                .map(|(b, key)| Ok(b.canonical_min(scenario.pair(*key)?)))
                .collect::<Result<Vec<_>>>()?;
            if let Some(cost) = evaluate(scenario, &space_of(&node.boxes), &choices)? {
                offer(&mut incumbent, cost, choices);
            }
            continue;
        }

        let split = match branch_variable(scenario, &keys, &node)? {
            Branch::Split {
                pair,
                kind,
                below,
                above,
            } => (pair, kind, below, above),
            Branch::Integral => {
                let choices = rounded(scenario, &keys, &node)?;
                if let Some(cost) = evaluate(scenario, &space_of(&node.boxes), &choices)? {
                    offer(&mut incumbent, cost, choices);
                }
                midpoint_split(&node.boxes).expect("non-singleton box has a split")
            }
        };
        let (idx, kind, below, above) = split;
        for child in split_boxes(scenario, &keys, &node.boxes, idx, kind, below, above)? {
            match relaxed_values(scenario, &space_of(&child))? {
                Some((lp, relaxed)) => {
                    if let Some(t) = trace.as_deref_mut() {
                        t.edges.push((node.bound.clone(), lp.clone()));
                    }
                    let bound = if lp < node.bound { node.bound.clone() } else { lp };
                    seq += 1;
                    heap.push(BnbNode {
                        boxes: child,
                        bound,
                        depth: node.depth + 1,
                        relaxed,
                        seq,
                    });
                }
                None => {
                    if let Some(t) = trace.as_deref_mut() {
                        t.pruned.push((to_restrictions(scenario, &keys, &child)?, None));
                    }
                }
            }
        }
    }

    let stats = SolveStats {
        nodes,
        wall_time: start.elapsed(),
    };
    let to_assignment = |inc: &Incumbent<S>| {
        let mut a = Assignment::new();
        for (key, c) in keys.iter().zip(&inc.choices) {
            a.set(*key, c.clone());
        }
        a
    };
    if limited {
        let best_bound = heap
            .iter()
            .map(|n| n.bound.clone())
            .reduce(|a, b| if b < a { b } else { a })
            .expect("limit leaves an open node");
        return Ok(SolveResult {
            status: SolveStatus::Limit,
            assignment: incumbent.as_ref().map(to_assignment),
            objective: incumbent.as_ref().map(|i| i.cost.clone()),
            stats,
            infeasible: Vec::new(),
            limit: Some(LimitInfo {
                gap: incumbent.as_ref().map(|i| i.cost.clone() - best_bound.clone()),
                best_bound,
            }),
        });
    }
    match incumbent {
        Some(inc) => Ok(SolveResult {
            status: SolveStatus::Optimal,
            assignment: Some(to_assignment(&inc)),
            objective: Some(inc.cost),
            stats,
            infeasible: Vec::new(),
            limit: None,
        }),
        None => Ok(infeasible_result(slice_diagnostic(scenario, &root)?, stats)),
    }
}

pub fn solve_bnb_with<S: Scalar>(scenario: &Scenario<S>, options: &BnbOptions) -> Result<SolveResult<S>> {
    let start = Instant::now();
    ensure_valid(scenario)?;
    let results = scenario
        .slice_ids()
        .into_par_iter()
        .map(|n| solve_slice(scenario, n, options, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_slice_results(results, start.elapsed()))
}

pub fn solve_bnb<S: Scalar>(scenario: &Scenario<S>) -> Result<SolveResult<S>> {
    solve_bnb_with(scenario, &BnbOptions::default())
}

/// Sequential run that also records pruned nodes and bound edges.
pub fn solve_bnb_traced<S: Scalar>(
    scenario: &Scenario<S>,
    options: &BnbOptions,
) -> Result<(SolveResult<S>, BnbTrace<S>)> {
    let start = Instant::now();
    ensure_valid(scenario)?;
    let mut results = Vec::new();
    let mut slices = Vec::new();
    for n in scenario.slice_ids() {
        let mut t = SliceTrace {
            slice: n,
            pruned: Vec::new(),
            edges: Vec::new(),
        };
        results.push(solve_slice(scenario, n, options, Some(&mut t))?);
        slices.push(t);
    }
    Ok((merge_slice_results(results, start.elapsed()), BnbTrace { slices }))
}
