//! Continuous relaxation of the planning problem.
//!
//! For every pair in scope the level, control and virtualization decisions
//! become continuous variables `i_hat`, `t_hat`, `v_hat` over the pair's
//! (restricted) box. Tabulated functions of the level or control are
//! replaced by envelopes that keep the relaxation sound:
//!
//! * costs use convex lower envelopes, entered through epigraph variables;
//! * quality and security terms use concave upper envelopes, entered
//!   through hypograph variables;
//! * the infrastructure cost with both `v` values open is bounded below by
//!   `env(c_virt)(i_hat) + (1 - v_hat) * min_i (c_phys(i) - c_virt(i))`;
//! * `t_hat` is capped by the concave upper envelope of the largest
//!   admissible control at each level.
//!
//! Every integer-feasible decision inside the box maps to a feasible LP point
//! whose objective does not exceed its true cost.

use std::collections::BTreeMap;

use crate::envelope::{concave_upper, convex_lower, Envelope};
use crate::error::{Error, Result};
use crate::evaluator::{layer_cost, layer_quality, layer_security};
use crate::lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Sense};
use crate::model::{Assignment, PairKey, PairModel, Scenario};
use crate::scalar::{min_of, Scalar};
use crate::space::{check_restriction_keys, PairBox, Restrictions, SliceSpace};

/// Which table a segment row linearizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    VirtualCost,
    PhysicalCost,
    OperationsCost,
    Quality,
    Security,
    ControlBound,
}

/// Maps one LP row back to the grid interval it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentInfo<S> {
    pub pair: PairKey,
    pub table: TableKind,
    pub from: (S, S),
    pub to: (S, S),
    pub row: usize,
}

/// LP column indices of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairVars {
    pub key: PairKey,
    pub isolation: usize,
    pub control: usize,
    pub virtualization: usize,
    pub infra: usize,
    pub operations: usize,
    pub quality: usize,
    pub security: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedProblem<S> {
    pub lp: LinearProgram<S>,
    pub pairs: Vec<PairVars>,
    pub boxes: BTreeMap<PairKey, PairBox>,
    pub segments: Vec<SegmentInfo<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation<S> {
    Problem(RelaxedProblem<S>),
    /// The restrictions leave no admissible decision for some pair.
    NodeInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LowerBound<S> {
    Value(S),
    NodeInfeasible,
}

impl<S: Scalar> LowerBound<S> {
    pub fn value(&self) -> Option<&S> {
        match self {
            LowerBound::Value(v) => Some(v),
            LowerBound::NodeInfeasible => None,
        }
    }
}

fn level_x<S: Scalar>(pair: &PairModel<S>, idx: usize) -> S {
    S::from_u32(pair.domain.levels[idx].id).expect("level id fits the scalar type")
}

fn level_points<S: Scalar>(pair: &PairModel<S>, b: &PairBox, table: &[S]) -> Vec<(S, S)> {
    (b.level.0..=b.level.1)
        .map(|k| (level_x(pair, k), table[k].clone()))
        .collect()
}

struct Builder<'a, S> {
    lp: LinearProgram<S>,
    segments: Vec<SegmentInfo<S>>,
    scenario: &'a Scenario<S>,
}

impl<S: Scalar> Builder<'_, S> {
    /// `var (>= | <=) line(x)` for every envelope segment.
    fn envelope_rows(&mut self, key: PairKey, table: TableKind, env: &Envelope<S>, var: usize, x: usize, sense: Sense) {
        let lines = env.lines();
        for (k, line) in lines.iter().enumerate() {
            let (from, to) = if env.vertices.len() == 1 {
                (env.vertices[0].clone(), env.vertices[0].clone())
            } else {
                (env.vertices[k].clone(), env.vertices[k + 1].clone())
            };
            let row = self.lp.constraints.len();
            let mut coeffs = vec![(var, S::one())];
            if !line.slope.is_zero() {
                coeffs.push((x, -line.slope.clone()));
            }
            self.lp.add_constraint(
                format!("{table:?}_{}_{}_{k}", key.slice, key.layer),
                coeffs,
                sense,
                line.intercept.clone(),
            );
            self.segments.push(SegmentInfo {
                pair: key,
                table,
                from,
                to,
                row,
            });
        }
    }

    fn add_pair(&mut self, key: PairKey, b: &PairBox) -> Result<PairVars> {
        let pair = self.scenario.pair(key)?;
        let d = &pair.domain;
        let grid = &d.control_grid;
        let tag = |name: &str| format!("{name}({},{})", key.slice, key.layer);
        let virt_lo = S::from_u8(b.virt.0).expect("0 or 1");
        let virt_hi = S::from_u8(b.virt.1).expect("0 or 1");

        let isolation = self.lp.add_variable(
            tag("i_hat"),
            Some(level_x(pair, b.level.0)),
            Some(level_x(pair, b.level.1)),
            S::zero(),
        );
        let control = self.lp.add_variable(
            tag("t_hat"),
            Some(grid[b.control.0].clone()),
            Some(grid[b.control.1].clone()),
            S::zero(),
        );
        let both_v = b.virt.0 != b.virt.1;
        let delta_min = (b.level.0..=b.level.1)
            .map(|k| pair.costs.physical[k].clone() - pair.costs.virtualized[k].clone())
            .reduce(min_of)
            .expect("nonempty level range");
        let v_cost = if both_v { -delta_min.clone() } else { S::zero() };
        let virtualization = self.lp.add_variable(tag("v_hat"), Some(virt_lo), Some(virt_hi), v_cost);
        if both_v {
            self.lp.objective_constant = self.lp.objective_constant.clone() + delta_min;
        }
        let infra = self.lp.add_variable(tag("z_infra"), Some(S::zero()), None, S::one());
        let operations = self.lp.add_variable(tag("z_ops"), Some(S::zero()), None, S::one());
        let quality = self.lp.add_variable(tag("w_quality"), Some(S::zero()), None, S::zero());
        let security = self
            .lp
            .add_variable(tag("w_security"), Some(S::zero()), None, S::zero());

        let (infra_table, infra_kind) = if b.virt == (0, 0) {
            (&pair.costs.physical, TableKind::PhysicalCost)
        } else {
            (&pair.costs.virtualized, TableKind::VirtualCost)
        };
        let infra_env = convex_lower(&level_points(pair, b, infra_table));
        self.envelope_rows(key, infra_kind, &infra_env, infra, isolation, Sense::Ge);

        let op_points: Vec<(S, S)> = (b.control.0..=b.control.1)
            .map(|k| (grid[k].clone(), pair.costs.operations[k].clone()))
            .collect();
        self.envelope_rows(
            key,
            TableKind::OperationsCost,
            &convex_lower(&op_points),
            operations,
            control,
            Sense::Ge,
        );

        let phi_env = concave_upper(&level_points(pair, b, &pair.quality.phi));
        self.envelope_rows(key, TableKind::Quality, &phi_env, quality, isolation, Sense::Le);
        let sigma_env = concave_upper(&level_points(pair, b, &pair.security.sigma));
        self.envelope_rows(key, TableKind::Security, &sigma_env, security, isolation, Sense::Le);

        let mut cap_points = Vec::new();
        for k in b.level.0..=b.level.1 {
            let top = b.max_control_at(pair, k).ok_or(Error::NumericalBreakdown(format!(
                "box for {key} has a level without admissible control"
            )))?;
            cap_points.push((level_x(pair, k), grid[top].clone()));
        }
        self.envelope_rows(
            key,
            TableKind::ControlBound,
            &concave_upper(&cap_points),
            control,
            isolation,
            Sense::Le,
        );

        Ok(PairVars {
            key,
            isolation,
            control,
            virtualization,
            infra,
            operations,
            quality,
            security,
        })
    }
}

/// Builds the relaxation over the given slice spaces.
pub(crate) fn build_for_spaces<S: Scalar>(scenario: &Scenario<S>, spaces: &[SliceSpace]) -> Result<RelaxedProblem<S>> {
    let mut builder = Builder {
        lp: LinearProgram::new(),
        segments: Vec::new(),
        scenario,
    };
    let mut pairs = Vec::new();
    let mut boxes = BTreeMap::new();
    for space in spaces {
        let spec = scenario.slice(space.slice)?;
        let mut slice_vars = Vec::new();
        for (key, b) in space.keys.iter().zip(&space.boxes) {
            slice_vars.push(builder.add_pair(*key, b)?);
            boxes.insert(*key, *b);
        }
        // sum w_q + dq (1 - v) >= q_min  ->  sum w_q - dq v >= q_min - sum dq
        let mut q_row = Vec::new();
        let mut s_row = Vec::new();
        let mut q_rhs = spec.q_min.clone();
        let mut s_rhs = spec.s_min.clone();
        for vars in &slice_vars {
            let pair = scenario.pair(vars.key)?;
            let dq = pair.quality.physical_bonus.clone();
            let ds = pair.security.physical_bonus.clone();
            q_row.push((vars.quality, S::one()));
            s_row.push((vars.security, S::one()));
            s_row.push((vars.control, pair.security.alpha.clone()));
            if !dq.is_zero() {
                q_row.push((vars.virtualization, -dq.clone()));
                q_rhs = q_rhs - dq;
            }
            if !ds.is_zero() {
                s_row.push((vars.virtualization, -ds.clone()));
                s_rhs = s_rhs - ds;
            }
        }
        builder
            .lp
            .add_constraint(format!("qos_{}", space.slice), q_row, Sense::Ge, q_rhs);
        builder
            .lp
            .add_constraint(format!("security_{}", space.slice), s_row, Sense::Ge, s_rhs);
        pairs.extend(slice_vars);
    }
    Ok(RelaxedProblem {
        lp: builder.lp,
        pairs,
        boxes,
        segments: builder.segments,
    })
}

/// Builds the relaxation of every slice under `restrictions`.
pub fn build_relaxation<S: Scalar>(scenario: &Scenario<S>, restrictions: &Restrictions<S>) -> Result<Relaxation<S>> {
    check_restriction_keys(scenario, restrictions)?;
    let mut spaces = Vec::new();
    for n in scenario.slice_ids() {
        match SliceSpace::resolve(scenario, n, restrictions)? {
            Some(space) => spaces.push(space),
            None => return Ok(Relaxation::NodeInfeasible),
        }
    }
    Ok(Relaxation::Problem(build_for_spaces(scenario, &spaces)?))
}

impl<S: Scalar> RelaxedProblem<S> {
    pub fn solve(&self) -> Result<LpSolution<S>> {
        solve_lp(&self.lp)
    }

    /// The LP point corresponding to an integer decision for every pair in
    /// scope. Epigraph variables sit at the true table values, except that
    /// the infrastructure epigraph absorbs the `(1 - v_hat) * delta_min` term
    /// when both `v` values are open.
    pub fn point_for(&self, scenario: &Scenario<S>, assignment: &Assignment<S>) -> Result<Vec<S>> {
        let mut x = vec![S::zero(); self.lp.variables.len()];
        for vars in &self.pairs {
            let key = vars.key;
            let pair = scenario.pair(key)?;
            let choice = assignment.choice(key)?;
            let b = &self.boxes[&key];
            let level_idx = pair.level_index(key, choice.level)?;
            let control_idx = pair.control_index(key, &choice.control)?;
            let v = if choice.virtualized { S::one() } else { S::zero() };
            let mut infra = if choice.virtualized {
                pair.costs.virtualized[level_idx].clone()
            } else {
                pair.costs.physical[level_idx].clone()
            };
            if b.virt.0 != b.virt.1 {
                let delta_min = (b.level.0..=b.level.1)
                    .map(|k| pair.costs.physical[k].clone() - pair.costs.virtualized[k].clone())
                    .reduce(min_of)
                    .expect("nonempty level range");
                infra = infra - (S::one() - v.clone()) * delta_min;
            }
            x[vars.isolation] = level_x(pair, level_idx);
            x[vars.control] = choice.control.clone();
            x[vars.virtualization] = v;
            x[vars.infra] = infra;
            x[vars.operations] = pair.costs.operations[control_idx].clone();
            x[vars.quality] = pair.quality.phi[level_idx].clone();
            x[vars.security] = pair.security.sigma[level_idx].clone();
        }
        Ok(x)
    }

    /// Objective at [`Self::point_for`]; equals the true cost of the decision.
    pub fn integer_point_cost(&self, scenario: &Scenario<S>, assignment: &Assignment<S>) -> Result<S> {
        let mut total = S::zero();
        for vars in &self.pairs {
            let pair = scenario.pair(vars.key)?;
            total = total + layer_cost(pair, vars.key, assignment.choice(vars.key)?)?;
        }
        Ok(total)
    }

    /// Exact quality and security sums of the decision for each slice in scope.
    pub fn integer_point_metrics(
        &self,
        scenario: &Scenario<S>,
        assignment: &Assignment<S>,
    ) -> Result<BTreeMap<u32, (S, S)>> {
        let mut out: BTreeMap<u32, (S, S)> = BTreeMap::new();
        for vars in &self.pairs {
            let pair = scenario.pair(vars.key)?;
            let choice = assignment.choice(vars.key)?;
            let entry = out.entry(vars.key.slice).or_insert((S::zero(), S::zero()));
            entry.0 = entry.0.clone() + layer_quality(pair, vars.key, choice)?;
            entry.1 = entry.1.clone() + layer_security(pair, vars.key, choice)?;
        }
        Ok(out)
    }
}

/// Convenience wrapper around [`RelaxedProblem::solve`].
pub fn solve_relaxation<S: Scalar>(problem: &RelaxedProblem<S>) -> Result<LpSolution<S>> {
    problem.solve()
}

fn bound_of<S: Scalar>(problem: &RelaxedProblem<S>) -> Result<(LowerBound<S>, Option<LpSolution<S>>)> {
    let sol = problem.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok((LowerBound::Value(sol.objective.clone()), Some(sol))),
        LpStatus::Infeasible => Ok((LowerBound::NodeInfeasible, None)),
        LpStatus::Unbounded => Err(Error::NumericalBreakdown(
            "relaxation reported unbounded although all costs are bounded below".into(),
        )),
    }
}

pub(crate) type Solved<S> = (RelaxedProblem<S>, LpSolution<S>);

/// LP bound for the spaces, together with the LP solution when feasible.
pub(crate) fn bound_for_spaces<S: Scalar>(
    scenario: &Scenario<S>,
    spaces: &[SliceSpace],
) -> Result<(LowerBound<S>, Option<Solved<S>>)> {
    let problem = build_for_spaces(scenario, spaces)?;
    let (bound, sol) = bound_of(&problem)?;
    Ok((bound, sol.map(|s| (problem, s))))
}

/// Relaxation optimum under `restrictions`; never above the best integer
/// objective inside them.
pub fn lower_bound<S: Scalar>(scenario: &Scenario<S>, restrictions: &Restrictions<S>) -> Result<LowerBound<S>> {
    match build_relaxation(scenario, restrictions)? {
        Relaxation::NodeInfeasible => Ok(LowerBound::NodeInfeasible),
        Relaxation::Problem(problem) => Ok(bound_of(&problem)?.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::LayerChoice;
    use crate::scalar::Rational;

    fn tiny_optimum() -> Assignment<f64> {
        Assignment::from_slice_choices(&fixtures::tiny(), 1, &[(1, 0.4, true), (2, 0.8, true)])
    }

    #[test]
    fn root_bound_brackets_optimum() {
        // 6 = sum of cheapest layer costs, 7 = integer optimum.
        let bound = lower_bound(&fixtures::tiny(), &Restrictions::none()).unwrap();
        let v = *bound.value().unwrap();
        assert!((6.0 - 1e-9..=7.0 + 1e-9).contains(&v), "bound {v}");
    }

    #[test]
    fn fixing_the_optimum_gives_its_cost() {
        let tiny = fixtures::tiny();
        let opt = tiny_optimum();
        let mut r = Restrictions::none();
        for (key, choice) in opt.iter() {
            r = r.fix(*key, choice);
        }
        let bound = lower_bound(&tiny, &r).unwrap();
        assert!((bound.value().unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn control_above_envelope_is_node_infeasible() {
        let r = Restrictions::none().with_controls(PairKey::new(1, 1), 0.9, 1.0);
        assert_eq!(
            build_relaxation(&fixtures::tiny(), &r).unwrap(),
            Relaxation::NodeInfeasible
        );
        assert_eq!(lower_bound(&fixtures::tiny(), &r).unwrap(), LowerBound::NodeInfeasible);
    }

    #[test]
    fn infeasible_scenario_root_is_not_claimed_feasible() {
        // TINY-Q5 needs q >= 5 but the concave envelope of phi caps q at 4.
        let bound = lower_bound(&fixtures::tiny_q5(), &Restrictions::none()).unwrap();
        assert_eq!(bound, LowerBound::NodeInfeasible);
    }

    #[test]
    fn integer_point_is_feasible_with_true_cost() {
        let tiny = fixtures::tiny();
        let Relaxation::Problem(p) = build_relaxation(&tiny, &Restrictions::none()).unwrap() else {
            panic!("root is feasible");
        };
        for (a, b) in [(1, 2), (2, 2), (2, 1)] {
            for virt in [true, false] {
                let opt = Assignment::from_slice_choices(
                    &tiny,
                    1,
                    &[(a, if a == 1 { 0.4 } else { 0.8 }, virt), (b, 0.0, true)],
                );
                let x = p.point_for(&tiny, &opt).unwrap();
                assert!(p.lp.max_scaled_violation(&x) <= 1e-12 || !check_metrics(&p, &tiny, &opt));
                let cost = p.integer_point_cost(&tiny, &opt).unwrap();
                assert!(p.lp.objective_value(&x) <= cost + 1e-9);
            }
        }
    }

    fn check_metrics(p: &RelaxedProblem<f64>, s: &Scenario<f64>, a: &Assignment<f64>) -> bool {
        let m = p.integer_point_metrics(s, a).unwrap();
        let (q, sec) = m[&1];
        q >= s.slices[0].q_min - 1e-9 && sec >= s.slices[0].s_min - 1e-9
    }

    #[test]
    fn segment_metadata_names_rows() {
        let Relaxation::Problem(p) = build_relaxation(&fixtures::tiny(), &Restrictions::none()).unwrap() else {
            panic!("root is feasible");
        };
        let ops: Vec<_> = p
            .segments
            .iter()
            .filter(|s| s.table == TableKind::OperationsCost && s.pair == PairKey::new(1, 1))
            .collect();
        // operations cost {3, 2, 1} is linear: one segment spanning the grid
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0].from, (0.0, 3.0));
        assert_eq!(ops[0].to, (0.8, 1.0));
        assert!(p.lp.to_lp_format().contains("Subject To"));
    }

    #[test]
    fn exact_bound_matches_hand_value() {
        // Root relaxation of TINY evaluates to exactly 7 in rational arithmetic.
        let tiny = fixtures::tiny_in::<Rational>();
        let bound = lower_bound(&tiny, &Restrictions::none()).unwrap();
        assert_eq!(bound, LowerBound::Value(Rational::from_integer(7.into())));
    }

    #[test]
    fn fixed_physical_uses_physical_envelope() {
        let tiny = fixtures::tiny();
        let mut r = Restrictions::none();
        for p in [1, 2] {
            r = r.fix(PairKey::new(1, p), &LayerChoice::new(2, 0.8, false));
        }
        let bound = lower_bound(&tiny, &r).unwrap();
        assert!((bound.value().unwrap() - 12.0).abs() < 1e-9);
    }
}
