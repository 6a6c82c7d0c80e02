mod common;

use common::{random_scenario, rng, slice_plans, SMALL};
use proptest::prelude::*;
use rand::Rng;
use sliceplan::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use sliceplan::relaxation::{build_relaxation, Relaxation};
use sliceplan::sweep::{run_sweep, SweepDimension, SweepSpec};
use sliceplan::{fixtures, Assignment, Restrictions, Scenario};

/// Every feasible integer decision maps to a feasible LP point whose
/// objective does not exceed the true cost.
#[test]
fn relaxation_contains_every_feasible_decision() {
    let mut r = rng(41);
    let mut points = 0;
    for case in 0..200 {
        let s = random_scenario(&mut r, SMALL);
        let per_slice: Vec<_> = s.slice_ids().into_iter().map(|n| slice_plans(&s, n)).collect();
        if per_slice.iter().any(|p| p.is_empty()) {
            continue;
        }
        let Relaxation::Problem(problem) = build_relaxation(&s, &Restrictions::none()).unwrap() else {
            panic!("case {case}: root relaxation infeasible although a feasible plan exists");
        };
        for _ in 0..5 {
            let mut a = Assignment::new();
            let mut cost = 0.0;
            for plans in &per_slice {
                let (c, _, plan) = &plans[r.gen_range(0..plans.len())];
                cost += c;
                for (k, choice) in plan.iter() {
                    a.set(*k, choice.clone());
                }
            }
            let x = problem.point_for(&s, &a).unwrap();
            let violation = problem.lp.max_scaled_violation(&x);
            assert!(violation <= 1e-9, "case {case}: violation {violation}");
            let objective = problem.lp.objective_value(&x);
            assert!(objective <= cost + 1e-9, "case {case}: {objective} > {cost}");
            assert!((problem.integer_point_cost(&s, &a).unwrap() - cost).abs() <= 1e-9);
            points += 1;
        }
    }
    assert!(points > 300, "only {points} points checked");
}

#[test]
fn tenant_floor_never_lowers_security_on_fixtures() {
    let scenarios: [(&str, Scenario<f64>); 3] = [
        ("tiny", fixtures::tiny()),
        ("urllc", fixtures::urllc_fix()),
        ("two_tiny", fixtures::two_tiny()),
    ];
    for (name, s) in scenarios {
        let spec = SweepSpec {
            dimension: SweepDimension::TenantControlFloor,
            slice: 1,
            layer: None,
            values: vec![],
        };
        let rows = run_sweep(&s, &spec).unwrap();
        let secs: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.plan.as_ref().map(|p| p.security))
            .collect();
        assert!(secs.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{name}: {secs:?}");
    }
}

/// `min c.x` s.t. `A x >= b`, `x >= 0`, built with a known primal-dual pair:
/// `b = A x*`, `c = A^T y + r` with `y > 0`, `r >= 0` and `r_j x*_j = 0`.
fn known_optimum_lp(a: &[Vec<i32>], x_star: &[u8], y: &[u8], r: &[u8]) -> (LinearProgram<f64>, f64) {
    let n = x_star.len();
    let mut lp = LinearProgram::new();
    let mut optimum = 0.0;
    for j in 0..n {
        let reduced = if x_star[j] > 0 { 0.0 } else { f64::from(r[j]) };
        let c: f64 = a
            .iter()
            .zip(y)
            .map(|(row, yi)| f64::from(row[j]) * f64::from(*yi))
            .sum::<f64>()
            + reduced;
        optimum += c * f64::from(x_star[j]);
        lp.add_variable(format!("x{j}"), Some(0.0), None, c);
    }
    for (i, row) in a.iter().enumerate() {
        let rhs: f64 = row
            .iter()
            .zip(x_star)
            .map(|(aij, xj)| f64::from(*aij) * f64::from(*xj))
            .sum();
        let coeffs = row.iter().enumerate().map(|(j, aij)| (j, f64::from(*aij))).collect();
        lp.add_constraint(format!("r{i}"), coeffs, Sense::Ge, rhs);
    }
    (lp, optimum)
}

fn lp_case() -> impl Strategy<Value = (Vec<Vec<i32>>, Vec<u8>, Vec<u8>, Vec<u8>)> {
    (1usize..5, 1usize..6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(-4i32..=6, n), m),
            prop::collection::vec(0u8..4, n),
            prop::collection::vec(1u8..4, m),
            prop::collection::vec(1u8..4, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_finds_the_planted_optimum((a, x_star, y, r) in lp_case()) {
        let (lp, optimum) = known_optimum_lp(&a, &x_star, &y, &r);
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!((sol.objective - optimum).abs() <= 1e-7 * (1.0 + optimum.abs()),
            "objective {} vs planted {}", sol.objective, optimum);
        prop_assert!(lp.max_scaled_violation(&sol.values) <= 1e-9);
    }
}
