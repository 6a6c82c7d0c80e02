//! Scenario validation against the monotonicity axioms of the cost model.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{PairKey, PairModel, Scenario};
use crate::scalar::{lt_strict, Scalar};

/// Which rule a violation breaks. `EqN` codes name the model relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AxiomCode {
    /// Missing or malformed data.
    #[serde(rename = "STRUCT")]
    Struct,
    /// A value outside its admissible range (negative cost, t_max outside (0,1), ...).
    #[serde(rename = "DOMAIN")]
    Domain,
    /// Physical cost exceeds virtual cost at every level.
    Eq3,
    /// t_max strictly increasing in level.
    Eq6,
    /// Physical cost strictly increasing in level.
    Eq7,
    /// Virtual cost strictly increasing in level.
    Eq8,
    /// Operations cost strictly decreasing in tenant control.
    Eq9,
    /// Quality contribution strictly increasing in level.
    Eq10,
    /// Security contribution strictly increasing in level.
    Eq12,
}

impl fmt::Display for AxiomCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxiomCode::Struct => "STRUCT",
            AxiomCode::Domain => "DOMAIN",
            AxiomCode::Eq3 => "Eq3",
            AxiomCode::Eq6 => "Eq6",
            AxiomCode::Eq7 => "Eq7",
            AxiomCode::Eq8 => "Eq8",
            AxiomCode::Eq9 => "Eq9",
            AxiomCode::Eq10 => "Eq10",
            AxiomCode::Eq12 => "Eq12",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: AxiomCode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairKey>,
    pub detail: String,
}

impl Violation {
    pub fn new(code: AxiomCode, pair: Option<PairKey>, detail: impl Into<String>) -> Self {
        Violation {
            code,
            pair,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pair {
            Some(pair) => write!(f, "[{}] {}: {}", self.code, pair, self.detail),
            None => write!(f, "[{}] {}", self.code, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> BTreeSet<AxiomCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "scenario is valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Returns one violation per failed check; an empty report means the
/// scenario satisfies every structural, range and monotonicity rule.
pub fn validate_scenario<S: Scalar>(scenario: &Scenario<S>) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_structure(scenario, &mut report);
    for slice in &scenario.slices {
        if slice.q_min < S::zero() || slice.s_min < S::zero() {
            report.push(Violation::new(
                AxiomCode::Domain,
                None,
                format!(
                    "slice {} has negative minimum (q_min={}, s_min={})",
                    slice.id, slice.q_min, slice.s_min
                ),
            ));
        }
    }
    for (key, pair) in &scenario.pairs {
        let before = report.violations.len();
        check_pair_structure(*key, pair, &mut report);
        if report.violations.len() == before {
            check_pair_ranges(*key, pair, &mut report);
            check_pair_axioms(*key, pair, &mut report);
        }
    }
    report
}

fn check_structure<S: Scalar>(scenario: &Scenario<S>, report: &mut ValidationReport) {
    let mut slice_ids = BTreeSet::new();
    for s in &scenario.slices {
        if !slice_ids.insert(s.id) {
            report.push(Violation::new(
                AxiomCode::Struct,
                None,
                format!("duplicate slice id {}", s.id),
            ));
        }
    }
    let mut layer_ids = BTreeSet::new();
    for l in &scenario.layers {
        if !layer_ids.insert(l.id) {
            report.push(Violation::new(
                AxiomCode::Struct,
                None,
                format!("duplicate layer id {}", l.id),
            ));
        }
    }
    let mut positions: Vec<u32> = scenario.layers.iter().map(|l| l.stack_position).collect();
    positions.sort_unstable();
    let expected: Vec<u32> = (1..=scenario.layers.len() as u32).collect();
    if positions != expected {
        report.push(Violation::new(
            AxiomCode::Struct,
            None,
            format!(
                "layer stack positions {positions:?} are not a permutation of 1..={}",
                scenario.layers.len()
            ),
        ));
    }
    for n in &slice_ids {
        for p in &layer_ids {
            let key = PairKey::new(*n, *p);
            if !scenario.pairs.contains_key(&key) {
                report.push(Violation::new(
                    AxiomCode::Struct,
                    Some(key),
                    "missing tables for this pair",
                ));
            }
        }
    }
    for key in scenario.pairs.keys() {
        if !slice_ids.contains(&key.slice) || !layer_ids.contains(&key.layer) {
            report.push(Violation::new(
                AxiomCode::Struct,
                Some(*key),
                "tables given for an unknown slice or layer",
            ));
        }
    }
}

fn check_pair_structure<S: Scalar>(key: PairKey, pair: &PairModel<S>, report: &mut ValidationReport) {
    let d = &pair.domain;
    let n_levels = d.levels.len();
    let mut fail = |detail: String| report.push(Violation::new(AxiomCode::Struct, Some(key), detail));
    if n_levels == 0 {
        fail("empty isolation level list".into());
        return;
    }
    if d.levels.windows(2).any(|w| w[0].id >= w[1].id) {
        fail("isolation levels are not strictly ordered".into());
    }
    if d.control_grid.is_empty() {
        fail("empty control grid".into());
    }
    let per_level = [
        ("t_max", d.t_max.len()),
        ("physical cost", pair.costs.physical.len()),
        ("virtual cost", pair.costs.virtualized.len()),
        ("phi", pair.quality.phi.len()),
        ("sigma", pair.security.sigma.len()),
    ];
    for (name, len) in per_level {
        if len != n_levels {
            fail(format!("{name} table has {len} entries for {n_levels} levels"));
        }
    }
    if pair.costs.operations.len() != d.control_grid.len() {
        fail(format!(
            "operations cost table has {} entries for {} control values",
            pair.costs.operations.len(),
            d.control_grid.len()
        ));
    }
}

fn check_pair_ranges<S: Scalar>(key: PairKey, pair: &PairModel<S>, report: &mut ValidationReport) {
    let zero = S::zero();
    let one = S::one();
    let mut fail = |detail: String| report.push(Violation::new(AxiomCode::Domain, Some(key), detail));
    let d = &pair.domain;
    for (level, t) in d.levels.iter().zip(&d.t_max) {
        if *t <= zero || *t >= one {
            fail(format!("t_max({}) = {t} is outside (0, 1)", level.id));
        }
    }
    if d.control_grid.iter().any(|t| *t < zero || *t > one) {
        fail("control grid values must lie in [0, 1]".into());
    }
    if d.control_grid.windows(2).any(|w| w[0] >= w[1]) {
        fail("control grid is not strictly ascending".into());
    }
    if !d.control_grid.iter().any(|t| t.is_zero()) {
        fail("control grid does not contain 0".into());
    }
    let tables = [
        ("physical cost", &pair.costs.physical),
        ("virtual cost", &pair.costs.virtualized),
        ("operations cost", &pair.costs.operations),
        ("phi", &pair.quality.phi),
        ("sigma", &pair.security.sigma),
    ];
    for (name, table) in tables {
        if table.iter().any(|v| *v < zero) {
            fail(format!("{name} table has a negative entry"));
        }
    }
    if pair.quality.physical_bonus < zero || pair.security.physical_bonus < zero {
        fail("physical bonuses must be nonnegative".into());
    }
    if pair.security.alpha <= zero {
        fail(format!("alpha = {} must be positive", pair.security.alpha));
    }
}

fn check_pair_axioms<S: Scalar>(key: PairKey, pair: &PairModel<S>, report: &mut ValidationReport) {
    let d = &pair.domain;
    let levels: Vec<u32> = d.level_ids().collect();

    for (k, level) in levels.iter().enumerate() {
        let (phys, virt) = (&pair.costs.physical[k], &pair.costs.virtualized[k]);
        if !lt_strict(virt, phys) {
            report.push(Violation::new(
                AxiomCode::Eq3,
                Some(key),
                format!("at level {level}: physical cost {phys} must exceed virtual cost {virt}"),
            ));
        }
    }

    let increasing = [
        (AxiomCode::Eq6, "t_max", &d.t_max),
        (AxiomCode::Eq7, "physical cost", &pair.costs.physical),
        (AxiomCode::Eq8, "virtual cost", &pair.costs.virtualized),
        (AxiomCode::Eq10, "phi", &pair.quality.phi),
        (AxiomCode::Eq12, "sigma", &pair.security.sigma),
    ];
    for (code, name, table) in increasing {
        for k in 1..table.len() {
            if !lt_strict(&table[k - 1], &table[k]) {
                report.push(Violation::new(
                    code,
                    Some(key),
                    format!(
                        "{name} must increase strictly with isolation: level {} -> {}, level {} -> {}",
                        levels[k - 1],
                        table[k - 1],
                        levels[k],
                        table[k]
                    ),
                ));
            }
        }
    }

    let grid = &d.control_grid;
    let op = &pair.costs.operations;
    for k in 1..op.len() {
        if !lt_strict(&op[k], &op[k - 1]) {
            report.push(Violation::new(
                AxiomCode::Eq9,
                Some(key),
                format!(
                    "operations cost must decrease strictly with tenant control: t={} -> {}, t={} -> {}",
                    grid[k - 1],
                    op[k - 1],
                    grid[k],
                    op[k]
                ),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p11() -> PairKey {
        PairKey::new(1, 1)
    }

    #[test]
    fn tiny_is_valid() {
        let report = validate_scenario(&fixtures::tiny());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn physical_below_virtual_cites_eq3() {
        let mut s = fixtures::tiny();
        s.pair_mut(p11()).unwrap().costs.physical[1] = 2.5;
        let report = validate_scenario(&s);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert_eq!(report.violations[0].code, AxiomCode::Eq3);
        assert_eq!(report.violations[0].pair, Some(p11()));
    }

    #[test]
    fn decreasing_t_max_cites_eq6() {
        let mut s = fixtures::tiny();
        s.pair_mut(p11()).unwrap().domain.t_max[1] = 0.3;
        let report = validate_scenario(&s);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert_eq!(report.violations[0].code, AxiomCode::Eq6);
    }

    #[test]
    fn missing_pair_is_structural() {
        let mut s = fixtures::tiny();
        s.pairs.remove(&PairKey::new(1, 2));
        let report = validate_scenario(&s);
        assert_eq!(report.codes(), [AxiomCode::Struct].into());
    }

    #[test]
    fn empty_levels_is_structural() {
        let mut s = fixtures::tiny();
        let pair = s.pair_mut(p11()).unwrap();
        pair.domain.levels.clear();
        let report = validate_scenario(&s);
        assert_eq!(report.codes(), [AxiomCode::Struct].into());
    }

    #[test]
    fn range_checks() {
        let mut s = fixtures::tiny();
        s.pair_mut(p11()).unwrap().security.alpha = 0.0;
        assert_eq!(validate_scenario(&s).codes(), [AxiomCode::Domain].into());

        let mut s = fixtures::tiny();
        s.pair_mut(p11()).unwrap().domain.t_max[1] = 1.0;
        assert_eq!(validate_scenario(&s).codes(), [AxiomCode::Domain].into());

        let mut s = fixtures::tiny();
        s.slices[0].q_min = -1.0;
        assert_eq!(validate_scenario(&s).codes(), [AxiomCode::Domain].into());
    }

    #[test]
    fn duplicate_stack_positions_rejected() {
        let mut s = fixtures::tiny();
        s.layers[1].stack_position = 1;
        assert!(validate_scenario(&s).codes().contains(&AxiomCode::Struct));
    }
}
