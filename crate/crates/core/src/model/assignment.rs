use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{AssignmentIssue, Error, Result};
use crate::model::{PairKey, Scenario};
use crate::scalar::{le_tol, Scalar};

/// Decision for one `(slice, layer)` pair: isolation level, tenant control
/// and virtualization flag. MNO control is always `1 - control`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerChoice<S> {
    pub level: u32,
    pub control: S,
    pub virtualized: bool,
}

impl<S: Scalar> LayerChoice<S> {
    pub fn new(level: u32, control: S, virtualized: bool) -> Self {
        LayerChoice {
            level,
            control,
            virtualized,
        }
    }

    pub fn mno_control(&self) -> S {
        S::one() - self.control.clone()
    }

    /// Canonical preference order: lower level, lower control, virtual first.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.control.partial_cmp(&other.control).unwrap_or(Ordering::Equal))
            .then_with(|| other.virtualized.cmp(&self.virtualized))
    }
}

/// The decision vectors (I, T, V) keyed by `(slice, layer)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<S = f64> {
    choices: BTreeMap<PairKey, LayerChoice<S>>,
}

impl<S> Default for Assignment<S> {
    fn default() -> Self {
        Assignment {
            choices: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> Assignment<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: PairKey, choice: LayerChoice<S>) {
        self.choices.insert(key, choice);
    }

    pub fn with(mut self, key: PairKey, choice: LayerChoice<S>) -> Self {
        self.set(key, choice);
        self
    }

    pub fn get(&self, key: PairKey) -> Option<&LayerChoice<S>> {
        self.choices.get(&key)
    }

    pub fn choice(&self, key: PairKey) -> Result<&LayerChoice<S>> {
        self.get(key).ok_or_else(|| {
            Error::InvalidAssignment(vec![AssignmentIssue {
                pair: key,
                reason: "no decision for this pair".into(),
            }])
        })
    }

    pub fn isolation(&self, key: PairKey) -> Option<u32> {
        self.get(key).map(|c| c.level)
    }

    pub fn tenant_control(&self, key: PairKey) -> Option<&S> {
        self.get(key).map(|c| &c.control)
    }

    pub fn mno_control(&self, key: PairKey) -> Option<S> {
        self.get(key).map(LayerChoice::mno_control)
    }

    pub fn virtualized(&self, key: PairKey) -> Option<bool> {
        self.get(key).map(|c| c.virtualized)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairKey, &LayerChoice<S>)> {
        self.choices.iter()
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Adds every choice of `other`, overwriting shared keys.
    pub fn merge(&mut self, other: Assignment<S>) {
        self.choices.extend(other.choices);
    }

    /// Builds a slice assignment from per-layer choices listed in stack order.
    pub fn from_slice_choices<S2: Into<S> + Clone>(
        scenario: &Scenario<S>,
        slice: u32,
        choices: &[(u32, S2, bool)],
    ) -> Self {
        let mut out = Assignment::new();
        for (key, (level, control, virt)) in scenario.slice_pairs(slice).into_iter().zip(choices) {
            out.set(key, LayerChoice::new(*level, control.clone().into(), *virt));
        }
        out
    }

    /// Lexicographic comparison over `keys` using [`LayerChoice::canonical_cmp`].
    pub fn canonical_cmp(&self, other: &Self, keys: &[PairKey]) -> Ordering {
        for key in keys {
            let ord = match (self.get(*key), other.get(*key)) {
                (Some(a), Some(b)) => a.canonical_cmp(b),
                (a, b) => a.is_some().cmp(&b.is_some()).reverse(),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

impl<S: Scalar> Scenario<S> {
    /// Checks that the assignment covers exactly the pairs of `slices` with
    /// admissible levels and controls.
    fn check_pairs(&self, assignment: &Assignment<S>, expected: &[PairKey]) -> Result<()> {
        let mut issues = Vec::new();
        for key in expected {
            let Some(choice) = assignment.get(*key) else {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: "no decision for this pair".into(),
                });
                continue;
            };
            let Ok(pair) = self.pair(*key) else {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: "pair missing from scenario".into(),
                });
                continue;
            };
            let Some(level_idx) = pair.domain.level_index(choice.level) else {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: format!("unknown isolation level {}", choice.level),
                });
                continue;
            };
            if pair.domain.control_index(&choice.control).is_none() {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: format!("control {} not on grid", choice.control),
                });
            } else if !le_tol(&choice.control, &pair.domain.t_max[level_idx]) {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: format!(
                        "control {} exceeds t_max {} at level {}",
                        choice.control, pair.domain.t_max[level_idx], choice.level
                    ),
                });
            }
        }
        for (key, _) in assignment.iter() {
            if !expected.contains(key) {
                issues.push(AssignmentIssue {
                    pair: *key,
                    reason: "decision for a pair outside the scenario".into(),
                });
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAssignment(issues))
        }
    }

    /// Structural check of a full assignment.
    pub fn check_assignment(&self, assignment: &Assignment<S>) -> Result<()> {
        let expected: Vec<PairKey> = self.slice_ids().into_iter().flat_map(|n| self.slice_pairs(n)).collect();
        self.check_pairs(assignment, &expected)
    }

    /// Structural check of the decisions for slice `slice` only; decisions
    /// for other slices are ignored.
    pub fn check_slice_assignment(&self, slice: u32, assignment: &Assignment<S>) -> Result<()> {
        self.slice(slice)?;
        let keys = self.slice_pairs(slice);
        let mut own = Assignment::new();
        for key in &keys {
            if let Some(c) = assignment.get(*key) {
                own.set(*key, c.clone());
            }
        }
        self.check_pairs(&own, &keys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn mno_control_is_complement() {
        let c = LayerChoice::new(1, 0.4_f64, true);
        assert!((c.mno_control() + c.control - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_order_prefers_virtual_first() {
        let virt = LayerChoice::new(1, 0.0, true);
        let phys = LayerChoice::new(1, 0.0, false);
        assert_eq!(virt.canonical_cmp(&phys), Ordering::Less);
        let higher = LayerChoice::new(2, 0.0, true);
        assert_eq!(phys.canonical_cmp(&higher), Ordering::Less);
    }

    #[test]
    fn check_rejects_control_above_bound() {
        let tiny = fixtures::tiny();
        let a = Assignment::from_slice_choices(&tiny, 1, &[(1, 0.8, true), (1, 0.0, true)]);
        let err = tiny.check_assignment(&a).unwrap_err();
        match err {
            Error::InvalidAssignment(issues) => {
                assert_eq!(issues.len(), 1);
                assert_eq!(issues[0].pair, PairKey::new(1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn check_lists_missing_and_off_grid_pairs() {
        let tiny = fixtures::tiny();
        let a = Assignment::new().with(PairKey::new(1, 1), LayerChoice::new(1, 0.3, true));
        let Err(Error::InvalidAssignment(issues)) = tiny.check_assignment(&a) else {
            panic!("expected invalid assignment");
        };
        assert_eq!(issues.len(), 2);
    }
}
