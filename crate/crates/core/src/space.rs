//! Restricted decision domains.
//!
//! A [`Restriction`] narrows one pair's decisions by value (level range,
//! control interval, fixed virtualization). Solvers work on the resolved
//! form, a [`PairBox`] of index intervals into the pair's level list, its
//! control grid and `{physical, virtual}`.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{LayerChoice, PairKey, PairModel, Scenario};
use crate::scalar::{ge_tol, le_tol, Scalar};

/// Value-level restriction of one pair. `None` fields are unrestricted.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction<S> {
    /// Inclusive range of admissible level ids.
    pub levels: Option<(u32, u32)>,
    /// Inclusive interval of admissible tenant-control values.
    pub controls: Option<(S, S)>,
    /// Forces the virtualization flag.
    pub virtualized: Option<bool>,
}

impl<S> Default for Restriction<S> {
    fn default() -> Self {
        Restriction {
            levels: None,
            controls: None,
            virtualized: None,
        }
    }
}

/// Per-pair restrictions; pairs without an entry are unrestricted.
#[derive(Debug, Clone, PartialEq)]
pub struct Restrictions<S> {
    map: BTreeMap<PairKey, Restriction<S>>,
}

impl<S> Default for Restrictions<S> {
    fn default() -> Self {
        Restrictions { map: BTreeMap::new() }
    }
}

impl<S: Scalar> Restrictions<S> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn get(&self, key: PairKey) -> Option<&Restriction<S>> {
        self.map.get(&key)
    }

    pub fn entry(&mut self, key: PairKey) -> &mut Restriction<S> {
        self.map.entry(key).or_default()
    }

    pub fn with_levels(mut self, key: PairKey, lo: u32, hi: u32) -> Self {
        self.entry(key).levels = Some((lo, hi));
        self
    }

    pub fn with_controls(mut self, key: PairKey, lo: S, hi: S) -> Self {
        self.entry(key).controls = Some((lo, hi));
        self
    }

    pub fn with_virtualized(mut self, key: PairKey, virtualized: bool) -> Self {
        self.entry(key).virtualized = Some(virtualized);
        self
    }

    /// Restriction that pins a pair to one decision.
    pub fn fix(mut self, key: PairKey, choice: &LayerChoice<S>) -> Self {
        *self.entry(key) = Restriction {
            levels: Some((choice.level, choice.level)),
            controls: Some((choice.control.clone(), choice.control.clone())),
            virtualized: Some(choice.virtualized),
        };
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairKey, &Restriction<S>)> {
        self.map.iter()
    }
}

/// Index-interval form of a pair's admissible decisions.
///
/// `level` indexes `domain.levels`, `control` indexes `domain.control_grid`,
/// `virt` ranges over 0 (physical) and 1 (virtual). All bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairBox {
    pub level: (usize, usize),
    pub control: (usize, usize),
    pub virt: (u8, u8),
}

impl PairBox {
    pub fn full<S: Scalar>(pair: &PairModel<S>) -> Self {
        PairBox {
            level: (0, pair.domain.levels.len() - 1),
            control: (0, pair.domain.control_grid.len() - 1),
            virt: (0, 1),
        }
    }

    /// Resolves a value restriction against the pair's grids. Returns `None`
    /// when no admissible `(level, control, v)` combination remains.
    pub fn resolve<S: Scalar>(pair: &PairModel<S>, restriction: Option<&Restriction<S>>) -> Option<Self> {
        let mut b = PairBox::full(pair);
        if let Some(r) = restriction {
            if let Some((lo, hi)) = r.levels {
                let ids: Vec<u32> = pair.domain.level_ids().collect();
                let first = ids.iter().position(|id| *id >= lo)?;
                let last = ids.iter().rposition(|id| *id <= hi)?;
                b.level = (first, last);
            }
            if let Some((lo, hi)) = &r.controls {
                let grid = &pair.domain.control_grid;
                let first = grid.iter().position(|t| ge_tol(t, lo))?;
                let last = grid.iter().rposition(|t| le_tol(t, hi))?;
                b.control = (first, last);
            }
            if let Some(v) = r.virtualized {
                let v = u8::from(v);
                b.virt = (v, v);
            }
        }
        b.tighten(pair)
    }

    /// Drops levels with no admissible control and controls above the
    /// highest level's bound. Only removes infeasible combinations.
    pub fn tighten<S: Scalar>(mut self, pair: &PairModel<S>) -> Option<Self> {
        if self.level.0 > self.level.1 || self.control.0 > self.control.1 || self.virt.0 > self.virt.1 {
            return None;
        }
        let grid = &pair.domain.control_grid;
        let t_max = &pair.domain.t_max;
        while !le_tol(&grid[self.control.0], &t_max[self.level.0]) {
            if self.level.0 == self.level.1 {
                return None;
            }
            self.level.0 += 1;
        }
        while !le_tol(&grid[self.control.1], &t_max[self.level.1]) {
            if self.control.1 == self.control.0 {
                return None;
            }
            self.control.1 -= 1;
        }
        Some(self)
    }

    pub fn is_singleton(&self) -> bool {
        self.level.0 == self.level.1 && self.control.0 == self.control.1 && self.virt.0 == self.virt.1
    }

    pub fn allows_virtual(&self) -> bool {
        self.virt.1 == 1
    }

    pub fn allows_physical(&self) -> bool {
        self.virt.0 == 0
    }

    /// Highest admissible control index at level index `level_idx`.
    pub fn max_control_at<S: Scalar>(&self, pair: &PairModel<S>, level_idx: usize) -> Option<usize> {
        (self.control.0..=self.control.1)
            .rev()
            .find(|&k| le_tol(&pair.domain.control_grid[k], &pair.domain.t_max[level_idx]))
    }

    /// Every admissible decision in canonical order: ascending level, then
    /// ascending control, then virtual before physical.
    pub fn choices<S: Scalar>(&self, pair: &PairModel<S>) -> Vec<LayerChoice<S>> {
        let mut out = Vec::new();
        for li in self.level.0..=self.level.1 {
            let Some(top) = self.max_control_at(pair, li) else {
                continue;
            };
            for ci in self.control.0..=top {
                for v in (self.virt.0..=self.virt.1).rev() {
                    out.push(LayerChoice::new(
                        pair.domain.levels[li].id,
                        pair.domain.control_grid[ci].clone(),
                        v == 1,
                    ));
                }
            }
        }
        out
    }

    /// The canonically smallest decision in the box; it need not be admissible.
    pub fn canonical_min<S: Scalar>(&self, pair: &PairModel<S>) -> LayerChoice<S> {
        LayerChoice::new(
            pair.domain.levels[self.level.0].id,
            pair.domain.control_grid[self.control.0].clone(),
            self.virt.1 == 1,
        )
    }

    /// Converts back to a value restriction.
    pub fn to_restriction<S: Scalar>(&self, pair: &PairModel<S>) -> Restriction<S> {
        let grid = &pair.domain.control_grid;
        Restriction {
            levels: Some((pair.domain.levels[self.level.0].id, pair.domain.levels[self.level.1].id)),
            controls: Some((grid[self.control.0].clone(), grid[self.control.1].clone())),
            virtualized: if self.virt.0 == self.virt.1 {
                Some(self.virt.0 == 1)
            } else {
                None
            },
        }
    }

    pub fn contains<S: Scalar>(&self, pair: &PairModel<S>, choice: &LayerChoice<S>) -> bool {
        let (Some(li), Some(ci)) = (
            pair.domain.level_index(choice.level),
            pair.domain.control_index(&choice.control),
        ) else {
            return false;
        };
        let v = u8::from(choice.virtualized);
        (self.level.0..=self.level.1).contains(&li)
            && (self.control.0..=self.control.1).contains(&ci)
            && (self.virt.0..=self.virt.1).contains(&v)
            && le_tol(&choice.control, &pair.domain.t_max[li])
    }
}

/// Search space of one slice: its pairs in stack order with their boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpace {
    pub slice: u32,
    pub keys: Vec<PairKey>,
    pub boxes: Vec<PairBox>,
}

impl SliceSpace {
    /// `Ok(None)` when some pair has no admissible decision left.
    pub fn resolve<S: Scalar>(
        scenario: &Scenario<S>,
        slice: u32,
        restrictions: &Restrictions<S>,
    ) -> Result<Option<Self>> {
        scenario.slice(slice)?;
        let keys = scenario.slice_pairs(slice);
        let mut boxes = Vec::with_capacity(keys.len());
        for key in &keys {
            let pair = scenario.pair(*key)?;
            match PairBox::resolve(pair, restrictions.get(*key)) {
                Some(b) => boxes.push(b),
                None => return Ok(None),
            }
        }
        Ok(Some(SliceSpace { slice, keys, boxes }))
    }

    pub fn to_restrictions<S: Scalar>(&self, scenario: &Scenario<S>) -> Result<Restrictions<S>> {
        let mut out = Restrictions::none();
        for (key, b) in self.keys.iter().zip(&self.boxes) {
            *out.entry(*key) = b.to_restriction(scenario.pair(*key)?);
        }
        Ok(out)
    }
}

/// Rejects restrictions that name pairs outside the scenario.
pub(crate) fn check_restriction_keys<S: Scalar>(scenario: &Scenario<S>, restrictions: &Restrictions<S>) -> Result<()> {
    for (key, _) in restrictions.iter() {
        scenario.pair(*key)?;
    }
    Ok(())
}
