//! Problem data for slice isolation planning.
//!
//! A [`Scenario`] holds the slices, the protocol layers every slice must
//! implement, and for each `(slice, layer)` pair the discrete isolation
//! domain together with its cost, quality and security tables. Per-level
//! tables are stored as vectors aligned with [`IsolationDomain::levels`];
//! the operations-cost table is aligned with the control grid.

mod assignment;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use assignment::{Assignment, LayerChoice};
pub use validate::{validate_scenario, AxiomCode, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::scalar::{approx_eq, le_tol, Scalar};

/// Index of a `(slice, layer)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub slice: u32,
    pub layer: u32,
}

impl PairKey {
    pub fn new(slice: u32, layer: u32) -> Self {
        PairKey { slice, layer }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, p={})", self.slice, self.layer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SliceType {
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "mMTC")]
    Mmtc,
    #[serde(rename = "URLLC")]
    Urllc,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for SliceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceType::Embb => "eMBB",
            SliceType::Mmtc => "mMTC",
            SliceType::Urllc => "URLLC",
            SliceType::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec<S> {
    pub id: u32,
    pub name: String,
    pub slice_type: SliceType,
    /// Minimum aggregate quality of service.
    pub q_min: S,
    /// Minimum aggregate security level.
    pub s_min: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    pub id: u32,
    pub name: String,
    /// 1 is the bottom of the stack.
    pub stack_position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolationLevel {
    pub id: u32,
    pub label: String,
}

impl IsolationLevel {
    pub fn new(id: u32, label: impl Into<String>) -> Self {
        IsolationLevel {
            id,
            label: label.into(),
        }
    }
}

/// Discrete decision domain of one `(slice, layer)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationDomain<S> {
    /// Levels in strictly increasing order of isolation.
    pub levels: Vec<IsolationLevel>,
    /// Upper bound on tenant control, aligned with `levels`.
    pub t_max: Vec<S>,
    /// Tenant-control values, ascending, containing 0.
    pub control_grid: Vec<S>,
}

impl<S: Scalar> IsolationDomain<S> {
    pub fn level_index(&self, level: u32) -> Option<usize> {
        self.levels.iter().position(|l| l.id == level)
    }

    pub fn control_index(&self, control: &S) -> Option<usize> {
        self.control_grid.iter().position(|g| approx_eq(g, control))
    }

    /// Grid indices whose control value does not exceed `t_max` at level index `level_idx`.
    pub fn feasible_control_indices(&self, level_idx: usize) -> impl Iterator<Item = usize> + '_ {
        let bound = &self.t_max[level_idx];
        self.control_grid
            .iter()
            .enumerate()
            .filter(move |(_, t)| le_tol(*t, bound))
            .map(|(k, _)| k)
    }

    pub fn level_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.levels.iter().map(|l| l.id)
    }
}

/// Cost tables of one `(slice, layer)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTables<S> {
    /// Physical implementation cost per level.
    pub physical: Vec<S>,
    /// Virtual implementation cost per level.
    pub virtualized: Vec<S>,
    /// Operations cost per control-grid point.
    pub operations: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityModel<S> {
    /// Quality contribution per level.
    pub phi: Vec<S>,
    /// Added when the layer is implemented physically.
    pub physical_bonus: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityModel<S> {
    /// Weight on tenant control.
    pub alpha: S,
    /// Security contribution per level.
    pub sigma: Vec<S>,
    /// Added when the layer is implemented physically.
    pub physical_bonus: S,
}

/// All tables of one `(slice, layer)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel<S> {
    pub domain: IsolationDomain<S>,
    pub costs: CostTables<S>,
    pub quality: QualityModel<S>,
    pub security: SecurityModel<S>,
}

impl<S: Scalar> PairModel<S> {
    pub(crate) fn level_index(&self, key: PairKey, level: u32) -> Result<usize> {
        self.domain
            .level_index(level)
            .ok_or(Error::UnknownLevel { pair: key, level })
    }

    pub(crate) fn control_index(&self, key: PairKey, control: &S) -> Result<usize> {
        self.domain
            .control_index(control)
            .ok_or_else(|| Error::ControlNotOnGrid {
                pair: key,
                control: control.to_string(),
            })
    }
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S = f64> {
    pub slices: Vec<SliceSpec<S>>,
    pub layers: Vec<LayerSpec>,
    pub pairs: BTreeMap<PairKey, PairModel<S>>,
}

impl<S: Scalar> Scenario<S> {
    pub fn slice(&self, slice: u32) -> Result<&SliceSpec<S>> {
        self.slices
            .iter()
            .find(|s| s.id == slice)
            .ok_or(Error::UnknownSlice(slice))
    }

    pub fn pair(&self, key: PairKey) -> Result<&PairModel<S>> {
        self.pairs.get(&key).ok_or(Error::UnknownPair(key))
    }

    pub fn pair_mut(&mut self, key: PairKey) -> Result<&mut PairModel<S>> {
        self.pairs.get_mut(&key).ok_or(Error::UnknownPair(key))
    }

    /// Slice ids in ascending order.
    pub fn slice_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.slices.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Layer ids ordered bottom-up by stack position.
    pub fn layer_ids_in_stack_order(&self) -> Vec<u32> {
        let mut layers: Vec<&LayerSpec> = self.layers.iter().collect();
        layers.sort_by_key(|l| (l.stack_position, l.id));
        layers.into_iter().map(|l| l.id).collect()
    }

    /// Pair keys of one slice, in stack order.
    pub fn slice_pairs(&self, slice: u32) -> Vec<PairKey> {
        self.layer_ids_in_stack_order()
            .into_iter()
            .map(|layer| PairKey::new(slice, layer))
            .collect()
    }

    /// Scenario restricted to a single slice.
    pub fn single_slice(&self, slice: u32) -> Result<Scenario<S>> {
        let spec = self.slice(slice)?.clone();
        let pairs = self
            .pairs
            .iter()
            .filter(|(k, _)| k.slice == slice)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Ok(Scenario {
            slices: vec![spec],
            layers: self.layers.clone(),
            pairs,
        })
    }
}

/// Control values admissible at `level` for pair `(slice, layer)`, ascending.
pub fn feasible_controls<S: Scalar>(scenario: &Scenario<S>, slice: u32, layer: u32, level: u32) -> Result<Vec<S>> {
    let key = PairKey::new(slice, layer);
    let pair = scenario.pair(key)?;
    let idx = pair.level_index(key, level)?;
    Ok(pair
        .domain
        .feasible_control_indices(idx)
        .map(|k| pair.domain.control_grid[k].clone())
        .collect())
}
