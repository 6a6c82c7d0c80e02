//! Scenario files and plan documents.
//!
//! A scenario file is one JSON object with `slices`, `layers` and `pairs`.
//! Every numeric entry may be a JSON number or a decimal string; strings
//! are parsed exactly when the target scalar is rational. Per-level tables
//! are objects keyed by level id, the operations table is keyed by control
//! value:
//!
//! ```json
//! {"slices": [{"id": 1, "name": "video", "type": "eMBB", "q_min": "3", "s_min": "2"}],
//!  "layers": [{"id": 1, "name": "phy", "stack_position": 1}],
//!  "pairs": [{"slice": 1, "layer": 1,
//!    "domain": {"levels": [{"id": 1, "label": "logical"}, {"id": 2, "label": "air-gap"}],
//!               "t_max": {"1": "0.4", "2": "0.8"}, "control_grid": ["0", "0.4", "0.8"]},
//!    "costs": {"physical": {"1": "2", "2": "5"}, "virtual": {"1": "1", "2": "3"},
//!              "operations": {"0": "3", "0.4": "2", "0.8": "1"}},
//!    "quality": {"phi": {"1": "1", "2": "2"}, "physical_bonus": "0"},
//!    "security": {"alpha": "1", "sigma": {"1": "0.5", "2": "1.0"}, "physical_bonus": "0"}}]}
//! ```
//!
//! Slices with a standard `type` may omit `q_min`/`s_min` to take the
//! preset defaults. Missing sections are reported as `STRUCT` violations;
//! JSON syntax errors carry line and column.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::catalog::builtin_slice_types_in;
use crate::error::{Error, Result};
use crate::evaluator::evaluate_slice;
use crate::model::Assignment;
use crate::model::{
    AxiomCode, CostTables, IsolationDomain, IsolationLevel, LayerChoice, LayerSpec, PairKey, PairModel, QualityModel,
    Scenario, SecurityModel, SliceSpec, SliceType, ValidationReport, Violation,
};
use crate::scalar::{approx_eq, Scalar};
use crate::solution::{SolveResult, SolveStatus};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Text(String),
    Number(serde_json::Number),
}

impl RawNumber {
    fn text(&self) -> String {
        match self {
            RawNumber::Text(t) => t.clone(),
            RawNumber::Number(n) => n.to_string(),
        }
    }
}

type RawTable = BTreeMap<String, RawNumber>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    slices: Option<Vec<RawSlice>>,
    layers: Option<Vec<RawLayer>>,
    pairs: Option<Vec<RawPair>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    id: u32,
    name: Option<String>,
    #[serde(rename = "type")]
    slice_type: Option<SliceType>,
    q_min: Option<RawNumber>,
    s_min: Option<RawNumber>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    id: u32,
    name: Option<String>,
    stack_position: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    slice: u32,
    layer: u32,
    domain: Option<RawDomain>,
    costs: Option<RawCosts>,
    quality: Option<RawQuality>,
    security: Option<RawSecurity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    levels: Option<Vec<RawLevel>>,
    t_max: Option<RawTable>,
    control_grid: Option<Vec<RawNumber>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    id: u32,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCosts {
    physical: Option<RawTable>,
    #[serde(rename = "virtual")]
    virtualized: Option<RawTable>,
    operations: Option<RawTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuality {
    phi: Option<RawTable>,
    physical_bonus: Option<RawNumber>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSecurity {
    alpha: Option<RawNumber>,
    sigma: Option<RawTable>,
    physical_bonus: Option<RawNumber>,
}

/// Collects structural problems while converting the raw document.
struct Converter {
    report: ValidationReport,
}

impl Converter {
    fn fail(&mut self, pair: Option<PairKey>, detail: impl Into<String>) {
        self.report.push(Violation::new(AxiomCode::Struct, pair, detail));
    }

    fn number<S: Scalar>(&mut self, pair: Option<PairKey>, what: &str, raw: &RawNumber) -> S {
        let text = raw.text();
        S::parse_decimal(&text).unwrap_or_else(|| {
            self.fail(pair, format!("{what}: {text:?} is not a decimal number"));
            S::zero()
        })
    }

    fn required<'a, T>(&mut self, pair: Option<PairKey>, what: &str, value: Option<&'a T>) -> Option<&'a T> {
        if value.is_none() {
            self.fail(pair, format!("missing {what}"));
        }
        value
    }

    /// Table keyed by level id, returned in level order.
    fn level_table<S: Scalar>(&mut self, key: PairKey, what: &str, table: Option<&RawTable>, levels: &[u32]) -> Vec<S> {
        let Some(table) = self.required(Some(key), what, table) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(levels.len());
        for id in levels {
            match table.get(&id.to_string()) {
                Some(raw) => out.push(self.number(Some(key), what, raw)),
                None => self.fail(Some(key), format!("{what} has no entry for level {id}")),
            }
        }
        for k in table.keys() {
            if !levels.iter().any(|id| id.to_string() == *k) {
                self.fail(Some(key), format!("{what} has an entry for unknown level {k:?}"));
            }
        }
        out
    }

    /// Table keyed by control value, returned in grid order.
    fn control_table<S: Scalar>(&mut self, key: PairKey, what: &str, table: Option<&RawTable>, grid: &[S]) -> Vec<S> {
        let Some(table) = self.required(Some(key), what, table) else {
            return Vec::new();
        };
        let mut entries: Vec<(String, Option<S>, S)> = Vec::new();
        for (k, raw) in table {
            let at = S::parse_decimal(k);
            if at.is_none() {
                self.fail(Some(key), format!("{what}: key {k:?} is not a control value"));
            }
            let v = self.number(Some(key), what, raw);
            entries.push((k.clone(), at, v));
        }
        let mut out = Vec::with_capacity(grid.len());
        for t in grid {
            match entries
                .iter()
                .find(|(_, at, _)| at.as_ref().is_some_and(|a| approx_eq(a, t)))
            {
                Some((_, _, v)) => out.push(v.clone()),
                None => self.fail(Some(key), format!("{what} has no entry for control {t}")),
            }
        }
        for (k, at, _) in &entries {
            if let Some(a) = at {
                if !grid.iter().any(|t| approx_eq(a, t)) {
                    self.fail(
                        Some(key),
                        format!("{what} has an entry for control {k} outside the grid"),
                    );
                }
            }
        }
        out
    }

    fn pair<S: Scalar>(&mut self, raw: &RawPair) -> PairModel<S> {
        let key = PairKey::new(raw.slice, raw.layer);
        let k = Some(key);
        let domain = self.required(k, "domain", raw.domain.as_ref());
        let levels: Vec<IsolationLevel> = domain
            .and_then(|d| self.required(k, "domain.levels", d.levels.as_ref()))
            .map(|ls| {
                ls.iter()
                    .map(|l| IsolationLevel::new(l.id, l.label.clone().unwrap_or_else(|| format!("level-{}", l.id))))
                    .collect()
            })
            .unwrap_or_default();
        let ids: Vec<u32> = levels.iter().map(|l| l.id).collect();
        let control_grid: Vec<S> = domain
            .and_then(|d| self.required(k, "domain.control_grid", d.control_grid.as_ref()))
            .map(|g| g.iter().map(|t| self.number(k, "control_grid", t)).collect())
            .unwrap_or_default();
        let t_max = match domain {
            Some(d) => self.level_table(key, "domain.t_max", d.t_max.as_ref(), &ids),
            None => Vec::new(),
        };

        let costs = self.required(k, "costs", raw.costs.as_ref());
        let (physical, virtualized, operations) = match costs {
            Some(c) => (
                self.level_table(key, "costs.physical", c.physical.as_ref(), &ids),
                self.level_table(key, "costs.virtual", c.virtualized.as_ref(), &ids),
                self.control_table(key, "costs.operations", c.operations.as_ref(), &control_grid),
            ),
            None => Default::default(),
        };

        let quality = self.required(k, "quality", raw.quality.as_ref());
        let (phi, q_bonus) = match quality {
            Some(q) => (
                self.level_table(key, "quality.phi", q.phi.as_ref(), &ids),
                q.physical_bonus
                    .as_ref()
                    .map_or_else(S::zero, |b| self.number(k, "quality.physical_bonus", b)),
            ),
            None => (Vec::new(), S::zero()),
        };

        let security = self.required(k, "security", raw.security.as_ref());
        let (alpha, sigma, s_bonus) = match security {
            Some(s) => (
                self.required(k, "security.alpha", s.alpha.as_ref())
                    .map_or_else(S::zero, |a| self.number(k, "security.alpha", a)),
                self.level_table(key, "security.sigma", s.sigma.as_ref(), &ids),
                s.physical_bonus
                    .as_ref()
                    .map_or_else(S::zero, |b| self.number(k, "security.physical_bonus", b)),
            ),
            None => (S::zero(), Vec::new(), S::zero()),
        };

        PairModel {
            domain: IsolationDomain {
                levels,
                t_max,
                control_grid,
            },
            costs: CostTables {
                physical,
                virtualized,
                operations,
            },
            quality: QualityModel {
                phi,
                physical_bonus: q_bonus,
            },
            security: SecurityModel {
                alpha,
                sigma,
                physical_bonus: s_bonus,
            },
        }
    }

    fn slice<S: Scalar>(&mut self, raw: &RawSlice) -> SliceSpec<S> {
        let slice_type = raw.slice_type.unwrap_or(SliceType::Custom);
        let preset = builtin_slice_types_in::<S>()
            .into_iter()
            .find(|p| p.slice_type == slice_type);
        let mut minimum = |what: &str, value: Option<&RawNumber>, default: Option<S>| match (value, default) {
            (Some(v), _) => self.number(None, what, v),
            (None, Some(d)) => d,
            (None, None) => {
                self.fail(
                    None,
                    format!("slice {}: missing {what} (required for custom slices)", raw.id),
                );
                S::zero()
            }
        };
        let q_min = minimum("q_min", raw.q_min.as_ref(), preset.as_ref().map(|p| p.q_min.clone()));
        let s_min = minimum("s_min", raw.s_min.as_ref(), preset.as_ref().map(|p| p.s_min.clone()));
        SliceSpec {
            id: raw.id,
            name: raw.name.clone().unwrap_or_else(|| format!("slice-{}", raw.id)),
            slice_type,
            q_min,
            s_min,
        }
    }
}

/// Parses a scenario document. Returns [`Error::Parse`] for malformed JSON
/// and [`Error::InvalidScenario`] with `STRUCT` violations for missing or
/// inconsistent sections. Axioms are not checked here.
pub fn parse_scenario<S: Scalar>(text: &str) -> Result<Scenario<S>> {
    let raw: RawScenario = serde_json::from_str(text)?;
    let mut conv = Converter {
        report: ValidationReport::default(),
    };
    let raw_slices = conv.required(None, "slices", raw.slices.as_ref());
    let raw_layers = conv.required(None, "layers", raw.layers.as_ref());
    let raw_pairs = conv.required(None, "pairs", raw.pairs.as_ref());

    let slices = raw_slices
        .map(|ss| ss.iter().map(|s| conv.slice(s)).collect())
        .unwrap_or_default();
    let layers = raw_layers
        .map(|ls| {
            ls.iter()
                .map(|l| LayerSpec {
                    id: l.id,
                    name: l.name.clone().unwrap_or_else(|| format!("layer-{}", l.id)),
                    stack_position: l.stack_position.unwrap_or(l.id),
                })
                .collect()
        })
        .unwrap_or_default();
    let mut pairs = BTreeMap::new();
    for raw_pair in raw_pairs.into_iter().flatten() {
        let key = PairKey::new(raw_pair.slice, raw_pair.layer);
        let model = conv.pair(raw_pair);
        if pairs.insert(key, model).is_some() {
            conv.fail(Some(key), "pair listed more than once");
        }
    }
    if conv.report.is_valid() {
        Ok(Scenario { slices, layers, pairs })
    } else {
        Err(Error::InvalidScenario(conv.report))
    }
}

pub fn read_scenario<S: Scalar>(path: &Path) -> Result<Scenario<S>> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

fn table_by_level<S: Scalar>(levels: &[IsolationLevel], values: &[S]) -> Value {
    let mut m = Map::new();
    for (l, v) in levels.iter().zip(values) {
        m.insert(l.id.to_string(), Value::String(v.to_string()));
    }
    Value::Object(m)
}

/// Serializes a scenario in the file format above, numbers as strings.
pub fn scenario_to_json<S: Scalar>(scenario: &Scenario<S>) -> String {
    let text = |v: &S| Value::String(v.to_string());
    let slices: Vec<Value> = scenario
        .slices
        .iter()
        .map(|s| {
            json!({"id": s.id, "name": s.name, "type": s.slice_type,
                   "q_min": text(&s.q_min), "s_min": text(&s.s_min)})
        })
        .collect();
    let layers: Vec<Value> = scenario
        .layers
        .iter()
        .map(|l| json!({"id": l.id, "name": l.name, "stack_position": l.stack_position}))
        .collect();
    let pairs: Vec<Value> = scenario
        .pairs
        .iter()
        .map(|(key, p)| {
            let levels = &p.domain.levels;
            let mut ops = Map::new();
            for (t, c) in p.domain.control_grid.iter().zip(&p.costs.operations) {
                ops.insert(t.to_string(), text(c));
            }
            json!({
                "slice": key.slice,
                "layer": key.layer,
                "domain": {
                    "levels": levels.iter().map(|l| json!({"id": l.id, "label": l.label})).collect::<Vec<_>>(),
                    "t_max": table_by_level(levels, &p.domain.t_max),
                    "control_grid": p.domain.control_grid.iter().map(text).collect::<Vec<_>>(),
                },
                "costs": {
                    "physical": table_by_level(levels, &p.costs.physical),
                    "virtual": table_by_level(levels, &p.costs.virtualized),
                    "operations": Value::Object(ops),
                },
                "quality": {
                    "phi": table_by_level(levels, &p.quality.phi),
                    "physical_bonus": text(&p.quality.physical_bonus),
                },
                "security": {
                    "alpha": text(&p.security.alpha),
                    "sigma": table_by_level(levels, &p.security.sigma),
                    "physical_bonus": text(&p.security.physical_bonus),
                },
            })
        })
        .collect();
    let doc = json!({"slices": slices, "layers": layers, "pairs": pairs});
    serde_json::to_string_pretty(&doc).expect("JSON values always serialize") + "\n"
}

/// Output rounding: hides binary noise such as `0.30000000000000004`.
pub(crate) fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanLayer {
    pub layer: u32,
    pub layer_name: String,
    pub isolation: u32,
    pub isolation_label: String,
    pub tenant_control: f64,
    pub mno_control: f64,
    pub virtualized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSlice {
    pub slice: u32,
    pub name: String,
    pub cost: f64,
    pub quality: f64,
    pub security: f64,
    pub q_min: f64,
    pub s_min: f64,
    pub layers: Vec<PlanLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleSlice {
    pub slice: u32,
    /// `"qos"` and/or `"security"`; `"qos+security"` when each is attainable
    /// on its own but not together.
    pub unsatisfiable: Vec<String>,
    pub q_min: f64,
    pub max_quality: f64,
    pub s_min: f64,
    pub max_security: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanLimit {
    pub best_bound: f64,
    pub gap: Option<f64>,
    pub nodes: u64,
}

/// Solver output as written by `solve`. Contains no timing or method
/// information so that both solvers produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub slices: Vec<PlanSlice>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub infeasible: Vec<InfeasibleSlice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<PlanLimit>,
}

impl PlanDocument {
    pub fn from_result<S: Scalar>(scenario: &Scenario<S>, result: &SolveResult<S>) -> Result<Self> {
        let f = |v: &S| tidy(v.to_f64_lossy());
        let mut slices = Vec::new();
        if let Some(a) = &result.assignment {
            for spec in &scenario.slices {
                let eval = evaluate_slice(scenario, spec.id, a)?;
                let mut layers = Vec::new();
                for key in scenario.slice_pairs(spec.id) {
                    let choice = a.choice(key)?;
                    let pair = scenario.pair(key)?;
                    layers.push(PlanLayer {
                        layer: key.layer,
                        layer_name: scenario
                            .layers
                            .iter()
                            .find(|l| l.id == key.layer)
                            .map_or_else(String::new, |l| l.name.clone()),
                        isolation: choice.level,
                        isolation_label: pair
                            .domain
                            .levels
                            .iter()
                            .find(|l| l.id == choice.level)
                            .map_or_else(String::new, |l| l.label.clone()),
                        tenant_control: f(&choice.control),
                        mno_control: f(&choice.mno_control()),
                        virtualized: choice.virtualized,
                    });
                }
                slices.push(PlanSlice {
                    slice: spec.id,
                    name: spec.name.clone(),
                    cost: f(&eval.cost),
                    quality: f(&eval.quality),
                    security: f(&eval.security),
                    q_min: f(&spec.q_min),
                    s_min: f(&spec.s_min),
                    layers,
                });
            }
        }
        let infeasible = result
            .infeasible
            .iter()
            .map(|d| {
                let mut unsatisfiable = Vec::new();
                if !d.qos_attainable() {
                    unsatisfiable.push("qos".to_string());
                }
                if !d.security_attainable() {
                    unsatisfiable.push("security".to_string());
                }
                if unsatisfiable.is_empty() {
                    unsatisfiable.push("qos+security".to_string());
                }
                InfeasibleSlice {
                    slice: d.slice,
                    unsatisfiable,
                    q_min: f(&d.q_min),
                    max_quality: f(&d.max_quality),
                    s_min: f(&d.s_min),
                    max_security: f(&d.max_security),
                }
            })
            .collect();
        let limit = result.limit.as_ref().map(|l| PlanLimit {
            best_bound: f(&l.best_bound),
            gap: l.gap.as_ref().map(f),
            nodes: result.stats.nodes,
        });
        Ok(PlanDocument {
            status: result.status,
            objective: result.objective.as_ref().map(f),
            slices,
            infeasible,
            limit,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the assignment against `scenario`, snapping controls to the
    /// nearest grid value within 1e-9.
    pub fn assignment<S: Scalar>(&self, scenario: &Scenario<S>) -> Result<Assignment<S>> {
        let mut a = Assignment::new();
        for s in &self.slices {
            for l in &s.layers {
                let key = PairKey::new(s.slice, l.layer);
                let pair = scenario.pair(key)?;
                let control = pair
                    .domain
                    .control_grid
                    .iter()
                    .find(|t| (t.to_f64_lossy() - l.tenant_control).abs() <= 1e-9)
                    .ok_or_else(|| Error::ControlNotOnGrid {
                        pair: key,
                        control: l.tenant_control.to_string(),
                    })?;
                a.set(key, LayerChoice::new(l.isolation, control.clone(), l.virtualized));
            }
        }
        Ok(a)
    }
}

impl fmt::Display for PlanDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "status {}", self.status)?;
        if let Some(obj) = self.objective {
            write!(f, ", objective {obj}")?;
        }
        writeln!(f)?;
        for s in &self.slices {
            writeln!(
                f,
                "slice {} ({}): cost {}, q {} (min {}), s {} (min {})",
                s.slice, s.name, s.cost, s.quality, s.q_min, s.security, s.s_min
            )?;
            for l in &s.layers {
                writeln!(
                    f,
                    "  layer {} ({}): level {} ({}), tenant {}, mno {}, {}",
                    l.layer,
                    l.layer_name,
                    l.isolation,
                    l.isolation_label,
                    l.tenant_control,
                    l.mno_control,
                    if l.virtualized { "virtual" } else { "physical" }
                )?;
            }
        }
        for d in &self.infeasible {
            writeln!(
                f,
                "slice {} infeasible ({}): max q {} vs q_min {}, max s {} vs s_min {}",
                d.slice,
                d.unsatisfiable.join(", "),
                d.max_quality,
                d.q_min,
                d.max_security,
                d.s_min
            )?;
        }
        if let Some(l) = &self.limit {
            writeln!(f, "stopped after {} nodes, best bound {}", l.nodes, l.best_bound)?;
            if let Some(gap) = l.gap {
                writeln!(f, "gap {gap}")?;
            }
        }
        Ok(())
    }
}
