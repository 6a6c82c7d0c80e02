//! Slice-type presets, the isolation-level taxonomy and the eight-layer
//! security model used to annotate plans.
//!
//! Preset minima are normalized defaults. Only their ordering
//! (URLLC above mMTC above eMBB) is enforced.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::tidy;
use crate::model::{Assignment, IsolationLevel, Scenario, SliceType};
use crate::scalar::{lt_strict, Scalar};

/// Default requirement pair for a standard slice type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceTypePreset<S = f64> {
    pub slice_type: SliceType,
    pub q_min: S,
    pub s_min: S,
    pub description: String,
}

const PRESET_ROWS: [(SliceType, &str, &str, &str); 3] = [
    (
        SliceType::Embb,
        "1.0",
        "1.0",
        "enhanced mobile broadband: high throughput, best-effort reliability",
    ),
    (
        SliceType::Mmtc,
        "2.0",
        "1.5",
        "massive machine-type communications: dense low-rate devices",
    ),
    (
        SliceType::Urllc,
        "3.0",
        "2.0",
        "ultra-reliable low-latency communications: strictest reliability",
    ),
];

pub fn builtin_slice_types_in<S: Scalar>() -> Vec<SliceTypePreset<S>> {
    PRESET_ROWS
        .iter()
        .map(|(t, q, s, d)| SliceTypePreset {
            slice_type: *t,
            q_min: S::parse_decimal(q).expect("preset literal"),
            s_min: S::parse_decimal(s).expect("preset literal"),
            description: (*d).to_string(),
        })
        .collect()
}

/// eMBB, mMTC and URLLC presets, in that order.
pub fn builtin_slice_types() -> Vec<SliceTypePreset<f64>> {
    builtin_slice_types_in()
}

/// Checks `q_min(URLLC) > q_min(mMTC) > q_min(eMBB)` and the non-strict
/// counterpart for `s_min`.
pub fn validate_presets<S: Scalar>(presets: &[SliceTypePreset<S>]) -> Result<()> {
    let find = |t: SliceType| {
        presets
            .iter()
            .find(|p| p.slice_type == t)
            .ok_or_else(|| Error::InvalidPresets(format!("missing preset for {t}")))
    };
    let embb = find(SliceType::Embb)?;
    let mmtc = find(SliceType::Mmtc)?;
    let urllc = find(SliceType::Urllc)?;
    for (lo, hi) in [(embb, mmtc), (mmtc, urllc)] {
        if !lt_strict(&lo.q_min, &hi.q_min) {
            return Err(Error::InvalidPresets(format!(
                "q_min({}) = {} must exceed q_min({}) = {}",
                hi.slice_type, hi.q_min, lo.slice_type, lo.q_min
            )));
        }
        if lt_strict(&hi.s_min, &lo.s_min) {
            return Err(Error::InvalidPresets(format!(
                "s_min({}) = {} must be at least s_min({}) = {}",
                hi.slice_type, hi.s_min, lo.slice_type, lo.s_min
            )));
        }
    }
    Ok(())
}

/// Replaces preset minima; the result must keep the type ordering.
pub fn override_presets<S: Scalar>(
    mut presets: Vec<SliceTypePreset<S>>,
    overrides: &[(SliceType, Option<S>, Option<S>)],
) -> Result<Vec<SliceTypePreset<S>>> {
    for (t, q, s) in overrides {
        let preset = presets
            .iter_mut()
            .find(|p| p.slice_type == *t)
            .ok_or_else(|| Error::InvalidPresets(format!("no preset for {t}")))?;
        if let Some(q) = q {
            preset.q_min = q.clone();
        }
        if let Some(s) = s {
            preset.s_min = s.clone();
        }
    }
    validate_presets(&presets)?;
    Ok(presets)
}

/// Named isolation levels ordered by increasing isolation; ids are positions
/// starting at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolationTaxonomy {
    pub levels: Vec<IsolationLevel>,
}

impl IsolationTaxonomy {
    pub fn from_labels<I, L>(labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        IsolationTaxonomy {
            levels: labels
                .into_iter()
                .enumerate()
                .map(|(k, l)| IsolationLevel::new(k as u32 + 1, l))
                .collect(),
        }
    }

    /// Inserts an intermediate level directly below `above`.
    pub fn insert_below(&self, above: &str, label: impl Into<String>) -> Result<Self> {
        let pos = self.level(above)? as usize - 1;
        let mut labels: Vec<String> = self.levels.iter().map(|l| l.label.clone()).collect();
        labels.insert(pos, label.into());
        Ok(Self::from_labels(labels))
    }

    /// Level id of `label`.
    pub fn level(&self, label: &str) -> Result<u32> {
        self.levels
            .iter()
            .find(|l| l.label == label)
            .map(|l| l.id)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|l| l.label.as_str())
    }
}

/// `{1: logical, 2: air-gap}`.
pub fn isolation_taxonomy() -> IsolationTaxonomy {
    IsolationTaxonomy::from_labels(["logical", "air-gap"])
}

/// The model decision a security layer corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactConcept {
    /// Tagged by physically deployed layers (`v = 0`).
    PhysicalDeployment,
    /// Tagged by virtualized layers (`v = 1`).
    Virtualization,
    IsolationLevel,
    ControlSplit,
    OutOfScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerTaxonomyEntry {
    pub number: u8,
    pub numeral: &'static str,
    pub name: &'static str,
    pub description: &'static str,
    pub concept: ArtifactConcept,
}

pub const SECURITY_LAYERS: [LayerTaxonomyEntry; 8] = [
    LayerTaxonomyEntry {
        number: 1,
        numeral: "I",
        name: "Supply Chain",
        description: "provenance of hardware and software components",
        concept: ArtifactConcept::OutOfScope,
    },
    LayerTaxonomyEntry {
        number: 2,
        numeral: "II",
        name: "Physical Resources",
        description: "dedicated compute, storage and radio hardware",
        concept: ArtifactConcept::PhysicalDeployment,
    },
    LayerTaxonomyEntry {
        number: 3,
        numeral: "III",
        name: "Physical Infrastructure",
        description: "sites, racks and links hosting the physical resources",
        concept: ArtifactConcept::PhysicalDeployment,
    },
    LayerTaxonomyEntry {
        number: 4,
        numeral: "IV",
        name: "Virtual Resources",
        description: "virtual machines, containers and virtual network functions",
        concept: ArtifactConcept::Virtualization,
    },
    LayerTaxonomyEntry {
        number: 5,
        numeral: "V",
        name: "Virtual Infrastructure",
        description: "hypervisors, orchestration and virtual networking",
        concept: ArtifactConcept::Virtualization,
    },
    LayerTaxonomyEntry {
        number: 6,
        numeral: "VI",
        name: "Protocol and Service Chain",
        description: "composition of protocol functions into service chains",
        concept: ArtifactConcept::OutOfScope,
    },
    LayerTaxonomyEntry {
        number: 7,
        numeral: "VII",
        name: "RAN, Transport and Core",
        description: "isolation points separating slices across network domains",
        concept: ArtifactConcept::IsolationLevel,
    },
    LayerTaxonomyEntry {
        number: 8,
        numeral: "VIII",
        name: "Administrative Domain",
        description: "split of management control between tenant and operator",
        concept: ArtifactConcept::ControlSplit,
    },
];

pub fn security_layers() -> &'static [LayerTaxonomyEntry; 8] {
    &SECURITY_LAYERS
}

/// One decision tagged onto a security layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub slice: u32,
    pub layer: u32,
    pub layer_name: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportSection {
    pub numeral: &'static str,
    pub name: &'static str,
    pub concept: ArtifactConcept,
    pub entries: Vec<ReportEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Plan decisions grouped under the eight security layers, always in order
/// I to VIII.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerSecurityReport {
    pub sections: Vec<ReportSection>,
}

pub fn layer_security_report<S: Scalar>(
    scenario: &Scenario<S>,
    assignment: &Assignment<S>,
) -> Result<LayerSecurityReport> {
    scenario.check_assignment(assignment)?;
    let mut sections: Vec<ReportSection> = SECURITY_LAYERS
        .iter()
        .map(|e| ReportSection {
            numeral: e.numeral,
            name: e.name,
            concept: e.concept,
            entries: Vec::new(),
            note: (e.concept == ArtifactConcept::OutOfScope)
                .then(|| format!("{} is not represented by any planning decision", e.name)),
        })
        .collect();

    for n in scenario.slice_ids() {
        for key in scenario.slice_pairs(n) {
            let choice = assignment.choice(key)?;
            let pair = scenario.pair(key)?;
            let layer_name = scenario
                .layers
                .iter()
                .find(|l| l.id == key.layer)
                .map_or_else(String::new, |l| l.name.clone());
            let label = pair
                .domain
                .levels
                .iter()
                .find(|l| l.id == choice.level)
                .map_or("", |l| l.label.as_str());
            let entry = |detail: String| ReportEntry {
                slice: key.slice,
                layer: key.layer,
                layer_name: layer_name.clone(),
                detail,
            };
            let deployment = if choice.virtualized {
                "virtualized deployment"
            } else {
                "physical deployment"
            };
            for section in &mut sections {
                let detail = match section.concept {
                    ArtifactConcept::Virtualization if choice.virtualized => deployment.to_string(),
                    ArtifactConcept::PhysicalDeployment if !choice.virtualized => {
                        format!("{deployment} at isolation level {} ({label})", choice.level)
                    }
                    ArtifactConcept::IsolationLevel => {
                        format!("isolation level {} ({label})", choice.level)
                    }
                    ArtifactConcept::ControlSplit => format!(
                        "tenant control {}, operator control {}",
                        tidy(choice.control.to_f64_lossy()),
                        tidy(choice.mno_control().to_f64_lossy())
                    ),
                    _ => continue,
                };
                section.entries.push(entry(detail));
            }
        }
    }
    Ok(LayerSecurityReport { sections })
}

impl LayerSecurityReport {
    pub fn section(&self, numeral: &str) -> Option<&ReportSection> {
        self.sections.iter().find(|s| s.numeral == numeral)
    }
}

impl fmt::Display for LayerSecurityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sections {
            writeln!(f, "Layer {} - {}", s.numeral, s.name)?;
            if let Some(note) = &s.note {
                writeln!(f, "  note: {note}")?;
            }
            if s.entries.is_empty() && s.note.is_none() {
                writeln!(f, "  (no decisions)")?;
            }
            for e in &s.entries {
                writeln!(
                    f,
                    "  slice {} / layer {} ({}): {}",
                    e.slice, e.layer, e.layer_name, e.detail
                )?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Display for SliceTypePreset<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<6} q_min={:<5} s_min={:<5} {}",
            self.slice_type.to_string(),
            self.q_min.to_string(),
            self.s_min.to_string(),
            self.description
        )
    }
}
