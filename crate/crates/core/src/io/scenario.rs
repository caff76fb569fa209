//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "labels": ["y=1", "y=0"],
//!   "groups": ["r=0", "r=1"],
//!   "individuals": [
//!     {"id": "a", "group": "r=0", "weight": "1/2", "p_fair": ["1/4", "3/4"], "p_unfair": ["0.2", "0.8"]}
//!   ],
//!   "decisions": {
//!     "t": {"kind": "threshold", "world": "unfair", "label": "y=1", "thresholds": {"r=0": "2/100"}},
//!     "s": {"kind": "scheme", "world": "fair", "scheme": "y=1:2, y=0:98", "tie": "lowest-index"},
//!     "e": {"kind": "extensional", "assignment": {"a": ["1", "0"]}}
//!   }
//! }
//! ```
//!
//! Every individual carries `p_unfair`, or none does and a `bias` object
//! (group name to transform) derives it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bias::{apply_bias, BiasError, BiasSpec};
use crate::decision::{Decision, Scope};
use crate::instance::{validate_instance, Instance, InstanceError, ProbVector, RawIndividual, RawInstance, ValidateOptions, World};
use crate::rational::{self, Rational};
use crate::scenarios::Scenario;
use crate::scheme::{scheme_decision, TiePolicy, WeightScheme};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("parse error at {field} (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("scenario has both p_unfair and a bias spec; give exactly one")]
    UnfairAndBias,
    #[error("scenario has neither p_unfair nor a bias spec")]
    NoUnfairSource,
    #[error("p_unfair must be given for every individual or none (missing for {0:?})")]
    PartialUnfair(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error("decision {name:?}: {message}")]
    Decision { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub labels: Vec<String>,
    pub groups: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize_weights: bool,
    pub individuals: Vec<IndividualEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub decisions: BTreeMap<String, DecisionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndividualEntry {
    pub id: String,
    pub group: String,
    #[serde(with = "rational::serde_rational")]
    pub weight: Rational,
    #[serde(with = "rational::serde_rational_vec")]
    pub p_fair: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "optional_vec")]
    pub p_unfair: Option<Vec<Rational>>,
}

mod optional_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => rational::serde_rational_vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        rational::serde_rational_vec::deserialize(d).map(Some)
    }
}

/// A named decision as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecisionEntry {
    Extensional { assignment: Decision },
    /// Point mass on `label` where `p_world(label) >= threshold[group]`,
    /// else on `otherwise` (default: the other label of a binary set).
    Threshold {
        world: World,
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        otherwise: Option<String>,
        thresholds: BTreeMap<String, ThresholdValue>,
    },
    Scheme {
        world: World,
        /// `label:weight` entries, tiers separated by `>`.
        scheme: String,
        #[serde(default)]
        tie: TiePolicy,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdValue(#[serde(with = "rational::serde_rational")] pub Rational);

fn decision_error(name: &str, message: impl ToString) -> ScenarioFileError {
    ScenarioFileError::Decision {
        name: name.to_string(),
        message: message.to_string(),
    }
}

fn materialize(instance: &Instance, name: &str, entry: &DecisionEntry) -> Result<Decision, ScenarioFileError> {
    let labels = instance.labels();
    let label_index = |l: &str| {
        labels
            .index_of(l)
            .ok_or_else(|| decision_error(name, format!("unknown label {l:?}")))
    };
    match entry {
        DecisionEntry::Extensional { assignment } => {
            for (id, _) in assignment.iter() {
                if instance.individual(id).is_none() {
                    return Err(decision_error(name, format!("unknown individual {id:?}")));
                }
            }
            assignment
                .check_covers(instance, &Scope::All)
                .map_err(|e| decision_error(name, e))?;
            Ok(assignment.clone())
        }
        DecisionEntry::Threshold {
            world,
            label,
            otherwise,
            thresholds,
        } => {
            let yes = label_index(label)?;
            let no = match otherwise {
                Some(l) => label_index(l)?,
                None if labels.is_binary() => 1 - yes,
                None => return Err(decision_error(name, "`otherwise` is required for more than two labels")),
            };
            for g in thresholds.keys() {
                if !instance.has_group(g) {
                    return Err(decision_error(name, format!("unknown group {g:?}")));
                }
            }
            let n = instance.n_labels();
            let mut d = Decision::default();
            for ind in instance.individuals() {
                let t = thresholds
                    .get(&ind.group)
                    .ok_or_else(|| decision_error(name, format!("no threshold for group {:?}", ind.group)))?;
                let pick = if *ind.probs(*world).get(yes) >= t.0 { yes } else { no };
                d.set(ind.id.clone(), ProbVector::point_mass(n, pick));
            }
            Ok(d)
        }
        DecisionEntry::Scheme { world, scheme, tie } => {
            let scheme = WeightScheme::parse(labels, scheme).map_err(|e| decision_error(name, e))?;
            scheme_decision(instance, &scheme, *world, &Scope::All, *tie).map_err(|e| decision_error(name, e))
        }
    }
}

/// Validates a parsed file into a scenario.
pub fn scenario_from_file(file: ScenarioFile) -> Result<Scenario, ScenarioFileError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioFileError::SchemaVersion {
            found: file.schema_version,
        });
    }
    let with_unfair = file.individuals.iter().filter(|i| i.p_unfair.is_some()).count();
    match (&file.bias, with_unfair) {
        (Some(_), k) if k > 0 => return Err(ScenarioFileError::UnfairAndBias),
        (None, 0) => return Err(ScenarioFileError::NoUnfairSource),
        (None, k) if k < file.individuals.len() => {
            let missing = file.individuals.iter().find(|i| i.p_unfair.is_none()).expect("some missing");
            return Err(ScenarioFileError::PartialUnfair(missing.id.clone()));
        }
        _ => {}
    }
    let raw = RawInstance {
        labels: file.labels,
        groups: file.groups,
        individuals: file
            .individuals
            .into_iter()
            .map(|i| RawIndividual {
                p_unfair: Some(i.p_unfair.unwrap_or_else(|| i.p_fair.clone())),
                id: i.id,
                group: i.group,
                weight: i.weight,
                p_fair: i.p_fair,
            })
            .collect(),
    };
    let mut instance = validate_instance(
        raw,
        ValidateOptions {
            normalize_weights: file.normalize_weights,
        },
    )?;
    if let Some(spec) = &file.bias {
        instance = apply_bias(&instance, spec)?;
    }
    let decisions = file
        .decisions
        .iter()
        .map(|(name, entry)| Ok((name.clone(), materialize(&instance, name, entry)?)))
        .collect::<Result<BTreeMap<_, _>, ScenarioFileError>>()?;
    Ok(Scenario { instance, decisions })
}

/// Parses scenario JSON text, reporting the failing field path.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioFileError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ScenarioFileError::Parse {
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    scenario_from_file(file)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

/// File form of a scenario: explicit `p_unfair`, extensional decisions.
pub fn scenario_to_file(scenario: &Scenario) -> ScenarioFile {
    let raw = scenario.instance.to_raw();
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        labels: raw.labels,
        groups: raw.groups,
        normalize_weights: false,
        individuals: raw
            .individuals
            .into_iter()
            .map(|i| IndividualEntry {
                id: i.id,
                group: i.group,
                weight: i.weight,
                p_fair: i.p_fair,
                p_unfair: i.p_unfair,
            })
            .collect(),
        bias: None,
        decisions: scenario
            .decisions
            .iter()
            .map(|(k, d)| (k.clone(), DecisionEntry::Extensional { assignment: d.clone() }))
            .collect(),
    }
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    let mut s = serde_json::to_string_pretty(&scenario_to_file(scenario)).expect("scenario serializes");
    s.push('\n');
    s
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioFileError> {
    let path = path.as_ref();
    fs::write(path, scenario_to_json(scenario)).map_err(|source| ScenarioFileError::Write {
        path: path.to_path_buf(),
        source,
    })
}
