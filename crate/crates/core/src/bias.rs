//! Biasing processes: per-group maps from fair to unfair label
//! distributions, and recovery of the tabular map an instance implies.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::instance::{Individual, Instance, ProbVector};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BiasError {
    #[error("bias spec has no transform for group {0:?}")]
    UncoveredGroup(String),
    #[error("bias spec names unknown group {0:?}")]
    UnknownGroup(String),
    #[error("table for group {group:?} has no entry for fair vector {vector}")]
    UncoveredVector { group: String, vector: String },
    #[error("table entry has wrong length: {0}")]
    TableShape(String),
    #[error("{family} needs a binary label set, got {labels} labels")]
    BinaryOnly { family: &'static str, labels: usize },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("{0} has no exact rational value")]
    Inexact(String),
    #[error("zeroing label {label} leaves individual {id:?} with no mass")]
    AllZero { id: String, label: usize },
    #[error("zeroing refers to unknown individual {0:?}")]
    UnknownIndividual(String),
}

/// One group's fair-to-unfair transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `u_i ∝ f_i^gamma`.
    Tilt {
        #[serde(with = "rational::serde_rational")]
        gamma: Rational,
    },
    /// `u_i ∝ c_i f_i`.
    LabelScale {
        #[serde(with = "rational::serde_rational_vec")]
        factors: Vec<Rational>,
    },
    /// Binary: `u_1 = clamp(a f_1 + b, 0, 1)` on the first label.
    AffineClamp {
        #[serde(with = "rational::serde_rational")]
        a: Rational,
        #[serde(with = "rational::serde_rational")]
        b: Rational,
    },
    /// Binary: `u_1 = f_1^gamma` on the first label.
    Power {
        #[serde(with = "rational::serde_rational")]
        gamma: Rational,
    },
    /// Explicit association of fair vectors to unfair vectors.
    Table { entries: Vec<(ProbVector, ProbVector)> },
    /// Binary: flagged individuals get `u_1 = f_1 (1 - delta)`, others keep `f`.
    FeatureFlip {
        flagged: Vec<String>,
        #[serde(with = "rational::serde_rational")]
        delta: Rational,
    },
    /// Sets `label` to zero for the listed individuals and renormalizes.
    Zeroing { label: usize, region: Vec<String> },
}

impl Transform {
    /// Transforms whose output depends only on the fair vector.
    pub fn depends_only_on_fair(&self) -> bool {
        !matches!(self, Transform::FeatureFlip { .. } | Transform::Zeroing { .. })
    }

    fn validate(&self, n: usize) -> Result<(), BiasError> {
        let binary = |family| {
            if n == 2 {
                Ok(())
            } else {
                Err(BiasError::BinaryOnly { family, labels: n })
            }
        };
        match self {
            Transform::Identity | Transform::Table { .. } => Ok(()),
            Transform::Tilt { gamma } | Transform::Power { gamma } => {
                if let Transform::Power { .. } = self {
                    binary("power")?;
                }
                if gamma.is_positive() {
                    Ok(())
                } else {
                    Err(BiasError::Parameter(format!("gamma must be > 0, got {}", rational::format(gamma))))
                }
            }
            Transform::LabelScale { factors } => {
                if factors.len() != n {
                    return Err(BiasError::Parameter(format!(
                        "label_scale needs {n} factors, got {}",
                        factors.len()
                    )));
                }
                if factors.iter().any(|c| !c.is_positive()) {
                    return Err(BiasError::Parameter("label_scale factors must be > 0".into()));
                }
                Ok(())
            }
            Transform::AffineClamp { .. } => binary("affine_clamp"),
            Transform::FeatureFlip { delta, .. } => {
                binary("feature_flip")?;
                if delta.is_positive() && *delta < Rational::one() {
                    Ok(())
                } else {
                    Err(BiasError::Parameter(format!(
                        "feature_flip delta must be in (0, 1), got {}",
                        rational::format(delta)
                    )))
                }
            }
            Transform::Zeroing { label, .. } => {
                if *label < n {
                    Ok(())
                } else {
                    Err(BiasError::Parameter(format!("zeroing label {label} out of range")))
                }
            }
        }
    }

    fn apply(&self, ind: &Individual, group: &str) -> Result<ProbVector, BiasError> {
        let f = &ind.p_fair;
        let n = f.len();
        let binary_first = |u1: Rational| -> ProbVector {
            let u0 = Rational::one() - &u1;
            ProbVector::new(vec![u1, u0]).expect("binary vector in range")
        };
        Ok(match self {
            Transform::Identity => f.clone(),
            Transform::Tilt { gamma } => {
                let raw = f
                    .entries()
                    .iter()
                    .map(|v| {
                        rational::exact_pow(v, gamma).ok_or_else(|| {
                            BiasError::Inexact(format!("{}^{}", rational::format(v), rational::format(gamma)))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                normalize(raw)
            }
            Transform::LabelScale { factors } => {
                normalize(f.entries().iter().zip(factors).map(|(v, c)| v * c).collect())
            }
            Transform::AffineClamp { a, b } => {
                let v = a * f.get(0) + b;
                binary_first(v.clamp(Rational::zero(), Rational::one()))
            }
            Transform::Power { gamma } => {
                let v = rational::exact_pow(f.get(0), gamma).ok_or_else(|| {
                    BiasError::Inexact(format!("{}^{}", rational::format(f.get(0)), rational::format(gamma)))
                })?;
                binary_first(v)
            }
            Transform::Table { entries } => entries
                .iter()
                .find(|(from, _)| from == f)
                .map(|(_, to)| to.clone())
                .ok_or_else(|| BiasError::UncoveredVector {
                    group: group.to_string(),
                    vector: f.to_string(),
                })?,
            Transform::FeatureFlip { flagged, delta } => {
                if flagged.contains(&ind.id) {
                    binary_first(f.get(0) * (Rational::one() - delta))
                } else {
                    f.clone()
                }
            }
            Transform::Zeroing { label, region } => {
                if !region.contains(&ind.id) {
                    f.clone()
                } else {
                    let mut raw = f.entries().to_vec();
                    raw[*label] = Rational::zero();
                    if raw.iter().all(Zero::is_zero) {
                        return Err(BiasError::AllZero {
                            id: ind.id.clone(),
                            label: *label,
                        });
                    }
                    debug_assert_eq!(raw.len(), n);
                    normalize(raw)
                }
            }
        })
    }
}

fn normalize(raw: Vec<Rational>) -> ProbVector {
    let total: Rational = raw.iter().sum();
    ProbVector::new(raw.into_iter().map(|v| v / &total).collect()).expect("normalized vector")
}

/// Per-group transforms; every group of the instance must be covered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BiasSpec {
    pub groups: BTreeMap<String, Transform>,
}

impl BiasSpec {
    pub fn uniform(instance: &Instance, transform: Transform) -> Self {
        Self {
            groups: instance
                .groups()
                .iter()
                .map(|g| (g.clone(), transform.clone()))
                .collect(),
        }
    }

    pub fn with(mut self, group: impl Into<String>, transform: Transform) -> Self {
        self.groups.insert(group.into(), transform);
        self
    }
}

/// Recomputes every unfair distribution from the fair one. Fair
/// distributions, weights and groups are left untouched.
pub fn apply_bias(instance: &Instance, spec: &BiasSpec) -> Result<Instance, BiasError> {
    let n = instance.n_labels();
    for g in spec.groups.keys() {
        if !instance.has_group(g) {
            return Err(BiasError::UnknownGroup(g.clone()));
        }
    }
    for t in spec.groups.values() {
        t.validate(n)?;
        if let Transform::Table { entries } = t {
            for (a, b) in entries {
                if a.len() != n || b.len() != n {
                    return Err(BiasError::TableShape(format!("{a} -> {b}")));
                }
            }
        }
        if let Transform::Zeroing { region, .. } | Transform::FeatureFlip { flagged: region, .. } = t {
            if let Some(id) = region.iter().find(|id| instance.individual(id).is_none()) {
                return Err(BiasError::UnknownIndividual(id.clone()));
            }
        }
    }
    let mut unfair = Vec::with_capacity(instance.individuals().len());
    for ind in instance.individuals() {
        let t = spec
            .groups
            .get(&ind.group)
            .ok_or_else(|| BiasError::UncoveredGroup(ind.group.clone()))?;
        unfair.push(t.apply(ind, &ind.group)?);
    }
    Ok(instance.with_unfair(unfair))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    pub group: String,
    /// Distinct fair vectors (first occurrence order) and the unfair vector
    /// observed with them.
    pub entries: Vec<(ProbVector, ProbVector)>,
    pub representable: bool,
    /// Two members sharing a fair vector but not the unfair one.
    pub witness: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasTable {
    pub groups: Vec<GroupTable>,
    pub representable: bool,
}

impl BiasTable {
    pub fn group(&self, name: &str) -> Option<&GroupTable> {
        self.groups.iter().find(|g| g.group == name)
    }

    /// The table as a spec of `Table` transforms (only meaningful when
    /// representable).
    pub fn to_spec(&self) -> BiasSpec {
        BiasSpec {
            groups: self
                .groups
                .iter()
                .map(|g| (g.group.clone(), Transform::Table { entries: g.entries.clone() }))
                .collect(),
        }
    }
}

/// Reads off the per-group fair-to-unfair association of an instance.
pub fn infer_bias_table(instance: &Instance) -> BiasTable {
    let mut groups = Vec::new();
    for g in instance.groups() {
        let mut entries: Vec<(ProbVector, ProbVector)> = Vec::new();
        let mut owners: Vec<&str> = Vec::new();
        let mut witness = None;
        for ind in instance.members(g) {
            match entries.iter().position(|(f, _)| *f == ind.p_fair) {
                Some(k) => {
                    if entries[k].1 != ind.p_unfair && witness.is_none() {
                        witness = Some((owners[k].to_string(), ind.id.clone()));
                    }
                }
                None => {
                    entries.push((ind.p_fair.clone(), ind.p_unfair.clone()));
                    owners.push(&ind.id);
                }
            }
        }
        groups.push(GroupTable {
            group: g.clone(),
            entries,
            representable: witness.is_none(),
            witness,
        });
    }
    let representable = groups.iter().all(|g| g.representable);
    BiasTable { groups, representable }
}
