//! Finite populations carrying a fair and an unfair label distribution per
//! individual.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("a label set needs at least two labels, got {0}")]
    TooFewLabels(usize),
    #[error("label names must be non-empty")]
    EmptyLabel,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("an instance needs at least one group")]
    NoGroups,
    #[error("duplicate group {0:?}")]
    DuplicateGroup(String),
    #[error("duplicate individual id {0:?}")]
    DuplicateId(String),
    #[error("individual {id:?} belongs to unknown group {group:?}")]
    UnknownGroup { id: String, group: String },
    #[error("group {0:?} has no members")]
    EmptyGroup(String),
    #[error("individual {id:?} has non-positive weight {weight}")]
    NonPositiveWeight { id: String, weight: String },
    #[error("weights sum to {0}, not 1 (enable weight normalization to rescale)")]
    WeightsDoNotSumToOne(String),
    #[error("individual {id:?}: {world} distribution invalid: {source}")]
    BadDistribution {
        id: String,
        world: World,
        source: ProbVectorError,
    },
    #[error("individual {0:?} has no unfair distribution")]
    MissingUnfair(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProbVectorError {
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("entry {index} is {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: String },
    #[error("entries sum to {0}, not exactly 1")]
    BadSum(String),
}

/// Which conditional distribution a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum World {
    Fair,
    Unfair,
}

impl World {
    pub fn other(self) -> World {
        match self {
            World::Fair => World::Unfair,
            World::Unfair => World::Fair,
        }
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            World::Fair => "fair",
            World::Unfair => "unfair",
        })
    }
}

/// Ordered, named categorical labels `y_1 .. y_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, InstanceError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(InstanceError::TooFewLabels(labels.len()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if l.trim().is_empty() {
                return Err(InstanceError::EmptyLabel);
            }
            if !seen.insert(l.as_str()) {
                return Err(InstanceError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.labels.len() == 2
    }

    pub fn name(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }
}

/// A point of the probability simplex with exact entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(#[serde(with = "rational::serde_rational_vec")] Vec<Rational>);

impl ProbVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self, ProbVectorError> {
        let mut sum = Rational::zero();
        for (index, v) in entries.iter().enumerate() {
            if v.is_negative() || *v > Rational::one() {
                return Err(ProbVectorError::OutOfRange {
                    index,
                    value: rational::format(v),
                });
            }
            sum += v;
        }
        if !sum.is_one() {
            return Err(ProbVectorError::BadSum(rational::format(&sum)));
        }
        Ok(Self(entries))
    }

    pub fn with_len(entries: Vec<Rational>, n: usize) -> Result<Self, ProbVectorError> {
        if entries.len() != n {
            return Err(ProbVectorError::WrongLength {
                expected: n,
                got: entries.len(),
            });
        }
        Self::new(entries)
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut v = vec![Rational::zero(); n];
        v[index] = Rational::one();
        Self(v)
    }

    /// Uniform mass over `support`, which must be non-empty.
    pub fn uniform_over(n: usize, support: &[usize]) -> Self {
        assert!(!support.is_empty(), "uniform_over needs a non-empty support");
        let share = Rational::new(1.into(), (support.len() as i64).into());
        let mut v = vec![Rational::zero(); n];
        for &i in support {
            v[i] = share.clone();
        }
        Self(v)
    }

    /// Pointwise `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &ProbVector, t: &Rational) -> ProbVector {
        let s = Rational::one() - t;
        ProbVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a * &s + b * t)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }
}

impl fmt::Display for ProbVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&rational::format(v))?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub id: String,
    pub group: String,
    pub weight: Rational,
    pub p_fair: ProbVector,
    pub p_unfair: ProbVector,
}

impl Individual {
    pub fn probs(&self, world: World) -> &ProbVector {
        match world {
            World::Fair => &self.p_fair,
            World::Unfair => &self.p_unfair,
        }
    }
}

/// Unvalidated input for [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub labels: Vec<String>,
    pub groups: Vec<String>,
    pub individuals: Vec<RawIndividual>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawIndividual {
    pub id: String,
    pub group: String,
    pub weight: Rational,
    pub p_fair: Vec<Rational>,
    pub p_unfair: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Rescale weights to sum to one instead of rejecting them.
    pub normalize_weights: bool,
}

/// A validated finite population. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    labels: LabelSet,
    groups: Vec<String>,
    individuals: Vec<Individual>,
    index: HashMap<String, usize>,
}

pub fn validate_instance(raw: RawInstance, options: ValidateOptions) -> Result<Instance, InstanceError> {
    let labels = LabelSet::new(raw.labels)?;
    if raw.groups.is_empty() {
        return Err(InstanceError::NoGroups);
    }
    let mut group_set = HashSet::new();
    for g in &raw.groups {
        if !group_set.insert(g.as_str()) {
            return Err(InstanceError::DuplicateGroup(g.clone()));
        }
    }
    let n = labels.len();
    let mut index = HashMap::new();
    let mut individuals = Vec::with_capacity(raw.individuals.len());
    for (pos, ind) in raw.individuals.into_iter().enumerate() {
        if index.insert(ind.id.clone(), pos).is_some() {
            return Err(InstanceError::DuplicateId(ind.id));
        }
        if !group_set.contains(ind.group.as_str()) {
            return Err(InstanceError::UnknownGroup {
                id: ind.id,
                group: ind.group,
            });
        }
        if !ind.weight.is_positive() {
            return Err(InstanceError::NonPositiveWeight {
                weight: rational::format(&ind.weight),
                id: ind.id,
            });
        }
        let bad = |world, source| InstanceError::BadDistribution {
            id: ind.id.clone(),
            world,
            source,
        };
        let p_fair = ProbVector::with_len(ind.p_fair, n).map_err(|e| bad(World::Fair, e))?;
        let p_unfair = match ind.p_unfair {
            Some(v) => ProbVector::with_len(v, n).map_err(|e| bad(World::Unfair, e))?,
            None => return Err(InstanceError::MissingUnfair(ind.id)),
        };
        individuals.push(Individual {
            id: ind.id,
            group: ind.group,
            weight: ind.weight,
            p_fair,
            p_unfair,
        });
    }
    for g in &raw.groups {
        if !individuals.iter().any(|i| &i.group == g) {
            return Err(InstanceError::EmptyGroup(g.clone()));
        }
    }
    let total: Rational = individuals.iter().map(|i| &i.weight).sum();
    if !total.is_one() {
        if options.normalize_weights && total.is_positive() {
            for i in &mut individuals {
                i.weight = &i.weight / &total;
            }
        } else {
            return Err(InstanceError::WeightsDoNotSumToOne(rational::format(&total)));
        }
    }
    Ok(Instance {
        labels,
        groups: raw.groups,
        individuals,
        index,
    })
}

impl Instance {
    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn has_group(&self, group: &str) -> bool {
        self.groups.iter().any(|g| g == group)
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn individual(&self, id: &str) -> Option<&Individual> {
        self.index.get(id).map(|&i| &self.individuals[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Members of `group` in instance order.
    pub fn members<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a Individual> + 'a {
        self.individuals.iter().filter(move |i| i.group == group)
    }

    /// Replaces every unfair distribution. Used by the biasing module; the
    /// caller guarantees the vectors are valid and in instance order.
    pub(crate) fn with_unfair(&self, p_unfair: Vec<ProbVector>) -> Instance {
        let mut out = self.clone();
        for (ind, p) in out.individuals.iter_mut().zip(p_unfair) {
            ind.p_unfair = p;
        }
        out
    }

    /// Back to unvalidated form (useful for serialization and edits).
    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            labels: self.labels.names().to_vec(),
            groups: self.groups.clone(),
            individuals: self
                .individuals
                .iter()
                .map(|i| RawIndividual {
                    id: i.id.clone(),
                    group: i.group.clone(),
                    weight: i.weight.clone(),
                    p_fair: i.p_fair.entries().to_vec(),
                    p_unfair: Some(i.p_unfair.entries().to_vec()),
                })
                .collect(),
        }
    }
}
