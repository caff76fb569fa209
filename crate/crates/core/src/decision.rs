//! Extensional decisions: a predicted-label distribution per individual.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Individual, Instance, ProbVector};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecisionError {
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("decision has no assignment for individual {0:?}")]
    MissingAssignment(String),
    #[error("assignment for {id:?} has {got} entries, expected {expected}")]
    WrongLength { id: String, expected: usize, got: usize },
}

/// The part of the population a computation ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Group(String),
}

impl Scope {
    pub fn group(name: impl Into<String>) -> Self {
        Scope::Group(name.into())
    }

    /// Members in instance order.
    pub fn members<'a>(&self, instance: &'a Instance) -> Result<Vec<&'a Individual>, DecisionError> {
        match self {
            Scope::All => Ok(instance.individuals().iter().collect()),
            Scope::Group(g) => {
                if !instance.has_group(g) {
                    return Err(DecisionError::UnknownGroup(g.clone()));
                }
                Ok(instance.individuals().iter().filter(|i| &i.group == g).collect())
            }
        }
    }

    pub fn total_weight(&self, instance: &Instance) -> Result<Rational, DecisionError> {
        Ok(self.members(instance)?.into_iter().map(|i| &i.weight).sum())
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::All => f.write_str("all"),
            Scope::Group(g) => write!(f, "group {g}"),
        }
    }
}

/// Map from individual id to a distribution over predicted labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decision {
    assignment: BTreeMap<String, ProbVector>,
}

impl Decision {
    pub fn new(assignment: BTreeMap<String, ProbVector>) -> Self {
        Self { assignment }
    }

    /// Materializes a rule over every member of `scope`.
    pub fn from_fn(
        instance: &Instance,
        scope: &Scope,
        mut rule: impl FnMut(&Individual) -> ProbVector,
    ) -> Result<Self, DecisionError> {
        let assignment = scope
            .members(instance)?
            .into_iter()
            .map(|ind| (ind.id.clone(), rule(ind)))
            .collect();
        Ok(Self { assignment })
    }

    pub fn get(&self, id: &str) -> Option<&ProbVector> {
        self.assignment.get(id)
    }

    /// Assignment for `id`, or [`DecisionError::MissingAssignment`].
    pub fn require(&self, id: &str) -> Result<&ProbVector, DecisionError> {
        self.get(id)
            .ok_or_else(|| DecisionError::MissingAssignment(id.to_string()))
    }

    pub fn set(&mut self, id: impl Into<String>, value: ProbVector) {
        self.assignment.insert(id.into(), value);
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ProbVector)> {
        self.assignment.iter()
    }

    /// Checks that every member of `scope` has a well-sized assignment.
    pub fn check_covers(&self, instance: &Instance, scope: &Scope) -> Result<(), DecisionError> {
        let n = instance.n_labels();
        for ind in scope.members(instance)? {
            let v = self.require(&ind.id)?;
            if v.len() != n {
                return Err(DecisionError::WrongLength {
                    id: ind.id.clone(),
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Pointwise convex combination `(1 - t) * self + t * other` on the ids
    /// both decisions share.
    pub fn mix(&self, other: &Decision, t: &Rational) -> Decision {
        let assignment = self
            .assignment
            .iter()
            .filter_map(|(id, a)| other.get(id).map(|b| (id.clone(), a.mix(b, t))))
            .collect();
        Decision { assignment }
    }
}

/// `decision|_group`: the assignment limited to the group's members.
pub fn restrict(decision: &Decision, instance: &Instance, group: &str) -> Result<Decision, DecisionError> {
    if !instance.has_group(group) {
        return Err(DecisionError::UnknownGroup(group.to_string()));
    }
    let mut assignment = BTreeMap::new();
    for ind in instance.members(group) {
        assignment.insert(ind.id.clone(), decision.require(&ind.id)?.clone());
    }
    Ok(Decision { assignment })
}
