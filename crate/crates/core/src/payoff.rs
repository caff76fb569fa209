//! Joint payoffs `P(Ŷ = y_i, Y = y_j)` and the Pareto order on decisions.

use std::cmp::Ordering;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::decision::{Decision, DecisionError, Scope};
use crate::instance::{Instance, World};
use crate::rational::{self, Rational};

/// `entries[i][j]` is the mass predicted as label `i` whose true label is `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffMatrix {
    entries: Vec<Vec<Rational>>,
}

impl PayoffMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![vec![Rational::zero(); n]; n],
        }
    }

    pub fn get(&self, predicted: usize, actual: usize) -> &Rational {
        &self.entries[predicted][actual]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.entries.len())
            .map(|i| self.entries[i][i].clone())
            .collect()
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().flatten().sum()
    }

    pub fn add(&self, other: &PayoffMatrix) -> PayoffMatrix {
        PayoffMatrix {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }
}

/// Diagonal payoffs of a decision in one world and scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffVector {
    #[serde(with = "rational::serde_rational_vec")]
    pub diagonal: Vec<Rational>,
    pub world: World,
    pub scope: Scope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParetoRelation {
    Equivalent,
    /// The first decision is componentwise ≥ and strictly better somewhere.
    #[serde(rename = "d_dominates")]
    FirstDominates,
    #[serde(rename = "d_prime_dominates")]
    SecondDominates,
    Incomparable,
}

impl ParetoRelation {
    pub fn reversed(self) -> Self {
        match self {
            ParetoRelation::FirstDominates => ParetoRelation::SecondDominates,
            ParetoRelation::SecondDominates => ParetoRelation::FirstDominates,
            other => other,
        }
    }
}

pub fn payoff_matrix(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<PayoffMatrix, DecisionError> {
    decision.check_covers(instance, scope)?;
    let n = instance.n_labels();
    let mut m = PayoffMatrix::zeros(n);
    for ind in scope.members(instance)? {
        let d = decision.require(&ind.id)?;
        let p = ind.probs(world);
        for i in 0..n {
            if d.get(i).is_zero() {
                continue;
            }
            let di = &ind.weight * d.get(i);
            for j in 0..n {
                m.entries[i][j] += &di * p.get(j);
            }
        }
    }
    Ok(m)
}

pub fn payoff_vector(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<PayoffVector, DecisionError> {
    Ok(PayoffVector {
        diagonal: payoff_matrix(decision, instance, world, scope)?.diagonal(),
        world,
        scope: scope.clone(),
    })
}

/// Componentwise comparison of two payoff diagonals.
pub fn compare_payoffs(a: &[Rational], b: &[Rational]) -> ParetoRelation {
    let (mut a_better, mut b_better) = (false, false);
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Greater => a_better = true,
            Ordering::Less => b_better = true,
            Ordering::Equal => {}
        }
    }
    match (a_better, b_better) {
        (false, false) => ParetoRelation::Equivalent,
        (true, false) => ParetoRelation::FirstDominates,
        (false, true) => ParetoRelation::SecondDominates,
        (true, true) => ParetoRelation::Incomparable,
    }
}

pub fn pareto_compare(
    d: &Decision,
    d_prime: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<ParetoRelation, DecisionError> {
    let a = payoff_matrix(d, instance, world, scope)?.diagonal();
    let b = payoff_matrix(d_prime, instance, world, scope)?.diagonal();
    Ok(compare_payoffs(&a, &b))
}

/// `d < d'` in the strict Pareto sense.
pub fn strictly_below(
    d: &Decision,
    d_prime: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<bool, DecisionError> {
    Ok(pareto_compare(d, d_prime, instance, world, scope)? == ParetoRelation::SecondDominates)
}
