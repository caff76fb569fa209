//! Exact checkers for the zero-preservation and ratio-order conditions.
//!
//! In the [`Direction::AffirmativeAction`] direction the fair world is the
//! premise and the unfair world the conclusion; [`Direction::DoubleStandard`]
//! swaps them. A ratio pair is skipped when any of its four ratios is `0/0`,
//! or when the premise ratios are both `0` or both `∞`: no positive finite
//! threshold separates such a pair, so it cannot be turned into a
//! counterexample.

use num_traits::{One, Zero};

use super::{Direction, Witness, WitnessKind};
use crate::instance::{Individual, Instance};
use crate::rational::{self};
use crate::scheme::ExtendedRatio;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditionError {
    #[error("the binary corollary needs exactly two labels, got {0}")]
    NotBinary(usize),
}

/// Outcome of one condition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub holds: bool,
    /// Violations in enumeration order, truncated to the cap.
    pub witnesses: Vec<Witness>,
    /// Violations found before truncation.
    pub violations: usize,
}

impl CheckResult {
    fn from_witnesses(all: Vec<Witness>, cap: usize) -> Self {
        let violations = all.len();
        let mut witnesses = all;
        witnesses.truncate(cap);
        Self {
            holds: violations == 0,
            witnesses,
            violations,
        }
    }

    pub fn and(mut self, other: CheckResult, cap: usize) -> CheckResult {
        self.holds &= other.holds;
        self.violations += other.violations;
        self.witnesses.extend(other.witnesses);
        self.witnesses.truncate(cap);
        self
    }
}

pub(crate) fn zero_witness(ind: &Individual, label: usize, direction: Direction) -> Option<Witness> {
    let (premise, conclusion) = direction.worlds();
    let c = ind.probs(conclusion).get(label);
    let p = ind.probs(premise).get(label);
    if c.is_zero() && !p.is_zero() {
        Some(Witness {
            kind: WitnessKind::ZeroViolation,
            direction: Some(direction),
            group: Some(ind.group.clone()),
            individuals: vec![ind.id.clone()],
            labels: vec![label],
            values: [
                (format!("p_{premise}"), ind.probs(premise).to_string()),
                (format!("p_{conclusion}"), ind.probs(conclusion).to_string()),
            ]
            .into_iter()
            .collect(),
            decisions: None,
        })
    } else {
        None
    }
}

/// Conclusion-world zeros must be premise-world zeros.
pub fn check_zero_condition(instance: &Instance, direction: Direction, cap: usize) -> CheckResult {
    let n = instance.n_labels();
    let all = instance
        .individuals()
        .iter()
        .flat_map(|ind| (0..n).filter_map(move |l| zero_witness(ind, l, direction)))
        .collect();
    CheckResult::from_witnesses(all, cap)
}

fn ratio(ind: &Individual, world: crate::instance::World, i: usize, j: usize) -> ExtendedRatio {
    let p = ind.probs(world);
    ExtendedRatio::of(p.get(i), p.get(j))
}

pub(crate) fn ratio_witness(
    x: &Individual,
    x_prime: &Individual,
    i: usize,
    j: usize,
    direction: Direction,
) -> Option<Witness> {
    let (premise, conclusion) = direction.worlds();
    let (px, py) = (ratio(x, premise, i, j), ratio(x_prime, premise, i, j));
    let (cx, cy) = (ratio(x, conclusion, i, j), ratio(x_prime, conclusion, i, j));
    if [&px, &py, &cx, &cy].iter().any(|r| **r == ExtendedRatio::BothZero) {
        return None;
    }
    let degenerate = (px.is_zero() && py.is_zero()) || (px.is_infinite() && py.is_infinite());
    if degenerate {
        return None;
    }
    if px.le(&py) == Some(true) && cx.le(&cy) == Some(false) {
        Some(Witness {
            kind: WitnessKind::RatioViolation,
            direction: Some(direction),
            group: Some(x.group.clone()),
            individuals: vec![x.id.clone(), x_prime.id.clone()],
            labels: vec![i, j],
            values: [
                (format!("{premise}_ratio_x"), px.to_string()),
                (format!("{premise}_ratio_x_prime"), py.to_string()),
                (format!("{conclusion}_ratio_x"), cx.to_string()),
                (format!("{conclusion}_ratio_x_prime"), cy.to_string()),
            ]
            .into_iter()
            .collect(),
            decisions: None,
        })
    } else {
        None
    }
}

/// Within every group: premise ratio order must carry over to the
/// conclusion world, for every ordered pair of members and labels.
pub fn check_ratio_condition(instance: &Instance, direction: Direction, cap: usize) -> CheckResult {
    let n = instance.n_labels();
    let mut all = Vec::new();
    for g in instance.groups() {
        let members: Vec<&Individual> = instance.members(g).collect();
        for x in &members {
            for y in &members {
                if x.id == y.id {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            all.extend(ratio_witness(x, y, i, j, direction));
                        }
                    }
                }
            }
        }
    }
    CheckResult::from_witnesses(all, cap)
}

/// Zero and ratio conditions together: the exact test of the assumption
/// named by `direction`.
pub fn check_direction(instance: &Instance, direction: Direction, cap: usize) -> CheckResult {
    check_zero_condition(instance, direction, cap).and(check_ratio_condition(instance, direction, cap), cap)
}

/// Binary form on the first label's probability: both endpoints are
/// preserved and, within each group, the premise order of `p(first)`
/// carries over to the conclusion world.
pub fn check_binary_corollary(
    instance: &Instance,
    direction: Direction,
    cap: usize,
) -> Result<CheckResult, ConditionError> {
    if !instance.labels().is_binary() {
        return Err(ConditionError::NotBinary(instance.n_labels()));
    }
    let (premise, conclusion) = direction.worlds();
    let mut all = Vec::new();
    for ind in instance.individuals() {
        let c = ind.probs(conclusion).get(0);
        let p = ind.probs(premise).get(0);
        // 0 -> 0 on the first label, 1 -> 1 (the second label's zero).
        if (c.is_zero() && !p.is_zero()) || (c.is_one() && !p.is_one()) {
            let label = if c.is_zero() { 0 } else { 1 };
            all.push(Witness {
                kind: WitnessKind::ZeroViolation,
                direction: Some(direction),
                group: Some(ind.group.clone()),
                individuals: vec![ind.id.clone()],
                labels: vec![label],
                values: [
                    (format!("p_{premise}"), ind.probs(premise).to_string()),
                    (format!("p_{conclusion}"), ind.probs(conclusion).to_string()),
                ]
                .into_iter()
                .collect(),
                decisions: None,
            });
        }
    }
    for g in instance.groups() {
        let members: Vec<&Individual> = instance.members(g).collect();
        for x in &members {
            for y in &members {
                if x.id == y.id {
                    continue;
                }
                let (px, py) = (x.probs(premise).get(0), y.probs(premise).get(0));
                let (cx, cy) = (x.probs(conclusion).get(0), y.probs(conclusion).get(0));
                let degenerate = px == py && (px.is_zero() || px.is_one());
                if !degenerate && px <= py && cx > cy {
                    all.push(Witness {
                        kind: WitnessKind::RatioViolation,
                        direction: Some(direction),
                        group: Some(g.clone()),
                        individuals: vec![x.id.clone(), y.id.clone()],
                        labels: vec![0],
                        values: [
                            (format!("{premise}_x"), rational::format(px)),
                            (format!("{premise}_x_prime"), rational::format(py)),
                            (format!("{conclusion}_x"), rational::format(cx)),
                            (format!("{conclusion}_x_prime"), rational::format(cy)),
                        ]
                        .into_iter()
                        .collect(),
                        decisions: None,
                    });
                }
            }
        }
    }
    Ok(CheckResult::from_witnesses(all, cap))
}
