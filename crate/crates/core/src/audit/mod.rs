//! Audit of the group-fairness assumptions against a fair/unfair pair.
//!
//! The affirmative-action (AA) and double-standard (DS) assumptions are
//! decided exactly by [`conditions`]. The three stronger assumptions are
//! refuted through the implications NHNF ⇒ AA, RM ⇒ AA and FaO ⇒ DS, and
//! otherwise reported `not_refuted`, optionally after a randomized search
//! in [`falsify`].

pub mod conditions;
pub mod counterexample;
pub mod falsify;
pub mod report;
pub mod tau;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::decision::{restrict, Decision, Scope};
use crate::instance::{Instance, World};
use crate::oracle::{exchange_oracle, measurability_violation};
use crate::payoff::strictly_below;

pub use conditions::{
    check_binary_corollary, check_direction, check_ratio_condition, check_zero_condition, CheckResult,
    ConditionError,
};
pub use counterexample::{counterexample_decision, CounterexampleDecision, CounterexampleError};
pub use falsify::{falsify_assumption, FalsifyOptions};
pub use report::{audit_assumptions, AssumptionFinding, AuditOptions, AuditReport, ConditionSummary};
pub use tau::{kendall_tau, reranking_report, RerankingReport, RerankingVerdict, ScoredDataset, TauError, TauSummary};

/// Which world plays the premise in the monotonicity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Fair order must survive into the unfair world.
    #[serde(rename = "AA")]
    AffirmativeAction,
    /// Unfair order must survive into the fair world.
    #[serde(rename = "DS")]
    DoubleStandard,
}

impl Direction {
    /// `(premise, conclusion)`.
    pub fn worlds(self) -> (World, World) {
        match self {
            Direction::AffirmativeAction => (World::Fair, World::Unfair),
            Direction::DoubleStandard => (World::Unfair, World::Fair),
        }
    }

    pub fn assumption(self) -> Assumption {
        match self {
            Direction::AffirmativeAction => Assumption::AffirmativeAction,
            Direction::DoubleStandard => Assumption::DoubleStandard,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AffirmativeAction => "AA",
            Direction::DoubleStandard => "DS",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match Assumption::from_str(s)? {
            Assumption::AffirmativeAction => Ok(Direction::AffirmativeAction),
            Assumption::DoubleStandard => Ok(Direction::DoubleStandard),
            other => Err(format!("{other} is not a condition direction (expected AA or DS)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assumption {
    #[serde(rename = "AA")]
    AffirmativeAction,
    #[serde(rename = "DS")]
    DoubleStandard,
    #[serde(rename = "NHNF")]
    NoHarmNoFoul,
    #[serde(rename = "FaO")]
    FairnessAsOptimization,
    #[serde(rename = "RM")]
    RepresentationMatters,
}

impl Assumption {
    pub const ALL: [Assumption; 5] = [
        Assumption::AffirmativeAction,
        Assumption::DoubleStandard,
        Assumption::NoHarmNoFoul,
        Assumption::FairnessAsOptimization,
        Assumption::RepresentationMatters,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Assumption::AffirmativeAction => "AA",
            Assumption::DoubleStandard => "DS",
            Assumption::NoHarmNoFoul => "NHNF",
            Assumption::FairnessAsOptimization => "FaO",
            Assumption::RepresentationMatters => "RM",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Assumption::AffirmativeAction => "Affirmative Action",
            Assumption::DoubleStandard => "Double Standard",
            Assumption::NoHarmNoFoul => "No Harm No Foul",
            Assumption::FairnessAsOptimization => "Fairness as Optimization",
            Assumption::RepresentationMatters => "Representation Matters",
        }
    }

    /// The condition family this assumption implies.
    pub fn implied_direction(self) -> Direction {
        match self {
            Assumption::DoubleStandard | Assumption::FairnessAsOptimization => Direction::DoubleStandard,
            _ => Direction::AffirmativeAction,
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Assumption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        Ok(match key.as_str() {
            "aa" | "affirmativeaction" => Assumption::AffirmativeAction,
            "ds" | "doublestandard" => Assumption::DoubleStandard,
            "nhnf" | "noharmnofoul" => Assumption::NoHarmNoFoul,
            "fao" | "fairnessasoptimization" => Assumption::FairnessAsOptimization,
            "rm" | "representationmatters" => Assumption::RepresentationMatters,
            _ => return Err(format!("unknown assumption {s:?} (expected AA, DS, NHNF, FaO or RM)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Refuted,
    NotRefuted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Refuted => "refuted",
            Verdict::NotRefuted => "not_refuted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    ZeroViolation,
    RatioViolation,
    DominanceCounterexample,
    RerankingPair,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::ZeroViolation => "zero_violation",
            WitnessKind::RatioViolation => "ratio_violation",
            WitnessKind::DominanceCounterexample => "dominance_counterexample",
            WitnessKind::RerankingPair => "reranking_pair",
        })
    }
}

/// A self-contained violation record. `values` holds the exact numbers
/// that exhibit it, so the record can be checked without the ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub individuals: Vec<String>,
    pub labels: Vec<usize>,
    pub values: BTreeMap<String, String>,
    /// Decisions exhibiting a dominance counterexample, by role.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<BTreeMap<String, Decision>>,
}

impl Witness {
    /// The assumption a dominance counterexample refutes.
    pub fn assumption(&self) -> Option<Assumption> {
        self.values.get("assumption").and_then(|s| s.parse().ok())
    }

    /// Re-evaluates the violation on `instance` from scratch.
    pub fn reproduces(&self, instance: &Instance) -> bool {
        let ind = |k: usize| self.individuals.get(k).and_then(|id| instance.individual(id));
        let n = instance.n_labels();
        if self.labels.iter().any(|&l| l >= n) {
            return false;
        }
        match self.kind {
            WitnessKind::ZeroViolation => match (ind(0), self.direction, self.labels.as_slice()) {
                (Some(x), Some(dir), [l]) => conditions::zero_witness(x, *l, dir).is_some(),
                _ => false,
            },
            WitnessKind::RatioViolation => {
                let (Some(x), Some(y), Some(dir)) = (ind(0), ind(1), self.direction) else {
                    return false;
                };
                if x.group != y.group {
                    return false;
                }
                match self.labels.as_slice() {
                    [i, j] => conditions::ratio_witness(x, y, *i, *j, dir).is_some(),
                    // Binary form on the first label's probability.
                    [0] if n == 2 => conditions::ratio_witness(x, y, 0, 1, dir).is_some(),
                    _ => false,
                }
            }
            WitnessKind::RerankingPair => {
                let (Some(x), Some(y)) = (ind(0), ind(1)) else {
                    return false;
                };
                let l = self.labels.first().copied().unwrap_or(0);
                let fair = x.p_fair.get(l) - y.p_fair.get(l);
                let unfair = x.p_unfair.get(l) - y.p_unfair.get(l);
                x.group == y.group && (fair * unfair) < Zero::zero()
            }
            WitnessKind::DominanceCounterexample => self.dominance_reproduces(instance),
        }
    }

    fn dominance_reproduces(&self, instance: &Instance) -> bool {
        let (Some(assumption), Some(group), Some(decisions)) = (self.assumption(), &self.group, &self.decisions)
        else {
            return false;
        };
        let scope = Scope::group(group.clone());
        let check = || -> Option<bool> {
            match assumption {
                Assumption::NoHarmNoFoul | Assumption::FairnessAsOptimization => {
                    let (d, d_prime) = (decisions.get("d")?, decisions.get("d_prime")?);
                    let (premise, conclusion) = if assumption == Assumption::NoHarmNoFoul {
                        (World::Unfair, World::Fair)
                    } else {
                        (World::Fair, World::Unfair)
                    };
                    Some(
                        strictly_below(d, d_prime, instance, premise, &scope).ok()?
                            && !strictly_below(d, d_prime, instance, conclusion, &scope).ok()?,
                    )
                }
                Assumption::RepresentationMatters => {
                    let (d, better) = (decisions.get("d")?, decisions.get("improvement")?);
                    let fair_max = exchange_oracle(d, instance, World::Fair, &Scope::All).ok()?;
                    let measurable = measurability_violation(d, instance).ok()?.is_none();
                    let restricted = restrict(d, instance, group).ok()?;
                    Some(
                        fair_max.verdict == crate::oracle::MaximalityVerdict::Maximal
                            && measurable
                            && strictly_below(&restricted, better, instance, World::Unfair, &scope).ok()?,
                    )
                }
                _ => None,
            }
        };
        check().unwrap_or(false)
    }
}
