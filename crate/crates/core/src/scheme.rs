//! Tiered weight schemes: the finite representation of a well-behaved
//! weight sequence, the label-permission rules it induces on a probability
//! vector, and the decisions associated with it.
//!
//! A scheme lists tiers of labels, tier 1 first, with a positive weight per
//! label. It stands for the sequence `ω^(k)` whose pairwise limit ratios are
//! `w_i / w_j` inside a tier, `∞` when `i` sits in an earlier tier than `j`
//! and `0` when it sits in a later one. The canonical realization keeps the
//! within-tier ratios constant, so boundary comparisons are non-strict.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decision::{Decision, DecisionError, Scope};
use crate::instance::{Instance, LabelSet, ProbVector, World};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("scheme has no tiers")]
    NoTiers,
    #[error("tier {0} is empty")]
    EmptyTier(usize),
    #[error("label {0} appears in more than one tier")]
    RepeatedLabel(usize),
    #[error("label {0} is not in any tier")]
    MissingLabel(usize),
    #[error("weight of label {0} must be strictly positive")]
    NonPositiveWeight(usize),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("scheme covers {scheme} labels but the instance has {instance}")]
    LabelCountMismatch { scheme: usize, instance: usize },
    #[error("no label is permitted for individual {0:?}")]
    EmptyPermittedSet(String),
    #[error("cannot parse scheme {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error(transparent)]
    Decision(#[from] DecisionError),
}

/// A ratio `a / b` of non-negative numbers on the extended half-line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedRatio {
    Finite(#[serde(with = "rational::serde_rational")] Rational),
    Infinity,
    /// `0 / 0`.
    BothZero,
}

impl ExtendedRatio {
    pub fn of(numer: &Rational, denom: &Rational) -> Self {
        match (numer.is_zero(), denom.is_zero()) {
            (true, true) => ExtendedRatio::BothZero,
            (false, true) => ExtendedRatio::Infinity,
            _ => ExtendedRatio::Finite(numer / denom),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedRatio::Finite(v) if v.is_zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRatio::Infinity)
    }

    /// Order on `[0, ∞]`; `BothZero` is incomparable with everything.
    pub fn partial_cmp_ext(&self, other: &Self) -> Option<Ordering> {
        use ExtendedRatio::*;
        match (self, other) {
            (BothZero, _) | (_, BothZero) => None,
            (Infinity, Infinity) => Some(Ordering::Equal),
            (Infinity, Finite(_)) => Some(Ordering::Greater),
            (Finite(_), Infinity) => Some(Ordering::Less),
            (Finite(a), Finite(b)) => Some(a.cmp(b)),
        }
    }

    pub fn le(&self, other: &Self) -> Option<bool> {
        self.partial_cmp_ext(other).map(|o| o != Ordering::Greater)
    }
}

impl fmt::Display for ExtendedRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRatio::Finite(v) => f.write_str(&rational::format(v)),
            ExtendedRatio::Infinity => f.write_str("inf"),
            ExtendedRatio::BothZero => f.write_str("0/0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightScheme {
    tiers: Vec<Vec<usize>>,
    weights: Vec<Rational>,
    tier_of: Vec<usize>,
}

impl WeightScheme {
    /// `tiers` hold label indices (tier 1 first); `weights[i]` belongs to label `i`.
    pub fn new(tiers: Vec<Vec<usize>>, weights: Vec<Rational>) -> Result<Self, SchemeError> {
        if tiers.is_empty() {
            return Err(SchemeError::NoTiers);
        }
        let n = weights.len();
        let mut tier_of = vec![usize::MAX; n];
        for (t, tier) in tiers.iter().enumerate() {
            if tier.is_empty() {
                return Err(SchemeError::EmptyTier(t));
            }
            for &l in tier {
                if l >= n {
                    return Err(SchemeError::UnknownLabel(l.to_string()));
                }
                if tier_of[l] != usize::MAX {
                    return Err(SchemeError::RepeatedLabel(l));
                }
                tier_of[l] = t;
            }
        }
        if let Some(l) = tier_of.iter().position(|&t| t == usize::MAX) {
            return Err(SchemeError::MissingLabel(l));
        }
        if let Some(l) = weights.iter().position(|w| !w.is_positive()) {
            return Err(SchemeError::NonPositiveWeight(l));
        }
        Ok(Self {
            tiers,
            weights,
            tier_of,
        })
    }

    pub fn single_tier(weights: Vec<Rational>) -> Result<Self, SchemeError> {
        Self::new(vec![(0..weights.len()).collect()], weights)
    }

    /// Parses `"red:1 > green:3, blue:6"`: tiers separated by `>`, labels
    /// by `,`, each as `name:weight`. The weight follows the last `:` so label
    /// names may contain colons.
    pub fn parse(labels: &LabelSet, input: &str) -> Result<Self, SchemeError> {
        let fail = |reason: String| SchemeError::Parse {
            input: input.to_string(),
            reason,
        };
        let mut tiers = Vec::new();
        let mut weights: Vec<Option<Rational>> = vec![None; labels.len()];
        for tier_src in input.split('>') {
            let mut tier = Vec::new();
            for item in tier_src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, w) = item
                    .rsplit_once(':')
                    .ok_or_else(|| fail(format!("expected name:weight, got {item:?}")))?;
                let l = labels
                    .index_of(name.trim())
                    .ok_or_else(|| SchemeError::UnknownLabel(name.trim().to_string()))?;
                let w = rational::parse(w).map_err(|e| fail(e.to_string()))?;
                if weights[l].replace(w).is_some() {
                    return Err(SchemeError::RepeatedLabel(l));
                }
                tier.push(l);
            }
            tiers.push(tier);
        }
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(l, w)| w.ok_or(SchemeError::MissingLabel(l)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(tiers, weights)
    }

    pub fn n_labels(&self) -> usize {
        self.weights.len()
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn tier_of(&self, label: usize) -> usize {
        self.tier_of[label]
    }

    /// Renders back into the syntax accepted by [`WeightScheme::parse`].
    pub fn display(&self, labels: &LabelSet) -> String {
        self.tiers
            .iter()
            .map(|tier| {
                tier.iter()
                    .map(|&l| format!("{}:{}", labels.name(l), rational::format(&self.weights[l])))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect::<Vec<_>>()
            .join(" > ")
    }

    /// One term `ω^(k)` of the canonical realization: label weights scaled by
    /// `scale^-(tier)` and normalized onto the open simplex.
    pub fn realize(&self, scale: &Rational) -> Vec<Rational> {
        let raw: Vec<Rational> = (0..self.n_labels())
            .map(|l| {
                let mut v = self.weights[l].clone();
                for _ in 0..self.tier_of[l] {
                    v /= scale;
                }
                v
            })
            .collect();
        let total: Rational = raw.iter().sum();
        raw.into_iter().map(|v| v / &total).collect()
    }
}

/// `lim ω_i / ω_j` of the scheme's sequence.
pub fn limit_ratio(scheme: &WeightScheme, i: usize, j: usize) -> Result<ExtendedRatio, SchemeError> {
    let n = scheme.n_labels();
    for l in [i, j] {
        if l >= n {
            return Err(SchemeError::UnknownLabel(l.to_string()));
        }
    }
    Ok(match scheme.tier_of[i].cmp(&scheme.tier_of[j]) {
        Ordering::Less => ExtendedRatio::Infinity,
        Ordering::Greater => ExtendedRatio::Finite(Rational::zero()),
        Ordering::Equal => ExtendedRatio::Finite(&scheme.weights[i] / &scheme.weights[j]),
    })
}

/// Why label `label` cannot carry mass for a given probability vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionFailure {
    pub label: usize,
    pub other: usize,
    /// `p_label / p_other`.
    pub ratio: ExtendedRatio,
    /// `lim ω_label / ω_other`.
    pub limit: ExtendedRatio,
}

/// First pair condition that rules out `label`, or `None` if it is permitted.
pub fn permission_failure(scheme: &WeightScheme, p: &ProbVector, label: usize) -> Option<PermissionFailure> {
    let pi = p.get(label);
    for j in 0..p.len() {
        if j == label {
            continue;
        }
        let pj = p.get(j);
        let limit = limit_ratio(scheme, label, j).expect("labels in range");
        let ok = match &limit {
            ExtendedRatio::Infinity => pj.is_zero(),
            ExtendedRatio::Finite(l) if l.is_zero() => pi.is_positive() || pj.is_zero(),
            ExtendedRatio::Finite(l) => match ExtendedRatio::of(pi, pj) {
                ExtendedRatio::BothZero | ExtendedRatio::Infinity => true,
                ExtendedRatio::Finite(r) => r >= *l,
            },
            ExtendedRatio::BothZero => unreachable!("limit ratios are never 0/0"),
        };
        if !ok {
            return Some(PermissionFailure {
                label,
                other: j,
                ratio: ExtendedRatio::of(pi, pj),
                limit,
            });
        }
    }
    None
}

/// Labels that an associated decision may put mass on, in index order.
pub fn permitted_labels(scheme: &WeightScheme, p: &ProbVector) -> Vec<usize> {
    (0..p.len())
        .filter(|&l| permission_failure(scheme, p, l).is_none())
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// All mass on the lowest-index permitted label.
    #[default]
    LowestIndex,
    /// Equal mass on every permitted label.
    Uniform,
}

impl std::str::FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest-index" | "lowest" => Ok(TiePolicy::LowestIndex),
            "uniform" => Ok(TiePolicy::Uniform),
            other => Err(format!("unknown tie policy {other:?} (expected lowest-index or uniform)")),
        }
    }
}

/// Distribution chosen for one probability vector. Depends on `p` alone.
pub fn scheme_assignment(
    scheme: &WeightScheme,
    p: &ProbVector,
    tie: TiePolicy,
) -> Option<ProbVector> {
    let permitted = permitted_labels(scheme, p);
    let first = *permitted.first()?;
    Some(match tie {
        TiePolicy::LowestIndex => ProbVector::point_mass(p.len(), first),
        TiePolicy::Uniform => ProbVector::uniform_over(p.len(), &permitted),
    })
}

fn check_sizes(scheme: &WeightScheme, instance: &Instance) -> Result<(), SchemeError> {
    if scheme.n_labels() != instance.n_labels() {
        return Err(SchemeError::LabelCountMismatch {
            scheme: scheme.n_labels(),
            instance: instance.n_labels(),
        });
    }
    Ok(())
}

/// Materializes the decision associated with `scheme` on `scope`.
pub fn scheme_decision(
    instance: &Instance,
    scheme: &WeightScheme,
    world: World,
    scope: &Scope,
    tie: TiePolicy,
) -> Result<Decision, SchemeError> {
    check_sizes(scheme, instance)?;
    let mut decision = Decision::default();
    for ind in scope.members(instance)? {
        let v = scheme_assignment(scheme, ind.probs(world), tie)
            .ok_or_else(|| SchemeError::EmptyPermittedSet(ind.id.clone()))?;
        decision.set(ind.id.clone(), v);
    }
    Ok(decision)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationViolation {
    pub id: String,
    #[serde(flatten)]
    pub failure: PermissionFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub associated: bool,
    pub violation: Option<AssociationViolation>,
}

/// Checks that every individual's support lies in its permitted set; the
/// first offender (instance order, then label order) is the witness.
pub fn is_associated(
    decision: &Decision,
    scheme: &WeightScheme,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<Association, SchemeError> {
    check_sizes(scheme, instance)?;
    decision.check_covers(instance, scope)?;
    for ind in scope.members(instance)? {
        let d = decision.require(&ind.id)?;
        for label in d.support() {
            if let Some(failure) = permission_failure(scheme, ind.probs(world), label) {
                return Ok(Association {
                    associated: false,
                    violation: Some(AssociationViolation {
                        id: ind.id.clone(),
                        failure,
                    }),
                });
            }
        }
    }
    Ok(Association {
        associated: true,
        violation: None,
    })
}

/// Binary single-tier scheme selecting the first label exactly when its
/// probability is at least `threshold` (with `0 < threshold < 1`).
pub fn binary_threshold_scheme(threshold: &Rational) -> Result<WeightScheme, SchemeError> {
    WeightScheme::single_tier(vec![threshold.clone(), Rational::one() - threshold])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn pv(v: &[(i64, i64)]) -> ProbVector {
        ProbVector::new(v.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    fn fig_1b() -> WeightScheme {
        WeightScheme::single_tier(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap()
    }

    fn fig_1c() -> WeightScheme {
        WeightScheme::new(vec![vec![0], vec![1, 2]], vec![int(1), int(3), int(6)]).unwrap()
    }

    #[test]
    fn limit_ratios_of_figure_schemes() {
        let s = fig_1b();
        assert_eq!(limit_ratio(&s, 0, 1).unwrap(), ExtendedRatio::Finite(int(1)));
        assert_eq!(limit_ratio(&s, 0, 2).unwrap(), ExtendedRatio::Finite(ratio(1, 2)));
        let c = fig_1c();
        assert_eq!(limit_ratio(&c, 0, 1).unwrap(), ExtendedRatio::Infinity);
        assert_eq!(limit_ratio(&c, 1, 2).unwrap(), ExtendedRatio::Finite(ratio(1, 2)));
        assert_eq!(limit_ratio(&c, 2, 0).unwrap(), ExtendedRatio::Finite(int(0)));
        for i in 0..3 {
            assert_eq!(limit_ratio(&c, i, i).unwrap(), ExtendedRatio::Finite(int(1)));
        }
        assert!(matches!(limit_ratio(&c, 0, 3), Err(SchemeError::UnknownLabel(_))));
    }

    #[test]
    fn permitted_sets() {
        assert_eq!(permitted_labels(&fig_1b(), &pv(&[(1, 4), (1, 4), (1, 2)])), vec![0, 1, 2]);
        assert_eq!(permitted_labels(&fig_1b(), &pv(&[(3, 10), (1, 4), (9, 20)])), vec![0]);
        let binary = WeightScheme::single_tier(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        assert_eq!(permitted_labels(&binary, &pv(&[(7, 10), (3, 10)])), vec![0]);
        assert_eq!(permitted_labels(&binary, &pv(&[(1, 2), (1, 2)])), vec![0, 1]);
    }

    #[test]
    fn tiered_scheme_confines_first_tier_to_its_vertex() {
        let c = fig_1c();
        assert_eq!(permitted_labels(&c, &pv(&[(1, 1), (0, 1), (0, 1)])), vec![0]);
        assert_eq!(permitted_labels(&c, &pv(&[(1, 2), (0, 1), (1, 2)])), vec![2]);
        assert_eq!(permitted_labels(&c, &pv(&[(1, 2), (1, 2), (0, 1)])), vec![1]);
        assert_eq!(permitted_labels(&c, &pv(&[(1, 2), (1, 6), (1, 3)])), vec![1, 2]);
    }

    #[test]
    fn parse_and_display_round_trip() {
        let labels = LabelSet::new(["red", "green", "blue"]).unwrap();
        let s = WeightScheme::parse(&labels, "red:1 > green:3, blue:6").unwrap();
        assert_eq!(s, fig_1c());
        assert_eq!(s.display(&labels), "red:1 > green:3, blue:6");
        assert!(matches!(
            WeightScheme::parse(&labels, "red:1 > green:3"),
            Err(SchemeError::MissingLabel(2))
        ));
        assert!(matches!(
            WeightScheme::parse(&labels, "red:1, green:0, blue:1"),
            Err(SchemeError::NonPositiveWeight(1))
        ));
    }

    #[test]
    fn extended_ratio_order() {
        let inf = ExtendedRatio::Infinity;
        let one = ExtendedRatio::Finite(int(1));
        assert_eq!(one.le(&inf), Some(true));
        assert_eq!(inf.le(&inf), Some(true));
        assert_eq!(inf.le(&one), Some(false));
        assert_eq!(ExtendedRatio::BothZero.le(&one), None);
        assert_eq!(ExtendedRatio::of(&int(0), &int(0)), ExtendedRatio::BothZero);
    }
}
