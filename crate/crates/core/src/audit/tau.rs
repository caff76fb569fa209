//! Within-group rank agreement between fair-side and unfair-side scores.
//!
//! Ties in either score list count as neither concordant nor discordant but
//! stay in the denominator (tau-a).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Witness, WitnessKind};
use crate::instance::Instance;
use crate::rational::{self, Rational};

pub const TIE_HANDLING: &str = "tau-a: pairs tied in either score count 0 in the numerator and 1 in the denominator";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TauError {
    #[error("group {group:?} has {size} member(s); at least 2 are needed")]
    GroupTooSmall { group: String, size: usize },
    #[error("no score for individual {id:?}")]
    MissingScore { id: String },
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("scores from an instance need a binary label set, got {0} labels")]
    NotBinary(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSummary {
    pub concordant: usize,
    pub discordant: usize,
    pub tied: usize,
    pub pairs: usize,
    #[serde(with = "rational::serde_rational")]
    pub tau: Rational,
}

/// Kendall tau over `members`, with scores looked up by id.
pub fn kendall_tau(
    scores_a: &BTreeMap<String, Rational>,
    scores_b: &BTreeMap<String, Rational>,
    members: &[String],
    group: &str,
) -> Result<TauSummary, TauError> {
    if members.len() < 2 {
        return Err(TauError::GroupTooSmall {
            group: group.to_string(),
            size: members.len(),
        });
    }
    let lookup = |scores: &BTreeMap<String, Rational>, id: &String| {
        scores.get(id).cloned().ok_or_else(|| TauError::MissingScore { id: id.clone() })
    };
    let a = members.iter().map(|id| lookup(scores_a, id)).collect::<Result<Vec<_>, _>>()?;
    let b = members.iter().map(|id| lookup(scores_b, id)).collect::<Result<Vec<_>, _>>()?;
    let (mut concordant, mut discordant, mut tied) = (0, 0, 0);
    for x in 0..members.len() {
        for y in x + 1..members.len() {
            match (a[x].cmp(&a[y]), b[x].cmp(&b[y])) {
                (std::cmp::Ordering::Equal, _) | (_, std::cmp::Ordering::Equal) => tied += 1,
                (p, q) if p == q => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = concordant + discordant + tied;
    let tau = Rational::new(
        (concordant as i64 - discordant as i64).into(),
        (pairs as i64).into(),
    );
    Ok(TauSummary {
        concordant,
        discordant,
        tied,
        pairs,
        tau,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub id: String,
    pub group: String,
    #[serde(with = "rational::serde_rational")]
    pub score_a: Rational,
    #[serde(with = "rational::serde_rational")]
    pub score_b: Rational,
    #[serde(with = "rational::serde_rational")]
    pub weight: Rational,
}

/// Two scores per individual, grouped. Groups keep first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredDataset {
    pub rows: Vec<ScoredRow>,
}

impl ScoredDataset {
    /// Fair-side and unfair-side probability of the first label.
    pub fn from_instance(instance: &Instance) -> Result<Self, TauError> {
        if !instance.labels().is_binary() {
            return Err(TauError::NotBinary(instance.n_labels()));
        }
        Ok(Self {
            rows: instance
                .individuals()
                .iter()
                .map(|ind| ScoredRow {
                    id: ind.id.clone(),
                    group: ind.group.clone(),
                    score_a: ind.p_fair.get(0).clone(),
                    score_b: ind.p_unfair.get(0).clone(),
                    weight: ind.weight.clone(),
                })
                .collect(),
        })
    }

    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.group) {
                out.push(r.group.clone());
            }
        }
        out
    }

    pub fn members(&self, group: &str) -> Vec<&ScoredRow> {
        self.rows.iter().filter(|r| r.group == group).collect()
    }

    pub fn tau(&self, group: &str) -> Result<TauSummary, TauError> {
        let members = self.members(group);
        if members.is_empty() {
            return Err(TauError::UnknownGroup(group.to_string()));
        }
        let ids: Vec<String> = members.iter().map(|r| r.id.clone()).collect();
        let a = members.iter().map(|r| (r.id.clone(), r.score_a.clone())).collect();
        let b = members.iter().map(|r| (r.id.clone(), r.score_b.clone())).collect();
        kendall_tau(&a, &b, &ids, group)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RerankingVerdict {
    ConsistentWithMonotoneBias,
    AllAssumptionsRefuted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTau {
    pub group: String,
    pub size: usize,
    /// Absent for single-member groups.
    pub summary: Option<TauSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankingReport {
    pub groups: Vec<GroupTau>,
    pub verdict: RerankingVerdict,
    /// First discordant within-group pair, in dataset order.
    pub witness: Option<Witness>,
    pub tie_handling: String,
}

impl RerankingReport {
    pub fn tau(&self, group: &str) -> Option<&Rational> {
        self.groups
            .iter()
            .find(|g| g.group == group)
            .and_then(|g| g.summary.as_ref())
            .map(|s| &s.tau)
    }
}

/// Per-group tau; a strictly discordant pair refutes every assumption.
/// Single-member groups are listed without a tau.
pub fn reranking_report(dataset: &ScoredDataset) -> Result<RerankingReport, TauError> {
    let mut groups = Vec::new();
    let mut witness = None;
    for g in dataset.groups() {
        let members = dataset.members(&g);
        let summary = if members.len() >= 2 { Some(dataset.tau(&g)?) } else { None };
        if witness.is_none() {
            witness = first_discordant(&members, &g);
        }
        groups.push(GroupTau {
            group: g,
            size: members.len(),
            summary,
        });
    }
    Ok(RerankingReport {
        groups,
        verdict: if witness.is_some() {
            RerankingVerdict::AllAssumptionsRefuted
        } else {
            RerankingVerdict::ConsistentWithMonotoneBias
        },
        witness,
        tie_handling: TIE_HANDLING.to_string(),
    })
}

fn first_discordant(members: &[&ScoredRow], group: &str) -> Option<Witness> {
    for (k, x) in members.iter().enumerate() {
        for y in &members[k + 1..] {
            let da = x.score_a.cmp(&y.score_a);
            let db = x.score_b.cmp(&y.score_b);
            if da != std::cmp::Ordering::Equal && db != std::cmp::Ordering::Equal && da != db {
                return Some(Witness {
                    kind: WitnessKind::RerankingPair,
                    direction: None,
                    group: Some(group.to_string()),
                    individuals: vec![x.id.clone(), y.id.clone()],
                    labels: vec![0],
                    values: [
                        ("score_a_x", &x.score_a),
                        ("score_a_x_prime", &y.score_a),
                        ("score_b_x", &x.score_b),
                        ("score_b_x_prime", &y.score_b),
                    ]
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), rational::format(v)))
                    .collect(),
                    decisions: None,
                });
            }
        }
    }
    None
}
