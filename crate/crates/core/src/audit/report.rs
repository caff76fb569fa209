use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::conditions::{check_ratio_condition, check_zero_condition, CheckResult};
use super::falsify::{falsify_assumption, FalsifyOptions};
use super::tau::{reranking_report, RerankingReport, ScoredDataset, TIE_HANDLING};
use super::{Assumption, Direction, Verdict, Witness};
use crate::instance::Instance;
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Maximum witnesses listed per condition.
    pub witness_cap: usize,
    /// Randomized search for the assumptions the exact checks leave open.
    pub falsify: Option<FalsifyOptions>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            witness_cap: 16,
            falsify: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub direction: Direction,
    /// `zero` or `ratio`.
    pub condition: String,
    pub holds: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFinding {
    pub assumption: Assumption,
    pub verdict: Verdict,
    pub basis: String,
    /// Indices into [`AuditReport::witnesses`].
    pub witnesses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub verdicts: BTreeMap<Assumption, Verdict>,
    pub findings: Vec<AssumptionFinding>,
    pub conditions: Vec<ConditionSummary>,
    pub witnesses: Vec<Witness>,
    /// Per-group Kendall tau of `p(first label)`, binary instances only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reranking: Option<RerankingReport>,
    pub tie_handling: String,
}

impl AuditReport {
    pub fn verdict(&self, assumption: Assumption) -> Verdict {
        self.verdicts[&assumption]
    }

    pub fn any_refuted(&self) -> bool {
        self.verdicts.values().any(|v| *v == Verdict::Refuted)
    }

    pub fn witnesses_for(&self, assumption: Assumption) -> Vec<&Witness> {
        self.findings
            .iter()
            .filter(|f| f.assumption == assumption)
            .flat_map(|f| f.witnesses.iter().map(|&k| &self.witnesses[k]))
            .collect()
    }
}

fn push_all(store: &mut Vec<Witness>, items: Vec<Witness>) -> Vec<usize> {
    let start = store.len();
    store.extend(items);
    (start..store.len()).collect()
}

pub fn audit_assumptions(instance: &Instance, options: AuditOptions) -> AuditReport {
    let cap = options.witness_cap;
    let mut witnesses = Vec::new();
    let mut conditions = Vec::new();
    let mut direction_witnesses: BTreeMap<Direction, Vec<usize>> = BTreeMap::new();
    let mut direction_holds: BTreeMap<Direction, bool> = BTreeMap::new();

    for direction in [Direction::AffirmativeAction, Direction::DoubleStandard] {
        let zero = check_zero_condition(instance, direction, cap);
        let ratio = check_ratio_condition(instance, direction, cap);
        let summarize = |name: &str, r: &CheckResult| ConditionSummary {
            direction,
            condition: name.to_string(),
            holds: r.holds,
            violations: r.violations,
        };
        conditions.push(summarize("zero", &zero));
        conditions.push(summarize("ratio", &ratio));
        direction_holds.insert(direction, zero.holds && ratio.holds);
        let mut idx = push_all(&mut witnesses, zero.witnesses);
        idx.extend(push_all(&mut witnesses, ratio.witnesses));
        direction_witnesses.insert(direction, idx);
    }

    let (tau, reranking) = match ScoredDataset::from_instance(instance) {
        Ok(data) => {
            let rr = reranking_report(&data).expect("groups of size >= 2 always have scores");
            let tau = rr
                .groups
                .iter()
                .filter_map(|g| g.summary.as_ref().map(|s| (g.group.clone(), rational::format(&s.tau))))
                .collect();
            (Some(tau), Some(rr))
        }
        Err(_) => (None, None),
    };
    let rerank_witness = reranking
        .as_ref()
        .and_then(|r| r.witness.clone())
        .map(|w| push_all(&mut witnesses, vec![w]));

    let mut findings = Vec::new();
    for assumption in Assumption::ALL {
        let direction = assumption.implied_direction();
        let implied_holds = direction_holds[&direction];
        let mut idx = if implied_holds { Vec::new() } else { direction_witnesses[&direction].clone() };
        let exact = matches!(assumption, Assumption::AffirmativeAction | Assumption::DoubleStandard);
        let (mut verdict, mut basis) = match (exact, implied_holds) {
            (true, true) => (Verdict::Holds, format!("zero and ratio conditions ({direction}) hold")),
            (true, false) => (Verdict::Refuted, format!("{direction} conditions violated")),
            (false, false) => (Verdict::Refuted, format!("implies {direction}, which is refuted")),
            (false, true) => (
                Verdict::NotRefuted,
                format!("implied {direction} conditions hold; the converse is not established"),
            ),
        };
        if verdict == Verdict::NotRefuted {
            if let Some(falsify) = options.falsify {
                match falsify_assumption(instance, assumption, falsify) {
                    Some(cx) => {
                        verdict = Verdict::Refuted;
                        basis = format!("counterexample found in randomized search (trial {})", cx.trial);
                        idx.extend(push_all(&mut witnesses, vec![cx.witness]));
                    }
                    None => {
                        basis = format!(
                            "{basis}; no counterexample in {} trials (seed {})",
                            falsify.trials, falsify.seed
                        );
                    }
                }
            }
        }
        if let Some(r) = &rerank_witness {
            idx.extend(r.iter().copied());
        }
        findings.push(AssumptionFinding {
            assumption,
            verdict,
            basis,
            witnesses: idx,
        });
    }

    AuditReport {
        verdicts: findings.iter().map(|f| (f.assumption, f.verdict)).collect(),
        findings,
        conditions,
        witnesses,
        tau,
        reranking,
        tie_handling: TIE_HANDLING.to_string(),
    }
}
