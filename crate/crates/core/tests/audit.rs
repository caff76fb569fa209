mod common;

use common::*;
use fairworld::audit::tau::{ScoredDataset, ScoredRow};
use fairworld::audit::{
    audit_assumptions, check_binary_corollary, check_direction, check_ratio_condition, check_zero_condition,
    counterexample_decision, falsify_assumption, kendall_tau, reranking_report, Assumption, AuditOptions,
    Direction, FalsifyOptions, RerankingVerdict, Verdict, WitnessKind,
};
use fairworld::bias::{apply_bias, BiasSpec, Transform};
use fairworld::instance::World;
use fairworld::oracle::{pareto_maximal_oracle_with, OracleLimits};
use fairworld::payoff::pareto_compare;
use fairworld::rational::{int, ratio, Rational};
use fairworld::{phd_example, restrict, ParetoRelation, Scope};
use proptest::prelude::*;
use std::collections::BTreeMap;

const AA: Direction = Direction::AffirmativeAction;
const DS: Direction = Direction::DoubleStandard;

#[test]
fn phd_zero_condition() {
    let inst = phd_example().instance;
    let aa = check_zero_condition(&inst, AA, 16);
    assert!(!aa.holds);
    assert_eq!(aa.violations, 1);
    let w = &aa.witnesses[0];
    assert_eq!(w.kind, WitnessKind::ZeroViolation);
    assert_eq!(w.individuals, vec!["s=1,r=1"]);
    assert_eq!(w.labels, vec![0]);
    assert_eq!(w.values["p_fair"], "(1/100, 99/100)");
    assert_eq!(w.values["p_unfair"], "(0, 1)");
    assert!(check_zero_condition(&inst, DS, 16).holds);
}

#[test]
fn phd_ratio_condition() {
    let inst = phd_example().instance;
    let aa = check_ratio_condition(&inst, AA, 16);
    assert!(!aa.holds);
    // The tied pair (s=2, s=3) in r=1 breaks in both label orders.
    let pairs: Vec<(Vec<String>, Vec<usize>)> =
        aa.witnesses.iter().map(|w| (w.individuals.clone(), w.labels.clone())).collect();
    assert_eq!(
        pairs,
        vec![
            (vec!["s=2,r=1".into(), "s=3,r=1".into()], vec![1, 0]),
            (vec!["s=3,r=1".into(), "s=2,r=1".into()], vec![0, 1]),
        ]
    );
    let w = &aa.witnesses[1];
    assert_eq!(w.values["fair_ratio_x"], "3/97");
    assert_eq!(w.values["fair_ratio_x_prime"], "3/97");
    assert_eq!(w.values["unfair_ratio_x"], "1/49");
    assert_eq!(w.values["unfair_ratio_x_prime"], "1/99");
    assert!(check_ratio_condition(&inst, DS, 16).holds);
}

#[test]
fn phd_binary_corollary() {
    let inst = phd_example().instance;
    let aa = check_binary_corollary(&inst, AA, 16).unwrap();
    assert!(!aa.holds);
    let kinds: Vec<_> = aa.witnesses.iter().map(|w| w.kind).collect();
    assert_eq!(kinds, vec![WitnessKind::ZeroViolation, WitnessKind::RatioViolation]);
    assert_eq!(aa.witnesses[1].individuals, vec!["s=3,r=1", "s=2,r=1"]);
    assert!(check_binary_corollary(&inst, DS, 16).unwrap().holds);
    for w in &aa.witnesses {
        assert!(w.reproduces(&inst));
    }
}

#[test]
fn corollary_rejects_non_binary() {
    let inst = fairworld::simplex_grid(2).unwrap();
    assert!(check_binary_corollary(&inst, AA, 16).is_err());
}

#[test]
fn identity_holds_both_ways() {
    let mut r = rng(7);
    for _ in 0..20 {
        let inst = random_fair_instance(
            &mut r,
            &InstanceShape {
                individuals: 6,
                labels: 3,
                groups: 2,
                denominator: 4,
                zeros: true,
                repeat: 0.3,
            },
        );
        assert!(check_direction(&inst, AA, 16).holds);
        assert!(check_direction(&inst, DS, 16).holds);
        let report = audit_assumptions(&inst, AuditOptions::default());
        assert_eq!(report.verdict(Assumption::AffirmativeAction), Verdict::Holds);
        assert_eq!(report.verdict(Assumption::DoubleStandard), Verdict::Holds);
        for a in [Assumption::NoHarmNoFoul, Assumption::FairnessAsOptimization, Assumption::RepresentationMatters] {
            assert_eq!(report.verdict(a), Verdict::NotRefuted);
        }
    }
}

#[test]
fn label_scale_preserves_ratio_order() {
    let mut r = rng(8);
    for _ in 0..20 {
        let inst = random_fair_instance(
            &mut r,
            &InstanceShape {
                individuals: 6,
                labels: 3,
                groups: 2,
                denominator: 5,
                zeros: true,
                repeat: 0.2,
            },
        );
        let biased = apply_bias(
            &inst,
            &BiasSpec::uniform(&inst, Transform::LabelScale { factors: vec![int(1), int(3), ratio(1, 2)] }),
        )
        .unwrap();
        assert!(check_ratio_condition(&biased, AA, 16).holds);
        assert!(check_ratio_condition(&biased, DS, 16).holds);
    }
}

#[test]
fn phd_audit_verdicts() {
    let inst = phd_example().instance;
    let report = audit_assumptions(&inst, AuditOptions::default());
    let expected = [
        (Assumption::AffirmativeAction, Verdict::Refuted),
        (Assumption::DoubleStandard, Verdict::Holds),
        (Assumption::NoHarmNoFoul, Verdict::Refuted),
        (Assumption::FairnessAsOptimization, Verdict::NotRefuted),
        (Assumption::RepresentationMatters, Verdict::Refuted),
    ];
    for (a, v) in expected {
        assert_eq!(report.verdict(a), v, "{a}");
    }
    assert!(report.witnesses_for(Assumption::AffirmativeAction).len() >= 2);
    assert!(report.witnesses.iter().all(|w| w.reproduces(&inst)));
    assert_eq!(report.tau.as_ref().unwrap()["r=1"], "2/3");
    assert_eq!(report.tau.as_ref().unwrap()["r=0"], "1");
    assert_eq!(report.reranking.as_ref().unwrap().verdict, RerankingVerdict::ConsistentWithMonotoneBias);
}

#[test]
fn zeroing_is_flagged() {
    let mut r = rng(9);
    for _ in 0..20 {
        let inst = random_fair_instance(
            &mut r,
            &InstanceShape {
                individuals: 5,
                labels: 3,
                groups: 1,
                denominator: 4,
                zeros: false,
                repeat: 0.0,
            },
        );
        let target = inst.individuals()[0].id.clone();
        let biased = apply_bias(
            &inst,
            &BiasSpec::uniform(&inst, Transform::Zeroing { label: 1, region: vec![target.clone()] }),
        )
        .unwrap();
        let report = audit_assumptions(&biased, AuditOptions::default());
        assert_eq!(report.verdict(Assumption::AffirmativeAction), Verdict::Refuted);
        assert!(report
            .witnesses_for(Assumption::AffirmativeAction)
            .iter()
            .any(|w| w.kind == WitnessKind::ZeroViolation && w.individuals == vec![target.clone()]));
    }
}

#[test]
fn counterexample_from_ratio_witness() {
    let inst = phd_example().instance;
    let w = check_ratio_condition(&inst, AA, 16).witnesses.remove(1);
    let cx = counterexample_decision(&inst, &w, OracleLimits::default()).unwrap();
    assert!(cx.unbiased.unbiased);
    assert_eq!(cx.group, "r=1");
    assert!(!cx.certificate.is_maximal());
    // Fair tie at 3%: both tied members get the same split.
    assert_eq!(cx.decision.get("s=2,r=1"), cx.decision.get("s=3,r=1"));
    assert!(cx.decision.get("s=2,r=1").unwrap().get(0) > &Rational::from_integer(0.into()));
    let restricted = restrict(&cx.decision, &inst, "r=1").unwrap();
    let improvement = cx.certificate.improvement.as_ref().unwrap();
    assert_eq!(
        pareto_compare(&restricted, improvement, &inst, World::Unfair, &Scope::group("r=1")).unwrap(),
        ParetoRelation::SecondDominates
    );
}

#[test]
fn counterexample_from_zero_witness() {
    let inst = phd_example().instance;
    let w = check_zero_condition(&inst, AA, 16).witnesses.remove(0);
    let cx = counterexample_decision(&inst, &w, OracleLimits::default()).unwrap();
    assert!(cx.unbiased.unbiased);
    assert_eq!(cx.decision.get("s=1,r=1").unwrap(), &fairworld::ProbVector::point_mass(2, 0));
    assert!(!cx.certificate.is_maximal());
}

#[test]
fn counterexample_rejects_non_witness() {
    let inst = phd_example().instance;
    let mut w = check_zero_condition(&inst, AA, 16).witnesses.remove(0);
    w.individuals = vec!["s=1,r=0".into()];
    assert!(counterexample_decision(&inst, &w, OracleLimits::default()).is_err());
    let ds = fairworld::Witness {
        direction: Some(DS),
        ..check_zero_condition(&inst, AA, 16).witnesses.remove(0)
    };
    assert!(counterexample_decision(&inst, &ds, OracleLimits::default()).is_err());
}

#[test]
fn falsify_phd() {
    let inst = phd_example().instance;
    let opts = FalsifyOptions { trials: 1000, seed: 0 };
    let nhnf = falsify_assumption(&inst, Assumption::NoHarmNoFoul, opts).expect("NHNF counterexample");
    assert!(nhnf.witness.reproduces(&inst));
    let rm = falsify_assumption(&inst, Assumption::RepresentationMatters, opts).expect("RM counterexample");
    assert!(rm.witness.reproduces(&inst));
    assert_eq!(falsify_assumption(&inst, Assumption::NoHarmNoFoul, opts), Some(nhnf));
}

#[test]
fn falsify_identity_finds_nothing() {
    let mut r = rng(10);
    let inst = random_fair_instance(
        &mut r,
        &InstanceShape {
            individuals: 5,
            labels: 3,
            groups: 2,
            denominator: 4,
            zeros: true,
            repeat: 0.2,
        },
    );
    let opts = FalsifyOptions { trials: 1000, seed: 3 };
    for a in [Assumption::NoHarmNoFoul, Assumption::FairnessAsOptimization, Assumption::RepresentationMatters] {
        assert_eq!(falsify_assumption(&inst, a, opts), None, "{a}");
    }
}

#[test]
fn falsified_audit_is_deterministic() {
    let inst = phd_example().instance;
    let opts = AuditOptions {
        witness_cap: 16,
        falsify: Some(FalsifyOptions { trials: 200, seed: 42 }),
    };
    let a = serde_json::to_string(&audit_assumptions(&inst, opts)).unwrap();
    let b = serde_json::to_string(&audit_assumptions(&inst, opts)).unwrap();
    assert_eq!(a, b);
}

fn scores(v: &[i64]) -> BTreeMap<String, Rational> {
    v.iter().enumerate().map(|(k, &s)| (format!("i{k}"), int(s))).collect()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("i{k}")).collect()
}

#[test]
fn tau_examples() {
    let a = scores(&[1, 2, 3, 4]);
    assert_eq!(kendall_tau(&a, &a, &ids(4), "g").unwrap().tau, int(1));
    let rev = scores(&[4, 3, 2, 1]);
    assert_eq!(kendall_tau(&a, &rev, &ids(4), "g").unwrap().tau, int(-1));
    let tied = scores(&[5, 5]);
    let s = kendall_tau(&tied, &scores(&[1, 2]), &ids(2), "g").unwrap();
    assert_eq!((s.pairs, s.tau.clone()), (1, int(0)));
    assert!(kendall_tau(&a, &a, &ids(1), "g").is_err());
    assert!(kendall_tau(&a, &scores(&[1]), &ids(2), "g").is_err());
}

#[test]
fn tau_phd_group() {
    let data = ScoredDataset::from_instance(&phd_example().instance).unwrap();
    let s = data.tau("r=1").unwrap();
    assert_eq!((s.concordant, s.discordant, s.tied, s.pairs), (2, 0, 1, 3));
    assert_eq!(s.tau, ratio(2, 3));
}

#[test]
fn reranking_power_and_flip() {
    let mut r = rng(11);
    let inst = random_fair_instance(
        &mut r,
        &InstanceShape {
            individuals: 8,
            labels: 2,
            groups: 2,
            denominator: 10,
            zeros: false,
            repeat: 0.0,
        },
    );
    let power = apply_bias(&inst, &BiasSpec::uniform(&inst, Transform::Power { gamma: int(2) })).unwrap();
    let rr = reranking_report(&ScoredDataset::from_instance(&power).unwrap()).unwrap();
    assert_eq!(rr.verdict, RerankingVerdict::ConsistentWithMonotoneBias);

    let flip = fairworld::io::scores::parse_scores_csv(
        "id,group,score_a,score_b\na,g,0.5,0.1\nb,g,0.4,0.4\nc,g,0.2,0.2\n".as_bytes(),
    )
    .unwrap();
    let rr = reranking_report(&flip).unwrap();
    assert_eq!(rr.verdict, RerankingVerdict::AllAssumptionsRefuted);
    assert!(rr.tau("g").unwrap() < &int(1));
    assert_eq!(rr.witness.unwrap().individuals, vec!["a", "b"]);
}

#[test]
fn reranking_singleton_group_has_no_tau() {
    let data = ScoredDataset {
        rows: vec![ScoredRow {
            id: "a".into(),
            group: "g".into(),
            score_a: int(0),
            score_b: int(0),
            weight: int(1),
        }],
    };
    let rr = reranking_report(&data).unwrap();
    assert!(rr.groups[0].summary.is_none());
}

fn arb_binary_instance() -> impl Strategy<Value = fairworld::Instance> {
    (1usize..=7, 1usize..=2, any::<u64>()).prop_map(|(m, g, seed)| {
        let mut r = rng(seed);
        let inst = random_fair_instance(
            &mut r,
            &InstanceShape {
                individuals: m.max(g),
                labels: 2,
                groups: g,
                denominator: 4,
                zeros: true,
                repeat: 0.3,
            },
        );
        random_unfair(&mut r, &inst, 4)
    })
}

proptest! {
    #[test]
    fn corollary_matches_general_checkers(inst in arb_binary_instance()) {
        for dir in [AA, DS] {
            let general = check_direction(&inst, dir, 16).holds;
            let corollary = check_binary_corollary(&inst, dir, 16).unwrap().holds;
            prop_assert_eq!(general, corollary);
        }
    }

    #[test]
    fn witnesses_revalidate(inst in arb_binary_instance()) {
        let report = audit_assumptions(&inst, AuditOptions::default());
        for w in &report.witnesses {
            prop_assert!(w.reproduces(&inst));
        }
        for f in &report.findings {
            if f.verdict == Verdict::Refuted {
                prop_assert!(!f.witnesses.is_empty());
            }
        }
        prop_assert_ne!(report.verdict(Assumption::AffirmativeAction), Verdict::NotRefuted);
        prop_assert_ne!(report.verdict(Assumption::DoubleStandard), Verdict::NotRefuted);
    }

    #[test]
    fn tau_bounded(a in prop::collection::vec(0i64..5, 2..8), b in prop::collection::vec(0i64..5, 8)) {
        let n = a.len();
        let t = kendall_tau(&scores(&a), &scores(&b[..n]), &ids(n), "g").unwrap().tau;
        prop_assert!(t >= int(-1) && t <= int(1));
    }

    #[test]
    fn tau_self_is_one(mut a in prop::collection::btree_set(0i64..100, 2..10)) {
        let v: Vec<i64> = std::mem::take(&mut a).into_iter().collect();
        let s = scores(&v);
        prop_assert_eq!(kendall_tau(&s, &s, &ids(v.len()), "g").unwrap().tau, int(1));
    }
}

#[test]
fn violations_always_yield_certified_counterexamples() {
    let mut r = rng(12);
    let mut checked = 0;
    for _ in 0..150 {
        let inst = random_fair_instance(
            &mut r,
            &InstanceShape {
                individuals: 5,
                labels: 2 + (checked % 2),
                groups: 2,
                denominator: 4,
                zeros: true,
                repeat: 0.3,
            },
        );
        let inst = random_unfair(&mut r, &inst, 4);
        let aa = check_direction(&inst, AA, 16);
        for w in aa.witnesses.iter().take(3) {
            let cx = counterexample_decision(&inst, w, OracleLimits::default()).unwrap();
            assert!(cx.unbiased.unbiased);
            let c = pareto_maximal_oracle_with(
                &restrict(&cx.decision, &inst, &cx.group).unwrap(),
                &inst,
                World::Unfair,
                &Scope::group(cx.group.clone()),
                OracleLimits::default(),
            )
            .unwrap();
            assert!(!c.is_maximal());
            checked += 1;
        }
    }
    assert!(checked > 50);
}
