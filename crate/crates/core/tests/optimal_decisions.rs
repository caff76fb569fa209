mod common;

use common::*;
use fairworld::oracle::{deterministic_decisions, dominating_deterministic, exchange_oracle, prices_certify};
use fairworld::payoff::compare_payoffs;
use fairworld::rational::{int, ratio};
use fairworld::scheme::binary_threshold_scheme;
use fairworld::{
    exchange_improvement, is_associated, is_unbiased, limit_ratio, pareto_maximal_oracle, pareto_maximal_oracle_with,
    payoff_matrix, permitted_labels, phd_example, restrict, scheme_decision, simplex_grid, Decision, ExtendedRatio,
    MaximalityVerdict, OracleError, OracleLimits, ParetoRelation, ProbVector, Scope, TiePolicy, WeightScheme, World,
};
use proptest::prelude::*;
use rand::Rng;

fn fig_1b() -> WeightScheme {
    WeightScheme::single_tier(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap()
}

fn fig_1c() -> WeightScheme {
    WeightScheme::new(vec![vec![0], vec![1, 2]], vec![int(1), int(3), int(6)]).unwrap()
}

#[test]
fn limit_ratios_of_examples() {
    let b = fig_1b();
    assert_eq!(limit_ratio(&b, 0, 1).unwrap(), ExtendedRatio::Finite(int(1)));
    assert_eq!(limit_ratio(&b, 0, 2).unwrap(), ExtendedRatio::Finite(ratio(1, 2)));
    let c = fig_1c();
    assert_eq!(limit_ratio(&c, 0, 1).unwrap(), ExtendedRatio::Infinity);
    assert_eq!(limit_ratio(&c, 2, 0).unwrap(), ExtendedRatio::Finite(int(0)));
    assert_eq!(limit_ratio(&c, 1, 2).unwrap(), ExtendedRatio::Finite(ratio(1, 2)));
    assert!(limit_ratio(&c, 0, 3).is_err());
}

#[test]
fn permitted_on_examples() {
    let b = fig_1b();
    // Triple point: all three permitted.
    assert_eq!(permitted_labels(&b, &pv(&[(1, 4), (1, 4), (1, 2)])), vec![0, 1, 2]);
    assert_eq!(permitted_labels(&b, &pv(&[(1, 2), (1, 4), (1, 4)])), vec![0]);
    let c = fig_1c();
    // The top tier needs every other label at zero.
    assert_eq!(permitted_labels(&c, &pv(&[(1, 1), (0, 1), (0, 1)])), vec![0]);
    assert_eq!(permitted_labels(&c, &pv(&[(99, 100), (0, 1), (1, 100)])), vec![2]);
    assert_eq!(permitted_labels(&c, &pv(&[(0, 1), (1, 3), (2, 3)])), vec![1, 2]);
    assert_eq!(permitted_labels(&c, &pv(&[(0, 1), (1, 2), (1, 2)])), vec![1]);
    assert_eq!(permitted_labels(&c, &pv(&[(0, 1), (0, 1), (1, 1)])), vec![2]);
}

#[test]
fn phd_d_prime_from_thresholds() {
    let s = phd_example();
    for (group, cut) in [("r=0", ratio(2, 100)), ("r=1", ratio(1, 100))] {
        let scheme = binary_threshold_scheme(&cut).unwrap();
        let scope = Scope::group(group);
        let d = scheme_decision(&s.instance, &scheme, World::Unfair, &scope, TiePolicy::LowestIndex).unwrap();
        assert_eq!(d, restrict(&s.decisions["d_prime"], &s.instance, group).unwrap());
        assert!(is_associated(&d, &scheme, &s.instance, World::Unfair, &scope).unwrap().associated);
        assert!(pareto_maximal_oracle(&d, &s.instance, World::Unfair, &scope).unwrap().is_maximal());
    }
    let scheme = binary_threshold_scheme(&ratio(2, 100)).unwrap();
    let d = scheme_decision(&s.instance, &scheme, World::Unfair, &Scope::All, TiePolicy::LowestIndex).unwrap();
    assert_eq!(d, s.decisions["d"]);
}

#[test]
fn phd_unbiasedness() {
    let s = phd_example();
    let fair = is_unbiased(&s.decisions["d_prime"], &s.instance).unwrap();
    assert!(fair.unbiased);
    // d separates the two r=1 rows that share a fair distribution.
    let v = is_unbiased(&s.decisions["d"], &s.instance).unwrap();
    assert!(!v.unbiased);
    assert!(!v.maximality.is_maximal());
    assert_eq!(v.measurability_violation, Some(("s=2,r=1".into(), "s=3,r=1".into())));
    let mut d = s.decisions["d_prime"].clone();
    d.set("s=3,r=1", ProbVector::point_mass(2, 1));
    let v = is_unbiased(&d, &s.instance).unwrap();
    assert!(!v.unbiased);
    assert!(v.measurability_violation.is_some());
}

#[test]
fn non_maximal_gets_improvement() {
    let s = phd_example();
    // Everyone rejected except the lowest-probability member.
    let mut d = Decision::from_fn(&s.instance, &Scope::All, |_| ProbVector::point_mass(2, 1)).unwrap();
    d.set("s=1,r=1", ProbVector::point_mass(2, 0));
    let cert = pareto_maximal_oracle(&d, &s.instance, World::Fair, &Scope::All).unwrap();
    assert_eq!(cert.verdict, MaximalityVerdict::Improvable);
    let better = cert.improvement.unwrap();
    let a = direct_diagonal(&better, &s.instance, World::Fair, &Scope::All);
    assert!(dominates(&a, &cert.before));
    assert_eq!(a, cert.after.unwrap().0);
}

#[test]
fn scale_guard() {
    let inst = simplex_grid(4).unwrap();
    let scheme = fig_1b();
    let d = scheme_decision(&inst, &scheme, World::Fair, &Scope::All, TiePolicy::LowestIndex).unwrap();
    assert!(matches!(
        pareto_maximal_oracle(&d, &inst, World::Fair, &Scope::All),
        Err(OracleError::ScaleGuard { .. })
    ));
    assert!(pareto_maximal_oracle_with(&d, &inst, World::Fair, &Scope::All, OracleLimits::unlimited())
        .unwrap()
        .is_maximal());
}

#[test]
fn grid_scheme_decisions_maximal() {
    let inst = simplex_grid(5).unwrap();
    for scheme in [fig_1b(), fig_1c()] {
        for tie in [TiePolicy::LowestIndex, TiePolicy::Uniform] {
            let d = scheme_decision(&inst, &scheme, World::Fair, &Scope::All, tie).unwrap();
            let cert = exchange_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
            assert_eq!(cert.verdict, MaximalityVerdict::Maximal);
            assert!(prices_certify(&cert.prices, &d, &inst, World::Fair, &Scope::All).unwrap());
            let lp = pareto_maximal_oracle_with(&d, &inst, World::Fair, &Scope::All, OracleLimits::unlimited());
            assert!(lp.unwrap().is_maximal());
        }
    }
}

fn small_instance(seed: u64) -> (fairworld::Instance, rand_chacha::ChaCha8Rng) {
    let mut r = rng(seed);
    let m = r.gen_range(1..=4);
    let n = r.gen_range(2..=3);
    let inst = random_fair_instance(
        &mut r,
        &InstanceShape {
            individuals: m,
            labels: n,
            groups: 1,
            denominator: 4,
            zeros: true,
            repeat: 0.3,
        },
    );
    (inst, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn permitted_matches_sequence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let scheme = random_scheme(&mut r, n);
        let p = ProbVector::new(random_vector(&mut r, n, 6, true)).unwrap();
        let got = permitted_labels(&scheme, &p);
        prop_assert!(!got.is_empty());
        prop_assert_eq!(got, permitted_by_sequence(&scheme, &p, 1_000_000));
    }

    #[test]
    fn limit_ratio_multiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scheme = random_scheme(&mut r, 4);
        let (i, j, k) = (r.gen_range(0..4), r.gen_range(0..4), r.gen_range(0..4));
        let ij = limit_ratio(&scheme, i, j).unwrap();
        let jk = limit_ratio(&scheme, j, k).unwrap();
        let ik = limit_ratio(&scheme, i, k).unwrap();
        if let (ExtendedRatio::Finite(a), ExtendedRatio::Finite(b)) = (&ij, &jk) {
            prop_assert_eq!(ik, ExtendedRatio::Finite(a * b));
        }
        prop_assert_eq!(limit_ratio(&scheme, i, i).unwrap(), ExtendedRatio::Finite(int(1)));
    }

    #[test]
    fn scheme_decisions_are_associated_and_maximal(seed in any::<u64>()) {
        let (inst, mut r) = small_instance(seed);
        let scheme = random_scheme(&mut r, inst.n_labels());
        for tie in [TiePolicy::LowestIndex, TiePolicy::Uniform] {
            let d = scheme_decision(&inst, &scheme, World::Fair, &Scope::All, tie).unwrap();
            prop_assert!(is_associated(&d, &scheme, &inst, World::Fair, &Scope::All).unwrap().associated);
            prop_assert!(pareto_maximal_oracle(&d, &inst, World::Fair, &Scope::All).unwrap().is_maximal());
            prop_assert!(dominating_deterministic(&d, &inst, World::Fair, &Scope::All).unwrap().is_none());
        }
    }

    #[test]
    fn oracles_agree_with_enumeration(seed in any::<u64>()) {
        let (inst, _) = small_instance(seed);
        // Deterministic decisions: maximal iff nothing (randomized or not) dominates.
        // Against a deterministic input, enumerating deterministic rivals is not
        // enough in general, so the exchange oracle is the second opinion.
        for d in deterministic_decisions(&inst, &Scope::All).unwrap() {
            let lp = pareto_maximal_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
            let ex = exchange_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
            prop_assert_eq!(lp.is_maximal(), ex.verdict == MaximalityVerdict::Maximal);
            if dominating_deterministic(&d, &inst, World::Fair, &Scope::All).unwrap().is_some() {
                prop_assert!(!lp.is_maximal());
            }
            if ex.verdict == MaximalityVerdict::Maximal {
                prop_assert!(prices_certify(&ex.prices, &d, &inst, World::Fair, &Scope::All).unwrap());
            } else {
                let better = exchange_improvement(&ex, &d, &inst, World::Fair, &Scope::All).unwrap().unwrap();
                let a = direct_diagonal(&better, &inst, World::Fair, &Scope::All);
                prop_assert!(dominates(&a, &lp.before));
            }
        }
    }

    #[test]
    fn oracles_agree_on_mixed(seed in any::<u64>()) {
        let (inst, mut r) = small_instance(seed);
        let n = inst.n_labels();
        let d = Decision::from_fn(&inst, &Scope::All, |_| {
            ProbVector::new(random_vector(&mut r, n, 2, true)).unwrap()
        })
        .unwrap();
        let lp = pareto_maximal_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
        let ex = exchange_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
        prop_assert_eq!(lp.is_maximal(), ex.verdict == MaximalityVerdict::Maximal);
        if let Some(better) = &lp.improvement {
            let a = payoff_matrix(better, &inst, World::Fair, &Scope::All).unwrap().diagonal();
            prop_assert_eq!(compare_payoffs(&a, &lp.before), ParetoRelation::FirstDominates);
        }
    }

    #[test]
    fn relabeling_equivariance(seed in any::<u64>()) {
        let (inst, mut r) = small_instance(seed);
        let n = inst.n_labels();
        let scheme = random_scheme(&mut r, n);
        let d = scheme_decision(&inst, &scheme, World::Fair, &Scope::All, TiePolicy::Uniform).unwrap();
        // Reverse the label order everywhere.
        let flip = |v: &ProbVector| ProbVector::new(v.entries().iter().rev().cloned().collect()).unwrap();
        let mut raw = inst.to_raw();
        raw.labels.reverse();
        for ind in raw.individuals.iter_mut() {
            ind.p_fair.reverse();
            if let Some(u) = ind.p_unfair.as_mut() {
                u.reverse();
            }
        }
        let flipped = fairworld::validate_instance(raw, Default::default()).unwrap();
        let tiers = scheme.tiers().iter().map(|t| t.iter().map(|&l| n - 1 - l).collect()).collect();
        let weights = scheme.weights().iter().rev().cloned().collect();
        let flipped_scheme = WeightScheme::new(tiers, weights).unwrap();
        let fd = scheme_decision(&flipped, &flipped_scheme, World::Fair, &Scope::All, TiePolicy::Uniform).unwrap();
        for (id, v) in d.iter() {
            prop_assert_eq!(&flip(v), fd.get(id).unwrap());
        }
        let a = pareto_maximal_oracle(&d, &inst, World::Fair, &Scope::All).unwrap();
        let b = pareto_maximal_oracle(&fd, &flipped, World::Fair, &Scope::All).unwrap();
        prop_assert_eq!(a.is_maximal(), b.is_maximal());
    }
}
