//! Randomized search for counterexamples to NHNF, FaO and RM.
//!
//! Every trial draws from its own ChaCha8 stream seeded from `(seed, trial)`,
//! so the first counterexample found depends on nothing but those two
//! numbers.
//!
//! NHNF and FaO trials pick a group and a decision on it (deterministic or
//! mixed with small denominators), then a partner: another random decision,
//! a one-member relabeling, or an exact improvement in the premise world.
//! Both orders of the pair are tested. RM trials draw a random tiered
//! scheme (sometimes with a within-tier ratio copied from an observed fair
//! ratio, to land on ties), take its fair-world decision and look for a
//! group whose restriction can be improved in the unfair world.

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conditions::check_direction;
use super::{Assumption, Witness, WitnessKind};
use crate::decision::{restrict, Decision, Scope};
use crate::instance::{Individual, Instance, ProbVector, World};
use crate::oracle::{exchange_improvement, exchange_oracle, MaximalityVerdict};
use crate::payoff::{payoff_matrix, strictly_below};
use crate::rational::{int, ratio, Rational};
use crate::scheme::{scheme_decision, TiePolicy, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsifyOptions {
    pub trials: u64,
    pub seed: u64,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        Self { trials: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub witness: Witness,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed) ^ trial))
}

/// First counterexample in trial order, if any. AA and DS are decided by
/// the exact checkers instead of sampling.
pub fn falsify_assumption(instance: &Instance, assumption: Assumption, options: FalsifyOptions) -> Option<Counterexample> {
    match assumption {
        Assumption::AffirmativeAction | Assumption::DoubleStandard => {
            let result = check_direction(instance, assumption.implied_direction(), 1);
            result.witnesses.into_iter().next().map(|witness| Counterexample { trial: 0, witness })
        }
        _ => (0..options.trials).find_map(|t| {
            let mut rng = trial_rng(options.seed, t);
            let witness = match assumption {
                Assumption::RepresentationMatters => rm_trial(instance, &mut rng),
                _ => order_trial(instance, assumption, &mut rng),
            }?;
            let mut witness = witness;
            witness.values.insert("trial".into(), t.to_string());
            Some(Counterexample { trial: t, witness })
        }),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> ProbVector {
    if rng.gen_bool(0.5) {
        return ProbVector::point_mass(n, rng.gen_range(0..n));
    }
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return ProbVector::new(raw.into_iter().map(|v| ratio(v, total)).collect()).expect("normalized");
        }
    }
}

fn random_decision(rng: &mut ChaCha8Rng, members: &[&Individual], n: usize) -> Decision {
    let mut d = Decision::default();
    for ind in members {
        d.set(ind.id.clone(), random_vector(rng, n));
    }
    d
}

fn diagonal(d: &Decision, instance: &Instance, world: World, scope: &Scope) -> String {
    let diag = payoff_matrix(d, instance, world, scope).expect("decision covers scope").diagonal();
    format!(
        "({})",
        diag.iter().map(crate::rational::format).collect::<Vec<_>>().join(", ")
    )
}

fn order_trial(instance: &Instance, assumption: Assumption, rng: &mut ChaCha8Rng) -> Option<Witness> {
    let (premise, conclusion) = match assumption {
        Assumption::NoHarmNoFoul => (World::Unfair, World::Fair),
        _ => (World::Fair, World::Unfair),
    };
    let n = instance.n_labels();
    let group = instance.groups().choose(rng)?.clone();
    let scope = Scope::group(group.clone());
    let members: Vec<&Individual> = instance.members(&group).collect();
    let d = random_decision(rng, &members, n);
    let partner = match rng.gen_range(0..3) {
        0 => random_decision(rng, &members, n),
        1 => {
            let mut p = d.clone();
            let who = members.choose(rng)?;
            p.set(who.id.clone(), ProbVector::point_mass(n, rng.gen_range(0..n)));
            p
        }
        _ => {
            let cert = exchange_oracle(&d, instance, premise, &scope).ok()?;
            match exchange_improvement(&cert, &d, instance, premise, &scope).ok()? {
                Some(better) => better,
                None => random_decision(rng, &members, n),
            }
        }
    };
    for (a, b) in [(&d, &partner), (&partner, &d)] {
        let below_premise = strictly_below(a, b, instance, premise, &scope).ok()?;
        if below_premise && !strictly_below(a, b, instance, conclusion, &scope).ok()? {
            let values = [
                ("assumption".to_string(), assumption.code().to_string()),
                ("d_fair".into(), diagonal(a, instance, World::Fair, &scope)),
                ("d_prime_fair".into(), diagonal(b, instance, World::Fair, &scope)),
                ("d_unfair".into(), diagonal(a, instance, World::Unfair, &scope)),
                ("d_prime_unfair".into(), diagonal(b, instance, World::Unfair, &scope)),
            ];
            return Some(Witness {
                kind: WitnessKind::DominanceCounterexample,
                direction: None,
                group: Some(group.clone()),
                individuals: members.iter().map(|m| m.id.clone()).collect(),
                labels: (0..n).collect(),
                values: values.into_iter().collect(),
                decisions: Some([("d".to_string(), a.clone()), ("d_prime".to_string(), b.clone())].into()),
            });
        }
    }
    None
}

/// Random tiered scheme over the instance's labels.
pub fn random_scheme(instance: &Instance, rng: &mut ChaCha8Rng) -> WeightScheme {
    let n = instance.n_labels();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tiers: Vec<Vec<usize>> = vec![vec![order[0]]];
    for &l in &order[1..] {
        if rng.gen_bool(1.0 / 3.0) {
            tiers.push(vec![l]);
        } else {
            tiers.last_mut().expect("non-empty").push(l);
        }
    }
    let mut weights: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1..=9))).collect();
    if rng.gen_bool(0.5) {
        // Copy an observed fair ratio into a tier, so boundary ties occur.
        let candidates: Vec<&Vec<usize>> = tiers.iter().filter(|t| t.len() >= 2).collect();
        if let Some(tier) = candidates.choose(rng) {
            let a = tier[0];
            let b = tier[1];
            let ind = instance.individuals().choose(rng).expect("non-empty instance");
            let (pa, pb) = (ind.p_fair.get(a), ind.p_fair.get(b));
            if pa.is_positive() && pb.is_positive() {
                weights[a] = &weights[b] * pa / pb;
            }
        }
    }
    WeightScheme::new(tiers, weights).expect("well-formed random scheme")
}

fn tie_name(tie: TiePolicy) -> &'static str {
    match tie {
        TiePolicy::LowestIndex => "lowest-index",
        TiePolicy::Uniform => "uniform",
    }
}

fn rm_trial(instance: &Instance, rng: &mut ChaCha8Rng) -> Option<Witness> {
    let scheme = random_scheme(instance, rng);
    let tie = if rng.gen_bool(0.5) { TiePolicy::LowestIndex } else { TiePolicy::Uniform };
    let d = scheme_decision(instance, &scheme, World::Fair, &Scope::All, tie).ok()?;
    if exchange_oracle(&d, instance, World::Fair, &Scope::All).ok()?.verdict != MaximalityVerdict::Maximal {
        return None;
    }
    for group in instance.groups() {
        let scope = Scope::group(group.clone());
        let restricted = restrict(&d, instance, group).ok()?;
        let cert = exchange_oracle(&restricted, instance, World::Unfair, &scope).ok()?;
        if let Some(better) = exchange_improvement(&cert, &restricted, instance, World::Unfair, &scope).ok()? {
            let values = [
                ("assumption".to_string(), Assumption::RepresentationMatters.code().to_string()),
                ("scheme".into(), scheme.display(instance.labels())),
                ("tie".into(), tie_name(tie).to_string()),
                ("restriction_unfair".into(), diagonal(&restricted, instance, World::Unfair, &scope)),
                ("improvement_unfair".into(), diagonal(&better, instance, World::Unfair, &scope)),
            ];
            return Some(Witness {
                kind: WitnessKind::DominanceCounterexample,
                direction: None,
                group: Some(group.clone()),
                individuals: instance.members(group).map(|m| m.id.clone()).collect(),
                labels: (0..instance.n_labels()).collect(),
                values: values.into_iter().collect(),
                decisions: Some([("d".to_string(), d), ("improvement".to_string(), better)].into()),
            });
        }
    }
    None
}
