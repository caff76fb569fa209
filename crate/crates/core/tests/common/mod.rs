#![allow(dead_code)]

use std::collections::BTreeMap;

use fairworld::bias::{apply_bias, BiasSpec, Transform};
use fairworld::instance::{validate_instance, Instance, ProbVector, RawIndividual, RawInstance, ValidateOptions, World};
use fairworld::rational::{int, ratio, Rational};
use fairworld::{Decision, Scope, WeightScheme};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pv(entries: &[(i64, i64)]) -> ProbVector {
    ProbVector::new(entries.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
}

/// Vector on the `1/denominator` lattice; `zeros` allows zero entries.
pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, denominator: i64, zeros: bool) -> Vec<Rational> {
    loop {
        let cuts: Vec<i64> = {
            let mut c: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..=denominator)).collect();
            c.sort();
            c
        };
        let mut parts = Vec::with_capacity(n);
        let mut prev = 0;
        for c in cuts.iter().chain(std::iter::once(&denominator)) {
            parts.push(c - prev);
            prev = *c;
        }
        if zeros || parts.iter().all(|&p| p > 0) {
            return parts.into_iter().map(|p| ratio(p, denominator)).collect();
        }
    }
}

pub struct InstanceShape {
    pub individuals: usize,
    pub labels: usize,
    pub groups: usize,
    pub denominator: i64,
    pub zeros: bool,
    /// Chance that an individual copies an earlier fair vector.
    pub repeat: f64,
}

/// Fair side only (unfair = fair); uneven rational weights.
pub fn random_fair_instance(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> Instance {
    let groups: Vec<String> = (0..shape.groups).map(|g| format!("g{g}")).collect();
    let raw_weights: Vec<i64> = (0..shape.individuals).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = raw_weights.iter().sum();
    let mut fair: Vec<Vec<Rational>> = Vec::new();
    let mut individuals = Vec::new();
    for k in 0..shape.individuals {
        let p = if !fair.is_empty() && rng.gen_bool(shape.repeat) {
            fair.choose(rng).unwrap().clone()
        } else {
            random_vector(rng, shape.labels, shape.denominator, shape.zeros)
        };
        fair.push(p.clone());
        // First members cover every group.
        let group = if k < shape.groups { k } else { rng.gen_range(0..shape.groups) };
        individuals.push(RawIndividual {
            id: format!("x{k}"),
            group: groups[group].clone(),
            weight: ratio(raw_weights[k], total),
            p_fair: p.clone(),
            p_unfair: Some(p),
        });
    }
    validate_instance(
        RawInstance {
            labels: (0..shape.labels).map(|l| format!("l{l}")).collect(),
            groups,
            individuals,
        },
        ValidateOptions::default(),
    )
    .unwrap()
}

pub fn with_unfair(instance: &Instance, unfair: Vec<Vec<Rational>>) -> Instance {
    let mut raw = instance.to_raw();
    for (ind, u) in raw.individuals.iter_mut().zip(unfair) {
        ind.p_unfair = Some(u);
    }
    validate_instance(raw, ValidateOptions::default()).unwrap()
}

/// Arbitrary (not necessarily monotone) unfair side.
pub fn random_unfair(rng: &mut ChaCha8Rng, instance: &Instance, denominator: i64) -> Instance {
    let n = instance.n_labels();
    let unfair = instance
        .individuals()
        .iter()
        .map(|_| random_vector(rng, n, denominator, true))
        .collect();
    with_unfair(instance, unfair)
}

pub fn random_scheme(rng: &mut ChaCha8Rng, n: usize) -> WeightScheme {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tiers = vec![vec![order[0]]];
    for &l in &order[1..] {
        if rng.gen_bool(0.35) {
            tiers.push(vec![l]);
        } else {
            tiers.last_mut().unwrap().push(l);
        }
    }
    let weights = (0..n).map(|_| ratio(rng.gen_range(1..=6), rng.gen_range(1..=6))).collect();
    WeightScheme::new(tiers, weights).unwrap()
}

/// A random order-preserving transform for `n` labels. AffineClamp moves
/// the endpoints 0 and 1, so it is only drawn for `interior` groups.
pub fn random_monotone_transform(rng: &mut ChaCha8Rng, n: usize, interior: bool) -> Transform {
    let choices = match (n, interior) {
        (2, true) => 4,
        (2, false) => 3,
        _ => 2,
    };
    match rng.gen_range(0..choices) {
        0 => Transform::Tilt {
            gamma: int(rng.gen_range(1..=3)),
        },
        1 => Transform::LabelScale {
            factors: (0..n).map(|_| ratio(rng.gen_range(1..=5), rng.gen_range(1..=5))).collect(),
        },
        2 => Transform::Power {
            gamma: int(rng.gen_range(1..=3)),
        },
        _ => {
            // Interior-preserving: a in (0, 1], b in [0, 1 - a].
            let a = ratio(rng.gen_range(1..=4), 4);
            let b = (Rational::from_integer(1.into()) - &a) * ratio(rng.gen_range(0..=2), 2);
            Transform::AffineClamp { a, b }
        }
    }
}

pub fn random_monotone_bias(rng: &mut ChaCha8Rng, instance: &Instance) -> Instance {
    let n = instance.n_labels();
    let spec = BiasSpec {
        groups: instance
            .groups()
            .iter()
            .map(|g| {
                let interior = instance
                    .members(g)
                    .all(|i| i.p_fair.entries().iter().all(|v| !v.is_zero()));
                (g.clone(), random_monotone_transform(rng, n, interior))
            })
            .collect(),
    };
    apply_bias(instance, &spec).unwrap()
}

/// Diagonal payoffs computed directly from the definition.
pub fn direct_diagonal(decision: &Decision, instance: &Instance, world: World, scope: &Scope) -> Vec<Rational> {
    let n = instance.n_labels();
    let mut out = vec![Rational::zero(); n];
    for ind in instance.individuals() {
        let inside = match scope {
            Scope::All => true,
            Scope::Group(g) => &ind.group == g,
        };
        if !inside {
            continue;
        }
        let d = decision.get(&ind.id).unwrap();
        for (i, slot) in out.iter_mut().enumerate() {
            *slot += &ind.weight * d.get(i) * ind.probs(world).get(i);
        }
    }
    out
}

/// `b` strictly Pareto-dominates `a`.
pub fn dominates(b: &[Rational], a: &[Rational]) -> bool {
    b.iter().zip(a).all(|(x, y)| x >= y) && b.iter().zip(a).any(|(x, y)| x > y)
}

/// Weller's condition checked on one far element of the sequence
/// `ω_i = w_i · K^(-tier(i))`. `K` must dwarf every ratio in `p`.
pub fn permitted_by_sequence(scheme: &WeightScheme, p: &ProbVector, big: i64) -> Vec<usize> {
    let n = p.len();
    let omega: Vec<Rational> = (0..n)
        .map(|i| {
            let t = scheme.tier_of(i) as u32;
            scheme.weights()[i].clone() / Rational::from_integer(num_bigint::BigInt::from(big).pow(t))
        })
        .collect();
    (0..n)
        .filter(|&i| {
            (0..n).filter(|&j| j != i).all(|j| {
                let (pi, pj) = (p.get(i), p.get(j));
                // p_i / p_j >= ω_i / ω_j, cross-multiplied (0/0 passes).
                pi * &omega[j] >= pj * &omega[i]
            })
        })
        .collect()
}

/// Every deterministic decision on `scope` (mass on one label per member).
pub fn all_deterministic(instance: &Instance, scope: &Scope) -> Vec<Decision> {
    let members: Vec<_> = scope.members(instance).unwrap();
    let n = instance.n_labels();
    let mut out = vec![Decision::default()];
    for ind in members {
        let mut next = Vec::with_capacity(out.len() * n);
        for d in &out {
            for l in 0..n {
                let mut e = d.clone();
                e.set(ind.id.clone(), ProbVector::point_mass(n, l));
                next.push(e);
            }
        }
        out = next;
    }
    out
}

pub fn decision_from(pairs: &[(&str, ProbVector)]) -> Decision {
    Decision::new(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<BTreeMap<_, _>>())
}
