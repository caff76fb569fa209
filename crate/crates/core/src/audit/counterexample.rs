//! Unbiased decisions whose group restriction is not optimal in the unfair
//! world, built from an AA violation.
//!
//! A zero violation at `(x, i)` uses the scheme with every other label in
//! tier 1 and `i` alone in tier 2: at `x` only `i` is permitted, yet
//! `p_u(i|x) = 0`. A ratio violation on `(x, x', i, j)` picks a threshold
//! `t` between the two fair ratios and puts `i:t, j:1` in the last tier with
//! uniform ties, so `x` keeps mass on `j` and `x'` on `i`; the unfair ratios
//! then make swapping that mass a strict gain.

use num_traits::{One, Signed};

use super::{Direction, Witness, WitnessKind};
use crate::decision::{restrict, Decision, Scope};
use crate::instance::{Instance, World};
use crate::oracle::{
    is_unbiased_with, pareto_maximal_oracle_with, MaximalityCertificate, OracleError, OracleLimits,
    UnbiasedVerdict,
};
use crate::rational::Rational;
use crate::scheme::{scheme_decision, ExtendedRatio, SchemeError, TiePolicy, WeightScheme};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CounterexampleError {
    #[error("witness is not an AA zero or ratio violation")]
    WrongKind,
    #[error("witness does not reproduce on this instance")]
    InvalidWitness,
    #[error("constructed decision is not a certified counterexample; this indicates an internal error")]
    NotCertified,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterexampleDecision {
    pub decision: Decision,
    pub scheme: WeightScheme,
    pub tie: TiePolicy,
    pub group: String,
    /// Fair-world maximality over the instance plus measurability.
    pub unbiased: UnbiasedVerdict,
    /// Unfair-world oracle on the restriction to `group`; improvable.
    pub certificate: MaximalityCertificate,
}

fn positive_finite(r: &ExtendedRatio) -> Option<Rational> {
    match r {
        ExtendedRatio::Finite(v) if v.is_positive() => Some(v.clone()),
        _ => None,
    }
}

/// Scheme with `rest` (weight 1 each) as tier 1 and `last` as tier 2.
fn two_tier(n: usize, last: &[(usize, Rational)]) -> Result<WeightScheme, SchemeError> {
    let mut weights = vec![Rational::one(); n];
    for (l, w) in last {
        weights[*l] = w.clone();
    }
    let tail: Vec<usize> = last.iter().map(|(l, _)| *l).collect();
    let rest: Vec<usize> = (0..n).filter(|l| !tail.contains(l)).collect();
    let tiers = if rest.is_empty() { vec![tail] } else { vec![rest, tail] };
    WeightScheme::new(tiers, weights)
}

pub fn counterexample_decision(
    instance: &Instance,
    witness: &Witness,
    limits: OracleLimits,
) -> Result<CounterexampleDecision, CounterexampleError> {
    if witness.direction != Some(Direction::AffirmativeAction)
        || !matches!(witness.kind, WitnessKind::ZeroViolation | WitnessKind::RatioViolation)
    {
        return Err(CounterexampleError::WrongKind);
    }
    if !witness.reproduces(instance) {
        return Err(CounterexampleError::InvalidWitness);
    }
    let n = instance.n_labels();
    let x = instance
        .individual(&witness.individuals[0])
        .ok_or(CounterexampleError::InvalidWitness)?;

    let (scheme, tie) = match witness.kind {
        WitnessKind::ZeroViolation => (two_tier(n, &[(witness.labels[0], Rational::one())])?, TiePolicy::LowestIndex),
        _ => {
            let (i, j) = match witness.labels.as_slice() {
                [i, j] => (*i, *j),
                _ => (0, 1),
            };
            let y = instance
                .individual(&witness.individuals[1])
                .ok_or(CounterexampleError::InvalidWitness)?;
            let rx = ExtendedRatio::of(x.p_fair.get(i), x.p_fair.get(j));
            let ry = ExtendedRatio::of(y.p_fair.get(i), y.p_fair.get(j));
            let t = positive_finite(&rx)
                .or_else(|| positive_finite(&ry))
                .unwrap_or_else(Rational::one);
            (two_tier(n, &[(i, t), (j, Rational::one())])?, TiePolicy::Uniform)
        }
    };

    let decision = scheme_decision(instance, &scheme, World::Fair, &Scope::All, tie)?;
    let unbiased = is_unbiased_with(&decision, instance, limits)?;
    let group = x.group.clone();
    let restricted = restrict(&decision, instance, &group).map_err(OracleError::from)?;
    let certificate =
        pareto_maximal_oracle_with(&restricted, instance, World::Unfair, &Scope::group(group.clone()), limits)?;
    if !unbiased.unbiased || certificate.is_maximal() {
        return Err(CounterexampleError::NotCertified);
    }
    Ok(CounterexampleDecision {
        decision,
        scheme,
        tie,
        group,
        unbiased,
        certificate,
    })
}
