//! Exact Pareto-maximality checks.
//!
//! [`pareto_maximal_oracle`] solves the improvement linear program in exact
//! arithmetic and returns an improving decision when one exists.
//! [`exchange_oracle`] reaches the same verdict combinatorially: a decision
//! can be improved exactly when some cycle of label exchanges, priced at the
//! best rates its current support allows, gains more than it loses. When no
//! such cycle exists it returns strictly positive label prices under which
//! every individual's support is a best response. The two share no code
//! path beyond payoff evaluation and serve as cross-checks of each other.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decision::{Decision, DecisionError, Scope};
use crate::instance::{Individual, Instance, ProbVector, World};
use crate::lp::{self, LinearProgram, LpOutcome};
use crate::payoff::{compare_payoffs, payoff_matrix, ParetoRelation};
use crate::rational::{self, Rational};
use crate::scheme::ExtendedRatio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_individuals: usize,
    pub max_labels: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_individuals: 12,
            max_labels: 4,
        }
    }
}

impl OracleLimits {
    pub fn unlimited() -> Self {
        Self {
            max_individuals: usize::MAX,
            max_labels: usize::MAX,
        }
    }

    fn check(&self, individuals: usize, labels: usize) -> Result<(), OracleError> {
        if individuals > self.max_individuals || labels > self.max_labels {
            return Err(OracleError::ScaleGuard {
                individuals,
                labels,
                max_individuals: self.max_individuals,
                max_labels: self.max_labels,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(
        "oracle scale guard: {individuals} individuals x {labels} labels exceeds \
         {max_individuals} x {max_labels} (override the guard to proceed)"
    )]
    ScaleGuard {
        individuals: usize,
        labels: usize,
        max_individuals: usize,
        max_labels: usize,
    },
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("improvement program was {0}; this indicates an internal error")]
    Solver(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalityVerdict {
    Maximal,
    Improvable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalityCertificate {
    pub verdict: MaximalityVerdict,
    pub world: World,
    pub scope: Scope,
    /// Diagonal payoffs of the input decision.
    #[serde(with = "rational::serde_rational_vec")]
    pub before: Vec<Rational>,
    /// Diagonal payoffs of the improvement, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<PayoffList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improvement: Option<Decision>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffList(#[serde(with = "rational::serde_rational_vec")] pub Vec<Rational>);

impl MaximalityCertificate {
    pub fn is_maximal(&self) -> bool {
        self.verdict == MaximalityVerdict::Maximal
    }
}

pub fn pareto_maximal_oracle(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<MaximalityCertificate, OracleError> {
    pareto_maximal_oracle_with(decision, instance, world, scope, OracleLimits::default())
}

/// Maximizes the total diagonal payoff over all decisions on `scope` that
/// are componentwise at least as good as `decision`. A positive gap means
/// the optimum strictly dominates the input.
pub fn pareto_maximal_oracle_with(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
    limits: OracleLimits,
) -> Result<MaximalityCertificate, OracleError> {
    decision.check_covers(instance, scope)?;
    let members = scope.members(instance)?;
    let n = instance.n_labels();
    limits.check(members.len(), n)?;
    let before = payoff_matrix(decision, instance, world, scope)?.diagonal();

    let m = members.len();
    let n_vars = m * n + n;
    let mut a = Vec::with_capacity(m + n);
    let mut b = Vec::with_capacity(m + n);
    for k in 0..m {
        let mut row = vec![Rational::zero(); n_vars];
        for i in 0..n {
            row[k * n + i] = Rational::one();
        }
        a.push(row);
        b.push(Rational::one());
    }
    let mut c = vec![Rational::zero(); n_vars];
    for i in 0..n {
        let mut row = vec![Rational::zero(); n_vars];
        for (k, ind) in members.iter().enumerate() {
            let coef = &ind.weight * ind.probs(world).get(i);
            c[k * n + i] = coef.clone();
            row[k * n + i] = coef;
        }
        row[m * n + i] = -Rational::one();
        a.push(row);
        b.push(before[i].clone());
    }
    let (x, value) = match lp::solve(&LinearProgram { a, b, c }) {
        LpOutcome::Optimal { x, value } => (x, value),
        LpOutcome::Infeasible => return Err(OracleError::Solver("infeasible")),
        LpOutcome::Unbounded => return Err(OracleError::Solver("unbounded")),
    };
    let baseline: Rational = before.iter().sum();
    if value <= baseline {
        return Ok(MaximalityCertificate {
            verdict: MaximalityVerdict::Maximal,
            world,
            scope: scope.clone(),
            before,
            after: None,
            improvement: None,
        });
    }
    let mut improvement = Decision::default();
    for (k, ind) in members.iter().enumerate() {
        let v = ProbVector::new(x[k * n..(k + 1) * n].to_vec())
            .map_err(|_| OracleError::Solver("non-distribution solution"))?;
        improvement.set(ind.id.clone(), v);
    }
    let after = payoff_matrix(&improvement, instance, world, scope)?.diagonal();
    Ok(MaximalityCertificate {
        verdict: MaximalityVerdict::Improvable,
        world,
        scope: scope.clone(),
        before,
        after: Some(PayoffList(after)),
        improvement: Some(improvement),
    })
}

/// One step of an exchange cycle: at `id`, move mass from label `from` to
/// label `to`, gaining `rate` units of `to`-payoff per unit of `from`-payoff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub rate: ExtendedRatio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeCertificate {
    pub verdict: MaximalityVerdict,
    /// Profitable cycle (or a single free exchange) when improvable.
    pub cycle: Vec<Exchange>,
    /// Strictly positive label prices when maximal: every supported label
    /// maximizes `price_i * p_i` for its individual.
    #[serde(with = "rational::serde_rational_vec")]
    pub prices: Vec<Rational>,
}

/// Combinatorial maximality check. Exponential only in the number of labels.
pub fn exchange_oracle(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<ExchangeCertificate, OracleError> {
    decision.check_covers(instance, scope)?;
    let members = scope.members(instance)?;
    let n = instance.n_labels();

    // best[j][i]: best rate for moving mass from j to i, with the individual realizing it.
    let mut best: Vec<Vec<Option<(Rational, &Individual)>>> = vec![vec![None; n]; n];
    for ind in &members {
        let d = decision.require(&ind.id)?;
        let p = ind.probs(world);
        for j in d.support() {
            for i in 0..n {
                if i == j || p.get(i).is_zero() {
                    continue;
                }
                if p.get(j).is_zero() {
                    return Ok(ExchangeCertificate {
                        verdict: MaximalityVerdict::Improvable,
                        cycle: vec![Exchange {
                            id: ind.id.clone(),
                            from: j,
                            to: i,
                            rate: ExtendedRatio::Infinity,
                        }],
                        prices: Vec::new(),
                    });
                }
                let rate = p.get(i) / p.get(j);
                if best[j][i].as_ref().is_none_or(|(r, _)| rate > *r) {
                    best[j][i] = Some((rate, ind));
                }
            }
        }
    }

    if let Some(cycle) = profitable_cycle(&best) {
        let cycle = cycle
            .windows(2)
            .map(|w| {
                let (rate, ind) = best[w[0]][w[1]].as_ref().expect("edge on cycle");
                Exchange {
                    id: ind.id.clone(),
                    from: w[0],
                    to: w[1],
                    rate: ExtendedRatio::Finite(rate.clone()),
                }
            })
            .collect();
        return Ok(ExchangeCertificate {
            verdict: MaximalityVerdict::Improvable,
            cycle,
            prices: Vec::new(),
        });
    }

    // price_j = max over exchange paths starting at j of the product of rates.
    let mut prices = vec![Rational::one(); n];
    for _ in 0..n {
        let mut changed = false;
        for j in 0..n {
            for i in 0..n {
                if let Some((rate, _)) = &best[j][i] {
                    let candidate = rate * &prices[i];
                    if candidate > prices[j] {
                        prices[j] = candidate;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(ExchangeCertificate {
        verdict: MaximalityVerdict::Maximal,
        cycle: Vec::new(),
        prices,
    })
}

/// Simple cycle whose rate product exceeds one, as a closed node walk.
fn profitable_cycle(best: &[Vec<Option<(Rational, &Individual)>>]) -> Option<Vec<usize>> {
    let n = best.len();
    fn dfs(
        best: &[Vec<Option<(Rational, &Individual)>>],
        start: usize,
        node: usize,
        product: &Rational,
        path: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        for next in start..best.len() {
            let Some((rate, _)) = &best[node][next] else {
                continue;
            };
            let p = product * rate;
            if next == start {
                if p > Rational::one() {
                    let mut cycle = path.clone();
                    cycle.push(start);
                    return Some(cycle);
                }
            } else if !path.contains(&next) {
                path.push(next);
                if let Some(c) = dfs(best, start, next, &p, path) {
                    return Some(c);
                }
                path.pop();
            }
        }
        None
    }
    (0..n).find_map(|start| dfs(best, start, start, &Rational::one(), &mut vec![start]))
}

/// Every deterministic decision on `scope`, in lexicographic order of
/// labels per member. `n_labels ^ members` items.
pub fn deterministic_decisions(instance: &Instance, scope: &Scope) -> Result<Vec<Decision>, DecisionError> {
    let members = scope.members(instance)?;
    let n = instance.n_labels();
    let total = n.checked_pow(members.len() as u32).expect("enumeration too large");
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut d = Decision::default();
        for ind in &members {
            d.set(ind.id.clone(), ProbVector::point_mass(n, code % n));
            code /= n;
        }
        out.push(d);
    }
    Ok(out)
}

/// A deterministic decision strictly dominating `decision`, if any.
pub fn dominating_deterministic(
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<Option<Decision>, DecisionError> {
    let base = payoff_matrix(decision, instance, world, scope)?.diagonal();
    for d in deterministic_decisions(instance, scope)? {
        let other = payoff_matrix(&d, instance, world, scope)?.diagonal();
        if compare_payoffs(&other, &base) == ParetoRelation::FirstDominates {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnbiasedVerdict {
    pub unbiased: bool,
    /// Fair-world maximality over the whole instance.
    pub maximality: MaximalityCertificate,
    /// Two individuals with identical fair distributions but different
    /// assignments, if any.
    pub measurability_violation: Option<(String, String)>,
    /// Profitable fair-world exchange cycle when not maximal.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub improving_exchange: Vec<Exchange>,
}

pub fn is_unbiased(decision: &Decision, instance: &Instance) -> Result<UnbiasedVerdict, OracleError> {
    is_unbiased_with(decision, instance, OracleLimits::default())
}

pub fn is_unbiased_with(
    decision: &Decision,
    instance: &Instance,
    limits: OracleLimits,
) -> Result<UnbiasedVerdict, OracleError> {
    let maximality = pareto_maximal_oracle_with(decision, instance, World::Fair, &Scope::All, limits)?;
    let measurability_violation = measurability_violation(decision, instance)?;
    let improving_exchange = if maximality.is_maximal() {
        Vec::new()
    } else {
        exchange_oracle(decision, instance, World::Fair, &Scope::All)?.cycle
    };
    Ok(UnbiasedVerdict {
        unbiased: maximality.is_maximal() && measurability_violation.is_none(),
        maximality,
        measurability_violation,
        improving_exchange,
    })
}

/// First pair (instance order) sharing `p_fair` but not the assignment.
pub fn measurability_violation(
    decision: &Decision,
    instance: &Instance,
) -> Result<Option<(String, String)>, DecisionError> {
    let mut seen: BTreeMap<&ProbVector, (&str, &ProbVector)> = BTreeMap::new();
    for ind in instance.individuals() {
        let d = decision.require(&ind.id)?;
        match seen.get(&ind.p_fair) {
            Some((first, assigned)) if *assigned != d => {
                return Ok(Some((first.to_string(), ind.id.clone())));
            }
            Some(_) => {}
            None => {
                seen.insert(&ind.p_fair, (&ind.id, d));
            }
        }
    }
    Ok(None)
}

/// Confirms an exchange-oracle price vector: all prices positive and every
/// supported label attains `max_i price_i * p_i`.
pub fn prices_certify(
    prices: &[Rational],
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<bool, DecisionError> {
    if prices.iter().any(|p| !p.is_positive()) {
        return Ok(false);
    }
    for ind in scope.members(instance)? {
        let p = ind.probs(world);
        let values: Vec<Rational> = prices.iter().zip(p.entries()).map(|(a, b)| a * b).collect();
        let max = values.iter().max().expect("non-empty label set");
        if decision.require(&ind.id)?.support().iter().any(|&j| values[j] < *max) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Turns an improvable exchange certificate into a decision on `scope`
/// that strictly dominates `decision`: every label on the cycle is passed
/// along at break-even amounts, so only the starting label gains.
pub fn exchange_improvement(
    certificate: &ExchangeCertificate,
    decision: &Decision,
    instance: &Instance,
    world: World,
    scope: &Scope,
) -> Result<Option<Decision>, DecisionError> {
    if certificate.verdict == MaximalityVerdict::Maximal || certificate.cycle.is_empty() {
        return Ok(None);
    }
    let n = instance.n_labels();
    let mut out = Decision::default();
    for ind in scope.members(instance)? {
        out.set(ind.id.clone(), decision.require(&ind.id)?.clone());
    }
    let vector = |d: &Decision, id: &str| -> Result<Vec<Rational>, DecisionError> {
        Ok(d.require(id)?.entries().to_vec())
    };
    let individual = |id: &str| {
        instance
            .individual(id)
            .ok_or_else(|| DecisionError::MissingAssignment(id.to_string()))
    };

    if let [Exchange { id, from, to, rate: ExtendedRatio::Infinity }] = certificate.cycle.as_slice() {
        let mut v = vector(&out, id)?;
        let moved = std::mem::replace(&mut v[*from], Rational::zero());
        v[*to] += moved;
        out.set(id.clone(), ProbVector::with_len(v, n).expect("mass preserved"));
        return Ok(Some(out));
    }

    // Mass moved per edge when the first edge gives up one unit of payoff.
    let mut payoff = Rational::one();
    let mut amounts = Vec::with_capacity(certificate.cycle.len());
    for e in &certificate.cycle {
        let ind = individual(&e.id)?;
        let a = &payoff / (&ind.weight * ind.probs(world).get(e.from));
        amounts.push(a);
        match &e.rate {
            ExtendedRatio::Finite(r) => payoff *= r,
            _ => unreachable!("cycle edges carry finite rates"),
        }
    }
    let mut drawn: BTreeMap<(&str, usize), Rational> = BTreeMap::new();
    for (e, a) in certificate.cycle.iter().zip(&amounts) {
        *drawn.entry((e.id.as_str(), e.from)).or_insert_with(Rational::zero) += a;
    }
    let mut scale = Rational::one();
    for ((id, label), total) in &drawn {
        let available = decision.require(id)?.get(*label) / total;
        if available < scale {
            scale = available;
        }
    }
    for (e, a) in certificate.cycle.iter().zip(&amounts) {
        let mut v = vector(&out, &e.id)?;
        let moved = a * &scale;
        v[e.from] -= &moved;
        v[e.to] += moved;
        out.set(e.id.clone(), ProbVector::with_len(v, n).expect("mass preserved"));
    }
    Ok(Some(out))
}
