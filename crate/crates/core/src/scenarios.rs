//! Built-in scenarios.

use std::collections::BTreeMap;

use num_traits::One;

use crate::decision::Decision;
use crate::instance::{validate_instance, Instance, ProbVector, RawIndividual, RawInstance, ValidateOptions};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?} (expected phd_example or simplex_grid:<resolution>)")]
    UnknownName(String),
    #[error("simplex grid resolution must be at least 1")]
    BadResolution,
}

/// An instance with named decisions attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub instance: Instance,
    pub decisions: BTreeMap<String, Decision>,
}

pub const PHD_LABELS: [&str; 2] = ["y=1", "y=0"];

/// Fair and unfair `P(y=1)` in percent, per `(s, r)`.
const PHD_TABLE: [(u8, u8, i64, i64); 6] = [
    (1, 0, 1, 1),
    (2, 0, 2, 2),
    (3, 0, 4, 4),
    (1, 1, 1, 0),
    (2, 1, 3, 1),
    (3, 1, 3, 2),
];

pub fn phd_id(s: u8, r: u8) -> String {
    format!("s={s},r={r}")
}

fn binary(p1: Rational) -> Vec<Rational> {
    let p0 = Rational::one() - &p1;
    vec![p1, p0]
}

/// Six equally likely `(s, r)` cells, labels `y=1` then `y=0`, with the two
/// decisions `d` (select iff unfair `P(y=1) ≥ 2%`) and `d_prime` (unfair
/// thresholds 2% for `r=0` and 1% for `r=1`).
pub fn phd_example() -> Scenario {
    let individuals = PHD_TABLE
        .iter()
        .map(|&(s, r, fair, unfair)| RawIndividual {
            id: phd_id(s, r),
            group: format!("r={r}"),
            weight: ratio(1, 6),
            p_fair: binary(ratio(fair, 100)),
            p_unfair: Some(binary(ratio(unfair, 100))),
        })
        .collect();
    let instance = validate_instance(
        RawInstance {
            labels: PHD_LABELS.iter().map(|s| s.to_string()).collect(),
            groups: vec!["r=0".into(), "r=1".into()],
            individuals,
        },
        ValidateOptions::default(),
    )
    .expect("built-in scenario is valid");

    let select = |yes: bool| ProbVector::point_mass(2, if yes { 0 } else { 1 });
    let mut d = Decision::default();
    let mut d_prime = Decision::default();
    for ind in instance.individuals() {
        let u1 = ind.p_unfair.get(0);
        d.set(ind.id.clone(), select(*u1 >= ratio(2, 100)));
        let cut = if ind.group == "r=0" { ratio(2, 100) } else { ratio(1, 100) };
        d_prime.set(ind.id.clone(), select(*u1 >= cut));
    }
    let decisions = BTreeMap::from([("d".to_string(), d), ("d_prime".to_string(), d_prime)]);
    Scenario { instance, decisions }
}

/// Every point of the 3-label simplex whose coordinates are multiples of
/// `1/resolution`, uniformly weighted, with fair = unfair. Labels are
/// `red`, `green`, `blue`.
pub fn simplex_grid(resolution: u32) -> Result<Instance, ScenarioError> {
    if resolution == 0 {
        return Err(ScenarioError::BadResolution);
    }
    let n = resolution as i64;
    let count = (n + 1) * (n + 2) / 2;
    let mut individuals = Vec::with_capacity(count as usize);
    for r in 0..=n {
        for g in 0..=(n - r) {
            let b = n - r - g;
            let p = vec![ratio(r, n), ratio(g, n), ratio(b, n)];
            individuals.push(RawIndividual {
                id: format!("({r},{g},{b})/{n}"),
                group: "grid".into(),
                weight: ratio(1, count),
                p_fair: p.clone(),
                p_unfair: Some(p),
            });
        }
    }
    Ok(validate_instance(
        RawInstance {
            labels: vec!["red".into(), "green".into(), "blue".into()],
            groups: vec!["grid".into()],
            individuals,
        },
        ValidateOptions::default(),
    )
    .expect("grid instance is valid"))
}

/// Resolves `phd_example` or `simplex_grid:<resolution>` / `simplex_grid(<resolution>)`.
pub fn builtin_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    if name == "phd_example" {
        return Ok(phd_example());
    }
    let arg = name
        .strip_prefix("simplex_grid:")
        .or_else(|| name.strip_prefix("simplex_grid(").and_then(|s| s.strip_suffix(')')));
    match arg {
        Some(a) => {
            let res: u32 = a.trim().parse().map_err(|_| ScenarioError::UnknownName(name.into()))?;
            Ok(Scenario {
                instance: simplex_grid(res)?,
                decisions: BTreeMap::new(),
            })
        }
        None => Err(ScenarioError::UnknownName(name.to_string())),
    }
}
