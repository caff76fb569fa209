//! Fair-world decision analysis on finite populations.
//!
//! An [`Instance`] carries, for every individual, a fair and an unfair
//! conditional label distribution. On top of that the crate provides
//! payoffs and the Pareto order on decisions, tiered weight schemes and the
//! decisions associated with them, exact maximality oracles, biasing
//! processes, and an audit of the monotonicity conditions behind common
//! group-fairness assumptions.

pub mod audit;
pub mod bias;
pub mod decision;
pub mod instance;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod payoff;
pub mod rational;
pub mod scenarios;
pub mod scheme;

pub use bias::{apply_bias, infer_bias_table, BiasError, BiasSpec, BiasTable, Transform};
pub use decision::{restrict, Decision, DecisionError, Scope};
pub use instance::{
    validate_instance, Individual, Instance, InstanceError, LabelSet, ProbVector, RawIndividual,
    RawInstance, ValidateOptions, World,
};
pub use oracle::{
    exchange_improvement, exchange_oracle, is_unbiased, pareto_maximal_oracle, pareto_maximal_oracle_with,
    MaximalityCertificate, MaximalityVerdict, OracleError, OracleLimits,
};
pub use payoff::{pareto_compare, payoff_matrix, ParetoRelation, PayoffMatrix, PayoffVector};
pub use rational::Rational;
pub use scenarios::{builtin_scenario, phd_example, simplex_grid, Scenario};
pub use scheme::{
    is_associated, limit_ratio, permitted_labels, scheme_decision, ExtendedRatio, TiePolicy,
    WeightScheme,
};
pub use audit::{
    audit_assumptions, counterexample_decision, falsify_assumption, kendall_tau, reranking_report, Assumption,
    AuditOptions, AuditReport, Direction, Verdict, Witness, WitnessKind,
};
