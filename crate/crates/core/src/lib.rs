//! Semivalue payoff allocation for cooperative games.
//!
//! Exact and sampled Shapley, Banzhaf, leave-one-out and Robust Shapley
//! payoffs; replication-manipulated games with their total-payoff curves and
//! robustness checks; closed-form solvers for facility-location games.

pub mod coalition;
pub mod combinatorics;
pub mod error;
pub mod facility;
pub mod game;
pub mod replication;
pub mod sampler;
pub mod semivalue;

pub use coalition::{subsets, Coalition, MAX_PLAYERS};
pub use error::{Error, MissingCell, Result};
pub use facility::{
    fast_banzhaf, fast_shapley, generate_facility_game, FacilityLayout, SortedDimension,
    UtilityMatrix,
};
pub use game::{
    AssumptionReport, CoverageGame, GameSpec, Limits, MarginalProfile, SyntheticKind,
    SyntheticParams, Valuation, Violation,
};
pub use replication::{
    adversarial_profile, check_robustness, curve_from_profile, delta_single_replication,
    induce_replication, limit_from_profile, limit_total_payoff, perturbation_gain_bound,
    perturbed_coverage_replicas, replicated_importance_weights, robust_shapley_loss_bound,
    shapley_weight_properties, total_payoff_curve, AdversarialProbe, LimitCheck,
    PrefixViolation, ReplicationScenario, RobustnessMode, RobustnessVerdict,
    WeightPropertyReport,
};
pub use sampler::{
    approximate_semivalue, draw_samples, estimate_payoffs, pairwise_differences,
    reconcile_feasibility, Budget, EstimateSet, PlayerEstimate, SampleBatch, SamplerConfig, SizeDistribution,
};
pub use semivalue::{
    coalition_weight, exact_payoff, exact_payoffs_all, importance_weights, robust_shapley_gamma,
    ImportanceWeights, WeightScheme,
};

/// Free function form of [`UtilityMatrix::value`].
pub fn facility_value(m: &UtilityMatrix, s: Coalition) -> f64 {
    m.value(s)
}
