//! Seeded synthetic worlds with known truth, and the experiments run on them.
//!
//! Every generator is a pure function of its scenario (including the master
//! seed) and a replicate index; see [`rng`] for the stream layout.

mod experiments;
mod marginal;
mod observational_world;
mod rct_world;
pub mod rng;
pub mod scenario;

pub use experiments::{
    power_curve_conditional, power_curve_rct, rct_coverage, replicate_margin, ConditionalPowerRow, CoverageReport,
    RctPowerCurve, RctPowerRow, ReplicateMargin, DEFAULT_REPLICATES,
};
pub use marginal::Marginal;
pub use observational_world::{
    generate_observational, sup_g_deviation, ObservationalDraw, ObservationalScenario, ObservationalUnit,
};
pub use rct_world::{
    generate_rct, generate_rct_replicate, true_pibt, true_pibt_curve, MonteCarloEstimate, RctDraw, RctScenario,
    RctUnit, MIN_TRUTH_DRAWS,
};
pub use scenario::Scenario;
