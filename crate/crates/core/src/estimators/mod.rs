//! Fréchet medians and `p`-means of discrete measures: cost functionals,
//! solvers, error envelopes and a brute-force oracle.

mod bounds;
mod brute_force;
mod context;
mod functional;
mod measure;
mod schedule;
mod solver;

pub use bounds::{
    error_bound_sequence, estimate_tau, gd_error_bounds, BoundKind, ErrorEnvelope, TAU_SAFETY,
};
pub use brute_force::{brute_force_median, SearchRegion, MAX_GRID_DIM, MAX_GRID_POINTS};
pub use context::{
    check_mean_radius, comparison_c, comparison_f, gd_bound_constant, gradient_step_cap,
    step_cap_t, stochastic_step_cap, BallContext,
};
pub use functional::{
    characterization_residual, cost, lipschitz_median_check, median_subgradient, pmean_gradient,
    LipschitzTest, ATOM_EPS,
};
pub use measure::{DiscreteMeasure, MeasureSampler, PointSampler, SequenceSampler, WEIGHT_SUM_TOL};
pub use schedule::{StepKind, StepSchedule};
pub use solver::{
    default_start, fluctuation_chain, solve_median_subgradient, solve_pmean_gradient,
    solve_pmean_stochastic, weiszfeld_warm_start, SolverOptions, SolverTrace, StochasticOptions,
    Termination, CONFINEMENT_SLACK,
};
