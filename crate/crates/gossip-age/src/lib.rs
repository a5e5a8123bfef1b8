//! Version age of gossip networks with mobile nodes, three ways: an exact
//! level-descent solver for the stationary mean ages, closed forms and
//! scaling bounds for the structured families, and an event-driven Monte
//! Carlo simulator. The engines share one network model and are built to be
//! cross-checked against each other.
//!
//! The quantity tracked is the version age of position `i`: how many source
//! versions the node currently at `i` is behind. `solve_all` returns its
//! limiting mean for every subset of positions; `simulate` estimates the
//! same numbers from sampled trajectories; `bounds` evaluates the analytic
//! envelopes used in the scaling studies.

pub mod bounds;
pub mod error;
pub mod network;
mod numeric;
pub mod scenarios;
pub mod set;
pub mod sim;
pub mod solver;

pub use bounds::{
    disconnected_bound_recursion, disconnected_half_age, disconnected_scaling_bound,
    fc_cluster_age, fc_single_bound_recursion, fc_single_log_bound, no_mobility_reference,
    toy_ages, uniform_clique_node_age, BoundCurve, BoundKind, ToyAges, ToyVariant,
};
pub use error::{Error, Result};
pub use network::{validate, NetworkSpec, ValidatedNetwork};
pub use scenarios::{
    disconnected_pairs, fc_plus_single, fully_connected, random_network, toy_no_mobility,
    toy_variant_12, toy_variant_13,
};
pub use set::{sets_of_size, PositionSet, MAX_SET_POSITIONS};
pub use sim::{
    apply_event, event_sampler, simulate, Event, EventSampler, SimConfig, SimEstimate, SimState,
};
pub use solver::{
    mean_node_age, solve_all, solve_all_with, solve_level, solve_level_with, AgeTable,
    SolveOptions, EXACT_SOLVE_CAP,
};
