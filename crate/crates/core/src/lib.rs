//! Nondominated sums of Minkowski sums of finite stable sets.
//!
//! The crate computes the nondominated (ND) sum of several local sets, tracks
//! which combinations of local vectors produce each ND vector, classifies
//! vectors as extreme supported, supported non-extreme or unsupported, finds
//! minimum generator sets exactly, prunes redundant local vectors with
//! bounding sets, and generates reproducible benchmark instances.

pub mod bounding;
pub mod classify;
pub mod error;
pub mod exactlp;
pub mod experiments;
pub mod generator;
pub mod instance;
pub mod instgen;
pub mod ndfilter;
pub mod stable;
pub mod vector;

pub use bounding::{
    bound_nd_sum, conditionally_dominated, lower_hull_bound, prune_with_bounds, prune_with_role_bounds,
    BoundKind, BoundingSet, Side,
};
pub use classify::{classify_all, classify_point, classify_set, extreme_points, extreme_points_of_sum, minimizers, Classification, Partition, SearchDirection};
pub use error::{Error, Result};
pub use experiments::{
    fit_growth, metric_q, metric_r, run_cell, run_grid, CellKey, GridSpec, GrowthFit, LowerMode, MetricValue, RunRecord,
};
pub use generator::{
    DEFAULT_NODE_LIMIT, candidate_sets, combinations_of, fixed_sets, is_redundant, minimum_generator_set,
    minimum_generator_set_from, redundancy_mask,
    solve_mgs_ip, vector_roles, verify_generator, verify_generator_against, GeneratorSet, MgsOptions, MgsResult, SolverPath,
    VectorRole,
};
pub use instance::MspInstance;
pub use instgen::{
    DEFAULT_HYPERCUBE_MAX, assemble_instance, generate_local_set, ConfigSpec, Configuration, GenSpec, GeneratedInstance, Method,
};
pub use ndfilter::{
    all_combinations, enumerate_sums, filter_naive, filter_nondominated, minkowski_pair, nd_sum, Combination, NdSum, NdSumOptions,
    Provenance,
};
pub use stable::{set_leq, set_leqq, set_lt, StableSet};
pub use vector::{compare, Dominance, ObjectiveVector};
