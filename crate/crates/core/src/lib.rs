//! Explicit three-hidden-layer squashing networks.
//!
//! The crate builds networks with a 0-1 squashing activation that separate
//! points from finite sets and finite sets from each other with prescribed
//! tolerances, and assembles networks with three hidden layers that
//! approximate a sampled target on a box grid to any sup-norm accuracy.
//!
//! Modules, bottom up:
//!
//! * [`activation`]: squashing functions and their quantiles.
//! * [`network`]: layered networks, their algebra and the JSON file format.
//! * [`domain`]: box grids, grid point sets, targets and residual sets.
//! * [`separation`]: gates, point-versus-set and set-versus-set separators.
//! * [`approximator`]: the refinement loop and sup-norm errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod approximator;
pub mod domain;
pub mod error;
pub mod network;
pub mod separation;

pub use activation::{verify_squashing, MonotoneTable, SquashingFunction, SquashingReport};
pub use approximator::{
    approximate, refine_once, sup_error, sup_error_report, Approximation, IterationRecord,
    PartialApproximation, RefinementTrace, SupError,
};
pub use domain::{grid_points, sample_target, GridDomain, PointSet, TargetFunction};
pub use error::{Error, Result};
pub use network::{
    affine_combine, deserialize, recombine, serialize, AffineMap, Construction, DenseLayer,
    LayeredNetwork, NetworkStats, Term,
};
pub use separation::{
    greedy_cover, hyperplane_witness, separate_point_from_set, separate_scalar_points,
    separate_sets_affine, separate_sets_squashed, ScalarGate, Separator,
};
