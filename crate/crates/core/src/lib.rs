//! Constrained k-median and k-means with outliers, solved by reduction to
//! the outlier-free problem.
//!
//! Given an instance with an outlier budget `m`, [`reduction::run_reduction`]
//! enumerates candidate outlier sets built from a D^z-sampled pool and an
//! exact b-matching against `k + m` anchor centers, and hands each residual
//! outlier-free instance to a [`solvers::SolverPlugin`]. Any plugin that
//! solves the constrained problem without outliers can be used.

mod flow;

pub mod baseline;
pub mod bmatching;
pub mod cli;
pub mod gen;
pub mod instance;
pub mod io;
pub mod metric;
pub mod oracle;
pub mod reduction;
pub mod sampling;
pub mod solvers;

pub use instance::{ClusteringInstance, ConstraintSpec, Solution};
pub use metric::{MetricSpace, PointRef, Power};
pub use reduction::{run_reduction, ReductionConfig, ReductionOutcome};
pub use solvers::{ExactSolver, LocalSearchSolver, SolverPlugin};
