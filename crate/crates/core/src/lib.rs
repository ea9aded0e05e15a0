//! Adaptive symmetric interior penalty discontinuous Galerkin solver for the
//! elliptic obstacle problem with piecewise linear elements.
//!
//! The pipeline is: build a [`mesh::Mesh`], assemble a
//! [`assembly::SparseSystem`], solve the complementarity problem with
//! [`solver::solve_obstacle`], evaluate [`estimator::estimate`], mark with
//! [`adapt::mark_max`] and refine with [`mesh::Mesh::bisect`].
//! [`adapt::adaptive_loop`] runs the whole cycle.

pub mod adapt;
pub mod assembly;
pub mod bench;
pub mod dg_space;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod sparse;

pub use adapt::{adaptive_loop, mark_max, AdaptConfig, AdaptOutcome, RunRecord};
pub use assembly::{SparseSystem, DEFAULT_PENALTY};
pub use bench::{example_spec, ExampleSpec};
pub use dg_space::{ConformingFunction, DgFunction};
pub use error::{Error, Result};
pub use estimator::{classify_elements, estimate, ElementClass, EstimatorBreakdown};
pub use mesh::{initial_domain, Edge, Mesh, Triangle, Vertex};
pub use scalar::Real;
pub use solver::{
    compute_sigma, solve_linear, solve_obstacle, solve_obstacle_from, ObstacleSolution, PdasOptions,
    SolveReport,
};
pub use sparse::CsrMatrix;

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type DgFunction64 = DgFunction<f64>;
pub type DgFunction32 = DgFunction<f32>;
pub type SparseSystem64 = SparseSystem<f64>;
pub type SparseSystem32 = SparseSystem<f32>;
pub type ObstacleSolution64 = ObstacleSolution<f64>;
pub type ObstacleSolution32 = ObstacleSolution<f32>;
pub type EstimatorBreakdown64 = EstimatorBreakdown<f64>;
pub type EstimatorBreakdown32 = EstimatorBreakdown<f32>;
