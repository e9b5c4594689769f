//! Rider-order assignment: the constrained batch formulation, its QUBO and
//! Ising reductions, greedy, branch-and-bound, annealing and variational
//! solvers, feasibility repair, and a seeded benchmark harness.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the harness and CLI use.

pub mod anneal;
pub mod bench;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod instgen;
pub mod model;
pub mod num;
pub mod quantum;
pub mod qubo;
pub mod repair;
pub mod solution;

pub use error::{Error, Result};
pub use num::Real;

pub type Instance = model::Instance<f64>;
pub type Order = model::Order<f64>;
pub type PairCosts = model::PairCosts<f64>;
pub type Weights = model::Weights<f64>;
pub type SoftWeights = model::SoftWeights<f64>;
pub type PenaltyWeights = qubo::PenaltyWeights<f64>;
pub type QuboModel = qubo::QuboModel<f64>;
pub type IsingModel = qubo::IsingModel<f64>;
pub type SolveResult = solution::SolveResult<f64>;
pub type ExactSolution = exact::ExactSolution<f64>;
pub type SqaParams = anneal::SqaParams<f64>;
pub type SaSchedule = anneal::SaSchedule<f64>;
pub type AnnealRun = anneal::AnnealRun<f64>;
pub type QaoaRun = quantum::QaoaRun<f64>;

pub use model::{Assignment, GeoPoint, Rider, ViolationReport};
pub use repair::RepairStats;
