//! Simulation and verification toolkit for trap models: continuous-time
//! random walks among heavy-tailed traps on finite graphs, exact
//! linear-algebra oracles for their hitting and occupation laws, K-process
//! samplers, and the step-function trajectory metric used to compare them.
//!
//! The numeric kernel is generic over the scalar type through [`scalar::Real`]
//! (any `num_traits` float works); the type aliases at the crate root pin the
//! `f64` instantiations used throughout the simulations and the CLI.

pub mod env;
pub mod error;
pub mod exact;
pub mod graph;
pub mod kproc;
pub mod metric;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod walk;

pub use error::Error;
pub use rng::RandomSource;
pub use scalar::Real;

/// Vertex ids are dense 0-based integers.
pub type VertexId = u32;

pub type Result<T, E = Error> = std::result::Result<T, E>;

// Concrete `f64` instantiations of the generic core types.
pub type Environment = env::Environment<f64>;
pub type LimitWeights = env::LimitWeights<f64>;
pub type Trajectory = walk::Trajectory<f64>;
pub type TraceStats = walk::TraceStats<f64>;
pub type Distribution = exact::Distribution<f64>;
pub type StepFn = metric::StepFn<f64>;
pub type KParams = kproc::KParams<f64>;
