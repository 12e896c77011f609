//! Information-bottleneck trade-off curves for finite discrete joint distributions.
//!
//! The crate evaluates bottleneck variables on the information plane, solves
//! the IB, squared-IB, deterministic-IB and squared-dIB objectives, builds the
//! closed-form solutions that exist when the label is a deterministic function
//! of the input, and checks entropy perturbation bounds for joints that are
//! close to deterministic.

pub mod bottleneck;
pub mod bounds;
pub mod constructs;
pub mod error;
pub mod infotheory;
pub mod io;
pub mod rng;
pub mod solvers;

pub use bottleneck::{
    chain_evaluate, decoder_posterior, evaluate, joint_from_function, objective_value,
    point_prediction_error, BottleneckReport, Encoder, JointXY, LayerChain, Objective, Posterior,
};
pub use bounds::{BoundReport, PerturbationSample, Theorem};
pub use constructs::{DibEnvelope, HardClustering};
pub use error::{Error, Result};
pub use infotheory::{CondMatrix, JointMatrix, Matrix, ProbVector};
pub use solvers::{ScanResult, SolveResult, SolverConfig};
