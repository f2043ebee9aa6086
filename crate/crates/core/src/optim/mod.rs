//! Markov-chain sampled SGD and averaged-gradient methods, plus gossip
//! baselines.

mod gossip;
mod run;
mod sag;
mod sampler;
mod sgd;

pub use gossip::GossipState;
pub use run::{run, Method, Problem, Record, RunSpec, Trace, DIVERGENCE_NORM};
pub use sag::{adaptive_stepsize, McSagState, SagInit, Stepsize};
pub use sampler::{Sampler, SamplerMode};
pub use sgd::{
    mc_sgd_noisy_step, mc_sgd_step, noisy_grad, nonconvex_stepsize, nonconvex_tau, Noise,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("invalid run specification: {0}")]
    InvalidSpec(String),
    #[error("minibatch noise requested but objective {0} has no sub-components")]
    NoSubComponents(String),
    #[error("non-finite gradient")]
    NonFinite,
    #[error("iterate shape does not match the objective or gossip matrix")]
    Shape,
    #[error("diverged at step {t}: |x| = {norm:e}")]
    Diverged { t: u64, norm: f64 },
}
