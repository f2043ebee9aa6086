//! Stochastic gradient methods whose sampling follows a Markov chain on a
//! graph, together with tools for computing the chain's mixing, hitting and
//! cover times.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chain;
pub mod graph;
pub mod harness;
pub mod numeric;
pub mod objective;
pub mod optim;
pub mod rng;
pub mod staleness;
pub mod times;
