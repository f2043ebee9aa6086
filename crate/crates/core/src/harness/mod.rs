//! Config-driven experiment runs, aggregation across seeds, CSV output and
//! the canned reproductions.

mod aggregate;
mod config;
mod csv;
mod fig1;
mod fit;
mod runner;
mod scaling;

pub use aggregate::{aggregate, AggregateRow, AggregateStats};
pub use config::{
    parse_config, AlgorithmConfig, AlgorithmName, ChainConfig, FStarConfig, GammaPolicy,
    GraphConfig, ObjectiveConfig, ReplicationConfig, RunConfig, StartConfig,
};
pub use csv::{format_float, trace_csv, write_aggregate_csv, write_trace_csv, TRACE_HEADER};
pub use fig1::{
    fig1_config, fig1_configs, reproduce_fig1, tune_halvings, Fig1Curve, Fig1Summary, Fig1Variant,
    FIG1_ALGORITHMS, FIG1_BUDGET, FIG1_HALVINGS, FIG1_TUNING_SEED_BASE,
};
pub use fit::{fit_line, fit_loglog_slope, LineFit};
pub use runner::{
    prepare, run_config, run_seeds, worker_pool, write_outputs, Prepared, Resolved, RunOutput,
    THREADS_ENV,
};
pub use scaling::{scaling_table, ScalingFamily, ScalingRow, ScalingTable};

use thiserror::Error;

use crate::chain::ChainError;
use crate::graph::GraphError;
use crate::objective::ObjectiveError;
use crate::optim::OptimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Schema violation; the message names the offending field path.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("seed {seed}: {source}")]
    Run { seed: u64, source: OptimError },
    #[error("fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("log-log fit needs positive values, got ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for divergence,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Run {
                source: OptimError::Diverged { .. } | OptimError::NonFinite,
                ..
            } => 3,
            HarnessError::Run {
                source:
                    OptimError::InvalidSpec(_) | OptimError::NoSubComponents(_) | OptimError::Shape,
                ..
            } => 2,
            HarnessError::Graph(_) | HarnessError::Chain(_) | HarnessError::Objective(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
