use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::chain::{
    chain_lazy_maxdeg, chain_metropolis_uniform, chain_simple_rw, chain_two_state, MarkovChain,
    Start,
};
use crate::graph::{build_complete, build_cycle, build_random_geometric, build_torus, Graph};
use crate::objective::{
    quadratic_heterogeneous, quadratic_interpolation, sigmoid_loss, two_point_disagreement,
    worst_case_chain, DataMode, Objective,
};
use crate::optim::{Noise, SagInit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphConfig {
    Cycle {
        n: usize,
    },
    Torus {
        side: usize,
        #[serde(default = "default_torus_dim")]
        dim: usize,
    },
    Complete {
        n: usize,
    },
    Geometric {
        n: usize,
        radius: f64,
        seed: u64,
    },
    /// Edge-list file: first line `n m`, then `u v` per edge.
    File {
        path: PathBuf,
    },
}

fn default_torus_dim() -> usize {
    2
}

impl GraphConfig {
    pub fn build(&self) -> Result<Graph, HarnessError> {
        Ok(match self {
            GraphConfig::Cycle { n } => build_cycle(*n)?,
            GraphConfig::Torus { side, dim } => build_torus(*side, *dim)?,
            GraphConfig::Complete { n } => build_complete(*n)?,
            GraphConfig::Geometric { n, radius, seed } => {
                build_random_geometric(*n, *radius, *seed)?
            }
            GraphConfig::File { path } => Graph::read_edge_list(path)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainConfig {
    Srw,
    Lazy,
    Metropolis,
    /// Two states flipping with probability `p`; needs a 2-node graph.
    TwoState {
        p: f64,
    },
}

impl ChainConfig {
    pub fn build(&self, g: &Graph) -> Result<MarkovChain, HarnessError> {
        let chain = match self {
            ChainConfig::Srw => chain_simple_rw(g)?,
            ChainConfig::Lazy => chain_lazy_maxdeg(g)?,
            ChainConfig::Metropolis => chain_metropolis_uniform(g)?,
            ChainConfig::TwoState { p } => {
                if g.node_count() != 2 {
                    return Err(HarnessError::Config(format!(
                        "chain.kind: two_state needs a 2-node graph, got {} nodes",
                        g.node_count()
                    )));
                }
                chain_two_state(*p)?
            }
        };
        Ok(chain)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    TwoPointDisagreement,
    QuadraticInterpolation {
        dim: usize,
        condition: f64,
        seed: u64,
    },
    QuadraticHeterogeneous {
        dim: usize,
        condition: f64,
        spread: f64,
        seed: u64,
    },
    Sigmoid {
        #[serde(default = "default_sigmoid_dim")]
        dim: usize,
        data_mode: DataMode,
        #[serde(default = "default_samples")]
        samples_per_node: usize,
        seed: u64,
    },
    WorstCaseChain {
        k: usize,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "one")]
        b: f64,
        #[serde(default)]
        v: usize,
        /// Defaults to `n / 2`.
        #[serde(default)]
        w: Option<usize>,
    },
}

fn default_sigmoid_dim() -> usize {
    10
}

fn default_samples() -> usize {
    1
}

fn one() -> f64 {
    1.0
}

impl ObjectiveConfig {
    pub fn build(&self, n: usize) -> Result<Box<dyn Objective>, HarnessError> {
        Ok(match *self {
            ObjectiveConfig::TwoPointDisagreement => {
                if n != 2 {
                    return Err(HarnessError::Config(format!(
                        "objective.family: two_point_disagreement needs 2 nodes, got {n}"
                    )));
                }
                Box::new(two_point_disagreement())
            }
            ObjectiveConfig::QuadraticInterpolation {
                dim,
                condition,
                seed,
            } => Box::new(quadratic_interpolation(n, dim, seed, condition)?),
            ObjectiveConfig::QuadraticHeterogeneous {
                dim,
                condition,
                spread,
                seed,
            } => Box::new(quadratic_heterogeneous(n, dim, seed, condition, spread)?),
            ObjectiveConfig::Sigmoid {
                dim,
                data_mode,
                samples_per_node,
                seed,
            } => Box::new(sigmoid_loss(n, dim, data_mode, seed, samples_per_node)?),
            ObjectiveConfig::WorstCaseChain { k, alpha, b, v, w } => {
                Box::new(worst_case_chain(k, alpha, b, n, v, w.unwrap_or(n / 2))?)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    McSgd,
    McSgdNoisy,
    McSag,
    SagIid,
    SgdIid,
    SgdReshuffle,
    McSgdWaitMix,
    DsgdFixed,
    DsgdRandomized,
}

impl AlgorithmName {
    pub fn is_sag(self) -> bool {
        matches!(self, AlgorithmName::McSag | AlgorithmName::SagIid)
    }

    pub fn is_gossip(self) -> bool {
        matches!(
            self,
            AlgorithmName::DsgdFixed | AlgorithmName::DsgdRandomized
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmName::McSgd => "mc_sgd",
            AlgorithmName::McSgdNoisy => "mc_sgd_noisy",
            AlgorithmName::McSag => "mc_sag",
            AlgorithmName::SagIid => "sag_iid",
            AlgorithmName::SgdIid => "sgd_iid",
            AlgorithmName::SgdReshuffle => "sgd_reshuffle",
            AlgorithmName::McSgdWaitMix => "mc_sgd_wait_mix",
            AlgorithmName::DsgdFixed => "dsgd_fixed",
            AlgorithmName::DsgdRandomized => "dsgd_randomized",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GammaPolicy {
    /// The `gamma` field.
    #[default]
    Constant,
    /// Horizon-dependent constant step for smooth non-convex objectives.
    Nonconvex,
    /// Staleness-adaptive step of the averaged-gradient method.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: AlgorithmName,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_policy: GammaPolicy,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub init: SagInit,
    /// Token hops per step for `mc_sgd_wait_mix` (default `tau_mix`).
    #[serde(default)]
    pub wait_k: Option<u64>,
    /// Heavy-ball coefficient for `dsgd_fixed`.
    #[serde(default)]
    pub momentum: f64,
    /// Overrides the exact hitting time in the adaptive step.
    #[serde(default)]
    pub tau_hit: Option<f64>,
    /// Overrides the adaptive step factor (2 for perfect init, 4 otherwise).
    #[serde(default)]
    pub factor: Option<f64>,
    /// Overrides the measured dissimilarity in the non-convex step.
    #[serde(default)]
    pub sigma_bar_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationConfig {
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Shorthand for seeds `0..count`.
    #[serde(default)]
    pub count: Option<u64>,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(default = "default_log_every")]
    pub log_every: u64,
    /// Stride of the running `min |grad f|^2` (0 disables it).
    #[serde(default)]
    pub min_grad_every: u64,
}

fn default_log_every() -> u64 {
    1
}

impl ReplicationConfig {
    pub fn seed_list(&self) -> Result<Vec<u64>, HarnessError> {
        match (&self.seeds, self.count) {
            (Some(s), None) if !s.is_empty() => {
                let mut sorted = s.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != s.len() {
                    return Err(HarnessError::Config(
                        "replication.seeds: duplicate seeds".into(),
                    ));
                }
                Ok(s.clone())
            }
            (None, Some(c)) if c > 0 => Ok((0..c).collect()),
            _ => Err(HarnessError::Config(
                "replication: give exactly one of a non-empty `seeds` list or a positive `count`"
                    .into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StartConfig {
    Node(usize),
    #[default]
    Stationary,
}

impl StartConfig {
    pub fn start(self) -> Start {
        match self {
            StartConfig::Node(v) => Start::Node(v),
            StartConfig::Stationary => Start::Stationary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FStarConfig {
    pub max_steps: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FStarConfig {
    fn default() -> Self {
        FStarConfig {
            max_steps: 1_000_000,
            restarts: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphConfig,
    pub chain: ChainConfig,
    pub objective: ObjectiveConfig,
    pub algorithm: AlgorithmConfig,
    pub replication: ReplicationConfig,
    /// Initial point (zeros when absent).
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_start")]
    pub start: StartConfig,
    #[serde(default)]
    pub f_star: FStarConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_start() -> StartConfig {
    StartConfig::Node(0)
}

/// Parses a JSON run config; schema errors name the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        HarnessError::Config(format!("{path}: {}", e.into_inner()))
    })
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
