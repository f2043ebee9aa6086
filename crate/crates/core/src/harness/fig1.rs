use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{
    AlgorithmConfig, AlgorithmName, ChainConfig, FStarConfig, GammaPolicy, GraphConfig,
    ObjectiveConfig, ReplicationConfig, RunConfig, StartConfig,
};
use super::csv::format_float;
use super::runner::{prepare, run_seeds, write_outputs, RunOutput};
use super::{aggregate, HarnessError};
use crate::objective::DataMode;
use crate::optim::{OptimError, SagInit};

/// Communications spent by every algorithm.
pub const FIG1_BUDGET: u64 = 200_000;
/// Points per curve.
const FIG1_POINTS: u64 = 200;
/// Seeds used for step-size selection start here, away from reporting seeds.
pub const FIG1_TUNING_SEED_BASE: u64 = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig1Variant {
    /// Random geometric graph (n = 50, radius 0.3), one i.i.d. sample per node.
    Homogeneous,
    /// Cycle of 50 nodes, data only at nodes 0 and 25.
    Heterogeneous,
}

pub const FIG1_ALGORITHMS: [AlgorithmName; 4] = [
    AlgorithmName::McSgd,
    AlgorithmName::McSag,
    AlgorithmName::DsgdFixed,
    AlgorithmName::DsgdRandomized,
];

impl Fig1Variant {
    fn graph(self) -> GraphConfig {
        match self {
            Fig1Variant::Homogeneous => GraphConfig::Geometric {
                n: 50,
                radius: 0.3,
                seed: 1,
            },
            Fig1Variant::Heterogeneous => GraphConfig::Cycle { n: 50 },
        }
    }

    /// Aperiodic kernels with uniform stationary law, so the token methods
    /// target the plain average and `W = P` reaches consensus.
    fn chain(self) -> ChainConfig {
        match self {
            Fig1Variant::Homogeneous => ChainConfig::Metropolis,
            Fig1Variant::Heterogeneous => ChainConfig::Lazy,
        }
    }

    fn objective(self) -> ObjectiveConfig {
        match self {
            Fig1Variant::Homogeneous => ObjectiveConfig::Sigmoid {
                dim: 10,
                data_mode: DataMode::Homogeneous,
                samples_per_node: 1,
                seed: 1,
            },
            // one coordinate: two samples cannot be fitted exactly
            Fig1Variant::Heterogeneous => ObjectiveConfig::Sigmoid {
                dim: 1,
                data_mode: DataMode::TwoHot,
                samples_per_node: 1,
                seed: 1,
            },
        }
    }
}

/// Frozen outcome of [`tune_halvings`] (5 tuning seeds): every algorithm of
/// both variants runs without divergence at `1/(2L)`.
pub const FIG1_HALVINGS: u32 = 0;

/// Config for one algorithm of the comparison with step `1/(2L) / 2^halvings`.
pub fn fig1_config(
    variant: Fig1Variant,
    alg: AlgorithmName,
    halvings: u32,
    seeds: Vec<u64>,
) -> Result<RunConfig, HarnessError> {
    let graph = variant.graph();
    let g = graph.build()?;
    let edges = g.edge_count() as u64;
    let l = variant.objective().build(g.node_count())?.smoothness();
    let horizon = match alg {
        AlgorithmName::DsgdFixed => FIG1_BUDGET / edges,
        _ => FIG1_BUDGET,
    };
    Ok(RunConfig {
        graph,
        chain: variant.chain(),
        objective: variant.objective(),
        algorithm: AlgorithmConfig {
            name: alg,
            gamma: Some(1.0 / (2.0 * l) / 2f64.powi(halvings as i32)),
            gamma_policy: GammaPolicy::Constant,
            noise: Default::default(),
            // a perfect table would cost a full pass over the network
            init: SagInit::Zero,
            wait_k: None,
            momentum: 0.0,
            tau_hit: None,
            factor: None,
            sigma_bar_sq: None,
        },
        replication: ReplicationConfig {
            seeds: Some(seeds),
            count: None,
            horizon,
            log_every: (horizon / FIG1_POINTS).max(1),
            min_grad_every: 0,
        },
        x0: None,
        start: StartConfig::Node(0),
        f_star: FStarConfig::default(),
        output: None,
    })
}

/// The four canned configs with their frozen step sizes.
pub fn fig1_configs(variant: Fig1Variant, seeds: u64) -> Result<Vec<RunConfig>, HarnessError> {
    FIG1_ALGORITHMS
        .iter()
        .map(|&alg| fig1_config(variant, alg, FIG1_HALVINGS, (0..seeds).collect()))
        .collect()
}

/// Smallest number of halvings of `1/(2L)` for which no tuning seed hits the
/// divergence guard.
pub fn tune_halvings(
    variant: Fig1Variant,
    alg: AlgorithmName,
    tuning_seeds: u64,
    max_halvings: u32,
    pool: &rayon::ThreadPool,
) -> Result<u32, HarnessError> {
    let seeds: Vec<u64> = (FIG1_TUNING_SEED_BASE..FIG1_TUNING_SEED_BASE + tuning_seeds).collect();
    for h in 0..=max_halvings {
        let prepared = prepare(&fig1_config(variant, alg, h, seeds.clone())?)?;
        match run_seeds(&prepared, pool) {
            Ok(_) => return Ok(h),
            Err(HarnessError::Run {
                source: OptimError::Diverged { .. } | OptimError::NonFinite,
                ..
            }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(HarnessError::Config(format!(
        "{}: still diverging after {max_halvings} halvings",
        alg.as_str()
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Curve {
    pub algorithm: AlgorithmName,
    pub gamma: f64,
    pub final_comms: u64,
    pub final_f_gap_mean: f64,
    pub final_f_gap_sd: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Summary {
    pub variant: Fig1Variant,
    pub seeds: u64,
    pub curves: Vec<Fig1Curve>,
}

impl Fig1Summary {
    pub fn curve(&self, alg: AlgorithmName) -> &Fig1Curve {
        self.curves
            .iter()
            .find(|c| c.algorithm == alg)
            .expect("algorithm is part of the comparison")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,gamma,final_comms,final_f_gap_mean,final_f_gap_sd\n");
        for c in &self.curves {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.algorithm.as_str(),
                format_float(c.gamma),
                c.final_comms,
                format_float(c.final_f_gap_mean),
                c.final_f_gap_sd.map(format_float).unwrap_or_default()
            )
            .unwrap();
        }
        out
    }
}

/// Runs the comparison. With `out_dir`, each algorithm's CSVs go to
/// `out_dir/<algorithm>/` and a `summary.csv` is written at the top.
pub fn reproduce_fig1(
    variant: Fig1Variant,
    seeds: u64,
    out_dir: Option<&Path>,
    pool: &rayon::ThreadPool,
) -> Result<Fig1Summary, HarnessError> {
    if seeds == 0 {
        return Err(HarnessError::Config("seeds: must be positive".into()));
    }
    let mut curves = Vec::new();
    let mut outputs = Vec::new();
    for cfg in fig1_configs(variant, seeds)? {
        let prepared = prepare(&cfg)?;
        let traces = run_seeds(&prepared, pool)?;
        let agg = aggregate(&traces);
        let last = agg.last();
        curves.push(Fig1Curve {
            algorithm: cfg.algorithm.name,
            gamma: cfg
                .algorithm
                .gamma
                .expect("canned configs use constant steps"),
            final_comms: last.comms,
            final_f_gap_mean: last.f_gap_mean,
            final_f_gap_sd: last.f_gap_sd,
        });
        outputs.push((
            cfg,
            RunOutput {
                traces,
                aggregate: agg,
                f_star: prepared.f_star,
                resolved: prepared.resolved,
            },
        ));
    }
    let summary = Fig1Summary {
        variant,
        seeds,
        curves,
    };
    if let Some(dir) = out_dir {
        let created = !dir.exists();
        let result = (|| {
            for (cfg, out) in &outputs {
                write_outputs(&dir.join(cfg.algorithm.name.as_str()), cfg, out)?;
            }
            let p = dir.join("summary.csv");
            fs::write(&p, summary.to_csv()).map_err(|e| HarnessError::io(&p, e))
        })();
        if result.is_err() {
            for (cfg, _) in &outputs {
                let _ = fs::remove_dir_all(dir.join(cfg.algorithm.name.as_str()));
            }
            let _ = fs::remove_file(dir.join("summary.csv"));
            if created {
                let _ = fs::remove_dir(dir);
            }
        }
        result?;
    }
    Ok(summary)
}
