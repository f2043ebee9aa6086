use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::{aggregate, AggregateStats};
use super::config::{AlgorithmName, GammaPolicy, RunConfig};
use super::csv::{write_aggregate_csv, write_trace_csv};
use super::HarnessError;
use crate::chain::MarkovChain;
use crate::graph::Graph;
use crate::objective::{dissimilarity_stats, estimate_f_star, FStar, Objective};
use crate::optim::{
    nonconvex_stepsize, nonconvex_tau, run, Method, Problem, RunSpec, SagInit, SamplerMode,
    Stepsize, Trace,
};
use crate::times::{hitting_times_exact, mixing_time_exact, tau_hit_of, DENSE_LIMIT};

/// Caps the number of worker threads used for seed fan-out.
pub const THREADS_ENV: &str = "TOKEN_OPT_THREADS";

/// Probe points used to measure the dissimilarity for the non-convex step.
const DISSIMILARITY_PROBES: usize = 64;

pub fn worker_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse::<usize>().map_err(|_| {
            HarnessError::Config(format!("{THREADS_ENV}: expected a thread count, got {s:?}"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("{THREADS_ENV}: {e}")))
}

/// Quantities derived from the config before any run starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Resolved {
    pub gamma: Option<f64>,
    pub tau_mix: Option<u64>,
    pub tau_hit: Option<f64>,
    pub factor: Option<f64>,
    pub sigma_bar_sq: Option<f64>,
}

/// Everything needed to execute the seeds of one config.
pub struct Prepared {
    pub config: RunConfig,
    pub graph: Graph,
    pub chain: MarkovChain,
    pub objective: Box<dyn Objective>,
    pub f_star: FStar,
    pub spec: RunSpec,
    pub seeds: Vec<u64>,
    pub resolved: Resolved,
}

impl Prepared {
    pub fn problem(&self) -> Problem<'_> {
        Problem {
            obj: self.objective.as_ref(),
            chain: &self.chain,
            graph: &self.graph,
            f_star: self.f_star.clone(),
        }
    }
}

fn exact_tau_mix(chain: &MarkovChain, why: &str) -> Result<u64, HarnessError> {
    mixing_time_exact(chain, chain.pi_min() / 2.0)
        .map_err(|e| HarnessError::Config(format!("{why} needs the mixing time: {e}")))
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, HarnessError> {
    let graph = config.graph.build()?;
    let chain = config.chain.build(&graph)?;
    let n = graph.node_count();
    let objective = config.objective.build(n)?;
    let obj = objective.as_ref();
    let seeds = config.replication.seed_list()?;
    let x0 = config.x0.clone().unwrap_or_else(|| vec![0.0; obj.dim()]);
    if x0.len() != obj.dim() {
        return Err(HarnessError::Config(format!(
            "x0: length {} does not match objective dimension {}",
            x0.len(),
            obj.dim()
        )));
    }
    let fs = config.f_star;
    let f_star = estimate_f_star(obj, &x0, fs.max_steps, fs.restarts, fs.seed);
    let alg = &config.algorithm;
    let horizon = config.replication.horizon;
    let mut resolved = Resolved::default();

    let noise = alg.noise;
    match alg.name {
        AlgorithmName::McSgdNoisy if noise == Default::default() => {
            return Err(HarnessError::Config(
                "algorithm.noise: mc_sgd_noisy needs a noise block".into(),
            ));
        }
        AlgorithmName::McSgd if noise != Default::default() => {
            return Err(HarnessError::Config(
                "algorithm.noise: use mc_sgd_noisy for noisy gradients".into(),
            ));
        }
        name if name.is_sag() && noise != Default::default() => {
            return Err(HarnessError::Config(
                "algorithm.noise: not supported by the averaged-gradient method".into(),
            ));
        }
        _ => {}
    }
    let method = match alg.name {
        AlgorithmName::McSgd | AlgorithmName::McSgdNoisy => Method::Sgd {
            sampler: SamplerMode::Markov,
            noise,
        },
        AlgorithmName::SgdIid => Method::Sgd {
            sampler: SamplerMode::Iid,
            noise,
        },
        AlgorithmName::SgdReshuffle => Method::Sgd {
            sampler: SamplerMode::Reshuffle,
            noise,
        },
        AlgorithmName::McSgdWaitMix => {
            let k = match alg.wait_k {
                Some(0) => {
                    return Err(HarnessError::Config(
                        "algorithm.wait_k: must be positive".into(),
                    ))
                }
                Some(k) => k,
                None => {
                    let t = exact_tau_mix(&chain, "mc_sgd_wait_mix")?;
                    resolved.tau_mix = Some(t);
                    t
                }
            };
            Method::Sgd {
                sampler: SamplerMode::WaitForMix(k),
                noise,
            }
        }
        AlgorithmName::McSag => Method::Sag {
            sampler: SamplerMode::Markov,
            init: alg.init,
        },
        AlgorithmName::SagIid => Method::Sag {
            sampler: SamplerMode::Iid,
            init: alg.init,
        },
        AlgorithmName::DsgdFixed => Method::GossipFixed {
            momentum: alg.momentum,
            noise,
        },
        AlgorithmName::DsgdRandomized => Method::GossipRandomized { noise },
    };

    let stepsize = match alg.gamma_policy {
        GammaPolicy::Constant => match alg.gamma {
            Some(g) => Stepsize::Constant(g),
            None => {
                return Err(HarnessError::Config(
                    "algorithm.gamma: required by the constant policy".into(),
                ))
            }
        },
        GammaPolicy::Nonconvex => {
            if alg.name.is_sag() || alg.name.is_gossip() {
                return Err(HarnessError::Config(
                    "algorithm.gamma_policy: nonconvex applies to the SGD variants only".into(),
                ));
            }
            let tau_mix = match resolved.tau_mix {
                Some(t) => t,
                None => exact_tau_mix(&chain, "the nonconvex step")?,
            };
            resolved.tau_mix = Some(tau_mix);
            let f0 = obj.value(&x0) - f_star.value;
            if !(f0 > 0.0) {
                return Err(HarnessError::Config(
                    "x0: the nonconvex step needs f(x0) > f*".into(),
                ));
            }
            let sigma = match alg.sigma_bar_sq {
                Some(s) => s,
                None => {
                    let x_ref = obj.minimizer().map_or_else(|| x0.clone(), |m| m.to_vec());
                    let radius = crate::numeric::dist_sq(&x0, &x_ref).sqrt().max(1.0);
                    dissimilarity_stats(obj, &x_ref, DISSIMILARITY_PROBES, radius, fs.seed)
                        .sigma_bar_sq
                }
            };
            resolved.sigma_bar_sq = Some(sigma);
            let tau = nonconvex_tau(tau_mix, horizon);
            Stepsize::Constant(nonconvex_stepsize(
                obj.smoothness(),
                tau,
                f0,
                sigma,
                horizon,
            ))
        }
        GammaPolicy::Adaptive => {
            if !alg.name.is_sag() {
                return Err(HarnessError::Config(
                    "algorithm.gamma_policy: adaptive applies to mc_sag and sag_iid only".into(),
                ));
            }
            let tau_hit = match alg.tau_hit {
                Some(t) => t,
                None if chain.n() <= DENSE_LIMIT => tau_hit_of(&hitting_times_exact(&chain)?).0,
                None => {
                    return Err(HarnessError::Config(format!(
                        "algorithm.tau_hit: required above {DENSE_LIMIT} nodes"
                    )))
                }
            };
            let factor = alg.factor.unwrap_or(match alg.init {
                SagInit::Perfect => Stepsize::PERFECT_INIT_FACTOR,
                _ => Stepsize::ARBITRARY_INIT_FACTOR,
            });
            resolved.tau_hit = Some(tau_hit);
            resolved.factor = Some(factor);
            Stepsize::Adaptive { tau_hit, factor }
        }
    };
    if let Stepsize::Constant(g) = stepsize {
        resolved.gamma = Some(g);
    }
    let spec = RunSpec {
        method,
        stepsize,
        x0,
        horizon,
        log_every: config.replication.log_every,
        start: config.start.start(),
        min_grad_every: config.replication.min_grad_every,
    };
    Ok(Prepared {
        config: config.clone(),
        graph,
        chain,
        objective,
        f_star,
        spec,
        seeds,
        resolved,
    })
}

/// Runs every seed (in parallel on `pool`) and returns traces in seed-list
/// order. The first failing seed in that order is reported.
pub fn run_seeds(
    prepared: &Prepared,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Trace>, HarnessError> {
    let problem = prepared.problem();
    let results: Vec<_> = pool.install(|| {
        prepared
            .seeds
            .par_iter()
            .map(|&seed| {
                run(&problem, &prepared.spec, seed)
                    .map_err(|source| HarnessError::Run { seed, source })
            })
            .collect()
    });
    results.into_iter().collect()
}

pub struct RunOutput {
    pub traces: Vec<Trace>,
    pub aggregate: AggregateStats,
    pub f_star: FStar,
    pub resolved: Resolved,
}

pub fn run_config(config: &RunConfig, pool: &rayon::ThreadPool) -> Result<RunOutput, HarnessError> {
    let prepared = prepare(config)?;
    let traces = run_seeds(&prepared, pool)?;
    let aggregate = aggregate(&traces);
    Ok(RunOutput {
        traces,
        aggregate,
        f_star: prepared.f_star,
        resolved: prepared.resolved,
    })
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a RunConfig,
    f_star: &'a FStar,
    resolved: &'a Resolved,
    seeds: &'a [u64],
    min_grad_norm_sq: &'a [(u64, f64)],
}

/// Writes `seed_<s>.csv` per seed, `aggregate.csv` and `meta.json` into
/// `dir`. On failure every file written so far is removed again (and `dir`
/// itself if this call created it).
pub fn write_outputs(dir: &Path, config: &RunConfig, out: &RunOutput) -> Result<(), HarnessError> {
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for tr in &out.traces {
            let p = dir.join(format!("seed_{}.csv", tr.seed));
            written.push(p.clone());
            write_trace_csv(&p, tr)?;
        }
        let p = dir.join("aggregate.csv");
        written.push(p.clone());
        write_aggregate_csv(&p, &out.aggregate)?;
        let p = dir.join("meta.json");
        written.push(p.clone());
        let meta = Meta {
            config,
            f_star: &out.f_star,
            resolved: &out.resolved,
            seeds: &out.aggregate.seeds,
            min_grad_norm_sq: &out.aggregate.min_grad_norm_sq,
        };
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        fs::write(&p, text).map_err(|e| HarnessError::io(&p, e))
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}
