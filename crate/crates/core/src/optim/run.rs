use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gossip::GossipState;
use super::sag::{McSagState, SagInit, Stepsize};
use super::sampler::{Sampler, SamplerMode};
use super::sgd::{mc_sgd_noisy_step, Noise};
use super::OptimError;
use crate::chain::{MarkovChain, Start};
use crate::graph::Graph;
use crate::numeric::{dist_sq, norm_sq};
use crate::objective::{FStar, Objective};
use crate::rng::{stream_rng, streams};

/// Runs abort once `|x|` exceeds this.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// `x <- x - gamma g_t` at the sampled node.
    Sgd { sampler: SamplerMode, noise: Noise },
    /// Averaged stored gradients, one refreshed per step.
    Sag { sampler: SamplerMode, init: SagInit },
    /// `X <- W (X - gamma G)` with `W` the chain's transition matrix.
    GossipFixed { momentum: f64, noise: Noise },
    /// One random edge averages per round after a local step at one endpoint.
    GossipRandomized { noise: Noise },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub method: Method,
    pub stepsize: Stepsize,
    pub x0: Vec<f64>,
    /// Steps for token methods, rounds for gossip.
    pub horizon: u64,
    pub log_every: u64,
    pub start: Start,
    /// When positive, also record `min |grad f(x_t)|^2` over `t < T` with
    /// `t` a multiple of this stride (1 evaluates every step).
    pub min_grad_every: u64,
}

pub struct Problem<'a> {
    pub obj: &'a dyn Objective,
    pub chain: &'a MarkovChain,
    pub graph: &'a Graph,
    pub f_star: FStar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: u64,
    pub comms: u64,
    /// Node holding the token at time `t` (absent for gossip).
    pub node: Option<usize>,
    pub f_gap: f64,
    pub grad_norm_sq: f64,
    /// `|x_t - x*|^2` when the minimizer is known.
    pub dist_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub seed: u64,
    pub f_star: FStar,
    pub records: Vec<Record>,
    pub min_grad_norm_sq: Option<f64>,
    pub final_x: Vec<f64>,
}

struct Logger<'a> {
    obj: &'a dyn Objective,
    f_star: f64,
    log_every: u64,
    horizon: u64,
    records: Vec<Record>,
    min_every: u64,
    min_grad: f64,
    grad: Vec<f64>,
}

impl<'a> Logger<'a> {
    fn observe(
        &mut self,
        t: u64,
        comms: u64,
        node: Option<usize>,
        x: &[f64],
    ) -> Result<(), OptimError> {
        let norm = norm_sq(x).sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(OptimError::Diverged { t, norm });
        }
        let logged = t.is_multiple_of(self.log_every) || t == self.horizon;
        let min_needed = self.min_every > 0 && t < self.horizon && t.is_multiple_of(self.min_every);
        if !logged && !min_needed {
            return Ok(());
        }
        self.obj.grad(x, &mut self.grad);
        let grad_norm_sq = norm_sq(&self.grad);
        if min_needed {
            self.min_grad = self.min_grad.min(grad_norm_sq);
        }
        if logged {
            let f = self.obj.value(x);
            if !f.is_finite() {
                return Err(OptimError::NonFinite);
            }
            self.records.push(Record {
                t,
                comms,
                node,
                f_gap: f - self.f_star,
                grad_norm_sq,
                dist_sq: self.obj.minimizer().map(|xs| dist_sq(x, xs)),
            });
        }
        Ok(())
    }
}

fn check_spec(problem: &Problem, spec: &RunSpec) -> Result<(), OptimError> {
    let obj = problem.obj;
    if spec.x0.len() != obj.dim() {
        return Err(OptimError::InvalidSpec(format!(
            "x0 has length {}, objective dimension is {}",
            spec.x0.len(),
            obj.dim()
        )));
    }
    if problem.chain.n() != obj.n_components() || problem.graph.node_count() != obj.n_components() {
        return Err(OptimError::Shape);
    }
    if spec.log_every == 0 {
        return Err(OptimError::InvalidSpec("log_every must be positive".into()));
    }
    match spec.stepsize {
        Stepsize::Constant(g) if !(g > 0.0 && g.is_finite()) => {
            return Err(OptimError::InvalidSpec(format!(
                "step size must be positive, got {g}"
            )));
        }
        Stepsize::Adaptive { tau_hit, factor } => {
            if !matches!(spec.method, Method::Sag { .. }) {
                return Err(OptimError::InvalidSpec(
                    "adaptive step sizes apply to the averaged-gradient method only".into(),
                ));
            }
            if !(tau_hit > 0.0 && factor > 0.0) {
                return Err(OptimError::InvalidSpec(
                    "tau_hit and factor must be positive".into(),
                ));
            }
        }
        _ => {}
    }
    if let Start::Node(v) = spec.start {
        if v >= obj.n_components() {
            return Err(OptimError::InvalidSpec(format!(
                "start node {v} out of range"
            )));
        }
    }
    match spec.method {
        Method::Sgd { noise, .. }
        | Method::GossipFixed { noise, .. }
        | Method::GossipRandomized { noise } => noise.validate(obj),
        Method::Sag { .. } => Ok(()),
    }
}

/// Executes `spec` on `problem`; the trace is a pure function of the inputs.
pub fn run(problem: &Problem, spec: &RunSpec, seed: u64) -> Result<Trace, OptimError> {
    check_spec(problem, spec)?;
    let obj = problem.obj;
    let mut log = Logger {
        obj,
        f_star: problem.f_star.value,
        log_every: spec.log_every,
        horizon: spec.horizon,
        records: Vec::new(),
        min_every: spec.min_grad_every,
        min_grad: f64::INFINITY,
        grad: vec![0.0; obj.dim()],
    };
    let mut noise_rng = stream_rng(seed, streams::NOISE);
    let final_x = match spec.method {
        Method::Sgd { sampler, noise } => {
            let gamma = match spec.stepsize {
                Stepsize::Constant(g) => g,
                Stepsize::Adaptive { .. } => unreachable!("rejected by check_spec"),
            };
            let mut s = Sampler::new(
                sampler,
                problem.chain,
                spec.start,
                stream_rng(seed, streams::SAMPLER),
            );
            let mut x = spec.x0.clone();
            let mut buf = vec![0.0; obj.dim()];
            let mut comms = 0;
            for t in 0..spec.horizon {
                let v = s.current();
                log.observe(t, comms, Some(v), &x)?;
                mc_sgd_noisy_step(&mut x, v, gamma, obj, noise, &mut noise_rng, &mut buf)?;
                comms += s.hops();
                s.advance();
            }
            log.observe(spec.horizon, comms, Some(s.current()), &x)?;
            x
        }
        Method::Sag { sampler, init } => {
            let mut s = Sampler::new(
                sampler,
                problem.chain,
                spec.start,
                stream_rng(seed, streams::SAMPLER),
            );
            let mut init_rng = stream_rng(seed, streams::INIT);
            let mut state = McSagState::new(obj, &spec.x0, init, &mut init_rng);
            for t in 0..spec.horizon {
                let v = s.current();
                log.observe(t, state.comms(), Some(v), state.x())?;
                state.step(v, obj, spec.stepsize, s.hops())?;
                s.advance();
            }
            log.observe(spec.horizon, state.comms(), Some(s.current()), state.x())?;
            state.x().to_vec()
        }
        Method::GossipFixed { momentum, noise } => {
            let gamma = constant_gamma(spec.stepsize);
            let mut state = GossipState::new(obj.n_components(), &spec.x0);
            let edges = problem.graph.edge_count() as u64;
            let w = problem.chain.transition();
            for t in 0..spec.horizon {
                log.observe(t, state.comms(), None, &state.average())?;
                state.fixed_round(w, gamma, momentum, obj, noise, &mut noise_rng, edges)?;
            }
            let avg = state.average();
            log.observe(spec.horizon, state.comms(), None, &avg)?;
            avg
        }
        Method::GossipRandomized { noise } => {
            let gamma = constant_gamma(spec.stepsize);
            let mut state = GossipState::new(obj.n_components(), &spec.x0);
            let edges = problem.graph.edges();
            let mut edge_rng = stream_rng(seed, streams::GOSSIP);
            for t in 0..spec.horizon {
                log.observe(t, state.comms(), None, &state.average())?;
                let (a, b) = edges[edge_rng.random_range(0..edges.len())];
                let stepper = if edge_rng.random::<bool>() { a } else { b };
                state.pairwise_round(a, b, stepper, gamma, obj, noise, &mut noise_rng)?;
            }
            let avg = state.average();
            log.observe(spec.horizon, state.comms(), None, &avg)?;
            avg
        }
    };
    Ok(Trace {
        seed,
        f_star: problem.f_star.clone(),
        records: log.records,
        min_grad_norm_sq: (spec.min_grad_every > 0).then_some(log.min_grad),
        final_x,
    })
}

fn constant_gamma(s: Stepsize) -> f64 {
    match s {
        Stepsize::Constant(g) => g,
        Stepsize::Adaptive { .. } => unreachable!("rejected by check_spec"),
    }
}
