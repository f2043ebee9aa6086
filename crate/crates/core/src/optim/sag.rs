use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::OptimError;
use crate::objective::Objective;
use crate::staleness::StalenessTracker;

/// Initial gradient table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SagInit {
    /// `h_v = grad f_v(x_0)`.
    #[default]
    Perfect,
    /// `h_v = 0`.
    Zero,
    /// `h_v ~ N(0, scale^2 I)`.
    Random { scale: f64 },
}

/// Step size rule for the averaged-gradient method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepsize {
    Constant(f64),
    /// `1 / (factor L (tau_hit + max_v (t - d_v(t))))`.
    Adaptive {
        tau_hit: f64,
        factor: f64,
    },
}

impl Stepsize {
    /// Factor used with a perfectly initialized gradient table.
    pub const PERFECT_INIT_FACTOR: f64 = 2.0;
    /// Factor used with an arbitrary gradient table.
    pub const ARBITRARY_INIT_FACTOR: f64 = 4.0;
}

/// `1 / (factor L (tau_hit + staleness))`.
pub fn adaptive_stepsize(l: f64, tau_hit: f64, staleness: u64, factor: f64) -> f64 {
    1.0 / (factor * l * (tau_hit + staleness as f64))
}

/// State of the averaged-gradient method driven by a node sequence.
#[derive(Clone, Debug)]
pub struct McSagState {
    x: Vec<f64>,
    h: Vec<f64>,
    g_bar: Vec<f64>,
    tracker: StalenessTracker,
    t: u64,
    comms: u64,
    last_gamma: f64,
    dim: usize,
    scratch: Vec<f64>,
}

impl McSagState {
    pub fn new<R: Rng + ?Sized>(
        obj: &dyn Objective,
        x0: &[f64],
        init: SagInit,
        rng: &mut R,
    ) -> Self {
        let n = obj.n_components();
        let dim = obj.dim();
        assert_eq!(x0.len(), dim, "initial point has wrong dimension");
        let mut h = vec![0.0; n * dim];
        match init {
            SagInit::Perfect => {
                for v in 0..n {
                    obj.component_grad(v, x0, &mut h[v * dim..(v + 1) * dim]);
                }
            }
            SagInit::Zero => {}
            SagInit::Random { scale } => {
                h.iter_mut()
                    .for_each(|x| *x = scale * rng.sample::<f64, _>(StandardNormal));
            }
        }
        let mut state = McSagState {
            x: x0.to_vec(),
            h,
            g_bar: vec![0.0; dim],
            tracker: StalenessTracker::new(n),
            t: 0,
            comms: 0,
            last_gamma: 0.0,
            dim,
            scratch: vec![0.0; dim],
        };
        state.g_bar = state.table_average();
        state
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn g_bar(&self) -> &[f64] {
        &self.g_bar
    }

    pub fn stored(&self, v: usize) -> &[f64] {
        &self.h[v * self.dim..(v + 1) * self.dim]
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn comms(&self) -> u64 {
        self.comms
    }

    pub fn last_visits(&self) -> &[u64] {
        self.tracker.last_visits()
    }

    /// Step size used by the most recent step.
    pub fn last_gamma(&self) -> f64 {
        self.last_gamma
    }

    /// `(1/n) sum_v h_v` recomputed from the table.
    pub fn table_average(&self) -> Vec<f64> {
        let n = self.h.len() / self.dim;
        let mut avg = vec![0.0; self.dim];
        for row in self.h.chunks(self.dim) {
            avg.iter_mut().zip(row).for_each(|(a, r)| *a += r);
        }
        avg.iter_mut().for_each(|a| *a /= n as f64);
        avg
    }

    /// One step at node `v` (the node visited at the current time `t`):
    /// refresh `h_v` with `grad f_v(x_t)`, update the running average, then
    /// move `x` along it. `hops` token moves are charged.
    pub fn step(
        &mut self,
        v: usize,
        obj: &dyn Objective,
        stepsize: Stepsize,
        hops: u64,
    ) -> Result<(), OptimError> {
        let n = self.h.len() / self.dim;
        self.tracker.visit(v, self.t);
        debug_assert_eq!(
            self.tracker.staleness(self.t),
            self.tracker.staleness_by_scan(self.t)
        );
        let gamma = match stepsize {
            Stepsize::Constant(g) => g,
            Stepsize::Adaptive { tau_hit, factor } => adaptive_stepsize(
                obj.smoothness(),
                tau_hit,
                self.tracker.staleness(self.t),
                factor,
            ),
        };
        obj.component_grad(v, &self.x, &mut self.scratch);
        if !self.scratch.iter().all(|g| g.is_finite()) {
            return Err(OptimError::NonFinite);
        }
        let row = &mut self.h[v * self.dim..(v + 1) * self.dim];
        for ((gb, r), g) in self.g_bar.iter_mut().zip(row.iter()).zip(&self.scratch) {
            *gb += (g - r) / n as f64;
        }
        for (xi, gb) in self.x.iter_mut().zip(&self.g_bar) {
            *xi -= gamma * gb;
        }
        row.copy_from_slice(&self.scratch);
        self.last_gamma = gamma;
        self.t += 1;
        self.comms += hops;
        Ok(())
    }

    /// Staleness `max_v (t - d_v(t))` as of the most recent step.
    pub fn staleness(&self) -> u64 {
        self.t.saturating_sub(1)
            - self
                .tracker
                .last_visits()
                .iter()
                .copied()
                .min()
                .unwrap_or(0)
    }
}
