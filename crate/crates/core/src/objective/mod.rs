//! Node-indexed objectives `f(x) = sum_v w_v f_v(x)`.

mod disagreement;
mod quadratic;
mod sigmoid;
mod stats;
mod worst_case;

pub use disagreement::two_point_disagreement;
pub use quadratic::{quadratic_heterogeneous, quadratic_interpolation, QuadraticObjective};
pub use sigmoid::{sigmoid_loss, DataMode, SigmoidLoss};
pub use stats::{dissimilarity_stats, estimate_f_star, DissimilarityStats, FStar, FStarSource};
pub use worst_case::{worst_case_chain, WorstCase};

use thiserror::Error;

use crate::numeric::compensated_sum;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("invalid objective parameter: {0}")]
    InvalidParameter(String),
    #[error("objective is unbounded below: {0}")]
    Unbounded(String),
}

/// A finite sum of differentiable components sharing one parameter vector.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;
    fn n_components(&self) -> usize;
    fn dim(&self) -> usize;
    /// Component weights; they sum to one.
    fn weights(&self) -> &[f64];
    /// Lipschitz constant of every component gradient.
    fn smoothness(&self) -> f64;
    /// Strong-convexity constant of `f` (zero if none is known).
    fn strong_convexity(&self) -> f64 {
        0.0
    }
    fn minimizer(&self) -> Option<&[f64]> {
        None
    }
    fn min_value(&self) -> Option<f64> {
        None
    }
    fn component_value(&self, v: usize, x: &[f64]) -> f64;
    /// Writes `grad f_v(x)` into `out`.
    fn component_grad(&self, v: usize, x: &[f64], out: &mut [f64]);
    /// Number of summands inside component `v` (0 when not exposed).
    fn sub_components(&self, _v: usize) -> usize {
        0
    }
    /// Gradient of summand `j` of component `v`; `component_grad` is their mean.
    fn sub_component_grad(&self, _v: usize, _j: usize, _x: &[f64], _out: &mut [f64]) {
        panic!("{} exposes no sub-components", self.name());
    }

    fn value(&self, x: &[f64]) -> f64 {
        let w = self.weights();
        compensated_sum((0..self.n_components()).map(|v| w[v] * self.component_value(v, x)))
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let w = self.weights();
        let mut buf = vec![0.0; self.dim()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for v in 0..self.n_components() {
            self.component_grad(v, x, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w[v] * b;
            }
        }
    }

    fn grad_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad(x, &mut g);
        g
    }

    fn component_grad_vec(&self, v: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.component_grad(v, x, &mut g);
        g
    }
}

pub(crate) fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
