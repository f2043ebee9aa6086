use nalgebra::DMatrix;
use rand::Rng;

use super::sgd::{noisy_grad, Noise};
use super::OptimError;
use crate::objective::Objective;

/// One iterate per node, stored row-major.
#[derive(Clone, Debug)]
pub struct GossipState {
    xs: Vec<f64>,
    momentum: Vec<f64>,
    n: usize,
    dim: usize,
    comms: u64,
    rounds: u64,
}

impl GossipState {
    /// Every node starts from `x0`.
    pub fn new(n: usize, x0: &[f64]) -> Self {
        let dim = x0.len();
        GossipState {
            xs: x0.iter().copied().cycle().take(n * dim).collect(),
            momentum: vec![0.0; n * dim],
            n,
            dim,
            comms: 0,
            rounds: 0,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let dim = rows.first().map_or(0, |r| r.len());
        GossipState {
            xs: rows.concat(),
            momentum: vec![0.0; n * dim],
            n,
            dim,
            comms: 0,
            rounds: 0,
        }
    }

    pub fn node(&self, v: usize) -> &[f64] {
        &self.xs[v * self.dim..(v + 1) * self.dim]
    }

    pub fn comms(&self) -> u64 {
        self.comms
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Network average `(1/n) sum_v x_v`.
    pub fn average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.dim];
        for row in self.xs.chunks(self.dim) {
            avg.iter_mut().zip(row).for_each(|(a, r)| *a += r);
        }
        avg.iter_mut().for_each(|a| *a /= self.n as f64);
        avg
    }

    /// `X <- W (X - gamma G)` with `G_v` the (noisy) gradient of `f_v` at
    /// `x_v`, or its heavy-ball buffer `m_v <- beta m_v + G_v` when
    /// `beta > 0`. Charges `edges` communications.
    #[allow(clippy::too_many_arguments)]
    pub fn fixed_round<R: Rng + ?Sized>(
        &mut self,
        w: &DMatrix<f64>,
        gamma: f64,
        beta: f64,
        obj: &dyn Objective,
        noise: Noise,
        rng: &mut R,
        edges: u64,
    ) -> Result<(), OptimError> {
        if w.nrows() != self.n
            || w.ncols() != self.n
            || obj.n_components() != self.n
            || obj.dim() != self.dim
        {
            return Err(OptimError::Shape);
        }
        let d = self.dim;
        let mut g = vec![0.0; d];
        let mut local = vec![0.0; self.n * d];
        for v in 0..self.n {
            noisy_grad(self.node(v), v, obj, noise, rng, &mut g)?;
            let m = &mut self.momentum[v * d..(v + 1) * d];
            for i in 0..d {
                m[i] = beta * m[i] + g[i];
                local[v * d + i] = self.xs[v * d + i] - gamma * m[i];
            }
        }
        for v in 0..self.n {
            let row = &mut self.xs[v * d..(v + 1) * d];
            row.iter_mut().for_each(|x| *x = 0.0);
            for u in 0..self.n {
                let wvu = w[(v, u)];
                if wvu != 0.0 {
                    for i in 0..d {
                        row[i] += wvu * local[u * d + i];
                    }
                }
            }
        }
        self.comms += edges;
        self.rounds += 1;
        Ok(())
    }

    /// Randomized pairwise gossip on edge `(a, b)`: node `stepper` (one of
    /// the two endpoints) takes a local gradient step, then both endpoints
    /// replace their iterates by the pair average. One communication.
    #[allow(clippy::too_many_arguments)]
    pub fn pairwise_round<R: Rng + ?Sized>(
        &mut self,
        a: usize,
        b: usize,
        stepper: usize,
        gamma: f64,
        obj: &dyn Objective,
        noise: Noise,
        rng: &mut R,
    ) -> Result<(), OptimError> {
        let d = self.dim;
        let mut g = vec![0.0; d];
        noisy_grad(self.node(stepper), stepper, obj, noise, rng, &mut g)?;
        for i in 0..d {
            self.xs[stepper * d + i] -= gamma * g[i];
        }
        for i in 0..d {
            let avg = 0.5 * (self.xs[a * d + i] + self.xs[b * d + i]);
            self.xs[a * d + i] = avg;
            self.xs[b * d + i] = avg;
        }
        self.comms += 1;
        self.rounds += 1;
        Ok(())
    }
}
