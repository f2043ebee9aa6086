use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{uniform_weights, Objective, ObjectiveError};
use crate::rng::{stream_rng, streams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMode {
    /// Every node draws its own i.i.d. samples.
    Homogeneous,
    /// Only nodes `0` and `n/2` hold data; their components are scaled by
    /// `n/2` so the network average equals the mean of the two losses.
    TwoHot,
}

/// Per-node average of `l(x; a, b) = (sigmoid(x^T a) - b)^2 / 2`.
#[derive(Clone, Debug)]
pub struct SigmoidLoss {
    dim: usize,
    mode: DataMode,
    samples: Vec<Vec<(Vec<f64>, f64)>>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    smoothness: f64,
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn loss(x: &[f64], a: &[f64], b: f64) -> f64 {
    let s = sigmoid(x.iter().zip(a).map(|(xi, ai)| xi * ai).sum());
    0.5 * (s - b) * (s - b)
}

/// Adds `c * grad l(x; a, b)` to `out`.
fn add_loss_grad(x: &[f64], a: &[f64], b: f64, c: f64, out: &mut [f64]) {
    let s = sigmoid(x.iter().zip(a).map(|(xi, ai)| xi * ai).sum());
    let k = c * (s - b) * s * (1.0 - s);
    for (o, ai) in out.iter_mut().zip(a) {
        *o += k * ai;
    }
}

pub fn sigmoid_loss(
    n: usize,
    dim: usize,
    mode: DataMode,
    seed: u64,
    samples_per_node: usize,
) -> Result<SigmoidLoss, ObjectiveError> {
    if n == 0 || dim == 0 || samples_per_node == 0 {
        return Err(ObjectiveError::InvalidParameter(
            "n, dim and samples_per_node must be positive".into(),
        ));
    }
    if mode == DataMode::TwoHot && n < 2 {
        return Err(ObjectiveError::InvalidParameter(
            "two-hot data needs n >= 2".into(),
        ));
    }
    let mut rng = stream_rng(seed, streams::DATA);
    let draw = |rng: &mut crate::rng::StreamRng| -> Vec<(Vec<f64>, f64)> {
        (0..samples_per_node)
            .map(|_| {
                let a: Vec<f64> = (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let b: f64 = rng.random();
                (a, b)
            })
            .collect()
    };
    let (samples, scale): (Vec<_>, Vec<f64>) = match mode {
        DataMode::Homogeneous => (0..n).map(|_| (draw(&mut rng), 1.0)).unzip(),
        DataMode::TwoHot => {
            let first = draw(&mut rng);
            let second = draw(&mut rng);
            let half = n / 2;
            let active_scale = n as f64 / 2.0;
            let mut s = vec![Vec::new(); n];
            let mut sc = vec![0.0; n];
            s[0] = first;
            s[half] = second;
            sc[0] = active_scale;
            sc[half] = active_scale;
            (s, sc)
        }
    };
    let smoothness = samples
        .iter()
        .zip(&scale)
        .flat_map(|(node, &c)| {
            node.iter()
                .map(move |(a, _)| c * 0.5 * a.iter().map(|x| x * x).sum::<f64>())
        })
        .fold(0.0, f64::max);
    Ok(SigmoidLoss {
        dim,
        mode,
        samples,
        scale,
        weights: uniform_weights(n),
        smoothness,
    })
}

impl SigmoidLoss {
    pub fn mode(&self) -> DataMode {
        self.mode
    }

    pub fn is_active(&self, v: usize) -> bool {
        !self.samples[v].is_empty()
    }
}

impl Objective for SigmoidLoss {
    fn name(&self) -> &str {
        match self.mode {
            DataMode::Homogeneous => "sigmoid_homogeneous",
            DataMode::TwoHot => "sigmoid_two_hot",
        }
    }

    fn n_components(&self) -> usize {
        self.samples.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn component_value(&self, v: usize, x: &[f64]) -> f64 {
        let node = &self.samples[v];
        if node.is_empty() {
            return 0.0;
        }
        let c = self.scale[v] / node.len() as f64;
        c * node.iter().map(|(a, b)| loss(x, a, *b)).sum::<f64>()
    }

    fn component_grad(&self, v: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let node = &self.samples[v];
        if node.is_empty() {
            return;
        }
        let c = self.scale[v] / node.len() as f64;
        for (a, b) in node {
            add_loss_grad(x, a, *b, c, out);
        }
    }

    fn sub_components(&self, v: usize) -> usize {
        self.samples[v].len()
    }

    fn sub_component_grad(&self, v: usize, j: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let (a, b) = &self.samples[v][j];
        add_loss_grad(x, a, *b, self.scale[v], out);
    }
}
