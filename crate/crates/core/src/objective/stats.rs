use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::Objective;
use crate::numeric::{dist_sq, norm_sq};
use crate::rng::{stream_rng, streams};

/// Gradient dissimilarity measured at a reference point and at random probe
/// points. `sigma_bar_sq` and `sigma_max_sq` are maxima over the probes, so
/// they are lower estimates of the corresponding suprema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DissimilarityStats {
    /// `max_x sum_v w_v |grad f_v(x) - grad f(x)|^2`.
    pub sigma_bar_sq: f64,
    /// `max_x max_v |grad f_v(x) - grad f(x)|^2`.
    pub sigma_max_sq: f64,
    /// `max_v |grad f_v(x_ref)|^2`.
    pub sigma_star_sq: f64,
    pub probes: usize,
}

fn spread_at(obj: &dyn Objective, x: &[f64]) -> (f64, f64) {
    let full = obj.grad_vec(x);
    let w = obj.weights();
    let mut g = vec![0.0; obj.dim()];
    let mut bar = 0.0;
    let mut max: f64 = 0.0;
    for v in 0..obj.n_components() {
        obj.component_grad(v, x, &mut g);
        let d = dist_sq(&g, &full);
        bar += w[v] * d;
        max = max.max(d);
    }
    (bar, max)
}

/// Probes `x_ref` and `probes` points drawn uniformly from the ball of
/// radius `radius` around it.
pub fn dissimilarity_stats(
    obj: &dyn Objective,
    x_ref: &[f64],
    probes: usize,
    radius: f64,
    seed: u64,
) -> DissimilarityStats {
    let d = obj.dim();
    let mut rng = stream_rng(seed, streams::PROBE);
    let sigma_star_sq = (0..obj.n_components())
        .map(|v| norm_sq(&obj.component_grad_vec(v, x_ref)))
        .fold(0.0, f64::max);
    let (mut sigma_bar_sq, mut sigma_max_sq) = spread_at(obj, x_ref);
    for _ in 0..probes {
        let dir: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = norm_sq(&dir).sqrt().max(f64::MIN_POSITIVE);
        let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
        let x: Vec<f64> = x_ref
            .iter()
            .zip(&dir)
            .map(|(c, u)| c + r * u / norm)
            .collect();
        let (bar, max) = spread_at(obj, &x);
        sigma_bar_sq = sigma_bar_sq.max(bar);
        sigma_max_sq = sigma_max_sq.max(max);
    }
    DissimilarityStats {
        sigma_bar_sq,
        sigma_max_sq,
        sigma_star_sq,
        probes,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FStarSource {
    /// Closed form from the objective.
    Known,
    /// Best value reached by full-gradient descent with step `1/L`.
    Estimated { max_steps: u64, restarts: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FStar {
    pub value: f64,
    #[serde(flatten)]
    pub source: FStarSource,
}

fn descend(obj: &dyn Objective, mut x: Vec<f64>, max_steps: u64) -> f64 {
    let step = 1.0 / obj.smoothness();
    let mut g = vec![0.0; obj.dim()];
    let mut best = obj.value(&x);
    let mut checkpoint = best;
    for t in 1..=max_steps {
        obj.grad(&x, &mut g);
        if norm_sq(&g) <= 1e-30 {
            break;
        }
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= step * gi);
        if t % 1000 == 0 {
            best = best.min(obj.value(&x));
            if checkpoint - best <= 1e-15 * (1.0 + best.abs()) {
                break;
            }
            checkpoint = best;
        }
    }
    best.min(obj.value(&x))
}

/// The objective's own minimum when known; otherwise the best value found by
/// gradient descent from `x0` and from `restarts` Gaussian perturbations of it.
pub fn estimate_f_star(
    obj: &dyn Objective,
    x0: &[f64],
    max_steps: u64,
    restarts: usize,
    seed: u64,
) -> FStar {
    if let Some(value) = obj.min_value() {
        return FStar {
            value,
            source: FStarSource::Known,
        };
    }
    let mut rng = stream_rng(seed, streams::RESTARTS);
    let mut starts = vec![x0.to_vec()];
    for _ in 0..restarts {
        starts.push(
            x0.iter()
                .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
    }
    let value = starts
        .into_par_iter()
        .map(|x| descend(obj, x, max_steps))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    FStar {
        value,
        source: FStarSource::Estimated {
            max_steps,
            restarts,
        },
    }
}
