use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::OptimError;
use crate::objective::Objective;

/// Perturbation of the sampled component gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Noise {
    #[default]
    None,
    /// Adds `N(0, sd^2 I)`.
    Gaussian { sd: f64 },
    /// Mean over `batch` sub-components drawn without replacement.
    Minibatch { batch: usize },
}

impl Noise {
    pub fn validate(&self, obj: &dyn Objective) -> Result<(), OptimError> {
        match *self {
            Noise::None => Ok(()),
            Noise::Gaussian { sd } if sd >= 0.0 && sd.is_finite() => Ok(()),
            Noise::Gaussian { sd } => Err(OptimError::InvalidSpec(format!(
                "noise sd must be >= 0, got {sd}"
            ))),
            Noise::Minibatch { batch: 0 } => Err(OptimError::InvalidSpec(
                "minibatch size must be positive".into(),
            )),
            Noise::Minibatch { .. } => {
                if (0..obj.n_components()).any(|v| obj.sub_components(v) > 0) {
                    Ok(())
                } else {
                    Err(OptimError::NoSubComponents(obj.name().to_string()))
                }
            }
        }
    }
}

fn check_finite(g: &[f64]) -> Result<(), OptimError> {
    if g.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OptimError::NonFinite)
    }
}

/// `x <- x - gamma grad f_v(x)`; `buf` is scratch space of length `dim`.
pub fn mc_sgd_step(
    x: &mut [f64],
    v: usize,
    gamma: f64,
    obj: &dyn Objective,
    buf: &mut [f64],
) -> Result<(), OptimError> {
    obj.component_grad(v, x, buf);
    check_finite(buf)?;
    for (xi, gi) in x.iter_mut().zip(buf.iter()) {
        *xi -= gamma * gi;
    }
    Ok(())
}

/// Writes the noisy gradient estimate for component `v` at `x` into `out`.
pub fn noisy_grad<R: Rng + ?Sized>(
    x: &[f64],
    v: usize,
    obj: &dyn Objective,
    noise: Noise,
    rng: &mut R,
    out: &mut [f64],
) -> Result<(), OptimError> {
    match noise {
        Noise::None => obj.component_grad(v, x, out),
        Noise::Gaussian { sd } => {
            obj.component_grad(v, x, out);
            if sd > 0.0 {
                for o in out.iter_mut() {
                    *o += sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        Noise::Minibatch { batch } => {
            let m = obj.sub_components(v);
            if m == 0 || batch >= m {
                // full batch (or a component without summands)
                obj.component_grad(v, x, out);
            } else {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut buf = vec![0.0; out.len()];
                let mut picked = index::sample(rng, m, batch).into_vec();
                picked.sort_unstable();
                for j in picked {
                    obj.sub_component_grad(v, j, x, &mut buf);
                    for (o, b) in out.iter_mut().zip(&buf) {
                        *o += b;
                    }
                }
                out.iter_mut().for_each(|o| *o /= batch as f64);
            }
        }
    }
    check_finite(out)
}

/// `x <- x - gamma g` with `g` the noisy estimate of `grad f_v(x)`.
pub fn mc_sgd_noisy_step<R: Rng + ?Sized>(
    x: &mut [f64],
    v: usize,
    gamma: f64,
    obj: &dyn Objective,
    noise: Noise,
    rng: &mut R,
    buf: &mut [f64],
) -> Result<(), OptimError> {
    noisy_grad(x, v, obj, noise, rng, buf)?;
    for (xi, gi) in x.iter_mut().zip(buf.iter()) {
        *xi -= gamma * gi;
    }
    Ok(())
}

/// Constant step of the horizon-dependent analysis for smooth non-convex
/// objectives: `min(1/(48 L tau), sqrt(F0 / (T L tau sigma_bar^2)))`.
pub fn nonconvex_stepsize(l: f64, tau: f64, f0: f64, sigma_bar_sq: f64, horizon: u64) -> f64 {
    let first = 1.0 / (48.0 * l * tau);
    let second = if sigma_bar_sq > 0.0 {
        (f0 / (horizon as f64 * l * tau * sigma_bar_sq)).sqrt()
    } else {
        f64::INFINITY
    };
    first.min(second)
}

/// The `tau` entering [`nonconvex_stepsize`]: `tau_mix ln T` (at least `tau_mix`).
pub fn nonconvex_tau(tau_mix: u64, horizon: u64) -> f64 {
    tau_mix as f64 * (horizon as f64).ln().max(1.0)
}
