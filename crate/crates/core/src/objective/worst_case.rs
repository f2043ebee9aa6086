use nalgebra::{DMatrix, DVector};

use super::{uniform_weights, Objective, ObjectiveError};

/// Chain-structured quadratic split between two nodes so that each node only
/// reveals every other coordinate. With uniform weights and `n` nodes,
///
/// `f_v / n = 1/2 sum_{k=1..K} (2 x_{2k}^2 - 2 x_{2k-1} x_{2k}) + alpha/2 x_0^2 - b x_0 + alpha/2`
/// `f_w / n = 1/2 sum_{k=0..K-1} (2 x_{2k+1}^2 - 2 x_{2k+1} x_{2k})`
///
/// and every other node carries the zero function. Starting from `x = 0`,
/// coordinate `i + 1` can only become nonzero after the walk has alternated
/// between the two nodes `i + 1` times.
#[derive(Clone, Debug)]
pub struct WorstCase {
    k: usize,
    alpha: f64,
    b: f64,
    v: usize,
    w: usize,
    n: usize,
    weights: Vec<f64>,
    smoothness: f64,
    x_star: Vec<f64>,
    f_star: f64,
}

pub fn worst_case_chain(
    k: usize,
    alpha: f64,
    b: f64,
    n: usize,
    v: usize,
    w: usize,
) -> Result<WorstCase, ObjectiveError> {
    if k < 1 {
        return Err(ObjectiveError::InvalidParameter(
            "K must be at least 1".into(),
        ));
    }
    if !(alpha > 0.0) || !(b > 0.0) {
        return Err(ObjectiveError::InvalidParameter(
            "alpha and b must be positive".into(),
        ));
    }
    if v == w || v >= n || w >= n {
        return Err(ObjectiveError::InvalidParameter(format!(
            "nodes {v}, {w} must be distinct and below n = {n}"
        )));
    }
    let dim = 2 * k + 1;
    let hessian = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            if i == 0 {
                alpha
            } else {
                2.0
            }
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    });
    let mut rhs = DVector::zeros(dim);
    rhs[0] = b;
    let x_star: Vec<f64> = hessian
        .cholesky()
        .ok_or_else(|| {
            ObjectiveError::Unbounded(format!(
                "alpha = {alpha} makes the truncated quadratic indefinite"
            ))
        })?
        .solve(&rhs)
        .iter()
        .copied()
        .collect();
    let f_star = 0.5 * alpha - 0.5 * b * x_star[0];
    // each node's Hessian is block diagonal with 2x2 blocks [[0,-1],[-1,2]]
    // (largest eigenvalue 1 + sqrt 2), plus alpha at coordinate 0 on node v
    let smoothness = n as f64 * alpha.max(1.0 + 2f64.sqrt());
    Ok(WorstCase {
        k,
        alpha,
        b,
        v,
        w,
        n,
        weights: uniform_weights(n),
        smoothness,
        x_star,
        f_star,
    })
}

impl WorstCase {
    pub fn active_nodes(&self) -> (usize, usize) {
        (self.v, self.w)
    }

    pub fn half_dim(&self) -> usize {
        self.k
    }

    fn part_v(&self, x: &[f64]) -> f64 {
        let mut s = 0.5 * self.alpha * x[0] * x[0] - self.b * x[0] + 0.5 * self.alpha;
        for k in 1..=self.k {
            s += x[2 * k] * x[2 * k] - x[2 * k - 1] * x[2 * k];
        }
        s
    }

    fn part_w(&self, x: &[f64]) -> f64 {
        (0..self.k)
            .map(|k| x[2 * k + 1] * x[2 * k + 1] - x[2 * k + 1] * x[2 * k])
            .sum()
    }
}

impl Objective for WorstCase {
    fn name(&self) -> &str {
        "worst_case_chain"
    }

    fn n_components(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        2 * self.k + 1
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.x_star)
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.f_star)
    }

    fn component_value(&self, u: usize, x: &[f64]) -> f64 {
        let scale = self.n as f64;
        if u == self.v {
            scale * self.part_v(x)
        } else if u == self.w {
            scale * self.part_w(x)
        } else {
            0.0
        }
    }

    fn component_grad(&self, u: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let scale = self.n as f64;
        if u == self.v {
            out[0] = scale * (self.alpha * x[0] - self.b);
            for k in 1..=self.k {
                out[2 * k] += scale * (2.0 * x[2 * k] - x[2 * k - 1]);
                out[2 * k - 1] -= scale * x[2 * k];
            }
        } else if u == self.w {
            for k in 0..self.k {
                out[2 * k + 1] += scale * (2.0 * x[2 * k + 1] - x[2 * k]);
                out[2 * k] -= scale * x[2 * k + 1];
            }
        }
    }
}
