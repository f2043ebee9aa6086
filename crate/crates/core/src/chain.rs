//! Transition kernels on graphs, stationary distributions and trajectory
//! sampling.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::stream_rng;

/// Row sums must match 1 to this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Max-abs residual allowed for `pi P = pi` and detailed balance.
pub const STATIONARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("transition matrix must be square and non-empty")]
    Shape,
    #[error("row {row} is not a probability vector (sum {sum}, min {min})")]
    NotStochastic { row: usize, sum: f64, min: f64 },
    #[error("chain is reducible")]
    Reducible,
    #[error("chain is periodic with period {0}")]
    Periodic(usize),
    #[error("stationary solve failed (residual {0:e})")]
    StationaryFailed(f64),
    #[error("invalid chain parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} exceeds the dense limit of {1} states")]
    TooLarge(usize, usize),
    #[error("iteration cap of {0} exceeded")]
    CapExceeded(u64),
    #[error("linear system is singular")]
    Singular,
}

#[derive(Clone, Debug)]
pub struct MarkovChain {
    p: DMatrix<f64>,
    pi: Vec<f64>,
    reversible: bool,
    // Per row: successor ids and cumulative probabilities, for inverse-CDF draws.
    rows: Vec<(Vec<usize>, Vec<f64>)>,
    pi_cumulative: Vec<f64>,
}

/// Where a trajectory starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    Node(usize),
    Stationary,
}

impl MarkovChain {
    /// Validates `p` (square, row-stochastic, irreducible) and solves for its
    /// stationary distribution.
    pub fn from_transition(p: DMatrix<f64>) -> Result<Self, ChainError> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(ChainError::Shape);
        }
        for r in 0..n {
            let row = p.row(r);
            let sum: f64 = row.iter().sum();
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            if (sum - 1.0).abs() > ROW_SUM_TOL || min < 0.0 || !sum.is_finite() {
                return Err(ChainError::NotStochastic { row: r, sum, min });
            }
        }
        if !is_irreducible(&p) {
            return Err(ChainError::Reducible);
        }
        let pi = stationary(&p)?;
        let reversible = (0..n).all(|v| {
            (0..n).all(|w| (pi[v] * p[(v, w)] - pi[w] * p[(w, v)]).abs() <= STATIONARY_TOL)
        });
        let rows = (0..n)
            .map(|v| {
                let mut targets = Vec::new();
                let mut cum = Vec::new();
                let mut acc = 0.0;
                for w in 0..n {
                    let q = p[(v, w)];
                    if q > 0.0 {
                        acc += q;
                        targets.push(w);
                        cum.push(acc);
                    }
                }
                (targets, cum)
            })
            .collect();
        let pi_cumulative = pi
            .iter()
            .scan(0.0, |acc, &q| {
                *acc += q;
                Some(*acc)
            })
            .collect();
        Ok(MarkovChain {
            p,
            pi,
            reversible,
            rows,
            pi_cumulative,
        })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn prob(&self, v: usize, w: usize) -> f64 {
        self.p[(v, w)]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// Off-diagonal support is contained in the edge set of `g`.
    pub fn respects_graph(&self, g: &Graph) -> bool {
        let n = self.n();
        g.node_count() == n
            && (0..n).all(|v| (0..n).all(|w| v == w || self.p[(v, w)] == 0.0 || g.has_edge(v, w)))
    }

    /// gcd of cycle lengths in the support of `P`; 1 means aperiodic.
    pub fn period(&self) -> usize {
        let n = self.n();
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        level[0] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.rows[u].0 {
                if level[w] == usize::MAX {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..n {
            for &w in &self.rows[u].0 {
                let diff = (level[u] + 1).abs_diff(level[w]);
                g = gcd(g, diff);
            }
        }
        g
    }

    /// One transition from `v` by inverse CDF on a single uniform draw.
    pub fn step<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> usize {
        let (targets, cum) = &self.rows[v];
        let u: f64 = rng.random();
        let idx = cum.partition_point(|&c| c <= u).min(targets.len() - 1);
        targets[idx]
    }

    pub fn draw_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.pi_cumulative
            .partition_point(|&c| c <= u)
            .min(self.n() - 1)
    }

    pub fn draw_start<R: Rng + ?Sized>(&self, start: Start, rng: &mut R) -> usize {
        match start {
            Start::Node(v) => v,
            Start::Stationary => self.draw_stationary(rng),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_irreducible(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for w in 0..n {
                let q = if forward { p[(u, w)] } else { p[(w, u)] };
                if q > 0.0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Stationary distribution of an irreducible stochastic matrix, by a dense
/// solve of `pi (I - P) = 0` with the normalization replacing one equation.
pub fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>, ChainError> {
    let n = p.nrows();
    let mut a = DMatrix::<f64>::identity(n, n) - p.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(ChainError::Reducible)?;
    let mut pi: Vec<f64> = sol
        .iter()
        .map(|&x| if x < 0.0 && x > -1e-13 { 0.0 } else { x })
        .collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    let residual = stationary_residual(p, &pi);
    if residual > STATIONARY_TOL || pi.iter().any(|&x| x.is_nan() || x < 0.0) {
        return Err(ChainError::StationaryFailed(residual));
    }
    Ok(pi)
}

/// `max_w |(pi P)_w - pi_w|`.
pub fn stationary_residual(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = p.nrows();
    (0..n)
        .map(|w| ((0..n).map(|v| pi[v] * p[(v, w)]).sum::<f64>() - pi[w]).abs())
        .fold(0.0, f64::max)
}

/// Simple random walk: uniform over neighbors.
pub fn chain_simple_rw(g: &Graph) -> Result<MarkovChain, ChainError> {
    let n = g.node_count();
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        let d = g.degree(v);
        if d == 0 {
            return Err(ChainError::Reducible);
        }
        for &w in g.neighbors(v) {
            p[(v, w)] = 1.0 / d as f64;
        }
    }
    MarkovChain::from_transition(p)
}

/// Uniform over the closed neighborhood: `P[v][w] = 1/(deg(v)+1)` for
/// `w = v` or `w ~ v`. Aperiodic on every graph.
pub fn chain_lazy_maxdeg(g: &Graph) -> Result<MarkovChain, ChainError> {
    let n = g.node_count();
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        let q = 1.0 / (g.degree(v) + 1) as f64;
        p[(v, v)] = q;
        for &w in g.neighbors(v) {
            p[(v, w)] = q;
        }
    }
    MarkovChain::from_transition(p)
}

/// Metropolis-Hastings correction of the simple random walk towards the
/// uniform distribution; rejected mass stays on the diagonal.
pub fn chain_metropolis_uniform(g: &Graph) -> Result<MarkovChain, ChainError> {
    let n = g.node_count();
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        let dv = g.degree(v) as f64;
        let mut off = 0.0;
        for &w in g.neighbors(v) {
            let dw = g.degree(w) as f64;
            let q = (1.0 / dv) * (dv / dw).min(1.0);
            p[(v, w)] = q;
            off += q;
        }
        p[(v, v)] = 1.0 - off;
        if p[(v, v)] < 1e-15 {
            p[(v, v)] = 0.0;
        }
    }
    MarkovChain::from_transition(p)
}

/// Two states flipping with probability `p`.
pub fn chain_two_state(p: f64) -> Result<MarkovChain, ChainError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ChainError::InvalidParameter(format!(
            "flip probability must lie in (0,1), got {p}"
        )));
    }
    MarkovChain::from_transition(DMatrix::from_row_slice(2, 2, &[1.0 - p, p, p, 1.0 - p]))
}

/// A length-`len` trajectory, deterministic in `(chain, start, len, seed)`.
pub fn sample_trajectory(chain: &MarkovChain, start: Start, len: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let mut v = chain.draw_start(start, &mut rng);
    out.push(v);
    for _ in 1..len {
        v = chain.step(v, &mut rng);
        out.push(v);
    }
    out
}
