//! Mixing, relaxation, hitting and cover times of a finite chain, exact (dense
//! linear algebra) and by Monte Carlo.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{ChainError, MarkovChain, Start};
use crate::graph::Graph;
use crate::numeric::{harmonic, mean_sd};
use crate::rng::{stream_rng, streams, StreamRng};
use crate::staleness::StalenessTracker;

/// Largest state space handled by the dense routines.
pub const DENSE_LIMIT: usize = 2000;
/// Largest mixing time searched for.
pub const MIX_CAP: u64 = 10_000_000;
/// Step budget for a single simulated trajectory.
pub const TRAJECTORY_CAP: u64 = 1_000_000_000;
/// Smallest replica count accepted by the cover-time estimator.
pub const MIN_COVER_REPS: usize = 100;

/// Mean of i.i.d. replicas with a 95% normal half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub sd: f64,
    pub half_width: f64,
    pub reps: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let (mean, sd) = mean_sd(samples);
        McEstimate {
            mean,
            sd,
            half_width: 1.96 * sd / (samples.len() as f64).sqrt(),
            reps: samples.len(),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.sd / (self.reps as f64).sqrt()
    }
}

fn check_dense(chain: &MarkovChain) -> Result<(), ChainError> {
    if chain.n() > DENSE_LIMIT {
        return Err(ChainError::TooLarge(chain.n(), DENSE_LIMIT));
    }
    Ok(())
}

/// `max_v d_TV(m[v, .], pi)`.
pub fn worst_tv(m: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..m.nrows())
        .map(|v| {
            0.5 * (0..m.ncols())
                .map(|w| (m[(v, w)] - pi[w]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Smallest `t >= 1` with `max_v d_TV(P^t(v, .), pi) <= eps`.
pub fn mixing_time_exact(chain: &MarkovChain, eps: f64) -> Result<u64, ChainError> {
    mixing_time_capped(chain, eps, MIX_CAP)
}

/// Same as [`mixing_time_exact`] with an explicit cap.
///
/// The worst-start distance is non-increasing in `t`, so the answer is found
/// by repeated squaring followed by a binary descent over the stored powers.
pub fn mixing_time_capped(chain: &MarkovChain, eps: f64, cap: u64) -> Result<u64, ChainError> {
    if !(eps > 0.0) {
        return Err(ChainError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    check_dense(chain)?;
    let period = chain.period();
    if period > 1 {
        return Err(ChainError::Periodic(period));
    }
    let pi = chain.stationary();
    let mut powers = vec![chain.transition().clone()];
    let mut exponent: u64 = 1;
    while worst_tv(powers.last().unwrap(), pi) > eps {
        if exponent >= cap {
            return Err(ChainError::CapExceeded(cap));
        }
        let last = powers.last().unwrap();
        powers.push(last * last);
        exponent *= 2;
    }
    if powers.len() == 1 {
        return Ok(1);
    }
    let k = powers.len() - 1;
    let mut base = powers[k - 1].clone();
    let mut lo: u64 = 1 << (k - 1);
    for j in (0..k - 1).rev() {
        let cand = &base * &powers[j];
        if worst_tv(&cand, pi) > eps {
            base = cand;
            lo += 1 << j;
        }
    }
    let t = lo + 1;
    if t > cap {
        return Err(ChainError::CapExceeded(cap));
    }
    Ok(t)
}

/// `1 / (1 - max_{i>=2} |lambda_i|)` for a reversible chain; `None` otherwise.
/// Infinite when the absolute spectral gap vanishes (periodic chains).
pub fn relaxation_time(chain: &MarkovChain) -> Result<Option<f64>, ChainError> {
    check_dense(chain)?;
    if !chain.is_reversible() {
        return Ok(None);
    }
    let n = chain.n();
    if n == 1 {
        return Ok(Some(1.0));
    }
    let sqrt_pi: Vec<f64> = chain.stationary().iter().map(|x| x.sqrt()).collect();
    let p = chain.transition();
    let s = DMatrix::from_fn(n, n, |v, w| {
        let a = sqrt_pi[v] * p[(v, w)] / sqrt_pi[w];
        let b = sqrt_pi[w] * p[(w, v)] / sqrt_pi[v];
        0.5 * (a + b)
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let second = eig[1..].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let gap = 1.0 - second;
    Ok(Some(if gap <= 1e-12 {
        f64::INFINITY
    } else {
        1.0 / gap
    }))
}

/// Matrix of `E[tau_w | v_0 = v]` with `tau_w = inf{t >= 1 : v_t = w}`, so the
/// diagonal holds expected return times `1/pi_w`.
pub fn hitting_times_exact(chain: &MarkovChain) -> Result<DMatrix<f64>, ChainError> {
    check_dense(chain)?;
    let n = chain.n();
    let pi = chain.stationary();
    let a = DMatrix::from_fn(n, n, |v, w| {
        let id = if v == w { 1.0 } else { 0.0 };
        id - chain.prob(v, w) + pi[w]
    });
    let z = a.try_inverse().ok_or(ChainError::Singular)?;
    Ok(DMatrix::from_fn(n, n, |v, w| {
        if v == w {
            1.0 / pi[w]
        } else {
            (z[(w, w)] - z[(v, w)]) / pi[w]
        }
    }))
}

/// Largest entry of a hitting-time matrix, with its `(v, w)` position.
pub fn tau_hit_of(h: &DMatrix<f64>) -> (f64, usize, usize) {
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for v in 0..h.nrows() {
        for w in 0..h.ncols() {
            if h[(v, w)] > best.0 {
                best = (h[(v, w)], v, w);
            }
        }
    }
    best
}

fn first_passage(
    chain: &MarkovChain,
    v: usize,
    w: usize,
    rng: &mut StreamRng,
    cap: u64,
) -> Option<u64> {
    let mut x = v;
    for t in 1..=cap {
        x = chain.step(x, rng);
        if x == w {
            return Some(t);
        }
    }
    None
}

fn cover_from(chain: &MarkovChain, v: usize, rng: &mut StreamRng, cap: u64) -> Option<u64> {
    let mut seen = vec![false; chain.n()];
    let mut remaining = chain.n();
    let mut x = v;
    for t in 1..=cap {
        x = chain.step(x, rng);
        if !seen[x] {
            seen[x] = true;
            remaining -= 1;
            if remaining == 0 {
                return Some(t);
            }
        }
    }
    None
}

fn replicate<F>(reps: usize, seed: u64, offset: u64, f: F) -> Result<Vec<f64>, ChainError>
where
    F: Fn(&mut StreamRng) -> Option<u64> + Sync,
{
    let out: Vec<Option<u64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, streams::REPLICA_BASE + offset + r as u64);
            f(&mut rng)
        })
        .collect();
    out.into_iter()
        .map(|x| {
            x.map(|t| t as f64)
                .ok_or(ChainError::CapExceeded(TRAJECTORY_CAP))
        })
        .collect()
}

/// Monte-Carlo estimate of `E[tau_w | v_0 = v]`.
pub fn first_passage_mc(
    chain: &MarkovChain,
    v: usize,
    w: usize,
    reps: usize,
    seed: u64,
) -> Result<McEstimate, ChainError> {
    let samples = replicate(reps, seed, 0, |rng| {
        first_passage(chain, v, w, rng, TRAJECTORY_CAP)
    })?;
    Ok(McEstimate::from_samples(&samples))
}

/// Start states considered by [`cover_time_mc`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverStart {
    WorstStart,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverEstimate {
    pub estimate: McEstimate,
    pub start: usize,
}

/// Monte-Carlo cover time: first `t >= 1` by which every state, including the
/// start, has been visited at some time in `1..=t`. With `WorstStart` every
/// start is simulated `reps` times and the largest mean is reported.
pub fn cover_time_mc(
    chain: &MarkovChain,
    start: CoverStart,
    reps: usize,
    seed: u64,
) -> Result<CoverEstimate, ChainError> {
    if reps < MIN_COVER_REPS {
        return Err(ChainError::InvalidParameter(format!(
            "cover-time estimation needs at least {MIN_COVER_REPS} replicas, got {reps}"
        )));
    }
    let starts: Vec<usize> = match start {
        CoverStart::WorstStart => (0..chain.n()).collect(),
        CoverStart::Fixed(v) if v < chain.n() => vec![v],
        CoverStart::Fixed(v) => {
            return Err(ChainError::InvalidParameter(format!(
                "start {v} out of range"
            )));
        }
    };
    let mut best: Option<CoverEstimate> = None;
    for v in starts {
        let offset = v as u64 * reps as u64;
        let samples = replicate(reps, seed, offset, |rng| {
            cover_from(chain, v, rng, TRAJECTORY_CAP)
        })?;
        let estimate = McEstimate::from_samples(&samples);
        if best.is_none_or(|b| estimate.mean > b.estimate.mean) {
            best = Some(CoverEstimate { estimate, start: v });
        }
    }
    Ok(best.expect("at least one start"))
}

/// Monte-Carlo estimate of `(1/T) sum_{t<T} A_t` with
/// `A_t = max_v (t - d_v(t))` along a trajectory from `start`.
pub fn mean_staleness_mc(
    chain: &MarkovChain,
    start: Start,
    horizon: u64,
    reps: usize,
    seed: u64,
) -> McEstimate {
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, streams::REPLICA_BASE + r as u64);
            let mut tracker = StalenessTracker::new(chain.n());
            let mut v = chain.draw_start(start, &mut rng);
            let mut total: u128 = 0;
            for t in 0..horizon {
                if t > 0 {
                    v = chain.step(v, &mut rng);
                }
                tracker.visit(v, t);
                total += tracker.staleness(t) as u128;
            }
            total as f64 / horizon as f64
        })
        .collect();
    McEstimate::from_samples(&samples)
}

/// `2 tau_mix / pi_min`.
pub fn hit_bound_from_mix(tau_mix: u64, pi_min: f64) -> f64 {
    2.0 * tau_mix as f64 / pi_min
}

/// `H_{n-1} tau_hit`.
pub fn matthews_bound(n: usize, tau_hit: f64) -> f64 {
    harmonic(n.saturating_sub(1)) * tau_hit
}

/// `ceil(tau_rel ln(1 / (pi_min eps)))`.
pub fn mix_bound_from_rel(tau_rel: f64, pi_min: f64, eps: f64) -> f64 {
    (tau_rel * (1.0 / (pi_min * eps)).ln()).ceil()
}

/// `2 |E| Diam(G) / d` for a `d`-regular graph.
pub fn regular_hit_bound(g: &Graph) -> Option<f64> {
    let d = g.regular_degree()?;
    Some(2.0 * g.edge_count() as f64 * g.diameter() as f64 / d as f64)
}

/// Summary of the chain times. Mixing times are `None` for periodic chains,
/// `tau_rel` is `None` for non-reversible chains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTimes {
    pub n: usize,
    pub pi_min: f64,
    pub tau_mix_quarter: Option<u64>,
    pub tau_mix: Option<u64>,
    pub tau_rel: Option<f64>,
    pub tau_hit: f64,
    pub tau_cov_mc: f64,
    pub tau_cov_half_width: f64,
    pub tau_cov_matthews: f64,
}

impl ChainTimes {
    pub const CSV_HEADER: &'static str =
        "n,tau_mix_quarter,tau_mix,tau_rel,tau_hit,tau_cov_mc,tau_cov_half_width,tau_cov_matthews";

    pub fn csv_row(&self) -> String {
        let opt_int = |x: Option<u64>| x.map_or("inf".to_string(), |t| t.to_string());
        let rel = match self.tau_rel {
            None => "NA".to_string(),
            Some(x) if x.is_infinite() => "inf".to_string(),
            Some(x) => format!("{x}"),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            opt_int(self.tau_mix_quarter),
            opt_int(self.tau_mix),
            rel,
            self.tau_hit,
            self.tau_cov_mc,
            self.tau_cov_half_width,
            self.tau_cov_matthews
        )
    }
}

fn mixing_or_none(chain: &MarkovChain, eps: f64) -> Result<Option<u64>, ChainError> {
    match mixing_time_exact(chain, eps) {
        Ok(t) => Ok(Some(t)),
        Err(ChainError::Periodic(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `eps` sets the accuracy of the `tau_mix` column (default `pi_min / 2`).
pub fn chain_times(
    chain: &MarkovChain,
    eps: Option<f64>,
    mc_reps: usize,
    seed: u64,
) -> Result<ChainTimes, ChainError> {
    let pi_min = chain.pi_min();
    let eps = eps.unwrap_or(pi_min / 2.0);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ChainError::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let h = hitting_times_exact(chain)?;
    let tau_hit = tau_hit_of(&h).0;
    let cover = cover_time_mc(chain, CoverStart::WorstStart, mc_reps, seed)?;
    Ok(ChainTimes {
        n: chain.n(),
        pi_min,
        tau_mix_quarter: mixing_or_none(chain, 0.25)?,
        tau_mix: mixing_or_none(chain, eps)?,
        tau_rel: relaxation_time(chain)?,
        tau_hit,
        tau_cov_mc: cover.estimate.mean,
        tau_cov_half_width: cover.estimate.half_width,
        tau_cov_matthews: matthews_bound(chain.n(), tau_hit),
    })
}
