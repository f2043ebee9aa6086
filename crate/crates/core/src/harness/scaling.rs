use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::csv::format_float;
use super::fit::fit_loglog_slope;
use super::HarnessError;
use crate::chain::{chain_lazy_maxdeg, chain_simple_rw};
use crate::graph::{build_complete, build_cycle, build_torus, Graph};
use crate::times::{hitting_times_exact, mixing_time_exact, tau_hit_of};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFamily {
    Cycle,
    /// Sizes are side lengths; `n = side^2`.
    Torus2d,
    Complete,
}

impl ScalingFamily {
    fn build(self, size: usize) -> Result<Graph, HarnessError> {
        Ok(match self {
            ScalingFamily::Cycle => build_cycle(size)?,
            ScalingFamily::Torus2d => build_torus(size, 2)?,
            ScalingFamily::Complete => build_complete(size)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub size: usize,
    pub n: usize,
    /// Simple random walk.
    pub tau_hit: f64,
    /// Lazy walk (uniform over the closed neighbourhood), accuracy `pi_min / 2`.
    pub tau_mix: u64,
    pub n_tau_mix: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingTable {
    pub family: ScalingFamily,
    pub rows: Vec<ScalingRow>,
    /// `(slope, stderr, r2)` of `tau_hit` against `n` on log-log axes.
    pub tau_hit_fit: (f64, f64, f64),
    pub n_tau_mix_fit: (f64, f64, f64),
}

/// Exact hitting and mixing times across `sizes`, with log-log slopes in `n`.
/// Mixing uses the lazy walk so that bipartite graphs have a finite answer.
pub fn scaling_table(family: ScalingFamily, sizes: &[usize]) -> Result<ScalingTable, HarnessError> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let g = family.build(size)?;
        let n = g.node_count();
        let tau_hit = tau_hit_of(&hitting_times_exact(&chain_simple_rw(&g)?)?).0;
        let lazy = chain_lazy_maxdeg(&g)?;
        let tau_mix = mixing_time_exact(&lazy, lazy.pi_min() / 2.0)?;
        rows.push(ScalingRow {
            size,
            n,
            tau_hit,
            tau_mix,
            n_tau_mix: n as f64 * tau_mix as f64,
        });
    }
    let hit: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.tau_hit)).collect();
    let mix: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.n_tau_mix)).collect();
    Ok(ScalingTable {
        family,
        tau_hit_fit: fit_loglog_slope(&hit)?,
        n_tau_mix_fit: fit_loglog_slope(&mix)?,
        rows,
    })
}

impl ScalingTable {
    pub const CSV_HEADER: &'static str = "size,n,tau_hit,tau_mix,n_tau_mix";
    pub const FIT_HEADER: &'static str = "quantity,slope,stderr,r2";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.size,
                r.n,
                format_float(r.tau_hit),
                r.tau_mix,
                format_float(r.n_tau_mix)
            )
            .unwrap();
        }
        out
    }

    pub fn fit_csv(&self) -> String {
        let mut out = String::from(Self::FIT_HEADER);
        out.push('\n');
        for (name, (s, se, r2)) in [
            ("tau_hit", self.tau_hit_fit),
            ("n_tau_mix", self.n_tau_mix_fit),
        ] {
            writeln!(
                out,
                "{name},{},{},{}",
                format_float(s),
                format_float(se),
                format_float(r2)
            )
            .unwrap();
        }
        out
    }
}
