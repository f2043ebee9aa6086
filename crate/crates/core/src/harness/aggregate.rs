use std::fmt::Write as _;

use serde::Serialize;

use super::csv::format_float;
use crate::numeric::compensated_sum;
use crate::optim::Trace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub t: u64,
    pub comms: u64,
    pub f_gap_mean: f64,
    /// Sample standard deviation; `None` with a single seed.
    pub f_gap_sd: Option<f64>,
    pub grad_norm_sq_mean: f64,
    pub grad_norm_sq_sd: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateStats {
    /// Seeds in ascending order.
    pub seeds: Vec<u64>,
    pub rows: Vec<AggregateRow>,
    /// `(seed, min_t |grad f(x_t)|^2)` in seed order.
    pub min_grad_norm_sq: Vec<(u64, f64)>,
}

fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / k;
    let sd = (values.len() >= 2).then(|| {
        (compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (k - 1.0)).sqrt()
    });
    (mean, sd)
}

/// Per-record statistics across seeds. The traces must share the same
/// logging grid. Seeds are sorted first, so the result does not depend on
/// the order of `traces`.
pub fn aggregate(traces: &[Trace]) -> AggregateStats {
    assert!(!traces.is_empty(), "aggregate needs at least one trace");
    let mut sorted: Vec<&Trace> = traces.iter().collect();
    sorted.sort_by_key(|t| t.seed);
    let len = sorted[0].records.len();
    assert!(
        sorted.iter().all(|t| t.records.len() == len),
        "traces have different logging grids"
    );
    let rows = (0..len)
        .map(|i| {
            let head = &sorted[0].records[i];
            let f: Vec<f64> = sorted.iter().map(|t| t.records[i].f_gap).collect();
            let g: Vec<f64> = sorted.iter().map(|t| t.records[i].grad_norm_sq).collect();
            let (f_gap_mean, f_gap_sd) = mean_sd(&f);
            let (grad_norm_sq_mean, grad_norm_sq_sd) = mean_sd(&g);
            AggregateRow {
                t: head.t,
                comms: head.comms,
                f_gap_mean,
                f_gap_sd,
                grad_norm_sq_mean,
                grad_norm_sq_sd,
            }
        })
        .collect();
    let min_grad_norm_sq = sorted
        .iter()
        .map(|t| {
            let logged = t
                .records
                .iter()
                .map(|r| r.grad_norm_sq)
                .fold(f64::INFINITY, f64::min);
            (t.seed, t.min_grad_norm_sq.map_or(logged, |m| m.min(logged)))
        })
        .collect();
    AggregateStats {
        seeds: sorted.iter().map(|t| t.seed).collect(),
        rows,
        min_grad_norm_sq,
    }
}

impl AggregateStats {
    pub const CSV_HEADER: &'static str =
        "t,comms,f_gap_mean,f_gap_sd,grad_norm_sq_mean,grad_norm_sq_sd,seeds";

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t,
                r.comms,
                format_float(r.f_gap_mean),
                opt(r.f_gap_sd),
                format_float(r.grad_norm_sq_mean),
                opt(r.grad_norm_sq_sd),
                self.seeds.len()
            )
            .unwrap();
        }
        out
    }

    /// Mean over seeds of the per-seed minimum gradient norm.
    pub fn mean_min_grad_norm_sq(&self) -> f64 {
        let v: Vec<f64> = self.min_grad_norm_sq.iter().map(|p| p.1).collect();
        mean_sd(&v).0
    }

    pub fn last(&self) -> &AggregateRow {
        self.rows.last().expect("aggregate has rows")
    }
}
