use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::aggregate::AggregateStats;
use super::HarnessError;
use crate::optim::Trace;

pub const TRACE_HEADER: &str = "t,comms,f_gap,grad_norm_sq,node";

/// 17 significant digits in scientific notation; `inf`/`nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let node = r.node.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            r.comms,
            format_float(r.f_gap),
            format_float(r.grad_norm_sq),
            node
        )
        .unwrap();
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<(), HarnessError> {
    fs::write(path, trace_csv(trace)).map_err(|e| HarnessError::io(path, e))
}

pub fn write_aggregate_csv(path: &Path, stats: &AggregateStats) -> Result<(), HarnessError> {
    fs::write(path, stats.to_csv()).map_err(|e| HarnessError::io(path, e))
}
