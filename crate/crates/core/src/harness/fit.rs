use serde::Serialize;

use super::HarnessError;

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 with exactly two points).
    pub stderr: f64,
    pub r2: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit, HarnessError> {
    assert_eq!(xs.len(), ys.len(), "fit_line: length mismatch");
    let k = xs.len();
    if k < 2 {
        return Err(HarnessError::TooFewPoints(k));
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    // a constant response is fitted exactly
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = if k > 2 {
        (sse / (kf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        r2,
    })
}

/// Least squares on `(ln x, ln y)`; returns `(slope, stderr, r2)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64), HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(HarnessError::NonPositive(x, y));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let f = fit_line(&xs, &ys)?;
    Ok((f.slope, f.stderr, f.r2))
}
