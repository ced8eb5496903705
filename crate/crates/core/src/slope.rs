//! High-SNR slope of an outage curve on log-log axes.

use alloc::vec::Vec;

use crate::math::{log10, sqrt};
use crate::outage::OutageEstimate;
use crate::{Error, Result};

const LN_10: f64 = core::f64::consts::LN_10;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// Negated slope of `log10 p` against `log10 rho`.
    pub d_hat: f64,
    pub stderr: f64,
    /// Points that entered the fit.
    pub used: usize,
    /// SNRs (dB) dropped because no outage was observed there.
    pub excluded_snr_db: Vec<f64>,
}

/// One point of a log-log fit: `x = log10 rho`, `p` the probability and
/// `var_p` the variance of its estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPoint {
    pub x: f64,
    pub p: f64,
    pub var_p: f64,
}

/// Weighted least-squares fit of outage estimates.
///
/// Each point is weighted by the inverse delta-method variance of
/// `log10 p`, `(1 - p) / (n p ln(10)^2)`. Points with no outages are
/// excluded. At `p = 1` the binomial variance vanishes; it is floored at one
/// sample's worth, `1 / n`, in place of `1 - p`.
pub fn fit_slope(estimates: &[OutageEstimate]) -> Result<SlopeFit> {
    let mut points = Vec::with_capacity(estimates.len());
    let mut excluded = Vec::new();
    for e in estimates {
        if e.n_outages == 0 || e.p_out <= 0.0 {
            excluded.push(e.snr_db);
            continue;
        }
        let n = e.n_samples as f64;
        let q = (1.0 - e.p_out).max(1.0 / n);
        points.push(LogPoint {
            x: e.snr_db / 10.0,
            p: e.p_out,
            var_p: e.p_out * q / n,
        });
    }
    let (slope, stderr) = weighted_loglog_fit(&points)?;
    Ok(SlopeFit {
        d_hat: -slope,
        stderr,
        used: points.len(),
        excluded_snr_db: excluded,
    })
}

/// Slope and standard error of `log10 p` against `x`, weighting each point by
/// the inverse of `var(log10 p) ~= var_p / (p ln 10)^2`.
pub fn weighted_loglog_fit(points: &[LogPoint]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            usable: points.len(),
        });
    }
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|pt| {
            let var_log = pt.var_p / (pt.p * pt.p * LN_10 * LN_10);
            // A noiseless point gets unit weight.
            let w = if var_log > 0.0 && var_log.is_finite() {
                1.0 / var_log
            } else {
                1.0
            };
            (pt.x, log10(pt.p), w)
        })
        .collect();
    for &(x, y, w) in &rows {
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    let (mx, my) = (sx / sw, sy / sw);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y, w) in &rows {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Config("slope fit needs at least two distinct SNRs"));
    }
    Ok((sxy / sxx, sqrt(1.0 / sxx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::pow10;

    fn synthetic(prefactor: f64, d: f64) -> Vec<OutageEstimate> {
        let n = 1_000_000u64;
        (0..6)
            .map(|k| {
                let db = 10.0 + 5.0 * k as f64;
                let p = prefactor * pow10(-d * db / 10.0);
                OutageEstimate {
                    snr_db: db,
                    p_out: p,
                    n_samples: n,
                    n_outages: (p * n as f64) as u64,
                    ci95_halfwidth: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_slope(&synthetic(1.0, 0.3)).unwrap();
        assert!((fit.d_hat - 0.3).abs() < 1e-12, "{fit:?}");
        assert_eq!(fit.used, 6);
    }

    #[test]
    fn prefactor_does_not_bias_slope() {
        let fit = fit_slope(&synthetic(5.0, 1.0)).unwrap();
        assert!((fit.d_hat - 1.0).abs() < 1e-12, "{fit:?}");
    }

    #[test]
    fn zero_points_are_excluded_and_reported() {
        let mut pts = synthetic(1.0, 0.5);
        pts[5] = OutageEstimate::from_counts(35.0, 0, 1000);
        let fit = fit_slope(&pts).unwrap();
        assert_eq!(fit.used, 5);
        assert_eq!(fit.excluded_snr_db, [35.0]);
    }

    #[test]
    fn too_few_points() {
        let pts = [
            OutageEstimate::from_counts(10.0, 5, 100),
            OutageEstimate::from_counts(20.0, 1, 100),
            OutageEstimate::from_counts(30.0, 0, 100),
        ];
        assert_eq!(
            fit_slope(&pts).unwrap_err(),
            Error::InsufficientData { usable: 2 }
        );
    }

    #[test]
    fn certain_outage_keeps_a_finite_weight() {
        let pts = [
            OutageEstimate::from_counts(0.0, 100, 100),
            OutageEstimate::from_counts(10.0, 10, 100),
            OutageEstimate::from_counts(20.0, 1, 100),
        ];
        let fit = fit_slope(&pts).unwrap();
        assert!(fit.d_hat.is_finite() && fit.stderr.is_finite());
    }
}
