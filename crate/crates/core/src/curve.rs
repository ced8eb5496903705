//! Tradeoff curves sampled on a uniform rate grid.

use alloc::vec::Vec;

use crate::closed_form::{d_mimo_2x2, r_star};
use crate::optimize::{d_blind_numeric, d_global_numeric, d_local_numeric, OptimizerConfig};
use crate::{Error, NetworkParams, Result, Strategy, EXPONENT_TOL};

/// Values below this are reported as an exact zero and end the curve.
pub const ZERO_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub r: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub eta: f64,
    pub strategy: Strategy,
    pub r_step: f64,
    pub config: OptimizerConfig,
    /// Strictly increasing in `r`, ending at the first zero of `d`.
    pub points: Vec<CurvePoint>,
}

/// Rate where the strategy's DMT is known to vanish: `r*` for the global
/// strategy, 2 otherwise.
pub fn support_end(strategy: Strategy, params: &NetworkParams) -> f64 {
    match strategy {
        Strategy::Global => r_star(params),
        _ => 2.0,
    }
}

/// Grid rates `0, step, 2 step, ...` strictly below the support end.
pub fn rate_grid(strategy: Strategy, params: &NetworkParams, r_step: f64) -> Result<Vec<f64>> {
    if !(r_step > 0.0 && r_step.is_finite()) {
        return Err(Error::domain("r_step", r_step, "r_step > 0"));
    }
    let end = support_end(strategy, params);
    Ok((0..)
        .map(|k| k as f64 * r_step)
        .take_while(|&r| r < end - EXPONENT_TOL)
        .collect())
}

/// Diversity exponent of one strategy at one rate.
pub fn evaluate(
    strategy: Strategy,
    r: f64,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    match strategy {
        Strategy::Global => d_global_numeric(r, params, cfg).map(|s| s.d_value),
        Strategy::Local => d_local_numeric(r, params, cfg).map(|s| s.d_value),
        Strategy::Blind => d_blind_numeric(r, params, cfg).map(|s| s.d_value),
        Strategy::Mimo2x2 => d_mimo_2x2(r),
    }
}

/// Builds a curve from values already computed on (a prefix of)
/// [`rate_grid`]. The curve stops at the first value below
/// [`ZERO_THRESHOLD`], which is stored as `0`; if no such value occurs the
/// exact zero at [`support_end`] is appended.
pub fn assemble(
    strategy: Strategy,
    params: &NetworkParams,
    r_step: f64,
    cfg: &OptimizerConfig,
    rates: &[f64],
    values: &[f64],
) -> TradeoffCurve {
    let mut points = Vec::with_capacity(rates.len() + 1);
    let mut ended = false;
    for (&r, &d) in rates.iter().zip(values) {
        if d < ZERO_THRESHOLD {
            points.push(CurvePoint { r, d: 0.0 });
            ended = true;
            break;
        }
        points.push(CurvePoint { r, d });
    }
    if !ended {
        points.push(CurvePoint {
            r: support_end(strategy, params),
            d: 0.0,
        });
    }
    TradeoffCurve {
        eta: params.eta(),
        strategy,
        r_step,
        config: *cfg,
        points,
    }
}

/// Evaluates `strategy` on the rate grid until its DMT reaches zero.
pub fn compute_curve(
    strategy: Strategy,
    params: &NetworkParams,
    r_step: f64,
    cfg: &OptimizerConfig,
) -> Result<TradeoffCurve> {
    cfg.validate()?;
    let rates = rate_grid(strategy, params, r_step)?;
    let mut values = Vec::with_capacity(rates.len());
    for &r in &rates {
        let d = evaluate(strategy, r, params, cfg)?;
        values.push(d);
        if d < ZERO_THRESHOLD {
            break;
        }
    }
    Ok(assemble(strategy, params, r_step, cfg, &rates, &values))
}
