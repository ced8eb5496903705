//! Rayon drivers for curves, outage sweeps and tail probes. Work is split
//! into fixed units and reduced in a fixed order, so the thread count never
//! changes a result.

use rayon::prelude::*;

use dmt_core::curve::{assemble, evaluate, rate_grid, TradeoffCurve};
use dmt_core::optimize::OptimizerConfig;
use dmt_core::outage::{McConfig, OutageEstimate, OutageKernel};
use dmt_core::tails::{
    accumulate_chunk, n_chunks, probe_report, validate_probe_inputs, Accumulator, ProbeReport,
    TailProbe,
};
use dmt_core::{NetworkParams, Strategy};

use crate::ToolError;

/// Samples per outage work unit.
const MC_BLOCK: u64 = 1 << 16;

fn pool(workers: usize) -> Result<rayon::ThreadPool, ToolError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ToolError::Solver(format!("thread pool: {e}")))
}

/// One curve, with the rate grid evaluated in parallel.
pub fn compute_curve_par(
    strategy: Strategy,
    params: &NetworkParams,
    r_step: f64,
    cfg: &OptimizerConfig,
) -> Result<TradeoffCurve, ToolError> {
    cfg.validate()?;
    let rates = rate_grid(strategy, params, r_step)?;
    let values = rates
        .par_iter()
        .map(|&r| evaluate(strategy, r, params, cfg))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(assemble(strategy, params, r_step, cfg, &rates, &values))
}

/// Every `(strategy, eta)` combination, in argument order.
pub fn compute_curves(
    strategies: &[Strategy],
    etas: &[f64],
    r_step: f64,
    cfg: &OptimizerConfig,
) -> Result<Vec<TradeoffCurve>, ToolError> {
    let mut curves = Vec::new();
    for &s in strategies {
        for &eta in etas {
            let params = NetworkParams::new(eta)?;
            curves.push(compute_curve_par(s, &params, r_step, cfg)?);
        }
    }
    Ok(curves)
}

/// Outage sweep on `cfg.workers` threads. Counts match the sequential
/// `dmt_core::outage::estimate_outage_with` exactly.
pub fn estimate_outage_par(
    cfg: &McConfig,
    opt: &OptimizerConfig,
) -> Result<Vec<OutageEstimate>, ToolError> {
    let kernel = OutageKernel::new(cfg, opt)?;
    let n = cfg.samples_per_point;
    let blocks = n.div_ceil(MC_BLOCK);
    let units: Vec<(usize, u64)> = (0..cfg.snr_db.len())
        .flat_map(|k| (0..blocks).map(move |b| (k, b)))
        .collect();
    let counts: Vec<u64> = pool(cfg.workers)?.install(|| {
        units
            .par_iter()
            .map(|&(k, b)| {
                let start = b * MC_BLOCK;
                kernel.count(k, cfg.snr_db[k], start..n.min(start + MC_BLOCK))
            })
            .collect()
    });
    Ok(cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(k, &db)| {
            let hits = counts[k * blocks as usize..(k + 1) * blocks as usize]
                .iter()
                .sum();
            OutageEstimate::from_counts(db, hits, n)
        })
        .collect())
}

/// Tail probe with chunks spread over `workers` threads and merged in chunk
/// order; bit-identical to `dmt_core::tails::estimate_probe`.
pub fn estimate_probe_par(
    probe: TailProbe,
    eta: f64,
    snr_db: &[f64],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<ProbeReport, ToolError> {
    validate_probe_inputs(&probe, eta, snr_db, samples)?;
    let chunks = n_chunks(samples);
    let units: Vec<(usize, u64)> = (0..snr_db.len())
        .flat_map(|k| (0..chunks).map(move |c| (k, c)))
        .collect();
    let parts: Vec<Accumulator> = pool(workers)?.install(|| {
        units
            .par_iter()
            .map(|&(k, c)| accumulate_chunk(&probe, eta, k, snr_db[k], seed, c, samples))
            .collect()
    });
    let accs: Vec<Accumulator> = parts
        .chunks(chunks as usize)
        .map(|cs| {
            let mut acc = Accumulator::default();
            for c in cs {
                acc.merge(c);
            }
            acc
        })
        .collect();
    Ok(probe_report(probe, eta, snr_db, &accs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmt_core::channel::CutForm;
    use dmt_core::curve::compute_curve;
    use dmt_core::outage::{estimate_outage_with, ScheduleRule};
    use dmt_core::tails::estimate_probe;

    fn mc(workers: usize, rule: ScheduleRule) -> McConfig {
        McConfig {
            eta: 1.5,
            r: 0.8,
            rule,
            snr_db: vec![5.0, 15.0, 25.0],
            samples_per_point: 150_000,
            seed: 11,
            workers,
            cut_form: CutForm::Exact,
        }
    }

    #[test]
    fn outage_matches_sequential_for_any_worker_count() {
        let opt = OptimizerConfig::default();
        for rule in [ScheduleRule::Fixed(0.4), ScheduleRule::Global, ScheduleRule::Local] {
            let serial = estimate_outage_with(&mc(1, rule), &opt).unwrap();
            for w in [1, 3, 8] {
                assert_eq!(estimate_outage_par(&mc(w, rule), &opt).unwrap(), serial);
            }
        }
    }

    #[test]
    fn probe_matches_sequential() {
        let probe = TailProbe::Joint {
            a1: 0.25,
            a2: 0.25,
            conditioned: true,
        };
        let snr = [10.0, 20.0];
        let serial = estimate_probe(probe, 1.0, &snr, 200_000, 5).unwrap();
        for w in [1, 4] {
            assert_eq!(estimate_probe_par(probe, 1.0, &snr, 200_000, 5, w).unwrap(), serial);
        }
    }

    #[test]
    fn parallel_curve_matches_sequential() {
        let cfg = OptimizerConfig::default();
        let params = NetworkParams::new(2.0).unwrap();
        for s in [Strategy::Global, Strategy::Blind] {
            let seq = compute_curve(s, &params, 0.1, &cfg).unwrap();
            let par = compute_curve_par(s, &params, 0.1, &cfg).unwrap();
            assert_eq!(seq, par);
        }
    }
}
