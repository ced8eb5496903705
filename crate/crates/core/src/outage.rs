//! Monte Carlo estimation of the cut-set outage probability across an SNR
//! sweep.

use alloc::vec::Vec;
use core::ops::Range;

use crate::channel::{CutForm, LinkLogs};
use crate::exponents::f_global_raw;
use crate::math::{db_to_linear, ln, round, sqrt, LN_2};
use crate::optimize::{d_blind_numeric, grid_point, intervals, local_schedule, OptimizerConfig};
use crate::sampler::ChannelSampler;
use crate::{Error, NetworkParams, Result};

/// How the relay picks its listen fraction for each realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleRule {
    Fixed(f64),
    /// Equalising schedule computed from the realised exponents.
    Global,
    /// Best schedule given the realised source-relay exponent only.
    Local,
    /// Schedule fixed from statistics. `None` uses the blind optimiser's
    /// schedule for the configured `(eta, r)`.
    Blind(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub eta: f64,
    pub r: f64,
    pub rule: ScheduleRule,
    pub snr_db: Vec<f64>,
    pub samples_per_point: u64,
    pub seed: u64,
    pub workers: usize,
    pub cut_form: CutForm,
}

impl McConfig {
    pub fn validate(&self) -> Result<NetworkParams> {
        let params = NetworkParams::new(self.eta)?;
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::domain("r", self.r, "r >= 0"));
        }
        if self.samples_per_point < 1 {
            return Err(Error::Config("samples_per_point must be at least 1"));
        }
        if self.workers < 1 {
            return Err(Error::Config("workers must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr_db list is empty"));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("snr_db values must be finite"));
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("snr_db list must be strictly increasing"));
        }
        match self.rule {
            ScheduleRule::Fixed(f) | ScheduleRule::Blind(Some(f)) => {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::domain("f", f, "0 <= f <= 1"));
                }
            }
            ScheduleRule::Local => {
                if self.snr_db[0] <= 0.0 {
                    return Err(Error::Config(
                        "the local rule needs snr_db > 0 to normalise exponents",
                    ));
                }
                if self.r > 2.0 {
                    return Err(Error::domain("r", self.r, "r <= 2 for the local rule"));
                }
            }
            ScheduleRule::Blind(None) => {
                if self.r > 2.0 {
                    return Err(Error::domain("r", self.r, "r <= 2 for the blind rule"));
                }
            }
            ScheduleRule::Global => {}
        }
        Ok(params)
    }
}

/// Outage probability at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub snr_db: f64,
    pub p_out: f64,
    pub n_samples: u64,
    pub n_outages: u64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95_halfwidth: f64,
}

impl OutageEstimate {
    pub fn from_counts(snr_db: f64, n_outages: u64, n_samples: u64) -> Self {
        let p = n_outages as f64 / n_samples as f64;
        OutageEstimate {
            snr_db,
            p_out: p,
            n_samples,
            n_outages,
            ci95_halfwidth: 1.96 * sqrt(p * (1.0 - p) / n_samples as f64),
        }
    }

    pub fn ci(&self) -> (f64, f64) {
        (self.p_out - self.ci95_halfwidth, self.p_out + self.ci95_halfwidth)
    }
}

/// Schedule rule with everything precomputed that does not depend on the
/// realisation.
#[derive(Debug, Clone)]
enum ResolvedRule {
    Fixed(f64),
    Global,
    /// Best schedule on a uniform `alpha_sr` grid over `[0, eta]`.
    Local(Vec<f64>),
}

/// Per-realisation outage test for one configuration.
#[derive(Debug, Clone)]
pub struct OutageKernel {
    eta: f64,
    r: f64,
    seed: u64,
    form: CutForm,
    rule: ResolvedRule,
}

impl OutageKernel {
    /// Resolves the schedule rule. The local rule tabulates the local
    /// optimiser's schedule on the `alpha_grid_step` grid of `alpha_sr`;
    /// draws use the nearest grid entry.
    pub fn new(cfg: &McConfig, opt: &OptimizerConfig) -> Result<Self> {
        let params = cfg.validate()?;
        let rule = match cfg.rule {
            ScheduleRule::Fixed(f) | ScheduleRule::Blind(Some(f)) => ResolvedRule::Fixed(f),
            ScheduleRule::Blind(None) => {
                ResolvedRule::Fixed(d_blind_numeric(cfg.r, &params, opt)?.f_opt)
            }
            ScheduleRule::Global => ResolvedRule::Global,
            ScheduleRule::Local => {
                let n = intervals(cfg.eta, opt.alpha_grid_step);
                let mut table = Vec::with_capacity(n + 1);
                for j in 0..=n {
                    let asr = grid_point(0.0, cfg.eta, j, n);
                    table.push(local_schedule(cfg.r, asr, &params, opt)?.0);
                }
                ResolvedRule::Local(table)
            }
        };
        Ok(OutageKernel {
            eta: cfg.eta,
            r: cfg.r,
            seed: cfg.seed,
            form: cfg.cut_form,
            rule,
        })
    }

    /// The schedule a rule that does not look at the channel uses.
    pub fn fixed_schedule(&self) -> Option<f64> {
        match self.rule {
            ResolvedRule::Fixed(f) => Some(f),
            _ => None,
        }
    }

    fn schedule(&self, logs: &LinkLogs, ln_rho: f64) -> f64 {
        match &self.rule {
            ResolvedRule::Fixed(f) => *f,
            // The equalising schedule is scale-free, so the unnormalised
            // logs work at any SNR, including 0 dB.
            ResolvedRule::Global => f_global_raw([logs.direct, logs.second, logs.sr]),
            ResolvedRule::Local(table) => {
                let asr = (logs.sr / ln_rho).clamp(0.0, self.eta);
                let n = table.len() - 1;
                let idx = round(asr / self.eta * n as f64) as usize;
                table[idx.min(n)]
            }
        }
    }

    /// Number of outages among samples `range` of SNR point `snr_index`.
    pub fn count(&self, snr_index: usize, snr_db: f64, range: Range<u64>) -> u64 {
        let rho = db_to_linear(snr_db);
        let ln_rho = ln(rho);
        let target_nats = self.r * ln_rho;
        let mut sampler = ChannelSampler::new(self.seed, snr_index as u64, range.start);
        let mut outages = 0;
        for _ in range {
            let draw = sampler.draw();
            let logs = LinkLogs::new(&draw, ln_rho, self.eta, self.form);
            let f = self.schedule(&logs, ln_rho);
            let (cs, cd) = logs.cuts_nats(f);
            // Compare in bits so the threshold is exactly r log2(rho).
            if cs.min(cd) / LN_2 <= target_nats / LN_2 {
                outages += 1;
            }
        }
        outages
    }
}

/// Sequential outage sweep. The sample stream of SNR point `k` is stream `k`
/// of the seed, so splitting the samples across workers gives the same
/// counts.
pub fn estimate_outage(cfg: &McConfig) -> Result<Vec<OutageEstimate>> {
    estimate_outage_with(cfg, &OptimizerConfig::default())
}

pub fn estimate_outage_with(cfg: &McConfig, opt: &OptimizerConfig) -> Result<Vec<OutageEstimate>> {
    let kernel = OutageKernel::new(cfg, opt)?;
    Ok(cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(k, &db)| {
            let n = kernel.count(k, db, 0..cfg.samples_per_point);
            OutageEstimate::from_counts(db, n, cfg.samples_per_point)
        })
        .collect())
}
