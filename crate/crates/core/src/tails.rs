//! Empirical check of the density exponents of the channel exponents.
//!
//! Three kinds of tail probability are estimated across an SNR sweep and
//! their log-log slopes compared with the exponents that make up `s(alpha)`:
//!
//! * `P[g1^2 <= rho^(a1 - 1)]` decays with exponent `2 (1 - a1)`;
//! * `P[|h_sr|^2 <= rho^(a_sr - eta)]` decays with exponent `eta - a_sr`;
//! * `P[g1^2 <= rho^(a1 - 1), g2^2 <= rho^(a2 - 1)]` decays with exponent
//!   `4 - 3 a1 - 2 a2` when `a1 + a2 <= 1`, else `3 - 2 a1 - a2`.
//!
//! The joint probability is around `1e-9` at 30 dB for `(0.25, 0.25)`, so
//! plain sampling sees essentially no events. Its default estimator draws
//! `h_s` with `|h_s|^2` restricted to the event, and `h_r` with both its
//! components along and across `h_s` restricted to the magnitudes the event
//! allows, then reweights by the probability of that restriction. The event
//! itself is still decided on the rebuilt channel through the SIC gains, so
//! the estimate is unbiased.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::{project, sic_gains, ChannelDraw};
use crate::math::{db_to_linear, exp, expm1, ln_1p, pow10, sin_cos, sqrt};
use crate::sampler::ChannelSampler;
use crate::slope::{weighted_loglog_fit, LogPoint};
use crate::{Error, Result};

/// Samples per deterministic accumulation chunk. Chunk sums are combined in
/// chunk order, so results do not depend on how chunks are scheduled.
pub const CHUNK: u64 = 1 << 16;

/// Streams used here are offset from the per-SNR outage streams.
const STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailProbe {
    Alpha1 { a1: f64 },
    AlphaSr { a_sr: f64 },
    Joint { a1: f64, a2: f64, conditioned: bool },
}

impl TailProbe {
    /// Exponent the probability is expected to decay with.
    pub fn theory_slope(&self, eta: f64) -> f64 {
        match *self {
            TailProbe::Alpha1 { a1 } => 2.0 * (1.0 - a1),
            TailProbe::AlphaSr { a_sr } => eta - a_sr,
            TailProbe::Joint { a1, a2, .. } => {
                if a1 + a2 <= 1.0 {
                    4.0 - 3.0 * a1 - 2.0 * a2
                } else {
                    3.0 - 2.0 * a1 - a2
                }
            }
        }
    }

    pub fn label(&self) -> alloc::string::String {
        match *self {
            TailProbe::Alpha1 { a1 } => alloc::format!("alpha1<={a1}"),
            TailProbe::AlphaSr { a_sr } => alloc::format!("alpha_sr<={a_sr}"),
            TailProbe::Joint { a1, a2, .. } => alloc::format!("(alpha1,alpha2)<=({a1},{a2})"),
        }
    }

    fn validate(&self, eta: f64) -> Result<()> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::domain(name, v, "probe level within [0, 1]"))
            }
        };
        match *self {
            TailProbe::Alpha1 { a1 } => unit("a1", a1),
            TailProbe::AlphaSr { a_sr } => {
                if (0.0..=eta).contains(&a_sr) {
                    Ok(())
                } else {
                    Err(Error::domain("a_sr", a_sr, "0 <= a_sr <= eta"))
                }
            }
            TailProbe::Joint { a1, a2, .. } => unit("a1", a1).and(unit("a2", a2)),
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            TailProbe::Alpha1 { .. } => 0,
            TailProbe::AlphaSr { .. } => 1,
            TailProbe::Joint {
                conditioned: false, ..
            } => 2,
            TailProbe::Joint {
                conditioned: true, ..
            } => 3,
        }
    }
}

/// The probes reported by [`validate_lemma1_tails`].
pub fn default_probes() -> [TailProbe; 3] {
    [
        TailProbe::Alpha1 { a1: 0.5 },
        TailProbe::AlphaSr { a_sr: 0.5 },
        TailProbe::Joint {
            a1: 0.25,
            a2: 0.25,
            conditioned: true,
        },
    ]
}

/// Running sums of per-sample estimator values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub n: u64,
    pub hits: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.hits += other.hits;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Variance of [`Self::mean`].
    pub fn var_of_mean(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m).max(0.0)) / (n - 1.0)
    }
}

pub fn n_chunks(samples: u64) -> u64 {
    samples.div_ceil(CHUNK)
}

/// Accumulates chunk `chunk` of a run of `samples` draws for one probe at one
/// SNR point.
pub fn accumulate_chunk(
    probe: &TailProbe,
    eta: f64,
    snr_index: usize,
    snr_db: f64,
    seed: u64,
    chunk: u64,
    samples: u64,
) -> Accumulator {
    let rho = db_to_linear(snr_db);
    let start = chunk * CHUNK;
    let end = samples.min(start + CHUNK);
    let stream = STREAM_BASE + (probe.stream_tag() << 20) + snr_index as u64;
    let mut sampler = ChannelSampler::new(seed, stream, start);
    let mut acc = Accumulator::default();
    for _ in start..end {
        let v = match *probe {
            TailProbe::Alpha1 { a1 } => {
                let d = sampler.draw();
                indicator(project(&d).h_s_sq <= pow10((a1 - 1.0) * snr_db / 10.0))
            }
            TailProbe::AlphaSr { a_sr } => {
                let d = sampler.draw();
                indicator(d.h_sr.norm_sqr() <= pow10((a_sr - eta) * snr_db / 10.0))
            }
            TailProbe::Joint {
                a1,
                a2,
                conditioned: false,
            } => {
                let d = sampler.draw();
                let (g1, g2) = sic_gains(&project(&d), rho);
                let x = pow10((a1 - 1.0) * snr_db / 10.0);
                let y = pow10((a2 - 1.0) * snr_db / 10.0);
                indicator(g1 <= x && g2 <= y)
            }
            TailProbe::Joint {
                a1,
                a2,
                conditioned: true,
            } => conditioned_joint_sample(&mut sampler, rho, a1, a2, snr_db),
        };
        acc.n += 1;
        if v > 0.0 {
            acc.hits += 1;
            acc.sum += v;
            acc.sum_sq += v * v;
        }
    }
    acc
}

#[inline]
fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// One weighted sample of the joint event under the restricted proposal.
fn conditioned_joint_sample(
    sampler: &mut ChannelSampler,
    rho: f64,
    a1: f64,
    a2: f64,
    snr_db: f64,
) -> f64 {
    let x = pow10((a1 - 1.0) * snr_db / 10.0);
    let y = pow10((a2 - 1.0) * snr_db / 10.0);

    sampler.begin_sample();
    let z = [sampler.complex_normal(), sampler.complex_normal()];
    let norm = sqrt(z[0].norm_sqr() + z[1].norm_sqr());
    let dir = [z[0] / norm, z[1] / norm];
    let across = [-dir[1].conj(), dir[0].conj()];

    let mass_s = gamma2_cdf(x);
    let g = gamma2_inv(sampler.uniform() * mass_s, x);
    let par_cap = y * (1.0 + rho * g);
    let mass_par = -expm1(-par_cap);
    let mass_perp = -expm1(-y);
    let par = truncated_exp(sampler.uniform(), mass_par);
    let perp = truncated_exp(sampler.uniform(), mass_perp);
    let phase_par = unit_phase(sampler.uniform());
    let phase_perp = unit_phase(sampler.uniform());

    let root_g = sqrt(g);
    let cpar = phase_par * sqrt(par);
    let cperp = phase_perp * sqrt(perp);
    let draw = ChannelDraw {
        h_sr: Complex64::new(0.0, 0.0),
        h_s: [dir[0] * root_g, dir[1] * root_g],
        h_r: [
            dir[0] * cpar + across[0] * cperp,
            dir[1] * cpar + across[1] * cperp,
        ],
    };
    let (g1, g2) = sic_gains(&project(&draw), rho);
    if g1 <= x && g2 <= y {
        mass_s * mass_par * mass_perp
    } else {
        0.0
    }
}

fn unit_phase(u: f64) -> Complex64 {
    let (s, c) = sin_cos(core::f64::consts::TAU * u);
    Complex64::new(c, s)
}

/// Inverse CDF of `Exp(1)` restricted to `[0, c]`, where `mass = 1 - e^-c`.
fn truncated_exp(u: f64, mass: f64) -> f64 {
    -ln_1p(-u * mass)
}

/// CDF of `|h|^2` for `h ~ CN(0, I_2)`: `1 - e^-t (1 + t)`.
pub(crate) fn gamma2_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t < 0.5 {
        // sum_{k>=2} (-1)^k (k - 1) t^k / k!
        let mut term = t * t / 2.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum {
            term *= -t / (k + 1.0) * k / (k - 1.0);
            k += 1.0;
            sum += term;
            if k > 60.0 {
                break;
            }
        }
        sum
    } else {
        1.0 - exp(-t) * (1.0 + t)
    }
}

/// Solves `gamma2_cdf(t) = target` on `[0, hi]`.
fn gamma2_inv(target: f64, hi: f64) -> f64 {
    let (mut lo, mut up) = (0.0, hi);
    let mut t = sqrt(2.0 * target).min(hi);
    for _ in 0..100 {
        let err = gamma2_cdf(t) - target;
        if err > 0.0 {
            up = t;
        } else {
            lo = t;
        }
        let slope = t * exp(-t);
        let mut next = if slope > 0.0 { t - err / slope } else { f64::NAN };
        if !(next > lo && next < up) {
            next = 0.5 * (lo + up);
        }
        if (next - t).abs() <= 1e-15 * t {
            return next;
        }
        t = next;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub snr_db: f64,
    pub p: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub hits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub probe: TailProbe,
    pub theory: f64,
    pub points: Vec<TailPoint>,
    /// Fitted decay exponent and its standard error; `None` when fewer than
    /// three SNR points saw any event.
    pub fit: Option<(f64, f64)>,
    pub excluded_snr_db: Vec<f64>,
}

impl ProbeReport {
    pub fn within(&self, tol: f64) -> bool {
        self.fit.is_some_and(|(d, _)| (d - self.theory).abs() <= tol)
    }
}

/// Builds a report from per-SNR accumulators.
pub fn probe_report(probe: TailProbe, eta: f64, snr_db: &[f64], accs: &[Accumulator]) -> ProbeReport {
    let mut points = Vec::with_capacity(snr_db.len());
    let mut fit_points = Vec::new();
    let mut excluded = Vec::new();
    for (&db, acc) in snr_db.iter().zip(accs) {
        let p = acc.mean();
        let var = acc.var_of_mean();
        points.push(TailPoint {
            snr_db: db,
            p,
            stderr: sqrt(var),
            n_samples: acc.n,
            hits: acc.hits,
        });
        if acc.hits == 0 || p <= 0.0 {
            excluded.push(db);
        } else {
            fit_points.push(LogPoint {
                x: db / 10.0,
                p,
                var_p: var,
            });
        }
    }
    let fit = weighted_loglog_fit(&fit_points).ok().map(|(s, e)| (-s, e));
    ProbeReport {
        probe,
        theory: probe.theory_slope(eta),
        points,
        fit,
        excluded_snr_db: excluded,
    }
}

fn check_inputs(eta: f64, snr_db: &[f64], samples: u64) -> Result<()> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::domain("eta", eta, "eta >= 1"));
    }
    if samples < 2 {
        return Err(Error::Config("tail estimation needs at least 2 samples"));
    }
    if snr_db.is_empty() || snr_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("snr_db list must be non-empty and strictly increasing"));
    }
    Ok(())
}

/// Sequential estimate of one probe across an SNR sweep.
pub fn estimate_probe(
    probe: TailProbe,
    eta: f64,
    snr_db: &[f64],
    samples: u64,
    seed: u64,
) -> Result<ProbeReport> {
    validate_probe_inputs(&probe, eta, snr_db, samples)?;
    let accs: Vec<Accumulator> = snr_db
        .iter()
        .enumerate()
        .map(|(k, &db)| {
            let mut acc = Accumulator::default();
            for c in 0..n_chunks(samples) {
                acc.merge(&accumulate_chunk(&probe, eta, k, db, seed, c, samples));
            }
            acc
        })
        .collect();
    Ok(probe_report(probe, eta, snr_db, &accs))
}

/// Estimates every probe of [`default_probes`].
pub fn validate_lemma1_tails(
    eta: f64,
    snr_db: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<ProbeReport>> {
    default_probes()
        .into_iter()
        .map(|p| estimate_probe(p, eta, snr_db, samples, seed))
        .collect()
}

/// Input validation shared with parallel drivers.
pub fn validate_probe_inputs(probe: &TailProbe, eta: f64, snr_db: &[f64], samples: u64) -> Result<()> {
    check_inputs(eta, snr_db, samples)?;
    probe.validate(eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma2_series_matches_closed_form() {
        for t in [0.05, 0.2, 0.45, 0.5, 0.7] {
            let closed = 1.0 - libm::exp(-t) * (1.0 + t);
            assert!((gamma2_cdf(t) - closed).abs() < 1e-14, "t={t}");
        }
        // t^2/2 - t^3/3 + t^4/8 at t = 1e-4
        let t: f64 = 1e-4;
        let series = t * t / 2.0 - t * t * t / 3.0 + t.powi(4) / 8.0;
        assert!((gamma2_cdf(t) - series).abs() < 1e-20);
    }

    #[test]
    fn gamma2_inverse_round_trips() {
        for &x in &[1e-3, 0.03, 0.4, 2.0] {
            let m = gamma2_cdf(x);
            for u in [0.01, 0.3, 0.77, 1.0] {
                let t = gamma2_inv(u * m, x);
                assert!(t >= 0.0 && t <= x);
                assert!((gamma2_cdf(t) - u * m).abs() <= 1e-12 * m, "x={x} u={u}");
            }
        }
    }

    #[test]
    fn conditioned_and_plain_joint_estimators_agree() {
        // At 5 dB the event is common enough for plain sampling.
        let snr = [5.0];
        let plain = estimate_probe(
            TailProbe::Joint { a1: 0.25, a2: 0.25, conditioned: false },
            1.0,
            &snr,
            400_000,
            9,
        )
        .unwrap();
        let cond = estimate_probe(
            TailProbe::Joint { a1: 0.25, a2: 0.25, conditioned: true },
            1.0,
            &snr,
            100_000,
            9,
        )
        .unwrap();
        let (a, b) = (plain.points[0], cond.points[0]);
        assert!(a.hits > 100);
        let tol = 4.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.p - b.p).abs() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn chunking_is_deterministic() {
        let probe = TailProbe::Alpha1 { a1: 0.5 };
        let a = estimate_probe(probe, 1.0, &[10.0, 20.0, 30.0], 150_000, 3).unwrap();
        let b = estimate_probe(probe, 1.0, &[10.0, 20.0, 30.0], 150_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn theory_slopes() {
        assert_eq!(TailProbe::Alpha1 { a1: 0.5 }.theory_slope(1.0), 1.0);
        assert_eq!(TailProbe::AlphaSr { a_sr: 0.5 }.theory_slope(1.0), 0.5);
        let j = TailProbe::Joint { a1: 0.25, a2: 0.25, conditioned: true };
        assert_eq!(j.theory_slope(1.0), 2.75);
        let j = TailProbe::Joint { a1: 0.75, a2: 0.5, conditioned: true };
        assert_eq!(j.theory_slope(1.0), 1.0);
    }

    #[test]
    fn invalid_probe_levels() {
        assert!(estimate_probe(TailProbe::AlphaSr { a_sr: 2.0 }, 1.0, &[10.0], 10, 0).is_err());
        assert!(estimate_probe(TailProbe::Alpha1 { a1: -0.1 }, 1.0, &[10.0], 10, 0).is_err());
        assert!(estimate_probe(TailProbe::Alpha1 { a1: 0.5 }, 1.0, &[20.0, 10.0], 10, 0).is_err());
    }
}
