//! Self-check suite behind `dmt validate`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use dmt_core::channel::{project, sic_decompose, ChannelDraw, CutForm};
use dmt_core::closed_form::{d_blind_closed, d_closed, d_mimo_2x2, r_star};
use dmt_core::exponents::{cut_exponents, f_global, s_exponent};
use dmt_core::optimize::{
    d_blind_numeric, d_global_numeric, d_local_numeric, min_s_over_outage, InnerMode,
    OptimizerConfig,
};
use dmt_core::outage::{McConfig, ScheduleRule};
use dmt_core::sampler::ChannelSampler;
use dmt_core::slope::fit_slope;
use dmt_core::tails::default_probes;
use dmt_core::{ChannelExponents, NetworkParams, Schedule};

use crate::parallel::{estimate_outage_par, estimate_probe_par};
use crate::ToolError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &'static str, r: Result<(bool, String), ToolError>) -> Self {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Skips the Lemma 1 tail slopes and uses smaller sample counts.
    pub fast: bool,
    pub workers: usize,
    pub seed: u64,
}

pub fn run(opts: &Options) -> Vec<Check> {
    let mut checks = vec![
        closed_form_anchors(),
        s_shape(&|a, eta| {
            let params = NetworkParams::new(eta).expect("eta >= 1");
            ChannelExponents::new(a[0], a[1], a[2], &params)
                .and_then(|x| s_exponent(&x, &params))
                .unwrap_or(f64::NAN)
        }),
        cuts_and_equalising_schedule(opts.seed),
        Check::from_result("global optimiser vs closed form", global_vs_closed(opts.fast)),
        Check::from_result("global optimiser at eta = 2", global_eta2()),
        Check::from_result("blind optimiser at low rate", blind_low_rate()),
        Check::from_result("strategy ordering", strategy_ordering()),
        Check::from_result("exact vs grid inner minimum", exact_vs_grid(opts.seed, opts.fast)),
        logdet_identity(if opts.fast { 10_000 } else { 100_000 }, opts.seed),
        component_correlation(if opts.fast { 100_000 } else { 1_000_000 }, opts.seed),
        Check::from_result("zero rate never outages", zero_rate(opts.workers)),
        Check::from_result("worker count invariance", worker_invariance(opts.seed)),
        Check::from_result(
            "outage slope at eta = 1, r = 0.9, f = 1/3",
            mc_slope(if opts.fast { 200_000 } else { 1_000_000 }, opts.seed, opts.workers),
        ),
    ];
    if !opts.fast {
        checks.extend(tail_checks(opts.seed, opts.workers));
    }
    checks
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn closed_form_anchors() -> Check {
    let p = |eta| NetworkParams::new(eta).expect("eta >= 1");
    let cases = [
        ("d(0.5, eta=2)", d_closed(0.5, &p(2.0)).ok(), 2.5),
        ("d(0.8, eta=1.5)", d_closed(0.8, &p(1.5)).ok(), 1.1),
        ("d(1.2, eta=1.5)", d_closed(1.2, &p(1.5)).ok(), 0.25),
        ("d(r*, eta=3)", d_closed(r_star(&p(3.0)), &p(3.0)).ok(), 0.0),
        ("r*(1)", Some(r_star(&p(1.0))), 1.0),
        ("r*(2)", Some(r_star(&p(2.0))), 1.5),
        ("mimo(1)", d_mimo_2x2(1.0).ok(), 1.0),
        ("mimo(1.5)", d_mimo_2x2(1.5).ok(), 0.5),
        ("blind(0.5, eta=2)", d_blind_closed(0.5, &p(2.0)).ok(), 2.5),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| !got.is_some_and(|g| close(g, *want, 1e-12)))
        .map(|(name, got, want)| format!("{name}={got:?} want {want}"))
        .collect();
    if bad.is_empty() {
        Check::new("closed-form anchors", true, format!("{} values exact", cases.len()))
    } else {
        Check::new("closed-form anchors", false, bad.join("; "))
    }
}

/// Continuity of `s` across `a1 + a2 = 1`, non-negativity on the support
/// box, and its zero at `(1, 1, eta)`. Takes `s` as a parameter so a broken
/// implementation can be fed through it.
pub fn s_shape(s: &dyn Fn([f64; 3], f64) -> f64) -> Check {
    const NAME: &str = "s_exponent continuity and minimum";
    let eps = 1e-9;
    let mut worst_jump = 0.0f64;
    let mut min_val = f64::INFINITY;
    for eta in [1.0, 1.7, 3.0] {
        for i in 0..=20 {
            let a1 = i as f64 / 20.0;
            for k in 0..=10 {
                let asr = eta * k as f64 / 10.0;
                let a2 = 1.0 - a1;
                if a2 + eps <= 1.0 && a2 - eps >= 0.0 {
                    let jump = (s([a1, a2 + eps, asr], eta) - s([a1, a2 - eps, asr], eta)).abs();
                    worst_jump = worst_jump.max(jump);
                }
                for j in 0..=20 {
                    min_val = min_val.min(s([a1, j as f64 / 20.0, asr], eta));
                }
            }
        }
    }
    let at_corner = s([1.0, 1.0, 2.0], 2.0);
    let passed = worst_jump <= 1e-6 && min_val >= -1e-12 && at_corner.abs() <= 1e-12;
    Check::new(
        NAME,
        passed,
        format!("max jump {worst_jump:.3e}, min {min_val}, s(1,1,eta)={at_corner}"),
    )
}

fn cuts_and_equalising_schedule(seed: u64) -> Check {
    const NAME: &str = "cut exponents and equalising schedule";
    let params = NetworkParams::new(2.0).expect("eta >= 1");
    let alpha = ChannelExponents::new(0.5, 0.8, 1.2, &params).expect("in box");
    let (cs, cd) = cut_exponents(&alpha, Schedule::new(0.5).expect("f in [0, 1]"));
    let mut ok = close(cs, 0.85, 1e-12) && close(cd, 0.9, 1e-12);
    let mut sampler = ChannelSampler::new(seed, 0, 0);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for _ in 0..1000 {
        sampler.begin_sample();
        let a = ChannelExponents::new(
            sampler.uniform(),
            sampler.uniform(),
            2.0 * sampler.uniform(),
            &params,
        )
        .expect("in box");
        let (cs, cd) = cut_exponents(&a, f_global(&a));
        worst = worst.max((cs - cd).abs());
        let (f1, f2) = {
            let (x, y) = (sampler.uniform(), sampler.uniform());
            (x.min(y), x.max(y))
        };
        let (cs1, cd1) = cut_exponents(&a, Schedule::new(f1).expect("unit"));
        let (cs2, cd2) = cut_exponents(&a, Schedule::new(f2).expect("unit"));
        monotone &= cs1 <= cs2 + 1e-15 && cd1 + 1e-15 >= cd2;
    }
    ok &= worst <= 1e-12 && monotone;
    Check::new(
        NAME,
        ok,
        format!("example ({cs}, {cd}); max |i_cs - i_cd| at f_glob {worst:.2e}; monotone {monotone}"),
    )
}

fn global_vs_closed(fast: bool) -> Result<(bool, String), ToolError> {
    let cfg = OptimizerConfig::default();
    let step = if fast { 0.1 } else { 0.05 };
    let mut tasks = Vec::new();
    for eta in [1.0, 1.5, 3.0, 4.0] {
        let rs = r_star(&NetworkParams::new(eta)?);
        let n = (rs / step).floor() as usize;
        tasks.extend((0..=n).map(|k| (eta, (k as f64 * step).min(rs))));
        tasks.push((eta, rs));
    }
    let errs = tasks
        .par_iter()
        .map(|&(eta, r)| -> Result<f64, ToolError> {
            let params = NetworkParams::new(eta)?;
            let num = d_global_numeric(r, &params, &cfg)?.d_value;
            Ok((num - d_closed(r, &params)?).abs())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok((
        worst <= 0.02,
        format!("eta in {{1, 1.5, 3, 4}}, {} rates, max error {worst:.4}", tasks.len()),
    ))
}

/// Near `eta = 2` the closed form sits above the minimum over the outage
/// region once the edge `alpha2 = 1, alpha_sr = eta` takes over; the
/// optimiser is checked against the smaller of the two.
fn global_eta2() -> Result<(bool, String), ToolError> {
    let cfg = OptimizerConfig::default();
    let params = NetworkParams::new(2.0)?;
    let mut worst = 0.0f64;
    let mut gap = 0.0f64;
    for r in [1.1, 1.25, 1.35, 1.45] {
        let num = d_global_numeric(r, &params, &cfg)?.d_value;
        let closed = d_closed(r, &params)?;
        let delta = 2.0 - r;
        let u = (delta + (delta * delta + 4.0 * delta).sqrt()) / 2.0;
        let edge = 2.0 * u - 2.0;
        worst = worst.max((num - closed.min(edge)).abs());
        gap = gap.max(closed - num);
    }
    Ok((
        worst <= 0.01,
        format!("max error vs min(closed form, edge) {worst:.4}; closed form up to {gap:.4} higher"),
    ))
}

fn blind_low_rate() -> Result<(bool, String), ToolError> {
    let cfg = OptimizerConfig::default();
    let mut worst_d = 0.0f64;
    let mut worst_f = 0.0f64;
    for eta in [1.0, 2.0, 4.0] {
        let params = NetworkParams::new(eta)?;
        for r in [0.25, 0.5, 0.75, 1.0] {
            let res = d_blind_numeric(r, &params, &cfg)?;
            worst_d = worst_d.max((res.d_value - ((eta + 2.0f64).min(4.0) - 3.0 * r)).abs());
            worst_f = worst_f.max((res.f_opt - 1.0 / 3.0).abs());
        }
    }
    Ok((
        worst_d <= 0.02 && worst_f <= 0.01,
        format!("max |d - (min(eta+2,4) - 3r)| {worst_d:.4}, max |f - 1/3| {worst_f:.4}"),
    ))
}

fn strategy_ordering() -> Result<(bool, String), ToolError> {
    let cfg = OptimizerConfig::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for eta in [2.0, 4.0] {
        let params = NetworkParams::new(eta)?;
        for r in [1.1, 1.3, 1.45] {
            let b = d_blind_numeric(r, &params, &cfg)?.d_value;
            let l = d_local_numeric(r, &params, &cfg)?.d_value;
            let g = if r < r_star(&params) {
                d_global_numeric(r, &params, &cfg)?.d_value
            } else {
                0.0
            };
            ok &= b <= l + 0.02 && l <= g + 0.02;
            rows.push(format!("eta={eta} r={r}: {b:.3}/{l:.3}/{g:.3}"));
        }
    }
    Ok((ok, format!("blind/local/global {}", rows.join(", "))))
}

fn exact_vs_grid(seed: u64, fast: bool) -> Result<(bool, String), ToolError> {
    let exact = OptimizerConfig::default();
    let grid = OptimizerConfig {
        mode: InnerMode::Grid,
        alpha_grid_step: if fast { 0.01 } else { 0.005 },
        ..exact
    };
    let mut sampler = ChannelSampler::new(seed, 1, 0);
    let triples: Vec<(f64, f64, f64)> = (0..20)
        .map(|_| {
            sampler.begin_sample();
            (
                2.0 * sampler.uniform(),
                sampler.uniform(),
                1.0 + 3.0 * sampler.uniform(),
            )
        })
        .collect();
    let diffs = triples
        .par_iter()
        .map(|&(r, f, eta)| -> Result<f64, ToolError> {
            let params = NetworkParams::new(eta)?;
            let sched = Schedule::new(f)?;
            let (a, _) = min_s_over_outage(r, sched, &params, &exact)?;
            let (b, _) = min_s_over_outage(r, sched, &params, &grid)?;
            Ok((a - b).abs())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    Ok((
        worst <= 0.05,
        format!("20 random (r, f, eta), grid step {}, max diff {worst:.4}", grid.alpha_grid_step),
    ))
}

/// `log2 det(I + rho H H^H)` from the 2x2 matrix itself, `H = [h_s h_r]`
/// with rows indexed by destination antenna.
pub fn direct_logdet(d: &ChannelDraw, rho: f64) -> f64 {
    let h = [[d.h_s[0], d.h_r[0]], [d.h_s[1], d.h_r[1]]];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let hh = h[i][0] * h[j][0].conj() + h[i][1] * h[j][1].conj();
            let eye = if i == j { 1.0 } else { 0.0 };
            *cell = Complex64::new(eye, 0.0) + hh * rho;
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    det.re.log2()
}

/// Worst `|log2 det - (log2(1 + rho g1^2) + log2(1 + rho g2^2))|`.
pub fn logdet_gap(draws: u64, seed: u64, rho: f64) -> f64 {
    let mut sampler = ChannelSampler::new(seed, 2, 0);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let d = sampler.draw();
        let (g1, g2) = sic_decompose(&d, rho).expect("rho > 0");
        let sum = (rho * g1).ln_1p() / std::f64::consts::LN_2 + (rho * g2).ln_1p() / std::f64::consts::LN_2;
        worst = worst.max((direct_logdet(&d, rho) - sum).abs());
    }
    worst
}

fn logdet_identity(draws: u64, seed: u64) -> Check {
    let gaps: Vec<f64> = [1.0, 1e2, 1e4].iter().map(|&rho| logdet_gap(draws, seed, rho)).collect();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Check::new(
        "log-det identity",
        worst <= 1e-9,
        format!("{draws} draws at rho 1, 1e2, 1e4: max gap {worst:.2e}"),
    )
}

/// Largest absolute pairwise correlation among `|h_s|^2`, `|h_r_perp|^2`
/// and `|h_r_par|^2`.
pub fn max_component_correlation(draws: u64, seed: u64) -> f64 {
    let mut sampler = ChannelSampler::new(seed, 3, 0);
    let mut sum = [0.0; 3];
    let mut cross = [[0.0; 3]; 3];
    for _ in 0..draws {
        let p = project(&sampler.draw());
        let v = [p.h_s_sq, p.perp_sq, p.par_sq];
        for i in 0..3 {
            sum[i] += v[i];
            for j in 0..3 {
                cross[i][j] += v[i] * v[j];
            }
        }
    }
    let n = draws as f64;
    let cov = |i: usize, j: usize| cross[i][j] / n - sum[i] * sum[j] / (n * n);
    let mut worst = 0.0f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        worst = worst.max((cov(i, j) / (cov(i, i) * cov(j, j)).sqrt()).abs());
    }
    worst
}

fn component_correlation(draws: u64, seed: u64) -> Check {
    let worst = max_component_correlation(draws, seed);
    Check::new(
        "projection components uncorrelated",
        worst <= 0.01,
        format!("{draws} draws: max |corr| {worst:.4}"),
    )
}

fn mc_config(eta: f64, r: f64, rule: ScheduleRule, samples: u64, seed: u64, workers: usize) -> McConfig {
    McConfig {
        eta,
        r,
        rule,
        snr_db: vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0],
        samples_per_point: samples,
        seed,
        workers,
        cut_form: CutForm::Exact,
    }
}

fn zero_rate(workers: usize) -> Result<(bool, String), ToolError> {
    let opt = OptimizerConfig::default();
    let mut total = 0;
    for rule in [ScheduleRule::Fixed(1.0 / 3.0), ScheduleRule::Global, ScheduleRule::Local] {
        let cfg = mc_config(2.0, 0.0, rule, 20_000, 1, workers);
        total += estimate_outage_par(&cfg, &opt)?.iter().map(|e| e.n_outages).sum::<u64>();
    }
    Ok((total == 0, format!("{total} outages at r = 0")))
}

fn worker_invariance(seed: u64) -> Result<(bool, String), ToolError> {
    let opt = OptimizerConfig::default();
    let a = estimate_outage_par(&mc_config(1.0, 0.9, ScheduleRule::Global, 100_000, seed, 1), &opt)?;
    let b = estimate_outage_par(&mc_config(1.0, 0.9, ScheduleRule::Global, 100_000, seed, 5), &opt)?;
    Ok((a == b, "1 vs 5 workers".to_string()))
}

fn mc_slope(samples: u64, seed: u64, workers: usize) -> Result<(bool, String), ToolError> {
    let cfg = mc_config(1.0, 0.9, ScheduleRule::Fixed(1.0 / 3.0), samples, seed, workers);
    let est = estimate_outage_par(&cfg, &OptimizerConfig::default())?;
    let fit = fit_slope(&est)?;
    Ok((
        (0.15..=0.45).contains(&fit.d_hat),
        format!("{samples} samples/point, d_hat {:.4} +- {:.4} (theory 0.3)", fit.d_hat, fit.stderr),
    ))
}

/// SNR points for the tail probes.
pub const TAIL_SNR_DB: [f64; 5] = [10.0, 15.0, 20.0, 25.0, 30.0];

fn tail_checks(seed: u64, workers: usize) -> Vec<Check> {
    let [a1, asr, joint] = default_probes();
    let jobs = [
        ("tail slope of alpha1 at 0.5", a1, 1.0, 1_000_000, 0.1),
        ("tail slope of alpha_sr at 0.5 (eta = 1)", asr, 1.0, 1_000_000, 0.1),
        ("joint tail slope at (0.25, 0.25)", joint, 1.0, 10_000_000, 0.3),
    ];
    jobs.iter()
        .map(|&(name, probe, eta, samples, tol)| {
            Check::from_result(
                name,
                estimate_probe_par(probe, eta, &TAIL_SNR_DB, samples, seed, workers).map(|rep| {
                    let detail = match rep.fit {
                        Some((d, se)) => format!("{d:.4} +- {se:.4} (theory {})", rep.theory),
                        None => "too few SNR points with events".to_string(),
                    };
                    (rep.within(tol), detail)
                }),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s_true(a: [f64; 3], eta: f64) -> f64 {
        if a[0] + a[1] <= 1.0 {
            eta + 4.0 - 3.0 * a[0] - 2.0 * a[1] - a[2]
        } else {
            eta + 3.0 - 2.0 * a[0] - a[1] - a[2]
        }
    }

    #[test]
    fn shape_check_accepts_the_real_exponent() {
        assert!(s_shape(&s_true).passed);
    }

    #[test]
    fn shape_check_catches_swapped_branches() {
        let swapped = |a: [f64; 3], eta: f64| {
            if a[0] + a[1] > 1.0 {
                eta + 4.0 - 3.0 * a[0] - 2.0 * a[1] - a[2]
            } else {
                eta + 3.0 - 2.0 * a[0] - a[1] - a[2]
            }
        };
        let c = s_shape(&swapped);
        assert!(!c.passed, "{c}");
    }

    #[test]
    fn shape_check_catches_a_shifted_branch() {
        let shifted = |a: [f64; 3], eta: f64| {
            if a[0] + a[1] <= 1.0 {
                eta + 4.1 - 3.0 * a[0] - 2.0 * a[1] - a[2]
            } else {
                eta + 3.0 - 2.0 * a[0] - a[1] - a[2]
            }
        };
        assert!(!s_shape(&shifted).passed);
    }

    #[test]
    fn direct_logdet_example() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let d = ChannelDraw {
            h_sr: one,
            h_s: [one, zero],
            h_r: [zero, one],
        };
        assert!((direct_logdet(&d, 100.0) - 2.0 * 101f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn display_tags() {
        assert!(Check::new("x", true, "ok").to_string().starts_with("PASS x"));
        assert!(Check::new("x", false, "no").to_string().starts_with("FAIL x"));
    }
}
