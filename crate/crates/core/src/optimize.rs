//! Numerical schedule optimisation for the three relay strategies.
//!
//! * global: `min s(alpha)` over realisations whose equalised cut is `<= r`;
//! * blind:  `max_f min_{alpha in O(r, f)} s(alpha)`;
//! * local:  `min_{a_sr} max_f min_{(a1, a2) : alpha in O(r, f)} s(alpha)`.
//!
//! The inner minimisation over the outage region is piecewise linear. In
//! [`InnerMode::ExactLp`] it is split into eight polytopes (objective branch
//! x violated cut x sign of `a_sr - a1`) and each is solved by vertex
//! enumeration. [`InnerMode::Grid`] scans the support box instead and is kept
//! as an independent cross-check.

use alloc::vec::Vec;

use crate::closed_form::r_star;
use crate::exponents::{cuts_raw, f_global_raw, s_raw};
use crate::math::ceil;
use crate::polytope::{minimize_linear, Halfspace};
use crate::{ChannelExponents, Error, NetworkParams, Result, Schedule, Strategy, EXPONENT_TOL};

/// How the inner minimisation over the outage region is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerMode {
    #[default]
    ExactLp,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Step of the coarse schedule grid.
    pub f_grid_step: f64,
    /// Step of exponent-space grids.
    pub alpha_grid_step: f64,
    /// Golden-section iterations after bracketing.
    pub refine_iters: usize,
    pub mode: InnerMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            f_grid_step: 1e-3,
            alpha_grid_step: 0.01,
            refine_iters: 40,
            mode: InnerMode::ExactLp,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_grid_step > 0.0 && self.f_grid_step <= 1.0) {
            return Err(Error::Config("f_grid_step must lie in (0, 1]"));
        }
        if !(self.alpha_grid_step > 0.0 && self.alpha_grid_step <= 1.0) {
            return Err(Error::Config("alpha_grid_step must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Optimal schedule and diversity exponent at one `(r, eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleResult {
    pub strategy: Strategy,
    pub r: f64,
    pub eta: f64,
    /// Optimal listen fraction. For the global strategy this is the
    /// equalising schedule of the worst-case realisation.
    pub f_opt: f64,
    pub d_value: f64,
    /// Realisation attaining `d_value`.
    pub witness: ChannelExponents,
}

/// `d(r, f) = min s(alpha)` over the outage region `O(r, f)`, with a witness.
pub fn min_s_over_outage(
    r: f64,
    sched: Schedule,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<(f64, ChannelExponents)> {
    check_rate(r, 2.0)?;
    cfg.validate()?;
    let eta = params.eta();
    let f = sched.f();
    let x = match cfg.mode {
        InnerMode::ExactLp => inner_exact(r, f, eta, None),
        InnerMode::Grid => inner_grid(r, f, eta, None, cfg.alpha_grid_step),
    }
    .ok_or(Error::EmptyOutageRegion { r, f })?;
    Ok((s_raw(x, eta), ChannelExponents::clamped(x[0], x[1], x[2], eta)))
}

/// Global strategy solved numerically: minimises `s` over realisations whose
/// equalised cut value `a1 + a2 (a_sr - a1)^+ / ((a_sr - a1)^+ + a2)` is at
/// most `r`.
///
/// For fixed `(a1, a2)`, `s` decreases and the equalised cut increases in
/// `a_sr`, so the largest admissible `a_sr` is solved for exactly. The
/// remaining 2-D problem is scanned on the `alpha_grid_step` grid and
/// refined by alternating golden-section searches.
pub fn d_global_numeric(
    r: f64,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<ScheduleResult> {
    let eta = params.eta();
    check_rate(r, r_star(params))?;
    cfg.validate()?;

    let a1_hi = r.min(1.0);
    let value = |a1: f64, a2: f64| match largest_admissible_sr(a1, a2, r, eta) {
        Some(asr) => s_raw([a1, a2, asr], eta),
        None => f64::INFINITY,
    };

    let n1 = intervals(a1_hi, cfg.alpha_grid_step);
    let n2 = intervals(1.0, cfg.alpha_grid_step);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n1 {
        let a1 = grid_point(0.0, a1_hi, i, n1);
        for j in 0..=n2 {
            let a2 = grid_point(0.0, 1.0, j, n2);
            let v = value(a1, a2);
            if v < best.0 {
                best = (v, a1, a2);
            }
        }
    }

    let h = cfg.alpha_grid_step;
    let (mut a1, mut a2) = (best.1, best.2);
    let mut v = best.0;
    for _ in 0..4 {
        let (x, fx) = golden_max(
            |x| -value(x, a2),
            (a1 - h).max(0.0),
            (a1 + h).min(a1_hi),
            cfg.refine_iters,
        );
        if -fx < v - EXPONENT_TOL {
            a1 = x;
            v = -fx;
        }
        let (y, fy) = golden_max(
            |y| -value(a1, y),
            (a2 - h).max(0.0),
            (a2 + h).min(1.0),
            cfg.refine_iters,
        );
        if -fy < v - EXPONENT_TOL {
            a2 = y;
            v = -fy;
        }
    }

    let asr = largest_admissible_sr(a1, a2, r, eta).ok_or(Error::EmptyOutageRegion { r, f: 1.0 })?;
    let witness = ChannelExponents::clamped(a1, a2, asr, eta);
    let d = s_raw(witness.as_array(), eta).max(0.0);
    Ok(ScheduleResult {
        strategy: Strategy::Global,
        r,
        eta,
        f_opt: f_global_raw(witness.as_array()),
        d_value: d,
        witness,
    })
}

/// Largest `a_sr` in `[0, eta]` keeping the equalised cut at or below `r`.
fn largest_admissible_sr(a1: f64, a2: f64, r: f64, eta: f64) -> Option<f64> {
    if a1 > r {
        return None;
    }
    let room = r - a1;
    if a2 <= room {
        return Some(eta);
    }
    // a2 * gap / (gap + a2) = room
    let gap = room * a2 / (a2 - room);
    Some((a1 + gap).min(eta))
}

/// Blind strategy: the schedule is fixed without channel knowledge.
///
/// The outer maximisation over `f` uses a coarse grid followed by a
/// golden-section search on the bracket around the best grid point. On a
/// flat optimum the schedule nearest `1/3` is reported.
pub fn d_blind_numeric(
    r: f64,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<ScheduleResult> {
    check_rate(r, 2.0)?;
    cfg.validate()?;
    let eta = params.eta();
    let inner = |f: f64| inner_value(r, f, eta, None, cfg);
    let (f_opt, _) = maximize_schedule(&inner, cfg)?;
    let x = inner_point(r, f_opt, eta, None, cfg).ok_or(Error::EmptyOutageRegion { r, f: f_opt })?;
    let witness = ChannelExponents::clamped(x[0], x[1], x[2], eta);
    Ok(ScheduleResult {
        strategy: Strategy::Blind,
        r,
        eta,
        f_opt,
        d_value: s_raw(x, eta).max(0.0),
        witness,
    })
}

/// Local strategy: the relay sees `a_sr` and picks its schedule from it.
///
/// `a_sr` is scanned on the `alpha_grid_step` grid over `[0, eta]`; for each
/// value the best schedule is found on the full `f_grid_step` grid with a
/// golden-section polish. The worst `a_sr` (smallest on ties) and its
/// schedule are reported.
pub fn d_local_numeric(
    r: f64,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<ScheduleResult> {
    check_rate(r, 2.0)?;
    cfg.validate()?;
    let eta = params.eta();
    let n = intervals(eta, cfg.alpha_grid_step);
    let mut worst: Option<(f64, f64, f64)> = None;
    for j in 0..=n {
        let asr = grid_point(0.0, eta, j, n);
        let (f, v) = local_schedule_at(r, asr, eta, cfg)?;
        if worst.map_or(true, |(wv, _, _)| v < wv - EXPONENT_TOL) {
            worst = Some((v, asr, f));
        }
    }
    let (_, asr, f_opt) = worst.ok_or(Error::Config("empty alpha_sr grid"))?;
    let x = inner_point(r, f_opt, eta, Some(asr), cfg)
        .ok_or(Error::EmptyOutageRegion { r, f: f_opt })?;
    let witness = ChannelExponents::clamped(x[0], x[1], x[2], eta);
    Ok(ScheduleResult {
        strategy: Strategy::Local,
        r,
        eta,
        f_opt,
        d_value: s_raw(x, eta).max(0.0),
        witness,
    })
}

/// Best schedule for a relay that knows `alpha_sr`, and the exponent it
/// secures: `argmax_f min_{(a1, a2)} s` over the slice of `O(r, f)` at the
/// given `alpha_sr` (clamped into `[0, eta]`).
pub fn local_schedule(
    r: f64,
    alpha_sr: f64,
    params: &NetworkParams,
    cfg: &OptimizerConfig,
) -> Result<(f64, f64)> {
    check_rate(r, 2.0)?;
    cfg.validate()?;
    let eta = params.eta();
    local_schedule_at(r, alpha_sr.clamp(0.0, eta), eta, cfg)
}

fn local_schedule_at(r: f64, asr: f64, eta: f64, cfg: &OptimizerConfig) -> Result<(f64, f64)> {
    let inner = |f: f64| inner_value(r, f, eta, Some(asr), cfg);
    maximize_schedule(&inner, cfg)
}

/// Schedule reported when the optimum is flat in `f`.
const PREFERRED_SCHEDULE: f64 = 1.0 / 3.0;

/// Schedules whose values differ by less than this are treated as equal.
const PLATEAU_TOL: f64 = 1e-9;

/// Grid scan of `f` over `[0, 1]` plus the preferred schedule, then
/// golden-section on the bracket around the best point. Among grid points on
/// a flat optimum the one nearest `PREFERRED_SCHEDULE` wins. The polished
/// point replaces it only if strictly better.
fn maximize_schedule<F>(inner: &F, cfg: &OptimizerConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Option<f64>,
{
    let n = intervals(1.0, cfg.f_grid_step);
    let mut values = Vec::with_capacity(n + 2);
    for k in 0..=n {
        let f = grid_point(0.0, 1.0, k, n);
        values.push((f, inner(f).ok_or(Error::EmptyOutageRegion { r: f64::NAN, f })?));
    }
    let f = PREFERRED_SCHEDULE;
    values.push((f, inner(f).ok_or(Error::EmptyOutageRegion { r: f64::NAN, f })?));
    let top = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut f_best, mut v_best) = values
        .iter()
        .copied()
        .filter(|&(_, v)| v >= top - PLATEAU_TOL)
        .fold(None, |acc: Option<(f64, f64)>, (f, v)| match acc {
            Some((bf, _))
                if (bf - PREFERRED_SCHEDULE).abs() < (f - PREFERRED_SCHEDULE).abs()
                    || ((bf - PREFERRED_SCHEDULE).abs() == (f - PREFERRED_SCHEDULE).abs()
                        && bf <= f) =>
            {
                acc
            }
            _ => Some((f, v)),
        })
        .ok_or(Error::Config("empty schedule grid"))?;
    let step = 1.0 / n as f64;
    let (f, v) = golden_max(
        |f| inner(f).unwrap_or(f64::NEG_INFINITY),
        (f_best - step).max(0.0),
        (f_best + step).min(1.0),
        cfg.refine_iters,
    );
    if v > v_best + PLATEAU_TOL {
        f_best = f;
        v_best = v;
    }
    Ok((f_best, v_best))
}

fn inner_value(r: f64, f: f64, eta: f64, sr: Option<f64>, cfg: &OptimizerConfig) -> Option<f64> {
    inner_point(r, f, eta, sr, cfg).map(|x| s_raw(x, eta))
}

fn inner_point(r: f64, f: f64, eta: f64, sr: Option<f64>, cfg: &OptimizerConfig) -> Option<[f64; 3]> {
    match cfg.mode {
        InnerMode::ExactLp => inner_exact(r, f, eta, sr),
        InnerMode::Grid => inner_grid(r, f, eta, sr, cfg.alpha_grid_step),
    }
}

/// Gradient of `s` on its two branches, `a1 + a2 <= 1` and `a1 + a2 >= 1`.
const BRANCH_GRADS: [[f64; 3]; 2] = [[-3.0, -2.0, -1.0], [-2.0, -1.0, -1.0]];

/// Exact minimum of `s` over the outage region, or over its slice at a fixed
/// `a_sr`, via the eight-way polytope split.
fn inner_exact(r: f64, f: f64, eta: f64, sr: Option<f64>) -> Option<[f64; 3]> {
    let mut best: Option<(f64, [f64; 3])> = None;
    for (branch, grad) in BRANCH_GRADS.iter().enumerate() {
        for cut_cs in [true, false] {
            for sr_above in [true, false] {
                let candidate = match sr {
                    None => solve_piece_3d(r, f, eta, branch, cut_cs, sr_above, grad),
                    Some(c) => solve_piece_2d(r, f, c, branch, cut_cs, sr_above, grad),
                };
                if let Some(x) = candidate {
                    let x = snap_into_outage(clamp_box(x, eta), r, f, sr.is_some());
                    let v = s_raw(x, eta);
                    best = match best {
                        Some((bv, bx))
                            if bv < v - EXPONENT_TOL
                                || ((v - bv).abs() <= EXPONENT_TOL && !lex_less(&x, &bx)) =>
                        {
                            Some((bv, bx))
                        }
                        _ => Some((v, x)),
                    };
                }
            }
        }
    }
    best.map(|(_, x)| x)
}

fn solve_piece_3d(
    r: f64,
    f: f64,
    eta: f64,
    branch: usize,
    cut_cs: bool,
    sr_above: bool,
    grad: &[f64; 3],
) -> Option<[f64; 3]> {
    let mut hs = [Halfspace::new([0.0; 3], 0.0); 9];
    hs[0] = Halfspace::new([-1.0, 0.0, 0.0], 0.0);
    hs[1] = Halfspace::new([1.0, 0.0, 0.0], 1.0);
    hs[2] = Halfspace::new([0.0, -1.0, 0.0], 0.0);
    hs[3] = Halfspace::new([0.0, 1.0, 0.0], 1.0);
    hs[4] = Halfspace::new([0.0, 0.0, -1.0], 0.0);
    hs[5] = Halfspace::new([0.0, 0.0, 1.0], eta);
    hs[6] = if branch == 0 {
        Halfspace::new([1.0, 1.0, 0.0], 1.0)
    } else {
        Halfspace::new([-1.0, -1.0, 0.0], -1.0)
    };
    hs[7] = if sr_above {
        Halfspace::new([1.0, 0.0, -1.0], 0.0)
    } else {
        Halfspace::new([-1.0, 0.0, 1.0], 0.0)
    };
    hs[8] = match (cut_cs, sr_above) {
        (true, true) => Halfspace::new([1.0 - f, 0.0, f], r),
        (true, false) => Halfspace::new([1.0, 0.0, 0.0], r),
        (false, _) => Halfspace::new([1.0, 1.0 - f, 0.0], r),
    };
    minimize_linear(grad, &hs).map(|(_, x)| x)
}

fn solve_piece_2d(
    r: f64,
    f: f64,
    asr: f64,
    branch: usize,
    cut_cs: bool,
    sr_above: bool,
    grad: &[f64; 3],
) -> Option<[f64; 3]> {
    let mut hs = [Halfspace::new([0.0; 2], 0.0); 7];
    hs[0] = Halfspace::new([-1.0, 0.0], 0.0);
    hs[1] = Halfspace::new([1.0, 0.0], 1.0);
    hs[2] = Halfspace::new([0.0, -1.0], 0.0);
    hs[3] = Halfspace::new([0.0, 1.0], 1.0);
    hs[4] = if branch == 0 {
        Halfspace::new([1.0, 1.0], 1.0)
    } else {
        Halfspace::new([-1.0, -1.0], -1.0)
    };
    hs[5] = if sr_above {
        Halfspace::new([1.0, 0.0], asr)
    } else {
        Halfspace::new([-1.0, 0.0], -asr)
    };
    hs[6] = match (cut_cs, sr_above) {
        (true, true) => Halfspace::new([1.0 - f, 0.0], r - f * asr),
        (true, false) => Halfspace::new([1.0, 0.0], r),
        (false, _) => Halfspace::new([1.0, 1.0 - f], r),
    };
    minimize_linear(&[grad[0], grad[1]], &hs).map(|(_, x)| [x[0], x[1], asr])
}

fn clamp_box(x: [f64; 3], eta: f64) -> [f64; 3] {
    [x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0), x[2].clamp(0.0, eta)]
}

/// Vertices can sit an ulp outside the outage region. Pull the point back in
/// by decreasing coordinates, which never increases either cut.
fn snap_into_outage(mut x: [f64; 3], r: f64, f: f64, sr_fixed: bool) -> [f64; 3] {
    let mut step = f64::EPSILON;
    for _ in 0..64 {
        let (cs, cd) = cuts_raw(x, f);
        let excess = cs.min(cd) - r;
        if excess <= 0.0 {
            return x;
        }
        step = step.max(excess);
        x[0] = (x[0] - step).max(0.0);
        if cd <= cs {
            x[1] = (x[1] - step).max(0.0);
        } else if !sr_fixed {
            x[2] = (x[2] - step).max(0.0);
        }
        step *= 2.0;
    }
    x
}

fn lex_less(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.partial_cmp(b) == Some(core::cmp::Ordering::Less)
}

/// Grid-mode inner minimisation.
///
/// For each `(a1, a2)` grid point, `s` strictly decreases in `a_sr`, so the
/// `a_sr` grid is walked downward from its top until the first outage point.
/// The best point is then refined on a ten-times finer grid spanning one
/// coarse step in every direction.
fn inner_grid(r: f64, f: f64, eta: f64, sr: Option<f64>, h: f64) -> Option<[f64; 3]> {
    let (sr_lo, sr_hi) = match sr {
        Some(c) => (c, c),
        None => (0.0, eta),
    };
    let best = scan_box([0.0, 1.0], [0.0, 1.0], [sr_lo, sr_hi], h, r, f, eta)?;
    let fine = h / 10.0;
    let refined = scan_box(
        [(best[0] - h).max(0.0), (best[0] + h).min(1.0)],
        [(best[1] - h).max(0.0), (best[1] + h).min(1.0)],
        [(best[2] - h).max(sr_lo), (best[2] + h).min(sr_hi)],
        fine,
        r,
        f,
        eta,
    );
    match refined {
        Some(x) if s_raw(x, eta) < s_raw(best, eta) => Some(x),
        _ => Some(best),
    }
}

fn scan_box(
    b1: [f64; 2],
    b2: [f64; 2],
    bsr: [f64; 2],
    h: f64,
    r: f64,
    f: f64,
    eta: f64,
) -> Option<[f64; 3]> {
    let n1 = intervals(b1[1] - b1[0], h);
    let n2 = intervals(b2[1] - b2[0], h);
    let n3 = intervals(bsr[1] - bsr[0], h);
    let mut best: Option<(f64, [f64; 3])> = None;
    for i in 0..=n1 {
        let a1 = grid_point(b1[0], b1[1], i, n1);
        for j in 0..=n2 {
            let a2 = grid_point(b2[0], b2[1], j, n2);
            for k in (0..=n3).rev() {
                let x = [a1, a2, grid_point(bsr[0], bsr[1], k, n3)];
                let (cs, cd) = cuts_raw(x, f);
                if cs.min(cd) <= r {
                    let v = s_raw(x, eta);
                    if best.map_or(true, |(bv, _)| v < bv) {
                        best = Some((v, x));
                    }
                    break;
                }
            }
        }
    }
    best.map(|(_, x)| x)
}

/// Golden-section search for the maximum of `g` on `[lo, hi]`.
fn golden_max<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    if !(b > a) {
        return (a, g(a));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..iters {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Number of grid intervals of width at most `h` covering `len`.
pub(crate) fn intervals(len: f64, h: f64) -> usize {
    if len <= 0.0 {
        return 0;
    }
    (ceil(len / h - 1e-9) as usize).max(1)
}

#[inline]
pub(crate) fn grid_point(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if n == 0 {
        lo
    } else if k == n {
        hi
    } else {
        lo + (hi - lo) * k as f64 / n as f64
    }
}

fn check_rate(r: f64, hi: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("r", r, "r >= 0"));
    }
    if r > hi + EXPONENT_TOL {
        return Err(Error::domain("r", r, "r within the strategy's support"));
    }
    Ok(())
}
