//! Exponent-space objects: the density exponent of a channel realisation,
//! the high-SNR cut values, outage membership and the equalising schedule.

use crate::{ChannelExponents, NetworkParams, Result, Schedule};

/// Decay exponent of the joint density of `(alpha1, alpha2, alpha_sr)`:
/// the density at `alpha` behaves like `rho^(-s(alpha))`.
///
/// The inputs are already validated types; the `Result` guards against a
/// point that was built for a larger `eta` than `params`.
pub fn s_exponent(alpha: &ChannelExponents, params: &NetworkParams) -> Result<f64> {
    let alpha = ChannelExponents::new(alpha.alpha1, alpha.alpha2, alpha.alpha_sr, params)?;
    Ok(s_raw(alpha.as_array(), params.eta()))
}

#[inline]
pub(crate) fn s_raw([a1, a2, asr]: [f64; 3], eta: f64) -> f64 {
    if a1 + a2 <= 1.0 {
        eta + 4.0 - 3.0 * a1 - 2.0 * a2 - asr
    } else {
        eta + 3.0 - 2.0 * a1 - a2 - asr
    }
}

/// Normalised cut values `(i_cs, i_cd)` for schedule `f`:
/// `i_cs = a1 + f (a_sr - a1)^+` across `{S},{R,D}` and
/// `i_cd = a1 + (1 - f) a2` across `{S,R},{D}`.
pub fn cut_exponents(alpha: &ChannelExponents, sched: Schedule) -> (f64, f64) {
    cuts_raw(alpha.as_array(), sched.f())
}

#[inline]
pub(crate) fn cuts_raw([a1, a2, asr]: [f64; 3], f: f64) -> (f64, f64) {
    let i_cs = a1 + f * (asr - a1).max(0.0);
    let i_cd = a1 + (1.0 - f) * a2;
    (i_cs, i_cd)
}

/// `true` when the smaller cut is at or below `r` (boundary counts).
pub fn in_outage(alpha: &ChannelExponents, sched: Schedule, r: f64) -> bool {
    let (i_cs, i_cd) = cut_exponents(alpha, sched);
    i_cs.min(i_cd) <= r
}

/// Schedule that equalises the two cuts, `a2 / ((a_sr - a1)^+ + a2)`.
///
/// When the denominator vanishes both cuts equal `a1` for every `f`, and `1`
/// is returned.
pub fn f_global(alpha: &ChannelExponents) -> Schedule {
    Schedule::clamped(f_global_raw(alpha.as_array()))
}

#[inline]
pub(crate) fn f_global_raw([a1, a2, asr]: [f64; 3]) -> f64 {
    let gap = (asr - a1).max(0.0);
    let den = gap + a2;
    if den > 0.0 {
        a2 / den
    } else {
        1.0
    }
}

/// Common value of both cuts under [`f_global`].
pub fn equalized_cut(alpha: &ChannelExponents) -> f64 {
    let (i_cs, i_cd) = cut_exponents(alpha, f_global(alpha));
    i_cs.min(i_cd)
}
