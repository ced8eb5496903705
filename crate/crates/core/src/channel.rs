//! Finite-SNR channel model: one Rayleigh realisation, its parallel-channel
//! decomposition and the cut-set mutual informations in bits.

use num_complex::Complex64;

use crate::math::{exp, ln, ln_1p, LN_2};
use crate::{Error, Result};

/// One quasi-static realisation of every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// Source to relay.
    pub h_sr: Complex64,
    /// Source to the two destination antennas.
    pub h_s: [Complex64; 2],
    /// Relay to the two destination antennas.
    pub h_r: [Complex64; 2],
}

/// Squared norms of `h_s` and of the components of `h_r` parallel and
/// perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub h_s_sq: f64,
    pub perp_sq: f64,
    pub par_sq: f64,
}

#[inline]
fn norm_sq(v: &[Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// `h_s^H h_r`.
#[inline]
fn inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Splits `h_r` against `h_s`. A zero `h_s` leaves all of `h_r` perpendicular.
pub fn project(draw: &ChannelDraw) -> Projection {
    let h_s_sq = norm_sq(&draw.h_s);
    if h_s_sq == 0.0 {
        return Projection {
            h_s_sq,
            perp_sq: norm_sq(&draw.h_r),
            par_sq: 0.0,
        };
    }
    let coeff = inner(&draw.h_s, &draw.h_r) / h_s_sq;
    let par = [draw.h_s[0] * coeff, draw.h_s[1] * coeff];
    let perp = [draw.h_r[0] - par[0], draw.h_r[1] - par[1]];
    Projection {
        h_s_sq,
        perp_sq: norm_sq(&perp),
        par_sq: norm_sq(&par),
    }
}

/// Gains `(g1^2, g2^2)` of the two parallel channels an MMSE-SIC receiver
/// sees on `H = [h_s h_r]`:
/// `g1^2 = |h_s|^2` and `g2^2 = |h_r_perp|^2 + |h_r_par|^2 / (1 + rho |h_s|^2)`,
/// so that `log det(I + rho H H^H) = log(1 + rho g1^2) + log(1 + rho g2^2)`.
pub fn sic_decompose(draw: &ChannelDraw, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain("rho", rho, "rho > 0"));
    }
    Ok(sic_gains(&project(draw), rho))
}

#[inline]
pub(crate) fn sic_gains(p: &Projection, rho: f64) -> (f64, f64) {
    (p.h_s_sq, p.perp_sq + p.par_sq / (1.0 + rho * p.h_s_sq))
}

/// Which expression is used for the `{S},{R,D}` cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutForm {
    /// `log(1 + rho^eta |h_sr|^2 + rho |h_s|^2)` during the listen phase.
    #[default]
    Exact,
    /// `max(log(1 + rho^eta |h_sr|^2), log(1 + rho |h_s|^2))`, within one bit
    /// of the exact form.
    MaxApprox,
}

/// `ln(1 + e^a + e^b)` without overflow for large `a` or `b`.
fn ln_1p_exp_sum(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m <= 0.0 {
        ln_1p(exp(a) + exp(b))
    } else {
        m + ln(exp(-m) + exp(a - m) + exp(b - m))
    }
}

/// `ln(1 + e^a)`.
fn ln_1p_exp(a: f64) -> f64 {
    if a <= 0.0 {
        ln_1p(exp(a))
    } else {
        a + ln_1p(exp(-a))
    }
}

/// Cut-set mutual informations `(i_cs, i_cd)` in bits per channel use for a
/// relay listening a fraction `f` of the time.
pub fn cut_mutual_info(draw: &ChannelDraw, rho: f64, eta: f64, f: f64) -> Result<(f64, f64)> {
    cut_mutual_info_with(draw, rho, eta, f, CutForm::Exact)
}

pub fn cut_mutual_info_with(
    draw: &ChannelDraw,
    rho: f64,
    eta: f64,
    f: f64,
    form: CutForm,
) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain("rho", rho, "rho > 0"));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::domain("f", f, "0 <= f <= 1"));
    }
    let logs = LinkLogs::new(draw, ln(rho), eta, form);
    Ok(logs.cuts_bits(f))
}

/// Per-realisation log-capacities (natural log) that the cut expressions are
/// linear combinations of.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinkLogs {
    /// Listen-phase capacity of the broadcast cut.
    pub listen_cs: f64,
    /// `ln(1 + rho g1^2)`.
    pub direct: f64,
    /// `ln(1 + rho g2^2)`.
    pub second: f64,
    /// `ln(1 + rho^eta |h_sr|^2)`.
    pub sr: f64,
}

impl LinkLogs {
    pub(crate) fn new(draw: &ChannelDraw, ln_rho: f64, eta: f64, form: CutForm) -> Self {
        let proj = project(draw);
        let rho = exp(ln_rho);
        let (g1, g2) = sic_gains(&proj, rho);
        let a_sr = eta * ln_rho + ln(draw.h_sr.norm_sqr());
        let a_s = ln_rho + ln(g1);
        let direct = ln_1p(rho * g1);
        let sr = ln_1p_exp(a_sr);
        let listen_cs = match form {
            CutForm::Exact => ln_1p_exp_sum(a_sr, a_s),
            CutForm::MaxApprox => sr.max(direct),
        };
        LinkLogs {
            listen_cs,
            direct,
            second: ln_1p(rho * g2),
            sr,
        }
    }

    #[inline]
    pub(crate) fn cuts_nats(&self, f: f64) -> (f64, f64) {
        let i_cs = f * self.listen_cs + (1.0 - f) * self.direct;
        let i_cd = self.direct + (1.0 - f) * self.second;
        (i_cs, i_cd)
    }

    #[inline]
    pub(crate) fn cuts_bits(&self, f: f64) -> (f64, f64) {
        let (cs, cd) = self.cuts_nats(f);
        (cs / LN_2, cd / LN_2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::log2_1p;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn draw(h_sr: Complex64, h_s: [Complex64; 2], h_r: [Complex64; 2]) -> ChannelDraw {
        ChannelDraw { h_sr, h_s, h_r }
    }

    #[test]
    fn orthogonal_relay_keeps_full_gain() {
        let d = draw(c(1.0, 0.0), [c(1.0, 0.5), c(0.0, 0.0)], [c(0.0, 0.0), c(0.3, -0.7)]);
        let (g1, g2) = sic_decompose(&d, 100.0).unwrap();
        assert!((g1 - 1.25).abs() < 1e-15);
        assert!((g2 - 0.58).abs() < 1e-15);
    }

    #[test]
    fn aligned_columns_lose_the_second_stream() {
        let h_s = [c(0.8, -0.1), c(0.2, 0.4)];
        let k = c(0.5, 1.5);
        let d = draw(c(1.0, 0.0), h_s, [h_s[0] * k, h_s[1] * k]);
        let mut prev = f64::INFINITY;
        for rho in [1e2, 1e4, 1e6, 1e8] {
            let (_, g2) = sic_decompose(&d, rho).unwrap();
            assert!(g2 < prev);
            prev = g2;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn zero_source_vector_is_handled() {
        let d = draw(c(1.0, 0.0), [c(0.0, 0.0); 2], [c(0.6, 0.0), c(0.0, 0.8)]);
        let (g1, g2) = sic_decompose(&d, 10.0).unwrap();
        assert_eq!(g1, 0.0);
        assert!((g2 - 1.0).abs() < 1e-15);
        assert!(sic_decompose(&d, 0.0).is_err());
    }

    #[test]
    fn cut_information_example() {
        let d = draw(c(1.0, 0.0), [c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]);
        let (cs, cd) = cut_mutual_info(&d, 100.0, 2.0, 1.0 / 3.0).unwrap();
        let l101 = libm::log2(101.0);
        let exp_cs = libm::log2(10101.0) / 3.0 + 2.0 * l101 / 3.0;
        let exp_cd = l101 + 2.0 * l101 / 3.0;
        assert!((cs - exp_cs).abs() < 1e-12, "{cs} vs {exp_cs}");
        assert!((cd - exp_cd).abs() < 1e-12, "{cd} vs {exp_cd}");
    }

    #[test]
    fn degenerate_schedules() {
        let d = draw(c(0.4, 0.9), [c(0.3, -0.2), c(1.1, 0.1)], [c(-0.5, 0.2), c(0.7, 0.7)]);
        let rho = 50.0;
        let (g1, g2) = sic_decompose(&d, rho).unwrap();
        let (cs, cd) = cut_mutual_info(&d, rho, 1.5, 0.0).unwrap();
        assert!((cs - log2_1p(rho * g1)).abs() < 1e-12);
        assert!((cd - log2_1p(rho * g1) - log2_1p(rho * g2)).abs() < 1e-12);
        let (_, cd) = cut_mutual_info(&d, rho, 1.5, 1.0).unwrap();
        assert!((cd - log2_1p(rho * g1)).abs() < 1e-12);
    }

    #[test]
    fn huge_relay_snr_stays_finite() {
        let d = draw(c(1.0, 0.0), [c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]);
        let rho = 1e4;
        let (cs, _) = cut_mutual_info(&d, rho, 200.0, 1.0).unwrap();
        // log2(rho^200) = 200 log2(1e4)
        assert!((cs - 200.0 * libm::log2(rho)).abs() < 1e-9);
    }

    #[test]
    fn max_approximation_is_within_one_bit() {
        let d = draw(c(0.2, 0.1), [c(0.5, 0.5), c(0.1, 0.0)], [c(0.3, 0.3), c(0.9, 0.0)]);
        for rho in [1.0, 10.0, 1e3] {
            for f in [0.2, 0.7, 1.0] {
                let (a, _) = cut_mutual_info_with(&d, rho, 1.3, f, CutForm::Exact).unwrap();
                let (b, _) = cut_mutual_info_with(&d, rho, 1.3, f, CutForm::MaxApprox).unwrap();
                assert!(a >= b && a - b <= 1.0 + 1e-12);
            }
        }
    }
}
