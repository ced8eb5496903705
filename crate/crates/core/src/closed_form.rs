//! Closed-form tradeoff curves.

use crate::{Error, NetworkParams, Result, EXPONENT_TOL};

/// Largest multiplexing gain with positive diversity, `2 - 1/eta`.
pub fn r_star(params: &NetworkParams) -> f64 {
    2.0 - 1.0 / params.eta()
}

/// Optimal diversity exponent `d(r)` under globally optimal scheduling.
///
/// Three branches: `min(eta + 2, 4) - 3r` for `r <= 1`, then
/// `(2 eta - eta r - 1) / (eta - r)` when `eta >= 2` or `eta - 1/(2 - r)`
/// when `1 <= eta <= 2`. Defined on `[0, r_star]`.
pub fn d_closed(r: f64, params: &NetworkParams) -> Result<f64> {
    let eta = params.eta();
    let rs = r_star(params);
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("r", r, "r >= 0"));
    }
    if r > rs + EXPONENT_TOL {
        return Err(Error::domain("r", r, "r <= 2 - 1/eta"));
    }
    if r >= rs {
        return Ok(0.0);
    }
    let d = if r <= 1.0 {
        low_rate(r, eta)
    } else if eta >= 2.0 {
        (2.0 * eta - eta * r - 1.0) / (eta - r)
    } else {
        eta - 1.0 / (2.0 - r)
    };
    Ok(d.max(0.0))
}

/// DMT of the co-located 2x2 MIMO channel: the piecewise-linear curve through
/// the corner points `(0, 4)`, `(1, 1)` and `(2, 0)`.
pub fn d_mimo_2x2(r: f64) -> Result<f64> {
    if r.is_nan() || !(0.0..=2.0).contains(&r) {
        return Err(Error::domain("r", r, "0 <= r <= 2"));
    }
    Ok(if r <= 1.0 { 4.0 - 3.0 * r } else { 2.0 - r })
}

/// Blind-schedule DMT in the low-rate region `r <= 1`, where the fixed
/// schedule `f = 1/3` is optimal. No closed form is available above `r = 1`;
/// use [`crate::optimize::d_blind_numeric`] there.
pub fn d_blind_closed(r: f64, params: &NetworkParams) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("r", r, "r >= 0"));
    }
    if r > 1.0 {
        return Err(Error::domain(
            "r",
            r,
            "r <= 1 (no closed form above; use the numerical optimizer)",
        ));
    }
    Ok(low_rate(r, params.eta()))
}

#[inline]
fn low_rate(r: f64, eta: f64) -> f64 {
    (eta + 2.0).min(4.0) - 3.0 * r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(eta: f64) -> NetworkParams {
        NetworkParams::new(eta).unwrap()
    }

    #[test]
    fn d_closed_examples() {
        assert_eq!(d_closed(1.0, &p(1.0)).unwrap(), 0.0);
        assert_eq!(d_closed(1.5, &p(2.0)).unwrap(), 0.0);
        assert!((d_closed(0.5, &p(2.0)).unwrap() - 2.5).abs() < 1e-12);
        assert!((d_closed(1.25, &p(2.0)).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn d_closed_rejects_outside_support() {
        // r* = 4/3 at eta = 1.5, so r = 1.5 would give a negative value.
        match d_closed(1.5, &p(1.5)) {
            Err(Error::Domain { name, bound, .. }) => {
                assert_eq!(name, "r");
                assert!(bound.contains("2 - 1/eta"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(d_closed(-0.1, &p(2.0)).is_err());
    }

    #[test]
    fn r_star_examples() {
        assert_eq!(r_star(&p(1.0)), 1.0);
        assert_eq!(r_star(&p(2.0)), 1.5);
        assert!((r_star(&p(1e9)) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn mimo_corners() {
        assert_eq!(d_mimo_2x2(0.0).unwrap(), 4.0);
        assert_eq!(d_mimo_2x2(1.0).unwrap(), 1.0);
        assert_eq!(d_mimo_2x2(0.5).unwrap(), 2.5);
        assert_eq!(d_mimo_2x2(2.0).unwrap(), 0.0);
        assert!(d_mimo_2x2(2.01).is_err());
        assert!(d_mimo_2x2(-0.01).is_err());
    }

    #[test]
    fn blind_closed_examples() {
        assert!((d_blind_closed(0.5, &p(1.0)).unwrap() - 1.5).abs() < 1e-12);
        assert!((d_blind_closed(1.0, &p(3.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(d_blind_closed(0.0, &p(2.0)).unwrap(), 4.0);
        assert!(d_blind_closed(1.01, &p(2.0)).is_err());
    }

    #[test]
    fn branches_meet_at_rate_one_and_vanish_at_r_star() {
        for i in 0..=100 {
            let eta = 1.0 + 99.0 * i as f64 / 100.0;
            let params = p(eta);
            let left = low_rate(1.0, eta);
            let right = if eta >= 2.0 {
                (2.0 * eta - eta - 1.0) / (eta - 1.0)
            } else {
                eta - 1.0
            };
            assert!((left - right).abs() < 1e-12, "eta={eta}");
            assert!(d_closed(r_star(&params), &params).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_in_rate_and_eta_and_below_mimo() {
        let etas: alloc::vec::Vec<f64> = (0..100).map(|i| 1.0 + 0.1 * i as f64).collect();
        for (k, &eta) in etas.iter().enumerate() {
            let params = p(eta);
            let rs = r_star(&params);
            let mut prev = f64::INFINITY;
            for j in 0..100 {
                let r = rs * j as f64 / 99.0;
                let d = d_closed(r, &params).unwrap();
                assert!(d >= 0.0);
                assert!(d <= prev + 1e-12, "not non-increasing at eta={eta} r={r}");
                assert!(d <= d_mimo_2x2(r).unwrap() + 1e-12);
                if k > 0 {
                    let lower = p(etas[k - 1]);
                    if r <= r_star(&lower) {
                        assert!(d_closed(r, &lower).unwrap() <= d + 1e-12);
                    }
                }
                prev = d;
            }
        }
    }

    #[test]
    fn large_eta_approaches_mimo() {
        let params = p(100.0);
        let rs = r_star(&params);
        let mut gap: f64 = 0.0;
        for j in 0..=1000 {
            let r = rs * j as f64 / 1000.0;
            gap = gap.max((d_closed(r, &params).unwrap() - d_mimo_2x2(r).unwrap()).abs());
        }
        assert!(gap <= 0.02, "gap {gap}");
    }
}
