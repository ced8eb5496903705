//! Domain types shared by every layer of the crate.

use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Parameters of one network instance.
///
/// `eta` is the proximity gain: the source-relay link has average SNR
/// `rho^eta` when the direct and relay-destination links have SNR `rho`.
/// Any real `eta >= 1` is accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    eta: f64,
}

impl NetworkParams {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 1.0 {
            return Err(Error::domain("eta", eta, "proximity gain must satisfy eta >= 1"));
        }
        Ok(NetworkParams { eta })
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// A point `(alpha1, alpha2, alpha_sr)` of exponent space.
///
/// `alpha1` and `alpha2` are the SNR exponents of the two parallel streams
/// seen by the destination after successive interference cancellation,
/// `alpha_sr` the exponent of the source-relay link. The support is the box
/// `[0, 1] x [0, 1] x [0, eta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelExponents {
    pub(crate) alpha1: f64,
    pub(crate) alpha2: f64,
    pub(crate) alpha_sr: f64,
}

impl ChannelExponents {
    pub fn new(alpha1: f64, alpha2: f64, alpha_sr: f64, params: &NetworkParams) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha1) {
            return Err(Error::domain("alpha1", alpha1, "0 <= alpha1 <= 1"));
        }
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::domain("alpha2", alpha2, "0 <= alpha2 <= 1"));
        }
        if !(0.0..=params.eta()).contains(&alpha_sr) {
            return Err(Error::domain("alpha_sr", alpha_sr, "0 <= alpha_sr <= eta"));
        }
        Ok(ChannelExponents {
            alpha1,
            alpha2,
            alpha_sr,
        })
    }

    /// Builds a point after clamping each coordinate into the support box.
    /// Used for solver output, where vertices can overshoot a face by an ulp.
    pub(crate) fn clamped(alpha1: f64, alpha2: f64, alpha_sr: f64, eta: f64) -> Self {
        ChannelExponents {
            alpha1: alpha1.clamp(0.0, 1.0),
            alpha2: alpha2.clamp(0.0, 1.0),
            alpha_sr: alpha_sr.clamp(0.0, eta),
        }
    }

    #[inline]
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    #[inline]
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    #[inline]
    pub fn alpha_sr(&self) -> f64 {
        self.alpha_sr
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.alpha_sr]
    }
}

/// Listen-transmit schedule: the relay listens for a fraction `f` of the
/// block and transmits for the remaining `1 - f`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Schedule {
    f: f64,
}

impl Schedule {
    pub fn new(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::domain("f", f, "0 <= f <= 1"));
        }
        Ok(Schedule { f })
    }

    pub(crate) fn clamped(f: f64) -> Self {
        Schedule { f: f.clamp(0.0, 1.0) }
    }

    #[inline]
    pub fn f(&self) -> f64 {
        self.f
    }
}

/// Relay strategy, plus the 2x2 MIMO reference curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    /// Schedule chosen with knowledge of every channel realisation.
    Global,
    /// Schedule chosen from the source-relay realisation only.
    Local,
    /// Schedule fixed from channel statistics.
    Blind,
    /// Co-located 2x2 MIMO, the `eta -> infinity` limit.
    Mimo2x2,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Global,
        Strategy::Local,
        Strategy::Blind,
        Strategy::Mimo2x2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Global => "global",
            Strategy::Local => "local",
            Strategy::Blind => "blind",
            Strategy::Mimo2x2 => "mimo2x2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Strategy::Global),
            "local" => Ok(Strategy::Local),
            "blind" => Ok(Strategy::Blind),
            "mimo2x2" => Ok(Strategy::Mimo2x2),
            _ => Err(Error::Config("strategy must be one of global, local, blind, mimo2x2")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_below_one_is_rejected() {
        assert!(NetworkParams::new(0.5).is_err());
        assert!(NetworkParams::new(f64::NAN).is_err());
        assert!(NetworkParams::new(f64::INFINITY).is_err());
        assert_eq!(NetworkParams::new(1.5).unwrap().eta(), 1.5);
    }

    #[test]
    fn exponent_box_is_enforced() {
        let p = NetworkParams::new(2.0).unwrap();
        assert!(ChannelExponents::new(1.0, 1.0, 2.0, &p).is_ok());
        assert!(ChannelExponents::new(1.1, 0.0, 0.0, &p).is_err());
        assert!(ChannelExponents::new(0.0, -0.1, 0.0, &p).is_err());
        match ChannelExponents::new(0.0, 0.0, 3.0, &p) {
            Err(Error::Domain { name, .. }) => assert_eq!(name, "alpha_sr"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schedule_range() {
        assert!(Schedule::new(0.0).is_ok());
        assert!(Schedule::new(1.0).is_ok());
        assert!(Schedule::new(1.0 + 1e-9).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("mimo".parse::<Strategy>().is_err());
    }
}
