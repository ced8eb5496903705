use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value lies outside the range where the requested quantity is defined.
    #[error("{name} = {value} is outside its domain: {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    /// The outage region was empty. The origin of exponent space is always in
    /// outage for `r >= 0`, so this indicates a solver bug.
    #[error("outage region is empty at r = {r}, f = {f}")]
    EmptyOutageRegion { r: f64, f: f64 },
    #[error("slope fit needs at least 3 points with nonzero outage, got {usable}")]
    InsufficientData { usable: usize },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, bound: &'static str) -> Self {
        Error::Domain { name, value, bound }
    }
}
