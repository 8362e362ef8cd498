use thiserror::Error;

/// Errors raised by the dispersion-force routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("material model `{0}` has no permittivity/permeability; branch on the ideal marker first")]
    UnsupportedModel(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate point: frequency and wavenumber are both zero")]
    DegeneratePoint,

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("coincident points: the bulk Green tensor is excluded at zero separation")]
    Coincidence,

    #[error("unphysical reflection denominator D = {0}")]
    UnphysicalDenominator(f64),

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {nodes} evaluations")]
    Convergence { value: f64, error: f64, nodes: usize },

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:e})")]
    Iteration { iterations: usize, residual: f64 },

    #[error("no sign change of the retarded potential found for eps(0) = {0}")]
    NoCrossing(f64),

    #[error("the fit window mixes attractive and repulsive values")]
    MixedRegime,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
