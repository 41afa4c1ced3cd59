use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("left and right states coincide ({0}); there is no wave")]
    NoWave(f64),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("similarity coordinate {y} outside fan range [{lo}, {hi}]")]
    OutsideFan { y: f64, lo: f64, hi: f64 },

    #[error("middle states of colliding fronts differ: {left} vs {right}")]
    InconsistentMiddle { left: f64, right: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("query time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("gradient blow-up (shock formation) at t = {0}")]
    ShockFormation(f64),

    #[error("CFL number {0} must lie in (0, 1]")]
    Cfl(f64),

    #[error("non-finite value produced at t = {0}")]
    NonFinite(f64),
}
