//! Flux model: the concave fractional-flow function, its derivatives, the
//! maximizer `u*`, and the two characteristic speed families obtained by
//! scaling with the switch factor `sigma` in `{1, 1 - eps}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for saturation domain checks. States within this distance of
/// `[0, 1]` are clamped, anything further out is rejected.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Which flux curve a discontinuity or characteristic follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `sigma = 1`: the plume drains (`u_t < 0`).
    Upper,
    /// `sigma = 1 - eps`: the plume invades (`u_t > 0`).
    Lower,
    /// Zero-speed discontinuity, `sigma` is immaterial.
    Stationary,
}

impl Regime {
    /// Numeric switch factor, `None` for stationary fronts.
    pub fn sigma(self, epsilon: f64) -> Option<f64> {
        match self {
            Regime::Upper => Some(1.0),
            Regime::Lower => Some(1.0 - epsilon),
            Regime::Stationary => None,
        }
    }
}

/// The faster and slower of the two characteristic speeds at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharSpeeds {
    pub faster: f64,
    pub slower: f64,
}

/// A pair of flux curves `f` and `(1 - eps) f` with `f` satisfying
/// `f(0) = f(1) = 0` and `f'' < 0` on `[0, 1]`.
///
/// Implementations provide the base flux in closed form; the speed families
/// and the switch factor come for free.
pub trait TwoFlux: Send + Sync {
    fn flux(&self, u: f64) -> f64;
    fn dflux(&self, u: f64) -> f64;
    fn d2flux(&self, u: f64) -> f64;
    /// The common maximizer of both curves, where `f'` vanishes.
    fn ustar(&self) -> f64;
    /// Residual trapping fraction.
    fn epsilon(&self) -> f64;

    fn sigma(&self, regime: Regime) -> Option<f64> {
        regime.sigma(self.epsilon())
    }

    fn char_speeds(&self, u: f64) -> CharSpeeds {
        let d = self.dflux(u);
        let scaled = (1.0 - self.epsilon()) * d;
        if d >= 0.0 {
            CharSpeeds {
                faster: d,
                slower: scaled,
            }
        } else {
            CharSpeeds {
                faster: scaled,
                slower: d,
            }
        }
    }

    /// `sup |f'|` over `[0, 1]`; attained at an end point since `f'` is
    /// decreasing.
    fn max_speed(&self) -> f64 {
        self.dflux(0.0).abs().max(self.dflux(1.0).abs())
    }
}

/// The gravity-current flux `u (1 - u) / (u (M - 1) + 1)` with mobility
/// ratio `M >= 1` and trapping fraction `eps` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxParams {
    m: f64,
    epsilon: f64,
}

impl FluxParams {
    pub fn new(mobility_ratio: f64, epsilon: f64) -> Result<Self> {
        if !(mobility_ratio.is_finite() && mobility_ratio >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "mobility ratio M = {mobility_ratio} must satisfy M >= 1"
            )));
        }
        if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
            return Err(Error::InvalidParams(format!(
                "trapping fraction eps = {epsilon} must lie in [0, 1]"
            )));
        }
        Ok(Self {
            m: mobility_ratio,
            epsilon,
        })
    }

    pub fn mobility_ratio(&self) -> f64 {
        self.m
    }
}

impl TwoFlux for FluxParams {
    fn flux(&self, u: f64) -> f64 {
        u * (1.0 - u) / (u * (self.m - 1.0) + 1.0)
    }

    fn dflux(&self, u: f64) -> f64 {
        let a = self.m - 1.0;
        let d = a * u + 1.0;
        (-a * u * u - 2.0 * u + 1.0) / (d * d)
    }

    fn d2flux(&self, u: f64) -> f64 {
        let d = (self.m - 1.0) * u + 1.0;
        -2.0 * self.m / (d * d * d)
    }

    fn ustar(&self) -> f64 {
        1.0 / (1.0 + self.m.sqrt())
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `f(u) = u (1 - u)`, the simplest flux satisfying the concavity
/// hypotheses. Identical to [`FluxParams`] with `M = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFlux {
    epsilon: f64,
}

impl QuadraticFlux {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
            return Err(Error::InvalidParams(format!(
                "trapping fraction eps = {epsilon} must lie in [0, 1]"
            )));
        }
        Ok(Self { epsilon })
    }
}

impl TwoFlux for QuadraticFlux {
    fn flux(&self, u: f64) -> f64 {
        u * (1.0 - u)
    }
    fn dflux(&self, u: f64) -> f64 {
        1.0 - 2.0 * u
    }
    fn d2flux(&self, _u: f64) -> f64 {
        -2.0
    }
    fn ustar(&self) -> f64 {
        0.5
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Validates a saturation, clamping values within [`DOMAIN_TOL`] of the
/// unit interval.
pub fn check_state(u: f64) -> Result<f64> {
    if !u.is_finite() || u < -DOMAIN_TOL || u > 1.0 + DOMAIN_TOL {
        return Err(Error::Domain(u));
    }
    Ok(u.clamp(0.0, 1.0))
}

pub fn f<P: TwoFlux + ?Sized>(params: &P, u: f64) -> Result<f64> {
    Ok(params.flux(check_state(u)?))
}

pub fn df<P: TwoFlux + ?Sized>(params: &P, u: f64) -> Result<f64> {
    Ok(params.dflux(check_state(u)?))
}

pub fn ustar<P: TwoFlux + ?Sized>(params: &P) -> f64 {
    params.ustar()
}

pub fn char_speeds<P: TwoFlux + ?Sized>(params: &P, u: f64) -> Result<CharSpeeds> {
    Ok(params.char_speeds(check_state(u)?))
}
