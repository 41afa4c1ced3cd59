//! Front tracking for a scalar conservation law whose flux switches between
//! `f` and `(1 - eps) f` depending on the sign of the time derivative, as in
//! gravity currents with residual trapping.

pub mod characteristics;
pub mod error;
pub mod flux;
pub mod interactions;
pub mod oracle;
pub mod profile;
pub mod riemann;
pub mod roots;
pub mod tracker;

pub use error::{Error, Result};
pub use flux::{FluxParams, QuadraticFlux, Regime, TwoFlux};
pub use profile::{Interval, Profile};
pub use riemann::{Front, FrontKind, RarefactionFan, RiemannSolution};
pub use tracker::{PiecewiseConstantState, Trace};
