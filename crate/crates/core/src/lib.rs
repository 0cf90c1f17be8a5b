//! Analysis toolkit for the weighted Henon–Lane–Emden system of radial
//! inequalities on the punctured unit ball of `R^n`:
//!
//! ```text
//!     -Δu >= λ₁ |x|^a v^(p-1)
//!     -Δv >= λ₂ |x|^b u^(q-1)        n >= 3,  p > 1,  q > 1.
//! ```
//!
//! The crate is organised around the exponent pair `(p, q)` and the weight
//! pair `(a, b)`:
//!
//! * [`regions`] — classification of `(a, b)` against the admissible region
//!   `E` (weights for which positive singular solutions exist), its subsets
//!   `E⁺` and `Q`, and the scaling regime of `(p, q)`.
//! * [`power`] — explicit power-type solutions `u = c₁ r^α`, `v = c₂ r^β`,
//!   the Kelvin transform acting on weights and solutions, and the
//!   one-parameter family that appears in the homogeneous regime.
//! * [`solver`] — numerical construction of radial profiles on the unit
//!   ball: a shooting method for the regular Dirichlet problem and a
//!   Rayleigh-quotient minimisation for the weighted fourth-order
//!   reformulation.
//! * [`verify`] — independent checks: the Green function of the ball and
//!   its positivity properties, local mass growth of computed or explicit
//!   solutions, and finite-difference residuals of radial profiles.
//!
//! All floating-point classification is three-valued (inside / boundary /
//! outside) with an explicit tolerance so that callers can distinguish a
//! robust verdict from one that sits on a defining hypersurface.

pub mod power;
pub mod regions;
pub mod solver;
pub mod verify;

pub use power::{KelvinMap, PowerError, PowerFamilyH, PowerSolution, QVertices};
pub use regions::{DomainError, ExponentPair, Regime, RegionVerdict, TriState, WeightPair};
pub use solver::{ProfileMethod, RadialProfile, RayleighSolution, SolveError};
pub use verify::{GreenEval, MassReport, ResidualStats, VerifyError};

/// Default tolerance for the three-valued set-membership tests: a margin
/// with absolute value at most this is reported as `Boundary`.
pub const DEFAULT_BOUNDARY_EPS: f64 = 1e-12;
