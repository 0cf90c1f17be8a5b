//! Numerical construction of radial solution profiles on the unit ball.
//!
//! Two independent methods are provided:
//!
//! * [`shooting`] — integrates the radial ODE system outward from the
//!   centre and adjusts the central values `(u(0), v(0))` by a damped
//!   Newton iteration until both components vanish at `r = 1`.  Works for
//!   regular (bounded) solutions with unit coefficients.
//! * [`rayleigh`] — minimises the weighted Rayleigh quotient of the
//!   equivalent fourth-order problem on a radial grid and recovers the
//!   second component from the minimiser.  Works directly with the
//!   variational characterisation and provides an independent route to
//!   the same profiles.
//!
//! Both produce a [`RadialProfile`] — plain sampled values plus metadata —
//! which serialises to a small CSV format (`r,u,v` header, one row per
//! node) for exchange with the verification tools.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use thiserror::Error;

pub mod ivp;
mod mesh;
pub mod rayleigh;
pub mod shooting;

pub use ivp::{IvpOutcome, StopReason};
pub use rayleigh::{RayleighOptions, RayleighSolution, RayleighState};
pub use shooting::ShootOptions;

/// How a profile was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMethod {
    Shooting,
    Rayleigh,
    /// Loaded from serialized samples; metadata beyond the samples is
    /// unknown.
    External,
}

/// A sampled radial profile `(u(r), v(r))` on `[0, 1]` (or a sub-interval),
/// with the metadata needed to interpret it.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    /// Strictly increasing sample radii.
    pub radii: Vec<f64>,
    /// Values of the first component at the sample radii.
    pub u: Vec<f64>,
    /// Values of the second component at the sample radii.
    pub v: Vec<f64>,
    /// Central values `(u(0), v(0))` (for shooting these are the shooting
    /// parameters `(γ₁, γ₂)`).
    pub central: (f64, f64),
    /// Coefficients `(λ₁, λ₂)` the profile solves the system with.
    pub lambda: (f64, f64),
    pub method: ProfileMethod,
    /// Maximum absolute finite-difference residual of the ODE system over
    /// the interior sample nodes (`NaN` for external profiles).
    pub residual_sup: f64,
    /// `max(|u(r_max)|, |v(r_max)|)` against the Dirichlet condition
    /// (`NaN` for external profiles).
    pub boundary_defect: f64,
}

/// Errors from building or parsing profiles.
#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("expected header 'r,u,v', got {0:?}")]
    Header(String),
    #[error("line {line}: expected three comma-separated numbers, got {text:?}")]
    Row { line: usize, text: String },
    #[error("profile has no sample rows")]
    Empty,
    #[error("sample radii must be strictly increasing and finite (row {line})")]
    NotIncreasing { line: usize },
    #[error("non-finite sample value at row {line}")]
    NonFinite { line: usize },
}

impl RadialProfile {
    /// Builds a profile from bare samples (e.g. parsed from CSV).
    ///
    /// The three vectors must have equal nonzero length and the radii must
    /// be strictly increasing.  The method is marked [`ProfileMethod::External`]
    /// and the metadata that cannot be recovered from samples
    /// (`residual_sup`, `boundary_defect`) is `NaN`; coefficients default
    /// to `(1, 1)` — verification routines take explicit coefficients and
    /// ignore the stored ones.
    pub fn from_samples(radii: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self, ProfileError> {
        if radii.is_empty() {
            return Err(ProfileError::Empty);
        }
        assert_eq!(radii.len(), u.len());
        assert_eq!(radii.len(), v.len());
        for i in 0..radii.len() {
            if !radii[i].is_finite() || !u[i].is_finite() || !v[i].is_finite() {
                return Err(ProfileError::NonFinite { line: i + 2 });
            }
            if i > 0 && radii[i] <= radii[i - 1] {
                return Err(ProfileError::NotIncreasing { line: i + 2 });
            }
        }
        let central = (u[0], v[0]);
        Ok(RadialProfile {
            radii,
            u,
            v,
            central,
            lambda: (1.0, 1.0),
            method: ProfileMethod::External,
            residual_sup: f64::NAN,
            boundary_defect: f64::NAN,
        })
    }

    /// Linear interpolation of `(u, v)` at radius `r`, clamped to the
    /// sampled range.
    pub fn sample(&self, r: f64) -> (f64, f64) {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return (self.u[0], self.v[0]);
        }
        if r >= self.radii[n - 1] {
            return (self.u[n - 1], self.v[n - 1]);
        }
        // First index with radius > r; the predecessor exists because
        // r > radii[0].
        let hi = self.radii.partition_point(|&x| x <= r);
        let lo = hi - 1;
        let t = (r - self.radii[lo]) / (self.radii[hi] - self.radii[lo]);
        (
            self.u[lo] + t * (self.u[hi] - self.u[lo]),
            self.v[lo] + t * (self.v[hi] - self.v[lo]),
        )
    }

    /// Writes the profile as CSV: header `r,u,v`, then one row per node.
    /// Numbers are printed with 17 significant digits so values round-trip
    /// exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,u,v")?;
        for i in 0..self.radii.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.radii[i], self.u[i], self.v[i])?;
        }
        Ok(())
    }

    /// The CSV serialization as a string.
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses a profile from CSV produced by [`RadialProfile::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, ProfileError> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => return Err(ProfileError::Header(String::new())),
        };
        if header.trim() != "r,u,v" {
            return Err(ProfileError::Header(header));
        }
        let mut radii = Vec::new();
        let mut u = Vec::new();
        let mut v = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let mut fields = text.split(',');
            let mut next = || -> Result<f64, ProfileError> {
                fields
                    .next()
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .ok_or(ProfileError::Row { line: idx + 2, text: text.to_owned() })
            };
            radii.push(next()?);
            u.push(next()?);
            v.push(next()?);
        }
        RadialProfile::from_samples(radii, u, v)
    }
}

/// Errors from the numerical solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// The requested parameters are outside the method's domain of
    /// applicability.
    #[error("parameters outside the method's scope: {0}")]
    NotInScope(String),
    /// Shooting requires strictly positive central values.
    #[error("central values must be strictly positive, got ({gamma1}, {gamma2})")]
    NonPositiveCentral { gamma1: f64, gamma2: f64 },
    /// The adaptive integrator could not meet its tolerance with any
    /// representable step.
    #[error("adaptive step size underflow at r = {r}")]
    StepSizeUnderflow { r: f64 },
    /// A solution component left the guarded range — finite-radius
    /// blow-up of the initial value problem.
    #[error("solution component exceeded 1e14 near r = {r}")]
    Blowup { r: f64 },
    /// An iteration (Newton, descent) stalled before meeting its target.
    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),
    /// Grid refinement changed the answer by too much: the coarsest grid
    /// is not resolving the problem.
    #[error(
        "grid refinement did not stabilise: {coarse} on the coarse level vs {fine} refined; \
         increase the grid size"
    )]
    GridTooCoarse { coarse: f64, fine: f64 },
}
