//! Explicit power-type solutions and the Kelvin transform.
//!
//! Away from the homogeneous regime the ansatz `u = r^α`, `v = r^β` turns
//! the system
//!
//! ```text
//!     -Δu = λ₁ r^a v^(p-1),      -Δv = λ₂ r^b u^(q-1)
//! ```
//!
//! into the linear compatibility conditions
//!
//! ```text
//!     α - 2 = a + β (p - 1),      β - 2 = b + α (q - 1),
//! ```
//!
//! whose determinant is `θ = 1 - (p-1)(q-1)`, plus the coefficient
//! identities `λ₁ = -α (α + n - 2)`, `λ₂ = -β (β + n - 2)` coming from
//! `-Δ r^s = -s (s + n - 2) r^(s-2)`.  Both coefficients are positive —
//! i.e. the pair is a genuine positive solution of the system — exactly
//! when `α, β ∈ (2-n, 0)`, which happens exactly for `(a, b)` in the
//! region `Q` computed here.
//!
//! In the homogeneous regime (`q = p'`) the linear system degenerates: it
//! is solvable only for weights on the line `a/p + b/p' + 2 = 0`, and then
//! every `α` on a segment works, giving the one-parameter family
//! [`PowerFamilyH`].
//!
//! The Kelvin transform `u(x) ↦ |x|^(2-n) u(x/|x|²)` maps solutions for
//! the weight pair `(a, b)` to solutions for the reflected pair
//! `κ(a, b) = (p(n-2) - 2n - a, q(n-2) - 2n - b)`, turning a power
//! exponent `α` into `2 - n - α` and fixing the coefficients `λ`.

use serde::Serialize;
use thiserror::Error;

use crate::regions::{
    self, tri_state, ExponentPair, Regime, TriState, WeightPair,
};

/// Errors from the power-solution routines.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PowerError {
    /// The exponent pair satisfies `1/p + 1/q = 1`: the compatibility
    /// system for a single power solution is singular.
    #[error(
        "homogeneous exponent pair (1/p + 1/q = 1): power exponents are not \
         determined by the weights; use the one-parameter family instead"
    )]
    HomogeneousRegime,
    /// A homogeneous-only operation was invoked off the homogeneous regime.
    #[error("exponent pair is not homogeneous (1/p + 1/q != 1)")]
    NotHomogeneous,
    /// Rescaling to unit coefficients needs strictly positive `λ`.
    #[error("rescaling to unit coefficients requires λ > 0, got {0}")]
    NonPositiveLambda(f64),
    /// The rescaling constants exist but overflow or underflow `f64`;
    /// happens close to the homogeneous regime, where `1/θ` amplifies the
    /// logarithms of the coefficients.
    #[error(
        "the unit-coefficient rescaling is out of range: ln c₁ = {0:.3e}, \
         ln c₂ = {1:.3e} (θ near 0 amplifies the coefficients)"
    )]
    ScalingOutOfRange(f64, f64),
}

/// A power-type solution `u = r^α`, `v = r^β` with its coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSolution {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Whether both coefficients are strictly positive, i.e. the pair is a
    /// positive solution of the system with positive right-hand sides.
    pub positive: bool,
}

/// The one-parameter family of power solutions in the homogeneous regime.
///
/// For `q = p'` and a weight pair on the compatibility line
/// `a/p + b/p' + 2 = 0`, every exponent `α` yields a solution with
/// `β = slope·α + offset`; the subfamily with positive coefficients is
/// `α ∈ alpha_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFamilyH {
    /// Whether the weight pair lies on the compatibility line.
    pub on_line: bool,
    /// `dβ/dα = q - 1 = 1/(p - 1)`.
    pub slope: f64,
    /// `β` at `α = 0`, namely `b + 2`.
    pub offset: f64,
    /// Open interval of `α` with `λ₁, λ₂ > 0`; `None` when the pair is off
    /// the line or the interval is empty.
    pub alpha_range: Option<(f64, f64)>,
}

impl PowerFamilyH {
    /// The `β` exponent paired with a given `α`.
    pub fn beta_of(&self, alpha: f64) -> f64 {
        self.slope * alpha + self.offset
    }

    /// The coefficients `(λ₁, λ₂)` of the family member at `α`.
    pub fn lambdas_of(&self, e: ExponentPair, alpha: f64) -> (f64, f64) {
        power_lambdas(e, alpha, self.beta_of(alpha))
    }
}

/// The Kelvin reflection of a weight pair together with the fixed point of
/// the reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KelvinMap {
    pub image: WeightPair,
    pub fixed_point: WeightPair,
}

/// The four corner points of `Q` (anticoercive and coercive regimes).
///
/// `x` and `x_prime` lie on the bounds `a = -n` and `b = -n`; `v` is the
/// common point `(-2, -2)` of the two lines and `v_prime` its Kelvin
/// reflection, where the two Serrin-type conditions intersect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QVertices {
    pub x: WeightPair,
    pub x_prime: WeightPair,
    pub v: WeightPair,
    pub v_prime: WeightPair,
}

/// Solves the compatibility system for the power exponents `(α, β)`.
///
/// Fails in the homogeneous regime, where the system is singular.
pub fn power_exponents(e: ExponentPair, w: WeightPair) -> Result<(f64, f64), PowerError> {
    if e.regime() == Regime::Homogeneous {
        return Err(PowerError::HomogeneousRegime);
    }
    let d = (e.p() - 1.0) * (e.q() - 1.0) - 1.0; // = -θ
    let alpha = -e.p() * regions::line_margin_p(e, w) / d;
    let beta = -e.q() * regions::line_margin_q(e, w) / d;
    Ok((alpha, beta))
}

/// Coefficient of a single radial power: `-Δ r^s = λ r^(s-2)` with
/// `λ = -s (s + n - 2)`.
pub fn power_lambda(e: ExponentPair, exponent: f64) -> f64 {
    -exponent * (exponent + e.nf() - 2.0)
}

/// Both coefficients of the pair `(r^α, r^β)`.
pub fn power_lambdas(e: ExponentPair, alpha: f64, beta: f64) -> (f64, f64) {
    (power_lambda(e, alpha), power_lambda(e, beta))
}

/// Residuals of the two compatibility conditions for given exponents:
/// `(α - 2 - a - β(p-1), β - 2 - b - α(q-1))`.  Both vanish exactly when
/// `(r^α, r^β)` matches the weights `(a, b)`.
pub fn compatibility_residuals(
    e: ExponentPair,
    w: WeightPair,
    alpha: f64,
    beta: f64,
) -> (f64, f64) {
    (
        alpha - 2.0 - w.a - beta * (e.p() - 1.0),
        beta - 2.0 - w.b - alpha * (e.q() - 1.0),
    )
}

/// The full power-type solution attached to a weight pair.
pub fn power_solution(e: ExponentPair, w: WeightPair) -> Result<PowerSolution, PowerError> {
    let (alpha, beta) = power_exponents(e, w)?;
    let (lambda1, lambda2) = power_lambdas(e, alpha, beta);
    Ok(PowerSolution {
        alpha,
        beta,
        lambda1,
        lambda2,
        positive: lambda1 > 0.0 && lambda2 > 0.0,
    })
}

/// The one-parameter family of power solutions in the homogeneous regime.
pub fn power_family_h(e: ExponentPair, w: WeightPair) -> Result<PowerFamilyH, PowerError> {
    if e.regime() != Regime::Homogeneous {
        return Err(PowerError::NotHomogeneous);
    }
    let slope = e.q() - 1.0;
    let offset = w.b + 2.0;
    let on_line = regions::line_margin_p(e, w).abs() <= crate::DEFAULT_BOUNDARY_EPS;
    let alpha_range = if on_line {
        // λ₁ > 0 needs α ∈ (2-n, 0); λ₂ > 0 needs β ∈ (2-n, 0), i.e.
        // α ∈ ((-n-b)(p-1), -(b+2)(p-1)) since β is increasing in α.
        let lo = (2.0 - e.nf()).max((-e.nf() - w.b) * (e.p() - 1.0));
        let hi = 0.0f64.min(-(w.b + 2.0) * (e.p() - 1.0));
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    } else {
        None
    };
    Ok(PowerFamilyH { on_line, slope, offset, alpha_range })
}

/// Margins of the defining inequalities of `Q`, positive inside.
pub(crate) fn q_margins(e: ExponentPair, w: WeightPair) -> Vec<(&'static str, f64)> {
    let l1 = regions::line_margin_p(e, w);
    let l2 = regions::line_margin_q(e, w);
    let s1 = regions::serrin_margin_p(e, w);
    let s2 = regions::serrin_margin_q(e, w);
    match e.regime() {
        Regime::Anticoercive => vec![
            ("Q_line_p", l1),
            ("Q_line_q", l2),
            ("Q_serrin_p", -s1),
            ("Q_serrin_q", -s2),
        ],
        Regime::Homogeneous => vec![("Q_segment", l1)],
        Regime::Coercive => vec![
            ("Q_line_p", -l1),
            ("Q_line_q", -l2),
            ("Q_serrin_p", s1),
            ("Q_serrin_q", s2),
        ],
    }
}

/// Membership of `(a, b)` in `Q`, the region of positive power solutions.
///
/// In the anticoercive regime `Q = {ℓ₁ > 0, ℓ₂ > 0, S₁ < 0, S₂ < 0}` and
/// in the coercive regime `Q = {ℓ₁ < 0, ℓ₂ < 0, S₁ > 0, S₂ > 0}`, where
/// `ℓᵢ` are the line margins and `Sᵢ` the Serrin-type margins; both are
/// equivalent to `α, β ∈ (2-n, 0)` for the attached power exponents.  In
/// the homogeneous regime `Q` is the open sub-segment of the compatibility
/// line cut out by `a > -n`, `b > -n`: points with `|ℓ| <= eps` count as
/// on the line, and only the endpoint margins produce `Boundary`.
pub fn membership_q(e: ExponentPair, w: WeightPair, eps: f64) -> TriState {
    match e.regime_with(eps) {
        Regime::Homogeneous => {
            let l = regions::line_margin_p(e, w);
            let an = w.a + e.nf();
            let bn = w.b + e.nf();
            if l.abs() > eps {
                TriState::Outside
            } else if an.abs() <= eps || bn.abs() <= eps {
                TriState::Boundary
            } else if an > 0.0 && bn > 0.0 {
                TriState::Inside
            } else {
                TriState::Outside
            }
        }
        _ => {
            let margins: Vec<f64> = q_margins(e, w).into_iter().map(|(_, v)| v).collect();
            tri_state(&margins, eps)
        }
    }
}

/// The Kelvin reflection on weights:
/// `κ(a, b) = (p(n-2) - 2n - a, q(n-2) - 2n - b)`.
pub fn kelvin_kappa(e: ExponentPair, w: WeightPair) -> WeightPair {
    let n = e.nf();
    WeightPair {
        a: e.p() * (n - 2.0) - 2.0 * n - w.a,
        b: e.q() * (n - 2.0) - 2.0 * n - w.b,
    }
}

/// The fixed point of the Kelvin reflection:
/// `F = (p(n-2)/2 - n, q(n-2)/2 - n)`.
pub fn kelvin_fixed_point(e: ExponentPair) -> WeightPair {
    let n = e.nf();
    WeightPair {
        a: e.p() * (n - 2.0) / 2.0 - n,
        b: e.q() * (n - 2.0) / 2.0 - n,
    }
}

/// The Kelvin reflection of a weight pair, bundled with the fixed point.
pub fn kelvin_map(e: ExponentPair, w: WeightPair) -> KelvinMap {
    KelvinMap { image: kelvin_kappa(e, w), fixed_point: kelvin_fixed_point(e) }
}

/// The image of a power solution under the Kelvin transform: exponents
/// reflect as `α ↦ 2 - n - α`, the coefficients are unchanged.
pub fn kelvin_power(e: ExponentPair, sol: PowerSolution) -> PowerSolution {
    let alpha = 2.0 - e.nf() - sol.alpha;
    let beta = 2.0 - e.nf() - sol.beta;
    let (lambda1, lambda2) = power_lambdas(e, alpha, beta);
    PowerSolution {
        alpha,
        beta,
        lambda1,
        lambda2,
        positive: lambda1 > 0.0 && lambda2 > 0.0,
    }
}

/// Endpoints `X = (-n, q(n-2) - n)` and `X' = (p(n-2) - n, -n)` of the
/// admissible segment in the homogeneous regime.  In the other regimes the
/// same two points are the corners of `Q` on the bounds `a = -n`, `b = -n`.
pub fn segment_endpoints(e: ExponentPair) -> (WeightPair, WeightPair) {
    let n = e.nf();
    (
        WeightPair { a: -n, b: e.q() * (n - 2.0) - n },
        WeightPair { a: e.p() * (n - 2.0) - n, b: -n },
    )
}

/// The four corners of `Q` in the anticoercive and coercive regimes.
///
/// Fails in the homogeneous regime, where `Q` degenerates to a segment
/// (use [`segment_endpoints`] there).
pub fn q_vertices(e: ExponentPair) -> Result<QVertices, PowerError> {
    if e.regime() == Regime::Homogeneous {
        return Err(PowerError::HomogeneousRegime);
    }
    let (x, x_prime) = segment_endpoints(e);
    let v = WeightPair { a: -2.0, b: -2.0 };
    Ok(QVertices { x, x_prime, v, v_prime: kelvin_kappa(e, v) })
}

/// Coefficient normalisation: given `λ₁, λ₂ > 0`, returns `(c₁, c₂)` such
/// that `u = c₁ r^α`, `v = c₂ r^β` solves the system with unit
/// coefficients whenever `(r^α, r^β)` solves it with `(λ₁, λ₂)`.
///
/// Taking logarithms, `(ln c₁, ln c₂)` solves
///
/// ```text
///     ln c₁ - (p-1) ln c₂ = -ln λ₁
///    -(q-1) ln c₁ + ln c₂ = -ln λ₂
/// ```
///
/// with determinant `θ`; the rescaling exists (and is unique) exactly off
/// the homogeneous regime.
pub fn unit_lambda_scaling(
    e: ExponentPair,
    lambda1: f64,
    lambda2: f64,
) -> Result<(f64, f64), PowerError> {
    if e.regime() == Regime::Homogeneous {
        return Err(PowerError::HomogeneousRegime);
    }
    if lambda1 <= 0.0 {
        return Err(PowerError::NonPositiveLambda(lambda1));
    }
    if lambda2 <= 0.0 {
        return Err(PowerError::NonPositiveLambda(lambda2));
    }
    let theta = e.theta();
    let (log1, log2) = (lambda1.ln(), lambda2.ln());
    let x = (-log1 - (e.p() - 1.0) * log2) / theta;
    let y = (-log2 - (e.q() - 1.0) * log1) / theta;
    let (c1, c2) = (x.exp(), y.exp());
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
        return Err(PowerError::ScalingOutOfRange(x, y));
    }
    Ok((c1, c2))
}
