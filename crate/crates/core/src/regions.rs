//! Classification of exponent pairs `(p, q)` and weight pairs `(a, b)`.
//!
//! For fixed dimension `n >= 3` and exponents `p, q > 1`, the radial system
//!
//! ```text
//!     -Δu >= λ₁ |x|^a v^(p-1),      -Δv >= λ₂ |x|^b u^(q-1)
//! ```
//!
//! on the punctured unit ball admits positive singular solutions only for
//! weight pairs `(a, b)` in an explicit region `E` of the `(a, b)`-plane,
//! and admits positive *power-type* solutions with positive coefficients
//! exactly on a smaller region `Q`.  The shape of both regions depends on
//! the scaling regime of `(p, q)`, measured by the gap `1/p + 1/q - 1`:
//!
//! * **anticoercive** (`1/p + 1/q < 1`): `E` is bounded by the two lines
//!   `a/p + b/p' + 2 = 0` and `a/q' + b/q + 2 = 0` (primes denote Hölder
//!   conjugates) together with the bounds `a > -n`, `b > -n`;
//! * **homogeneous** (`1/p + 1/q = 1`, i.e. `q = p'`): the two lines
//!   coincide and `E` is the closed half-plane `a/p + b/p' + 2 >= 0`
//!   intersected with the bounds;
//! * **coercive** (`1/p + 1/q > 1`): `E` is cut out by the two Serrin-type
//!   conditions `(a+n)/p + (b+n)/(p(q-1)) > n-2` and
//!   `(a+n)/(q(p-1)) + (b+n)/q > n-2` together with the bounds.
//!
//! The subregion `E⁺` (weights whose singular solutions have a removable
//! singularity scale) is regime-independent:
//! `E⁺ = { a, b > -n,  (a+n)/p + (b+n)/q > n-2 }`.
//!
//! All membership tests are three-valued ([`TriState`]): a verdict is
//! `Boundary` when some defining margin is smaller in absolute value than
//! an explicit tolerance, so downstream code can tell a robust answer from
//! a knife-edge one.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::power;
use crate::DEFAULT_BOUNDARY_EPS;

/// Rejected parameter values for the basic types.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DomainError {
    /// The dimension must be an integer `n >= 3`.
    #[error("dimension must be at least 3, got n = {0}")]
    Dimension(u32),
    /// Both exponents must be finite numbers strictly greater than 1.
    #[error("exponent {name} must be a finite number > 1, got {value}")]
    Exponent { name: &'static str, value: f64 },
    /// Weights must be finite.
    #[error("weight {name} must be finite, got {value}")]
    Weight { name: &'static str, value: f64 },
}

/// Dimension `n >= 3` and superlinear exponents `p, q > 1`.
///
/// Constructed with [`ExponentPair::new`], which validates the ranges; the
/// fields are immutable afterwards so every routine in the crate can rely
/// on `n >= 3`, `p > 1`, `q > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    n: u32,
    p: f64,
    q: f64,
}

impl ExponentPair {
    /// Validates and builds an exponent pair.
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self, DomainError> {
        if n < 3 {
            return Err(DomainError::Dimension(n));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(DomainError::Exponent { name: "p", value: p });
        }
        if !q.is_finite() || q <= 1.0 {
            return Err(DomainError::Exponent { name: "q", value: q });
        }
        Ok(ExponentPair { n, p, q })
    }

    /// Space dimension.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Space dimension as a float, for use in the defining formulas.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Hölder conjugate `p' = p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Hölder conjugate `q' = q / (q - 1)`.
    pub fn q_conj(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// Scaling gap `g = 1/p + 1/q - 1`; its sign picks the regime.
    pub fn gap(&self) -> f64 {
        1.0 / self.p + 1.0 / self.q - 1.0
    }

    /// Degeneracy indicator `θ = 1 - (p-1)(q-1) = pq·g`.
    ///
    /// `θ` is the determinant of the linear system satisfied by the
    /// exponents of a power-type solution; it vanishes exactly in the
    /// homogeneous regime and has the same sign as [`ExponentPair::gap`].
    pub fn theta(&self) -> f64 {
        1.0 - (self.p - 1.0) * (self.q - 1.0)
    }

    /// Scaling regime of `(p, q)` with an explicit tolerance on the gap.
    pub fn regime_with(&self, eps: f64) -> Regime {
        let g = self.gap();
        if g < -eps {
            Regime::Anticoercive
        } else if g <= eps {
            Regime::Homogeneous
        } else {
            Regime::Coercive
        }
    }

    /// Scaling regime with the default tolerance.
    pub fn regime(&self) -> Regime {
        self.regime_with(DEFAULT_BOUNDARY_EPS)
    }

    /// The pair with the roles of `p` and `q` exchanged.
    ///
    /// Exchanging `p ↔ q` and `a ↔ b` swaps the two equations of the
    /// system, so every classification must be invariant under it.
    pub fn swapped(&self) -> Self {
        ExponentPair { n: self.n, p: self.q, q: self.p }
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n = {}, p = {}, q = {})", self.n, self.p, self.q)
    }
}

/// A weight pair `(a, b)`: the exponents of the radial weights `|x|^a`,
/// `|x|^b` on the right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightPair {
    pub a: f64,
    pub b: f64,
}

impl WeightPair {
    /// Builds a weight pair, rejecting non-finite values.
    pub fn new(a: f64, b: f64) -> Result<Self, DomainError> {
        if !a.is_finite() {
            return Err(DomainError::Weight { name: "a", value: a });
        }
        if !b.is_finite() {
            return Err(DomainError::Weight { name: "b", value: b });
        }
        Ok(WeightPair { a, b })
    }

    /// The pair with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        WeightPair { a: self.b, b: self.a }
    }
}

impl fmt::Display for WeightPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a = {}, b = {})", self.a, self.b)
    }
}

/// Scaling regime of an exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `1/p + 1/q < 1`.
    Anticoercive,
    /// `1/p + 1/q = 1` (up to tolerance), i.e. `q = p'`.
    Homogeneous,
    /// `1/p + 1/q > 1`.
    Coercive,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Anticoercive => "anticoercive",
            Regime::Homogeneous => "homogeneous",
            Regime::Coercive => "coercive",
        };
        f.write_str(s)
    }
}

/// Three-valued membership verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    /// All defining margins are strictly positive (beyond tolerance).
    Inside,
    /// Some defining margin vanishes to within the tolerance.
    Boundary,
    /// Some defining margin is strictly negative (beyond tolerance).
    Outside,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TriState::Inside => "inside",
            TriState::Boundary => "boundary",
            TriState::Outside => "outside",
        };
        f.write_str(s)
    }
}

/// Generic three-valued test: each margin encodes one strict inequality
/// `margin > 0` of the set's definition.
pub(crate) fn tri_state(margins: &[f64], eps: f64) -> TriState {
    if margins.iter().any(|m| m.abs() <= eps) {
        TriState::Boundary
    } else if margins.iter().all(|&m| m > 0.0) {
        TriState::Inside
    } else {
        TriState::Outside
    }
}

/// Full classification of a weight pair against `E`, `E⁺` and `Q`.
///
/// `margins` holds one signed residual per defining inequality (positive
/// inside), keyed by stable names, so callers can see *how far* a point is
/// from each boundary:
///
/// * `a_plus_n`, `b_plus_n` — the bounds `a > -n`, `b > -n`;
/// * `critical_line` — `(a+n)/p + (b+n)/q - (n-2)`, the extra condition
///   defining `E⁺`;
/// * `E_line_p`, `E_line_q` (anticoercive) / `E_line` (homogeneous) /
///   `E_serrin_p`, `E_serrin_q` (coercive) — the regime-dependent
///   conditions defining `E`;
/// * `Q_line_p`, `Q_line_q`, `Q_serrin_p`, `Q_serrin_q` (anticoercive and
///   coercive) / `Q_segment` (homogeneous) — the conditions defining `Q`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionVerdict {
    pub regime: Regime,
    #[serde(rename = "in_E")]
    pub in_e: TriState,
    #[serde(rename = "in_Eplus")]
    pub in_eplus: TriState,
    #[serde(rename = "in_Q")]
    pub in_q: TriState,
    pub margins: BTreeMap<String, f64>,
    pub boundary_tolerance: f64,
}

/// Signed residual of the first line condition: `ℓ₁ = a/p + b/p' + 2`.
pub(crate) fn line_margin_p(e: ExponentPair, w: WeightPair) -> f64 {
    w.a / e.p() + w.b / e.p_conj() + 2.0
}

/// Signed residual of the second line condition: `ℓ₂ = a/q' + b/q + 2`.
pub(crate) fn line_margin_q(e: ExponentPair, w: WeightPair) -> f64 {
    w.a / e.q_conj() + w.b / e.q() + 2.0
}

/// Signed residual of the first Serrin-type condition:
/// `(a+n)/p + (b+n)/(p(q-1)) - (n-2)`.
pub(crate) fn serrin_margin_p(e: ExponentPair, w: WeightPair) -> f64 {
    let n = e.nf();
    (w.a + n) / e.p() + (w.b + n) / (e.p() * (e.q() - 1.0)) - (n - 2.0)
}

/// Signed residual of the second Serrin-type condition:
/// `(a+n)/(q(p-1)) + (b+n)/q - (n-2)`.
pub(crate) fn serrin_margin_q(e: ExponentPair, w: WeightPair) -> f64 {
    let n = e.nf();
    (w.a + n) / (e.q() * (e.p() - 1.0)) + (w.b + n) / e.q() - (n - 2.0)
}

/// Signed residual of the critical-line condition defining `E⁺`:
/// `(a+n)/p + (b+n)/q - (n-2)`.
pub(crate) fn critical_line_margin(e: ExponentPair, w: WeightPair) -> f64 {
    let n = e.nf();
    (w.a + n) / e.p() + (w.b + n) / e.q() - (n - 2.0)
}

/// Classifies `(p, q)` into its scaling regime.
pub fn classify_regime(e: ExponentPair, eps: f64) -> Regime {
    e.regime_with(eps)
}

/// Membership of `(a, b)` in the subregion `E⁺`.
pub fn membership_eplus(e: ExponentPair, w: WeightPair, eps: f64) -> TriState {
    let n = e.nf();
    tri_state(&[w.a + n, w.b + n, critical_line_margin(e, w)], eps)
}

/// Classifies `(a, b)` against `E`, `E⁺` and `Q`, reporting all margins.
///
/// Boundary conventions: in the anticoercive and coercive regimes all
/// defining inequalities of `E` are strict, so any vanishing margin yields
/// `Boundary`.  In the homogeneous regime `E` contains its defining line
/// (the half-plane is closed), so points with `|ℓ| <= eps` count as
/// `Inside` — only the bounds `a > -n`, `b > -n` produce `Boundary` there.
pub fn membership_e(e: ExponentPair, w: WeightPair, eps: f64) -> RegionVerdict {
    let regime = e.regime_with(eps);
    let n = e.nf();
    let an = w.a + n;
    let bn = w.b + n;
    let cl = critical_line_margin(e, w);

    let mut margins = BTreeMap::new();
    margins.insert("a_plus_n".to_owned(), an);
    margins.insert("b_plus_n".to_owned(), bn);
    margins.insert("critical_line".to_owned(), cl);

    let in_e = match regime {
        Regime::Anticoercive => {
            let l1 = line_margin_p(e, w);
            let l2 = line_margin_q(e, w);
            margins.insert("E_line_p".to_owned(), l1);
            margins.insert("E_line_q".to_owned(), l2);
            tri_state(&[an, bn, l1, l2], eps)
        }
        Regime::Homogeneous => {
            let l = line_margin_p(e, w);
            margins.insert("E_line".to_owned(), l);
            if l < -eps {
                TriState::Outside
            } else if an.abs() <= eps || bn.abs() <= eps {
                TriState::Boundary
            } else if an < 0.0 || bn < 0.0 {
                TriState::Outside
            } else {
                TriState::Inside
            }
        }
        Regime::Coercive => {
            let s1 = serrin_margin_p(e, w);
            let s2 = serrin_margin_q(e, w);
            margins.insert("E_serrin_p".to_owned(), s1);
            margins.insert("E_serrin_q".to_owned(), s2);
            tri_state(&[an, bn, s1, s2], eps)
        }
    };

    let in_q = power::membership_q(e, w, eps);
    for (key, value) in power::q_margins(e, w) {
        margins.insert(key.to_owned(), value);
    }

    RegionVerdict {
        regime,
        in_e,
        in_eplus: membership_eplus(e, w, eps),
        in_q,
        margins,
        boundary_tolerance: eps,
    }
}

/// Threshold exponent for the symmetric reduction `p = q`, `a = b`:
/// `p_a = (2(n-1) + a) / (n-2)`.
///
/// For `1 < p < 2` (coercive symmetric case) positive solutions exist
/// exactly when `p < p_a`; note `p_a > 1` iff `a > -n`, so the bound on
/// `a` is absorbed into the threshold.
pub fn serrin_exponent(n: u32, a: f64) -> f64 {
    let nf = f64::from(n);
    (2.0 * (nf - 1.0) + a) / (nf - 2.0)
}

/// Closed-form existence test for the symmetric case `p = q`, `a = b`.
///
/// Positive singular solutions of the symmetric system exist exactly when
///
/// * `p > 2` and `a > -2`, or
/// * `p = 2` and `a >= -2`, or
/// * `1 < p < 2` and `p < p_a` (see [`serrin_exponent`]).
///
/// This is an independent reformulation of `(a, a) ∈ E` for the pair
/// `(p, p)`, used as an oracle in the test suite.
pub fn symmetric_admissible(n: u32, p: f64, a: f64) -> bool {
    if p > 2.0 {
        a > -2.0
    } else if p == 2.0 {
        a >= -2.0
    } else {
        p < serrin_exponent(n, a)
    }
}
