//! Adaptive integration of the radial initial value problem
//!
//! ```text
//!     -u'' - (n-1)/r u' = λ₁ r^a |v|^(p-2) v,     u(0) = γ₁, u'(0) = 0,
//!     -v'' - (n-1)/r v' = λ₂ r^b |u|^(q-2) u,     v(0) = γ₂, v'(0) = 0,
//! ```
//!
//! with an embedded Dormand–Prince 5(4) pair and a truncated series start
//! away from the coordinate singularity at `r = 0`.  The nonlinearities
//! use the odd extensions `t ↦ |t|^(s-1) t`, so the vector field stays
//! well defined when a component crosses zero; integration stops at the
//! first such crossing (located by monitoring sign changes) or at the
//! requested end radius, whichever comes first.

use crate::regions::{ExponentPair, WeightPair};
use crate::solver::{ProfileMethod, RadialProfile, SolveError};

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// Both components stayed positive up to the requested end radius.
    ReachedRadius(f64),
    /// The first component crossed zero at the given radius.
    ZeroOfU(f64),
    /// The second component crossed zero at the given radius.
    ZeroOfV(f64),
}

/// Profile and stopping information from one integration.
#[derive(Debug, Clone)]
pub struct IvpOutcome {
    pub profile: RadialProfile,
    pub stop: StopReason,
}

/// Guard for finite-radius blow-up: integration aborts once `|u|` or
/// `|v|` exceeds this.
const BLOWUP_GUARD: f64 = 1e14;

/// Odd power `t ↦ sign(t) |t|^s`.
fn pow_odd(t: f64, s: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(s)
    }
}

/// The first-order form of the system: state `y = [u, u', v, v']`.
pub(crate) struct RadialSystem {
    nm1: f64,
    a: f64,
    b: f64,
    lambda1: f64,
    lambda2: f64,
    pm1: f64,
    qm1: f64,
}

impl RadialSystem {
    pub(crate) fn new(e: ExponentPair, w: WeightPair, lambda1: f64, lambda2: f64) -> Self {
        RadialSystem {
            nm1: e.nf() - 1.0,
            a: w.a,
            b: w.b,
            lambda1,
            lambda2,
            pm1: e.p() - 1.0,
            qm1: e.q() - 1.0,
        }
    }

    fn eval(&self, r: f64, y: &[f64; 4]) -> [f64; 4] {
        let inv = 1.0 / r;
        [
            y[1],
            -self.nm1 * inv * y[1] - self.lambda1 * r.powf(self.a) * pow_odd(y[2], self.pm1),
            y[3],
            -self.nm1 * inv * y[3] - self.lambda2 * r.powf(self.b) * pow_odd(y[0], self.qm1),
        ]
    }

    /// Leading terms of the series solution at a small radius `r0`:
    /// `u = γ₁ - λ₁ γ₂^(p-1) r^(a+2) / ((a+2)(a+n))` and its derivative,
    /// and the mirror image for `v`.  Requires `a, b > -2`.
    pub(crate) fn series_start(&self, gamma1: f64, gamma2: f64, r0: f64) -> [f64; 4] {
        let n = self.nm1 + 1.0;
        let cu = self.lambda1 * pow_odd(gamma2, self.pm1);
        let cv = self.lambda2 * pow_odd(gamma1, self.qm1);
        [
            gamma1 - cu * r0.powf(self.a + 2.0) / ((self.a + 2.0) * (self.a + n)),
            -cu * r0.powf(self.a + 1.0) / (self.a + n),
            gamma2 - cv * r0.powf(self.b + 2.0) / ((self.b + 2.0) * (self.b + n)),
            -cv * r0.powf(self.b + 1.0) / (self.b + n),
        ]
    }

    /// Start radius for the series: small enough that the neglected terms
    /// (relative size `r0^(min(a,b)+2)`) are below 1e-3 of the kept ones,
    /// never larger than 1e-6.
    pub(crate) fn start_radius(&self) -> f64 {
        let margin = self.a.min(self.b) + 2.0;
        debug_assert!(margin > 0.0);
        1e-6f64.min(1e-3f64.powf(1.0 / margin))
    }
}

/// One Dormand–Prince 5(4) step: returns the fifth-order solution and the
/// embedded error estimate.
fn dp45_step(sys: &RadialSystem, r: f64, y: &[f64; 4], h: f64) -> ([f64; 4], [f64; 4]) {
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // Difference between the fifth- and fourth-order weights.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0f64; 4]; 7];
    k[0] = sys.eval(r, y);
    for s in 0..6 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            let w = A[s][j] * h;
            for i in 0..4 {
                ys[i] += w * kj[i];
            }
        }
        k[s + 1] = sys.eval(r + C[s] * h, &ys);
    }
    // The 6th stage row of A is the fifth-order weight vector, so the
    // last stage state is the solution itself.
    let mut y5 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let w = A[5][j] * h;
        for i in 0..4 {
            y5[i] += w * kj[i];
        }
    }
    let mut err = [0.0f64; 4];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..4 {
            err[i] += E[j] * h * kj[i];
        }
    }
    (y5, err)
}

/// Adaptive stepper state.
pub(crate) struct Stepper<'a> {
    sys: &'a RadialSystem,
    rtol: f64,
    atol: f64,
    pub r: f64,
    pub y: [f64; 4],
    h: f64,
    steps: usize,
}

const MAX_STEPS: usize = 2_000_000;

impl<'a> Stepper<'a> {
    pub(crate) fn new(sys: &'a RadialSystem, r0: f64, y0: [f64; 4], rtol: f64, atol: f64) -> Self {
        Stepper { sys, rtol, atol, r: r0, y: y0, h: r0 * 0.1, steps: 0 }
    }

    /// Takes one accepted step, clipped to land exactly on `r_end` when
    /// the proposed step would reach it.
    pub(crate) fn step_toward(&mut self, r_end: f64) -> Result<(), SolveError> {
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(SolveError::NoConvergence(format!(
                    "integration exceeded {MAX_STEPS} steps near r = {}",
                    self.r
                )));
            }
            let remaining = r_end - self.r;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if h < self.r * 1e-13 {
                return Err(SolveError::StepSizeUnderflow { r: self.r });
            }
            let (ynew, err) = dp45_step(self.sys, self.r, &self.y, h);
            let mut norm = 0.0;
            for i in 0..4 {
                let sc = self.atol + self.rtol * self.y[i].abs().max(ynew[i].abs());
                let q = err[i] / sc;
                norm += q * q;
            }
            let norm = (norm / 4.0).sqrt();
            if norm.is_finite() && norm <= 1.0 {
                self.r = if clipped { r_end } else { self.r + h };
                self.y = ynew;
                let factor = (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0);
                // Never let a clipped landing shrink the controller's
                // step proposal.
                let proposal = h * factor;
                if !clipped || proposal > self.h {
                    self.h = proposal;
                }
                if ynew[0].abs() > BLOWUP_GUARD || ynew[2].abs() > BLOWUP_GUARD {
                    return Err(SolveError::Blowup { r: self.r });
                }
                return Ok(());
            }
            let factor = if norm.is_finite() {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 0.9)
            } else {
                0.2
            };
            self.h = h * factor;
        }
    }
}

/// Cubic Hermite interpolation of one state component over an accepted
/// step, used to locate zero crossings.
fn hermite(y0: f64, m0: f64, y1: f64, m1: f64, h: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + theta) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

/// Locates `component`'s zero inside an accepted step by bisecting the
/// Hermite interpolant; returns `(theta, value of the other component)`.
fn locate_zero(
    sys: &RadialSystem,
    r0: f64,
    y0: &[f64; 4],
    r1: f64,
    y1: &[f64; 4],
    component: usize,
) -> (f64, f64) {
    let h = r1 - r0;
    let f0 = sys.eval(r0, y0);
    let f1 = sys.eval(r1, y1);
    let other = if component == 0 { 2 } else { 0 };
    let g = |theta: f64| hermite(y0[component], f0[component], y1[component], f1[component], h, theta);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (g(lo) <= 0.0) == (g(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let other_value = hermite(y0[other], f0[other], y1[other], f1[other], h, theta);
    (theta, other_value)
}

fn validate_common(w: WeightPair, rtol: f64) -> Result<(), SolveError> {
    if !(w.a > -2.0 && w.b > -2.0) {
        return Err(SolveError::NotInScope(format!(
            "the regular series start at the origin needs a > -2 and b > -2, got ({}, {})",
            w.a, w.b
        )));
    }
    if !(1e-13..=1e-2).contains(&rtol) {
        return Err(SolveError::NotInScope(format!(
            "rtol must lie in [1e-13, 1e-2], got {rtol}"
        )));
    }
    Ok(())
}

/// Integrates the radial initial value problem from central values
/// `(γ₁, γ₂)` until the first zero of a component or until `r_max`.
///
/// The returned profile samples the solution at the accepted steps of the
/// adaptive integrator (plus the exact centre node), so its resolution
/// adapts to the solution; `rtol` is the local relative error target.
/// Central values must be strictly positive and the weights must satisfy
/// `a, b > -2` so that the problem has a regular centre.
pub fn integrate_radial_ivp(
    e: ExponentPair,
    w: WeightPair,
    lambda: (f64, f64),
    gamma: (f64, f64),
    r_max: f64,
    rtol: f64,
) -> Result<IvpOutcome, SolveError> {
    let (gamma1, gamma2) = gamma;
    if !(gamma1 > 0.0 && gamma2 > 0.0 && gamma1.is_finite() && gamma2.is_finite()) {
        return Err(SolveError::NonPositiveCentral { gamma1, gamma2 });
    }
    validate_common(w, rtol)?;
    if !(r_max > 2e-6 && r_max <= 1e6) {
        return Err(SolveError::NotInScope(format!(
            "r_max must lie in (2e-6, 1e6], got {r_max}"
        )));
    }
    if !(lambda.0.is_finite() && lambda.1.is_finite()) {
        return Err(SolveError::NotInScope("coefficients must be finite".into()));
    }

    let sys = RadialSystem::new(e, w, lambda.0, lambda.1);
    let r0 = sys.start_radius().min(r_max / 16.0);
    let y0 = sys.series_start(gamma1, gamma2, r0);
    let atol = rtol * gamma1.max(gamma2).max(1.0);
    let mut stepper = Stepper::new(&sys, r0, y0, rtol, atol);

    let mut radii = vec![0.0, r0];
    let mut u = vec![gamma1, y0[0]];
    let mut v = vec![gamma2, y0[2]];
    let stop;
    loop {
        let (r_prev, y_prev) = (stepper.r, stepper.y);
        stepper.step_toward(r_max)?;
        let crossed_u = y_prev[0] > 0.0 && stepper.y[0] <= 0.0;
        let crossed_v = y_prev[2] > 0.0 && stepper.y[2] <= 0.0;
        if crossed_u || crossed_v {
            let h = stepper.r - r_prev;
            let pick = |component: usize| {
                locate_zero(&sys, r_prev, &y_prev, stepper.r, &stepper.y, component)
            };
            let (theta, reason, other) = match (crossed_u, crossed_v) {
                (true, false) => {
                    let (t, o) = pick(0);
                    (t, StopReason::ZeroOfU(r_prev + t * h), o)
                }
                (false, true) => {
                    let (t, o) = pick(2);
                    (t, StopReason::ZeroOfV(r_prev + t * h), o)
                }
                _ => {
                    // Both crossed in the same step: report the earlier one.
                    let (tu, ou) = pick(0);
                    let (tv, ov) = pick(2);
                    if tu <= tv {
                        (tu, StopReason::ZeroOfU(r_prev + tu * h), ou)
                    } else {
                        (tv, StopReason::ZeroOfV(r_prev + tv * h), ov)
                    }
                }
            };
            let r_zero = r_prev + theta * h;
            radii.push(r_zero);
            match reason {
                StopReason::ZeroOfU(_) => {
                    u.push(0.0);
                    v.push(other);
                }
                StopReason::ZeroOfV(_) => {
                    u.push(other);
                    v.push(0.0);
                }
                StopReason::ReachedRadius(_) => unreachable!(),
            }
            stop = reason;
            break;
        }
        radii.push(stepper.r);
        u.push(stepper.y[0]);
        v.push(stepper.y[2]);
        if stepper.r >= r_max {
            stop = StopReason::ReachedRadius(r_max);
            break;
        }
    }

    let mut profile = RadialProfile::from_samples(radii, u, v)
        .expect("integrator nodes are strictly increasing and finite");
    profile.central = (gamma1, gamma2);
    profile.lambda = lambda;
    profile.method = ProfileMethod::Shooting;
    profile.boundary_defect = {
        let k = profile.radii.len() - 1;
        profile.u[k].abs().max(profile.v[k].abs())
    };
    profile.residual_sup = {
        // Spacings shrink like 0.1 r towards the centre, where finite
        // differences of the nearly flat solution are dominated by
        // rounding noise; measure the residual away from that region.
        let cut = 1e-3 * r_max.max(1.0);
        let start = profile.radii.partition_point(|&t| t < cut);
        if profile.radii.len() - start >= 3 {
            let sub = RadialProfile::from_samples(
                profile.radii[start..].to_vec(),
                profile.u[start..].to_vec(),
                profile.v[start..].to_vec(),
            )
            .expect("sub-profile nodes stay strictly increasing");
            match crate::verify::residual_check(e, w, &sub, lambda.0, lambda.1, 1.0) {
                Ok(stats) => stats.sup_abs_u.max(stats.sup_abs_v),
                Err(_) => f64::NAN,
            }
        } else {
            f64::NAN
        }
    };
    Ok(IvpOutcome { profile, stop })
}

/// Integrates without stopping at zeros, recording the state at each of
/// the strictly increasing `targets` (all above the series start radius).
/// Returns the state at the last target.  Used by the shooting solver for
/// boundary evaluations and dense output.
pub(crate) fn integrate_to(
    sys: &RadialSystem,
    gamma: (f64, f64),
    targets: &[f64],
    rtol: f64,
    mut sink: impl FnMut(f64, &[f64; 4]),
) -> Result<[f64; 4], SolveError> {
    let r0 = sys.start_radius().min(targets[0] / 4.0);
    let y0 = sys.series_start(gamma.0, gamma.1, r0);
    let atol = rtol * gamma.0.max(gamma.1).max(1.0);
    let mut stepper = Stepper::new(sys, r0, y0, rtol, atol);
    for &t in targets {
        while stepper.r < t {
            stepper.step_toward(t)?;
        }
        sink(t, &stepper.y);
    }
    Ok(stepper.y)
}
