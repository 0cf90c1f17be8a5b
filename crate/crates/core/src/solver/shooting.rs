//! Two-parameter shooting for positive radial profiles on the unit ball
//! with homogeneous Dirichlet data and unit coefficients:
//!
//! ```text
//!     -Δu = r^a v^(p-1),   -Δv = r^b u^(q-1),   u, v > 0 on [0, 1),
//!     u(1) = v(1) = 0,     u'(0) = v'(0) = 0.
//! ```
//!
//! The unknowns are the central values `γ = (u(0), v(0))`; the defect map
//! `F(γ) = (u(1), v(1))` is evaluated by adaptive integration and driven
//! to zero by a damped Newton iteration seeded from a coarse logarithmic
//! scan.  Sign-changing solutions (higher modes) are filtered out by a
//! positivity check on the final dense output, so the solver keeps trying
//! seeds until it lands on a positive profile.

use crate::regions::{ExponentPair, TriState, WeightPair};
use crate::solver::ivp::{integrate_to, RadialSystem};
use crate::solver::{ProfileMethod, RadialProfile, SolveError};

/// Tuning knobs for [`shoot_radial_with`].
#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Target for the boundary defect `max(|u(1)|, |v(1)|)`.
    pub tol: f64,
    /// Local relative tolerance of the underlying integrator.
    pub rtol: f64,
    /// Number of nodes of the returned uniform profile (including both
    /// `r = 0` and `r = 1`).
    pub output_nodes: usize,
    /// Range of central values covered by the logarithmic scan.
    pub scan_range: (f64, f64),
    /// Scan resolution per axis (the scan costs its square).
    pub scan_per_axis: usize,
    /// Newton iteration budget per seed.
    pub max_newton: usize,
    /// How many scan seeds to try before giving up.
    pub max_seeds: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            tol: 1e-9,
            rtol: 1e-12,
            output_nodes: 4097,
            scan_range: (0.05, 1000.0),
            scan_per_axis: 12,
            max_newton: 60,
            max_seeds: 8,
        }
    }
}

/// Shoots for the positive Dirichlet profile with the default options and
/// the given boundary-defect tolerance.
pub fn shoot_radial(
    e: ExponentPair,
    w: WeightPair,
    tol: f64,
) -> Result<RadialProfile, SolveError> {
    shoot_radial_with(e, w, &ShootOptions { tol, ..ShootOptions::default() })
}

/// Evaluates `F(γ) = (u(1), v(1))` at one seed.
fn boundary_values(
    sys: &RadialSystem,
    gamma: (f64, f64),
    rtol: f64,
) -> Result<[f64; 2], SolveError> {
    let y = integrate_to(sys, gamma, &[1.0], rtol, |_, _| {})?;
    Ok([y[0], y[2]])
}

fn defect(f: &[f64; 2]) -> f64 {
    f[0].abs().max(f[1].abs())
}

/// Shoots for the positive Dirichlet profile.
///
/// Scope: the exponent pair must not be homogeneous (there the Dirichlet
/// problem is scale-degenerate with unit coefficients — use the
/// variational solver, which returns the eigenvalue), the weights must
/// satisfy `a, b > -2` for a regular centre, and `(a, b)` must lie
/// strictly inside `E⁺`.
///
/// The returned profile is sampled on a uniform grid, carries the central
/// values that were solved for, unit coefficients, the achieved boundary
/// defect, and an independently measured finite-difference residual.
pub fn shoot_radial_with(
    e: ExponentPair,
    w: WeightPair,
    opts: &ShootOptions,
) -> Result<RadialProfile, SolveError> {
    if e.regime() == crate::regions::Regime::Homogeneous {
        return Err(SolveError::NotInScope(
            "homogeneous exponent pair (q = p'): the Dirichlet problem with unit \
             coefficients is scale-degenerate; use the variational solver"
                .into(),
        ));
    }
    if !(w.a > -2.0 && w.b > -2.0) {
        return Err(SolveError::NotInScope(format!(
            "shooting needs a > -2 and b > -2 for a regular centre, got ({}, {})",
            w.a, w.b
        )));
    }
    if crate::regions::membership_eplus(e, w, crate::DEFAULT_BOUNDARY_EPS) != TriState::Inside {
        return Err(SolveError::NotInScope(format!(
            "(a, b) = ({}, {}) is not strictly inside E+",
            w.a, w.b
        )));
    }
    if !(1e-11..=1e-2).contains(&opts.tol) {
        return Err(SolveError::NotInScope(format!(
            "tol must lie in [1e-11, 1e-2], got {}",
            opts.tol
        )));
    }
    if !(1e-13..=1e-3).contains(&opts.rtol) {
        return Err(SolveError::NotInScope(format!(
            "rtol must lie in [1e-13, 1e-3], got {}",
            opts.rtol
        )));
    }
    if opts.output_nodes < 3
        || opts.scan_per_axis < 2
        || !(opts.scan_range.0 > 0.0 && opts.scan_range.1 > opts.scan_range.0)
    {
        return Err(SolveError::NotInScope(
            "output_nodes >= 3, scan_per_axis >= 2 and 0 < lo < hi are required".into(),
        ));
    }

    let sys = RadialSystem::new(e, w, 1.0, 1.0);

    // Coarse logarithmic scan of central values, ranked by boundary
    // defect RELATIVE to the central scale: γ = 0 solves the boundary
    // system trivially, so the raw defect (≈ max γ for small seeds) would
    // rank the smallest seeds first and steer Newton into that root.
    // Failed integrations (blow-up, underflow) rank last.
    let k = opts.scan_per_axis;
    let (lo, hi) = opts.scan_range;
    let grid_value = |i: usize| lo * (hi / lo).powf(i as f64 / (k - 1) as f64);
    let coarse_rtol = opts.rtol.max(1e-6);
    let mut seeds: Vec<(f64, (f64, f64))> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let gamma = (grid_value(i), grid_value(j));
            let score = match boundary_values(&sys, gamma, coarse_rtol) {
                Ok(f) => defect(&f) / gamma.0.max(gamma.1),
                Err(_) => f64::INFINITY,
            };
            seeds.push((score, gamma));
        }
    }
    // Stable by construction: exact score ties keep scan order.
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut best_defect = f64::INFINITY;
    for &(score, seed) in seeds.iter().take(opts.max_seeds) {
        if !score.is_finite() {
            break;
        }
        match polish_seed(&sys, e, w, seed, opts) {
            PolishOutcome::Converged(profile) => return Ok(profile),
            PolishOutcome::Stalled(d) => best_defect = best_defect.min(d),
            PolishOutcome::SignChanging | PolishOutcome::Degenerate => {}
        }
    }

    // Newton failed from every seed.  This happens when the two boundary
    // zero curves u(1) = 0 and v(1) = 0 meet at a shallow angle (the
    // Jacobian is then nearly singular along the whole approach), so fall
    // back to a globally convergent nested bisection: for fixed γ₁ locate
    // the zero of v(1) in γ₂, then bisect u(1) along that curve.
    match nested_bisection(&sys, e, w, opts) {
        Ok(profile) => Ok(profile),
        Err(inner_defect) => Err(SolveError::NoConvergence(format!(
            "no positive solution from {} Newton seeds (best boundary defect \
             {:.3e}) nor from nested bisection{}; consider widening scan_range",
            opts.max_seeds.min(seeds.len()),
            best_defect,
            match inner_defect {
                Some(d) => format!(" (reached defect {d:.3e})"),
                None => String::from(" (no sign-change bracket in the scan range)"),
            },
        ))),
    }
}

/// The smallest zero of `γ₂ -> v(1; γ₁, γ₂)` over the grid, located by
/// bisection between the first adjacent pair of integrable grid points
/// with a sign change; returns `(γ₂*, u(1))` at the located zero.
fn inner_v_zero(
    sys: &RadialSystem,
    g1: f64,
    g2_grid: &[f64],
    rtol: f64,
) -> Option<(f64, f64)> {
    let eval = |g2: f64| boundary_values(sys, (g1, g2), rtol).ok();
    let mut prev: Option<(f64, [f64; 2])> = None;
    let mut bracket = None;
    for &g2 in g2_grid {
        let Some(f) = eval(g2) else {
            prev = None; // an unintegrable gap breaks the bracket
            continue;
        };
        if f[1] == 0.0 {
            return Some((g2, f[0]));
        }
        if let Some((x0, f0)) = prev {
            if f0[1].signum() != f[1].signum() {
                bracket = Some((x0, f0, g2, f));
                break;
            }
        }
        prev = Some((g2, f));
    }
    let (mut lo, mut flo, mut hi, mut fhi) = bracket?;
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at f64 resolution
        }
        let Some(fm) = eval(mid) else {
            return None; // blow-up inside the bracket: give up on this column
        };
        if fm[1].signum() == flo[1].signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // Report the endpoint with the smaller |v(1)|.
    if flo[1].abs() <= fhi[1].abs() {
        Some((lo, flo[0]))
    } else {
        Some((hi, fhi[0]))
    }
}

/// Globally convergent fallback: bisection on `γ₁ -> u(1)` evaluated along
/// the curve `v(1) = 0`, followed by the positivity filter.  On failure
/// returns the best defect reached, if any bracket existed at all.
fn nested_bisection(
    sys: &RadialSystem,
    e: ExponentPair,
    w: WeightPair,
    opts: &ShootOptions,
) -> Result<RadialProfile, Option<f64>> {
    // A denser grid than the Newton scan: brackets only need to separate
    // adjacent roots, and the inner solve tolerates an imprecise start.
    let k = (2 * opts.scan_per_axis).max(24);
    let (lo, hi) = opts.scan_range;
    let grid: Vec<f64> =
        (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect();

    // φ(γ₁) = u(1) on the v-zero curve, over the columns that have one.
    let mut phi: Vec<(f64, f64, f64)> = Vec::new(); // (γ₁, γ₂*, u(1))
    for &g1 in &grid {
        if let Some((g2, u1)) = inner_v_zero(sys, g1, &grid, opts.rtol) {
            phi.push((g1, g2, u1));
        }
    }

    let mut best: Option<f64> = None;
    for pair in phi.windows(2) {
        let (mut a, _, mut fa) = pair[0];
        let (mut b, _, fb) = pair[1];
        if fa.signum() == fb.signum() {
            continue;
        }
        // Bisect the outer function; each evaluation nests a full inner
        // bisection, so the budget stays modest.
        let mut located = None;
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let Some((g2, u1)) = inner_v_zero(sys, mid, &grid, opts.rtol) else {
                break; // the curve left the grid; keep the best endpoint
            };
            located = Some((mid, g2));
            if u1 == 0.0 {
                break;
            }
            if u1.signum() == fa.signum() {
                a = mid;
                fa = u1;
            } else {
                b = mid;
            }
        }
        let Some(gamma) = located else { continue };
        match boundary_values(sys, gamma, opts.rtol) {
            Ok(f) => {
                let d = defect(&f);
                best = Some(best.map_or(d, |t: f64| t.min(d)));
                if d > opts.tol {
                    continue;
                }
            }
            Err(_) => continue,
        }
        match finish(sys, e, w, gamma, opts) {
            PolishOutcome::Converged(profile) => return Ok(profile),
            _ => continue,
        }
    }
    Err(best)
}

enum PolishOutcome {
    Converged(RadialProfile),
    /// Newton stalled; carries the best defect it reached.
    Stalled(f64),
    /// Newton converged but the profile changes sign — a higher mode.
    SignChanging,
    /// Singular Jacobian or line-search failure.
    Degenerate,
}

/// Damped Newton iteration on `F(γ) = 0` from one seed, followed by the
/// positivity check and dense output.
fn polish_seed(
    sys: &RadialSystem,
    e: ExponentPair,
    w: WeightPair,
    seed: (f64, f64),
    opts: &ShootOptions,
) -> PolishOutcome {
    let mut gamma = seed;
    let mut f = match boundary_values(sys, gamma, opts.rtol) {
        Ok(f) => f,
        Err(_) => return PolishOutcome::Degenerate,
    };
    for _ in 0..opts.max_newton {
        let d = defect(&f);
        if d <= opts.tol {
            return finish(sys, e, w, gamma, opts);
        }
        // Forward-difference Jacobian, one column per central value.
        let column = |bumped: (f64, f64), step: f64| {
            boundary_values(sys, bumped, opts.rtol)
                .ok()
                .map(|fb| [(fb[0] - f[0]) / step, (fb[1] - f[1]) / step])
        };
        let (s0, s1) = (1e-6 * gamma.0, 1e-6 * gamma.1);
        let c0 = column((gamma.0 + s0, gamma.1), s0);
        let c1 = column((gamma.0, gamma.1 + s1), s1);
        let (Some(c0), Some(c1)) = (c0, c1) else {
            return PolishOutcome::Degenerate;
        };
        let jac = [[c0[0], c1[0]], [c0[1], c1[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac.iter().flatten().fold(0.0f64, |m, t| m.max(t.abs()));
        if det.abs() <= 1e-14 * scale * scale {
            return PolishOutcome::Degenerate;
        }
        let delta = (
            (jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            (jac[0][0] * f[1] - jac[1][0] * f[0]) / det,
        );
        // Work with the multiplicative step and cap it at a factor of 3
        // per central value: a nearly singular Jacobian (the zero curves
        // of the two components can meet at a very shallow angle) would
        // otherwise fling the iterate across basins.
        let mut step = (delta.0 / gamma.0, delta.1 / gamma.1);
        let magnitude = step.0.abs().max(step.1.abs());
        let cap = 3.0f64.ln();
        if magnitude > cap {
            step = (step.0 * cap / magnitude, step.1 * cap / magnitude);
        }
        // Line search: halve until the defect drops; the exponential
        // update keeps the iterate positive by construction.
        let mut s = 1.0f64;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = (
                gamma.0 * (-s * step.0).exp(),
                gamma.1 * (-s * step.1).exp(),
            );
            if trial.0 < 1e12 && trial.1 < 1e12 {
                if let Ok(ft) = boundary_values(sys, trial, opts.rtol) {
                    let dt = defect(&ft);
                    if dt < d * (1.0 - 0.25 * s) || dt <= opts.tol {
                        gamma = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        if !accepted {
            return PolishOutcome::Stalled(d);
        }
        // The zero function solves the boundary system, and Newton is
        // linearly attracted to it: near γ = 0 the defect stays comparable
        // to the central values while both shrink.  Detect that signature
        // early instead of grinding the budget down to nothing.
        let scale = gamma.0.max(gamma.1);
        if scale <= 1e-7
            || (defect(&f) >= 0.5 * scale && scale <= 1e-2 * seed.0.max(seed.1))
        {
            return PolishOutcome::Degenerate;
        }
    }
    if defect(&f) <= opts.tol {
        return finish(sys, e, w, gamma, opts);
    }
    PolishOutcome::Stalled(defect(&f))
}

/// Dense output on the uniform grid plus the positivity filter and the
/// profile metadata.
fn finish(
    sys: &RadialSystem,
    e: ExponentPair,
    w: WeightPair,
    gamma: (f64, f64),
    opts: &ShootOptions,
) -> PolishOutcome {
    let cells = opts.output_nodes - 1;
    let targets: Vec<f64> = (1..=cells).map(|i| i as f64 / cells as f64).collect();
    let mut u = Vec::with_capacity(opts.output_nodes);
    let mut v = Vec::with_capacity(opts.output_nodes);
    u.push(gamma.0);
    v.push(gamma.1);
    let result = integrate_to(sys, gamma, &targets, opts.rtol, |_, y| {
        u.push(y[0]);
        v.push(y[2]);
    });
    if result.is_err() {
        return PolishOutcome::Degenerate;
    }
    // Interior positivity: the boundary values are only zero up to tol.
    let interior_ok = u[..cells].iter().all(|&t| t > 0.0) && v[..cells].iter().all(|&t| t > 0.0);
    if !interior_ok {
        return PolishOutcome::SignChanging;
    }
    let mut radii = Vec::with_capacity(opts.output_nodes);
    radii.push(0.0);
    radii.extend_from_slice(&targets);
    let boundary_defect = u[cells].abs().max(v[cells].abs());
    let mut profile = RadialProfile::from_samples(radii, u, v)
        .expect("uniform output nodes are strictly increasing");
    profile.central = gamma;
    profile.lambda = (1.0, 1.0);
    profile.method = ProfileMethod::Shooting;
    profile.boundary_defect = boundary_defect;
    profile.residual_sup =
        match crate::verify::residual_check(e, w, &profile, 1.0, 1.0, 1.0) {
            Ok(stats) => stats.sup_abs_u.max(stats.sup_abs_v),
            Err(_) => f64::NAN,
        };
    PolishOutcome::Converged(profile)
}
