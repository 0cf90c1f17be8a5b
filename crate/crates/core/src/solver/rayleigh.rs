//! Variational construction of radial profiles: direct minimisation of
//! the weighted fourth-order quotient
//!
//! ```text
//!              ∫_B |x|^(-a(p'-1)) |Δu|^(p') dx
//!     J(u) = ----------------------------------- ,   u = 0, Δu = 0 on ∂B,
//!             ( ∫_B |x|^b |u|^q dx )^(p'/q)
//! ```
//!
//! over radial functions on the unit ball.  The normalised minimiser
//! generates the second component through the exact algebraic recovery
//! `v = r^(-a(p'-1)) |Δu|^(p'-2) (-Δu)`, which by construction turns the
//! first equation `-Δu = r^a v^(p-1)` into an identity; the second
//! equation `-Δv = μ₂ r^b u^(q-1)` is the Euler–Lagrange equation of the
//! quotient, and the multiplier `μ₂` is estimated here by a
//! volume-weighted least-squares fit.  In the anticoercive and coercive
//! regimes the pair is then rescaled to unit coefficients; in the
//! homogeneous regime the coefficients are an eigenvalue pair that cannot
//! be prescribed, so the profile keeps `λ = (1, μ₂)`.
//!
//! Discretisation: a conservative finite-volume Laplacian on a mesh that
//! is uniform when both weight exponents are regular at the origin and
//! geometrically graded otherwise, with quadrature weights that integrate
//! `r^s × (piecewise linear)` exactly.  The minimisation is a projected
//! gradient descent preconditioned by `(Aᵀ W A)⁻¹` — two tridiagonal
//! solves per iteration — with an Armijo line search; the quotient is
//! scale-invariant, so iterates are renormalised freely.

use serde::Serialize;

use crate::power::unit_lambda_scaling;
use crate::regions::{ExponentPair, Regime, TriState, WeightPair};
use crate::solver::mesh::{neg_laplacian, power_weights, Mesh, Tridiag};
use crate::solver::{ProfileMethod, RadialProfile, SolveError};
use crate::verify::unit_sphere_area;

/// Tuning knobs for [`minimize_rayleigh_with`].
#[derive(Debug, Clone)]
pub struct RayleighOptions {
    /// Cell count of the finest grid (nodes = cells + 1).
    pub cells: usize,
    /// Relative stagnation threshold on the quotient: the descent stops
    /// after five consecutive iterations that improve by less than this.
    pub tol: f64,
    /// Iteration budget per grid level.
    pub max_iters: usize,
    /// Solve a coarse-to-fine ladder (cells/4, cells/2, cells) and fail
    /// with [`SolveError::GridTooCoarse`] if the last refinement still
    /// moves the quotient by more than 5%.
    pub ladder: bool,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        RayleighOptions { cells: 2048, tol: 1e-12, max_iters: 2000, ladder: true }
    }
}

/// The normalised discrete minimiser.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighState {
    /// Grid nodes in `[0, 1]`.
    pub radii: Vec<f64>,
    /// Minimiser values at the nodes (boundary value included), with the
    /// denominator integral normalised to 1.
    pub minimizer: Vec<f64>,
    /// The minimal quotient value.
    pub quotient: f64,
    /// `|D(u) - 1|` of the returned minimiser.
    pub normalization_residual: f64,
}

/// Full output of the variational solve.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighSolution {
    /// Minimal value of the quotient on the finest grid.
    pub m_value: f64,
    /// Multipliers of the recovered system `(μ₁, μ₂)`; `μ₁ = 1` exactly
    /// by the algebraic recovery, `μ₂` is fitted.
    pub mu: (f64, f64),
    /// Sup-relative misfit of the fitted second equation over the nodes
    /// used for the fit (outside the regularised origin zone and away
    /// from the boundary).
    pub el_residual: f64,
    /// The normalised minimiser.
    pub state: RayleighState,
    /// The recovered pair, rescaled to unit coefficients outside the
    /// homogeneous regime.
    pub profile: RadialProfile,
    /// `(cells, quotient)` per grid level, coarse to fine.
    pub refinement: Vec<(usize, f64)>,
    /// Set when `min(a, b) <= -2`: the minimiser then lives in a weighted
    /// space the discretisation only approximates, so results carry
    /// reduced accuracy.
    pub experimental_weights: bool,
}

/// Discrete quotient on a fixed grid: the operator, the quadrature
/// weights, and the exponents.  Exposed so the quotient itself can be
/// evaluated against external trial functions.
pub struct RayleighProblem {
    e: ExponentPair,
    nodes: Vec<f64>,
    op: Tridiag,
    op_t: Tridiag,
    /// Numerator weights at nodes `0..cells` (σ included); the boundary
    /// node carries none because `Δu` vanishes there.
    wn: Vec<f64>,
    /// Denominator weights at nodes `0..cells` (σ included); the boundary
    /// node carries none because `u` vanishes there.
    wd: Vec<f64>,
    pprime: f64,
}

fn signed_power(t: f64, s: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(s)
    }
}

impl RayleighProblem {
    /// Builds the discrete quotient for the given cell count.
    ///
    /// Scope: the numerator weight needs `a (p'-1) < n` and the
    /// denominator `b > -n` for integrable singularities, and `(a, b)`
    /// must lie strictly inside `E⁺`.
    pub fn new(e: ExponentPair, w: WeightPair, cells: usize) -> Result<Self, SolveError> {
        if cells < 16 {
            return Err(SolveError::NotInScope(format!(
                "at least 16 cells are required, got {cells}"
            )));
        }
        let n = e.nf();
        let pprime = e.p_conj();
        let s_num = n - 1.0 - w.a * (pprime - 1.0);
        let s_den = n - 1.0 + w.b;
        if s_num <= -1.0 {
            return Err(SolveError::NotInScope(format!(
                "numerator weight exponent {s_num} is not integrable: need a(p'-1) < n"
            )));
        }
        if s_den <= -1.0 {
            return Err(SolveError::NotInScope(format!(
                "denominator weight exponent {s_den} is not integrable: need b > -n"
            )));
        }
        if crate::regions::membership_eplus(e, w, crate::DEFAULT_BOUNDARY_EPS)
            != TriState::Inside
        {
            return Err(SolveError::NotInScope(format!(
                "(a, b) = ({}, {}) is not strictly inside E+",
                w.a, w.b
            )));
        }
        let mesh = Mesh::for_weights(cells, w.a, w.b);
        let sigma = unit_sphere_area(e.n());
        let mut wn = power_weights(&mesh.nodes, s_num);
        let mut wd = power_weights(&mesh.nodes, s_den);
        wn.truncate(cells);
        wd.truncate(cells);
        for t in wn.iter_mut().chain(wd.iter_mut()) {
            *t *= sigma;
        }
        let op = neg_laplacian(&mesh.nodes, e.n());
        let op_t = op.transpose();
        Ok(RayleighProblem { e, nodes: mesh.nodes, op, op_t, wn, wd, pprime })
    }

    /// Grid nodes, including both endpoints.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    fn numerator(&self, flux: &[f64]) -> f64 {
        self.wn
            .iter()
            .zip(flux)
            .map(|(wi, &fi)| wi * fi.abs().powf(self.pprime))
            .sum()
    }

    fn denominator(&self, interior: &[f64]) -> f64 {
        self.wd
            .iter()
            .zip(interior)
            .map(|(wi, &ui)| wi * ui.abs().powf(self.e.q()))
            .sum()
    }

    /// The quotient `J` at a trial function given by its values at nodes
    /// `0..cells` (the boundary value is 0 by the Dirichlet condition).
    /// Scale-invariant: `J(c·u) = J(u)` for any `c != 0`.
    pub fn quotient(&self, interior: &[f64]) -> f64 {
        assert_eq!(interior.len(), self.cells(), "one value per non-boundary node");
        let mut flux = vec![0.0; self.cells()];
        self.op.apply(interior, &mut flux);
        self.numerator(&flux) / self.denominator(interior).powf(self.pprime / self.e.q())
    }

    /// `J(u - s d)` without allocating the trial vector twice.
    fn eval_step(&self, u: &[f64], d: &[f64], s: f64) -> f64 {
        let trial: Vec<f64> = u.iter().zip(d).map(|(ui, di)| ui - s * di).collect();
        self.quotient(&trial)
    }

    /// Preconditioned projected-gradient descent from the given start;
    /// returns the normalised minimiser and its quotient, or an error if
    /// the budget runs out while the quotient is still falling.
    fn minimize(
        &self,
        start: Vec<f64>,
        tol: f64,
        max_iters: usize,
    ) -> Result<(Vec<f64>, f64), SolveError> {
        let m = self.cells();
        let q = self.e.q();
        let mut u = start;
        // Normalise to D(u) = 1 for well-scaled powers.
        let d0 = self.denominator(&u);
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(SolveError::NoConvergence(
                "the starting function has a degenerate denominator".into(),
            ));
        }
        let c = d0.powf(-1.0 / q);
        for t in u.iter_mut() {
            *t *= c;
        }

        let mut flux = vec![0.0; m];
        self.op.apply(&u, &mut flux);
        let mut j = self.numerator(&flux); // D = 1
        let mut s_init = 1.0f64;
        let mut stall = 0usize;
        let mut last_drop = f64::INFINITY;
        let mut iterations = 0usize;
        while iterations < max_iters {
            iterations += 1;
            // Gradient of J at D = 1: ∇N - (p'/q) N ∇D.
            let num = self.numerator(&flux);
            let mut g = vec![0.0; m];
            let weighted: Vec<f64> = self
                .wn
                .iter()
                .zip(&flux)
                .map(|(wi, &fi)| wi * signed_power(fi, self.pprime - 1.0))
                .collect();
            self.op_t.apply(&weighted, &mut g);
            for t in g.iter_mut() {
                *t *= self.pprime;
            }
            // (p'/q) N ∇D with ∇D_i = q wd_i ψ_q(u_i).
            let factor = self.pprime * num;
            for i in 0..m {
                g[i] -= factor * self.wd[i] * signed_power(u[i], q - 1.0);
            }
            // Precondition by the current-curvature operator
            // (Aᵀ diag(wn |Au|^(p'-2)) A)⁻¹, applied as two tridiagonal
            // solves: Aᵀ z = g, y_i = z_i / (wn_i |f_i|^(p'-2)), A d = y.
            // The flux factor keeps the preconditioned Hessian uniformly
            // bounded when p' != 2; it is floored away from zero because
            // the flux vanishes at the boundary.
            let floor = 1e-8 * flux.iter().fold(0.0f64, |acc, t| acc.max(t.abs())).max(1e-300);
            let z = self.op_t.solve(&g);
            let y: Vec<f64> = z
                .iter()
                .zip(&self.wn)
                .zip(&flux)
                .map(|((zi, wi), fi)| zi / (wi * fi.abs().max(floor).powf(self.pprime - 2.0)))
                .collect();
            let d = self.op.solve(&y);
            let gd: f64 = g.iter().zip(&d).map(|(gi, di)| gi * di).sum();
            if !(gd > 0.0 && gd.is_finite()) {
                break; // numerically stationary
            }
            // Line search on the scale-invariant quotient: one Armijo
            // backtrack to find a decreasing step, then one quadratic
            // interpolation to place the step near the 1-D minimiser —
            // first-accept alone systematically overshoots and leaves the
            // high-frequency error components essentially undamped.
            let mut s = s_init;
            let mut best: Option<(f64, f64)> = None; // (step, quotient)
            for _ in 0..60 {
                let jt = self.eval_step(&u, &d, s);
                if jt.is_finite() && jt <= j - 1e-4 * s * gd {
                    best = Some((s, jt));
                    break;
                }
                s *= 0.5;
            }
            let Some((s1, j1)) = best else {
                break; // at the numerical floor of the line search
            };
            // Fit j(s) ~ j - gd s + c s² through the slope at 0 and the
            // accepted point; its minimiser damps the stiff components.
            let c = (j1 - j + gd * s1) / (s1 * s1);
            let mut chosen = (s1, j1);
            if c > 0.0 {
                let s2 = (gd / (2.0 * c)).clamp(0.1 * s1, 4.0 * s1);
                if (s2 - s1).abs() > 1e-3 * s1 {
                    let j2 = self.eval_step(&u, &d, s2);
                    if j2.is_finite() && j2 < j1 {
                        chosen = (s2, j2);
                    }
                }
            }
            let (s, jt) = chosen;
            for (ui, di) in u.iter_mut().zip(&d) {
                *ui -= s * di;
            }
            let dt = self.denominator(&u);
            let cnorm = dt.powf(-1.0 / q);
            for t in u.iter_mut() {
                *t *= cnorm;
            }
            last_drop = j - jt;
            j = jt;
            self.op.apply(&u, &mut flux);
            if last_drop <= tol * j.abs() {
                stall += 1;
                if stall >= 5 {
                    break;
                }
            } else {
                stall = 0;
            }
            s_init = (s * 2.0).min(4.0);
        }
        if iterations >= max_iters && last_drop > 100.0 * tol * j.abs() {
            return Err(SolveError::NoConvergence(format!(
                "quotient still decreasing after {max_iters} iterations \
                 (last improvement {last_drop:.3e})"
            )));
        }
        Ok((u, j))
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&t| t < x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return *ys.last().unwrap();
    }
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Minimises the quotient with default options (grid ladder on) at the
/// given finest cell count and stagnation tolerance.
pub fn minimize_rayleigh(
    e: ExponentPair,
    w: WeightPair,
    cells: usize,
    tol: f64,
) -> Result<RayleighSolution, SolveError> {
    minimize_rayleigh_with(e, w, &RayleighOptions { cells, tol, ..RayleighOptions::default() })
}

/// Minimises the quotient and assembles the recovered profile pair.
pub fn minimize_rayleigh_with(
    e: ExponentPair,
    w: WeightPair,
    opts: &RayleighOptions,
) -> Result<RayleighSolution, SolveError> {
    if !(1e-15..=1e-6).contains(&opts.tol) {
        return Err(SolveError::NotInScope(format!(
            "tol must lie in [1e-15, 1e-6], got {}",
            opts.tol
        )));
    }
    if opts.max_iters < 10 {
        return Err(SolveError::NotInScope("max_iters must be at least 10".into()));
    }
    if opts.cells < 64 {
        return Err(SolveError::NotInScope(format!(
            "at least 64 cells are required, got {}",
            opts.cells
        )));
    }

    let levels: Vec<usize> = if opts.ladder {
        vec![opts.cells / 4, opts.cells / 2, opts.cells]
    } else {
        vec![opts.cells]
    };

    let mut refinement: Vec<(usize, f64)> = Vec::with_capacity(levels.len());
    let mut carried: Option<(Vec<f64>, Vec<f64>)> = None; // (nodes, values incl boundary)
    let mut finest: Option<(RayleighProblem, Vec<f64>, f64)> = None;
    for &cells in &levels {
        let problem = RayleighProblem::new(e, w, cells)?;
        let start: Vec<f64> = match &carried {
            Some((xs, ys)) => {
                problem.nodes[..cells].iter().map(|&r| interp(xs, ys, r)).collect()
            }
            None => problem.nodes[..cells].iter().map(|&r| 1.0 - r * r).collect(),
        };
        let (u, j) = problem.minimize(start, opts.tol, opts.max_iters)?;
        refinement.push((cells, j));
        let mut with_boundary = u.clone();
        with_boundary.push(0.0);
        carried = Some((problem.nodes.clone(), with_boundary));
        finest = Some((problem, u, j));
    }
    if opts.ladder {
        let k = refinement.len();
        let (m_mid, m_fine) = (refinement[k - 2].1, refinement[k - 1].1);
        if (m_mid - m_fine).abs() > 0.05 * m_fine.abs() {
            return Err(SolveError::GridTooCoarse { coarse: m_mid, fine: m_fine });
        }
    }

    let (problem, u, m_value) = finest.expect("at least one level was solved");
    assemble(e, w, problem, u, m_value, refinement)
}

/// Recovers `v`, fits the multiplier of the second equation, applies the
/// unit-coefficient scaling, and packages the outputs.
fn assemble(
    e: ExponentPair,
    w: WeightPair,
    problem: RayleighProblem,
    u: Vec<f64>,
    m_value: f64,
    refinement: Vec<(usize, f64)>,
) -> Result<RayleighSolution, SolveError> {
    let cells = problem.cells();
    let nodes = problem.nodes.clone();
    let q = e.q();
    let pprime = e.p_conj();
    let exponent_v = -w.a * (pprime - 1.0);

    let mut flux = vec![0.0; cells];
    problem.op.apply(&u, &mut flux);

    // Algebraic recovery v = r^(-a(p'-1)) |Δu|^(p'-2) (-Δu).
    let mut v = vec![0.0; cells];
    for i in 0..cells {
        let radial = if i == 0 {
            if w.a == 0.0 {
                1.0
            } else {
                f64::NAN // replaced by the origin extrapolation below
            }
        } else {
            nodes[i].powf(exponent_v)
        };
        v[i] = radial * signed_power(flux[i], pprime - 1.0);
    }

    // Near the origin the discrete flux has low relative accuracy when
    // the weight is singular there (u is only C^(2) with a fractional
    // modulus); replace v on r < 8/cells by an even quadratic fitted on
    // [8/cells, 24/cells], where v is accurate.
    let r_reg = 8.0 / cells as f64;
    if w.a != 0.0 {
        let lo = nodes.partition_point(|&t| t < r_reg);
        let hi = nodes.partition_point(|&t| t < 3.0 * r_reg);
        let (mut s0, mut s2, mut s4, mut sv, mut sv2) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        for i in lo..hi.min(cells) {
            let r2 = nodes[i] * nodes[i];
            s0 += 1.0;
            s2 += r2;
            s4 += r2 * r2;
            sv += v[i];
            sv2 += v[i] * r2;
        }
        let det = s0 * s4 - s2 * s2;
        if s0 < 3.0 || det.abs() <= 1e-30 {
            return Err(SolveError::NoConvergence(
                "too few nodes in the origin-extrapolation window; increase cells".into(),
            ));
        }
        let c0 = (sv * s4 - sv2 * s2) / det;
        let c2 = (s0 * sv2 - s2 * sv) / det;
        for i in 0..lo.min(cells) {
            v[i] = c0 + c2 * nodes[i] * nodes[i];
        }
    }

    // Fit the multiplier of -Δv = μ₂ r^b |u|^(q-2) u by volume-weighted
    // least squares over nodes away from both the regularised origin zone
    // and the boundary (where the recovered v loses relative accuracy).
    let mut av = vec![0.0; cells];
    problem.op.apply(&v, &mut av);
    let volume = power_weights(&nodes, e.nf() - 1.0);
    let fit_lo = 3.0 * r_reg;
    let fit_hi = 1.0 - r_reg;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..cells {
        if nodes[i] < fit_lo || nodes[i] > fit_hi {
            continue;
        }
        let t = nodes[i].powf(w.b) * signed_power(u[i], q - 1.0);
        num += volume[i] * av[i] * t;
        den += volume[i] * t * t;
    }
    if den.is_nan() || den <= 0.0 {
        return Err(SolveError::NoConvergence(
            "the multiplier fit window is empty; increase cells".into(),
        ));
    }
    let mu2 = num / den;
    let mut el_residual = 0.0f64;
    let mut el_scale = 0.0f64;
    for i in 0..cells {
        if nodes[i] < fit_lo || nodes[i] > fit_hi {
            continue;
        }
        let t = mu2 * nodes[i].powf(w.b) * signed_power(u[i], q - 1.0);
        el_residual = el_residual.max((av[i] - t).abs());
        el_scale = el_scale.max(t.abs());
    }
    if el_scale > 0.0 {
        el_residual /= el_scale;
    }

    // The pointwise recovery also degrades at the boundary: the flux
    // vanishes at r = 1, so near it the power map amplifies the flux's
    // absolute discretisation error into large relative error in v (the
    // quotient is flat to rounding under perturbations of those nodes, so
    // no descent tolerance can repair them).  Replace v on r > 1 - r_reg
    // by a least-squares extrapolation from the accurate band
    // [1 - 3 r_reg, 1 - r_reg], with v(1) = 0 built into the basis
    // {s, s²}, s = 1 - r.  The multiplier fit above is unaffected — its
    // window already ends at 1 - r_reg.
    {
        let zone = nodes.partition_point(|&t| t <= 1.0 - r_reg);
        let band = nodes.partition_point(|&t| t <= 1.0 - 3.0 * r_reg);
        let (mut s2, mut s3, mut s4, mut sv1, mut sv2) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        for i in band..zone.min(cells) {
            let s = (1.0 - nodes[i]) / r_reg;
            s2 += s * s;
            s3 += s * s * s;
            s4 += s * s * s * s;
            sv1 += v[i] * s;
            sv2 += v[i] * s * s;
        }
        let det = s2 * s4 - s3 * s3;
        if zone - band < 3 || det.abs() <= 1e-30 {
            return Err(SolveError::NoConvergence(
                "too few nodes in the boundary-extrapolation window; increase cells".into(),
            ));
        }
        let d1 = (sv1 * s4 - sv2 * s3) / det;
        let d2 = (s2 * sv2 - s3 * sv1) / det;
        for i in zone..cells {
            let s = (1.0 - nodes[i]) / r_reg;
            v[i] = d1 * s + d2 * s * s;
        }
    }

    // Unit-coefficient scaling outside the homogeneous regime; in it the
    // coefficients are the eigenvalue pair (1, μ₂) of the minimiser.
    let (scale_u, scale_v, lambda) = match e.regime() {
        Regime::Homogeneous => (1.0, 1.0, (1.0, mu2)),
        _ => {
            let (cu, cv) = unit_lambda_scaling(e, 1.0, mu2).map_err(|err| {
                SolveError::NoConvergence(format!(
                    "cannot scale the recovered pair to unit coefficients: {err}"
                ))
            })?;
            (cu, cv, (1.0, 1.0))
        }
    };

    let denominator_value = problem.denominator(&u);
    let mut u_full: Vec<f64> = u.iter().map(|&t| t * scale_u).collect();
    let mut v_full: Vec<f64> = v.iter().map(|&t| t * scale_v).collect();
    u_full.push(0.0);
    v_full.push(0.0);
    let mut profile = RadialProfile::from_samples(nodes.clone(), u_full, v_full)
        .expect("mesh nodes are strictly increasing");
    profile.central = (profile.u[0], profile.v[0]);
    profile.lambda = lambda;
    profile.method = ProfileMethod::Rayleigh;
    profile.boundary_defect = 0.0;
    profile.residual_sup = {
        // Independent finite-difference residual, measured between the two
        // regularised zones: inside the origin zone graded spacings make
        // differences of smooth values pure rounding noise, and past
        // 1 - r_reg the second component is an extrapolation rather than a
        // solution of the discrete equations.
        let start = profile.radii.partition_point(|&t| t < fit_lo);
        let end = profile.radii.partition_point(|&t| t <= fit_hi);
        if end > start && end - start >= 3 {
            let sub = RadialProfile::from_samples(
                profile.radii[start..end].to_vec(),
                profile.u[start..end].to_vec(),
                profile.v[start..end].to_vec(),
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

    let mut minimizer = u;
    minimizer.push(0.0);
    Ok(RayleighSolution {
        m_value,
        mu: (1.0, mu2),
        el_residual,
        state: RayleighState {
            radii: nodes,
            minimizer,
            quotient: m_value,
            normalization_residual: (denominator_value - 1.0).abs(),
        },
        profile,
        refinement,
        experimental_weights: w.a.min(w.b) <= -2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn e(n: u32, p: f64, q: f64) -> ExponentPair {
        ExponentPair::new(n, p, q).unwrap()
    }

    fn w(a: f64, b: f64) -> WeightPair {
        WeightPair::new(a, b).unwrap()
    }

    /// For n = 3, p = q = 2 and zero weights the quotient is the first
    /// Navier eigenvalue of the bilaplacian on the ball, known in closed
    /// form: π⁴ with radial eigenfunction sin(πr)/r.
    #[test]
    fn biharmonic_eigenvalue_anchor() {
        let sol = minimize_rayleigh(e(3, 2.0, 2.0), w(0.0, 0.0), 256, 1e-12).unwrap();
        let exact = PI.powi(4);
        assert_relative_eq!(sol.m_value, exact, max_relative = 1e-2);
        // Homogeneous regime: eigenvalue pair, second coefficient close
        // to the quotient itself for this self-adjoint case.
        assert_eq!(sol.profile.lambda.0, 1.0);
        assert_relative_eq!(sol.mu.1, exact, max_relative = 1e-2);
        assert!(!sol.experimental_weights);
        assert!(sol.state.normalization_residual <= 1e-10);
        assert!(sol.el_residual <= 1e-2, "el_residual = {}", sol.el_residual);
        // Recovered v is positive at every interior node.
        let k = sol.profile.radii.len() - 1;
        assert!(sol.profile.u[..k].iter().all(|&t| t > 0.0));
        assert!(sol.profile.v[..k].iter().all(|&t| t > 0.0));
        assert_eq!(sol.profile.u[k], 0.0);
        assert_eq!(sol.profile.boundary_defect, 0.0);
        // The minimiser should match sin(πr)/r up to normalisation: check
        // the shape through the ratio at two interior radii.
        let shape = |r: f64| (PI * r).sin() / (PI * r);
        let radii = &sol.state.radii;
        let mid = radii.partition_point(|&t| t < 0.5);
        let quarter = radii.partition_point(|&t| t < 0.25);
        let measured = sol.state.minimizer[mid] / sol.state.minimizer[quarter];
        let expected = shape(radii[mid]) / shape(radii[quarter]);
        assert_relative_eq!(measured, expected, max_relative = 1e-3);
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let problem = RayleighProblem::new(e(3, 2.0, 2.0), w(0.0, 0.0), 128).unwrap();
        let interior: Vec<f64> =
            problem.nodes()[..128].iter().map(|&r| 1.0 - r * r).collect();
        let j1 = problem.quotient(&interior);
        let scaled: Vec<f64> = interior.iter().map(|&t| 4.2 * t).collect();
        let j2 = problem.quotient(&scaled);
        assert_relative_eq!(j1, j2, max_relative = 1e-12);
        // And the quotient at a trial function bounds the minimum.
        let sol = minimize_rayleigh(e(3, 2.0, 2.0), w(0.0, 0.0), 128, 1e-12).unwrap();
        assert!(sol.m_value <= j1 * (1.0 + 1e-9));
    }

    /// Anticoercive pair with regular weights: the recovered pair must
    /// satisfy the second equation to a few percent and scale to unit
    /// coefficients.
    #[test]
    fn anticoercive_pair_is_recovered() {
        let pair = e(4, 3.0, 3.0);
        let sol = minimize_rayleigh(pair, w(0.0, 0.0), 256, 1e-12).unwrap();
        assert_eq!(sol.profile.lambda, (1.0, 1.0));
        assert!(sol.mu.1 > 0.0);
        assert!(sol.el_residual <= 2e-2, "el_residual = {}", sol.el_residual);
        let k = sol.profile.radii.len() - 1;
        assert!(sol.profile.u[..k].iter().all(|&t| t > 0.0));
        assert!(sol.profile.v[..k].iter().all(|&t| t > 0.0));
        // Quotient values per level decrease towards the fine answer and
        // stay within the stabilisation guard.
        assert_eq!(sol.refinement.len(), 3);
        let (m_mid, m_fine) = (sol.refinement[1].1, sol.refinement[2].1);
        assert!((m_mid - m_fine).abs() <= 0.05 * m_fine.abs());
    }

    /// Singular-at-origin numerator weight (a < 0 activates the graded
    /// mesh and the origin extrapolation of v).
    #[test]
    fn singular_weights_use_graded_mesh_and_stay_finite() {
        let pair = e(3, 3.0, 4.0);
        let sol = minimize_rayleigh(pair, w(-0.5, -0.5), 256, 1e-12).unwrap();
        assert!(sol.m_value.is_finite() && sol.m_value > 0.0);
        assert!(sol.profile.v.iter().all(|&t| t.is_finite()));
        assert!(sol.profile.v[0] > 0.0, "extrapolated central v must be positive");
        assert!(!sol.experimental_weights);
        // b < 0 forces the graded mesh: spacing grows away from 0.
        let h0 = sol.profile.radii[1] - sol.profile.radii[0];
        let k = sol.profile.radii.len() - 1;
        let h_last = sol.profile.radii[k] - sol.profile.radii[k - 1];
        assert!(h0 < h_last / 10.0);
    }

    #[test]
    fn scope_is_enforced() {
        // Outside E+ (critical line zero).
        assert!(matches!(
            minimize_rayleigh(e(5, 3.0, 3.0), w(-0.5, -0.5), 128, 1e-12),
            Err(SolveError::NotInScope(_))
        ));
        // Non-integrable denominator weight.
        assert!(matches!(
            minimize_rayleigh(e(3, 2.0, 2.0), w(0.0, -3.0), 128, 1e-12),
            Err(SolveError::NotInScope(_))
        ));
        // Non-integrable numerator weight: a(p'-1) >= n.
        assert!(matches!(
            minimize_rayleigh(e(3, 1.5, 10.0), w(7.0, 0.0), 128, 1e-12),
            Err(SolveError::NotInScope(_))
        ));
        assert!(matches!(
            minimize_rayleigh(e(3, 2.0, 2.0), w(0.0, 0.0), 16, 1e-12),
            Err(SolveError::NotInScope(_))
        ));
    }

    /// The experimental flag marks strongly singular weights without
    /// blocking the solve.
    #[test]
    fn strongly_singular_weights_are_flagged() {
        let pair = e(3, 3.0, 4.0);
        // E+ needs a, b > -n and (a+n)/p + (b+n)/q > n-2 = 1:
        // a = -2.25, b = 0.9: 0.25 + 0.975 = 1.225 > 1.
        let sol = minimize_rayleigh(pair, w(-2.25, 0.9), 256, 1e-12).unwrap();
        assert!(sol.experimental_weights);
        assert!(sol.m_value.is_finite() && sol.m_value > 0.0);
    }
}
