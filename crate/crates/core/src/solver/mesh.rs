//! Grid and linear-algebra building blocks for the variational solver:
//! radial meshes on `[0, 1]`, a conservative finite-volume discretisation
//! of the radial Laplacian, tridiagonal (Thomas) solves, and quadrature
//! weights that integrate `r^s · (piecewise linear)` exactly.

/// Node set on `[0, 1]` with `nodes[0] = 0` and `nodes.last() = 1`.
pub(crate) struct Mesh {
    pub nodes: Vec<f64>,
}

impl Mesh {
    pub fn uniform(cells: usize) -> Self {
        assert!(cells >= 2);
        let nodes = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        Mesh { nodes }
    }

    /// Geometrically graded mesh, finest at the origin: spacings grow by
    /// the given ratio per cell until they reach the uniform size, then
    /// stay constant.  Used when the coefficients are singular at `r = 0`
    /// and the integrands need extra resolution there.
    pub fn graded(cells: usize, ratio: f64) -> Self {
        assert!(cells >= 2 && ratio > 1.0);
        let mut spacing = Vec::with_capacity(cells);
        let mut s = 1.0;
        for _ in 0..cells {
            spacing.push(s);
            let grown = s * ratio;
            // Cap the growth once a cell would exceed the uniform size
            // (in pre-normalisation units the uniform size is unknown, so
            // cap against a fixed multiple of the first cell instead:
            // ratio^k plateaus once k·ln(ratio) ≈ ln(cells)).
            s = grown.min(cells as f64);
        }
        let total: f64 = spacing.iter().sum();
        let mut nodes = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for (i, ds) in spacing.iter().enumerate() {
            acc += ds / total;
            nodes.push(if i + 1 == cells { 1.0 } else { acc });
        }
        Mesh { nodes }
    }

    /// Mesh choice for the weight pair: uniform when both integrand
    /// weights are regular at the origin (`a <= 0` keeps the numerator
    /// weight exponent at least `n - 1`, `b >= 0` does the same for the
    /// denominator), otherwise graded towards the origin.
    pub fn for_weights(cells: usize, a: f64, b: f64) -> Self {
        if a <= 0.0 && b >= 0.0 {
            Mesh::uniform(cells)
        } else {
            Mesh::graded(cells, 1.05)
        }
    }
}

/// Tridiagonal matrix in banded storage: row `i` is
/// `(lo[i], di[i], up[i])`, with `lo[0]` and `up[last]` unused.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    pub lo: Vec<f64>,
    pub di: Vec<f64>,
    pub up: Vec<f64>,
}

impl Tridiag {
    pub fn len(&self) -> usize {
        self.di.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.len();
        debug_assert_eq!(x.len(), m);
        for i in 0..m {
            let mut acc = self.di[i] * x[i];
            if i > 0 {
                acc += self.lo[i] * x[i - 1];
            }
            if i + 1 < m {
                acc += self.up[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    pub fn transpose(&self) -> Tridiag {
        let m = self.len();
        let mut lo = vec![0.0; m];
        let mut up = vec![0.0; m];
        // A^T[i+1][i] = A[i][i+1], A^T[i][i+1] = A[i+1][i].
        lo[1..m].copy_from_slice(&self.up[..m - 1]);
        up[..m - 1].copy_from_slice(&self.lo[1..m]);
        Tridiag { lo, di: self.di.clone(), up }
    }

    /// Thomas algorithm without pivoting; the matrices used here are
    /// strictly diagonally dominant up to boundary rows, where the
    /// elimination stays well conditioned.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.len();
        debug_assert_eq!(rhs.len(), m);
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = self.up[0] / self.di[0];
        d[0] = rhs[0] / self.di[0];
        for i in 1..m {
            let denom = self.di[i] - self.lo[i] * c[i - 1];
            if i + 1 < m {
                c[i] = self.up[i] / denom;
            }
            d[i] = (rhs[i] - self.lo[i] * d[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }
}

/// Conservative finite-volume discretisation of `u ↦ -Δu` for radial
/// functions on the given nodes, with a homogeneous Dirichlet condition
/// at the last node (which is eliminated: the operator has one row per
/// node `0..N-1` and reads `u` at those nodes only).
///
/// Fluxes are evaluated at cell interfaces `m_i = (r_{i-1} + r_i)/2` with
/// surface factor `m_i^(n-1)`, and each row is normalised by the cell
/// volume `∫ r^(n-1) dr`.  The scheme is exact for quadratics (including
/// the centre row) and second-order accurate on smoothly graded meshes.
pub(crate) fn neg_laplacian(nodes: &[f64], n: u32) -> Tridiag {
    let nn = nodes.len() - 1; // cells; rows 0..nn-1
    let dim = f64::from(n);
    let mut lo = vec![0.0; nn];
    let mut di = vec![0.0; nn];
    let mut up = vec![0.0; nn];
    let mid = |i: usize| 0.5 * (nodes[i - 1] + nodes[i]);
    for i in 0..nn {
        let m_hi = mid(i + 1);
        let h_hi = nodes[i + 1] - nodes[i];
        let flux_hi = m_hi.powi(i32::try_from(n).expect("small dimension") - 1) / h_hi;
        let (m_lo_pow, h_lo, vol_lo) = if i == 0 {
            (0.0, 1.0, 0.0)
        } else {
            let m_lo = mid(i);
            (
                m_lo.powi(i32::try_from(n).expect("small dimension") - 1),
                nodes[i] - nodes[i - 1],
                m_lo.powi(i32::try_from(n).expect("small dimension")),
            )
        };
        let volume = (m_hi.powi(i32::try_from(n).expect("small dimension")) - vol_lo) / dim;
        let flux_lo = m_lo_pow / h_lo;
        // -(F_{i+1/2} - F_{i-1/2}) / volume with F = m^(n-1) Δu / h.
        up[i] = -flux_hi / volume;
        di[i] = (flux_hi + flux_lo) / volume;
        if i > 0 {
            lo[i] = -flux_lo / volume;
        }
    }
    Tridiag { lo, di, up }
}

/// Quadrature weights `w_i` with `Σ w_i g(r_i) = ∫₀¹ r^s g(r) dr` exactly
/// for piecewise-linear `g` on the nodes.  Requires `s > -1`; the moments
/// `∫ r^(s+k) dr` of each cell are evaluated in closed form, so the
/// weights stay accurate (and positive) for strongly singular `s`.
pub(crate) fn power_weights(nodes: &[f64], s: f64) -> Vec<f64> {
    assert!(s > -1.0, "the weight r^{s} is not integrable at 0");
    let mut w = vec![0.0; nodes.len()];
    for i in 0..nodes.len() - 1 {
        let (r1, r2) = (nodes[i], nodes[i + 1]);
        let h = r2 - r1;
        let p0 = (r2.powf(s + 1.0) - r1.powf(s + 1.0)) / (s + 1.0);
        let p1 = (r2.powf(s + 2.0) - r1.powf(s + 2.0)) / (s + 2.0);
        // ∫ r^s (r2 - r)/h dr and ∫ r^s (r - r1)/h dr over [r1, r2].
        w[i] += (r2 * p0 - p1) / h;
        w[i + 1] += (p1 - r1 * p0) / h;
    }
    w
}
