//! Two-particle fiber operators at fixed total pair quasi-momentum.
//!
//! For the interacting pair `(β, γ)` of a channel, the fiber at pair momentum
//! `k` acts on functions of the relative momentum `q` as multiplication by
//! the symbol `E_k(q) = ε_β(l_γβ k + q) + ε_γ(l_βγ k - q)` minus the
//! interaction convolution.  The discretization places `q` on the shifted
//! point set `{g - l_γβ k : g ∈ grid}` — the exact image of the momentum
//! grid in relative coordinates — so the discrete fiber matrix is literally a
//! conserved-momentum block of the full two-particle grid operator: its
//! diagonal is `ε_β(g) + ε_γ(k - g)` and the interaction kernel depends only
//! on grid differences.  Sampling `q` on the unshifted grid instead would
//! change the spectrum at generic `k` and break block equivalence.
//!
//! Three independent spectral routes are provided and kept separate on
//! purpose: dense diagonalization of the fiber matrix, eigenvalue counting
//! through the rank-compressed Birman–Schwinger matrix, and a Fredholm
//! determinant evaluated by LU elimination.

use crate::error::{Result, SpectralError};
use crate::gridpot::{self, Mode};
use crate::linalg::{determinant, eigenvalues_sym, Matrix};
use crate::model::{cyclic, LatticeCoefficients, Model};
use crate::torus::{add3, norm_inf, scale3, sub3, TorusGrid, Vec3};

/// Tolerance on the gradient sup-norm at a refined band extremum.
pub const EXTREMUM_GRAD_TOL: f64 = 1e-10;

/// An interacting pair: the two dispersions, the pair potential, and the
/// mass fractions `(l_βγ, l_γβ)` of the pair.
#[derive(Clone, Debug)]
pub struct PairSystem {
    disp_beta: LatticeCoefficients,
    disp_gamma: LatticeCoefficients,
    potential: LatticeCoefficients,
    l_bg: f64,
    l_gb: f64,
}

impl PairSystem {
    pub fn new(
        disp_beta: LatticeCoefficients,
        disp_gamma: LatticeCoefficients,
        potential: LatticeCoefficients,
        l_bg: f64,
        l_gb: f64,
    ) -> Self {
        PairSystem {
            disp_beta,
            disp_gamma,
            potential,
            l_bg,
            l_gb,
        }
    }

    /// The pair complementary to particle `alpha` of a model.
    pub fn from_model(model: &Model, alpha: usize) -> Self {
        let (beta, gamma) = cyclic(alpha);
        let [l_bg, l_gb] = model.ratios().pair_fraction[alpha];
        PairSystem::new(
            model.dispersion(beta).clone(),
            model.dispersion(gamma).clone(),
            model.potential(alpha).clone(),
            l_bg,
            l_gb,
        )
    }

    pub fn potential(&self) -> &LatticeCoefficients {
        &self.potential
    }

    /// The two single-particle dispersions `(ε_β, ε_γ)` of the pair.
    pub fn dispersions(&self) -> (&LatticeCoefficients, &LatticeCoefficients) {
        (&self.disp_beta, &self.disp_gamma)
    }

    pub fn fractions(&self) -> (f64, f64) {
        (self.l_bg, self.l_gb)
    }

    /// Non-interacting fiber symbol `E_k(q)`.
    pub fn symbol(&self, k: Vec3, q: Vec3) -> f64 {
        self.disp_beta.dispersion_value(add3(scale3(k, self.l_gb), q))
            + self.disp_gamma.dispersion_value(sub3(scale3(k, self.l_bg), q))
    }

    fn symbol_gradient(&self, k: Vec3, q: Vec3) -> Vec3 {
        let gb = self
            .disp_beta
            .dispersion_gradient(add3(scale3(k, self.l_gb), q));
        let gg = self
            .disp_gamma
            .dispersion_gradient(sub3(scale3(k, self.l_bg), q));
        [gb[0] - gg[0], gb[1] - gg[1], gb[2] - gg[2]]
    }

    fn symbol_hessian(&self, k: Vec3, q: Vec3) -> [[f64; 3]; 3] {
        let hb = self
            .disp_beta
            .dispersion_hessian(add3(scale3(k, self.l_gb), q));
        let hg = self
            .disp_gamma
            .dispersion_hessian(sub3(scale3(k, self.l_bg), q));
        let mut h = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                h[a][b] = hb[a][b] + hg[a][b];
            }
        }
        h
    }

    /// Relative-momentum sample points of the discrete fiber: the grid
    /// shifted by `-l_γβ k`, as raw reals.
    pub fn fiber_points(&self, grid: &TorusGrid, k: Vec3) -> Vec<Vec3> {
        let shift = scale3(k, self.l_gb);
        grid.points()
            .iter()
            .map(|g| sub3(g.coords(), shift))
            .collect()
    }

    /// Symbol values over the discrete fiber, aligned with grid indices.
    pub fn fiber_energies(&self, grid: &TorusGrid, k: Vec3) -> Vec<f64> {
        self.fiber_points(grid, k)
            .iter()
            .map(|&q| self.symbol(k, q))
            .collect()
    }

    /// Exact interaction eigenmodes on this grid (grid-dependent only).
    pub fn interaction_modes(&self, grid: &TorusGrid) -> Vec<Mode> {
        gridpot::interaction_modes(&self.potential, grid)
    }

    /// Dense discrete fiber matrix `diag(E) - V`.
    pub fn h_matrix(&self, grid: &TorusGrid, k: Vec3) -> Matrix {
        let energies = self.fiber_energies(grid, k);
        let kern = gridpot::kernel_row(&self.potential, grid);
        let n = grid.len();
        Matrix::from_fn(n, |i, j| {
            let base = if i == j { energies[i] } else { 0.0 };
            base - kern[grid.sub_idx(i, j)]
        })
    }

    /// Route 1: sorted eigenvalues by direct dense diagonalization.
    pub fn discrete_spectrum(&self, grid: &TorusGrid, k: Vec3) -> Result<Vec<f64>> {
        eigenvalues_sym(&self.h_matrix(grid, k))
    }

    /// Dense Birman–Schwinger matrix `D^{-1/2} V D^{-1/2}` with
    /// `D = diag(E - z)`; requires `z` strictly below the fiber energies.
    pub fn birman_schwinger_matrix(
        &self,
        grid: &TorusGrid,
        k: Vec3,
        z: f64,
    ) -> Result<Matrix> {
        let energies = self.fiber_energies(grid, k);
        let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(z < lo) {
            return Err(SpectralError::OutOfDomain {
                z,
                reason: format!("not below the fiber energy range (min {lo})"),
            });
        }
        let kern = gridpot::kernel_row(&self.potential, grid);
        let scale: Vec<f64> = energies.iter().map(|e| 1.0 / (e - z).sqrt()).collect();
        let n = grid.len();
        Ok(Matrix::from_fn(n, |i, j| {
            kern[grid.sub_idx(i, j)] * scale[i] * scale[j]
        }))
    }

    /// Route 2: number of fiber eigenvalues strictly below `z`, via the
    /// rank-compressed Birman–Schwinger counting identity.
    pub fn count_below(&self, grid: &TorusGrid, k: Vec3, z: f64) -> Result<usize> {
        let energies = self.fiber_energies(grid, k);
        let modes = self.interaction_modes(grid);
        gridpot::count_levels_below(&modes, &energies, z)
    }

    /// Same count from the dense Birman–Schwinger matrix (test cross-check).
    pub fn count_below_dense_bs(&self, grid: &TorusGrid, k: Vec3, z: f64) -> Result<usize> {
        let bs = self.birman_schwinger_matrix(grid, k, z)?;
        let eig = eigenvalues_sym(&bs)?;
        Ok(eig.iter().filter(|&&t| t > 1.0).count())
    }

    /// All discrete fiber eigenvalues below the bottom of the fiber energy
    /// range, located by bisection on the counting function.
    pub fn levels_below_band(&self, grid: &TorusGrid, k: Vec3) -> Result<Vec<f64>> {
        let energies = self.fiber_energies(grid, k);
        let modes = self.interaction_modes(grid);
        let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let floor = lo - self.potential.l1_norm() - 1.0;
        gridpot::levels_below(&modes, &energies, lo, floor)
    }

    /// Route 3: Fredholm determinant `det(I - V (diag(E) - z)^{-1})`.
    ///
    /// Equal to `det(h - z) / Π_j (E_j - z)`, hence it vanishes exactly at
    /// the fiber eigenvalues away from the energy samples and tends to 1 as
    /// `z → -∞`.
    pub fn fredholm_determinant(&self, grid: &TorusGrid, k: Vec3, z: f64) -> Result<f64> {
        let energies = self.fiber_energies(grid, k);
        let span = energies
            .iter()
            .fold(1.0_f64, |acc, e| acc.max(e.abs()))
            .max(z.abs());
        for &e in &energies {
            if (e - z).abs() < 1e-12 * span {
                return Err(SpectralError::SingularDenominator(e - z));
            }
        }
        let kern = gridpot::kernel_row(&self.potential, grid);
        let n = grid.len();
        let m = Matrix::from_fn(n, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base - kern[grid.sub_idx(i, j)] / (energies[j] - z)
        });
        Ok(determinant(&m))
    }

    /// The same determinant from the rank-compressed matrix,
    /// `det(I_r - Φ(z))`; valid below the fiber energy range.
    pub fn fredholm_determinant_lowrank(
        &self,
        grid: &TorusGrid,
        k: Vec3,
        z: f64,
    ) -> Result<f64> {
        let energies = self.fiber_energies(grid, k);
        let modes = self.interaction_modes(grid);
        if modes.is_empty() {
            let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(z < lo) {
                return Err(SpectralError::OutOfDomain {
                    z,
                    reason: format!("not below the fiber energy range (min {lo})"),
                });
            }
            return Ok(1.0);
        }
        let phi = gridpot::phi_matrix(&modes, &energies, z)?;
        let r = phi.dim();
        let m = Matrix::from_fn(r, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base - phi.get(i, j)
        });
        Ok(determinant(&m))
    }

    /// Band edges `(min, max)` of the continuum fiber symbol at `k`:
    /// extrema are located on the discrete fiber of resolution `n` and then
    /// polished by a damped Newton iteration on the smooth symbol.
    pub fn band(&self, grid: &TorusGrid, k: Vec3) -> (f64, f64) {
        let points = self.fiber_points(grid, k);
        let mut best_min = (f64::INFINITY, [0.0; 3]);
        let mut best_max = (f64::NEG_INFINITY, [0.0; 3]);
        for &q in &points {
            let e = self.symbol(k, q);
            if e < best_min.0 {
                best_min = (e, q);
            }
            if e > best_max.0 {
                best_max = (e, q);
            }
        }
        let step_cap = 2.0 * std::f64::consts::PI / grid.n() as f64;
        let lo = self.refine_extremum(k, best_min.1, 1.0, step_cap).1;
        let hi = self.refine_extremum(k, best_max.1, -1.0, step_cap).1;
        (lo.min(best_min.0), hi.max(best_max.0))
    }

    /// Newton polish of a symbol extremum; `orientation` is +1 to descend to
    /// a minimum, -1 to ascend to a maximum.  Steps are capped at one grid
    /// spacing so the iteration stays in the basin the grid selected.
    fn refine_extremum(
        &self,
        k: Vec3,
        start: Vec3,
        orientation: f64,
        step_cap: f64,
    ) -> (Vec3, f64) {
        let mut q = start;
        let mut value = self.symbol(k, q);
        for _ in 0..100 {
            let g = self.symbol_gradient(k, q);
            if norm_inf(g) < EXTREMUM_GRAD_TOL {
                break;
            }
            let h = self.symbol_hessian(k, q);
            // candidate Newton step; fall back to scaled gradient step
            let mut step = solve3(h, [-g[0], -g[1], -g[2]]);
            let newton_ok = match step {
                Some(s) => {
                    // accept only descent (resp. ascent) directions
                    orientation * (s[0] * g[0] + s[1] * g[1] + s[2] * g[2]) < 0.0
                }
                None => false,
            };
            if !newton_ok {
                step = Some(scale3(g, -orientation * 0.25));
            }
            let mut s = step.unwrap();
            let sn = norm_inf(s);
            if sn > step_cap {
                s = scale3(s, step_cap / sn);
            }
            // backtracking on the oriented objective
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let cand = add3(q, scale3(s, t));
                let cv = self.symbol(k, cand);
                if orientation * (cv - value) < 0.0 {
                    q = cand;
                    value = cv;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (q, value)
    }
}

/// Outcome of comparing the full two-particle operator on the product grid
/// against the direct sum of its conserved-momentum fibers.
#[derive(Clone, Copy, Debug)]
pub struct FiberEquivalence {
    /// Dimension of the full product-basis operator.
    pub dim: usize,
    /// Number of conserved-momentum fibers (= grid size).
    pub fibers: usize,
    /// Largest absolute difference between the sorted eigenvalue multisets.
    pub worst: f64,
}

/// Largest grid resolution for which full product-basis operators are built.
pub const PRODUCT_BASIS_RESOLUTION_CAP: usize = 4;

impl PairSystem {
    /// Builds the full two-particle operator on the product basis
    /// `(k_β, k_γ) ∈ grid²` and compares its spectrum with the direct sum of
    /// the fiber spectra over all grid values of the conserved total
    /// momentum.  The shifted fiber point sets make this an exact unitary
    /// block decomposition, so the multisets agree to eigensolver accuracy.
    pub fn fiber_equivalence(&self, grid: &TorusGrid) -> Result<FiberEquivalence> {
        let npts = grid.len();
        if grid.n() > PRODUCT_BASIS_RESOLUTION_CAP {
            return Err(SpectralError::DimensionCap {
                dim: npts * npts,
                cap: PRODUCT_BASIS_RESOLUTION_CAP.pow(6),
                what: "full two-particle product-basis operator",
            });
        }
        let kern = gridpot::kernel_row(&self.potential, grid);
        let eps_beta: Vec<f64> = (0..npts)
            .map(|i| self.disp_beta.dispersion_value(grid.point(i).coords()))
            .collect();
        let eps_gamma: Vec<f64> = (0..npts)
            .map(|i| self.disp_gamma.dispersion_value(grid.point(i).coords()))
            .collect();
        let dim = npts * npts;
        let full = Matrix::from_fn(dim, |row, col| {
            let (i, j) = (row / npts, row % npts);
            let (ip, jp) = (col / npts, col % npts);
            let mut v = 0.0;
            if row == col {
                v += eps_beta[i] + eps_gamma[j];
            }
            if grid.add_idx(i, j) == grid.add_idx(ip, jp) {
                v -= kern[grid.sub_idx(i, ip)];
            }
            v
        });
        let mut full_eigs = eigenvalues_sym(&full)?;

        let mut fiber_eigs = Vec::with_capacity(dim);
        for c in 0..npts {
            let k = grid.point(c).coords();
            fiber_eigs.extend(self.discrete_spectrum(grid, k)?);
        }
        fiber_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        full_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let worst = full_eigs
            .iter()
            .zip(fiber_eigs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(FiberEquivalence {
            dim,
            fibers: npts,
            worst,
        })
    }
}

/// Direct 3×3 linear solve; `None` when the system is numerically singular.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][j];
        }
        m[i][3] = b[i];
    }
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    for c in 0..3 {
        let mut piv = c;
        for r in (c + 1)..3 {
            if m[r][c].abs() > m[piv][c].abs() {
                piv = r;
            }
        }
        if m[piv][c].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(c, piv);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..4 {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn nn_pair(mu: f64) -> PairSystem {
        let model = Model::identical(
            LatticeCoefficients::nearest_neighbor(),
            LatticeCoefficients::zero_range(mu),
        )
        .unwrap();
        PairSystem::from_model(&model, 0)
    }

    #[test]
    fn product_basis_spectrum_equals_fiber_direct_sum() {
        // unequal masses via scaled dispersions; the offset fiber point sets
        // must reproduce the full product-basis spectrum exactly
        let d = LatticeCoefficients::nearest_neighbor();
        let model = Model::new(
            [d.clone(), d.scaled(0.5), d.scaled(1.0 / 3.0)],
            [
                LatticeCoefficients::zero_range(5.0),
                LatticeCoefficients::zero_range(5.0),
                LatticeCoefficients::zero_range(5.0),
            ],
        )
        .unwrap();
        let pair = PairSystem::from_model(&model, 0);
        let grid = TorusGrid::new(3).unwrap();
        let report = pair.fiber_equivalence(&grid).unwrap();
        assert_eq!(report.dim, 729);
        assert_eq!(report.fibers, 27);
        assert!(report.worst < 1e-9, "worst deviation {:.3e}", report.worst);

        let big = TorusGrid::new(6).unwrap();
        match pair.fiber_equivalence(&big) {
            Err(SpectralError::DimensionCap { .. }) => {}
            other => panic!("expected dimension cap, got {other:?}"),
        }
    }

    #[test]
    fn symbol_for_equal_masses_at_rest_doubles_dispersion() {
        let pair = nn_pair(8.0);
        let d = LatticeCoefficients::nearest_neighbor();
        for q in [[0.0; 3], [0.4, -1.2, 2.2], [3.1, 0.0, -0.7]] {
            let expect = 2.0 * d.dispersion_value(q);
            assert!((pair.symbol([0.0; 3], q) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_fiber_at_the_corner_gives_shifted_multipliers() {
        // at k = (π,π,π) with equal masses the symbol is identically 6, so
        // the fiber spectrum is {6 - μ} ∪ {6}
        let pair = nn_pair(8.0);
        let grid = TorusGrid::new(4).unwrap();
        let pi = std::f64::consts::PI;
        let k = [pi, pi, pi];
        let energies = pair.fiber_energies(&grid, k);
        for &e in &energies {
            assert!((e - 6.0).abs() < 1e-12);
        }
        let eig = pair.discrete_spectrum(&grid, k).unwrap();
        assert!((eig[0] - (-2.0)).abs() < 1e-10);
        for &e in &eig[1..] {
            assert!((e - 6.0).abs() < 1e-10);
        }
        // counting routes agree with the explicit spectrum
        assert_eq!(pair.count_below(&grid, k, 0.0).unwrap(), 1);
        assert_eq!(pair.count_below(&grid, k, -2.5).unwrap(), 0);
        let levels = pair.levels_below_band(&grid, k).unwrap();
        assert_eq!(levels.len(), 1);
        assert!((levels[0] - (-2.0)).abs() < 1e-9);
    }

    #[test]
    fn band_edges_refine_off_grid_extrema() {
        // equal masses, k = (π/2, 0, 0): symbol 6 - √2 cos q₁ - 2cos q₂ -
        // 2cos q₃ in shifted coordinates, so the band is [2-√2, 10+√2];
        // on the n = 4 fiber the grid minimum sits strictly above the true
        // edge and Newton must walk off-grid
        let pair = nn_pair(8.0);
        let grid = TorusGrid::new(4).unwrap();
        let k = [std::f64::consts::PI / 2.0, 0.0, 0.0];
        let s2 = 2.0_f64.sqrt();
        let grid_min = pair
            .fiber_energies(&grid, k)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!(grid_min > 2.0 - s2 + 1e-3);
        let (lo, hi) = pair.band(&grid, k);
        assert!((lo - (2.0 - s2)).abs() < 1e-9, "lo = {lo}");
        assert!((hi - (10.0 + s2)).abs() < 1e-9, "hi = {hi}");

        // at rest the band is [0, 12] and the grid attains both edges
        let (lo0, hi0) = pair.band(&grid, [0.0; 3]);
        assert!(lo0.abs() < 1e-12);
        assert!((hi0 - 12.0).abs() < 1e-12);
    }

    #[test]
    fn counting_routes_agree_across_momenta_and_depths() {
        let grid = TorusGrid::new(4).unwrap();
        let pi = std::f64::consts::PI;
        for mu in [1.0, 8.0] {
            let pair = nn_pair(mu);
            for k in [[0.0; 3], [pi / 2.0, 0.0, 0.0], [pi / 2.0, -pi / 2.0, pi]] {
                let energies = pair.fiber_energies(&grid, k);
                let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
                let dense = pair.discrete_spectrum(&grid, k).unwrap();
                for j in 0..10 {
                    let z = lo - 0.02 - 0.4 * j as f64;
                    let direct = dense.iter().filter(|&&e| e < z).count();
                    let compressed = pair.count_below(&grid, k, z).unwrap();
                    let dense_bs = pair.count_below_dense_bs(&grid, k, z).unwrap();
                    assert_eq!(direct, compressed, "mu={mu} k={k:?} z={z}");
                    assert_eq!(direct, dense_bs, "mu={mu} k={k:?} z={z}");
                }
            }
        }
    }

    #[test]
    fn fredholm_determinant_properties() {
        let pair = nn_pair(8.0);
        let grid = TorusGrid::new(4).unwrap();
        let k = [0.0; 3];
        let dense = pair.discrete_spectrum(&grid, k).unwrap();
        let energies = pair.fiber_energies(&grid, k);
        let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let bound = dense[0];
        assert!(bound < lo - 1e-6, "fixture must bind below the band");

        // ratio identity: det(I - V D⁻¹) = Π (eig_i - z) / Π (E_j - z)
        let z = bound - 0.7;
        let det = pair.fredholm_determinant(&grid, k, z).unwrap();
        let mut expect = 1.0;
        for i in 0..dense.len() {
            expect *= (dense[i] - z) / (energies[i] - z);
        }
        assert!(
            (det - expect).abs() < 1e-8 * expect.abs().max(1.0),
            "{det} vs {expect}"
        );

        // vanishes at the eigenvalue: sign change across it
        let left = pair.fredholm_determinant(&grid, k, bound - 1e-4).unwrap();
        let right = pair.fredholm_determinant(&grid, k, bound + 1e-4).unwrap();
        assert!(left * right < 0.0, "{left} {right}");

        // normalization at deep z
        let deep = pair.fredholm_determinant(&grid, k, lo - 1e6).unwrap();
        assert!((deep - 1.0).abs() < 1e-4);

        // low-rank evaluation matches below the band
        for z in [bound - 0.3, bound - 2.0, lo - 50.0] {
            let a = pair.fredholm_determinant(&grid, k, z).unwrap();
            let b = pair.fredholm_determinant_lowrank(&grid, k, z).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "z={z}: {a} vs {b}");
        }

        // singular request is refused
        assert!(matches!(
            pair.fredholm_determinant(&grid, k, energies[0]),
            Err(SpectralError::SingularDenominator(_))
        ));
    }

    #[test]
    fn zero_potential_fiber_is_diagonal() {
        let model = Model::identical(
            LatticeCoefficients::nearest_neighbor(),
            LatticeCoefficients::new(),
        )
        .unwrap();
        let pair = PairSystem::from_model(&model, 0);
        let grid = TorusGrid::new(4).unwrap();
        let k = [0.3, -0.9, 1.4];
        let mut energies = pair.fiber_energies(&grid, k);
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let eig = pair.discrete_spectrum(&grid, k).unwrap();
        for (a, b) in eig.iter().zip(energies.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(pair.count_below(&grid, k, energies[0] - 0.1).unwrap(), 0);
        let det = pair
            .fredholm_determinant(&grid, k, energies[0] - 0.5)
            .unwrap();
        assert!((det - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fiber_matches_conserved_momentum_block_of_full_operator() {
        // masses (1, 2, 3); build the full two-particle operator for the
        // pair of channel 0 on grid², extract the block with conserved total
        // index, and compare against the fiber matrix at the matching total
        // momentum
        let d = LatticeCoefficients::nearest_neighbor();
        let model = Model::new(
            [d.clone(), d.scaled(0.5), d.scaled(1.0 / 3.0)],
            [
                LatticeCoefficients::zero_range(5.0),
                LatticeCoefficients::zero_range(5.0),
                LatticeCoefficients::zero_range(5.0),
            ],
        )
        .unwrap();
        let pair = PairSystem::from_model(&model, 0);
        let grid = TorusGrid::new(3).unwrap();
        let npts = grid.len();

        for total_idx in [0usize, 5, 13, 26] {
            // block basis: k_β = g_i on the grid, k_γ = total - g_i
            let total = grid.point(total_idx).coords();
            let kern = gridpot::kernel_row(pair.potential(), &grid);
            let block = Matrix::from_fn(npts, |i, j| {
                let gi = grid.point(i).coords();
                let kg = sub3(total, gi);
                let base = if i == j {
                    model.dispersion(1).dispersion_value(gi)
                        + model.dispersion(2).dispersion_value(kg)
                } else {
                    0.0
                };
                base - kern[grid.sub_idx(i, j)]
            });
            let fiber = pair.h_matrix(&grid, total);
            let mut worst = 0.0_f64;
            for i in 0..npts {
                for j in 0..npts {
                    worst = worst.max((block.get(i, j) - fiber.get(i, j)).abs());
                }
            }
            assert!(worst < 1e-12, "total_idx {total_idx}: {worst}");
        }
    }
}
