//! Channel-coupled resolvent system for locating discrete three-particle
//! levels.
//!
//! For a spectral parameter `z` outside the free-energy samples, a state at
//! energy `z` exists iff the coupled system `φ_α = Σ_{β≠α} T_{αβ} φ_β` has a
//! nonzero solution, where
//!
//! ```text
//! T_{αβ} = W_α V_α^{1/2} R₀(z) V_β^{1/2},    W_α = (I − V_α^{1/2} R₀(z) V_α^{1/2})⁻¹
//! ```
//!
//! `R₀` is the diagonal free resolvent on the `(k₁, k₂)` product basis and
//! `V_α^{1/2}` the positive square root of the pair-`α` interaction.  Each
//! `W_α` is block-diagonal over the conserved spectator index of its channel,
//! so it is assembled from small per-block LU factors; a singular block
//! means `z` collides with a discrete level of that channel and is reported
//! as such.
//!
//! Because every interaction has finite rank per block, the coupling
//! operator `T` factors as `U·Vᵀ` with `ρ = Σ_β N·r_β` columns (`N` grid
//! points, `r_β` interaction modes).  `(I − T)⁻¹` is then applied through the
//! Woodbury identity with a single ρ×ρ core factorization, and the smallest
//! singular value of `I − T` — whose dips along a `z` sweep mark discrete
//! levels — comes from inverse power iteration using those solves.

use crate::error::{Result, SpectralError};
use crate::gridpot::{self, Mode};
use crate::linalg::{self, Lu, Matrix};
use crate::model::Model;
use crate::threebody::total_symbol;
use crate::torus::{TorusGrid, Vec3};
use rayon::prelude::*;

/// Largest grid resolution for which the coupling system is materialized;
/// the factored columns grow as `n⁶·ρ`.
pub const COUPLING_RESOLUTION_CAP: usize = 4;

/// A dip of the smallest singular value below this threshold is treated as a
/// resolved discrete level.
pub const DIP_SIGMA: f64 = 1e-6;

/// Relative tolerance for the power iteration when only comparing singular
/// values during a sweep.
const SWEEP_SIGMA_TOL: f64 = 1e-6;
/// Relative tolerance for a finally reported singular value.
const FINAL_SIGMA_TOL: f64 = 1e-9;
/// Iteration cap for the singular-value power iteration.
const SIGMA_MAX_ITER: usize = 300;

/// Product-basis row of slot `t` inside block `b` of channel `alpha`.
/// Rows are `i·N + j`; channel 0 conserves `i`, channel 1 conserves `j`,
/// channel 2 conserves the grid sum `i ⊕ j`.
fn block_row(grid: &TorusGrid, alpha: usize, b: usize, t: usize) -> usize {
    let npts = grid.len();
    match alpha {
        0 => b * npts + t,
        1 => t * npts + b,
        _ => t * npts + grid.sub_idx(b, t),
    }
}

/// The factored operator `I − T(z)` at one spectral parameter.
pub struct FaddeevOperator {
    /// Product-basis dimension `N²`.
    dim: usize,
    /// Dimension of the coupled system, `3·dim`.
    total_dim: usize,
    z: f64,
    /// Columns of `U` (length `total_dim` each).
    u_cols: Vec<Vec<f64>>,
    /// Columns of `V`: the channel copy they live in, their product-basis
    /// rows, and their values.
    v_cols: Vec<(usize, Vec<usize>, Vec<f64>)>,
    /// LU of the Woodbury core `I_ρ − VᵀU`; `None` when the rank is zero.
    core: Option<Lu>,
}

impl FaddeevOperator {
    /// Assembles the factored coupling system at spectral parameter `z`.
    ///
    /// Errors: `DimensionCap` above the resolution cap,
    /// `SingularDenominator` when `z` collides with a free-energy sample,
    /// `ZInChannelSpectrum` when `z` collides with a discrete level of a
    /// single channel (a `W` block is singular), and `NumericalFailure` when
    /// `I − T` itself is numerically singular — i.e. `z` is a three-particle
    /// discrete level to machine precision.
    pub fn new(model: &Model, grid: &TorusGrid, total: Vec3, z: f64) -> Result<Self> {
        if grid.n() > COUPLING_RESOLUTION_CAP {
            return Err(SpectralError::DimensionCap {
                dim: grid.len() * grid.len(),
                cap: COUPLING_RESOLUTION_CAP.pow(6),
                what: "channel-coupled resolvent system",
            });
        }
        let npts = grid.len();
        let dim = npts * npts;
        let energies: Vec<f64> = (0..dim)
            .map(|r| {
                total_symbol(
                    model,
                    total,
                    grid.point(r / npts).coords(),
                    grid.point(r % npts).coords(),
                )
            })
            .collect();
        let span = energies.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - energies.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let guard = 1e-12 * span.max(1.0);
        for &e in &energies {
            if (e - z).abs() < guard {
                return Err(SpectralError::SingularDenominator(e - z));
            }
        }

        // Interaction modes and dense square-root kernels per channel.  The
        // square root is assembled from the modes, which is exact for any
        // support (aliased or not) because the mode multipliers are the
        // exact eigenvalues of the discrete interaction.
        let mut modes: [Vec<Mode>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut sqrt_mats: [Option<Matrix>; 3] = [None, None, None];
        for alpha in 0..3 {
            let m = gridpot::interaction_modes(model.potential(alpha), grid);
            if !m.is_empty() {
                let s = Matrix::from_fn(npts, |t, u| {
                    m.iter()
                        .map(|md| md.multiplier.sqrt() * md.vector[t] * md.vector[u])
                        .sum()
                });
                sqrt_mats[alpha] = Some(s);
            }
            modes[alpha] = m;
        }

        // Per-channel, per-block LU factors of I − S·diag(1/(E−z))·S.
        let mut w_lus: [Vec<Lu>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for alpha in 0..3 {
            let s = match &sqrt_mats[alpha] {
                Some(s) => s,
                None => continue,
            };
            for b in 0..npts {
                let d: Vec<f64> = (0..npts)
                    .map(|t| 1.0 / (energies[block_row(grid, alpha, b, t)] - z))
                    .collect();
                let a = Matrix::from_fn(npts, |t, u| {
                    let sandwich: f64 = (0..npts).map(|r| s.get(t, r) * d[r] * s.get(r, u)).sum();
                    if t == u {
                        1.0 - sandwich
                    } else {
                        -sandwich
                    }
                });
                let lu =
                    Lu::factor(&a).map_err(|_| SpectralError::ZInChannelSpectrum(z))?;
                w_lus[alpha].push(lu);
            }
        }

        // Factored columns.  One column per (channel β, block b, mode m).
        let total_dim = 3 * dim;
        let mut u_cols: Vec<Vec<f64>> = Vec::new();
        let mut v_cols: Vec<(usize, Vec<usize>, Vec<f64>)> = Vec::new();
        for beta in 0..3 {
            for md in &modes[beta] {
                let sq = md.multiplier.sqrt();
                for b in 0..npts {
                    let rows: Vec<usize> =
                        (0..npts).map(|t| block_row(grid, beta, b, t)).collect();
                    // y = √λ · R₀ · u  (product-basis vector)
                    let mut y = vec![0.0; dim];
                    for t in 0..npts {
                        y[rows[t]] = sq * md.vector[t] / (energies[rows[t]] - z);
                    }
                    let mut col = vec![0.0; total_dim];
                    for alpha in 0..3 {
                        if alpha == beta {
                            continue;
                        }
                        let s = match &sqrt_mats[alpha] {
                            Some(s) => s,
                            None => continue,
                        };
                        let mut xb = vec![0.0; npts];
                        let mut wb = vec![0.0; npts];
                        for bp in 0..npts {
                            let gather: Vec<f64> = (0..npts)
                                .map(|t| y[block_row(grid, alpha, bp, t)])
                                .collect();
                            for t in 0..npts {
                                xb[t] = (0..npts).map(|u| s.get(t, u) * gather[u]).sum();
                            }
                            w_lus[alpha][bp].solve(&xb, &mut wb);
                            for t in 0..npts {
                                col[alpha * dim + block_row(grid, alpha, bp, t)] = wb[t];
                            }
                        }
                    }
                    u_cols.push(col);
                    v_cols.push((beta, rows, md.vector.clone()));
                }
            }
        }

        let rho = u_cols.len();
        let core = if rho == 0 {
            None
        } else {
            let mut m = Matrix::identity(rho);
            for (r, (beta, rows, vals)) in v_cols.iter().enumerate() {
                for c in 0..rho {
                    let dot: f64 = rows
                        .iter()
                        .zip(vals.iter())
                        .map(|(&row, &v)| v * u_cols[c][beta * dim + row])
                        .sum();
                    m.set(r, c, m.get(r, c) - dot);
                }
            }
            Some(Lu::factor(&m).map_err(|_| {
                SpectralError::NumericalFailure(format!(
                    "coupling system is singular at z = {z:.12e} (discrete level hit exactly)"
                ))
            })?)
        };

        Ok(FaddeevOperator {
            dim,
            total_dim,
            z,
            u_cols,
            v_cols,
            core,
        })
    }

    /// Dimension of the coupled system (three channel copies).
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Rank of the factored coupling operator.
    pub fn rank(&self) -> usize {
        self.u_cols.len()
    }

    /// Spectral parameter this operator was assembled at.
    pub fn z(&self) -> f64 {
        self.z
    }

    fn vt_mul(&self, x: &[f64]) -> Vec<f64> {
        self.v_cols
            .iter()
            .map(|(beta, rows, vals)| {
                rows.iter()
                    .zip(vals.iter())
                    .map(|(&row, &v)| v * x[beta * self.dim + row])
                    .sum()
            })
            .collect()
    }

    fn v_mul_add(&self, c: &[f64], out: &mut [f64]) {
        for (k, (beta, rows, vals)) in self.v_cols.iter().enumerate() {
            if c[k] == 0.0 {
                continue;
            }
            for (&row, &v) in rows.iter().zip(vals.iter()) {
                out[beta * self.dim + row] += c[k] * v;
            }
        }
    }

    fn ut_mul(&self, x: &[f64]) -> Vec<f64> {
        self.u_cols
            .iter()
            .map(|col| col.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn u_mul_add(&self, c: &[f64], out: &mut [f64]) {
        for (k, col) in self.u_cols.iter().enumerate() {
            if c[k] == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(col.iter()) {
                *o += c[k] * v;
            }
        }
    }

    /// Applies `I − T` to a vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let c = self.vt_mul(x);
        let mut out = x.to_vec();
        for (k, col) in self.u_cols.iter().enumerate() {
            if c[k] == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(col.iter()) {
                *o -= c[k] * v;
            }
        }
        out
    }

    /// Solves `(I − T) x = rhs` through the Woodbury identity.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        if let Some(core) = &self.core {
            let c = self.vt_mul(rhs);
            let mut w = vec![0.0; c.len()];
            core.solve(&c, &mut w);
            self.u_mul_add(&w, &mut x);
        }
        x
    }

    /// Solves `(I − T)ᵀ x = rhs`.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        if let Some(core) = &self.core {
            let c = self.ut_mul(rhs);
            let mut w = vec![0.0; c.len()];
            core.solve_transpose(&c, &mut w);
            self.v_mul_add(&w, &mut x);
        }
        x
    }

    /// Smallest singular value of `I − T` by power iteration on the inverse.
    /// Exactly 1 for a rank-zero coupling (all potentials absent).
    pub fn smallest_singular_value(&self, rel_tol: f64, max_iter: usize) -> f64 {
        if self.u_cols.is_empty() {
            return 1.0;
        }
        linalg::smallest_singular_value(
            self.total_dim,
            rel_tol,
            max_iter,
            |b| self.solve(b),
            |b| self.solve_transpose(b),
        )
    }
}

/// One sample of a spectral-parameter sweep.
#[derive(Clone, Copy, Debug)]
pub struct ScanPoint {
    pub z: f64,
    pub sigma: f64,
}

/// A refined local minimum of the smallest singular value.
#[derive(Clone, Copy, Debug)]
pub struct Dip {
    pub z: f64,
    pub sigma: f64,
    /// Whether the dip fell below [`DIP_SIGMA`] and thus marks a level.
    pub resolved: bool,
}

/// Smallest singular value at one spectral parameter, at the given power
/// iteration tolerance.  An exactly singular coupling system reports zero.
fn sigma_at(model: &Model, grid: &TorusGrid, total: Vec3, z: f64, rel_tol: f64) -> Result<f64> {
    match FaddeevOperator::new(model, grid, total, z) {
        Ok(op) => Ok(op.smallest_singular_value(rel_tol, SIGMA_MAX_ITER)),
        // The Woodbury core only fails to factor when I − T is singular to
        // machine precision, i.e. z sits exactly on a discrete level.
        Err(SpectralError::NumericalFailure(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Sweeps the smallest singular value of `I − T(z)` over an inclusive
/// equispaced grid of spectral parameters.
pub fn scan_smallest_singular(
    model: &Model,
    grid: &TorusGrid,
    total: Vec3,
    z_lo: f64,
    z_hi: f64,
    steps: usize,
) -> Result<Vec<ScanPoint>> {
    if steps < 2 || !(z_lo < z_hi) {
        return Err(SpectralError::InvalidModel(format!(
            "sweep needs at least 2 steps and an increasing window, got [{z_lo}, {z_hi}] with {steps}"
        )));
    }
    let h = (z_hi - z_lo) / (steps - 1) as f64;
    // Samples are independent; parallel evaluation preserves output order.
    (0..steps)
        .into_par_iter()
        .map(|k| {
            let z = z_lo + h * k as f64;
            sigma_at(model, grid, total, z, SWEEP_SIGMA_TOL).map(|sigma| ScanPoint { z, sigma })
        })
        .collect()
}

/// Refines every interior local minimum of a sweep by ternary search on the
/// bracketing interval and reports the polished dips in `z` order.
pub fn refine_dips(
    model: &Model,
    grid: &TorusGrid,
    total: Vec3,
    points: &[ScanPoint],
    shrink_iters: usize,
) -> Result<Vec<Dip>> {
    let mut dips = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        if !(points[i].sigma < points[i - 1].sigma && points[i].sigma <= points[i + 1].sigma) {
            continue;
        }
        let mut lo = points[i - 1].z;
        let mut hi = points[i + 1].z;
        for _ in 0..shrink_iters {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let s1 = sigma_at(model, grid, total, m1, SWEEP_SIGMA_TOL)?;
            let s2 = sigma_at(model, grid, total, m2, SWEEP_SIGMA_TOL)?;
            if s1 <= s2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let z = 0.5 * (lo + hi);
        let sigma = sigma_at(model, grid, total, z, FINAL_SIGMA_TOL)?;
        dips.push(Dip {
            z,
            sigma,
            resolved: sigma < DIP_SIGMA,
        });
    }
    Ok(dips)
}
