//! Discrete pair interactions on a dual momentum grid.
//!
//! The interaction matrix on an n³ grid is the quadrature discretization of
//! the convolution kernel: `V[i][j] = w · (2π)^{-3/2} · v(q_i - q_j)` with
//! `w` the grid weight.  Its exact eigenvectors are the grid Fourier modes;
//! the eigenvalue attached to dual class `s` is the aliased coefficient sum
//! `Σ_{x ≡ s (mod n)} w(x)`.  Because site weights have small finite support,
//! only a handful of multipliers are nonzero, and every spectral question
//! about `diag(E) - V` below the range of `E` compresses to that small rank.

use crate::error::{Result, SpectralError};
use crate::linalg::{eigenvalues_sym, Matrix};
use crate::model::{kernel_scale, LatticeCoefficients};
use crate::torus::TorusGrid;

/// One exact eigenpair of the discrete interaction: a real orthonormal grid
/// mode and its aliased multiplier.
#[derive(Clone, Debug)]
pub struct Mode {
    pub multiplier: f64,
    pub vector: Vec<f64>,
}

/// Kernel values indexed by difference index: `row[d] = w · (2π)^{-3/2} ·
/// v(point(d))`, so the full matrix is `row[sub_idx(i, j)]`.
pub fn kernel_row(pot: &LatticeCoefficients, grid: &TorusGrid) -> Vec<f64> {
    let scale = grid.weight() * kernel_scale();
    (0..grid.len())
        .map(|d| scale * pot.potential_value(grid.point(d).coords()))
        .collect()
}

/// Dense interaction matrix on the grid.
pub fn interaction_matrix(pot: &LatticeCoefficients, grid: &TorusGrid) -> Matrix {
    let row = kernel_row(pot, grid);
    let n = grid.len();
    Matrix::from_fn(n, |i, j| row[grid.sub_idx(i, j)])
}

/// Dense square-root kernel matrix (entry-wise square root of the site
/// weights).  Squares exactly to [`interaction_matrix`] whenever distinct
/// support sites cannot alias, i.e. `pot.sqrt_exact_at(n)`.
pub fn sqrt_interaction_matrix(pot: &LatticeCoefficients, grid: &TorusGrid) -> Result<Matrix> {
    Ok(interaction_matrix(&pot.sqrt()?, grid))
}

/// Exact nonzero eigenpairs of the discrete interaction, built from the
/// aliased dual classes of the support.  Requires even, validated weights.
pub fn interaction_modes(pot: &LatticeCoefficients, grid: &TorusGrid) -> Vec<Mode> {
    let n = grid.n() as i64;
    let total = grid.len();

    // aliased multiplier per dual class
    let mut class_sum: std::collections::BTreeMap<[i64; 3], f64> = Default::default();
    for (&s, &v) in pot.iter() {
        let c = [
            (s[0] as i64).rem_euclid(n),
            (s[1] as i64).rem_euclid(n),
            (s[2] as i64).rem_euclid(n),
        ];
        *class_sum.entry(c).or_insert(0.0) += v;
    }

    let mut modes = Vec::new();
    for (&c, &mult) in &class_sum {
        if mult == 0.0 {
            continue;
        }
        let partner = [(n - c[0]) % n, (n - c[1]) % n, (n - c[2]) % n];
        if partner < c {
            continue; // handled together with its partner class
        }
        let self_paired = partner == c;
        // integer phases are exact: ⟨q_j, c⟩ = 2π (j·c mod n) / n
        let phase = |j: usize| {
            let idx = grid.unflat(j);
            let dotc =
                (idx[0] as i64 * c[0] + idx[1] as i64 * c[1] + idx[2] as i64 * c[2]).rem_euclid(n);
            2.0 * std::f64::consts::PI * dotc as f64 / n as f64
        };
        if self_paired {
            let norm = 1.0 / (total as f64).sqrt();
            let vector: Vec<f64> = (0..total).map(|j| norm * phase(j).cos()).collect();
            modes.push(Mode {
                multiplier: mult,
                vector,
            });
        } else {
            let partner_mult = class_sum.get(&partner).copied().unwrap_or(0.0);
            debug_assert!(
                (partner_mult - mult).abs() <= 1e-12 * mult.abs().max(1.0),
                "even weights must give symmetric class multipliers"
            );
            let norm = (2.0 / total as f64).sqrt();
            let cos_vec: Vec<f64> = (0..total).map(|j| norm * phase(j).cos()).collect();
            let sin_vec: Vec<f64> = (0..total).map(|j| norm * phase(j).sin()).collect();
            modes.push(Mode {
                multiplier: mult,
                vector: cos_vec,
            });
            modes.push(Mode {
                multiplier: mult,
                vector: sin_vec,
            });
        }
    }
    modes
}

/// Largest interaction eigenvalue on this grid.
pub fn max_multiplier(modes: &[Mode]) -> f64 {
    modes.iter().map(|m| m.multiplier).fold(0.0, f64::max)
}

/// Rank-compressed Birman–Schwinger-style matrix at spectral parameter `z`:
/// `Φ(z)[m][m'] = √(λ_m λ_m') Σ_j b_m[j] b_m'[j] / (E_j - z)`.
///
/// Its eigenvalues above 1 are in bijection with the eigenvalues of
/// `diag(E) - V` below `z`.  Requires `z` strictly below every `E_j`.
pub fn phi_matrix(modes: &[Mode], energies: &[f64], z: f64) -> Result<Matrix> {
    let min_e = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(z < min_e) {
        return Err(SpectralError::OutOfDomain {
            z,
            reason: format!("spectral parameter not below the energy range (min {min_e})"),
        });
    }
    let r = modes.len();
    let npts = energies.len();
    let inv: Vec<f64> = energies.iter().map(|e| 1.0 / (e - z)).collect();
    let mut phi = Matrix::zeros(r);
    for a in 0..r {
        for b in a..r {
            let va = &modes[a].vector;
            let vb = &modes[b].vector;
            let mut s = 0.0;
            for j in 0..npts {
                s += va[j] * vb[j] * inv[j];
            }
            let value = (modes[a].multiplier * modes[b].multiplier).sqrt() * s;
            phi.set(a, b, value);
            phi.set(b, a, value);
        }
    }
    Ok(phi)
}

/// Number of eigenvalues of `diag(E) - V` strictly below `z`, for `z` below
/// the energy range, computed from the compressed matrix.
pub fn count_levels_below(modes: &[Mode], energies: &[f64], z: f64) -> Result<usize> {
    if modes.is_empty() {
        // free case: no levels below the energy range
        let min_e = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(z < min_e) {
            return Err(SpectralError::OutOfDomain {
                z,
                reason: format!("spectral parameter not below the energy range (min {min_e})"),
            });
        }
        return Ok(0);
    }
    let phi = phi_matrix(modes, energies, z)?;
    let eig = eigenvalues_sym(&phi)?;
    Ok(eig.iter().filter(|&&t| t > 1.0).count())
}

/// All eigenvalues of `diag(E) - V` below `lo`, located by bisection on the
/// counting function.  `floor` must sit below every such eigenvalue (e.g.
/// `min E - max multiplier - 1`); the count at `floor` must be zero.
pub fn levels_below(
    modes: &[Mode],
    energies: &[f64],
    lo: f64,
    floor: f64,
) -> Result<Vec<f64>> {
    let scale = lo.abs().max(floor.abs()).max(1.0);
    let z_hi = lo - 1e-11 * scale;
    if floor >= z_hi {
        return Err(SpectralError::OutOfDomain {
            z: floor,
            reason: "floor does not sit below the requested level window".into(),
        });
    }
    if count_levels_below(modes, energies, floor)? != 0 {
        return Err(SpectralError::NumericalFailure(format!(
            "level search floor {floor} is not below the discrete spectrum"
        )));
    }
    let total = count_levels_below(modes, energies, z_hi)?;
    let tol = 1e-13 * scale;
    let mut levels = Vec::with_capacity(total);
    for j in 1..=total {
        let mut lo_b = floor;
        let mut hi_b = z_hi;
        for _ in 0..200 {
            if hi_b - lo_b <= tol {
                break;
            }
            let mid = 0.5 * (lo_b + hi_b);
            if count_levels_below(modes, energies, mid)? >= j {
                hi_b = mid;
            } else {
                lo_b = mid;
            }
        }
        levels.push(0.5 * (lo_b + hi_b));
    }
    Ok(levels)
}
