//! Two-body channels of the three-particle problem, fibered over the
//! spectator momentum at fixed total quasi-momentum.
//!
//! For channel `α` the only interaction kept is the one inside the pair
//! complementary to particle `α`.  At total momentum `K` the channel
//! operator decomposes over the conserved spectator momentum `k_α`: the
//! fiber at `k_α` is the scalar shift `ε_α(k_α)` plus the two-body fiber of
//! the pair at pair momentum `K - k_α`.  Discrete fibers are indexed by the
//! spectator grid point `g`, which corresponds to the shifted spectator
//! coordinate `p = l_α K - g`; this matches the conserved-index blocks of
//! the full discrete operator exactly.
//!
//! The channel's contribution to the spectrum over all fibers is summarized
//! as a union of closed intervals: below-band discrete levels sweep out
//! branch curves as the spectator momentum varies, and the non-interacting
//! part sweeps out the full three-particle band.

use crate::error::Result;
use crate::linalg::eigenvalues_sym;
use crate::model::{LatticeCoefficients, Model};
use crate::torus::{sub3, TorusGrid, Vec3};
use crate::twobody::PairSystem;
use rayon::prelude::*;

/// Sorted union of disjoint closed intervals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalUnion {
    iv: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from arbitrary closed intervals, merging any two whose gap is
    /// at most `merge_gap`.
    pub fn new(mut intervals: Vec<(f64, f64)>, merge_gap: f64) -> Self {
        intervals.retain(|&(a, b)| b >= a);
        intervals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for (a, b) in intervals {
            match iv.last_mut() {
                Some(last) if a <= last.1 + merge_gap => last.1 = last.1.max(b),
                _ => iv.push((a, b)),
            }
        }
        IntervalUnion { iv }
    }

    /// Builds from point samples: consecutive sorted points at distance at
    /// most `gap_tol` join the same interval.
    pub fn from_points(points: &[f64], gap_tol: f64) -> Self {
        let mut p: Vec<f64> = points.iter().cloned().filter(|x| x.is_finite()).collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut iv = Vec::new();
        let mut i = 0;
        while i < p.len() {
            let start = p[i];
            let mut end = p[i];
            while i + 1 < p.len() && p[i + 1] - end <= gap_tol {
                i += 1;
                end = p[i];
            }
            iv.push((start, end));
            i += 1;
        }
        IntervalUnion { iv }
    }

    pub fn union(&self, other: &IntervalUnion, merge_gap: f64) -> Self {
        let mut all = self.iv.clone();
        all.extend_from_slice(&other.iv);
        IntervalUnion::new(all, merge_gap)
    }

    pub fn widened(&self, eps: f64) -> Self {
        IntervalUnion::new(
            self.iv.iter().map(|&(a, b)| (a - eps, b + eps)).collect(),
            0.0,
        )
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.iv
    }

    pub fn count(&self) -> usize {
        self.iv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.iv.iter().any(|&(a, b)| x >= a - tol && x <= b + tol)
    }

    pub fn min(&self) -> Option<f64> {
        self.iv.first().map(|&(a, _)| a)
    }

    pub fn max(&self) -> Option<f64> {
        self.iv.last().map(|&(_, b)| b)
    }
}

/// One interaction channel of a three-particle model.
#[derive(Clone, Debug)]
pub struct ChannelSystem {
    spectator_dispersion: LatticeCoefficients,
    pair: PairSystem,
    l_alpha: f64,
}

impl ChannelSystem {
    pub fn from_model(model: &Model, alpha: usize) -> Self {
        ChannelSystem {
            spectator_dispersion: model.dispersion(alpha).clone(),
            pair: PairSystem::from_model(model, alpha),
            l_alpha: model.ratios().fraction[alpha],
        }
    }

    pub fn pair(&self) -> &PairSystem {
        &self.pair
    }

    /// Mass fraction of the spectator particle.
    pub fn spectator_fraction(&self) -> f64 {
        self.l_alpha
    }

    /// Scalar kinetic shift of the fiber with spectator momentum `g`.
    pub fn spectator_shift(&self, g: Vec3) -> f64 {
        self.spectator_dispersion.dispersion_value(g)
    }

    /// Pair momentum of the fiber with spectator momentum `g` at total `total`.
    pub fn pair_momentum(&self, total: Vec3, g: Vec3) -> Vec3 {
        sub3(total, g)
    }

    /// Full spectrum of the discrete fiber at spectator grid index `a`.
    pub fn fiber_spectrum(
        &self,
        grid: &TorusGrid,
        total: Vec3,
        a: usize,
    ) -> Result<Vec<f64>> {
        let g = grid.point(a).coords();
        let shift = self.spectator_shift(g);
        let mut eig = self
            .pair
            .discrete_spectrum(grid, self.pair_momentum(total, g))?;
        for e in &mut eig {
            *e += shift;
        }
        Ok(eig)
    }

    /// Below-band discrete levels of the fiber at spectator grid index `a`,
    /// shifted by the spectator energy.
    pub fn fiber_levels(&self, grid: &TorusGrid, total: Vec3, a: usize) -> Result<Vec<f64>> {
        let g = grid.point(a).coords();
        let shift = self.spectator_shift(g);
        let mut levels = self
            .pair
            .levels_below_band(grid, self.pair_momentum(total, g))?;
        for e in &mut levels {
            *e += shift;
        }
        Ok(levels)
    }

    /// Below-band levels for every spectator grid point, aligned with grid
    /// indices.  Fibers are independent, so they are computed in parallel;
    /// the result order is by grid index regardless of thread count.
    pub fn branch_samples(&self, grid: &TorusGrid, total: Vec3) -> Result<Vec<Vec<f64>>> {
        (0..grid.len())
            .into_par_iter()
            .map(|a| self.fiber_levels(grid, total, a))
            .collect()
    }

    /// Default gap tolerance for joining branch samples into intervals:
    /// three times the largest level movement between lattice-adjacent
    /// spectator points (levels matched by sorted order, unmatched levels
    /// skipped), floored at 1e-9.
    pub fn default_gap_tol(grid: &TorusGrid, samples: &[Vec<f64>]) -> f64 {
        let mut spacing = 0.0_f64;
        for a in 0..grid.len() {
            for b in grid.forward_neighbors(a) {
                let (la, lb) = (&samples[a], &samples[b]);
                for i in 0..la.len().min(lb.len()) {
                    spacing = spacing.max((la[i] - lb[i]).abs());
                }
            }
        }
        (3.0 * spacing).max(1e-9)
    }

    /// Interval closure of the channel's below-band branch over the spectator
    /// grid.  Returns the union and the gap tolerance actually used.
    pub fn branch_intervals(
        &self,
        grid: &TorusGrid,
        total: Vec3,
        gap_tol: Option<f64>,
    ) -> Result<(IntervalUnion, f64)> {
        let samples = self.branch_samples(grid, total)?;
        let tol = gap_tol.unwrap_or_else(|| Self::default_gap_tol(grid, &samples));
        let points: Vec<f64> = samples.into_iter().flatten().collect();
        Ok((IntervalUnion::from_points(&points, tol), tol))
    }

    /// Envelope of the shifted pair bands over all spectator fibers, with
    /// off-grid band edges polished per fiber.  This is a discrete sampling
    /// of the full three-particle band at this total momentum.
    pub fn band_envelope(&self, grid: &TorusGrid, total: Vec3) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in 0..grid.len() {
            let g = grid.point(a).coords();
            let shift = self.spectator_shift(g);
            let (blo, bhi) = self.pair.band(grid, self.pair_momentum(total, g));
            lo = lo.min(shift + blo);
            hi = hi.max(shift + bhi);
        }
        (lo, hi)
    }

    /// Worst absolute eigenvalue deviation between the assembled fibers
    /// (spectator shift plus pair fiber) and conserved-index blocks of the
    /// channel operator built directly from the model data, over every
    /// spectator grid point.
    pub fn fiber_block_deviation(&self, grid: &TorusGrid, total: Vec3) -> Result<f64> {
        let npts = grid.len();
        let kern = crate::gridpot::kernel_row(self.pair.potential(), grid);
        let (disp_beta, disp_gamma) = self.pair.dispersions();
        let mut worst = 0.0_f64;
        for a in 0..npts {
            let g = grid.point(a).coords();
            let pair_total = sub3(total, g);
            // direct block: basis k_β on the grid, k_γ = pair_total - k_β
            let block = crate::linalg::Matrix::from_fn(npts, |i, j| {
                let gi = grid.point(i).coords();
                let base = if i == j {
                    self.spectator_dispersion.dispersion_value(g)
                        + disp_beta.dispersion_value(gi)
                        + disp_gamma.dispersion_value(sub3(pair_total, gi))
                } else {
                    0.0
                };
                base - kern[grid.sub_idx(i, j)]
            });
            let direct = eigenvalues_sym(&block)?;
            let assembled = self.fiber_spectrum(grid, total, a)?;
            for (x, y) in direct.iter().zip(assembled.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    }
}
