//! Linear momentum coordinate changes between the three particle momenta and
//! channel coordinates (total momentum, channel spectator momentum, pair
//! relative momentum).
//!
//! Every map here acts on raw real triples and never reduces to canonical
//! torus representatives: the maps are linear over R³ and reduction does not
//! commute with them (a reduced intermediate can shift the result by
//! 2π-multiples of the mass fractions).  Callers reduce final results when
//! they need torus points.

use crate::error::{Result, SpectralError};
use crate::model::{cyclic, MassRatios};
use crate::torus::{add3, norm_inf, reduce, scale3, sub3, Vec3};

/// Largest torus distance between the summed momenta and the declared total
/// for which [`split_on_fiber`] still accepts the triple.
pub const FIBER_TOL: f64 = 1e-9;

/// Sum of the three momenta, as reals.
pub fn total_momentum(k: &[Vec3; 3]) -> Vec3 {
    add3(add3(k[0], k[1]), k[2])
}

/// Spectator momentum for channel `alpha`:
/// `p_α = l_α (k_β + k_γ) - (l_β + l_γ) k_α = l_α K - k_α`.
pub fn spectator_momentum(r: &MassRatios, alpha: usize, k: &[Vec3; 3]) -> Vec3 {
    let total = total_momentum(k);
    sub3(scale3(total, r.fraction[alpha]), k[alpha])
}

/// Pair relative momentum for channel `alpha` with `(β, γ) = cyclic(α)`:
/// `q_α = l_βγ k_β - l_γβ k_γ`.
pub fn pair_momentum(r: &MassRatios, alpha: usize, k: &[Vec3; 3]) -> Vec3 {
    let (beta, gamma) = cyclic(alpha);
    let [l_bg, l_gb] = r.pair_fraction[alpha];
    sub3(scale3(k[beta], l_bg), scale3(k[gamma], l_gb))
}

/// All three spectator and pair momenta at once.  The spectator momenta sum
/// to zero identically.
pub fn relative_momenta(r: &MassRatios, k: &[Vec3; 3]) -> ([Vec3; 3], [Vec3; 3]) {
    let mut p = [[0.0; 3]; 3];
    let mut q = [[0.0; 3]; 3];
    for alpha in 0..3 {
        p[alpha] = spectator_momentum(r, alpha, k);
        q[alpha] = pair_momentum(r, alpha, k);
    }
    (p, q)
}

/// Channel coordinates `(K, p_α, q_α)` of a momentum triple.
pub fn split(r: &MassRatios, alpha: usize, k: &[Vec3; 3]) -> (Vec3, Vec3, Vec3) {
    (
        total_momentum(k),
        spectator_momentum(r, alpha, k),
        pair_momentum(r, alpha, k),
    )
}

/// Channel coordinates `(p_α, q_α)` of a triple that is required to lie on
/// the fiber of `total`: the momenta must sum to `total` modulo 2π within
/// [`FIBER_TOL`], measured as the torus distance of the reduced difference.
pub fn split_on_fiber(
    r: &MassRatios,
    alpha: usize,
    total: Vec3,
    k: &[Vec3; 3],
) -> Result<(Vec3, Vec3)> {
    let gap = norm_inf(reduce(sub3(total_momentum(k), total)));
    if gap > FIBER_TOL {
        return Err(SpectralError::NotOnFiber(gap));
    }
    Ok((spectator_momentum(r, alpha, k), pair_momentum(r, alpha, k)))
}

/// Inverse of [`split`]: reconstructs `(k₁, k₂, k₃)` from channel
/// coordinates.  Exact over the reals:
/// `k_α = l_α K - p`, `k_β = l_β K + l_γβ p + q`, `k_γ = l_γ K + l_βγ p - q`.
pub fn merge(r: &MassRatios, alpha: usize, total: Vec3, p: Vec3, q: Vec3) -> [Vec3; 3] {
    let (beta, gamma) = cyclic(alpha);
    let [l_bg, l_gb] = r.pair_fraction[alpha];
    let mut k = [[0.0; 3]; 3];
    k[alpha] = sub3(scale3(total, r.fraction[alpha]), p);
    k[beta] = add3(
        add3(scale3(total, r.fraction[beta]), scale3(p, l_gb)),
        q,
    );
    k[gamma] = sub3(
        add3(scale3(total, r.fraction[gamma]), scale3(p, l_bg)),
        q,
    );
    k
}

/// Two-body change for the pair of channel `alpha`:
/// `(k_β, k_γ) → (k, q) = (k_β + k_γ, l_βγ k_β - l_γβ k_γ)`.
pub fn pair_split(r: &MassRatios, alpha: usize, k_beta: Vec3, k_gamma: Vec3) -> (Vec3, Vec3) {
    let [l_bg, l_gb] = r.pair_fraction[alpha];
    (
        add3(k_beta, k_gamma),
        sub3(scale3(k_beta, l_bg), scale3(k_gamma, l_gb)),
    )
}

/// Inverse of [`pair_split`]: `k_β = l_γβ k + q`, `k_γ = l_βγ k - q`.
pub fn pair_merge(r: &MassRatios, alpha: usize, k: Vec3, q: Vec3) -> (Vec3, Vec3) {
    let [l_bg, l_gb] = r.pair_fraction[alpha];
    (add3(scale3(k, l_gb), q), sub3(scale3(k, l_bg), q))
}
