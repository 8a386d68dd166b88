//! Model data: finitely supported lattice coefficients for single-particle
//! dispersions and pair potentials, plus the derived mass bookkeeping.
//!
//! A dispersion is stored through coefficients `e(s)` on integer vectors and
//! evaluated as `Σ_s e(s) · cos(s₁p₁)cos(s₂p₂)cos(s₃p₃)`; this form is real
//! and even provided the coefficients are invariant under sign flips of the
//! components, which validation enforces.  A potential is stored through site
//! weights `w(x) ≥ 0` and its momentum kernel is
//! `v(k) = (2π)^{-3/2} Σ_x w(x) · cos(⟨k, x⟩)`, the Fourier transform of a
//! nonnegative even multiplication operator on the lattice.  Square-root
//! kernels reuse the same form with `√w(x)`.

use std::collections::BTreeMap;

use crate::error::{Result, SpectralError};
use crate::torus::{TorusGrid, Vec3};

/// `(2π)^{-3/2}`, the normalization carried by momentum-space kernels.
#[inline]
pub fn kernel_scale() -> f64 {
    (2.0 * std::f64::consts::PI).powf(-1.5)
}

/// Finitely supported real coefficients on the integer lattice Z³.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LatticeCoefficients {
    entries: BTreeMap<[i32; 3], f64>,
}

impl LatticeCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[([i32; 3], f64)]) -> Self {
        let mut c = Self::new();
        for &(s, v) in pairs {
            c.add(s, v);
        }
        c
    }

    /// Adds `v` to the coefficient at `s`; exact zeros are kept out of the map.
    pub fn add(&mut self, s: [i32; 3], v: f64) {
        let slot = self.entries.entry(s).or_insert(0.0);
        *slot += v;
        if *slot == 0.0 {
            self.entries.remove(&s);
        }
    }

    pub fn get(&self, s: [i32; 3]) -> f64 {
        self.entries.get(&s).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i32; 3], &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest coordinate magnitude over the support (sup-norm radius).
    pub fn support_radius(&self) -> i32 {
        self.entries
            .keys()
            .map(|s| s.iter().map(|c| c.abs()).max().unwrap())
            .max()
            .unwrap_or(0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut c = Self::new();
        for (&s, &v) in self.iter() {
            c.add(s, factor * v);
        }
        c
    }

    /// Entry-wise square root; fails on negative coefficients.
    pub fn sqrt(&self) -> Result<Self> {
        let mut c = Self::new();
        for (&s, &v) in self.iter() {
            if v < 0.0 {
                return Err(SpectralError::InvalidModel(format!(
                    "cannot take kernel square root: coefficient at {s:?} is {v}"
                )));
            }
            c.add(s, v.sqrt());
        }
        Ok(c)
    }

    /// Laplacian-style dispersion `3 - cos p₁ - cos p₂ - cos p₃`, with the
    /// unit entries split evenly over ±s so the stored table is symmetric.
    pub fn nearest_neighbor() -> Self {
        let mut c = Self::new();
        c.add([0, 0, 0], 3.0);
        for a in 0..3 {
            for sign in [-1i32, 1] {
                let mut s = [0i32; 3];
                s[a] = sign;
                c.add(s, -0.5);
            }
        }
        c
    }

    /// On-site (single lattice point) potential of the given strength.
    pub fn zero_range(strength: f64) -> Self {
        let mut c = Self::new();
        c.add([0, 0, 0], strength);
        c
    }

    /// Dispersion value `Σ_s e(s) ∏_a cos(s_a p_a)`.
    pub fn dispersion_value(&self, p: Vec3) -> f64 {
        let mut total = 0.0;
        for (&s, &v) in self.iter() {
            let mut term = v;
            for a in 0..3 {
                term *= (s[a] as f64 * p[a]).cos();
            }
            total += term;
        }
        total
    }

    /// Gradient of the dispersion at `p`.
    pub fn dispersion_gradient(&self, p: Vec3) -> Vec3 {
        let mut g = [0.0; 3];
        for (&s, &v) in self.iter() {
            let c: Vec<f64> = (0..3).map(|a| (s[a] as f64 * p[a]).cos()).collect();
            let d: Vec<f64> = (0..3)
                .map(|a| -(s[a] as f64) * (s[a] as f64 * p[a]).sin())
                .collect();
            for a in 0..3 {
                let mut term = v * d[a];
                for b in 0..3 {
                    if b != a {
                        term *= c[b];
                    }
                }
                g[a] += term;
            }
        }
        g
    }

    /// Hessian of the dispersion at `p`.
    pub fn dispersion_hessian(&self, p: Vec3) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (&s, &v) in self.iter() {
            let c: Vec<f64> = (0..3).map(|a| (s[a] as f64 * p[a]).cos()).collect();
            let d: Vec<f64> = (0..3)
                .map(|a| -(s[a] as f64) * (s[a] as f64 * p[a]).sin())
                .collect();
            let d2: Vec<f64> = (0..3)
                .map(|a| {
                    let sa = s[a] as f64;
                    -sa * sa * (sa * p[a]).cos()
                })
                .collect();
            for a in 0..3 {
                for b in 0..3 {
                    let mut term = v;
                    for axis in 0..3 {
                        term *= if axis == a && axis == b {
                            d2[axis]
                        } else if axis == a || axis == b {
                            d[axis]
                        } else {
                            c[axis]
                        };
                    }
                    h[a][b] += term;
                }
            }
        }
        h
    }

    /// Per-axis second moments `-Σ_s s_a² e(s)`; these are the diagonal of the
    /// Hessian at the origin.
    pub fn second_moments(&self) -> Vec3 {
        let mut m = [0.0; 3];
        for (&s, &v) in self.iter() {
            for a in 0..3 {
                m[a] -= (s[a] as f64) * (s[a] as f64) * v;
            }
        }
        m
    }

    /// Effective mass `m` with `Hessian(0) = (1/m)·I`; requires the three
    /// axis moments to agree and to be positive.
    pub fn effective_mass(&self) -> Result<f64> {
        let m2 = self.second_moments();
        let mean = (m2[0] + m2[1] + m2[2]) / 3.0;
        let tol = 1e-12 * mean.abs().max(1.0);
        for a in 0..3 {
            if (m2[a] - mean).abs() > tol {
                return Err(SpectralError::InvalidModel(format!(
                    "anisotropic curvature at the origin: axis moments {m2:?}"
                )));
            }
        }
        if mean <= 0.0 {
            return Err(SpectralError::DegenerateDispersion(mean));
        }
        Ok(1.0 / mean)
    }

    /// Momentum kernel of the site-weight potential,
    /// `(2π)^{-3/2} Σ_x w(x) cos(⟨k, x⟩)`.
    pub fn potential_value(&self, k: Vec3) -> f64 {
        let mut total = 0.0;
        for (&s, &v) in self.iter() {
            let phase = k[0] * s[0] as f64 + k[1] * s[1] as f64 + k[2] * s[2] as f64;
            total += v * phase.cos();
        }
        kernel_scale() * total
    }

    /// True when distinct support points can never alias on the dual grid of
    /// resolution `n`, so the discrete square-root kernel squares exactly to
    /// the discrete potential.
    pub fn sqrt_exact_at(&self, n: usize) -> bool {
        2 * (self.support_radius() as usize) < n
    }
}

/// One named validation check with its outcome.
#[derive(Clone, Debug)]
pub struct ValidationClause {
    pub name: &'static str,
    pub required: bool,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of validating one coefficient table.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub clauses: Vec<ValidationClause>,
}

impl ValidationReport {
    fn push(&mut self, name: &'static str, required: bool, passed: bool, detail: String) {
        self.clauses.push(ValidationClause {
            name,
            required,
            passed,
            detail,
        });
    }

    /// All clauses passed, required or not.
    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    /// All required clauses passed; advisory clauses may still fail.
    pub fn usable(&self) -> bool {
        self.clauses.iter().all(|c| c.passed || !c.required)
    }

    pub fn failures(&self) -> Vec<&ValidationClause> {
        self.clauses.iter().filter(|c| !c.passed).collect()
    }
}

/// First lattice site of the shell `|s|₁ = rad` in the canonical order,
/// used as the reference value for the radial check.
fn first_l1_site(rad: i32) -> [i32; 3] {
    l1_shell(rad).into_iter().next().unwrap_or([0, 0, 0])
}

/// All lattice sites with `|s|₁ = rad`.
fn l1_shell(rad: i32) -> Vec<[i32; 3]> {
    let mut sites = Vec::new();
    for a in -rad..=rad {
        let rb = rad - a.abs();
        for b in -rb..=rb {
            let rc = rb - b.abs();
            if rc == 0 {
                sites.push([a, b, 0]);
            } else {
                sites.push([a, b, rc]);
                sites.push([a, b, -rc]);
            }
        }
    }
    sites
}

/// Validates a dispersion table.  Required clauses: the coefficient depends
/// on the site only through its ℓ¹ norm (which implies the sign-flip
/// symmetry the cosine-product evaluation relies on), the table is a finite
/// truncation (recorded with its radius), and the sign pattern for
/// attraction-free kinetics holds — strictly negative on the unit shell,
/// nonpositive beyond it.  Advisory clauses: zero value at the origin and a
/// unique grid minimum at the origin probed on a 16³ grid.
pub fn validate_dispersion(c: &LatticeCoefficients) -> ValidationReport {
    let mut r = ValidationReport::default();

    // (i) the coefficient may depend on s only through |s|₁; every lattice
    // site sharing the ℓ¹ norm of a present entry must carry the same value
    // (absent sites count as zero).
    let mut radial_ok = true;
    let mut radial_detail = String::from("coefficients depend only on the l1 norm of the site");
    let radii: std::collections::BTreeSet<i32> = c
        .iter()
        .map(|(&s, _)| s[0].abs() + s[1].abs() + s[2].abs())
        .collect();
    'radial: for &rad in &radii {
        let reference = c.get(first_l1_site(rad));
        for site in l1_shell(rad) {
            let v = c.get(site);
            if (v - reference).abs() > 1e-12 * reference.abs().max(1.0) {
                radial_ok = false;
                radial_detail = format!(
                    "sites with |s|_1 = {rad} disagree: {:?} -> {reference} vs {site:?} -> {v}",
                    first_l1_site(rad)
                );
                break 'radial;
            }
        }
    }
    r.push("radial_in_l1_norm", true, radial_ok, radial_detail);

    // (ii) decay surrogate: the representation is a finite table by
    // construction; record the truncation radius.
    r.push(
        "finite_support",
        true,
        true,
        format!(
            "{} entries, l1 radius {}",
            c.len(),
            radii.iter().next_back().copied().unwrap_or(0)
        ),
    );

    // (iii) strictly negative coefficients on the unit shell, nonpositive
    // beyond it.
    let mut unit_ok = true;
    let mut unit_detail = String::from("all |s|_1 = 1 coefficients strictly negative");
    for site in l1_shell(1) {
        let v = c.get(site);
        if !(v < 0.0) {
            unit_ok = false;
            unit_detail = format!("coefficient at {site:?} is {v}, expected < 0");
            break;
        }
    }
    r.push("negative_at_unit_sites", true, unit_ok, unit_detail);

    let offender = c
        .iter()
        .find(|(&s, &v)| s[0].abs() + s[1].abs() + s[2].abs() > 1 && v > 0.0);
    r.push(
        "nonpositive_beyond_unit",
        true,
        offender.is_none(),
        match offender {
            Some((&s, &v)) => format!("coefficient at {s:?} is {v}, expected <= 0"),
            None => "all |s|_1 > 1 coefficients nonpositive".into(),
        },
    );

    let at_zero = c.dispersion_value([0.0; 3]);
    r.push(
        "zero_at_origin",
        false,
        at_zero.abs() <= 1e-9,
        format!("value at origin {at_zero:.6e}"),
    );

    let mut unique_min = true;
    let mut min_detail = String::from("strict minimum at the origin on the 16-point probe grid");
    if let Ok(grid) = TorusGrid::new(16) {
        for j in 0..grid.len() {
            let p = grid.point(j).coords();
            if p == [0.0; 3] {
                continue;
            }
            let diff = c.dispersion_value(p) - at_zero;
            if diff <= 1e-12 {
                unique_min = false;
                min_detail = format!("value at {p:?} exceeds origin by only {diff:.3e}");
                break;
            }
        }
    }
    r.push("unique_grid_minimum_at_origin", false, unique_min, min_detail);

    r
}

/// Validates a potential table: even symmetry (`w(-x) = w(x)`) and
/// nonnegative weights (needed for the square-root factorization).
pub fn validate_potential(c: &LatticeCoefficients) -> ValidationReport {
    let mut r = ValidationReport::default();

    let mut even_ok = true;
    let mut even_detail = String::from("weights symmetric under x -> -x");
    for (&s, &v) in c.iter() {
        let t = [-s[0], -s[1], -s[2]];
        if (c.get(t) - v).abs() > 1e-12 * v.abs().max(1.0) {
            even_ok = false;
            even_detail = format!("entry {s:?}={v} vs {t:?}={}", c.get(t));
            break;
        }
    }
    r.push("even_symmetry", true, even_ok, even_detail);

    let neg = c.iter().find(|(_, &v)| v < 0.0);
    r.push(
        "nonnegative_weights",
        true,
        neg.is_none(),
        match neg {
            Some((&s, &v)) => format!("negative weight {v} at {s:?}"),
            None => "all weights nonnegative".into(),
        },
    );

    r.push(
        "support_radius",
        false,
        true,
        format!(
            "sup-norm radius {}, l1 norm {:.6e}",
            c.support_radius(),
            c.l1_norm()
        ),
    );

    r
}

/// Index pair `(β, γ)` complementary to `α`, in cyclic order.
pub fn cyclic(alpha: usize) -> (usize, usize) {
    match alpha {
        0 => (1, 2),
        1 => (2, 0),
        2 => (0, 1),
        _ => panic!("channel index {alpha} out of range"),
    }
}

/// Mass fractions used by the coordinate changes.
///
/// For channel `α` with complementary pair `(β, γ)`, `pair_fraction[α]` holds
/// `[m_γ/(m_β+m_γ), m_β/(m_β+m_γ)]` and `fraction[α] = m_α / (m₁+m₂+m₃)`.
#[derive(Clone, Copy, Debug)]
pub struct MassRatios {
    pub masses: [f64; 3],
    pub total: f64,
    pub fraction: [f64; 3],
    pub pair_fraction: [[f64; 2]; 3],
}

impl MassRatios {
    pub fn new(masses: [f64; 3]) -> Result<Self> {
        for &m in &masses {
            if !(m.is_finite() && m > 0.0) {
                return Err(SpectralError::InvalidMass(m));
            }
        }
        let total = masses[0] + masses[1] + masses[2];
        let fraction = [masses[0] / total, masses[1] / total, masses[2] / total];
        let mut pair_fraction = [[0.0; 2]; 3];
        for alpha in 0..3 {
            let (beta, gamma) = cyclic(alpha);
            let pair = masses[beta] + masses[gamma];
            pair_fraction[alpha] = [masses[gamma] / pair, masses[beta] / pair];
        }
        Ok(MassRatios {
            masses,
            total,
            fraction,
            pair_fraction,
        })
    }
}

/// A validated three-particle model: per-particle dispersions, per-channel
/// pair potentials (channel `α` couples the pair complementary to particle
/// `α`), and the mass data derived from the dispersions.
#[derive(Clone, Debug)]
pub struct Model {
    dispersions: [LatticeCoefficients; 3],
    potentials: [LatticeCoefficients; 3],
    ratios: MassRatios,
}

impl Model {
    pub fn new(
        dispersions: [LatticeCoefficients; 3],
        potentials: [LatticeCoefficients; 3],
    ) -> Result<Self> {
        for (i, d) in dispersions.iter().enumerate() {
            let rep = validate_dispersion(d);
            if !rep.usable() {
                let names: Vec<&str> = rep
                    .failures()
                    .iter()
                    .filter(|c| c.required)
                    .map(|c| c.name)
                    .collect();
                return Err(SpectralError::InvalidModel(format!(
                    "dispersion {} failed validation: {}",
                    i + 1,
                    names.join(", ")
                )));
            }
        }
        for (i, p) in potentials.iter().enumerate() {
            let rep = validate_potential(p);
            if !rep.usable() {
                let names: Vec<&str> = rep
                    .failures()
                    .iter()
                    .filter(|c| c.required)
                    .map(|c| c.name)
                    .collect();
                return Err(SpectralError::InvalidModel(format!(
                    "potential {} failed validation: {}",
                    i + 1,
                    names.join(", ")
                )));
            }
        }
        let mut masses = [0.0; 3];
        for i in 0..3 {
            masses[i] = dispersions[i].effective_mass()?;
        }
        let ratios = MassRatios::new(masses)?;
        Ok(Model {
            dispersions,
            potentials,
            ratios,
        })
    }

    /// Three identical particles with a common dispersion and pair potential.
    pub fn identical(dispersion: LatticeCoefficients, potential: LatticeCoefficients) -> Result<Self> {
        Model::new(
            [dispersion.clone(), dispersion.clone(), dispersion],
            [potential.clone(), potential.clone(), potential],
        )
    }

    pub fn dispersion(&self, particle: usize) -> &LatticeCoefficients {
        &self.dispersions[particle]
    }

    pub fn potential(&self, channel: usize) -> &LatticeCoefficients {
        &self.potentials[channel]
    }

    pub fn masses(&self) -> [f64; 3] {
        self.ratios.masses
    }

    pub fn ratios(&self) -> &MassRatios {
        &self.ratios
    }

    /// Largest discrete pair-interaction eigenvalue bound: the l1 norm of the
    /// site weights dominates every aliased multiplier on every grid.
    pub fn potential_bound(&self) -> f64 {
        self.potentials
            .iter()
            .map(|p| p.l1_norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn nearest_neighbor_values() {
        let d = LatticeCoefficients::nearest_neighbor();
        assert!((d.dispersion_value([0.0; 3])).abs() < TOL);
        let pi = std::f64::consts::PI;
        assert!((d.dispersion_value([pi, pi, pi]) - 6.0).abs() < TOL);
        assert!((d.dispersion_value([pi / 2.0, 0.0, 0.0]) - 1.0).abs() < TOL);
        // general point: 3 - cos .3 - cos(-1.1) - cos 2.7
        let p: Vec3 = [0.3, -1.1, 2.7];
        let expect = 3.0 - p[0].cos() - p[1].cos() - p[2].cos();
        assert!((d.dispersion_value(p) - expect).abs() < TOL);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        // use an anisotropy-free but non-trivial table: nearest neighbor plus
        // a symmetric next-nearest ring
        let mut d = LatticeCoefficients::nearest_neighbor();
        for a in 0..3 {
            for sign in [-1i32, 1] {
                let mut s = [0i32; 3];
                s[a] = 2 * sign;
                d.add(s, 0.05);
            }
        }
        let p = [0.4, -0.9, 1.7];
        let h = 1e-5;
        let g = d.dispersion_gradient(p);
        let hess = d.dispersion_hessian(p);
        for a in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[a] += h;
            pm[a] -= h;
            let fd = (d.dispersion_value(pp) - d.dispersion_value(pm)) / (2.0 * h);
            assert!((g[a] - fd).abs() < 1e-8, "axis {a}: {} vs {fd}", g[a]);
            for b in 0..3 {
                let mut ppp = p;
                let mut ppm = p;
                let mut pmp = p;
                let mut pmm = p;
                ppp[a] += h;
                ppp[b] += h;
                ppm[a] += h;
                ppm[b] -= h;
                pmp[a] -= h;
                pmp[b] += h;
                pmm[a] -= h;
                pmm[b] -= h;
                let fd2 = (d.dispersion_value(ppp) - d.dispersion_value(ppm)
                    - d.dispersion_value(pmp)
                    + d.dispersion_value(pmm))
                    / (4.0 * h * h);
                assert!(
                    (hess[a][b] - fd2).abs() < 1e-5,
                    "hess[{a}][{b}]: {} vs {fd2}",
                    hess[a][b]
                );
            }
        }
    }

    #[test]
    fn effective_mass_nearest_neighbor_is_one() {
        let d = LatticeCoefficients::nearest_neighbor();
        assert!((d.effective_mass().unwrap() - 1.0).abs() < TOL);
        // scaling the table by 1/m scales the mass to m
        let d2 = d.scaled(0.5);
        assert!((d2.effective_mass().unwrap() - 2.0).abs() < TOL);
    }

    #[test]
    fn effective_mass_rejects_anisotropy_and_degeneracy() {
        let mut d = LatticeCoefficients::nearest_neighbor();
        d.add([1, 0, 0], -0.1);
        d.add([-1, 0, 0], -0.1);
        assert!(d.effective_mass().is_err());

        let flat = LatticeCoefficients::from_pairs(&[([0, 0, 0], 1.0)]);
        assert!(matches!(
            flat.effective_mass(),
            Err(SpectralError::DegenerateDispersion(_))
        ));
    }

    #[test]
    fn zero_range_kernel_is_constant() {
        let v = LatticeCoefficients::zero_range(8.0);
        let scale = kernel_scale();
        for k in [[0.0; 3], [0.3, -2.0, 1.0], [3.1, 3.1, -3.1]] {
            assert!((v.potential_value(k) - 8.0 * scale).abs() < TOL);
        }
        assert_eq!(v.support_radius(), 0);
        assert!((v.l1_norm() - 8.0).abs() < TOL);
    }

    #[test]
    fn finite_range_kernel_value() {
        // w(0)=2, w(±e₁)=1: v(k) = (2π)^{-3/2} (2 + 2 cos k₁)
        let v = LatticeCoefficients::from_pairs(&[
            ([0, 0, 0], 2.0),
            ([1, 0, 0], 1.0),
            ([-1, 0, 0], 1.0),
        ]);
        let k = [0.7, 0.2, -0.4];
        let expect = kernel_scale() * (2.0 + 2.0 * (0.7f64).cos());
        assert!((v.potential_value(k) - expect).abs() < TOL);
    }

    #[test]
    fn sqrt_kernel_and_exactness_window() {
        let v = LatticeCoefficients::zero_range(4.0);
        let s = v.sqrt().unwrap();
        assert!((s.get([0, 0, 0]) - 2.0).abs() < TOL);
        assert!(v.sqrt_exact_at(2));

        let wide = LatticeCoefficients::from_pairs(&[
            ([0, 0, 0], 1.0),
            ([2, 0, 0], 1.0),
            ([-2, 0, 0], 1.0),
        ]);
        assert!(!wide.sqrt_exact_at(4));
        assert!(wide.sqrt_exact_at(5));

        let neg = LatticeCoefficients::from_pairs(&[([0, 0, 0], -1.0)]);
        assert!(neg.sqrt().is_err());
    }

    #[test]
    fn dispersion_validation_clauses() {
        let good = validate_dispersion(&LatticeCoefficients::nearest_neighbor());
        assert!(good.all_passed(), "{:?}", good.failures());

        // unequal values on one l1 shell break radial dependence
        let mut lopsided = LatticeCoefficients::nearest_neighbor();
        lopsided.add([1, 0, 0], 0.1); // now -0.4 vs -0.5 elsewhere on the shell
        let rep = validate_dispersion(&lopsided);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.name == "radial_in_l1_norm" && !c.passed));
        assert!(!rep.usable());

        // a positive unit-shell coefficient fails the sign clause
        let mut repulsive = LatticeCoefficients::nearest_neighbor();
        repulsive.add([1, 0, 0], 1.0);
        repulsive.add([-1, 0, 0], 1.0);
        repulsive.add([0, 1, 0], 1.0);
        repulsive.add([0, -1, 0], 1.0);
        repulsive.add([0, 0, 1], 1.0);
        repulsive.add([0, 0, -1], 1.0);
        let rep = validate_dispersion(&repulsive);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.name == "negative_at_unit_sites" && !c.passed));

        // a positive coefficient past the unit shell fails the tail clause,
        // radial or not
        let mut bumpy = LatticeCoefficients::nearest_neighbor();
        for site in [
            [2, 0, 0],
            [-2, 0, 0],
            [0, 2, 0],
            [0, -2, 0],
            [0, 0, 2],
            [0, 0, -2],
            [1, 1, 0],
            [1, -1, 0],
            [-1, 1, 0],
            [-1, -1, 0],
            [1, 0, 1],
            [1, 0, -1],
            [-1, 0, 1],
            [-1, 0, -1],
            [0, 1, 1],
            [0, 1, -1],
            [0, -1, 1],
            [0, -1, -1],
        ] {
            bumpy.add(site, 0.05);
        }
        let rep = validate_dispersion(&bumpy);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.name == "nonpositive_beyond_unit" && !c.passed));

        // an empty table has no negative unit shell
        let rep = validate_dispersion(&LatticeCoefficients::new());
        assert!(!rep.usable());
    }

    #[test]
    fn potential_validation_clauses() {
        let good = validate_potential(&LatticeCoefficients::zero_range(8.0));
        assert!(good.all_passed());

        let odd = LatticeCoefficients::from_pairs(&[([1, 0, 0], 1.0)]);
        let rep = validate_potential(&odd);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.name == "even_symmetry" && !c.passed));

        let neg = LatticeCoefficients::zero_range(-2.0);
        let rep = validate_potential(&neg);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.name == "nonnegative_weights" && !c.passed));
    }

    #[test]
    fn mass_ratio_table() {
        let r = MassRatios::new([1.0, 2.0, 3.0]).unwrap();
        assert!((r.total - 6.0).abs() < TOL);
        assert!((r.fraction[0] - 1.0 / 6.0).abs() < TOL);
        // channel 0 pairs particles (1, 2) with masses 2 and 3
        assert!((r.pair_fraction[0][0] - 0.6).abs() < TOL);
        assert!((r.pair_fraction[0][1] - 0.4).abs() < TOL);
        // channel 1 pairs particles (2, 0) with masses 3 and 1
        assert!((r.pair_fraction[1][0] - 0.25).abs() < TOL);
        assert!((r.pair_fraction[1][1] - 0.75).abs() < TOL);

        assert!(MassRatios::new([1.0, -1.0, 1.0]).is_err());
        assert!(MassRatios::new([1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn model_construction_and_derived_masses() {
        let model = Model::identical(
            LatticeCoefficients::nearest_neighbor(),
            LatticeCoefficients::zero_range(8.0),
        )
        .unwrap();
        for m in model.masses() {
            assert!((m - 1.0).abs() < TOL);
        }
        assert!((model.ratios().pair_fraction[0][0] - 0.5).abs() < TOL);
        assert!((model.potential_bound() - 8.0).abs() < TOL);

        // distinct masses through scaled dispersions
        let d = LatticeCoefficients::nearest_neighbor();
        let model = Model::new(
            [d.clone(), d.scaled(0.5), d.scaled(1.0 / 3.0)],
            [
                LatticeCoefficients::zero_range(1.0),
                LatticeCoefficients::zero_range(1.0),
                LatticeCoefficients::zero_range(1.0),
            ],
        )
        .unwrap();
        let m = model.masses();
        assert!((m[0] - 1.0).abs() < TOL);
        assert!((m[1] - 2.0).abs() < TOL);
        assert!((m[2] - 3.0).abs() < 1e-9);

        // invalid input is rejected
        let bad = Model::identical(
            LatticeCoefficients::nearest_neighbor(),
            LatticeCoefficients::zero_range(-1.0),
        );
        assert!(bad.is_err());
    }
}
