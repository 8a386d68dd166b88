//! Acceptance gate: nine verifiable claims about the toolkit, one test per
//! claim, each printing a single machine-greppable PASS/FAIL line.  Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! Tolerances are pinned next to each check, never read from configuration.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trispec_core::channel::ChannelSystem;
use trispec_core::twobody::PairSystem;
use trispec_core::{faddeev, threebody};
use trispec_core::{LatticeCoefficients, Model, TorusGrid, TorusPoint, Vec3};

/// Runs one criterion body and prints its verdict line.
fn criterion(id: u32, name: &str, body: impl FnOnce() -> Result<String, String>) {
    match body() {
        Ok(detail) => println!("ACCEPTANCE {id} PASS [{name}]: {detail}"),
        Err(msg) => {
            println!("ACCEPTANCE {id} FAIL [{name}]: {msg}");
            panic!("acceptance criterion {id} ({name}) failed: {msg}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !($cond) {
            return Err(format!($($arg)*));
        }
    };
}

fn nn_model(strength: f64) -> Model {
    Model::identical(
        LatticeCoefficients::nearest_neighbor(),
        LatticeCoefficients::zero_range(strength),
    )
    .expect("fixture model is valid")
}

/// 27 probe momenta: every combination of {-pi/2, 0, pi/2} per axis.
fn probe_momenta() -> Vec<Vec3> {
    let vals = [-PI / 2.0, 0.0, PI / 2.0];
    let mut out = Vec::with_capacity(27);
    for &x in &vals {
        for &y in &vals {
            for &z in &vals {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Coarse-grid three-body spectrum of the strong-coupling fixture at K = 0,
/// shared between the containment and scan criteria (one 4096-dim solve).
fn strong_full_spectrum() -> &'static Vec<f64> {
    static SPECTRUM: OnceLock<Vec<f64>> = OnceLock::new();
    SPECTRUM.get_or_init(|| {
        let model = nn_model(16.0);
        let grid = TorusGrid::new(4).unwrap();
        threebody::full_spectrum(&model, &grid, [0.0; 3]).expect("dense spectrum at n = 4")
    })
}

#[test]
fn criterion_1_torus_arithmetic() {
    criterion(1, "torus arithmetic", || {
        const TOL: f64 = 1e-12;
        let a = TorusPoint::new([2.0 * PI / 3.0, 3.0 * PI / 4.0, 11.0 * PI / 12.0]);
        let b = TorusPoint::new([2.0 * PI / 3.0, PI / 2.0, 5.0 * PI / 6.0]);

        let sum = a.add(b);
        let want_sum = TorusPoint::new([-2.0 * PI / 3.0, -3.0 * PI / 4.0, -PI / 4.0]);
        ensure!(
            sum.dist(want_sum) < TOL,
            "a + b = {:?}, expected {:?}",
            sum.coords(),
            want_sum.coords()
        );

        let want_twelve = TorusPoint::new([0.0, PI, PI]);
        let mut iterated = TorusPoint::ZERO;
        for _ in 0..12 {
            iterated = iterated.add(a);
        }
        ensure!(
            iterated.dist(want_twelve) < TOL,
            "12-fold sum of a = {:?}, expected {:?}",
            iterated.coords(),
            want_twelve.coords()
        );
        let scaled = a.scale(12.0);
        ensure!(
            scaled.dist(want_twelve) < TOL,
            "12 * a = {:?}, expected {:?}",
            scaled.coords(),
            want_twelve.coords()
        );

        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        let sample = |rng: &mut ChaCha8Rng| {
            TorusPoint::new([
                rng.gen_range(-4.0 * PI..4.0 * PI),
                rng.gen_range(-4.0 * PI..4.0 * PI),
                rng.gen_range(-4.0 * PI..4.0 * PI),
            ])
        };
        for trial in 0..1000 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = sample(&mut rng);
            let assoc = x.add(y).add(z).dist(x.add(y.add(z)));
            ensure!(assoc < TOL, "associativity off by {assoc:.3e} at trial {trial}");
            let comm = x.add(y).dist(y.add(x));
            ensure!(comm < TOL, "commutativity off by {comm:.3e} at trial {trial}");
        }
        Ok(format!(
            "both worked examples within {TOL:.0e}; 1000 randomized associativity + commutativity checks"
        ))
    });
}

#[test]
fn criterion_2_dispersion_minimum_and_mass() {
    criterion(2, "dispersion minimum and effective mass", || {
        let d = LatticeCoefficients::nearest_neighbor();
        let grid = TorusGrid::new(16).unwrap();

        // unique strict grid minimum at the origin (flat index 0)
        let origin = d.dispersion_value([0.0; 3]);
        for (flat, pt) in grid.points().iter().enumerate() {
            if flat == 0 {
                continue;
            }
            let v = d.dispersion_value(pt.coords());
            ensure!(
                v > origin + 1e-12,
                "grid point {flat} at {:?} has value {v}, not above the origin's {origin}",
                pt.coords()
            );
        }

        // analytic curvature = identity / mass, mass from the second moments
        let m = d.effective_mass().map_err(|e| e.to_string())?;
        let hess = d.dispersion_hessian([0.0; 3]);
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 / m } else { 0.0 };
                ensure!(
                    (hess[r][c] - want).abs() < 1e-10,
                    "H[{r}][{c}] = {}, expected {want}",
                    hess[r][c]
                );
            }
        }

        // central finite differences, h = 1e-4, relative tolerance 1e-6
        let h = 1e-4;
        let f = |p: Vec3| d.dispersion_value(p);
        let unit = |axis: usize, s: f64| -> Vec3 {
            let mut p = [0.0; 3];
            p[axis] = s * h;
            p
        };
        for r in 0..3 {
            for c in 0..3 {
                let fd = if r == c {
                    (f(unit(r, 1.0)) + f(unit(r, -1.0)) - 2.0 * f([0.0; 3])) / (h * h)
                } else {
                    let p = |sr: f64, sc: f64| {
                        let mut q = [0.0; 3];
                        q[r] = sr * h;
                        q[c] = sc * h;
                        f(q)
                    };
                    (p(1.0, 1.0) - p(1.0, -1.0) - p(-1.0, 1.0) + p(-1.0, -1.0)) / (4.0 * h * h)
                };
                let scale = hess[r][c].abs().max(1.0);
                ensure!(
                    (fd - hess[r][c]).abs() <= 1e-6 * scale,
                    "finite-difference H[{r}][{c}] = {fd}, analytic {}",
                    hess[r][c]
                );
            }
        }
        Ok(format!(
            "unique minimum at the origin on 16^3; curvature = I/m with m = {m}; FD agreement 1e-6"
        ))
    });
}

#[test]
fn criterion_3_counting_routes_agree_exactly() {
    criterion(3, "eigenvalue counting routes", || {
        let model = nn_model(8.0);
        let pair = PairSystem::from_model(&model, 0);
        let mut comparisons = 0usize;
        for n in [4usize, 6, 8] {
            let grid = TorusGrid::new(n).unwrap();
            for k in probe_momenta() {
                let dense: Vec<f64> = {
                    let mut e = pair.discrete_spectrum(&grid, k).map_err(|e| e.to_string())?;
                    e.sort_by(f64::total_cmp);
                    e
                };
                let floor = pair
                    .fiber_energies(&grid, k)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                for j in 0..20 {
                    let z = floor - 0.05 - 4.0 * j as f64 / 19.0;
                    let from_dense = dense.partition_point(|&e| e < z);
                    let from_counting =
                        pair.count_below(&grid, k, z).map_err(|e| e.to_string())?;
                    ensure!(
                        from_dense == from_counting,
                        "n = {n}, k = {k:?}, z = {z}: dense {from_dense} vs counted {from_counting}"
                    );
                    comparisons += 1;
                }
            }
        }
        ensure!(comparisons >= 1620, "only {comparisons} comparisons ran");
        Ok(format!("{comparisons} exact integer agreements, 0 mismatches"))
    });
}

#[test]
fn criterion_4_determinant_zeros_match_levels() {
    criterion(4, "determinant zeros at discrete levels", || {
        let model = nn_model(8.0);
        let pair = PairSystem::from_model(&model, 0);
        let grid = TorusGrid::new(6).unwrap();
        let mut matched = 0usize;
        for k in probe_momenta() {
            let floor = pair
                .fiber_energies(&grid, k)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let levels = pair.levels_below_band(&grid, k).map_err(|e| e.to_string())?;
            ensure!(
                !levels.is_empty(),
                "strong coupling should bind below the band at k = {k:?}"
            );
            for &level in &levels {
                let det =
                    |z: f64| pair.fredholm_determinant_lowrank(&grid, k, z).map_err(|e| e.to_string());
                let mut lo = level - 0.5;
                let mut hi = (level + 0.5).min(floor - 1e-9);
                let (mut flo, fhi) = (det(lo)?, det(hi)?);
                ensure!(
                    flo * fhi < 0.0,
                    "no sign change around the level {level} at k = {k:?}"
                );
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = det(mid)?;
                    if flo * fmid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                let zero = 0.5 * (lo + hi);
                ensure!(
                    (zero - level).abs() < 1e-8,
                    "determinant zero {zero} vs level {level} at k = {k:?}"
                );
                matched += 1;
            }
        }

        // free pair: the determinant is identically one, both routes
        let free = nn_model(0.0);
        let free_pair = PairSystem::from_model(&free, 0);
        for k in [[0.0; 3], [PI / 2.0, 0.0, -PI / 3.0]] {
            let floor = free_pair
                .fiber_energies(&grid, k)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            for dz in [0.5, 1.5, 7.0] {
                let z = floor - dz;
                let dense = free_pair
                    .fredholm_determinant(&grid, k, z)
                    .map_err(|e| e.to_string())?;
                let lowrank = free_pair
                    .fredholm_determinant_lowrank(&grid, k, z)
                    .map_err(|e| e.to_string())?;
                ensure!(dense == 1.0, "free dense determinant {dense} at z = {z}");
                ensure!(lowrank == 1.0, "free low-rank determinant {lowrank} at z = {z}");
            }
        }
        Ok(format!(
            "{matched} below-band levels matched by bisection zeros within 1e-8; free determinant identically 1"
        ))
    });
}

#[test]
fn criterion_5_count_stability_near_zero_momentum() {
    criterion(5, "below-band count stability near k = 0", || {
        let model = nn_model(8.0);
        let pair = PairSystem::from_model(&model, 0);
        let samples: [Vec3; 6] = [
            [0.0, 0.0, 0.0],
            [0.1, 0.0, 0.0],
            [0.0, 0.2, 0.0],
            [0.05, -0.05, 0.1],
            [-0.2, 0.15, 0.1],
            [0.3, 0.3, 0.3],
        ];
        let ns = [4usize, 6, 8, 10];
        let mut uniform_bound = 0usize;
        for k in samples {
            let mut counts = Vec::new();
            for &n in &ns {
                let grid = TorusGrid::new(n).unwrap();
                let count = pair
                    .levels_below_band(&grid, k)
                    .map_err(|e| e.to_string())?
                    .len();
                uniform_bound = uniform_bound.max(count);
                counts.push(count);
            }
            ensure!(
                counts[1] == counts[2] && counts[2] == counts[3],
                "counts over n = 4,6,8,10 at k = {k:?}: {counts:?} (not stable for n >= 6)"
            );
        }
        ensure!(uniform_bound <= 3, "counts reached {uniform_bound}");
        Ok(format!(
            "counts identical for n in {{6, 8, 10}} at 6 momenta near zero; uniform bound {uniform_bound}"
        ))
    });
}

#[test]
fn criterion_6_product_basis_equals_fiber_union() {
    criterion(6, "product basis versus fiber direct sum", || {
        let model = nn_model(8.0);
        let pair = PairSystem::from_model(&model, 0);
        let grid = TorusGrid::new(4).unwrap();
        let cmp = pair.fiber_equivalence(&grid).map_err(|e| e.to_string())?;
        ensure!(cmp.dim == 4096, "product dimension {}", cmp.dim);
        ensure!(cmp.fibers == 64, "fiber count {}", cmp.fibers);
        ensure!(
            cmp.worst < 1e-9,
            "worst multiset deviation {:.3e}",
            cmp.worst
        );
        Ok(format!(
            "4096-dim operator matches 64 fiber spectra, worst deviation {:.3e}",
            cmp.worst
        ))
    });
}

#[test]
fn criterion_7_channel_fiber_identity_and_interval_stability() {
    criterion(7, "channel fiber identity and interval count", || {
        let model = nn_model(8.0);
        let channel = ChannelSystem::from_model(&model, 0);
        let grid4 = TorusGrid::new(4).unwrap();
        for total in [[0.0; 3], [PI / 3.0, -PI / 4.0, PI / 7.0]] {
            let worst = channel
                .fiber_block_deviation(&grid4, total)
                .map_err(|e| e.to_string())?;
            ensure!(
                worst < 1e-10,
                "fiber identity off by {worst:.3e} at K = {total:?}"
            );
        }

        let mut counts = Vec::new();
        for n in [6usize, 8, 10] {
            let grid = TorusGrid::new(n).unwrap();
            let (union, _tol) = channel
                .branch_intervals(&grid, [0.0; 3], None)
                .map_err(|e| e.to_string())?;
            ensure!(!union.is_empty(), "empty branch at n = {n}");
            counts.push(union.count());
        }
        ensure!(
            counts[0] == counts[1] && counts[1] == counts[2],
            "branch interval counts over n = 6,8,10: {counts:?}"
        );
        Ok(format!(
            "fiber blocks match below 1e-10 at all 64 spectator points (two totals); branch count {} stable over n = 6,8,10",
            counts[0]
        ))
    });
}

#[test]
fn criterion_8_essential_spectrum_containment() {
    criterion(8, "essential-spectrum containment", || {
        let model = nn_model(16.0);
        let grid4 = TorusGrid::new(4).unwrap();
        let total = [0.0; 3];

        let full = strong_full_spectrum();
        let ess = threebody::essential_spectrum(&model, &grid4, total, None)
            .map_err(|e| e.to_string())?;
        let margin = threebody::band_sample_delta(&model, &grid4, total);
        let verdicts = threebody::oracle_compare(full, &ess, margin);
        ensure!(
            verdicts.above_union == 0 && verdicts.in_gaps == 0,
            "{} above the union, {} in gaps",
            verdicts.above_union,
            verdicts.in_gaps
        );
        ensure!(
            verdicts.accounted_fraction() == 1.0,
            "accounted fraction {}",
            verdicts.accounted_fraction()
        );
        let isolated = verdicts.isolated_below.len();
        ensure!(
            isolated >= 1 && isolated <= 8,
            "isolated set has {isolated} members"
        );

        let mut counts = Vec::new();
        for n in [6usize, 8, 10] {
            let grid = TorusGrid::new(n).unwrap();
            let ess_n = threebody::essential_spectrum(&model, &grid, total, None)
                .map_err(|e| e.to_string())?;
            counts.push(ess_n.component_count());
        }
        ensure!(
            counts[0] == counts[1] && counts[1] == counts[2],
            "union component counts over n = 6,8,10: {counts:?}"
        );

        // free case: the union is exactly the band interval
        let free = nn_model(0.0);
        let grid6 = TorusGrid::new(6).unwrap();
        let ess_free = threebody::essential_spectrum(&free, &grid6, total, None)
            .map_err(|e| e.to_string())?;
        ensure!(
            ess_free.branches.iter().all(|b| b.is_empty()),
            "free model grew channel branches"
        );
        ensure!(
            ess_free.union.intervals() == [ess_free.band],
            "free union {:?} differs from the band {:?}",
            ess_free.union.intervals(),
            ess_free.band
        );
        ensure!(
            ess_free.band.0.abs() < 1e-12 && (ess_free.band.1 - 13.5).abs() < 1e-9,
            "free band {:?}",
            ess_free.band
        );

        Ok(format!(
            "4096 eigenvalues: {} contained, {isolated} isolated below, none above or in gaps; union count {} stable over n = 6,8,10; free union equals the band",
            verdicts.contained, counts[0]
        ))
    });
}

#[test]
fn criterion_9_coupling_scan_locates_the_ground_level() {
    criterion(9, "coupling-operator scan cross-check", || {
        let model = nn_model(16.0);
        let grid = TorusGrid::new(4).unwrap();
        let total = [0.0; 3];

        let full = strong_full_spectrum();
        let ground = full[0];
        let ess = threebody::essential_spectrum(&model, &grid, total, None)
            .map_err(|e| e.to_string())?;
        ensure!(
            ground < ess.union.min().unwrap() - 1.0,
            "ground level {ground} is not isolated below the union"
        );

        let points = faddeev::scan_smallest_singular(
            &model,
            &grid,
            total,
            ground - 0.45,
            ground + 0.45,
            10,
        )
        .map_err(|e| e.to_string())?;
        let dips =
            faddeev::refine_dips(&model, &grid, total, &points, 60).map_err(|e| e.to_string())?;
        let hit = dips
            .iter()
            .find(|d| d.resolved && (d.z - ground).abs() <= 1e-4)
            .ok_or_else(|| {
                format!(
                    "no resolved dip within 1e-4 of the ground level {ground}; dips: {:?}",
                    dips.iter().map(|d| (d.z, d.sigma)).collect::<Vec<_>>()
                )
            })?;
        ensure!(hit.sigma < 1e-6, "dip depth {:.3e}", hit.sigma);

        // far below everything the coupling operator is well conditioned
        let z_far = ess.band.0 - 10.0 * model.potential_bound();
        let op = faddeev::FaddeevOperator::new(&model, &grid, total, z_far)
            .map_err(|e| e.to_string())?;
        let sigma_far = op.smallest_singular_value(1e-8, 300);
        ensure!(
            sigma_far > 0.5,
            "smallest singular value {sigma_far} at z = {z_far}"
        );

        Ok(format!(
            "dip at z = {:.9} matches the dense ground level {:.9} (depth {:.1e}); sigma = {:.3} at z = {:.1}",
            hit.z, ground, hit.sigma, sigma_far, z_far
        ))
    });
}
