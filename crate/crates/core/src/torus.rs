//! Arithmetic on the momentum torus T³ = (−π, π]³ and its uniform dual grids.
//!
//! A torus element is stored through its canonical representative in
//! (−π, π]³.  Sums and real scalings are evaluated on representatives in
//! ordinary floating point and reduced modulo 2π at the end; a result within
//! `SNAP_TOL` of −π is snapped to +π so that membership in the half-open box
//! never flaps across the seam.
//!
//! The n-point grid per axis consists of the reductions of 2πj/n,
//! j = 0, …, n−1.  It is the image of the dual group of (Z_n)³, so it is
//! closed under addition and negation and those operations are carried out
//! exactly on integer indices.  The quadrature weight is (2π/n)³, which makes
//! plain Riemann sums exact for trigonometric polynomials of degree < n.

use std::f64::consts::{PI, TAU};

use crate::error::{Result, SpectralError};

/// Values within this distance of −π reduce to +π.
pub const SNAP_TOL: f64 = 1e-12;

/// Plain momentum 3-vector, not necessarily reduced.
pub type Vec3 = [f64; 3];

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: Vec3, c: f64) -> Vec3 {
    [c * a[0], c * a[1], c * a[2]]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm_inf(a: Vec3) -> f64 {
    a[0].abs().max(a[1].abs()).max(a[2].abs())
}

/// Reduces a real angle into (−π, π], snapping the −π seam to +π.
pub fn reduce_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    if y <= -PI + SNAP_TOL {
        y = PI;
    }
    y
}

/// Componentwise reduction into (−π, π]³.
pub fn reduce(v: Vec3) -> Vec3 {
    [reduce_angle(v[0]), reduce_angle(v[1]), reduce_angle(v[2])]
}

/// A point of T³ held by its canonical representative in (−π, π]³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint(Vec3);

impl TorusPoint {
    pub const ZERO: TorusPoint = TorusPoint([0.0, 0.0, 0.0]);

    pub fn new(v: Vec3) -> Self {
        TorusPoint(reduce(v))
    }

    pub fn coords(self) -> Vec3 {
        self.0
    }

    /// Group addition: representatives are added in R³, then reduced.
    pub fn add(self, other: TorusPoint) -> TorusPoint {
        TorusPoint::new(add3(self.0, other.0))
    }

    pub fn sub(self, other: TorusPoint) -> TorusPoint {
        TorusPoint::new(sub3(self.0, other.0))
    }

    /// Scaling by an arbitrary real, applied to the canonical representative.
    pub fn scale(self, c: f64) -> TorusPoint {
        TorusPoint::new(scale3(self.0, c))
    }

    pub fn neg(self) -> TorusPoint {
        self.scale(-1.0)
    }

    /// Sup-norm distance on the torus: componentwise minimal gap mod 2π.
    pub fn dist(self, other: TorusPoint) -> f64 {
        norm_inf(reduce(sub3(self.0, other.0)))
    }
}

/// Uniform dual-group grid on T³: the reductions of 2πj/n per axis.
#[derive(Clone, Debug)]
pub struct TorusGrid {
    n: usize,
    axis: Vec<f64>,
    points: Vec<TorusPoint>,
    weight: f64,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(SpectralError::InvalidResolution(n));
        }
        let axis: Vec<f64> = (0..n)
            .map(|j| reduce_angle(TAU * j as f64 / n as f64))
            .collect();
        let mut points = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    points.push(TorusPoint([axis[i], axis[j], axis[k]]));
                }
            }
        }
        let h = TAU / n as f64;
        Ok(TorusGrid {
            n,
            axis,
            points,
            weight: h * h * h,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, n³.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature weight (2π/n)³.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn point(&self, flat: usize) -> TorusPoint {
        self.points[flat]
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn axis_value(&self, j: usize) -> f64 {
        self.axis[j]
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n + idx[1]) * self.n + idx[2]
    }

    pub fn unflat(&self, flat: usize) -> [usize; 3] {
        let k = flat % self.n;
        let j = (flat / self.n) % self.n;
        let i = flat / (self.n * self.n);
        [i, j, k]
    }

    /// Index-exact grid addition: point(a) ⊕ point(b) = point(add_idx(a, b)).
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let ia = self.unflat(a);
        let ib = self.unflat(b);
        self.flat([
            (ia[0] + ib[0]) % self.n,
            (ia[1] + ib[1]) % self.n,
            (ia[2] + ib[2]) % self.n,
        ])
    }

    /// Index-exact grid subtraction.
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        let ia = self.unflat(a);
        let ib = self.unflat(b);
        self.flat([
            (ia[0] + self.n - ib[0]) % self.n,
            (ia[1] + self.n - ib[1]) % self.n,
            (ia[2] + self.n - ib[2]) % self.n,
        ])
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let ia = self.unflat(a);
        self.flat([
            (self.n - ia[0]) % self.n,
            (self.n - ia[1]) % self.n,
            (self.n - ia[2]) % self.n,
        ])
    }

    /// Forward lattice neighbours (+1 step per axis) of a flat index.
    pub fn forward_neighbors(&self, flat: usize) -> [usize; 3] {
        let i = self.unflat(flat);
        [
            self.flat([(i[0] + 1) % self.n, i[1], i[2]]),
            self.flat([i[0], (i[1] + 1) % self.n, i[2]]),
            self.flat([i[0], i[1], (i[2] + 1) % self.n]),
        ]
    }
}
