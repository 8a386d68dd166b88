//! Dense linear algebra kept in-repo for reproducibility.
//!
//! Symmetric eigenvalues come from a cyclic Jacobi sweep for small matrices
//! and from Householder tridiagonalization followed by implicit-shift QL for
//! large ones; both are deterministic.  Determinants and linear solves use a
//! row-pivoted LU factorization with the permutation sign tracked explicitly.

use crate::error::{Result, SpectralError};

/// Jacobi is used up to this dimension, the tridiagonal path above it.
pub const JACOBI_DIM_LIMIT: usize = 256;

/// Convergence threshold for Jacobi: off-diagonal Frobenius norm relative to
/// the full Frobenius norm of the input.
pub const JACOBI_TOL: f64 = 1e-12;

/// Dense square matrix, row-major.
#[derive(Clone, Debug)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            y[i] = dot(self.row(i), x);
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sorted eigenvalues of a symmetric matrix; method chosen by dimension.
pub fn eigenvalues_sym(m: &Matrix) -> Result<Vec<f64>> {
    if m.dim() <= JACOBI_DIM_LIMIT {
        Ok(jacobi_eigen(m, false)?.0)
    } else {
        tridiag_eigenvalues(m)
    }
}

/// Cyclic Jacobi rotations in fixed row-major order.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `JACOBI_TOL` times the Frobenius norm of the input.  Returns sorted
/// eigenvalues and, when requested, the orthogonal eigenvector matrix with
/// columns matching the sorted order.
pub fn jacobi_eigen(m: &Matrix, with_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = if with_vectors {
        Some(Matrix::identity(n))
    } else {
        None
    };
    let anorm = m.frobenius();
    if n == 1 {
        return Ok((vec![m.get(0, 0)], v));
    }
    let target = JACOBI_TOL * anorm;

    let mut converged = anorm == 0.0;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // entries at the rounding floor cannot move eigenvalues;
                // zero them instead of thrashing rotations
                if apq.abs() <= f64::EPSILON * (a.get(p, p).abs() + a.get(q, q).abs()).max(anorm * 1e-3)
                {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        let np = arp - s * (arq + tau * arp);
                        let nq = arq + s * (arp - tau * arq);
                        a.set(r, p, np);
                        a.set(p, r, np);
                        a.set(r, q, nq);
                        a.set(q, r, nq);
                    }
                }
                if let Some(vm) = v.as_mut() {
                    for r in 0..n {
                        let vrp = vm.get(r, p);
                        let vrq = vm.get(r, q);
                        vm.set(r, p, vrp - s * (vrq + tau * vrp));
                        vm.set(r, q, vrq + s * (vrp - tau * vrq));
                    }
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() > target {
            return Err(SpectralError::NumericalFailure(format!(
                "jacobi failed to converge: off-diagonal {:.3e} vs target {:.3e}",
                off.sqrt(),
                target
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eig: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let vecs = v.map(|vm| Matrix::from_fn(n, |r, c| vm.get(r, order[c])));
    Ok((eig, vecs))
}

/// Householder reduction to tridiagonal form; eigenvectors are not
/// accumulated, which is what the large fiber matrices need.
fn tridiagonalize(a: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut d = vec![0.0; n];
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut z = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let mut q = 0.0;
        for i in (k + 1)..n {
            let x = a.get(i, k);
            q += x * x;
        }
        let akk1 = a.get(k + 1, k);
        if q == 0.0 {
            d[k] = a.get(k, k);
            sub[k] = akk1;
            continue;
        }
        let alpha = -q.sqrt().copysign(if akk1 == 0.0 { 1.0 } else { akk1 });
        let rsq = alpha * alpha - alpha * akk1;
        v[k + 1] = akk1 - alpha;
        for i in (k + 2)..n {
            v[i] = a.get(i, k);
        }
        // u = A v / rsq on the trailing block, full rows for contiguity
        for j in (k + 1)..n {
            let row = a.row(j);
            let mut s = 0.0;
            for i in (k + 1)..n {
                s += row[i] * v[i];
            }
            z[j] = s / rsq;
        }
        let mut prod = 0.0;
        for j in (k + 1)..n {
            prod += v[j] * z[j];
        }
        let c = prod / (2.0 * rsq);
        for j in (k + 1)..n {
            z[j] -= c * v[j];
        }
        // A <- A - v zᵀ - z vᵀ on the trailing block
        for l in (k + 1)..n {
            let vl = v[l];
            let zl = z[l];
            let row = a.row_mut(l);
            for j in (k + 1)..n {
                row[j] -= vl * z[j] + zl * v[j];
            }
        }
        d[k] = a.get(k, k);
        sub[k] = alpha;
    }
    if n >= 2 {
        d[n - 2] = a.get(n - 2, n - 2);
        sub[n - 2] = a.get(n - 1, n - 2);
    }
    d[n - 1] = a.get(n - 1, n - 1);
    (d, sub)
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
/// `sub[i]` couples rows i and i+1.  Eigenvalues land in `d`, unsorted.
fn tql_values(d: &mut [f64], sub: &mut Vec<f64>) -> Result<()> {
    let n = d.len();
    sub.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        'outer: loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(SpectralError::NumericalFailure(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + sub[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    sub[m] = 0.0;
                    continue 'outer;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            d[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    Ok(())
}

/// Sorted eigenvalues via Householder + QL; destroys a private copy.
pub fn tridiag_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let mut work = m.clone();
    let (mut d, mut sub) = tridiagonalize(&mut work);
    drop(work);
    tql_values(&mut d, &mut sub)?;
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Determinant by partial-pivot elimination.  Unlike [`Lu::factor`] this
/// never rejects small pivots: a vanishing determinant is a legitimate
/// answer here, not a failure.
pub fn determinant(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut a = m.a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let cand = a[i * n + k].abs();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        if pivot == 0.0 {
            return 0.0;
        }
        det *= pivot;
        for i in (k + 1)..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in (k + 1)..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Row-pivoted LU factorization.  `perm[i]` names the source row of row i;
/// `sign` is the permutation parity.
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

/// Relative pivot threshold below which the factorization reports singularity.
pub const LU_PIVOT_TOL: f64 = 1e-13;

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Lu> {
        let n = m.dim();
        let mut lu = m.a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale: f64 = lu.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1e-300);
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let cand = lu[i * n + k].abs();
                if cand > best {
                    best = cand;
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot.abs() < LU_PIVOT_TOL * scale {
                return Err(SpectralError::NumericalFailure(format!(
                    "singular pivot {:.3e} at step {k}",
                    pivot
                )));
            }
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm, sign })
    }

    /// Determinant as (sign, log|det|); avoids overflow for large matrices.
    pub fn det_sign_log(&self) -> (f64, f64) {
        let mut sign = self.sign;
        let mut logdet = 0.0;
        for k in 0..self.n {
            let d = self.lu[k * self.n + k];
            if d < 0.0 {
                sign = -sign;
            }
            logdet += d.abs().ln();
        }
        (sign, logdet)
    }

    pub fn det(&self) -> f64 {
        let (s, l) = self.det_sign_log();
        s * l.exp()
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves Aᵀ x = b using the same factorization.
    pub fn solve_transpose(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut w = vec![0.0; n];
        // Uᵀ y = b (forward substitution, Uᵀ is lower triangular)
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        // Lᵀ z = y (back substitution, unit diagonal)
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s;
        }
        for i in 0..n {
            x[self.perm[i]] = w[i];
        }
    }
}

/// Deterministic pseudo-random unit vector for iteration starts.
pub fn seeded_unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let bits = (state >> 11) as f64 / (1u64 << 53) as f64;
            bits - 0.5
        })
        .collect();
    let nrm = norm2(&v).max(1e-300);
    for x in &mut v {
        *x /= nrm;
    }
    v
}

/// Smallest singular value of A through power iteration on A⁻¹A⁻ᵀ.
///
/// `apply_inv` must apply A⁻¹ and `apply_inv_t` must apply A⁻ᵀ.  The estimate
/// converges from above; iteration stops when the Rayleigh quotient is stable
/// to `rel_tol` or after `max_iter` rounds.
pub fn smallest_singular_value(
    dim: usize,
    rel_tol: f64,
    max_iter: usize,
    mut apply_inv: impl FnMut(&[f64]) -> Vec<f64>,
    mut apply_inv_t: impl FnMut(&[f64]) -> Vec<f64>,
) -> f64 {
    let mut x = seeded_unit_vector(dim, 0x5eed);
    let mut lambda_prev = 0.0;
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let y = apply_inv_t(&x);
        lambda = dot(&y, &y); // xᵀ (A⁻¹ A⁻ᵀ) x for unit x
        let mut w = apply_inv(&y);
        let nrm = norm2(&w).max(1e-300);
        for t in &mut w {
            *t /= nrm;
        }
        x = w;
        if lambda > 0.0 && (lambda - lambda_prev).abs() <= rel_tol * lambda {
            break;
        }
        lambda_prev = lambda;
    }
    if lambda <= 0.0 {
        return f64::INFINITY;
    }
    1.0 / lambda.sqrt()
}
