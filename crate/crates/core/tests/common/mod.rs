//! Independent reference implementations used by the integration tests.
//! Only nalgebra is used here; nothing is routed through the crate's own
//! propagation or partial-trace code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sx() -> M {
    M::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sy() -> M {
    M::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sz() -> M {
    M::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

pub fn kron_v(a: &V, b: &V) -> V {
    a.kronecker(b)
}

pub fn max_abs(a: &M) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(h: &M) -> (Vec<f64>, M) {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = M::from_fn(h.nrows(), h.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// `exp(-i h dt)` through the spectral decomposition.
pub fn expm(h: &M, dt: f64) -> M {
    let (vals, vecs) = eigh(h);
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&l| Complex64::from_polar(1.0, -l * dt)));
    &vecs * M::from_diagonal(&phases) * vecs.adjoint()
}

/// Midpoint slicing: `steps` equal slices, each frozen at its centre.
pub fn propagate(h: impl Fn(f64) -> M, psi: &V, t0: f64, t1: f64, steps: usize) -> V {
    let dt = (t1 - t0) / steps as f64;
    let mut v = psi.clone();
    for k in 0..steps {
        v = expm(&h(t0 + (k as f64 + 0.5) * dt), dt) * v;
    }
    v
}

pub fn outer(v: &V) -> M {
    v * v.adjoint()
}

/// Traces out the second tensor factor (dimension `dm`).
pub fn trace_second(rho: &M, ds: usize, dm: usize) -> M {
    M::from_fn(ds, ds, |i, j| (0..dm).map(|a| rho[(i * dm + a, j * dm + a)]).sum())
}

pub fn ket(values: &[Complex64]) -> V {
    V::from_column_slice(values)
}

pub fn plus() -> V {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[c(r, 0.0), c(r, 0.0)])
}

pub fn zero() -> V {
    ket(&[c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn one() -> V {
    ket(&[c(0.0, 0.0), c(1.0, 0.0)])
}

/// Landau-Zener Hamiltonian `(v t / 2) sigma_z + (g / 2) sigma_x`.
pub fn lz(v: f64, g: f64, t: f64) -> M {
    sz() * c(0.5 * v * t, 0.0) + sx() * c(0.5 * g, 0.0)
}

/// `exp(-pi (g/2)^2 / (v/2))`.
pub fn lz_closed_form(v: f64, g: f64) -> f64 {
    (-std::f64::consts::PI * g * g / (2.0 * v)).exp()
}

/// `z = +1` for bit 0; site 0 is the most significant bit.
pub fn spins(n: usize, index: usize) -> Vec<f64> {
    (0..n).map(|s| if (index >> (n - 1 - s)) & 1 == 0 { 1.0 } else { -1.0 }).collect()
}
