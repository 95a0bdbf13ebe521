//! Dense complex linear algebra helpers shared by the whole crate.
//!
//! Unitaries are produced exclusively by eigendecomposition of Hermitian
//! generators: `exp(i s H) = V exp(i s Λ) V†`, which keeps them unitary to
//! machine precision independent of `s`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[inline]
pub fn ci(x: f64) -> C64 {
    C64::new(0.0, x)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues plus the
/// unitary matrix of eigenvectors (columns). The input is symmetrized to
/// scrub accumulated rounding before factorization.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(i * scale * H)` for Hermitian `H`, via eigendecomposition.
pub fn expm_i_hermitian(h: &CMat, scale: f64) -> CMat {
    let (evals, evecs) = hermitian_eigen(h);
    expm_from_eigen(&evals, &evecs, scale)
}

/// `exp(i * scale * H)` from a precomputed eigendecomposition of `H`.
pub fn expm_from_eigen(evals: &[f64], evecs: &CMat, scale: f64) -> CMat {
    let n = evecs.nrows();
    let mut phased = evecs.clone();
    for (k, lam) in evals.iter().enumerate() {
        let ph = ci(scale * lam).exp();
        for i in 0..n {
            phased[(i, k)] *= ph;
        }
    }
    &phased * evecs.adjoint()
}

/// Max-entry magnitude of `U†U − I`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { cr(1.0) } else { cr(0.0) };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}

/// Max-entry magnitude of `A − B`.
pub fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-entry magnitude of `A − e^{iφ} B`, minimized over the global phase φ.
/// φ is fixed by the overlap `Σ conj(a) b`, which is the least-squares phase.
pub fn phase_aligned_diff(a: &CMat, b: &CMat) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / cr(overlap.norm())
    } else {
        cr(1.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase.conj()).norm())
        .fold(0.0, f64::max)
}

/// Same phase alignment for state vectors.
pub fn phase_aligned_vec_diff(a: &CVec, b: &CVec) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / cr(overlap.norm())
    } else {
        cr(1.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase.conj()).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product, row-major index convention: row `(i_a, i_b)` maps to
/// `i_a * nrows(b) + i_b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// ln(n!) by direct summation; exact enough for the photon counts used here.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
