//! Seeded samplers for states, tangents and channels.
//!
//! Every Monte-Carlo driver derives one independent stream per sample from
//! a 64-bit seed, so results do not depend on evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix_core::{CMatrix, Hermitian};
use crate::manifold::{StateMatrix, TangentVector, WeightMatrix};

/// Smallest eigenvalue given to sampled states, as a fraction of `1/N`.
pub const EIGENVALUE_FLOOR: f64 = 0.05;

/// Generator for sample `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), normal(rng)) / 2f64.sqrt())
}

/// GUE-like Hermitian matrix with entries of unit scale.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Hermitian {
    let g = ginibre(rng, n, n);
    Hermitian::symmetrized((&g + g.adjoint()) * Complex64::from(0.5))
}

/// Traceless Hermitian matrix with unit Frobenius norm.
pub fn traceless<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Hermitian {
    let h = hermitian(rng, n);
    let t = &h - &Hermitian::identity(n).scaled(h.trace() / n as f64);
    let norm = t.frobenius_norm();
    t.scaled(1.0 / norm)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::from(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn spread_eigenvalues<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let sum: f64 = raw.iter().sum();
    let floor = EIGENVALUE_FLOOR / n as f64;
    raw.iter().map(|x| floor + (1.0 - n as f64 * floor) * x / sum).collect()
}

/// Faithful state `U diag(λ) U†` with Dirichlet-distributed eigenvalues
/// lifted above [`EIGENVALUE_FLOOR`]`/N`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StateMatrix {
    let lam = spread_eigenvalues(rng, n);
    let u = unitary(rng, n);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, lam.iter().map(|&l| Complex64::from(l))));
    StateMatrix::new(Hermitian::symmetrized(&u * d * u.adjoint())).expect("sampled state is valid")
}

/// Positive definite matrix with trace drawn from `[0.5, 2]`.
pub fn weight<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WeightMatrix {
    let scale = 0.5 + 1.5 * rng.random::<f64>();
    let s = state(rng, n);
    WeightMatrix::new(s.matrix().scaled(scale)).expect("sampled weight is valid")
}

/// Unit-norm traceless tangent at `rho`.
pub fn state_tangent<R: Rng + ?Sized>(rng: &mut R, rho: &StateMatrix) -> TangentVector {
    TangentVector::at_state(rho, traceless(rng, rho.dim())).expect("traceless direction is tangent")
}

/// Unit-norm Hermitian tangent at a weight matrix.
pub fn weight_tangent<R: Rng + ?Sized>(rng: &mut R, sigma: &WeightMatrix) -> TangentVector {
    let h = hermitian(rng, sigma.dim());
    let norm = h.frobenius_norm();
    TangentVector::at_weight(sigma, h.scaled(1.0 / norm)).expect("hermitian direction is tangent")
}

/// Kraus operators `G_k S^{-1/2}` with `S = Σ G_k† G_k` for Ginibre `G_k`.
pub fn kraus_operators<R: Rng + ?Sized>(rng: &mut R, n_in: usize, n_out: usize, count: usize) -> Vec<CMatrix> {
    let gs: Vec<CMatrix> = (0..count).map(|_| ginibre(rng, n_out, n_in)).collect();
    let s = gs.iter().fold(CMatrix::zeros(n_in, n_in), |acc, g| acc + g.adjoint() * g);
    let inv_sqrt = Hermitian::symmetrized(s)
        .spectrum()
        .apply(&crate::matrix_core::Power::new(-0.5))
        .expect("Gram matrix of Ginibre operators is positive")
        .into_matrix();
    gs.into_iter().map(|g| g * &inv_sqrt).collect()
}

/// Uniform sample from `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::frobenius;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream(7, 3).random();
        let b: f64 = stream(7, 3).random();
        let c: f64 = stream(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_objects_satisfy_constraints() {
        let mut rng = stream(1, 0);
        for n in 2..=4 {
            let u = unitary(&mut rng, n);
            assert!(frobenius(&(u.adjoint() * &u - CMatrix::identity(n, n))) < 1e-12);
            let rho = state(&mut rng, n);
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.min_eigenvalue() >= EIGENVALUE_FLOOR / n as f64 - 1e-12);
            let v = state_tangent(&mut rng, &rho);
            assert!(v.mixture().trace().abs() < 1e-12);
            let ks = kraus_operators(&mut rng, n, 2, 3);
            let s = ks.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * k);
            assert!(frobenius(&(s - CMatrix::identity(n, n))) < 1e-10);
        }
    }
}
