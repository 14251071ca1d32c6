//! Dense Hermitian spectral calculus.
//!
//! Everything downstream (embeddings, Petz kernels, connections) acts on a
//! matrix through its eigenbasis. This module owns that machinery: the
//! [`Hermitian`] newtype, the [`Spectrum`] of a Hermitian matrix, scalar
//! functions lifted to matrices, first and second Fréchet derivatives via
//! divided differences, and the commutant decomposition of a direction
//! relative to a base matrix.
//!
//! Two eigenvalues `x`, `y` are treated as equal when
//! `|x - y| <= 1e-10 * max(1, |x|, |y|)`. Divided differences over such a
//! pair fall back to the derivative at the midpoint.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance for accepting a matrix as self-adjoint.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;

/// Relative gap below which two eigenvalues are considered degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// An `N x N` complex self-adjoint matrix.
#[derive(Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Validates squareness and self-adjointness (within [`SELF_ADJOINT_TOL`]).
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let (violation, row, col) = self_adjoint_violation(&m);
        if violation > SELF_ADJOINT_TOL {
            return Err(Error::NotSelfAdjoint {
                violation,
                row,
                col,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Projects a square matrix onto its self-adjoint part `(m + m†)/2`.
    ///
    /// Panics if `m` is not square.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert!(m.is_square(), "symmetrized: matrix must be square");
        let adj = m.adjoint();
        Hermitian((m + adj) * Complex64::new(0.5, 0.0))
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Hermitian(m)
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian(CMatrix::zeros(n, n))
    }

    pub fn pauli_x() -> Self {
        Hermitian(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    pub fn pauli_y() -> Self {
        Hermitian(CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Hermitian(&self.0 * Complex64::new(s, 0.0))
    }

    /// `Tr(self * other)`, real for self-adjoint arguments.
    pub fn trace_product(&self, other: &Hermitian) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.kronecker(&other.0))
    }
}

impl fmt::Debug for Hermitian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{}", self.0)
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

impl Neg for &Hermitian {
    type Output = Hermitian;
    fn neg(self) -> Hermitian {
        Hermitian(-&self.0)
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scaled(rhs)
    }
}

impl Mul for &Hermitian {
    type Output = CMatrix;
    fn mul(self, rhs: &Hermitian) -> CMatrix {
        &self.0 * &rhs.0
    }
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if m.is_square() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

fn self_adjoint_violation(m: &CMatrix) -> (f64, usize, usize) {
    let n = m.nrows();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in i..n {
            let v = (m[(i, j)] - m[(j, i)].conj()).norm();
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    worst
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Whether two eigenvalues fall inside the degeneracy threshold.
pub fn is_degenerate(x: f64, y: f64) -> bool {
    (x - y).abs() <= DEGENERACY_TOL * 1f64.max(x.abs()).max(y.abs())
}

/// A real function that can be lifted to Hermitian matrices.
///
/// `divided_difference` has a generic default; implementations override it
/// when a cancellation-free form exists.
pub trait ScalarFn {
    fn name(&self) -> String;
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;

    /// `(f(x) - f(y)) / (x - y)` for a non-degenerate pair.
    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        (self.value(x) - self.value(y)) / (x - y)
    }
}

/// `scale * x^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    pub exponent: f64,
    pub scale: f64,
}

impl Power {
    pub fn new(exponent: f64) -> Self {
        Power {
            exponent,
            scale: 1.0,
        }
    }

    pub fn scaled(exponent: f64, scale: f64) -> Self {
        Power { exponent, scale }
    }
}

impl ScalarFn for Power {
    fn name(&self) -> String {
        format!("{}*x^{}", self.scale, self.exponent)
    }

    fn value(&self, x: f64) -> f64 {
        self.scale * x.powf(self.exponent)
    }

    fn derivative(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            return 0.0;
        }
        self.scale * self.exponent * x.powf(self.exponent - 1.0)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let p = self.exponent;
        if p == 0.0 || p == 1.0 {
            return 0.0;
        }
        self.scale * p * (p - 1.0) * x.powf(p - 2.0)
    }

    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        let p = self.exponent;
        if p == 1.0 {
            return self.scale;
        }
        if x > 0.0 && y > 0.0 {
            // y^p * expm1(p ln(x/y)) / (x - y) keeps full precision for close pairs
            let ratio = ((x - y) / y).ln_1p();
            self.scale * y.powf(p) * (p * ratio).exp_m1() / (x - y)
        } else {
            (self.value(x) - self.value(y)) / (x - y)
        }
    }
}

/// Natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Log;

impl ScalarFn for Log {
    fn name(&self) -> String {
        "log".into()
    }
    fn value(&self, x: f64) -> f64 {
        if x > 0.0 {
            x.ln()
        } else {
            f64::NAN
        }
    }
    fn derivative(&self, x: f64) -> f64 {
        if x > 0.0 {
            1.0 / x
        } else {
            f64::NAN
        }
    }
    fn second_derivative(&self, x: f64) -> f64 {
        if x > 0.0 {
            -1.0 / (x * x)
        } else {
            f64::NAN
        }
    }
    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        if x > 0.0 && y > 0.0 {
            ((x - y) / y).ln_1p() / (x - y)
        } else {
            f64::NAN
        }
    }
}

/// Natural exponential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exp;

impl ScalarFn for Exp {
    fn name(&self) -> String {
        "exp".into()
    }
    fn value(&self, x: f64) -> f64 {
        x.exp()
    }
    fn derivative(&self, x: f64) -> f64 {
        x.exp()
    }
    fn second_derivative(&self, x: f64) -> f64 {
        x.exp()
    }
    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        y.exp() * (x - y).exp_m1() / (x - y)
    }
}

/// A scalar function given by closures for the value and its first two
/// derivatives.
pub struct FnTriple<F, G, H> {
    pub name: &'static str,
    pub f: F,
    pub df: G,
    pub d2f: H,
}

impl<F, G, H> ScalarFn for FnTriple<F, G, H>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    fn name(&self) -> String {
        self.name.to_string()
    }
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}

/// First divided difference `f[x, y]`, with the degeneracy fallback.
pub fn first_divided_difference(f: &dyn ScalarFn, x: f64, y: f64) -> f64 {
    if is_degenerate(x, y) {
        f.derivative(0.5 * (x + y))
    } else {
        f.divided_difference(x, y)
    }
}

/// Second divided difference `f[x, y, z]` (symmetric in its arguments).
pub fn second_divided_difference(f: &dyn ScalarFn, x: f64, y: f64, z: f64) -> f64 {
    let mut v = [x, y, z];
    v.sort_by(|a, b| a.total_cmp(b));
    let [a, b, c] = v;
    if is_degenerate(a, c) {
        return 0.5 * f.second_derivative((a + b + c) / 3.0);
    }
    (first_divided_difference(f, a, b) - first_divided_difference(f, b, c)) / (a - c)
}

/// Eigendecomposition `A = U diag(λ) U†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    unitary: CMatrix,
}

impl Spectrum {
    pub fn of(a: &Hermitian) -> Self {
        let n = a.dim();
        let eig = a.as_matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut unitary = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            unitary.set_column(col, &eig.eigenvectors.column(k));
        }
        Spectrum {
            eigenvalues,
            unitary,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `U† A U`: `a` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.unitary.adjoint() * a * &self.unitary
    }

    /// `U A U†`: inverse of [`Spectrum::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.unitary * a * self.unitary.adjoint()
    }

    pub fn reconstruct(&self) -> Hermitian {
        let d = Hermitian::diagonal(&self.eigenvalues);
        Hermitian::symmetrized(self.from_eigenbasis(d.as_matrix()))
    }

    /// Applies an entrywise weight `w(λ_i, λ_j)` to `a` in the eigenbasis and
    /// maps back. This is how every kernel in the crate acts.
    pub fn weighted<W>(&self, a: &CMatrix, weight: W) -> CMatrix
    where
        W: Fn(f64, f64) -> f64,
    {
        let mut t = self.to_eigenbasis(a);
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] *= weight(self.eigenvalues[i], self.eigenvalues[j]);
            }
        }
        self.from_eigenbasis(&t)
    }

    /// Like [`Spectrum::weighted`] with the weight given by eigenvalue index.
    pub fn weighted_indexed<W>(&self, a: &CMatrix, weight: W) -> CMatrix
    where
        W: Fn(usize, usize) -> f64,
    {
        let mut t = self.to_eigenbasis(a);
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] *= weight(i, j);
            }
        }
        self.from_eigenbasis(&t)
    }

    /// `U diag(f(λ)) U†`.
    pub fn apply(&self, f: &dyn ScalarFn) -> Result<Hermitian> {
        let values = self.checked_values(f)?;
        let d = Hermitian::diagonal(&values);
        Ok(Hermitian::symmetrized(self.from_eigenbasis(d.as_matrix())))
    }

    /// `f(λ_i)` for every eigenvalue, or a domain error naming the first
    /// eigenvalue where `f` is not finite.
    pub fn checked_values(&self, f: &dyn ScalarFn) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .map(|&x| {
                let v = f.value(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Domain {
                        function: f.name(),
                        eigenvalue: x,
                    })
                }
            })
            .collect()
    }

    fn checked_derivatives(&self, f: &dyn ScalarFn) -> Result<()> {
        for &x in &self.eigenvalues {
            if !f.derivative(x).is_finite() {
                return Err(Error::Domain {
                    function: format!("{}'", f.name()),
                    eigenvalue: x,
                });
            }
        }
        Ok(())
    }
}

/// Convenience wrapper over [`Spectrum::of`] for a raw matrix.
pub fn spectral_decompose(a: &CMatrix) -> Result<Spectrum> {
    Ok(Spectrum::of(&Hermitian::new(a.clone())?))
}

/// Matrix of first divided differences `f[λ_i, λ_j]`.
pub fn divided_difference_matrix(spec: &Spectrum, f: &dyn ScalarFn) -> DMatrix<f64> {
    let lam = spec.eigenvalues();
    let n = lam.len();
    DMatrix::from_fn(n, n, |i, j| first_divided_difference(f, lam[i], lam[j]))
}

/// Directional derivative `d/dt f(A + tD)` at `t = 0`.
///
/// In the eigenbasis of `A` the result is `f[λ_i, λ_j] * D_ij`.
pub fn frechet_derivative(spec: &Spectrum, direction: &Hermitian, f: &dyn ScalarFn) -> Result<Hermitian> {
    if spec.dim() != direction.dim() {
        return Err(Error::DimensionMismatch {
            left: spec.dim(),
            right: direction.dim(),
        });
    }
    spec.checked_values(f)?;
    spec.checked_derivatives(f)?;
    let out = spec.weighted(direction.as_matrix(), |x, y| first_divided_difference(f, x, y));
    Ok(Hermitian::symmetrized(out))
}

/// Mixed second derivative `∂_s ∂_t f(A + sE + tF)` at zero.
///
/// Entry `(a, b)` in the eigenbasis is
/// `Σ_c f[λ_a, λ_c, λ_b] (E_ac F_cb + F_ac E_cb)`.
pub fn second_frechet_derivative(
    spec: &Spectrum,
    e: &Hermitian,
    g: &Hermitian,
    f: &dyn ScalarFn,
) -> Result<Hermitian> {
    let n = spec.dim();
    if e.dim() != n || g.dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: e.dim().max(g.dim()),
        });
    }
    spec.checked_values(f)?;
    spec.checked_derivatives(f)?;
    let lam = spec.eigenvalues();
    let et = spec.to_eigenbasis(e.as_matrix());
    let gt = spec.to_eigenbasis(g.as_matrix());
    let mut out = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = ZERO;
            for c in 0..n {
                let w = second_divided_difference(f, lam[a], lam[c], lam[b]);
                acc += (et[(a, c)] * gt[(c, b)] + gt[(a, c)] * et[(c, b)]) * w;
            }
            out[(a, b)] = acc;
        }
    }
    Ok(Hermitian::symmetrized(spec.from_eigenbasis(&out)))
}

/// A direction split into a part commuting with the base matrix and a
/// commutator part `[σ, Δ]` with `Δ` anti-self-adjoint.
#[derive(Clone, Debug)]
pub struct CommutantSplit {
    pub commutant_part: Hermitian,
    pub delta: CMatrix,
}

impl CommutantSplit {
    /// `[σ, Δ]` for the base matrix the split was computed against.
    pub fn commutator_part(&self, base: &Hermitian) -> Hermitian {
        Hermitian::symmetrized(commutator(base.as_matrix(), &self.delta))
    }
}

/// Splits `d` as `commutant_part + [σ, delta]`.
pub fn commutant_split(spec: &Spectrum, d: &Hermitian) -> Result<CommutantSplit> {
    let n = spec.dim();
    if d.dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: d.dim(),
        });
    }
    let lam = spec.eigenvalues();
    let dt = spec.to_eigenbasis(d.as_matrix());
    let mut comm = CMatrix::zeros(n, n);
    let mut delta = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if is_degenerate(lam[i], lam[j]) {
                comm[(i, j)] = dt[(i, j)];
            } else {
                delta[(i, j)] = dt[(i, j)] / (lam[i] - lam[j]);
            }
        }
    }
    let commutant_part = Hermitian::symmetrized(spec.from_eigenbasis(&comm));
    let delta = spec.from_eigenbasis(&delta);
    let delta = (&delta - delta.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(CommutantSplit {
        commutant_part,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> Hermitian {
        // small LCG so the unit tests do not depend on the sampling module
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        Hermitian::symmetrized(m)
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, c(2.0, 0.0), ZERO, ONE]);
        match Hermitian::new(m.clone()) {
            Err(Error::NotSelfAdjoint { violation, .. }) => assert_abs_diff_eq!(violation, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(spectral_decompose(&m).is_err());
        assert!(matches!(
            Hermitian::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn diagonal_spectrum() {
        let s = Hermitian::diagonal(&[0.75, 0.25]).spectrum();
        assert_eq!(s.eigenvalues(), &[0.25, 0.75]);
        assert!(frobenius(&(s.reconstruct().as_matrix() - Hermitian::diagonal(&[0.75, 0.25]).as_matrix())) < 1e-15);
    }

    #[test]
    fn pauli_x_eigenpairs() {
        let s = Hermitian::pauli_x().spectrum();
        assert_abs_diff_eq!(s.eigenvalues()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues()[1], 1.0, epsilon = 1e-14);
        // eigenvector for -1 is (1, -1)/sqrt 2 up to phase
        let u = s.unitary();
        let v0 = u.column(0);
        assert_abs_diff_eq!((v0[0] + v0[1]).norm(), 0.0, epsilon = 1e-14);
        let v1 = u.column(1);
        assert_abs_diff_eq!((v1[0] - v1[1]).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v1[0].norm(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        for seed in 0..20 {
            let a = random_hermitian(4, seed);
            let s = a.spectrum();
            let u = s.unitary();
            let id = CMatrix::identity(4, 4);
            assert!(frobenius(&(u.adjoint() * u - id)) < 1e-10);
            assert!(frobenius(&(s.reconstruct().as_matrix() - a.as_matrix())) < 1e-10);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn scalar_function_examples() {
        let a = random_hermitian(3, 5);
        let id = Power::new(1.0);
        assert!(frobenius(&(a.spectrum().apply(&id).unwrap().as_matrix() - a.as_matrix())) < 1e-13);

        let r = Hermitian::diagonal(&[4.0, 9.0]).spectrum().apply(&Power::new(0.5)).unwrap();
        assert!(frobenius(&(r.as_matrix() - Hermitian::diagonal(&[2.0, 3.0]).as_matrix())) < 1e-14);

        let l = Hermitian::identity(2).scaled(0.5).spectrum().apply(&Log).unwrap();
        let expect = Hermitian::identity(2).scaled(-(2f64.ln()));
        assert!(frobenius(&(l.as_matrix() - expect.as_matrix())) < 1e-15);
    }

    #[test]
    fn log_of_singular_matrix_names_eigenvalue() {
        let err = Hermitian::diagonal(&[0.0, 1.0]).spectrum().apply(&Log).unwrap_err();
        match err {
            Error::Domain { function, eigenvalue } => {
                assert_eq!(function, "log");
                assert_eq!(eigenvalue, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frechet_of_identity_is_direction() {
        let a = random_hermitian(3, 1);
        let d = random_hermitian(3, 2);
        let out = frechet_derivative(&a.spectrum(), &d, &Power::new(1.0)).unwrap();
        assert!(frobenius(&(out.as_matrix() - d.as_matrix())) < 1e-13);
    }

    #[test]
    fn frechet_log_off_diagonal_weight() {
        let s = Hermitian::diagonal(&[0.75, 0.25]).spectrum();
        let out = frechet_derivative(&s, &Hermitian::pauli_x(), &Log).unwrap();
        // hand divided difference (log(3/4) - log(1/4)) / (1/2)
        let expect = (0.75f64.ln() - 0.25f64.ln()) / 0.5;
        assert_abs_diff_eq!(expect, 2.0 * 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.as_matrix()[(0, 1)].re, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(out.as_matrix()[(0, 0)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn frechet_of_square_is_anticommutator() {
        for seed in 0..5 {
            let a = random_hermitian(4, seed);
            let d = random_hermitian(4, seed + 100);
            let out = frechet_derivative(&a.spectrum(), &d, &Power::new(2.0)).unwrap();
            let expect = a.as_matrix() * d.as_matrix() + d.as_matrix() * a.as_matrix();
            assert!(frobenius(&(out.as_matrix() - expect)) < 1e-12);
        }
    }

    #[test]
    fn second_frechet_of_square_and_cube() {
        let a = random_hermitian(3, 9);
        let e = random_hermitian(3, 10);
        let g = random_hermitian(3, 11);
        let sq = second_frechet_derivative(&a.spectrum(), &e, &g, &Power::new(2.0)).unwrap();
        let expect = e.as_matrix() * g.as_matrix() + g.as_matrix() * e.as_matrix();
        assert!(frobenius(&(sq.as_matrix() - expect)) < 1e-12);
        // d²/dsdt (A+sE+tG)^3 = sum over placements of E, G among three factors
        let (am, em, gm) = (a.as_matrix(), e.as_matrix(), g.as_matrix());
        let expect = em * gm * am + em * am * gm + gm * em * am + gm * am * em + am * em * gm + am * gm * em;
        let cube = FnTriple {
            name: "cube",
            f: |x: f64| x * x * x,
            df: |x: f64| 3.0 * x * x,
            d2f: |x: f64| 6.0 * x,
        };
        let cu = second_frechet_derivative(&a.spectrum(), &e, &g, &cube).unwrap();
        assert!(frobenius(&(cu.as_matrix() - expect)) < 1e-12);
    }

    #[test]
    fn frechet_matches_central_difference() {
        let base = Hermitian::diagonal(&[0.2, 0.5, 1.3]);
        let u = random_hermitian(3, 3).spectrum().unitary().clone();
        let a = Hermitian::symmetrized(&u * base.as_matrix() * u.adjoint());
        let d = random_hermitian(3, 4);
        let h = 1e-5;
        for f in [&Log as &dyn ScalarFn, &Power::new(0.5), &Power::new(0.3), &Exp] {
            let plus = (&a + &d.scaled(h)).spectrum().apply(f).unwrap();
            let minus = (&a - &d.scaled(h)).spectrum().apply(f).unwrap();
            let fd = (&plus - &minus).scaled(0.5 / h);
            let an = frechet_derivative(&a.spectrum(), &d, f).unwrap();
            assert!(frobenius(&(fd.as_matrix() - an.as_matrix())) < 1e-6, "{}", f.name());
        }
    }

    #[test]
    fn degenerate_divided_difference_uses_midpoint_derivative() {
        let x = 0.5;
        let y = 0.5 + 1e-12;
        assert_abs_diff_eq!(first_divided_difference(&Log, x, y), 1.0 / (0.5 + 5e-13), epsilon = 1e-15);
        // close but resolved pairs stay accurate thanks to the stable forms
        let y = 0.5 + 1e-8;
        let exact = 1.0 / 0.5 - 1e-8 / (2.0 * 0.25);
        assert!((first_divided_difference(&Log, x, y) - exact).abs() < 1e-14);
        let p = Power::new(0.25);
        let exact = 0.25 * 0.5f64.powf(-0.75) * (1.0 - 0.75 * 0.5e-8 / 0.5);
        assert!((first_divided_difference(&p, x, y) - exact).abs() < 1e-13);
    }

    #[test]
    fn hs_inner_examples() {
        let id = Hermitian::identity(2);
        let (x, y) = (Hermitian::pauli_x(), Hermitian::pauli_y());
        assert_eq!(hs_inner(id.as_matrix(), id.as_matrix()).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(x.as_matrix(), y.as_matrix()).unwrap(), c(0.0, 0.0));
        assert_eq!(hs_inner(x.as_matrix(), x.as_matrix()).unwrap(), c(2.0, 0.0));
        assert!(matches!(
            hs_inner(id.as_matrix(), Hermitian::identity(3).as_matrix()),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn commutant_split_examples() {
        let sigma = Hermitian::diagonal(&[0.75, 0.25]);
        let s = sigma.spectrum();

        let split = commutant_split(&s, &Hermitian::pauli_z()).unwrap();
        assert!(frobenius(&(split.commutant_part.as_matrix() - Hermitian::pauli_z().as_matrix())) < 1e-15);
        assert!(frobenius(&split.delta) < 1e-15);

        let split = commutant_split(&s, &Hermitian::pauli_x()).unwrap();
        assert!(split.commutant_part.frobenius_norm() < 1e-15);
        assert_abs_diff_eq!(split.delta[(0, 1)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(split.delta[(1, 0)].re, -2.0, epsilon = 1e-14);

        let half = Hermitian::identity(2).scaled(0.5);
        let d = random_hermitian(2, 8);
        let split = commutant_split(&half.spectrum(), &d).unwrap();
        assert!(frobenius(&(split.commutant_part.as_matrix() - d.as_matrix())) < 1e-15);
        assert!(frobenius(&split.delta) < 1e-15);
    }

    #[test]
    fn commutant_split_handles_near_degeneracy() {
        let sigma = Hermitian::diagonal(&[0.5, 0.5 + 1e-13, 0.2]);
        let d = random_hermitian(3, 12);
        let split = commutant_split(&sigma.spectrum(), &d).unwrap();
        let rebuilt = split.commutant_part.as_matrix() + commutator(sigma.as_matrix(), &split.delta);
        assert!(frobenius(&(rebuilt - d.as_matrix())) < 1e-9);
        assert!(split.delta.iter().all(|z| z.is_finite()));
    }

    #[test]
    fn kron_dimension() {
        let k = Hermitian::pauli_x().kron(&Hermitian::identity(3));
        assert_eq!(k.dim(), 6);
        assert_abs_diff_eq!(k.trace(), 0.0);
    }
}
