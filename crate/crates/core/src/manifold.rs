//! Points, tangent vectors and α-representations.
//!
//! [`WeightMatrix`] is a point of the manifold of positive definite matrices,
//! [`StateMatrix`] a point of its unit-trace submanifold (invertible density
//! matrices). A [`TangentVector`] is stored in its mixture (α = −1)
//! representation `∂σ`; any other α-representation is obtained by the
//! Fréchet derivative of the α-embedding
//!
//! ```text
//! ℓ_α(σ) = 2/(1−α) · σ^((1−α)/2)        for −1 < α < 1
//! ℓ_1(σ) = log σ,   ℓ_{−1}(σ) = σ
//! ```
//!
//! so every function here accepts α on the closed interval `[−1, 1]` unless
//! it says otherwise.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd;
use crate::matrix_core::{
    first_divided_difference, frechet_derivative, CMatrix, Exp, Hermitian, Log, Power, ScalarFn, Spectrum,
};

/// Trace tolerance for unit-trace points and traceless state tangents.
pub const TRACE_TOL: f64 = 1e-10;

/// Smallest eigenvalue a chart may produce.
pub const CHART_EIGENVALUE_FLOOR: f64 = 1e-6;

/// Rejects α outside `[−1, 1]`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && (-1.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in [-1, 1]",
        })
    }
}

/// Rejects α outside the open interval `(−1, 1)`.
pub fn check_open_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            reason: "must lie strictly inside (-1, 1)",
        })
    }
}

/// The α-embedding as a scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Embedding {
    /// α = −1
    Identity,
    /// α = 1
    Log,
    /// `2/(1−α) x^((1−α)/2)`
    Power(Power),
}

impl Embedding {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(if alpha == 1.0 {
            Embedding::Log
        } else if alpha == -1.0 {
            Embedding::Identity
        } else {
            Embedding::Power(Power::scaled(0.5 * (1.0 - alpha), 2.0 / (1.0 - alpha)))
        })
    }

    fn inner(&self) -> &dyn ScalarFn {
        match self {
            Embedding::Identity => &IDENTITY,
            Embedding::Log => &Log,
            Embedding::Power(p) => p,
        }
    }
}

const IDENTITY: Power = Power {
    exponent: 1.0,
    scale: 1.0,
};

impl ScalarFn for Embedding {
    fn name(&self) -> String {
        self.inner().name()
    }
    fn value(&self, x: f64) -> f64 {
        self.inner().value(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        self.inner().derivative(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        self.inner().second_derivative(x)
    }
    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        self.inner().divided_difference(x, y)
    }
}

/// Inverse of the α-embedding: `((1−α)/2 · x)^(2/(1−α))`, `exp` at α = 1,
/// identity at α = −1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InverseEmbedding {
    Identity,
    Exp,
    Power(Power),
}

impl InverseEmbedding {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(if alpha == 1.0 {
            InverseEmbedding::Exp
        } else if alpha == -1.0 {
            InverseEmbedding::Identity
        } else {
            let e = 2.0 / (1.0 - alpha);
            InverseEmbedding::Power(Power::scaled(e, (0.5 * (1.0 - alpha)).powf(e)))
        })
    }

    fn inner(&self) -> &dyn ScalarFn {
        match self {
            InverseEmbedding::Identity => &IDENTITY,
            InverseEmbedding::Exp => &Exp,
            InverseEmbedding::Power(p) => p,
        }
    }

    /// Whether the argument must be positive definite.
    pub fn needs_positive(&self) -> bool {
        !matches!(self, InverseEmbedding::Exp)
    }
}

impl ScalarFn for InverseEmbedding {
    fn name(&self) -> String {
        format!("inverse embedding {}", self.inner().name())
    }
    fn value(&self, x: f64) -> f64 {
        if self.needs_positive() && x <= 0.0 {
            return f64::NAN;
        }
        self.inner().value(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        if self.needs_positive() && x <= 0.0 {
            return f64::NAN;
        }
        self.inner().derivative(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        self.inner().second_derivative(x)
    }
    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        self.inner().divided_difference(x, y)
    }
}

/// A positive definite matrix.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    matrix: Hermitian,
    spectrum: Spectrum,
}

impl WeightMatrix {
    pub fn new(matrix: Hermitian) -> Result<Self> {
        let spectrum = matrix.spectrum();
        let min = spectrum.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(WeightMatrix { matrix, spectrum })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(Hermitian::diagonal(values))
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.spectrum.eigenvalues().iter().sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min_eigenvalue()
    }

    /// `σ^p`.
    pub fn power(&self, p: f64) -> Hermitian {
        self.spectrum
            .apply(&Power::new(p))
            .expect("powers are finite on a positive spectrum")
    }

    pub fn apply(&self, f: &dyn ScalarFn) -> Result<Hermitian> {
        self.spectrum.apply(f)
    }

    /// `σ / Tr σ`.
    pub fn normalized(&self) -> StateMatrix {
        let t = self.trace();
        StateMatrix::new(self.matrix.scaled(1.0 / t)).expect("normalizing a weight yields a state")
    }

    /// Whether two weights are the same point (entrywise within `tol`).
    pub fn same_point(&self, other: &WeightMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.matrix - &other.matrix).max_abs() <= tol
    }
}

/// A positive definite matrix with unit trace.
#[derive(Clone, Debug)]
pub struct StateMatrix {
    weight: WeightMatrix,
}

impl StateMatrix {
    pub fn new(matrix: Hermitian) -> Result<Self> {
        let weight = WeightMatrix::new(matrix)?;
        Self::from_weight(weight)
    }

    pub fn from_weight(weight: WeightMatrix) -> Result<Self> {
        let trace = weight.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace });
        }
        Ok(StateMatrix { weight })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(Hermitian::diagonal(values))
    }

    /// `I / N`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::new(Hermitian::identity(n).scaled(1.0 / n as f64)).expect("I/N is a state")
    }

    pub fn weight(&self) -> &WeightMatrix {
        &self.weight
    }

    pub fn into_weight(self) -> WeightMatrix {
        self.weight
    }
}

impl std::ops::Deref for StateMatrix {
    type Target = WeightMatrix;
    fn deref(&self) -> &WeightMatrix {
        &self.weight
    }
}

/// A tangent vector stored in mixture representation.
#[derive(Clone, Debug)]
pub struct TangentVector {
    base: Arc<WeightMatrix>,
    mixture: Hermitian,
    on_state: bool,
}

impl TangentVector {
    /// Tangent to the manifold of positive definite matrices.
    pub fn at_weight(base: &WeightMatrix, mixture: Hermitian) -> Result<Self> {
        Self::at_weight_shared(Arc::new(base.clone()), mixture)
    }

    pub fn at_weight_shared(base: Arc<WeightMatrix>, mixture: Hermitian) -> Result<Self> {
        if base.dim() != mixture.dim() {
            return Err(Error::DimensionMismatch {
                left: base.dim(),
                right: mixture.dim(),
            });
        }
        Ok(TangentVector {
            base,
            mixture,
            on_state: false,
        })
    }

    /// Tangent to the density matrices: the mixture representation must be
    /// traceless.
    pub fn at_state(base: &StateMatrix, mixture: Hermitian) -> Result<Self> {
        Self::at_state_shared(Arc::new(base.weight().clone()), mixture)
    }

    /// Like [`TangentVector::at_state`] for a base already known to have unit
    /// trace.
    pub fn at_state_shared(base: Arc<WeightMatrix>, mixture: Hermitian) -> Result<Self> {
        let trace = mixture.trace();
        if trace.abs() > TRACE_TOL * mixture.max_abs().max(1.0) {
            return Err(Error::NotTangent { trace });
        }
        let mut v = Self::at_weight_shared(base, mixture)?;
        v.on_state = true;
        Ok(v)
    }

    pub fn base(&self) -> &WeightMatrix {
        &self.base
    }

    pub fn shared_base(&self) -> &Arc<WeightMatrix> {
        &self.base
    }

    pub fn mixture(&self) -> &Hermitian {
        &self.mixture
    }

    pub fn on_state(&self) -> bool {
        self.on_state
    }

    pub fn same_base(&self, other: &TangentVector) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || self.base.same_point(&other.base, 1e-12)
    }

    /// Same base, new mixture representation.
    pub fn with_mixture(&self, mixture: Hermitian) -> Result<Self> {
        if self.on_state {
            Self::at_state_shared(self.base.clone(), mixture)
        } else {
            Self::at_weight_shared(self.base.clone(), mixture)
        }
    }

    pub fn representation(&self, alpha: f64) -> Result<Hermitian> {
        alpha_representation(self, alpha)
    }
}

/// `ℓ_α(σ)` for α strictly inside `(−1, 1)`.
pub fn alpha_embed(sigma: &WeightMatrix, alpha: f64) -> Result<Hermitian> {
    check_open_alpha(alpha)?;
    embedding_value(sigma, alpha)
}

/// `ℓ_α(σ)` on the closed range, using `log` and the identity at α = ±1.
pub fn embedding_value(sigma: &WeightMatrix, alpha: f64) -> Result<Hermitian> {
    sigma.apply(&Embedding::new(alpha)?)
}

/// Schatten r-norm `(Σ |λ|^r)^(1/r)`.
pub fn schatten_norm(a: &Hermitian, r: f64) -> f64 {
    a.spectrum()
        .eigenvalues()
        .iter()
        .map(|l| l.abs().powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// The α-representation of a tangent vector, `d ℓ_α(σ)[∂σ]`.
pub fn alpha_representation(v: &TangentVector, alpha: f64) -> Result<Hermitian> {
    if alpha == -1.0 {
        return Ok(v.mixture.clone());
    }
    frechet_derivative(v.base.spectrum(), &v.mixture, &Embedding::new(alpha)?)
}

/// Divided-difference kernel of the α-embedding at `(x, y)`.
pub fn embedding_kernel(alpha: f64, x: f64, y: f64) -> Result<f64> {
    Ok(first_divided_difference(&Embedding::new(alpha)?, x, y))
}

/// Re-expresses an α-representation `w` at `base` in another representation.
pub fn representation_convert(base: &WeightMatrix, w: &Hermitian, from_alpha: f64, to_alpha: f64) -> Result<Hermitian> {
    if base.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: base.min_eigenvalue(),
        });
    }
    if base.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: base.dim(),
            right: w.dim(),
        });
    }
    let from = Embedding::new(from_alpha)?;
    let to = Embedding::new(to_alpha)?;
    if from == to {
        return Ok(w.clone());
    }
    let out = base.spectrum().weighted(w.as_matrix(), |x, y| {
        first_divided_difference(&to, x, y) / first_divided_difference(&from, x, y)
    });
    Ok(Hermitian::symmetrized(out))
}

/// `Tr(ρ^((1+α)/2) A)`: zero exactly when `A` is an α-representation of a
/// tangent vector to the density matrices.
pub fn tangency_residual(rho: &StateMatrix, alpha: f64, a: &Hermitian) -> f64 {
    rho.power(0.5 * (1.0 + alpha)).trace_product(a)
}

/// Canonical projection onto the tangent space of the `r`-sphere at `ℓ_α(ρ)`:
/// `A − Tr(ρ^((1+α)/2) A) ρ^((1−α)/2)`.
pub fn sphere_project(rho: &StateMatrix, alpha: f64, a: &Hermitian) -> Result<Hermitian> {
    check_alpha(alpha)?;
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: a.dim(),
        });
    }
    let coeff = tangency_residual(rho, alpha, a);
    Ok(a - &rho.power(0.5 * (1.0 - alpha)).scaled(coeff))
}

/// How a family supplies `∂σ/∂θ^i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences with step `base_step * max(1, |θ^i|)`.
    CentralDifference { base_step: f64 },
}

/// A chart `θ ↦ σ(θ)` into the positive definite matrices.
///
/// Charts must be free of side effects; they may be evaluated from several
/// threads and in any order.
pub trait ParametrizedFamily: Send + Sync {
    fn param_dim(&self) -> usize;

    fn matrix_dim(&self) -> usize;

    /// Whether every point of the chart has unit trace.
    fn unit_trace(&self) -> bool;

    /// Raw chart evaluation.
    fn chart(&self, theta: &[f64]) -> Result<Hermitian>;

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::CentralDifference {
            base_step: fd::FIRST_STEP,
        }
    }

    /// `∂σ/∂θ^i`, when [`DerivativeMode::Analytic`].
    fn analytic_first(&self, _theta: &[f64], _i: usize) -> Option<Result<Hermitian>> {
        None
    }

    /// `∂²σ/∂θ^i∂θ^j`, when [`DerivativeMode::Analytic`].
    fn analytic_second(&self, _theta: &[f64], _i: usize, _j: usize) -> Option<Result<Hermitian>> {
        None
    }
}

impl<F: ParametrizedFamily + ?Sized> ParametrizedFamily for &F {
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn matrix_dim(&self) -> usize {
        (**self).matrix_dim()
    }
    fn unit_trace(&self) -> bool {
        (**self).unit_trace()
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        (**self).chart(theta)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        (**self).derivative_mode()
    }
    fn analytic_first(&self, theta: &[f64], i: usize) -> Option<Result<Hermitian>> {
        (**self).analytic_first(theta, i)
    }
    fn analytic_second(&self, theta: &[f64], i: usize, j: usize) -> Option<Result<Hermitian>> {
        (**self).analytic_second(theta, i, j)
    }
}

fn chart_error(theta: &[f64], e: Error) -> Error {
    match e {
        Error::Chart { .. } => e,
        other => Error::Chart {
            theta: theta.to_vec(),
            source: Box::new(other),
        },
    }
}

/// Evaluates the chart and enforces the positivity floor (and unit trace for
/// state families). Failures carry the offending θ.
pub fn family_point(family: &dyn ParametrizedFamily, theta: &[f64]) -> Result<WeightMatrix> {
    if theta.len() != family.param_dim() {
        return Err(Error::DimensionMismatch {
            left: family.param_dim(),
            right: theta.len(),
        });
    }
    let eval = || -> Result<WeightMatrix> {
        let m = family.chart(theta)?;
        let w = WeightMatrix::new(m)?;
        if w.min_eigenvalue() < CHART_EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: w.min_eigenvalue(),
            });
        }
        if family.unit_trace() && (w.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: w.trace() });
        }
        Ok(w)
    };
    eval().map_err(|e| chart_error(theta, e))
}

fn check_index(family: &dyn ParametrizedFamily, i: usize) -> Result<()> {
    if i < family.param_dim() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: i,
            dim: family.param_dim(),
        })
    }
}

/// `∂σ/∂θ^i` in the family's derivative mode.
pub fn family_first_derivative(family: &dyn ParametrizedFamily, theta: &[f64], i: usize) -> Result<Hermitian> {
    check_index(family, i)?;
    match family.derivative_mode() {
        DerivativeMode::Analytic => family
            .analytic_first(theta, i)
            .ok_or_else(|| Error::Invalid("family claims analytic derivatives but provides none".into()))?
            .map_err(|e| chart_error(theta, e)),
        DerivativeMode::CentralDifference { base_step } => fd::central_first(
            |t: &[f64]| family_point(family, t).map(|w| w.matrix().clone()),
            theta,
            i,
            base_step,
        ),
    }
}

/// `∂²σ/∂θ^i∂θ^j` (analytic, or the nine-point stencil with the second
/// derivative step).
pub fn family_second_derivative(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
) -> Result<Hermitian> {
    check_index(family, i)?;
    check_index(family, j)?;
    match family.derivative_mode() {
        DerivativeMode::Analytic => family
            .analytic_second(theta, i, j)
            .ok_or_else(|| Error::Invalid("family claims analytic derivatives but provides none".into()))?
            .map_err(|e| chart_error(theta, e)),
        DerivativeMode::CentralDifference { .. } => fd::central_second(
            |t: &[f64]| family_point(family, t).map(|w| w.matrix().clone()),
            theta,
            i,
            j,
            fd::SECOND_STEP,
        ),
    }
}

/// The coordinate tangent vector `∂/∂θ^i` at `θ`.
pub fn family_tangent(family: &dyn ParametrizedFamily, theta: &[f64], i: usize) -> Result<TangentVector> {
    let base = Arc::new(family_point(family, theta)?);
    tangent_at(family, &base, theta, i)
}

/// All coordinate tangents at `θ`, sharing one base point.
pub fn family_frame(family: &dyn ParametrizedFamily, theta: &[f64]) -> Result<(Arc<WeightMatrix>, Vec<TangentVector>)> {
    let base = Arc::new(family_point(family, theta)?);
    let frame = (0..family.param_dim())
        .map(|i| tangent_at(family, &base, theta, i))
        .collect::<Result<Vec<_>>>()?;
    Ok((base, frame))
}

fn tangent_at(
    family: &dyn ParametrizedFamily,
    base: &Arc<WeightMatrix>,
    theta: &[f64],
    i: usize,
) -> Result<TangentVector> {
    let d = family_first_derivative(family, theta, i)?;
    if family.unit_trace() {
        TangentVector::at_state_shared(base.clone(), d)
    } else {
        TangentVector::at_weight_shared(base.clone(), d)
    }
}

/// A list of self-adjoint operators forming a real basis of the `N²`-
/// dimensional space of `N x N` self-adjoint matrices.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    elements: Vec<Hermitian>,
    gram: DMatrix<f64>,
    gram_inverse: DMatrix<f64>,
}

impl OperatorBasis {
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        let n = elements
            .first()
            .map(Hermitian::dim)
            .ok_or_else(|| Error::SingularBasis { reason: "empty".into() })?;
        if let Some(bad) = elements.iter().find(|e| e.dim() != n) {
            return Err(Error::DimensionMismatch {
                left: n,
                right: bad.dim(),
            });
        }
        if elements.len() != n * n {
            return Err(Error::SingularBasis {
                reason: format!("{} elements given, {} needed", elements.len(), n * n),
            });
        }
        let k = elements.len();
        let gram = DMatrix::from_fn(k, k, |a, b| elements[a].trace_product(&elements[b]));
        let scale = gram.diagonal().max();
        let eig = gram.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if !(min > 1e-12 * scale) {
            return Err(Error::SingularBasis {
                reason: format!("Gram matrix eigenvalue {min:e} relative to scale {scale:e}"),
            });
        }
        let gram_inverse = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularBasis { reason: "Gram matrix not invertible".into() })?;
        Ok(OperatorBasis {
            elements,
            gram,
            gram_inverse,
        })
    }

    /// `(I, σ_x, σ_y, σ_z)`.
    pub fn pauli() -> Self {
        Self::new(vec![
            Hermitian::identity(2),
            Hermitian::pauli_x(),
            Hermitian::pauli_y(),
            Hermitian::pauli_z(),
        ])
        .expect("Pauli basis")
    }

    /// Identity followed by the `N² − 1` generalized Gell-Mann matrices.
    pub fn gell_mann(n: usize) -> Self {
        let mut elements = vec![Hermitian::identity(n)];
        elements.extend(gell_mann_matrices(n));
        Self::new(elements).expect("Gell-Mann basis")
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Real coefficients `ξ` with `Σ ξ^i X_i = a`.
    pub fn coordinates(&self, a: &Hermitian) -> Result<Vec<f64>> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: a.dim(),
            });
        }
        let rhs = nalgebra::DVector::from_iterator(self.len(), self.elements.iter().map(|x| x.trace_product(a)));
        Ok((&self.gram_inverse * rhs).iter().copied().collect())
    }

    pub fn combine(&self, xi: &[f64]) -> Result<Hermitian> {
        if xi.len() != self.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: xi.len(),
            });
        }
        Ok(combine(&self.elements, xi))
    }
}

pub(crate) fn combine(elements: &[Hermitian], coeffs: &[f64]) -> Hermitian {
    let mut acc = Hermitian::zeros(elements[0].dim());
    for (x, &c) in elements.iter().zip(coeffs) {
        acc = &acc + &x.scaled(c);
    }
    acc
}

/// The `N² − 1` traceless generalized Gell-Mann matrices, normalized so that
/// `Tr(G_a G_b) = 2 δ_ab`. Order: symmetric, antisymmetric, diagonal.
pub fn gell_mann_matrices(n: usize) -> Vec<Hermitian> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = one;
            m[(k, j)] = one;
            out.push(Hermitian::symmetrized(m));
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = -i;
            m[(k, j)] = i;
            out.push(Hermitian::symmetrized(m));
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = vec![0.0; n];
        for v in d.iter_mut().take(l) {
            *v = norm;
        }
        d[l] = -(l as f64) * norm;
        out.push(Hermitian::diagonal(&d));
    }
    out
}

/// ∇̂^(α)-affine coordinates: coefficients of `ℓ_α(σ)` in `basis`.
pub fn affine_coordinates(sigma: &WeightMatrix, alpha: f64, basis: &OperatorBasis) -> Result<Vec<f64>> {
    basis.coordinates(&embedding_value(sigma, alpha)?)
}

/// Inverse of [`affine_coordinates`].
pub fn weight_from_affine_coordinates(xi: &[f64], alpha: f64, basis: &OperatorBasis) -> Result<WeightMatrix> {
    let m = basis.combine(xi)?;
    WeightMatrix::new(m.spectrum().apply(&InverseEmbedding::new(alpha)?)?)
}
