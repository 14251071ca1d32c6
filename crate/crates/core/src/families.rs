//! Concrete parametrized families with analytic derivatives.

use crate::error::{Error, Result};
use crate::manifold::{combine, DerivativeMode, InverseEmbedding, ParametrizedFamily};
use crate::matrix_core::{frechet_derivative, second_frechet_derivative, Exp, Hermitian};

/// Affine chart `σ(θ) = base + Σ θ^i D_i`.
///
/// With a unit-trace base and traceless directions this is a mixture family
/// of states, e.g. `θ ↦ diag(θ, 1 − θ)` or the Bloch ball `(I + θ·σ⃗)/2`.
#[derive(Clone, Debug)]
pub struct MixtureFamily {
    base: Hermitian,
    directions: Vec<Hermitian>,
    unit_trace: bool,
}

impl MixtureFamily {
    pub fn new(base: Hermitian, directions: Vec<Hermitian>) -> Result<Self> {
        check_dims(&base, &directions)?;
        let unit_trace = (base.trace() - 1.0).abs() <= 1e-12 && directions.iter().all(|d| d.trace().abs() <= 1e-12);
        Ok(MixtureFamily {
            base,
            directions,
            unit_trace,
        })
    }

    /// `θ ↦ diag(θ, 1 − θ)`.
    pub fn qubit_diagonal() -> Self {
        Self::new(Hermitian::diagonal(&[0.0, 1.0]), vec![Hermitian::pauli_z()]).unwrap()
    }

    /// `θ ↦ diag(θ_1, θ_2, 1 − θ_1 − θ_2)`.
    pub fn qutrit_diagonal() -> Self {
        Self::new(
            Hermitian::diagonal(&[0.0, 0.0, 1.0]),
            vec![Hermitian::diagonal(&[1.0, 0.0, -1.0]), Hermitian::diagonal(&[0.0, 1.0, -1.0])],
        )
        .unwrap()
    }

    /// Bloch-ball chart `(I + θ_x σ_x + θ_y σ_y + θ_z σ_z) / 2`.
    pub fn bloch() -> Self {
        Self::new(
            Hermitian::identity(2).scaled(0.5),
            vec![
                Hermitian::pauli_x().scaled(0.5),
                Hermitian::pauli_y().scaled(0.5),
                Hermitian::pauli_z().scaled(0.5),
            ],
        )
        .unwrap()
    }
}

fn check_dims(base: &Hermitian, directions: &[Hermitian]) -> Result<()> {
    for d in directions {
        if d.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                left: base.dim(),
                right: d.dim(),
            });
        }
    }
    Ok(())
}

impl ParametrizedFamily for MixtureFamily {
    fn param_dim(&self) -> usize {
        self.directions.len()
    }
    fn matrix_dim(&self) -> usize {
        self.base.dim()
    }
    fn unit_trace(&self) -> bool {
        self.unit_trace
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        Ok(&self.base + &combine(&self.directions, theta))
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }
    fn analytic_first(&self, _theta: &[f64], i: usize) -> Option<Result<Hermitian>> {
        Some(Ok(self.directions[i].clone()))
    }
    fn analytic_second(&self, _theta: &[f64], _i: usize, _j: usize) -> Option<Result<Hermitian>> {
        Some(Ok(Hermitian::zeros(self.base.dim())))
    }
}

/// `σ(θ) = exp(H_0 + Σ θ^i Y_i)`, optionally divided by its trace.
///
/// The normalized version is an exponential (Gibbs) family of states; the
/// unnormalized one lives on the positive definite matrices.
#[derive(Clone, Debug)]
pub struct ExponentialFamily {
    offset: Hermitian,
    generators: Vec<Hermitian>,
    normalized: bool,
}

struct ExpParts {
    e: Hermitian,
    first: Vec<Hermitian>,
}

impl ExponentialFamily {
    pub fn new(offset: Hermitian, generators: Vec<Hermitian>, normalized: bool) -> Result<Self> {
        check_dims(&offset, &generators)?;
        Ok(ExponentialFamily {
            offset,
            generators,
            normalized,
        })
    }

    pub fn generators(&self) -> &[Hermitian] {
        &self.generators
    }

    pub fn offset(&self) -> &Hermitian {
        &self.offset
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    fn exponent(&self, theta: &[f64]) -> Hermitian {
        &self.offset + &combine(&self.generators, theta)
    }

    /// `log Tr exp(H_0 + Σ θ^i Y_i)`.
    pub fn log_partition(&self, theta: &[f64]) -> f64 {
        let lam = self.exponent(theta).spectrum().eigenvalues().to_vec();
        let m = lam.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + lam.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
    }

    fn parts(&self, theta: &[f64], with_first: bool) -> Result<(crate::matrix_core::Spectrum, ExpParts)> {
        let spec = self.exponent(theta).spectrum();
        let e = spec.apply(&Exp)?;
        let first = if with_first {
            self.generators
                .iter()
                .map(|y| frechet_derivative(&spec, y, &Exp))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok((spec, ExpParts { e, first }))
    }
}

impl ParametrizedFamily for ExponentialFamily {
    fn param_dim(&self) -> usize {
        self.generators.len()
    }
    fn matrix_dim(&self) -> usize {
        self.offset.dim()
    }
    fn unit_trace(&self) -> bool {
        self.normalized
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        if self.normalized {
            // shift by log Z before exponentiating to avoid overflow
            let k = &self.exponent(theta) - &Hermitian::identity(self.matrix_dim()).scaled(self.log_partition(theta));
            let rho = k.spectrum().apply(&Exp)?;
            let t = rho.trace();
            Ok(rho.scaled(1.0 / t))
        } else {
            self.exponent(theta).spectrum().apply(&Exp)
        }
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }
    fn analytic_first(&self, theta: &[f64], i: usize) -> Option<Result<Hermitian>> {
        Some((|| {
            let spec = self.exponent(theta).spectrum();
            let de = frechet_derivative(&spec, &self.generators[i], &Exp)?;
            if !self.normalized {
                return Ok(de);
            }
            let e = spec.apply(&Exp)?;
            let z = e.trace();
            let dz = de.trace();
            Ok(&de.scaled(1.0 / z) - &e.scaled(dz / (z * z)))
        })())
    }
    fn analytic_second(&self, theta: &[f64], i: usize, j: usize) -> Option<Result<Hermitian>> {
        Some((|| {
            let (spec, parts) = self.parts(theta, self.normalized)?;
            let d2e = second_frechet_derivative(&spec, &self.generators[i], &self.generators[j], &Exp)?;
            if !self.normalized {
                return Ok(d2e);
            }
            let (e, di, dj) = (&parts.e, &parts.first[i], &parts.first[j]);
            let z = e.trace();
            let (zi, zj, zij) = (di.trace(), dj.trace(), d2e.trace());
            // second derivative of E / Tr E
            let out = Hermitian::symmetrized(
                d2e.scaled(1.0 / z).as_matrix()
                    - di.scaled(zj / (z * z)).as_matrix()
                    - dj.scaled(zi / (z * z)).as_matrix()
                    + e.scaled(2.0 * zi * zj / (z * z * z) - zij / (z * z)).as_matrix(),
            );
            Ok(out)
        })())
    }
}

/// Chart `σ(ξ) = ℓ_α^{-1}(Σ ξ^i X_i)`: the coordinates `ξ` are affine for
/// the flat connection ∇̂^(α) on the positive definite matrices.
#[derive(Clone, Debug)]
pub struct AffineChart {
    alpha: f64,
    elements: Vec<Hermitian>,
    inverse: InverseEmbedding,
}

impl AffineChart {
    pub fn new(alpha: f64, elements: Vec<Hermitian>) -> Result<Self> {
        let inverse = InverseEmbedding::new(alpha)?;
        if elements.is_empty() {
            return Err(Error::Invalid("affine chart needs at least one operator".into()));
        }
        check_dims(&elements[0], &elements)?;
        Ok(AffineChart {
            alpha,
            elements,
            inverse,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    fn embedded(&self, xi: &[f64]) -> crate::matrix_core::Spectrum {
        combine(&self.elements, xi).spectrum()
    }
}

impl ParametrizedFamily for AffineChart {
    fn param_dim(&self) -> usize {
        self.elements.len()
    }
    fn matrix_dim(&self) -> usize {
        self.elements[0].dim()
    }
    fn unit_trace(&self) -> bool {
        false
    }
    fn chart(&self, xi: &[f64]) -> Result<Hermitian> {
        self.embedded(xi).apply(&self.inverse)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }
    fn analytic_first(&self, xi: &[f64], i: usize) -> Option<Result<Hermitian>> {
        Some(frechet_derivative(&self.embedded(xi), &self.elements[i], &self.inverse))
    }
    fn analytic_second(&self, xi: &[f64], i: usize, j: usize) -> Option<Result<Hermitian>> {
        Some(second_frechet_derivative(
            &self.embedded(xi),
            &self.elements[i],
            &self.elements[j],
            &self.inverse,
        ))
    }
}

/// A chart given by a closure, differentiated by central differences.
pub struct FnFamily<F> {
    param_dim: usize,
    matrix_dim: usize,
    unit_trace: bool,
    chart: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&[f64]) -> Result<Hermitian> + Send + Sync,
{
    pub fn new(param_dim: usize, matrix_dim: usize, unit_trace: bool, chart: F) -> Self {
        FnFamily {
            param_dim,
            matrix_dim,
            unit_trace,
            chart,
        }
    }
}

impl<F> ParametrizedFamily for FnFamily<F>
where
    F: Fn(&[f64]) -> Result<Hermitian> + Send + Sync,
{
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }
    fn unit_trace(&self) -> bool {
        self.unit_trace
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        (self.chart)(theta)
    }
}

/// Wraps a family so that its derivatives are taken by central differences,
/// ignoring any analytic derivatives it provides.
pub struct FiniteDifference<F>(pub F);

impl<F: ParametrizedFamily> ParametrizedFamily for FiniteDifference<F> {
    fn param_dim(&self) -> usize {
        self.0.param_dim()
    }
    fn matrix_dim(&self) -> usize {
        self.0.matrix_dim()
    }
    fn unit_trace(&self) -> bool {
        self.0.unit_trace()
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        self.0.chart(theta)
    }
}
