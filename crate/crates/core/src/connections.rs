//! The α-connections: the flat ∇̂^(α) on positive definite matrices, its
//! projection ∇^(α) onto the density matrices, and their parallel transports.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{
    alpha_representation, check_alpha, family_first_derivative, family_point, family_second_derivative,
    representation_convert, sphere_project, DerivativeMode, Embedding, ParametrizedFamily, StateMatrix,
    TangentVector, WeightMatrix,
};
use crate::matrix_core::{frechet_derivative, second_frechet_derivative, Hermitian};

/// Default number of steps for the projected transport.
pub const DEFAULT_TRANSPORT_STEPS: usize = 256;

/// Largest Frobenius distance allowed between consecutive curve samples.
pub const CONTINUITY_LIMIT: f64 = 0.5;

/// A covariant derivative `∇_{∂i} ∂j` at a chart point.
#[derive(Clone, Debug)]
pub struct CovariantDerivativeResult {
    pub base: Arc<WeightMatrix>,
    /// Mixture representation of the result.
    pub vector: TangentVector,
    pub alpha: f64,
    /// The result in α-representation.
    pub alpha_rep: Hermitian,
}

/// `∂²ℓ_α(σ(θ))/∂θ^i∂θ^j`.
///
/// Families with analytic derivatives use the chain rule
/// `D²ℓ_α(σ)[∂_iσ, ∂_jσ] + Dℓ_α(σ)[∂_i∂_jσ]`; others fall back to the
/// nine-point stencil on `θ ↦ ℓ_α(σ(θ))`.
pub fn embedded_second_derivative(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
    alpha: f64,
) -> Result<Hermitian> {
    let emb = Embedding::new(alpha)?;
    let base = family_point(family, theta)?;
    match family.derivative_mode() {
        DerivativeMode::Analytic => {
            let di = family_first_derivative(family, theta, i)?;
            let dj = family_first_derivative(family, theta, j)?;
            let dij = family_second_derivative(family, theta, i, j)?;
            let spec = base.spectrum();
            Ok(&second_frechet_derivative(spec, &di, &dj, &emb)? + &frechet_derivative(spec, &dij, &emb)?)
        }
        DerivativeMode::CentralDifference { .. } => fd::central_second(
            |t: &[f64]| family_point(family, t)?.apply(&emb),
            theta,
            i,
            j,
            fd::SECOND_STEP,
        ),
    }
}

fn result_from_alpha_rep(
    base: Arc<WeightMatrix>,
    alpha_rep: Hermitian,
    alpha: f64,
    on_state: bool,
) -> Result<CovariantDerivativeResult> {
    let mixture = representation_convert(&base, &alpha_rep, alpha, -1.0)?;
    let vector = if on_state {
        TangentVector::at_state_shared(base.clone(), mixture)?
    } else {
        TangentVector::at_weight_shared(base.clone(), mixture)?
    };
    Ok(CovariantDerivativeResult {
        base,
        vector,
        alpha,
        alpha_rep,
    })
}

/// `∇̂^(α)_{∂i} ∂j`: the α-representation is the plain second derivative of
/// the embedded chart.
pub fn ext_covariant_derivative(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
    alpha: f64,
) -> Result<CovariantDerivativeResult> {
    let w = embedded_second_derivative(family, theta, i, j, alpha)?;
    let base = Arc::new(family_point(family, theta)?);
    result_from_alpha_rep(base, w, alpha, false)
}

fn require_states(family: &dyn ParametrizedFamily) -> Result<()> {
    if family.unit_trace() {
        Ok(())
    } else {
        Err(Error::Invalid("family does not consist of density matrices".into()))
    }
}

/// `∇^(α)_{∂i} ∂j` on the density matrices: the ∇̂^(α) result projected onto
/// the tangent space of the sphere.
pub fn covariant_derivative_on_m(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
    alpha: f64,
) -> Result<CovariantDerivativeResult> {
    require_states(family)?;
    let w = embedded_second_derivative(family, theta, i, j, alpha)?;
    let rho = StateMatrix::from_weight(family_point(family, theta)?)?;
    let projected = sphere_project(&rho, alpha, &w)?;
    result_from_alpha_rep(Arc::new(rho.into_weight()), projected, alpha, true)
}

/// `((1+α)/2) ∇^(1) + ((1−α)/2) ∇^(−1)`, combined in mixture representation.
pub fn convex_mixture_derivative(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
    alpha: f64,
) -> Result<CovariantDerivativeResult> {
    check_alpha(alpha)?;
    let e = covariant_derivative_on_m(family, theta, i, j, 1.0)?;
    let m = covariant_derivative_on_m(family, theta, i, j, -1.0)?;
    let mixture = &e.vector.mixture().scaled(0.5 * (1.0 + alpha)) + &m.vector.mixture().scaled(0.5 * (1.0 - alpha));
    let vector = e.vector.with_mixture(mixture)?;
    let alpha_rep = alpha_representation(&vector, alpha)?;
    Ok(CovariantDerivativeResult {
        base: e.base,
        vector,
        alpha,
        alpha_rep,
    })
}

/// A curve `t ↦ σ(θ(t))`, `t ∈ [0, 1]`, sampled at `step_count + 1` points.
pub struct CurveSpec<'a> {
    family: &'a dyn ParametrizedFamily,
    path: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync + 'a>,
    step_count: usize,
}

impl<'a> CurveSpec<'a> {
    pub fn new<P>(family: &'a dyn ParametrizedFamily, path: P, step_count: usize) -> Result<Self>
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'a,
    {
        if step_count == 0 {
            return Err(Error::Parameter {
                name: "step_count",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(CurveSpec {
            family,
            path: Box::new(path),
            step_count,
        })
    }

    /// Straight segment in parameter space.
    pub fn segment(family: &'a dyn ParametrizedFamily, from: &[f64], to: &[f64], step_count: usize) -> Result<Self> {
        Self::polyline(family, &[from.to_vec(), to.to_vec()], step_count)
    }

    /// Piecewise-linear path through `points`, uniform in `t` per segment.
    pub fn polyline(family: &'a dyn ParametrizedFamily, points: &[Vec<f64>], step_count: usize) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| p.len() != family.param_dim()) {
            return Err(Error::Invalid("polyline points must match the parameter dimension".into()));
        }
        let pts = points.to_vec();
        let path = move |t: f64| -> Vec<f64> {
            if pts.len() == 1 || t >= 1.0 {
                return pts[pts.len() - 1].clone();
            }
            let segs = (pts.len() - 1) as f64;
            let s = (t.clamp(0.0, 1.0) * segs).min(segs - 1e-15);
            let k = s.floor() as usize;
            let u = s - k as f64;
            pts[k].iter().zip(&pts[k + 1]).map(|(a, b)| a + u * (b - a)).collect()
        };
        Self::new(family, path, step_count)
    }

    pub fn family(&self) -> &dyn ParametrizedFamily {
        self.family
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn with_steps(self, step_count: usize) -> Result<Self> {
        CurveSpec::new(self.family, self.path, step_count)
    }

    pub fn theta(&self, t: f64) -> Vec<f64> {
        (self.path)(t)
    }

    pub fn point(&self, t: f64) -> Result<WeightMatrix> {
        family_point(self.family, &self.theta(t))
    }

    fn samples(&self, steps: usize) -> Result<Vec<WeightMatrix>> {
        let pts = (0..=steps)
            .map(|k| self.point(k as f64 / steps as f64))
            .collect::<Result<Vec<_>>>()?;
        for (k, w) in pts.windows(2).enumerate() {
            let distance = (w[1].matrix() - w[0].matrix()).frobenius_norm();
            if distance > CONTINUITY_LIMIT {
                return Err(Error::CoarseCurve {
                    step: k,
                    distance,
                    limit: CONTINUITY_LIMIT,
                });
            }
        }
        Ok(pts)
    }

    /// Checks the continuity bound at the curve's own discretization.
    pub fn check_continuity(&self) -> Result<()> {
        self.samples(self.step_count).map(|_| ())
    }
}

fn check_start(v: &TangentVector, start: &WeightMatrix) -> Result<()> {
    if v.base().same_point(start, 1e-12) {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// Flat transport on the positive definite matrices between two points:
/// the α-representation is carried over unchanged.
pub fn flat_transport(v: &TangentVector, to: &WeightMatrix, alpha: f64) -> Result<TangentVector> {
    let w = alpha_representation(v, alpha)?;
    let mixture = representation_convert(to, &w, alpha, -1.0)?;
    TangentVector::at_weight(to, mixture)
}

/// `τ̂^(α)` along a curve. The connection is flat, so only the endpoints
/// matter and the step count is ignored.
pub fn parallel_transport_ext(curve: &CurveSpec<'_>, v: &TangentVector, alpha: f64) -> Result<TangentVector> {
    check_start(v, &curve.point(0.0)?)?;
    flat_transport(v, &curve.point(1.0)?, alpha)
}

/// Projected transport with a fixed number of steps, no extrapolation.
/// Returns the α-representation at the endpoint.
fn projected_alpha_rep(curve: &CurveSpec<'_>, v: &TangentVector, alpha: f64, steps: usize) -> Result<(StateMatrix, Hermitian)> {
    let pts = curve.samples(steps)?;
    let mut w = alpha_representation(v, alpha)?;
    let mut last = None;
    for p in pts.into_iter().skip(1) {
        let rho = StateMatrix::from_weight(p)?;
        w = sphere_project(&rho, alpha, &w)?;
        last = Some(rho);
    }
    let end = last.expect("curve has at least one step");
    Ok((end, w))
}

/// The projected transport of `v` to every sample point `k / steps`,
/// without extrapolation. Entry 0 is `v` itself.
pub fn projected_transport_trajectory(
    curve: &CurveSpec<'_>,
    v: &TangentVector,
    alpha: f64,
    steps: usize,
) -> Result<Vec<TangentVector>> {
    check_alpha(alpha)?;
    require_states(curve.family)?;
    let pts = curve.samples(steps.max(1))?;
    check_start(v, &pts[0])?;
    let mut w = alpha_representation(v, alpha)?;
    let mut out = vec![v.clone()];
    for p in pts.into_iter().skip(1) {
        let rho = StateMatrix::from_weight(p)?;
        w = sphere_project(&rho, alpha, &w)?;
        let mixture = representation_convert(&rho, &w, alpha, -1.0)?;
        out.push(TangentVector::at_state(&rho, mixture)?);
    }
    Ok(out)
}

/// Projected transport with exactly `steps` steps.
pub fn projected_transport_steps(
    curve: &CurveSpec<'_>,
    v: &TangentVector,
    alpha: f64,
    steps: usize,
) -> Result<TangentVector> {
    check_alpha(alpha)?;
    require_states(curve.family)?;
    check_start(v, &curve.point(0.0)?)?;
    let (end, w) = projected_alpha_rep(curve, v, alpha, steps.max(1))?;
    let mixture = representation_convert(&end, &w, alpha, -1.0)?;
    TangentVector::at_state(&end, mixture)
}

/// `τ^(α)` on the density matrices: at every step the α-representation is
/// kept and projected onto the next tangent space. With an even step count
/// `n ≥ 2` the result is Richardson-extrapolated as `2 T(n) − T(n/2)`.
pub fn parallel_transport_on_m(curve: &CurveSpec<'_>, v: &TangentVector, alpha: f64) -> Result<TangentVector> {
    check_alpha(alpha)?;
    require_states(curve.family)?;
    check_start(v, &curve.point(0.0)?)?;
    let n = curve.step_count;
    let (end, fine) = projected_alpha_rep(curve, v, alpha, n)?;
    let w = if n >= 2 && n % 2 == 0 {
        let (_, coarse) = projected_alpha_rep(curve, v, alpha, n / 2)?;
        &fine.scaled(2.0) - &coarse
    } else {
        fine
    };
    let mixture = representation_convert(&end, &w, alpha, -1.0)?;
    TangentVector::at_state(&end, mixture)
}
