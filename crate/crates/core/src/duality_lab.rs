//! Numerical checks of duality between α-connections and monotone metrics.
//!
//! Positive statements are asserted against a tolerance, negative ones
//! against a separation gap; anything in between is reported as
//! inconclusive rather than silently passed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::connections::{
    covariant_derivative_on_m, convex_mixture_derivative, ext_covariant_derivative, flat_transport,
    parallel_transport_on_m, projected_transport_trajectory, CurveSpec, DEFAULT_TRANSPORT_STEPS,
};
use crate::error::{Error, Result};
use crate::families::{AffineChart, ExponentialFamily, MixtureFamily};
use crate::fd;
use crate::manifold::{
    affine_coordinates, check_alpha, family_first_derivative, family_frame, family_point, family_tangent, gell_mann_matrices,
    DerivativeMode, OperatorBasis, ParametrizedFamily, StateMatrix, TangentVector, WeightMatrix,
};
use crate::matrix_core::Hermitian;
use crate::metrics::{metric_matrix, petz_kernel, relative_entropy, MonotoneFunction};
use crate::random;

/// Largest defect accepted as duality.
pub const DEFAULT_TOL: f64 = 5e-5;
/// Smallest defect accepted as a failure of duality.
pub const DEFAULT_GAP: f64 = 1e-2;

/// Which manifold the connections live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Density matrices, with the projected connections ∇^(α).
    States,
    /// Positive definite matrices, with the flat connections ∇̂^(α).
    Weights,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::States => "states",
            Space::Weights => "weights",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Dual,
    NotDual,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Dual => "dual",
            Verdict::NotDual => "not-dual",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub fn classify(defect: f64, tol: f64, gap: f64) -> Verdict {
    if defect <= tol {
        Verdict::Dual
    } else if defect >= gap {
        Verdict::NotDual
    } else {
        Verdict::Inconclusive
    }
}

/// A metric `scale · ĝ_f`.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub function: MonotoneFunction,
    pub scale: f64,
}

impl Candidate {
    pub fn new(function: MonotoneFunction) -> Self {
        Candidate { function, scale: 1.0 }
    }

    pub fn scaled(function: MonotoneFunction, scale: f64) -> Self {
        Candidate { function, scale }
    }

    pub fn label(&self) -> String {
        if self.scale == 1.0 {
            self.function.name().to_string()
        } else {
            format!("{}*{}", self.scale, self.function.name())
        }
    }

    fn gram(&self, sigma: &WeightMatrix, frame: &[TangentVector]) -> Result<DMatrix<f64>> {
        Ok(metric_matrix(sigma, &self.function, frame)? * self.scale)
    }
}

fn metric_at(family: &dyn ParametrizedFamily, theta: &[f64], c: &Candidate) -> Result<Vec<f64>> {
    let (base, frame) = family_frame(family, theta)?;
    Ok(c.gram(&base, &frame)?.as_slice().to_vec())
}

fn connection(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    i: usize,
    j: usize,
    alpha: f64,
    space: Space,
) -> Result<Hermitian> {
    let r = match space {
        Space::States => covariant_derivative_on_m(family, theta, i, j, alpha)?,
        Space::Weights => ext_covariant_derivative(family, theta, i, j, alpha)?,
    };
    Ok(r.vector.mixture().clone())
}

/// `∂_i g_jk − g(∇^(α)_i ∂_j, ∂_k) − g(∂_j, ∇^(−α)_i ∂_k)` for all
/// `(i, j, k)`, flattened as `(i·d + j)·d + k`.
pub fn defect_tensor(
    family: &dyn ParametrizedFamily,
    theta: &[f64],
    candidate: &Candidate,
    alpha: f64,
    space: Space,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if space == Space::States && !family.unit_trace() {
        return Err(Error::Invalid("the projected connections need a family of states".into()));
    }
    let d = family.param_dim();
    let (base, frame) = family_frame(family, theta)?;
    let kernel = petz_kernel(&base, &candidate.function)?;
    let s = candidate.scale;
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        let dg: Vec<f64> = fd::central_first(|t: &[f64]| metric_at(family, t, candidate), theta, i, fd::FIRST_STEP)?;
        let nabla: Vec<Hermitian> = (0..d)
            .map(|j| connection(family, theta, i, j, alpha, space))
            .collect::<Result<_>>()?;
        let dual: Vec<Hermitian> = if alpha == 0.0 {
            nabla.clone()
        } else {
            (0..d)
                .map(|k| connection(family, theta, i, k, -alpha, space))
                .collect::<Result<_>>()?
        };
        for j in 0..d {
            for k in 0..d {
                let lhs = dg[j + k * d];
                let rhs = s * kernel.inner(&nabla[j], frame[k].mixture()) + s * kernel.inner(frame[j].mixture(), &dual[k]);
                out[(i * d + j) * d + k] = lhs - rhs;
            }
        }
    }
    Ok(out)
}

/// Outcome of [`duality_defect`].
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub metric_name: String,
    pub alpha: f64,
    pub space: Space,
    /// Maximum of `per_triple`.
    pub defect: f64,
    pub param_dim: usize,
    /// `max_grid |defect_ijk|`, flattened as `(i·d + j)·d + k`.
    pub per_triple: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    /// Largest absolute defect at each grid point.
    pub per_point: Vec<f64>,
}

impl DualityReport {
    pub fn verdict(&self, tol: f64, gap: f64) -> Verdict {
        classify(self.defect, tol, gap)
    }
}

pub fn duality_defect(
    family: &dyn ParametrizedFamily,
    grid: &[Vec<f64>],
    candidate: &Candidate,
    alpha: f64,
    space: Space,
) -> Result<DualityReport> {
    let d = family.param_dim();
    let mut per_triple = vec![0.0f64; d * d * d];
    let mut per_point = Vec::with_capacity(grid.len());
    for theta in grid {
        let t = defect_tensor(family, theta, candidate, alpha, space)?;
        let mut worst = 0.0f64;
        for (acc, v) in per_triple.iter_mut().zip(&t) {
            *acc = acc.max(v.abs());
            worst = worst.max(v.abs());
        }
        per_point.push(worst);
    }
    Ok(DualityReport {
        metric_name: candidate.label(),
        alpha,
        space,
        defect: per_triple.iter().copied().fold(0.0, f64::max),
        param_dim: d,
        per_triple,
        grid: grid.to_vec(),
        per_point,
    })
}

/// A family together with the parameter points it is probed at.
pub struct Probe {
    pub name: String,
    pub family: ExponentialFamily,
    pub grid: Vec<Vec<f64>>,
}

/// The families used throughout the duality experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentedFamily {
    /// `exp(H_0 + θ·σ⃗)`, the full qubit chart (normalized on states,
    /// with the identity as a fourth generator on weights).
    Qubit,
    /// `exp(H_0 + θ^1 λ_1 + θ^2 λ_5 + θ^3 λ_6)` on qutrits, a 3-parameter
    /// sub-chart built from three mutually non-commuting Gell-Mann matrices.
    Qutrit,
}

impl DocumentedFamily {
    pub fn name(self) -> &'static str {
        match self {
            DocumentedFamily::Qubit => "qubit",
            DocumentedFamily::Qutrit => "qutrit",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            DocumentedFamily::Qubit => 2,
            DocumentedFamily::Qutrit => 3,
        }
    }

    pub fn for_dim(n: usize) -> Result<Self> {
        match n {
            2 => Ok(DocumentedFamily::Qubit),
            3 => Ok(DocumentedFamily::Qutrit),
            _ => Err(Error::Parameter {
                name: "dim",
                value: n as f64,
                reason: "documented families exist for N = 2 and N = 3",
            }),
        }
    }

    pub fn build(self, space: Space) -> ExponentialFamily {
        let normalized = space == Space::States;
        match self {
            DocumentedFamily::Qubit => {
                let mut gens = vec![Hermitian::pauli_x(), Hermitian::pauli_y(), Hermitian::pauli_z()];
                if !normalized {
                    gens.insert(0, Hermitian::identity(2));
                }
                ExponentialFamily::new(Hermitian::pauli_z().scaled(0.3), gens, normalized).unwrap()
            }
            DocumentedFamily::Qutrit => {
                let gm = gell_mann_matrices(3);
                let gens = vec![gm[0].clone(), gm[4].clone(), gm[2].clone()];
                ExponentialFamily::new(Hermitian::diagonal(&[0.5, 0.0, -0.5]), gens, normalized).unwrap()
            }
        }
    }

    /// `count` points with coordinates uniform in `[−0.5, 0.5]`, drawn from
    /// the stream of `seed` reserved for this family.
    pub fn random_grid(self, space: Space, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let d = self.build(space).param_dim();
        let stream = match self {
            DocumentedFamily::Qubit => 0,
            DocumentedFamily::Qutrit => 1,
        };
        let mut rng = random::stream(seed, stream);
        (0..count)
            .map(|_| (0..d).map(|_| random::uniform(&mut rng, -0.5, 0.5)).collect())
            .collect()
    }

    pub fn probe(self, space: Space, seed: u64, count: usize) -> Probe {
        Probe {
            name: self.name().to_string(),
            family: self.build(space),
            grid: self.random_grid(space, seed, count),
        }
    }
}

/// Default number of random base points per family.
pub const DEFAULT_GRID_POINTS: usize = 3;

/// Both documented families with their seeded grids.
pub fn documented_ensemble(space: Space, seed: u64, points: usize) -> Vec<Probe> {
    [DocumentedFamily::Qubit, DocumentedFamily::Qutrit]
        .into_iter()
        .map(|f| f.probe(space, seed, points))
        .collect()
}

/// The fixed qubit probe used as falsification witness. On weights the
/// identity coefficient is held at zero.
pub fn witness_probe(space: Space) -> Probe {
    let points = [[0.4, -0.3, 0.2], [-0.2, 0.35, 0.45]];
    let grid = points
        .iter()
        .map(|p| match space {
            Space::States => p.to_vec(),
            Space::Weights => std::iter::once(0.0).chain(p.iter().copied()).collect(),
        })
        .collect();
    Probe {
        name: "qubit-witness".into(),
        family: DocumentedFamily::Qubit.build(space),
        grid,
    }
}

/// Worst defect over every probe.
pub fn ensemble_defect(probes: &[Probe], candidate: &Candidate, alpha: f64, space: Space) -> Result<DualityReport> {
    let mut reports = probes
        .iter()
        .map(|p| duality_defect(&p.family, &p.grid, candidate, alpha, space))
        .collect::<Result<Vec<_>>>()?;
    let mut best = reports.remove(0);
    for r in reports {
        if r.defect > best.defect {
            let keep_grid = best.grid.clone();
            best = DualityReport {
                grid: [keep_grid, r.grid.clone()].concat(),
                ..r
            };
        } else {
            best.grid.extend(r.grid);
        }
    }
    Ok(best)
}

/// Outcome of [`transport_duality_check`].
#[derive(Clone, Debug)]
pub struct TransportDualityReport {
    pub metric_name: String,
    pub alpha: f64,
    pub space: Space,
    /// `t` at which the metric was compared.
    pub times: Vec<f64>,
    /// `g_{γ(t)}(τ Y, τ* Z)` at each sample.
    pub values: Vec<f64>,
    /// `max_t |values(t) − values(0)|`.
    pub deviation: f64,
}

/// Compares `g(Y, Z)` at the start of a curve with `g(τ^(α) Y, τ^(−α) Z)`
/// along it. On weights both transports are exact. On states they are the
/// projected transports, Richardson-extrapolated at the even sample points
/// of the curve's step count.
pub fn transport_duality_check(
    curve: &CurveSpec<'_>,
    candidate: &Candidate,
    alpha: f64,
    y: &TangentVector,
    z: &TangentVector,
    space: Space,
    samples: usize,
) -> Result<TransportDualityReport> {
    check_alpha(alpha)?;
    let g = |a: &TangentVector, b: &TangentVector| -> Result<f64> {
        Ok(candidate.scale * petz_kernel(a.base(), &candidate.function)?.inner(a.mixture(), b.mixture()))
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    match space {
        Space::Weights => {
            let samples = samples.max(1);
            for k in 0..=samples {
                let t = k as f64 / samples as f64;
                let p = curve.point(t)?;
                if k == 0 && !(y.base().same_point(&p, 1e-12) && z.base().same_point(&p, 1e-12)) {
                    return Err(Error::BaseMismatch);
                }
                let ty = flat_transport(y, &p, alpha)?;
                let tz = flat_transport(z, &p, -alpha)?;
                times.push(t);
                values.push(g(&ty, &tz)?);
            }
        }
        Space::States => {
            let n = curve.step_count().max(2) & !1;
            let fine_y = projected_transport_trajectory(curve, y, alpha, n)?;
            let fine_z = projected_transport_trajectory(curve, z, -alpha, n)?;
            let coarse_y = projected_transport_trajectory(curve, y, alpha, n / 2)?;
            let coarse_z = projected_transport_trajectory(curve, z, -alpha, n / 2)?;
            let stride = (n / 2 / samples.max(1)).max(1);
            for m in (0..=n / 2).step_by(stride) {
                let ry = fine_y[2 * m].with_mixture(&fine_y[2 * m].mixture().scaled(2.0) - coarse_y[m].mixture())?;
                let rz = fine_z[2 * m].with_mixture(&fine_z[2 * m].mixture().scaled(2.0) - coarse_z[m].mixture())?;
                times.push(m as f64 / (n / 2) as f64);
                values.push(g(&ry, &rz)?);
            }
        }
    }
    let deviation = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
    Ok(TransportDualityReport {
        metric_name: candidate.label(),
        alpha,
        space,
        times,
        values,
        deviation,
    })
}

/// Outcome of [`potential_check`].
#[derive(Clone, Debug)]
pub struct PotentialReport {
    pub alpha: f64,
    pub xi: Vec<f64>,
    /// Richardson-extrapolated finite-difference Hessian of
    /// `Ψ̃_α = (2/(1+α)) Tr σ`.
    pub hessian: DMatrix<f64>,
    /// `ĝ^(α)_ij` from the Petz kernel.
    pub metric_matrix: DMatrix<f64>,
    /// `max_ij |hessian − metric_matrix|`.
    pub residual: f64,
    /// Largest residual of the affine fit of `η̃ = ∇Ψ̃_α` against the
    /// ∇̂^(−α)-affine coordinates.
    pub affine_residual: f64,
}

/// The metric function pairing with `α`: WYD inside `(−1, 1)`, BKM at the ends.
pub fn wyd_or_bkm(alpha: f64) -> Result<MonotoneFunction> {
    check_alpha(alpha)?;
    if alpha.abs() == 1.0 {
        Ok(MonotoneFunction::bkm())
    } else {
        MonotoneFunction::wyd_alpha(alpha)
    }
}

fn check_potential_alpha(alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha == -1.0 {
        return Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            reason: "the potential 2/(1+α) Tr σ is undefined at α = −1",
        });
    }
    Ok(())
}

/// `(2/(1+α)) Tr σ(ξ)`.
pub fn potential(family: &dyn ParametrizedFamily, xi: &[f64], alpha: f64) -> Result<f64> {
    check_potential_alpha(alpha)?;
    Ok(2.0 / (1.0 + alpha) * family_point(family, xi)?.trace())
}

/// `η̃_i = ∂Ψ̃_α/∂ξ^i = (2/(1+α)) Tr ∂_iσ`.
pub fn dual_coordinates(family: &dyn ParametrizedFamily, xi: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_potential_alpha(alpha)?;
    (0..family.param_dim())
        .map(|i| Ok(2.0 / (1.0 + alpha) * family_first_derivative(family, xi, i)?.trace()))
        .collect()
}

/// Largest ∇̂^(α) covariant derivative of the coordinate fields, in
/// Frobenius norm of the α-representation.
pub fn flatness_residual(family: &dyn ParametrizedFamily, xi: &[f64], alpha: f64) -> Result<f64> {
    let d = family.param_dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max(ext_covariant_derivative(family, xi, i, j, alpha)?.alpha_rep.frobenius_norm());
        }
    }
    Ok(worst)
}

/// Flatness threshold for accepting coordinates as ∇̂^(α)-affine.
pub const AFFINE_TOL: f64 = 1e-6;

fn require_affine(family: &dyn ParametrizedFamily, xi: &[f64], alpha: f64) -> Result<()> {
    let residual = flatness_residual(family, xi, alpha)?;
    if residual > AFFINE_TOL {
        Err(Error::NotAffine { residual })
    } else {
        Ok(())
    }
}

fn metric_gram(family: &dyn ParametrizedFamily, xi: &[f64], alpha: f64) -> Result<DMatrix<f64>> {
    let (base, frame) = family_frame(family, xi)?;
    metric_matrix(&base, &wyd_or_bkm(alpha)?, &frame)
}

/// Least-squares fit `y ≈ A x + b` per output; returns the largest residual.
fn affine_fit_residual(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    let m = xs.len();
    let p = xs[0].len() + 1;
    let design = DMatrix::from_fn(m, p, |r, c| if c == 0 { 1.0 } else { xs[r][c - 1] });
    let svd = design.clone().svd(true, true);
    let mut worst = 0.0f64;
    for out in 0..ys[0].len() {
        let y = DVector::from_iterator(m, ys.iter().map(|v| v[out]));
        let coef = svd.solve(&y, 1e-12).expect("SVD was computed with both factors");
        let fit = &design * coef;
        worst = worst.max((fit - y).amax());
    }
    worst
}

/// Checks that `Ψ̃_α` is a potential for `ĝ^(α)` in the affine chart at `ξ`,
/// and that `η̃` is affinely related to the ∇̂^(−α)-affine coordinates of
/// `basis`, using `xi` and `probes` nearby points for the regression.
pub fn potential_check(
    family: &dyn ParametrizedFamily,
    basis: &OperatorBasis,
    xi: &[f64],
    alpha: f64,
    probes: &[Vec<f64>],
) -> Result<PotentialReport> {
    check_potential_alpha(alpha)?;
    require_affine(family, xi, alpha)?;
    let d = family.param_dim();
    let psi = |t: &[f64]| potential(family, t, alpha);
    let mut hessian = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let coarse = fd::central_second(psi, xi, i, j, 2.0 * fd::SECOND_STEP)?;
            let fine = fd::central_second(psi, xi, i, j, fd::SECOND_STEP)?;
            hessian[(i, j)] = (4.0 * fine - coarse) / 3.0;
        }
    }
    let metric = metric_gram(family, xi, alpha)?;
    let residual = (&hessian - &metric).amax();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for point in std::iter::once(xi.to_vec()).chain(probes.iter().cloned()) {
        let sigma = family_point(family, &point)?;
        xs.push(affine_coordinates(&sigma, -alpha, basis)?);
        ys.push(dual_coordinates(family, &point, alpha)?);
    }
    let affine_residual = if xs.len() > xs[0].len() + 1 {
        affine_fit_residual(&xs, &ys)
    } else {
        return Err(Error::Invalid(format!(
            "the affine regression needs at least {} points",
            xs[0].len() + 2
        )));
    };
    Ok(PotentialReport {
        alpha,
        xi: xi.to_vec(),
        hessian,
        metric_matrix: metric,
        residual,
        affine_residual,
    })
}

/// Outcome of [`dual_coordinate_check`] at one point.
#[derive(Clone, Debug)]
pub struct DualCoordinateReport {
    pub alpha: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    /// `max_ij |∂η̃_i/∂ξ^j − ĝ^(α)_ij|`.
    pub jacobian_residual: f64,
    /// `|Ψ̃_α(ξ) + Φ(η̃) − ξ·η̃|` with `Φ` from a numeric Legendre transform.
    pub legendre_residual: f64,
    /// `|Φ(η̃) − (2/(1−α)) Tr σ|`, the closed form of the dual potential.
    pub dual_potential_residual: f64,
}

/// `Φ(η) = sup_ξ (ξ·η − Ψ̃_α(ξ))` by Newton's method from `start`.
pub fn legendre_transform(family: &dyn ParametrizedFamily, eta: &[f64], alpha: f64, start: &[f64]) -> Result<f64> {
    let mut xi = start.to_vec();
    for _ in 0..50 {
        let grad: Vec<f64> = dual_coordinates(family, &xi, alpha)?
            .iter()
            .zip(eta)
            .map(|(a, b)| b - a)
            .collect();
        let g = metric_gram(family, &xi, alpha)?;
        let step = g
            .cholesky()
            .ok_or_else(|| Error::Invalid("metric lost positive definiteness".into()))?
            .solve(&DVector::from_column_slice(&grad));
        for (x, s) in xi.iter_mut().zip(step.iter()) {
            *x += s;
        }
        if step.amax() < 1e-14 * xi.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            break;
        }
    }
    let dot: f64 = xi.iter().zip(eta).map(|(a, b)| a * b).sum();
    Ok(dot - potential(family, &xi, alpha)?)
}

pub fn dual_coordinate_check(family: &dyn ParametrizedFamily, alpha: f64, xi: &[f64]) -> Result<DualCoordinateReport> {
    check_potential_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            reason: "the dual potential 2/(1−α) Tr σ is undefined at α = 1",
        });
    }
    require_affine(family, xi, alpha)?;
    let d = family.param_dim();
    let eta = dual_coordinates(family, xi, alpha)?;
    let metric = metric_gram(family, xi, alpha)?;
    let mut jacobian_residual = 0.0f64;
    for j in 0..d {
        let col: Vec<f64> = fd::central_first(|t: &[f64]| dual_coordinates(family, t, alpha), xi, j, fd::FIRST_STEP)?;
        for i in 0..d {
            jacobian_residual = jacobian_residual.max((col[i] - metric[(i, j)]).abs());
        }
    }
    let start: Vec<f64> = xi.iter().enumerate().map(|(k, x)| x + 0.02 * (1.0 + k as f64 * 0.37).sin()).collect();
    let phi = legendre_transform(family, &eta, alpha, &start)?;
    let psi = potential(family, xi, alpha)?;
    let dot: f64 = xi.iter().zip(&eta).map(|(a, b)| a * b).sum();
    let closed = 2.0 / (1.0 - alpha) * family_point(family, xi)?.trace();
    Ok(DualCoordinateReport {
        alpha,
        xi: xi.to_vec(),
        eta,
        jacobian_residual,
        legendre_residual: (psi + phi - dot).abs(),
        dual_potential_residual: (phi - closed).abs(),
    })
}

/// Affine chart at α over `basis`, centred on a seeded random weight, plus
/// nearby probe points.
pub fn affine_probe(alpha: f64, basis: &OperatorBasis, seed: u64, index: u64, probes: usize) -> Result<(AffineChart, Vec<f64>, Vec<Vec<f64>>)> {
    let chart = AffineChart::new(alpha, basis.elements().to_vec())?;
    let mut rng = random::stream(seed, index);
    let sigma = random::weight(&mut rng, basis.dim());
    let xi = affine_coordinates(&sigma, alpha, basis)?;
    let scale = xi.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut nearby = Vec::with_capacity(probes);
    while nearby.len() < probes {
        let p: Vec<f64> = xi.iter().map(|x| x + 0.05 * scale * random::uniform(&mut rng, -1.0, 1.0)).collect();
        if family_point(&chart, &p).is_ok() {
            nearby.push(p);
        }
    }
    Ok((chart, xi, nearby))
}

/// One row of a uniqueness scan.
#[derive(Clone, Debug)]
pub struct ScanEntry {
    pub name: String,
    pub scale: f64,
    /// Whether theory says this candidate makes ∇^(±α) dual.
    pub expected_dual: bool,
    pub defect: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct UniquenessScanResult {
    pub alpha: f64,
    pub seed: u64,
    pub space: Space,
    pub entries: Vec<ScanEntry>,
    /// Every multiple of the paired function is dual.
    pub wyd_dual: bool,
    /// Every other candidate is clearly not dual.
    pub others_not_dual: bool,
    /// The unscaled paired function has the smallest defect.
    pub wyd_minimal: bool,
    pub any_inconclusive: bool,
}

impl UniquenessScanResult {
    pub fn passed(&self) -> bool {
        self.wyd_dual && self.others_not_dual && self.wyd_minimal && !self.any_inconclusive
    }
}

/// `(log t)² exp(−(log t)²)`: smooth, zero at 1 and invariant under `t ↦ 1/t`.
pub fn bump(t: f64) -> f64 {
    let l = t.ln();
    l * l * (-l * l).exp()
}

/// `f(t) (1 + ε bump(t))`. It keeps `f(1) = 1` and `f(t) = t f(1/t)`,
/// but it is not claimed to be operator monotone.
pub fn perturbed(f: &MonotoneFunction, eps: f64) -> MonotoneFunction {
    let base = f.clone();
    MonotoneFunction::custom(
        format!("{}*(1{eps:+}*bump)", f.name()),
        move |t| base.eval(t) * (1.0 + eps * bump(t)),
        false,
    )
}

/// Whether theory pairs `f` with ∇^(±α): WYD at `p = (1±α)/2` (the WYD
/// function is symmetric under `p ↦ 1 − p`), or BKM at `α = ±1`.
pub fn expected_dual(f: &MonotoneFunction, alpha: f64) -> bool {
    match f.wyd_parameter() {
        Some(p) => (p - 0.5 * (1.0 + alpha)).abs() < 1e-12 || (p - 0.5 * (1.0 - alpha)).abs() < 1e-12,
        None => alpha.abs() == 1.0 && f.name() == "bkm",
    }
}

/// The function paired with `α` and three times it, the other built-in
/// functions, and `perturbations` seeded perturbations of the paired
/// function with `|ε| ∈ [0.5, 1]`.
pub fn scan_candidates(alpha: f64, seed: u64, perturbations: usize) -> Result<Vec<Candidate>> {
    let paired = wyd_or_bkm(alpha)?;
    let mut out = vec![Candidate::new(paired.clone()), Candidate::scaled(paired.clone(), 3.0)];
    for f in [MonotoneFunction::bkm(), MonotoneFunction::bures(), MonotoneFunction::rld()] {
        if f.name() != paired.name() {
            out.push(Candidate::new(f));
        }
    }
    let mut rng = random::stream(seed, 1000);
    for _ in 0..perturbations {
        let magnitude = random::uniform(&mut rng, 0.5, 1.0);
        let eps = if rng.random::<bool>() { magnitude } else { -magnitude };
        out.push(Candidate::new(perturbed(&paired, eps)));
    }
    Ok(out)
}

pub fn uniqueness_scan(
    alpha: f64,
    candidates: &[Candidate],
    probes: &[Probe],
    space: Space,
    seed: u64,
    tol: f64,
    gap: f64,
) -> Result<UniquenessScanResult> {
    for c in candidates {
        c.function.check_invariants()?;
    }
    let mut entries = Vec::with_capacity(candidates.len());
    for c in candidates {
        let defect = ensemble_defect(probes, c, alpha, space)?.defect;
        entries.push(ScanEntry {
            name: c.label(),
            scale: c.scale,
            expected_dual: expected_dual(&c.function, alpha),
            defect,
            verdict: classify(defect, tol, gap),
        });
    }
    let wyd_dual = entries.iter().filter(|e| e.expected_dual).all(|e| e.verdict == Verdict::Dual);
    let others_not_dual = entries.iter().filter(|e| !e.expected_dual).all(|e| e.verdict == Verdict::NotDual);
    let reference = entries.iter().find(|e| e.expected_dual && e.scale == 1.0).map(|e| e.defect);
    let wyd_minimal = reference.is_some_and(|r| entries.iter().filter(|e| e.scale == 1.0).all(|e| r <= e.defect));
    let any_inconclusive = entries.iter().any(|e| e.verdict == Verdict::Inconclusive);
    Ok(UniquenessScanResult {
        alpha,
        seed,
        space,
        entries,
        wyd_dual,
        others_not_dual,
        wyd_minimal,
        any_inconclusive,
    })
}

/// Outcome of [`convexity_failure_check`].
#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub alpha: f64,
    /// Largest mixture-norm gap between ∇^(α) and the convex combination of
    /// ∇^(±1) over the probes.
    pub max_difference: f64,
    /// Defect of BKM against ∇^(±α) over the same probes.
    pub bkm_defect: f64,
}

/// Largest `‖∇^(α)_i∂_j − ((1+α)/2)∇^(1)_i∂_j − ((1−α)/2)∇^(−1)_i∂_j‖`.
pub fn convexity_difference(family: &dyn ParametrizedFamily, grid: &[Vec<f64>], alpha: f64) -> Result<f64> {
    let d = family.param_dim();
    let mut worst = 0.0f64;
    for theta in grid {
        for i in 0..d {
            for j in i..d {
                let a = covariant_derivative_on_m(family, theta, i, j, alpha)?;
                let b = convex_mixture_derivative(family, theta, i, j, alpha)?;
                worst = worst.max((a.vector.mixture() - b.vector.mixture()).frobenius_norm());
            }
        }
    }
    Ok(worst)
}

pub fn convexity_failure_check(alpha: f64, probes: &[Probe]) -> Result<ConvexityReport> {
    check_alpha(alpha)?;
    let mut max_difference = 0.0f64;
    for p in probes {
        max_difference = max_difference.max(convexity_difference(&p.family, &p.grid, alpha)?);
    }
    let bkm_defect = ensemble_defect(probes, &Candidate::new(MonotoneFunction::bkm()), alpha, Space::States)?.defect;
    Ok(ConvexityReport {
        alpha,
        max_difference,
        bkm_defect,
    })
}

/// Outcome of [`flatness_check`].
#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub alpha: f64,
    /// Largest `‖∇̂^(α)_i ∂_j‖` in a ξ-affine chart over all index pairs.
    pub affine_residual: f64,
    /// Difference between projected transports along [`documented_path_pair`].
    pub path_dependence: f64,
}

/// Two Bloch-ball paths between the same endpoints, and the tangent that is
/// transported along them: straight from `(0.5, 0, 0)` to `(0, 0.5, 0)`,
/// and the same ends via `(0, 0, 0.6)`, carrying `∂_z`.
pub fn documented_path_pair() -> (MixtureFamily, [Vec<f64>; 3], usize) {
    (
        MixtureFamily::bloch(),
        [vec![0.5, 0.0, 0.0], vec![0.0, 0.0, 0.6], vec![0.0, 0.5, 0.0]],
        2,
    )
}

/// ∇̂^(α)-flatness of the affine chart at a seeded N×N weight, and path
/// dependence of ∇^(α) on qubit states.
pub fn flatness_check(alpha: f64, dim: usize, seed: u64) -> Result<FlatnessReport> {
    check_alpha(alpha)?;
    let basis = OperatorBasis::gell_mann(dim);
    let (chart, xi, _) = affine_probe(alpha, &basis, seed, 2, 0)?;
    let affine_residual = flatness_residual(&chart, &xi, alpha)?;
    let (fam, [a, via, b], index) = documented_path_pair();
    let v = family_tangent(&fam, &a, index)?;
    let straight = CurveSpec::segment(&fam, &a, &b, DEFAULT_TRANSPORT_STEPS)?;
    let bent = CurveSpec::polyline(&fam, &[a.clone(), via, b.clone()], DEFAULT_TRANSPORT_STEPS)?;
    let x = parallel_transport_on_m(&straight, &v, alpha)?;
    let y = parallel_transport_on_m(&bent, &v, alpha)?;
    Ok(FlatnessReport {
        alpha,
        affine_residual,
        path_dependence: (x.mixture() - y.mixture()).frobenius_norm(),
    })
}

/// Outcome of [`classical_reduction_check`].
#[derive(Clone, Debug)]
pub struct ClassicalReport {
    /// Largest `|g_f(∂_i, ∂_j) − Σ_k ∂_i p_k ∂_j p_k / p_k|`.
    pub fisher_deviation: f64,
    /// Largest spread of `g_f` over the metric functions and α values tried.
    pub alpha_spread: f64,
    /// [`convexity_difference`] on the same points, maximized over α.
    pub convexity_difference: f64,
}

/// Compares every metric in `functions` with classical Fisher information on
/// the diagonal qutrit mixture family at `grid`.
pub fn classical_reduction_check(
    functions: &[MonotoneFunction],
    alphas: &[f64],
    grid: &[Vec<f64>],
) -> Result<ClassicalReport> {
    let fam = MixtureFamily::qutrit_diagonal();
    let mut fisher_deviation = 0.0f64;
    let mut alpha_spread = 0.0f64;
    let mut convexity = 0.0f64;
    for theta in grid {
        let (base, frame) = family_frame(&fam, theta)?;
        let p: Vec<f64> = (0..3).map(|k| base.matrix().as_matrix()[(k, k)].re).collect();
        let d = frame.len();
        let fisher = DMatrix::from_fn(d, d, |i, j| {
            (0..3)
                .map(|k| frame[i].mixture().as_matrix()[(k, k)].re * frame[j].mixture().as_matrix()[(k, k)].re / p[k])
                .sum::<f64>()
        });
        let mut all = functions.to_vec();
        for &alpha in alphas {
            all.push(wyd_or_bkm(alpha)?);
        }
        let gs = all
            .iter()
            .map(|f| metric_matrix(&base, f, &frame))
            .collect::<Result<Vec<_>>>()?;
        for g in &gs {
            fisher_deviation = fisher_deviation.max((g - &fisher).amax());
            alpha_spread = alpha_spread.max((g - &gs[0]).amax());
        }
        for &alpha in alphas {
            convexity = convexity.max(convexity_difference(&fam, std::slice::from_ref(theta), alpha)?);
        }
    }
    Ok(ClassicalReport {
        fisher_deviation,
        alpha_spread,
        convexity_difference: convexity,
    })
}

/// Gibbs states `exp(Σ θ^i Y_i − Ψ(θ) I)`.
#[derive(Clone, Debug)]
pub struct GibbsFamily {
    inner: ExponentialFamily,
}

impl GibbsFamily {
    /// Rejects observables that together with `I` are linearly dependent.
    pub fn new(observables: Vec<Hermitian>) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::Invalid("a Gibbs family needs at least one observable".into()));
        }
        let n = observables[0].dim();
        let mut all = vec![Hermitian::identity(n)];
        all.extend(observables.iter().cloned());
        let m = all.len();
        let mut gram = DMatrix::zeros(m, m);
        for a in 0..m {
            if all[a].dim() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: all[a].dim(),
                });
            }
            for b in 0..m {
                gram[(a, b)] = all[a].trace_product(&all[b]);
            }
        }
        let scale = gram.amax();
        if gram.symmetric_eigen().eigenvalues.min() <= 1e-10 * scale {
            return Err(Error::SingularBasis {
                reason: "identity and observables are linearly dependent".into(),
            });
        }
        Ok(GibbsFamily {
            inner: ExponentialFamily::new(Hermitian::zeros(n), observables, true)?,
        })
    }

    pub fn observables(&self) -> &[Hermitian] {
        self.inner.generators()
    }

    /// `Ψ(θ) = log Tr exp(Σ θ^i Y_i)`.
    pub fn log_partition(&self, theta: &[f64]) -> f64 {
        self.inner.log_partition(theta)
    }

    /// `Tr(σ Y_i)` for each observable.
    pub fn means_of(&self, rho: &WeightMatrix) -> Vec<f64> {
        self.observables().iter().map(|y| rho.matrix().trace_product(y)).collect()
    }
}

impl ParametrizedFamily for GibbsFamily {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn matrix_dim(&self) -> usize {
        self.inner.matrix_dim()
    }
    fn unit_trace(&self) -> bool {
        true
    }
    fn chart(&self, theta: &[f64]) -> Result<Hermitian> {
        self.inner.chart(theta)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }
    fn analytic_first(&self, theta: &[f64], i: usize) -> Option<Result<Hermitian>> {
        self.inner.analytic_first(theta, i)
    }
    fn analytic_second(&self, theta: &[f64], i: usize, j: usize) -> Option<Result<Hermitian>> {
        self.inner.analytic_second(theta, i, j)
    }
}

/// Iteration cap for the entropy projection.
pub const PROJECTION_MAX_ITERATIONS: usize = 200;

/// Outcome of [`entropy_projection_demo`].
#[derive(Clone, Debug)]
pub struct EntropyProjectionReport {
    pub theta: Vec<f64>,
    /// `S(ρ | σ(θ*))`.
    pub relative_entropy: f64,
    /// `max_i |Tr(σ(θ*) Y_i) − Tr(ρ Y_i)|`.
    pub mean_residual: f64,
    /// `max_i |ĝ^BKM_{σ(θ*)}(ρ − σ(θ*), ∂_iσ)|`.
    pub orthogonality_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `S(ρ | σ(θ)) = −S(ρ) − θ·⟨Y⟩_ρ + Ψ(θ)` over the Gibbs family by
/// damped Newton steps; the Hessian of `Ψ` is the BKM metric of the frame.
pub fn entropy_projection_demo(rho: &StateMatrix, gibbs: &GibbsFamily) -> Result<EntropyProjectionReport> {
    if rho.dim() != gibbs.matrix_dim() {
        return Err(Error::DimensionMismatch {
            left: gibbs.matrix_dim(),
            right: rho.dim(),
        });
    }
    let target = gibbs.means_of(rho);
    let d = gibbs.param_dim();
    let objective = |theta: &[f64]| -> f64 {
        gibbs.log_partition(theta) - theta.iter().zip(&target).map(|(a, b)| a * b).sum::<f64>()
    };
    let gradient_norm = |theta: &[f64]| -> Result<f64> {
        let sigma = family_point(gibbs, theta)?;
        Ok(gibbs.means_of(&sigma).iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    };
    let bkm = MonotoneFunction::bkm();
    let mut theta = vec![0.0; d];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < PROJECTION_MAX_ITERATIONS {
        let sigma = family_point(gibbs, &theta)?;
        let grad: Vec<f64> = gibbs.means_of(&sigma).iter().zip(&target).map(|(a, b)| a - b).collect();
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) <= 1e-13 {
            converged = true;
            break;
        }
        iterations += 1;
        let (base, frame) = family_frame(gibbs, &theta)?;
        let h = metric_matrix(&base, &bkm, &frame)?;
        let step = h
            .cholesky()
            .ok_or_else(|| Error::Invalid("BKM Hessian lost positive definiteness".into()))?
            .solve(&DVector::from_column_slice(&grad));
        let current = objective(&theta);
        let norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let slope: f64 = -grad.iter().zip(step.iter()).map(|(a, b)| a * b).sum::<f64>();
        let mut t = 1.0;
        let next = loop {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(x, s)| x - t * s).collect();
            if objective(&cand) <= current + 1e-4 * t * slope || t < 1e-8 || (t == 1.0 && gradient_norm(&cand)? < 0.5 * norm) {
                break cand;
            }
            t *= 0.5;
        };
        theta = next;
    }
    let sigma = family_point(gibbs, &theta)?;
    let sigma_state = StateMatrix::from_weight(sigma.clone())?;
    let mean_residual = gibbs
        .means_of(&sigma)
        .iter()
        .zip(&target)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let (base, frame) = family_frame(gibbs, &theta)?;
    let kernel = petz_kernel(&base, &bkm)?;
    let segment = rho.matrix() - sigma.matrix();
    let orthogonality_residual = frame
        .iter()
        .fold(0.0f64, |m, v| m.max(kernel.inner(&segment, v.mixture()).abs()));
    Ok(EntropyProjectionReport {
        relative_entropy: relative_entropy(rho, &sigma_state)?,
        theta,
        mean_residual,
        orthogonality_residual,
        iterations,
        converged,
    })
}

/// Second-order behaviour of the relative entropy along a straight line.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorReport {
    pub t: f64,
    /// `S(ρ | ρ + tD)`.
    pub value: f64,
    /// `½ t² ĝ^BKM_ρ(D, D)`.
    pub quadratic: f64,
    pub residual: f64,
}

pub fn relative_entropy_taylor(rho: &StateMatrix, d: &TangentVector, t: f64) -> Result<TaylorReport> {
    let moved = StateMatrix::new(rho.matrix() + &d.mixture().scaled(t))?;
    let value = relative_entropy(rho, &moved)?;
    let quadratic = 0.5 * t * t * crate::metrics::bkm_direct(rho, d, d)?;
    Ok(TaylorReport {
        t,
        value,
        quadratic,
        residual: (value - quadratic).abs(),
    })
}
