//! Monotone Riemannian metrics.
//!
//! A monotone metric is fixed by an operator monotone function `f` with
//! `f(1) = 1` and `f(t) = t f(1/t)`. In the eigenbasis of the base point the
//! metric acts entrywise on mixture representations with coefficients
//! `c_ij = 1 / (λ_j f(λ_i / λ_j))`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{alpha_representation, check_open_alpha, StateMatrix, TangentVector, WeightMatrix};
use crate::matrix_core::{CMatrix, Hermitian, Spectrum};

/// Below this distance from 1 the built-in functions use their Taylor
/// expansion around `t = 1`.
pub const SERIES_RADIUS: f64 = 1e-6;

/// Minimum eigenvalue of a channel output below which it is regularized.
pub const REGULARIZATION_THRESHOLD: f64 = 1e-12;

/// Weight of `I/N` mixed into a nearly singular channel output.
pub const REGULARIZATION_WEIGHT: f64 = 1e-10;

#[derive(Clone)]
enum Shape {
    Wyd(f64),
    Bkm,
    Bures,
    Rld,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A scalar function on `(0, ∞)` that labels a monotone metric.
#[derive(Clone)]
pub struct MonotoneFunction {
    name: String,
    shape: Shape,
    claimed_monotone: bool,
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFunction")
            .field("name", &self.name)
            .field("claimed_monotone", &self.claimed_monotone)
            .finish()
    }
}

impl MonotoneFunction {
    /// `f_p(x) = p(1−p)(x−1)² / ((x^p − 1)(x^(1−p) − 1))` for `p ∈ (0, 1)`.
    pub fn wyd(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Parameter {
                name: "p",
                value: p,
                reason: "must lie strictly inside (0, 1)",
            });
        }
        Ok(MonotoneFunction {
            name: format!("wyd(p={p})"),
            shape: Shape::Wyd(p),
            claimed_monotone: true,
        })
    }

    /// The WYD function at `p = (1+α)/2`.
    pub fn wyd_alpha(alpha: f64) -> Result<Self> {
        check_open_alpha(alpha)?;
        Self::wyd(0.5 * (1.0 + alpha))
    }

    /// `(x − 1) / log x`.
    pub fn bkm() -> Self {
        MonotoneFunction {
            name: "bkm".into(),
            shape: Shape::Bkm,
            claimed_monotone: true,
        }
    }

    /// `(1 + x) / 2`, the largest normalized symmetric monotone function.
    pub fn bures() -> Self {
        MonotoneFunction {
            name: "bures".into(),
            shape: Shape::Bures,
            claimed_monotone: true,
        }
    }

    /// `2x / (1 + x)`, the smallest normalized symmetric monotone function.
    pub fn rld() -> Self {
        MonotoneFunction {
            name: "rld".into(),
            shape: Shape::Rld,
            claimed_monotone: true,
        }
    }

    /// A user-supplied function. Nothing about it is verified here.
    pub fn custom<F>(name: impl Into<String>, f: F, claimed_monotone: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MonotoneFunction {
            name: name.into(),
            shape: Shape::Custom(Arc::new(f)),
            claimed_monotone,
        }
    }

    /// Looks up `wyd`, `bkm`, `bures` or `rld`; `wyd` needs an α.
    pub fn by_name(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "wyd" => Self::wyd_alpha(alpha.unwrap_or(0.0)),
            "bkm" => Ok(Self::bkm()),
            "bures" | "sld" => Ok(Self::bures()),
            "rld" => Ok(Self::rld()),
            other => Err(Error::Invalid(format!("unknown metric '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claimed_monotone(&self) -> bool {
        self.claimed_monotone
    }

    /// The WYD parameter `p`, if this is a WYD function.
    pub fn wyd_parameter(&self) -> Option<f64> {
        match self.shape {
            Shape::Wyd(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - 1.0;
        match &self.shape {
            Shape::Wyd(p) => {
                if d.abs() <= SERIES_RADIUS {
                    // f_p(1+d) = 1 + d/2 + (p(1-p) - 1) d²/12 + O(d³)
                    1.0 + 0.5 * d + (p * (1.0 - p) - 1.0) * d * d / 12.0
                } else {
                    let l = x.ln();
                    p * (1.0 - p) * d * d / ((p * l).exp_m1() * ((1.0 - p) * l).exp_m1())
                }
            }
            Shape::Bkm => {
                if d.abs() <= SERIES_RADIUS {
                    1.0 + 0.5 * d - d * d / 12.0
                } else {
                    d / d.ln_1p()
                }
            }
            Shape::Bures => 0.5 * (1.0 + x),
            Shape::Rld => 2.0 * x / (1.0 + x),
            Shape::Custom(f) => f(x),
        }
    }

    /// Checks `f(1) = 1` and `f(t) = t f(1/t)` on `t = 2^k`, `k = −6..6`.
    pub fn check_invariants(&self) -> Result<()> {
        let one = self.eval(1.0);
        if !((one - 1.0).abs() <= 1e-12) {
            return Err(Error::Invalid(format!("{}: f(1) = {one}, expected 1", self.name)));
        }
        for k in -6..=6 {
            let t = 2f64.powi(k);
            let a = self.eval(t);
            let b = t * self.eval(1.0 / t);
            if !((a - b).abs() <= 1e-10 * a.abs().max(b.abs())) {
                return Err(Error::Invalid(format!(
                    "{}: f({t}) = {a} but t f(1/t) = {b}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// WYD functions for each requested `p`, followed by BKM, Bures and RLD.
pub fn builtin_functions(wyd_ps: &[f64]) -> Result<Vec<MonotoneFunction>> {
    let mut out = wyd_ps
        .iter()
        .map(|&p| MonotoneFunction::wyd(p))
        .collect::<Result<Vec<_>>>()?;
    out.extend([MonotoneFunction::bkm(), MonotoneFunction::bures(), MonotoneFunction::rld()]);
    Ok(out)
}

/// The Petz operator `K_σ` expressed entrywise in the eigenbasis of `σ`.
#[derive(Clone, Debug)]
pub struct MetricKernel {
    spectrum: Spectrum,
    coefficients: DMatrix<f64>,
}

impl MetricKernel {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    /// `K_σ(A)`.
    pub fn apply(&self, a: &Hermitian) -> Hermitian {
        let c = &self.coefficients;
        Hermitian::symmetrized(self.spectrum.weighted_indexed(a.as_matrix(), |i, j| c[(i, j)]))
    }

    /// `Σ conj(a_ij) c_ij b_ij` over eigenbasis entries.
    pub fn inner(&self, a: &Hermitian, b: &Hermitian) -> f64 {
        let ta = self.spectrum.to_eigenbasis(a.as_matrix());
        let tb = self.spectrum.to_eigenbasis(b.as_matrix());
        kernel_sum(&self.coefficients, &ta, &tb)
    }
}

fn kernel_sum(c: &DMatrix<f64>, ta: &CMatrix, tb: &CMatrix) -> f64 {
    let n = c.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += c[(i, j)] * (ta[(i, j)].conj() * tb[(i, j)]).re;
        }
    }
    acc
}

pub fn petz_kernel(sigma: &WeightMatrix, f: &MonotoneFunction) -> Result<MetricKernel> {
    let spectrum = sigma.spectrum().clone();
    let lam = spectrum.eigenvalues();
    if spectrum.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: spectrum.min_eigenvalue(),
        });
    }
    let n = lam.len();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                1.0 / lam[i]
            } else {
                1.0 / (lam[j] * f.eval(lam[i] / lam[j]))
            };
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain {
                    function: f.name().to_string(),
                    eigenvalue: lam[i] / lam[j],
                });
            }
            c[(i, j)] = v;
        }
    }
    Ok(MetricKernel {
        spectrum,
        coefficients: c,
    })
}

fn check_base(sigma: &WeightMatrix, v: &TangentVector) -> Result<()> {
    if v.base().same_point(sigma, 1e-12) {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// `ĝ_σ(A, B) = Tr(A K_σ(B))` on mixture representations.
pub fn metric_eval(sigma: &WeightMatrix, f: &MonotoneFunction, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    check_base(sigma, a)?;
    check_base(sigma, b)?;
    Ok(petz_kernel(sigma, f)?.inner(a.mixture(), b.mixture()))
}

/// Gram matrix `g_ij = ĝ(V_i, V_j)` of a frame at `σ`.
pub fn metric_matrix(sigma: &WeightMatrix, f: &MonotoneFunction, frame: &[TangentVector]) -> Result<DMatrix<f64>> {
    for v in frame {
        check_base(sigma, v)?;
    }
    let k = petz_kernel(sigma, f)?;
    let t: Vec<CMatrix> = frame.iter().map(|v| k.spectrum.to_eigenbasis(v.mixture().as_matrix())).collect();
    let m = frame.len();
    Ok(DMatrix::from_fn(m, m, |i, j| kernel_sum(&k.coefficients, &t[i], &t[j])))
}

/// `Tr(A^(α) B^(−α))` for α in `(−1, 1)`.
pub fn wyd_direct(rho: &WeightMatrix, alpha: f64, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    check_open_alpha(alpha)?;
    check_base(rho, a)?;
    check_base(rho, b)?;
    Ok(alpha_representation(a, alpha)?.trace_product(&alpha_representation(b, -alpha)?))
}

/// `Tr(A^(−1) B^(1))`.
pub fn bkm_direct(rho: &WeightMatrix, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    check_base(rho, a)?;
    check_base(rho, b)?;
    Ok(a.mixture().trace_product(&alpha_representation(b, 1.0)?))
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    n_in: usize,
    n_out: usize,
}

impl KrausChannel {
    /// Validates shapes and `Σ K†K = I` within `1e−10`.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Invalid("channel needs a Kraus operator".into()))?;
        let (n_out, n_in) = first.shape();
        let mut s = CMatrix::zeros(n_in, n_in);
        for k in &ops {
            if k.shape() != (n_out, n_in) {
                return Err(Error::DimensionMismatch {
                    left: n_in,
                    right: k.ncols(),
                });
            }
            s += k.adjoint() * k;
        }
        let deviation = (s - CMatrix::identity(n_in, n_in)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation > 1e-10 {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(KrausChannel { ops, n_in, n_out })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![CMatrix::identity(n, n)]).unwrap()
    }

    /// `X ↦ (1−t) X + t Tr(X) I/N` for `t ∈ [0, 1]`.
    pub fn depolarizing(n: usize, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter {
                name: "t",
                value: t,
                reason: "must lie in [0, 1]",
            });
        }
        let mut ops = vec![CMatrix::identity(n, n) * num_complex::Complex64::from((1.0 - t).sqrt())];
        let w = (t / n as f64).sqrt();
        for i in 0..n {
            for j in 0..n {
                let mut e = CMatrix::zeros(n, n);
                e[(i, j)] = w.into();
                ops.push(e);
            }
        }
        Self::new(ops)
    }

    /// Trace over the second factor of `C^a ⊗ C^b`.
    pub fn partial_trace(dim_kept: usize, dim_traced: usize) -> Self {
        let ops = (0..dim_traced)
            .map(|k| {
                let mut m = CMatrix::zeros(dim_kept, dim_kept * dim_traced);
                for a in 0..dim_kept {
                    m[(a, a * dim_traced + k)] = 1.0.into();
                }
                m
            })
            .collect();
        Self::new(ops).unwrap()
    }

    /// Random channel with `count` Kraus operators.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n_in: usize, n_out: usize, count: usize) -> Self {
        Self::new(crate::random::kraus_operators(rng, n_in, n_out, count)).expect("normalized Kraus operators")
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.n_in
    }

    pub fn output_dim(&self) -> usize {
        self.n_out
    }
}

/// `Σ K X K†`.
pub fn apply_channel(s: &KrausChannel, x: &Hermitian) -> Result<Hermitian> {
    if x.dim() != s.n_in {
        return Err(Error::DimensionMismatch {
            left: s.n_in,
            right: x.dim(),
        });
    }
    let m = x.as_matrix();
    let out = s
        .ops
        .iter()
        .fold(CMatrix::zeros(s.n_out, s.n_out), |acc, k| acc + k * m * k.adjoint());
    Ok(Hermitian::symmetrized(out))
}

/// Outcome of comparing a metric before and after a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    /// `ĝ_{S(ρ)}(S(A), S(A))`
    pub lhs: f64,
    /// `ĝ_ρ(A, A)`
    pub rhs: f64,
    pub margin: f64,
    /// `S(ρ)` was nearly singular and was mixed with a little of `I/N`.
    pub regularized: bool,
    /// `S(ρ)` was singular beyond repair; lhs and margin are NaN.
    pub inconclusive: bool,
}

pub fn monotonicity_check(
    f: &MonotoneFunction,
    rho: &StateMatrix,
    a: &TangentVector,
    s: &KrausChannel,
) -> Result<MonotonicityReport> {
    check_base(rho, a)?;
    let rhs = petz_kernel(rho, f)?.inner(a.mixture(), a.mixture());
    let out = apply_channel(s, rho.matrix())?;
    let sa = apply_channel(s, a.mixture())?;
    let n = out.dim();
    let min = out.spectrum().min_eigenvalue();
    let regularized = min < REGULARIZATION_THRESHOLD;
    let out = if regularized {
        (&out + &Hermitian::identity(n).scaled(REGULARIZATION_WEIGHT / n as f64)).scaled(1.0 / (1.0 + REGULARIZATION_WEIGHT))
    } else {
        out
    };
    let weight = match WeightMatrix::new(out) {
        Ok(w) => w,
        Err(_) => {
            return Ok(MonotonicityReport {
                lhs: f64::NAN,
                rhs,
                margin: f64::NAN,
                regularized,
                inconclusive: true,
            })
        }
    };
    let lhs = petz_kernel(&weight, f)?.inner(&sa, &sa);
    Ok(MonotonicityReport {
        lhs,
        rhs,
        margin: rhs - lhs,
        regularized,
        inconclusive: false,
    })
}

/// `−Tr(ρ log ρ)`.
pub fn von_neumann_entropy(rho: &StateMatrix) -> f64 {
    -rho.spectrum().eigenvalues().iter().map(|&l| l * l.ln()).sum::<f64>()
}

/// `Tr ρ(log ρ − log σ)`.
pub fn relative_entropy(rho: &StateMatrix, sigma: &WeightMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let log_sigma = sigma.apply(&crate::matrix_core::Log)?;
    Ok(-von_neumann_entropy(rho) - rho.matrix().trace_product(&log_sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::MixtureFamily;
    use crate::manifold::family_tangent;
    use crate::random;
    use proptest::prelude::*;

    fn diag_state() -> StateMatrix {
        StateMatrix::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    fn tangent(rho: &StateMatrix, a: Hermitian) -> TangentVector {
        TangentVector::at_state(rho, a).unwrap()
    }

    fn all_functions() -> Vec<MonotoneFunction> {
        builtin_functions(&[0.1, 0.25, 0.5, 0.7, 0.95]).unwrap()
    }

    #[test]
    fn builtins_satisfy_invariants() {
        for f in all_functions() {
            f.check_invariants().unwrap();
        }
        let bad = MonotoneFunction::custom("x^2", |x| x * x, false);
        assert!(bad.check_invariants().is_err());
        assert!(MonotoneFunction::wyd(1.0).is_err());
        assert!(MonotoneFunction::wyd(0.0).is_err());
    }

    #[test]
    fn scalar_values() {
        for f in all_functions() {
            assert!((f.eval(1.0) - 1.0).abs() < 1e-15);
        }
        assert!((MonotoneFunction::wyd(0.5).unwrap().eval(4.0) - 2.25).abs() < 1e-14);
        assert_eq!(MonotoneFunction::bures().eval(3.0), 2.0);
        assert_eq!(MonotoneFunction::rld().eval(3.0), 1.5);
        let e = std::f64::consts::E;
        assert!((MonotoneFunction::bkm().eval(e) - (e - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn series_branch_is_continuous() {
        for f in all_functions() {
            for &d in &[0.9e-6, -0.9e-6] {
                let inside = f.eval(1.0 + d);
                let outside = f.eval(1.0 + 1.2 * d);
                let slope = (outside - inside) / (0.2 * d);
                assert!((slope - 0.5).abs() < 1e-3, "{}: slope {slope}", f.name());
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let mixed = StateMatrix::maximally_mixed(2);
        for f in all_functions() {
            let k = petz_kernel(&mixed, &f).unwrap();
            assert!(k.coefficients().iter().all(|c| (c - 2.0).abs() < 1e-14));
        }
        let rho = diag_state();
        let k = petz_kernel(&rho, &MonotoneFunction::bkm()).unwrap();
        assert!((k.coefficients()[(0, 1)] - 2.0 * 3f64.ln()).abs() < 1e-13);
        let k = petz_kernel(&rho, &MonotoneFunction::wyd(0.5).unwrap()).unwrap();
        assert!((k.coefficients()[(0, 1)] - (16.0 - 8.0 * 3f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn kernel_invariants() {
        let mut rng = random::stream(11, 0);
        for n in 2..=4 {
            let rho = random::state(&mut rng, n);
            for f in all_functions() {
                let k = petz_kernel(&rho, &f).unwrap();
                let c = k.coefficients();
                let lam = rho.spectrum().eigenvalues();
                for i in 0..n {
                    assert!((c[(i, i)] - 1.0 / lam[i]).abs() < 1e-12 / lam[i]);
                    for j in 0..n {
                        assert!(c[(i, j)] > 0.0);
                        assert!((c[(i, j)] - c[(j, i)]).abs() <= 1e-10 * c[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn metric_examples() {
        let rho = diag_state();
        let sx = tangent(&rho, Hermitian::pauli_x());
        let bkm = metric_eval(&rho, &MonotoneFunction::bkm(), &sx, &sx).unwrap();
        assert!((bkm - 4.0 * 3f64.ln()).abs() < 1e-12);
        assert!((bkm_direct(&rho, &sx, &sx).unwrap() - 4.0 * 3f64.ln()).abs() < 1e-12);
        let z = tangent(&rho, Hermitian::pauli_z());
        for f in all_functions() {
            assert!((metric_eval(&rho, &f, &z, &z).unwrap() - 16.0 / 3.0).abs() < 1e-12);
        }
        let zero = tangent(&rho, Hermitian::zeros(2));
        assert_eq!(metric_eval(&rho, &MonotoneFunction::bures(), &zero, &zero).unwrap(), 0.0);
        let wy = wyd_direct(&rho, 0.0, &sx, &sx).unwrap();
        assert!((wy - 2.0 * (16.0 - 8.0 * 3f64.sqrt())).abs() < 1e-12);
        let mixed = StateMatrix::maximally_mixed(2);
        let z = tangent(&mixed, Hermitian::pauli_z());
        assert!((bkm_direct(&mixed, &z, &z).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn classical_reduction_on_diagonal_family() {
        let fam = MixtureFamily::qubit_diagonal();
        let v = family_tangent(&fam, &[0.75], 0).unwrap();
        let rho = StateMatrix::from_weight(v.base().clone()).unwrap();
        for alpha in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            assert!((wyd_direct(&rho, alpha, &v, &v).unwrap() - 16.0 / 3.0).abs() < 1e-9);
        }
        assert!((bkm_direct(&rho, &v, &v).unwrap() - 16.0 / 3.0).abs() < 1e-9);
        // a three-level diagonal family: Fisher metric Σ ∂p ∂p / p
        let p = [0.2, 0.3, 0.5];
        let rho = StateMatrix::from_diagonal(&p).unwrap();
        let a = tangent(&rho, Hermitian::diagonal(&[1.0, -0.5, -0.5]));
        let b = tangent(&rho, Hermitian::diagonal(&[0.0, 1.0, -1.0]));
        let fisher: f64 = (0..3).map(|i| [1.0, -0.5, -0.5][i] * [0.0, 1.0, -1.0][i] / p[i]).sum();
        for f in all_functions() {
            assert!((metric_eval(&rho, &f, &a, &b).unwrap() - fisher).abs() < 1e-9);
        }
    }

    #[test]
    fn bkm_is_the_endpoint_limit_of_wyd() {
        let mut rng = random::stream(5, 0);
        let rho = random::state(&mut rng, 3);
        let a = random::state_tangent(&mut rng, &rho);
        let b = random::state_tangent(&mut rng, &rho);
        let bkm = bkm_direct(&rho, &a, &b).unwrap();
        let kernel = metric_eval(&rho, &MonotoneFunction::bkm(), &a, &b).unwrap();
        assert!((bkm - kernel).abs() <= 1e-8 * kernel.abs());
        for alpha in [0.999, -0.999] {
            assert!((wyd_direct(&rho, alpha, &a, &b).unwrap() - bkm).abs() < 1e-3);
        }
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let rho = diag_state();
        let other = StateMatrix::maximally_mixed(2);
        let a = tangent(&other, Hermitian::pauli_x());
        assert_eq!(
            metric_eval(&rho, &MonotoneFunction::bkm(), &a, &a),
            Err(Error::BaseMismatch)
        );
    }

    #[test]
    fn channel_examples() {
        let mut rng = random::stream(3, 0);
        let rho = random::state(&mut rng, 3);
        let id = apply_channel(&KrausChannel::identity(3), rho.matrix()).unwrap();
        assert!((&id - rho.matrix()).max_abs() < 1e-15);
        let dep = apply_channel(&KrausChannel::depolarizing(3, 1.0).unwrap(), rho.matrix()).unwrap();
        assert!((&dep - &Hermitian::identity(3).scaled(1.0 / 3.0)).max_abs() < 1e-15);
        let tau = random::state(&mut rng, 2);
        let joint = rho.matrix().kron(tau.matrix());
        let reduced = apply_channel(&KrausChannel::partial_trace(3, 2), &joint).unwrap();
        // direct partial trace: ρ_ab = Σ_k joint[(a·2+k, b·2+k)]
        let direct = CMatrix::from_fn(3, 3, |a, b| {
            (0..2).map(|k| joint.as_matrix()[(a * 2 + k, b * 2 + k)]).sum()
        });
        assert!(crate::matrix_core::frobenius(&(reduced.as_matrix() - direct)) < 1e-14);
        assert!((&reduced - rho.matrix()).max_abs() < 1e-14);
        assert!(apply_channel(&KrausChannel::identity(2), rho.matrix()).is_err());
        assert!(KrausChannel::new(vec![CMatrix::identity(2, 2) * num_complex::Complex64::from(0.5)]).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let mut rng = random::stream(9, 0);
        let rho = random::state(&mut rng, 2);
        let a = random::state_tangent(&mut rng, &rho);
        let r = monotonicity_check(&MonotoneFunction::bures(), &rho, &a, &KrausChannel::identity(2)).unwrap();
        assert!(r.margin.abs() < 1e-12);
        let dep = KrausChannel::depolarizing(2, 0.3).unwrap();
        let r = monotonicity_check(&MonotoneFunction::bures(), &rho, &a, &dep).unwrap();
        assert!(r.margin > 0.0 && !r.regularized);
        let f = MonotoneFunction::wyd_alpha(0.4).unwrap();
        let ptr = KrausChannel::partial_trace(2, 2);
        let mut worst = f64::INFINITY;
        for k in 0..1000 {
            let mut rng = random::stream(7, k);
            let rho = random::state(&mut rng, 4);
            let a = random::state_tangent(&mut rng, &rho);
            worst = worst.min(monotonicity_check(&f, &rho, &a, &ptr).unwrap().margin);
        }
        assert!(worst >= -1e-9, "{worst}");
    }

    #[test]
    fn singular_output_is_regularized() {
        // replace everything by a pure state: S(ρ) = |0⟩⟨0|
        let mut k0 = CMatrix::zeros(2, 2);
        k0[(0, 0)] = 1.0.into();
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = 1.0.into();
        let s = KrausChannel::new(vec![k0, k1]).unwrap();
        let rho = diag_state();
        let a = tangent(&rho, Hermitian::pauli_x());
        let r = monotonicity_check(&MonotoneFunction::bkm(), &rho, &a, &s).unwrap();
        assert!(r.regularized && !r.inconclusive);
        assert!(r.margin >= 0.0);
    }

    #[test]
    fn entropy_examples() {
        let mixed = StateMatrix::maximally_mixed(3);
        assert!((von_neumann_entropy(&mixed) - 3f64.ln()).abs() < 1e-14);
        assert!(relative_entropy(&mixed, &mixed).unwrap().abs() < 1e-14);
        let s = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((von_neumann_entropy(&diag_state()) - s).abs() < 1e-15);
        assert!((s - 0.5623).abs() < 1e-4);
        let half = StateMatrix::maximally_mixed(2);
        let expected = 0.5 * (0.5f64.ln() - 0.75f64.ln()) + 0.5 * (0.5f64.ln() - 0.25f64.ln());
        let got = relative_entropy(&half, &diag_state()).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.1438).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kernel_matches_direct_wyd(seed in any::<u64>(), n in 2usize..=4, ai in 0usize..5) {
            let alpha = [-0.9, -0.5, 0.0, 0.5, 0.9][ai];
            let mut rng = random::stream(seed, 0);
            let rho = random::state(&mut rng, n);
            let a = random::state_tangent(&mut rng, &rho);
            let b = random::state_tangent(&mut rng, &rho);
            let direct = wyd_direct(&rho, alpha, &a, &b).unwrap();
            let kernel = metric_eval(&rho, &MonotoneFunction::wyd_alpha(alpha).unwrap(), &a, &b).unwrap();
            prop_assert!((direct - kernel).abs() <= 1e-8 * kernel.abs().max(1e-12));
            let swapped = wyd_direct(&rho, -alpha, &a, &b).unwrap();
            prop_assert!((direct - swapped).abs() <= 1e-10 * direct.abs().max(1.0));
        }

        #[test]
        fn metric_is_symmetric_bilinear_positive(seed in any::<u64>(), n in 2usize..=4) {
            let mut rng = random::stream(seed, 1);
            let rho = random::state(&mut rng, n);
            let a = random::state_tangent(&mut rng, &rho);
            let b = random::state_tangent(&mut rng, &rho);
            let c = random::state_tangent(&mut rng, &rho);
            for f in all_functions() {
                let g = |x: &TangentVector, y: &TangentVector| metric_eval(&rho, &f, x, y).unwrap();
                prop_assert!((g(&a, &b) - g(&b, &a)).abs() < 1e-10);
                let combo = a.with_mixture(&a.mixture().scaled(2.0) + &c.mixture().scaled(-0.5)).unwrap();
                let lin = 2.0 * g(&a, &b) - 0.5 * g(&c, &b);
                prop_assert!((g(&combo, &b) - lin).abs() < 1e-9 * lin.abs().max(1.0));
                prop_assert!(g(&a, &a) > 0.0);
            }
        }

        #[test]
        fn bures_below_every_metric_below_rld(seed in any::<u64>(), n in 2usize..=4) {
            let mut rng = random::stream(seed, 2);
            let rho = random::state(&mut rng, n);
            let a = random::state_tangent(&mut rng, &rho);
            let lo = metric_eval(&rho, &MonotoneFunction::bures(), &a, &a).unwrap();
            let hi = metric_eval(&rho, &MonotoneFunction::rld(), &a, &a).unwrap();
            for f in all_functions() {
                let g = metric_eval(&rho, &f, &a, &a).unwrap();
                prop_assert!(lo <= g * (1.0 + 1e-12) && g <= hi * (1.0 + 1e-12));
            }
        }

        #[test]
        fn relative_entropy_is_nonnegative(seed in any::<u64>(), n in 2usize..=4) {
            let mut rng = random::stream(seed, 3);
            let rho = random::state(&mut rng, n);
            let sigma = random::state(&mut rng, n);
            prop_assert!(relative_entropy(&rho, &sigma).unwrap() > 0.0);
            let s = von_neumann_entropy(&rho);
            prop_assert!(s >= 0.0 && s <= (n as f64).ln() + 1e-12);
        }
    }
}
