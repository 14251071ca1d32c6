//! Central finite-difference stencils over parameter vectors.
//!
//! Steps scale as `base * max(1, |θ_i|)`. When a stencil point falls
//! outside the chart domain the step is halved (at most three times)
//! before the failure is returned.

use crate::error::Result;
use crate::matrix_core::Hermitian;

/// Base step for first derivatives.
pub const FIRST_STEP: f64 = 1e-4;
/// Base step for second derivatives.
pub const SECOND_STEP: f64 = 1e-3;

const SHRINK_ATTEMPTS: usize = 3;

pub fn step_for(base: f64, coordinate: f64) -> f64 {
    base * coordinate.abs().max(1.0)
}

fn shifted(theta: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut t = theta.to_vec();
    for &(k, d) in moves {
        t[k] += d;
    }
    t
}

/// Anything a stencil can combine linearly.
pub trait Linear: Sized {
    fn lin(terms: &[(f64, &Self)]) -> Self;
}

impl Linear for f64 {
    fn lin(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, v)| c * **v).sum()
    }
}

impl Linear for Hermitian {
    fn lin(terms: &[(f64, &Self)]) -> Self {
        let mut acc = terms[0].1.scaled(terms[0].0);
        for (c, v) in &terms[1..] {
            acc = &acc + &v.scaled(*c);
        }
        acc
    }
}

impl Linear for Vec<f64> {
    fn lin(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1.len();
        (0..n)
            .map(|k| terms.iter().map(|(c, v)| c * v[k]).sum())
            .collect()
    }
}

fn with_shrink<T>(mut h: f64, mut attempt: impl FnMut(f64) -> Result<T>) -> Result<T> {
    let mut last = attempt(h);
    for _ in 0..SHRINK_ATTEMPTS {
        if last.is_ok() {
            break;
        }
        h *= 0.5;
        last = attempt(h);
    }
    last
}

/// `(f(θ + h e_i) - f(θ - h e_i)) / 2h`.
pub fn central_first<T, F>(f: F, theta: &[f64], i: usize, base_step: f64) -> Result<T>
where
    T: Linear,
    F: Fn(&[f64]) -> Result<T>,
{
    with_shrink(step_for(base_step, theta[i]), |h| {
        let plus = f(&shifted(theta, &[(i, h)]))?;
        let minus = f(&shifted(theta, &[(i, -h)]))?;
        Ok(T::lin(&[(0.5 / h, &plus), (-0.5 / h, &minus)]))
    })
}

/// Second partial `∂_i ∂_j f` from the nine-point stencil on the `(i, j)`
/// plane: three-point second difference on the diagonal, four corners off it.
pub fn central_second<T, F>(f: F, theta: &[f64], i: usize, j: usize, base_step: f64) -> Result<T>
where
    T: Linear,
    F: Fn(&[f64]) -> Result<T>,
{
    if i == j {
        with_shrink(step_for(base_step, theta[i]), |h| {
            let plus = f(&shifted(theta, &[(i, h)]))?;
            let mid = f(theta)?;
            let minus = f(&shifted(theta, &[(i, -h)]))?;
            let w = 1.0 / (h * h);
            Ok(T::lin(&[(w, &plus), (-2.0 * w, &mid), (w, &minus)]))
        })
    } else {
        let ratio = step_for(base_step, theta[j]) / step_for(base_step, theta[i]);
        with_shrink(step_for(base_step, theta[i]), |hi| {
            let hj = hi * ratio;
            let pp = f(&shifted(theta, &[(i, hi), (j, hj)]))?;
            let pm = f(&shifted(theta, &[(i, hi), (j, -hj)]))?;
            let mp = f(&shifted(theta, &[(i, -hi), (j, hj)]))?;
            let mm = f(&shifted(theta, &[(i, -hi), (j, -hj)]))?;
            let w = 0.25 / (hi * hj);
            Ok(T::lin(&[(w, &pp), (-w, &pm), (-w, &mp), (w, &mm)]))
        })
    }
}

/// Central-difference gradient of a scalar function.
pub fn gradient<F>(f: F, theta: &[f64], base_step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    (0..theta.len())
        .map(|i| central_first(&f, theta, i, base_step))
        .collect()
}
