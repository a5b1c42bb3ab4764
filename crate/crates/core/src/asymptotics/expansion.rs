use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Least-squares fit of `P_k(x)/k^n` against `{1, 1/k, 1/k²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub point: Option<Point>,
    pub ks: Vec<u32>,
    /// `b̂_0, b̂_1, b̂_2`.
    pub coefficients: [f64; 3],
    pub residual: f64,
    /// `(2π)^{−n}|det R^L(x)|`, when known.
    pub reference: Option<f64>,
    pub relative_deviation: Option<f64>,
}

/// Ordinary least squares; returns coefficients and the residual norm.
pub(crate) fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(y, 1e-14).map_err(|e| Error::Fit(e.to_string()))?;
    let r = (a * &x - y).norm();
    Ok((x, r))
}

/// Fits samples `(k, P_k)` of a complex dimension `n` model.
pub fn fit_expansion(samples: &[(u32, f64)], n: u32, reference: Option<f64>) -> Result<ExpansionFit> {
    let mut ks: Vec<u32> = samples.iter().map(|s| s.0).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 5 {
        return Err(Error::InsufficientData(format!("{} distinct k values, need 5", ks.len())));
    }
    if let Some(&(k, v)) = samples.iter().find(|s| !(s.1 > 0.0)) {
        return Err(Error::Precondition(format!("P_k = {v} is not positive at k = {k}")));
    }
    let a = DMatrix::from_fn(samples.len(), 3, |i, j| (samples[i].0 as f64).powi(-(j as i32)));
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|&(k, v)| v / (k as f64).powi(n as i32)));
    let (x, residual) = least_squares(&a, &y)?;
    if x[0] < 0.0 {
        return Err(Error::Fit(format!("negative leading coefficient {}", x[0])));
    }
    let relative_deviation = reference.map(|r| (x[0] - r).abs() / r);
    Ok(ExpansionFit {
        point: None,
        ks,
        coefficients: [x[0], x[1], x[2]],
        residual,
        reference,
        relative_deviation,
    })
}

/// Expansion at `x` with the curvature reference of the family's model.
pub fn fit_expansion_at(family: &FrameFamily, x: &Point) -> Result<ExpansionFit> {
    let geom = family.geometry().ok_or_else(|| Error::InsufficientData("empty frame family".into()))?;
    let samples = family
        .frames
        .iter()
        .map(|f| Ok((f.k(), f.bergman_function(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let n = geom.dimension() as i32;
    let reference = (2.0 * PI).powi(-n) * geom.det_curvature(x)?.abs();
    let mut fit = fit_expansion(&samples, n as u32, Some(reference))?;
    fit.point = Some(*x);
    Ok(fit)
}

/// `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("a line needs two samples".into()));
    }
    let a = DMatrix::from_fn(xs.len(), 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
    let (x, residual) = least_squares(&a, &DVector::from_column_slice(ys))?;
    Ok(LinearFit { slope: x[1], intercept: x[0], residual })
}

/// Log-log fit `y ≈ C x^N`; returns `(C, N, residual)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Fit("power law needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let f = linear_fit(&lx, &ly)?;
    Ok((f.intercept.exp(), f.slope, f.residual))
}
