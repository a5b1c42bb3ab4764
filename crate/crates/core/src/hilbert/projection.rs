//! Projection onto `H^0(L^k)` and the twisted ∂̄ operator.

use num_complex::Complex64;
use rayon::prelude::*;

use super::frame::BergmanFrame;
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, Point, QuadratureRule};

/// Disagreement between two quadrature resolutions that is still accepted.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

impl BergmanFrame {
    /// Coefficients `(u | f_j)` of the projection of a section given by its
    /// weighted representative `data` on the support covered by `rule`.
    pub fn project<F>(&self, rule: &QuadratureRule, data: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&Point) -> Complex64 + Sync,
    {
        let geom = self.geometry();
        let n = self.len();
        let parts: Vec<Result<Vec<Complex64>>> = rule
            .nodes
            .par_chunks(256)
            .map(|nodes| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for node in nodes {
                    let p = Point::new(node.chart, node.z);
                    let w = node.weight * geom.volume_density(&p);
                    let d = data(&p) * w;
                    if d == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (a, f) in acc.iter_mut().zip(self.eval(&p)?) {
                        *a += d * f.conj();
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for p in parts {
            for (o, v) in out.iter_mut().zip(p?) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Projection evaluated on two rules; fails when they disagree by more
    /// than [`REFINEMENT_TOLERANCE`] relative to the coefficient size.
    pub fn project_refined<F>(&self, coarse: &QuadratureRule, fine: &QuadratureRule, data: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&Point) -> Complex64 + Sync,
    {
        let a = self.project(coarse, &data)?;
        let b = self.project(fine, &data)?;
        let scale = b.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if diff > REFINEMENT_TOLERANCE * scale {
            return Err(Error::Resolution { got: coarse.order, min: fine.order });
        }
        Ok(b)
    }
}

/// `e^{−kφ(p)}` times a holomorphic-frame representative.
pub fn weighted_from_frame(geometry: &ModelGeometry, k: u32, p: &Point, w: Complex64) -> Result<Complex64> {
    Ok(w * (-(k as f64) * geometry.weight(p)?).exp())
}

/// `∂_z̄ f` from `f` sampled on a circle of radius `h`:
/// `(1/Nh) Σ_l f(z + h ω_l) ω_l` over the `N = 8` roots of unity. Holomorphic
/// terms below degree `N − 1` cancel exactly, the rest is `O(h²)`.
pub fn dbar_apply<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, h: f64) -> Complex64 {
    const N: usize = 8;
    let mut s = Complex64::new(0.0, 0.0);
    for l in 0..N {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / N as f64);
        s += f(z + w * h) * w;
    }
    s / (N as f64 * h)
}

/// Weighted representative of `∂̄u` for `u` with weighted representative `v`:
/// `∂_z̄ v + k φ_z̄ v`.
pub fn dbar_weighted<F: Fn(Complex64) -> Complex64>(
    geometry: &ModelGeometry,
    k: u32,
    chart: usize,
    v: F,
    z: Complex64,
    h: f64,
) -> Result<Complex64> {
    let jet = geometry.weight_jet(&Point::new(chart, z))?;
    Ok(dbar_apply(&v, z, h) + (k as f64) * jet.dz.conj() * v(z))
}

/// `‖∂̄u‖` for a weighted (0,1)-form density on the support covered by `rule`:
/// `∫ |ω̃|² / g dv`.
pub fn dbar_norm<F>(geometry: &ModelGeometry, rule: &QuadratureRule, form: F) -> Result<f64>
where
    F: Fn(&Point) -> Result<Complex64> + Sync,
{
    let parts: Vec<Result<f64>> = rule
        .nodes
        .par_chunks(256)
        .map(|nodes| {
            let mut s = 0.0;
            for node in nodes {
                let p = Point::new(node.chart, node.z);
                let g = geometry.theta(&p);
                s += node.weight * geometry.volume_density(&p) * form(&p)?.norm_sqr() / g;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total.sqrt())
}

/// `∫ |ṽ|² dv` over the support covered by `rule`.
pub fn weighted_norm_sq<F>(geometry: &ModelGeometry, rule: &QuadratureRule, v: F) -> f64
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    rule.nodes
        .par_chunks(256)
        .map(|nodes| {
            nodes
                .iter()
                .map(|n| {
                    let p = Point::new(n.chart, n.z);
                    n.weight * geometry.volume_density(&p) * v(&p).norm_sqr()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}
