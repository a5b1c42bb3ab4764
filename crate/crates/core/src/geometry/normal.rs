use num_complex::Complex64;

use super::{Point, WeightJet};
use crate::error::{Error, Result};

/// Holomorphic normal coordinates `z'` centred at a point `p`.
///
/// The coordinate change is affine, `z' = √g(p)·(z − p)`, so that Θ is the
/// identity at `p`. The constant, linear and pure quadratic parts of the weight
/// are absorbed into the frame `s' = s·e^{H}` with
/// `H(u) = φ(p) + 2φ_z(p)u + φ_zz(p)u²`, leaving
/// `φ'(z') = φ − Re H = λ|z'|² + O(|z'|³)`.
///
/// A weighted representative transforms as `ũ' = ũ·e^{−ik Im H}`.
///
/// With a nonzero `cubic = c` the coordinate is `z' = √g(p)·v` with
/// `z − p = v − c v²`; choosing `c = φ_{zzz̄}/(2φ_{zz̄})` also removes the
/// `z'² z̄'` terms of the weight.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFrame {
    pub center: Point,
    pub scale: f64,
    /// Coefficients `(h0, h1, h2)` of `H`.
    pub gauge: [Complex64; 3],
    /// `λ_j`, half the eigenvalues of `R^L(p)` relative to Θ.
    pub lambdas: Vec<f64>,
    pub cubic: Complex64,
}

/// Normal form data read off a weight jet with metric coefficient `g`.
pub fn normal_form_from_jet(jet: &WeightJet, g: f64) -> Result<([Complex64; 3], f64)> {
    let lambda = jet.dzzbar / g;
    if !(lambda > 0.0) {
        return Err(Error::Positivity { at: "normal coordinates".into(), eigenvalue: 2.0 * lambda });
    }
    Ok(([Complex64::new(jet.value, 0.0), jet.dz * 2.0, jet.dzz], lambda))
}

impl NormalFrame {
    pub fn new(center: Point, jet: &WeightJet, g: f64) -> Result<Self> {
        let (gauge, lambda) = normal_form_from_jet(jet, g)?;
        Ok(Self { center, scale: g.sqrt(), gauge, lambdas: vec![lambda], cubic: Complex64::new(0.0, 0.0) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambdas[0]
    }

    /// Chart point with normal coordinate `zp`.
    pub fn to_chart(&self, zp: Complex64) -> Point {
        let v = zp / self.scale;
        Point::new(self.center.chart, self.center.z + v - self.cubic * v * v)
    }

    pub fn from_chart(&self, z: Complex64) -> Complex64 {
        let u = z - self.center.z;
        let c = self.cubic;
        let v = if c.norm() == 0.0 { u } else { 2.0 * u / (1.0 + (1.0 - 4.0 * c * u).sqrt()) };
        v * self.scale
    }

    /// Gauge function `H` at a chart coordinate.
    pub fn gauge_at(&self, z: Complex64) -> Complex64 {
        let u = z - self.center.z;
        self.gauge[0] + self.gauge[1] * u + self.gauge[2] * u * u
    }

    /// `|dz/dz'|²` at the centre, the area Jacobian from normal to chart
    /// coordinates (everywhere when `cubic` is zero).
    pub fn area_jacobian(&self) -> f64 {
        1.0 / (self.scale * self.scale)
    }

    /// Weight in the normal frame, `φ − Re H`, at the normal coordinate `zp`.
    pub fn normal_weight(&self, chart_weight: f64, zp: Complex64) -> f64 {
        let z = self.center.z + zp / self.scale;
        chart_weight - self.gauge_at(z).re
    }
}
