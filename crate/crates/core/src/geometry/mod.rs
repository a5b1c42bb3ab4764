//! Model manifolds, Hermitian data, bundle weights and their curvature.
//!
//! Conventions used throughout the crate (complex dimension one):
//!
//! * a chart carries one trivializing frame `s` with `|s|² = e^{−2φ}`;
//! * Θ is recorded by `g = ⟨∂_z|∂_z⟩`, the induced volume density is `2g`
//!   against Lebesgue measure in the chart, and `⟨dz̄|dz̄⟩ = 1/g`;
//! * the curvature `R^L = 2∂∂̄φ` has coefficient `2φ_{zz̄}` and eigenvalue
//!   `2φ_{zz̄}/g` relative to Θ.
//!
//! With these conventions the leading Bergman density is `(2π)^{-1} det R^L`.

mod normal;
mod quadrature;
pub mod sphere;
pub mod torus;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use normal::{normal_form_from_jet, NormalFrame};
pub use quadrature::{gauss_legendre, gauss_legendre_on, QuadNode, QuadratureRule};
pub use sphere::{Bump, Sphere};
pub use torus::Torus;

use crate::error::{Error, Result};

/// A point given by a chart and its coordinate in that chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub chart: usize,
    pub z: Complex64,
}

impl Point {
    pub fn new(chart: usize, z: Complex64) -> Self {
        Self { chart, z }
    }

    pub fn chart0(re: f64, im: f64) -> Self {
        Self::new(0, Complex64::new(re, im))
    }
}

/// Value and derivatives up to order two of a weight at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightJet {
    pub value: f64,
    /// `∂φ/∂z`; `∂φ/∂z̄` is its conjugate.
    pub dz: Complex64,
    pub dzz: Complex64,
    pub dzzbar: f64,
}

impl WeightJet {
    pub fn zero() -> Self {
        Self { value: 0.0, dz: 0.0.into(), dzz: 0.0.into(), dzzbar: 0.0 }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { value: c * self.value, dz: self.dz * c, dzz: self.dzz * c, dzzbar: c * self.dzzbar }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            value: self.value + o.value,
            dz: self.dz + o.dz,
            dzz: self.dzz + o.dzz,
            dzzbar: self.dzzbar + o.dzzbar,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartDomain {
    /// The whole coordinate plane.
    Plane,
    /// The universal cover of a torus; every coordinate is a valid lift.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub id: usize,
    pub label: String,
    pub dimension: usize,
    pub domain: ChartDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Sphere,
    Torus,
}

/// Structured-text model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: ModelName,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default)]
    pub perturbations: Vec<Bump>,
    /// Logarithmic pole coefficient at the chart-0 origin (sphere only).
    #[serde(default)]
    pub pole: Option<f64>,
    #[serde(default = "default_scale")]
    pub theta_scale: f64,
    /// Quadrature resolution; chosen from `k` when absent.
    #[serde(default)]
    pub resolution: Option<usize>,
}

fn default_degree() -> u32 {
    1
}
fn default_scale() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn sphere() -> Self {
        Self {
            name: ModelName::Sphere,
            degree: 1,
            perturbations: Vec::new(),
            pole: None,
            theta_scale: 1.0,
            resolution: None,
        }
    }

    pub fn torus() -> Self {
        Self { name: ModelName::Torus, ..Self::sphere() }
    }

    /// Hex digest of the canonical JSON encoding; keys frame caches.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("model spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

/// Curvature of the bundle at a point.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    /// Matrix of `R^L` in the chart coordinates.
    pub matrix: DMatrix<Complex64>,
    /// Eigenvalues of `R^L` relative to Θ.
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelGeometry {
    Sphere(Sphere),
    Torus(Torus),
}

impl ModelGeometry {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match spec.name {
            ModelName::Sphere => Ok(Self::Sphere(Sphere::new(
                spec.degree,
                spec.perturbations.clone(),
                spec.pole,
                spec.theta_scale,
            )?)),
            ModelName::Torus => {
                if !spec.perturbations.is_empty() || spec.pole.is_some() || spec.degree != 1 {
                    return Err(Error::Config(
                        "the torus ships only the flat degree-one weight".into(),
                    ));
                }
                Ok(Self::Torus(Torus::new(spec.theta_scale)?))
            }
        }
    }

    pub fn name(&self) -> ModelName {
        match self {
            Self::Sphere(_) => ModelName::Sphere,
            Self::Torus(_) => ModelName::Torus,
        }
    }

    pub fn dimension(&self) -> usize {
        1
    }

    pub fn charts(&self) -> Vec<Chart> {
        let (labels, domain) = match self {
            Self::Sphere(_) => (["z", "w = 1/z"], ChartDomain::Plane),
            Self::Torus(_) => (["z", "z + 1 + i"], ChartDomain::Cover),
        };
        labels
            .iter()
            .enumerate()
            .map(|(id, l)| Chart { id, label: l.to_string(), dimension: 1, domain })
            .collect()
    }

    /// Degree of `L`; `dim H^0(L^k)` is `k·deg + 1` on the sphere and `k` on the torus.
    pub fn degree(&self) -> u32 {
        match self {
            Self::Sphere(s) => s.degree,
            Self::Torus(_) => 1,
        }
    }

    pub fn section_count(&self, k: u32) -> usize {
        match self {
            Self::Sphere(s) => (k * s.degree + 1) as usize,
            Self::Torus(_) => k as usize,
        }
    }

    pub fn to_chart(&self, p: &Point, chart: usize) -> Result<Point> {
        match self {
            Self::Sphere(s) => s.to_chart(p, chart),
            Self::Torus(t) => t.to_chart(p, chart),
        }
    }

    pub fn log_transition_factor(&self, p: &Point, to: usize) -> Result<Complex64> {
        match self {
            Self::Sphere(s) => s.log_transition_factor(p, to),
            Self::Torus(t) => t.log_transition_factor(p, to),
        }
    }

    pub fn weight_jet(&self, p: &Point) -> Result<WeightJet> {
        match self {
            Self::Sphere(s) => s.weight_jet(p),
            Self::Torus(t) => t.weight_jet(p),
        }
    }

    pub fn weight(&self, p: &Point) -> Result<f64> {
        match self {
            Self::Sphere(s) => s.weight(p),
            Self::Torus(t) => t.weight(p),
        }
    }

    pub fn theta(&self, p: &Point) -> f64 {
        match self {
            Self::Sphere(s) => s.theta(p),
            Self::Torus(t) => t.theta(p),
        }
    }

    pub fn volume_density(&self, p: &Point) -> f64 {
        2.0 * self.theta(p)
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Sphere(s) => s.volume(),
            Self::Torus(t) => t.volume(),
        }
    }

    pub fn canonical(&self, p: &Point) -> Point {
        match self {
            Self::Sphere(s) => s.canonical(p),
            Self::Torus(t) => t.canonical(p),
        }
    }

    /// Distance used to separate sample pairs: chart-coordinate distance on
    /// the sphere (same chart), flat distance on the torus.
    pub fn separation(&self, a: &Point, b: &Point) -> Result<f64> {
        let b = self.to_chart(b, a.chart)?;
        Ok(match self {
            Self::Sphere(_) => (a.z - b.z).norm(),
            Self::Torus(_) => Torus::distance(a.z, b.z),
        })
    }

    pub fn curvature_from_weight(&self, p: &Point) -> Result<CurvatureData> {
        let jet = self.weight_jet(p)?;
        curvature_from_jet(&jet, self.theta(p))
    }

    pub fn det_curvature(&self, p: &Point) -> Result<f64> {
        let c = self.curvature_from_weight(p)?;
        det_positive(&c, &format!("{p:?}"))
    }

    /// Normal coordinates centred at `p`, see [`NormalFrame`].
    pub fn normal_coordinates(&self, p: &Point) -> Result<NormalFrame> {
        let jet = self.weight_jet(p)?;
        NormalFrame::new(*p, &jet, self.theta(p))
    }

    /// Normal coordinates that also remove the `z'² z̄'` terms of the weight;
    /// `φ_{zzz̄}` is taken by central differences of `φ_{zz̄}`.
    pub fn normal_coordinates_third_order(&self, p: &Point) -> Result<NormalFrame> {
        let mut nf = self.normal_coordinates(p)?;
        let h = 1e-4;
        let f = |dz: Complex64| self.weight_jet(&Point::new(p.chart, p.z + dz)).map(|j| j.dzzbar);
        let fx = (f(Complex64::new(h, 0.0))? - f(Complex64::new(-h, 0.0))?) / (2.0 * h);
        let fy = (f(Complex64::new(0.0, h))? - f(Complex64::new(0.0, -h))?) / (2.0 * h);
        let third = Complex64::new(fx, -fy) * 0.5;
        nf.cubic = third / (2.0 * self.weight_jet(p)?.dzzbar);
        Ok(nf)
    }

    /// Default quadrature for sections of `L^k`.
    pub fn quadrature(&self, k: u32) -> Result<QuadratureRule> {
        let min = self.min_resolution(k);
        let res = self.default_resolution(k);
        self.build_quadrature(res.max(min), k)
    }

    pub fn min_resolution(&self, k: u32) -> usize {
        match self {
            Self::Sphere(s) => (k * s.degree) as usize + 2,
            Self::Torus(_) => (2 * k as usize).max(16),
        }
    }

    fn default_resolution(&self, k: u32) -> usize {
        match self {
            Self::Sphere(s) => {
                let base = (k * s.degree) as usize + 48;
                if s.bumps.is_empty() {
                    base
                } else {
                    base.max(160)
                }
            }
            Self::Torus(_) => (4 * k as usize).max(64),
        }
    }

    pub fn build_quadrature(&self, resolution: usize, k: u32) -> Result<QuadratureRule> {
        let min = self.min_resolution(k);
        if resolution < min {
            return Err(Error::Resolution { got: resolution, min });
        }
        Ok(match self {
            Self::Sphere(_) => QuadratureRule::sphere(resolution),
            Self::Torus(_) => QuadratureRule::torus(resolution),
        })
    }

    /// Volume weights `w · 2g` of a rule.
    pub fn volume_weights(&self, rule: &QuadratureRule) -> Vec<f64> {
        rule.nodes
            .iter()
            .map(|n| n.weight * self.volume_density(&Point::new(n.chart, n.z)))
            .collect()
    }
}

pub(crate) fn curvature_from_jet(jet: &WeightJet, g: f64) -> Result<CurvatureData> {
    if !jet.dzzbar.is_finite() || !(g > 0.0) {
        return Err(Error::Numerics(format!("non-finite curvature data {jet:?}, g = {g}")));
    }
    let r = 2.0 * jet.dzzbar;
    let matrix = DMatrix::from_element(1, 1, Complex64::new(r, 0.0));
    let herm = (&matrix - matrix.adjoint()).norm();
    if herm > 1e-12 * (1.0 + r.abs()) {
        return Err(Error::Numerics(format!("curvature matrix not Hermitian ({herm:e})")));
    }
    Ok(CurvatureData { matrix, eigenvalues: vec![r / g] })
}

pub(crate) fn det_positive(c: &CurvatureData, at: &str) -> Result<f64> {
    let mut det = 1.0;
    for &l in &c.eigenvalues {
        if !(l > 0.0) {
            return Err(Error::Positivity { at: at.to_string(), eigenvalue: l });
        }
        det *= l;
    }
    Ok(det)
}
