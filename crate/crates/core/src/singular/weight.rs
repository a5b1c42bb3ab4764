use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, Point, Sphere};

/// Degree-`m` metric on the sphere with a logarithmic pole of coefficient `τ`:
/// `φ = m·½log(1+|z|²) + τ(log|z| − ½log(1+|z|²))` in coordinates where the
/// pole sits at the chart-0 origin. Off the pole the curvature is
/// `(m − τ)` times the Fubini–Study form.
///
/// A pole elsewhere is moved to the origin by the unitary rotation
/// `[z₀ : z₁] ↦ [a₁z₀ − a₀z₁ : ā₀z₀ + ā₁z₁]` for the pole `[a₀ : a₁]`, an
/// isometry of the round metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularWeight {
    pub degree: u32,
    pub tau: f64,
    pub pole: Point,
}

impl SingularWeight {
    pub fn new(degree: u32, tau: f64, pole: Point) -> Result<Self> {
        if !(tau > 0.0 && tau < degree as f64) {
            return Err(Error::Config(format!("pole coefficient must lie in (0, {degree}), got {tau}")));
        }
        if pole.chart > 1 {
            return Err(Error::Domain { chart: pole.chart, point: format!("{pole:?}") });
        }
        Ok(Self { degree, tau, pole })
    }

    pub fn at_origin(degree: u32, tau: f64) -> Result<Self> {
        Self::new(degree, tau, Point::chart0(0.0, 0.0))
    }

    /// Geometry of the model with the pole at the chart-0 origin.
    pub fn geometry(&self) -> ModelGeometry {
        ModelGeometry::Sphere(Sphere { degree: self.degree, bumps: vec![], pole: Some(self.tau), theta_scale: 1.0 })
    }

    fn homogeneous(p: &Point) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        if p.chart == 0 {
            (p.z, one)
        } else {
            (one, p.z)
        }
    }

    /// The point in model coordinates (pole at the chart-0 origin).
    pub fn to_model(&self, p: &Point) -> Point {
        let (a0, a1) = Self::homogeneous(&self.pole);
        if self.pole.chart == 0 && a0 == Complex64::new(0.0, 0.0) {
            return *p;
        }
        // Unitary map sending the pole [a0 : a1] to [0 : 1].
        let (z0, z1) = Self::homogeneous(p);
        let u0 = a1 * z0 - a0 * z1;
        let u1 = a0.conj() * z0 + a1.conj() * z1;
        if u1.norm() >= u0.norm() {
            Point::new(0, u0 / u1)
        } else {
            Point::new(1, u1 / u0)
        }
    }

    /// Chart-0 distance from the pole in model coordinates (infinite in chart 1).
    pub fn distance_to_pole(&self, p: &Point) -> f64 {
        let q = self.to_model(p);
        if q.chart == 0 {
            q.z.norm()
        } else if q.z.norm() == 0.0 {
            f64::INFINITY
        } else {
            q.z.norm().recip()
        }
    }

    /// Curvature eigenvalue relative to Θ off the pole.
    pub fn regular_eigenvalue(&self) -> f64 {
        (self.degree as f64 - self.tau) / self.degree as f64
    }
}

/// Vanishing orders `v ≤ k m` at the pole with `v > kτ − 1`.
pub fn admissible_orders(k: u32, m: u32, tau: f64) -> Vec<i64> {
    let threshold = k as f64 * tau - 1.0;
    (0..=(k * m) as i64).filter(|&v| v as f64 > threshold).collect()
}

/// Exponents `(v − kτ, km − v)` of `t` and `1 − t` in `|z^v|² e^{−2kφ}`,
/// with `t = |z|²/(1+|z|²)`.
pub fn beta_exponents(k: u32, m: u32, tau: f64, v: i64) -> (f64, f64) {
    (v as f64 - k as f64 * tau, (k * m) as f64 - v as f64)
}
