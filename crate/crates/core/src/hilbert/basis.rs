//! Spanning sets of holomorphic sections of `L^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, Point};

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisKind {
    /// Chart-0 representatives `ν_e z^e`.
    Monomials { exponents: Vec<i64>, log_scale: Vec<f64> },
    /// Theta functions `θ_m`, `m = 0..k`, with a common scale.
    Theta { log_scale: f64 },
}

/// Global holomorphic sections of `L^k`, evaluated as weighted representatives
/// `b̃_i = rep_i · e^{−kφ}` in the frame of the chart a point is given in.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSectionBasis {
    pub geometry: ModelGeometry,
    pub k: u32,
    pub kind: BasisKind,
}

impl WeightedSectionBasis {
    /// Full space `H^0(L^k)` of the model: monomials `z^0..z^{km}` on the sphere
    /// and the `k` theta functions on the torus.
    pub fn standard(geometry: &ModelGeometry, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        match geometry {
            ModelGeometry::Sphere(s) => {
                let exps: Vec<i64> = (0..=(k * s.degree) as i64).collect();
                Self::monomials(geometry, k, exps)
            }
            ModelGeometry::Torus(t) => {
                let g = 2.0 * PI * t.theta_scale / (2.0 * k as f64).sqrt();
                Ok(Self { geometry: geometry.clone(), k, kind: BasisKind::Theta { log_scale: -0.5 * g.ln() } })
            }
        }
    }

    /// Monomial sections on the sphere with the given chart-0 exponents,
    /// scaled by the closed-form norms of the model (smooth or singular).
    pub fn monomials(geometry: &ModelGeometry, k: u32, exponents: Vec<i64>) -> Result<Self> {
        let s = match geometry {
            ModelGeometry::Sphere(s) => s,
            _ => return Err(Error::Config("monomial basis needs the sphere".into())),
        };
        let km = (k * s.degree) as i64;
        let mut log_scale = Vec::with_capacity(exponents.len());
        for &e in &exponents {
            let lg = closed_form_log_norm_sq(s.m(), s.theta_scale, s.pole, k, e)
                .or_else(|| closed_form_log_norm_sq(s.m(), s.theta_scale, None, k, e.clamp(0, km)))
                .unwrap_or(0.0);
            log_scale.push(-0.5 * lg);
        }
        Ok(Self { geometry: geometry.clone(), k, kind: BasisKind::Monomials { exponents, log_scale } })
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            BasisKind::Monomials { exponents, .. } => exponents.len(),
            BasisKind::Theta { .. } => self.k as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exponents(&self) -> Option<&[i64]> {
        match &self.kind {
            BasisKind::Monomials { exponents, .. } => Some(exponents),
            _ => None,
        }
    }

    /// Weighted representatives at `p`; never forms `e^{+kφ}`.
    pub fn eval_weighted(&self, p: &Point, out: &mut [Complex64]) -> Result<()> {
        let k = self.k as f64;
        let phi = self.geometry.weight(p)?;
        match &self.kind {
            BasisKind::Monomials { exponents, log_scale } => {
                let km = match &self.geometry {
                    ModelGeometry::Sphere(s) => (self.k * s.degree) as i64,
                    _ => unreachable!(),
                };
                let (lr, arg) = (p.z.norm().ln(), p.z.arg());
                for ((o, &e), &ls) in out.iter_mut().zip(exponents).zip(log_scale) {
                    let power = if p.chart == 0 { e } else { km - e };
                    *o = if power == 0 {
                        Complex64::new((ls - k * phi).exp(), 0.0)
                    } else if p.z.norm() == 0.0 {
                        if power > 0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            return Err(Error::Pole(format!("{p:?}")));
                        }
                    } else {
                        Complex64::from_polar((ls + power as f64 * lr - k * phi).exp(), power as f64 * arg)
                    };
                }
            }
            BasisKind::Theta { log_scale } => {
                let kk = self.k as i64;
                let (x, y) = (p.z.re, p.z.im);
                let reach = (40.0 * k / PI).sqrt();
                let gauge = k * PI * x * y;
                for (m, o) in out.iter_mut().enumerate() {
                    let m = m as i64;
                    let lo = ((-k * y - m as f64 - reach) / k).floor() as i64;
                    let hi = ((-k * y - m as f64 + reach) / k).ceil() as i64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for n in lo..=hi {
                        let big_n = (kk * n + m) as f64;
                        let t = big_n + k * y;
                        acc += Complex64::from_polar(
                            (log_scale - PI / k * t * t).exp(),
                            2.0 * PI * big_n * x + gauge,
                        );
                    }
                    *o = acc;
                }
            }
        }
        Ok(())
    }

    pub fn weighted(&self, p: &Point) -> Result<Vec<Complex64>> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.len()];
        self.eval_weighted(p, &mut v)?;
        Ok(v)
    }

    /// Closed-form Gram matrix when the model has one.
    pub fn closed_form_gram(&self) -> Option<DMatrix<Complex64>> {
        match (&self.kind, &self.geometry) {
            (BasisKind::Theta { .. }, _) => Some(DMatrix::identity(self.len(), self.len())),
            (BasisKind::Monomials { exponents, log_scale }, ModelGeometry::Sphere(s)) => {
                if !s.bumps.is_empty() {
                    return None;
                }
                let mut g = DMatrix::zeros(exponents.len(), exponents.len());
                for (i, (&e, &ls)) in exponents.iter().zip(log_scale).enumerate() {
                    let lg = closed_form_log_norm_sq(s.m(), s.theta_scale, s.pole, self.k, e)?;
                    g[(i, i)] = Complex64::new((lg + 2.0 * ls).exp(), 0.0);
                }
                Some(g)
            }
            _ => None,
        }
    }
}

/// `ln ∫ |z^e|² e^{−2kφ} dv` for the rotation-invariant sphere weights:
/// `2π s m · B(e − kτ + 1, km − e + 1)`, or `None` when the integral diverges.
pub fn closed_form_log_norm_sq(m: f64, theta_scale: f64, pole: Option<f64>, k: u32, e: i64) -> Option<f64> {
    let k = k as f64;
    let tau = pole.unwrap_or(0.0);
    let a = e as f64 - k * tau + 1.0;
    let b = k * m - e as f64 + 1.0;
    if a <= 0.0 || b <= 0.0 {
        return None;
    }
    Some((2.0 * PI * theta_scale * m).ln() + ln_beta(a, b))
}
