//! The Riemann sphere with the Fubini–Study metric on `O(m)`.
//!
//! Chart 0 has coordinate `z`, chart 1 has `w = 1/z`. The frames satisfy
//! `s_0 = w^m s_1`, so a section with chart-0 representative `a(z)` has
//! chart-1 representative `a(1/w) w^{km}` on `L^k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Point, WeightJet};
use crate::error::{Error, Result};

/// Smooth compactly supported weight perturbation `A·β(|z−c|²/r²)` with
/// `β(ρ) = exp(1 − 1/(1−ρ))` on `ρ < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    /// Chart the center is expressed in.
    #[serde(default)]
    pub chart: usize,
    pub center: [f64; 2],
    pub amplitude: f64,
    pub radius: f64,
}

impl Bump {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }

    /// Jet of the bump in its own chart coordinate.
    pub(crate) fn jet_local(&self, z: Complex64) -> WeightJet {
        let u = z - self.center();
        let r2 = self.radius * self.radius;
        let rho = u.norm_sqr() / r2;
        if rho >= 1.0 {
            return WeightJet::zero();
        }
        let s = 1.0 - rho;
        let beta = (1.0 - 1.0 / s).exp();
        let d1 = -beta / (s * s);
        let d2 = beta * (1.0 / s.powi(4) - 2.0 / s.powi(3));
        let a = self.amplitude;
        WeightJet {
            value: a * beta,
            dz: a * d1 * u.conj() / r2,
            dzz: a * d2 * u.conj() * u.conj() / (r2 * r2),
            dzzbar: a * (d2 * u.norm_sqr() / (r2 * r2) + d1 / r2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sphere {
    pub degree: u32,
    pub bumps: Vec<Bump>,
    /// Coefficient `τ` of the logarithmic pole at the chart-0 origin.
    pub pole: Option<f64>,
    pub theta_scale: f64,
}

fn fs_jet(z: Complex64) -> WeightJet {
    let q = 1.0 + z.norm_sqr();
    WeightJet {
        value: 0.5 * q.ln(),
        dz: z.conj() / (2.0 * q),
        dzz: -(z.conj() * z.conj()) / (2.0 * q * q),
        dzzbar: 1.0 / (2.0 * q * q),
    }
}

impl Sphere {
    pub fn new(degree: u32, bumps: Vec<Bump>, pole: Option<f64>, theta_scale: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("sphere degree must be positive".into()));
        }
        if !(theta_scale > 0.0) {
            return Err(Error::Config("theta scale must be positive".into()));
        }
        for b in &bumps {
            if b.chart > 1 || !(b.radius > 0.0) {
                return Err(Error::Config(format!("invalid perturbation {b:?}")));
            }
        }
        if let Some(tau) = pole {
            if !(tau > 0.0 && tau < degree as f64) {
                return Err(Error::Config(format!(
                    "pole coefficient {tau} must lie in (0, {degree})"
                )));
            }
        }
        Ok(Self { degree, bumps, pole, theta_scale })
    }

    pub fn fubini_study(degree: u32) -> Self {
        Self { degree, bumps: Vec::new(), pole: None, theta_scale: 1.0 }
    }

    pub fn m(&self) -> f64 {
        self.degree as f64
    }

    /// Coordinate of the same point in the other chart.
    pub fn flip(z: Complex64) -> Option<Complex64> {
        if z == Complex64::new(0.0, 0.0) {
            None
        } else {
            Some(z.inv())
        }
    }

    pub fn to_chart(&self, p: &Point, chart: usize) -> Result<Point> {
        if chart > 1 || p.chart > 1 {
            return Err(Error::Domain { chart, point: format!("{p:?}") });
        }
        if p.chart == chart {
            return Ok(*p);
        }
        Self::flip(p.z)
            .map(|z| Point::new(chart, z))
            .ok_or_else(|| Error::Domain { chart, point: format!("{p:?}") })
    }

    /// `log g` with `s_from = g · s_to` for the degree-`m` frames.
    pub fn log_transition_factor(&self, p: &Point, to: usize) -> Result<Complex64> {
        let q = self.to_chart(p, to)?;
        if p.chart == to {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // s_0 = w^m s_1 where w is the chart-1 coordinate; s_1 = z^m s_0.
        let coord = q.z; // coordinate of the target chart
        Ok(coord.ln() * self.m())
    }

    pub fn weight_jet(&self, p: &Point) -> Result<WeightJet> {
        if p.chart > 1 {
            return Err(Error::Domain { chart: p.chart, point: format!("{p:?}") });
        }
        let m = self.m();
        let mut jet = fs_jet(p.z).scale(m);
        if let Some(tau) = self.pole {
            if p.chart == 0 {
                if p.z.norm() == 0.0 {
                    return Err(Error::Pole(format!("{p:?}")));
                }
                let z = p.z;
                let log = WeightJet {
                    value: z.norm().ln(),
                    dz: 0.5 / z,
                    dzz: -0.5 / (z * z),
                    dzzbar: 0.0,
                };
                jet = jet.add(&log.add(&fs_jet(z).scale(-1.0)).scale(tau));
            } else {
                jet = jet.add(&fs_jet(p.z).scale(-tau));
            }
        }
        for b in &self.bumps {
            jet = jet.add(&self.bump_jet(b, p));
        }
        Ok(jet)
    }

    fn bump_jet(&self, b: &Bump, p: &Point) -> WeightJet {
        if b.chart == p.chart {
            return b.jet_local(p.z);
        }
        let w = p.z;
        if w.norm() == 0.0 {
            return WeightJet::zero();
        }
        let z = w.inv();
        let f = b.jet_local(z);
        let w2 = w * w;
        WeightJet {
            value: f.value,
            dz: -f.dz / w2,
            dzz: f.dzz / (w2 * w2) + f.dz * 2.0 / (w2 * w),
            dzzbar: f.dzzbar / w.norm_sqr().powi(2),
        }
    }

    /// Value of the weight only.
    pub fn weight(&self, p: &Point) -> Result<f64> {
        let m = self.m();
        let q = 1.0 + p.z.norm_sqr();
        let mut v = 0.5 * m * q.ln();
        if let Some(tau) = self.pole {
            if p.chart == 0 {
                if p.z.norm() == 0.0 {
                    return Err(Error::Pole(format!("{p:?}")));
                }
                v += tau * (p.z.norm().ln() - 0.5 * q.ln());
            } else {
                v -= tau * 0.5 * q.ln();
            }
        }
        for b in &self.bumps {
            v += self.bump_jet(b, p).value;
        }
        Ok(v)
    }

    /// Coefficient `g = ⟨∂_z|∂_z⟩` of Θ; by default Θ is the curvature of the
    /// unperturbed `O(m)` metric.
    pub fn theta(&self, p: &Point) -> f64 {
        let q = 1.0 + p.z.norm_sqr();
        self.theta_scale * self.m() / (q * q)
    }

    /// Riemannian volume of the sphere for the chosen Θ.
    pub fn volume(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.m() * self.theta_scale
    }

    /// Chart whose coordinate has modulus at most one (chart 0 on ties).
    pub fn canonical(&self, p: &Point) -> Point {
        if p.z.norm() <= 1.0 {
            *p
        } else {
            Point::new(1 - p.chart, p.z.inv())
        }
    }
}
