//! Square torus `ℂ/(ℤ + iℤ)` with the translation-invariant weight `π|z|²/2`.
//!
//! Both charts are lifts to the universal cover: chart 1 uses the coordinate
//! `ζ = z + (1 + i)`. Sections are quasi-periodic functions with factor of
//! automorphy `e_ω(z) = (−1)^{ab} exp(π(ω̄z + |ω|²/2))` for `ω = a + ib`.

use num_complex::Complex64;

use super::{Point, WeightJet};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Lattice shift from chart 0 to chart 1.
pub const CHART_SHIFT: (i64, i64) = (1, 1);

#[derive(Clone, Debug, PartialEq)]
pub struct Torus {
    pub theta_scale: f64,
}

impl Default for Torus {
    fn default() -> Self {
        Self { theta_scale: 1.0 }
    }
}

/// `log e_ω(z)` for the lattice vector `ω = a + ib`.
pub fn log_automorphy(a: i64, b: i64, z: Complex64) -> Complex64 {
    let omega = Complex64::new(a as f64, b as f64);
    let phase = if (a * b).rem_euclid(2) == 1 { PI } else { 0.0 };
    (omega.conj() * z + omega.norm_sqr() / 2.0) * PI + Complex64::new(0.0, phase)
}

impl Torus {
    pub fn new(theta_scale: f64) -> Result<Self> {
        if !(theta_scale > 0.0) {
            return Err(Error::Config("theta scale must be positive".into()));
        }
        Ok(Self { theta_scale })
    }

    fn shift(chart: usize) -> Complex64 {
        if chart == 1 {
            Complex64::new(CHART_SHIFT.0 as f64, CHART_SHIFT.1 as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn to_chart(&self, p: &Point, chart: usize) -> Result<Point> {
        if chart > 1 || p.chart > 1 {
            return Err(Error::Domain { chart, point: format!("{p:?}") });
        }
        Ok(Point::new(chart, p.z - Self::shift(p.chart) + Self::shift(chart)))
    }

    /// `log g` with `s_from = g · s_to`; the translation from the source lift to
    /// the target lift acts through the factor of automorphy.
    pub fn log_transition_factor(&self, p: &Point, to: usize) -> Result<Complex64> {
        self.to_chart(p, to)?;
        let (a, b) = match (p.chart, to) {
            (0, 1) => CHART_SHIFT,
            (1, 0) => (-CHART_SHIFT.0, -CHART_SHIFT.1),
            _ => return Ok(Complex64::new(0.0, 0.0)),
        };
        // φ_to(z+ω) = φ_from(z) + log|g|, with |e_ω|² = e^{2φ(z+ω) − 2φ(z)}.
        Ok(log_automorphy(a, b, p.z))
    }

    pub fn weight_jet(&self, p: &Point) -> Result<WeightJet> {
        if p.chart > 1 {
            return Err(Error::Domain { chart: p.chart, point: format!("{p:?}") });
        }
        let z = p.z;
        Ok(WeightJet {
            value: PI * z.norm_sqr() / 2.0,
            dz: z.conj() * (PI / 2.0),
            dzz: Complex64::new(0.0, 0.0),
            dzzbar: PI / 2.0,
        })
    }

    pub fn weight(&self, p: &Point) -> Result<f64> {
        Ok(PI * p.z.norm_sqr() / 2.0)
    }

    pub fn theta(&self, _p: &Point) -> f64 {
        self.theta_scale * PI
    }

    pub fn volume(&self) -> f64 {
        2.0 * PI * self.theta_scale
    }

    /// Representative of the point in chart 0 lying in `[0,1)²`.
    pub fn reduce(z: Complex64) -> Complex64 {
        Complex64::new(z.re.rem_euclid(1.0), z.im.rem_euclid(1.0))
    }

    /// Flat distance on the torus.
    pub fn distance(a: Complex64, b: Complex64) -> f64 {
        let d = a - b;
        let dx = d.re - d.re.round();
        let dy = d.im - d.im.round();
        (dx * dx + dy * dy).sqrt()
    }

    pub fn canonical(&self, p: &Point) -> Point {
        let z0 = p.z - Self::shift(p.chart);
        Point::new(0, Self::reduce(z0))
    }
}
