use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::expansion::linear_fit;
use super::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// A closed disc in one chart, standing in for the support of a cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub chart: usize,
    pub center: Complex64,
    pub radius: f64,
}

impl Support {
    pub fn new(chart: usize, center: Complex64, radius: f64) -> Self {
        Self { chart, center, radius }
    }

    /// Centre plus `rings` circles of `per_ring` points each.
    pub fn samples(&self, rings: usize, per_ring: usize) -> Vec<Point> {
        let mut pts = vec![Point::new(self.chart, self.center)];
        for r in 1..=rings {
            let rad = self.radius * r as f64 / rings as f64;
            for l in 0..per_ring {
                let th = 2.0 * PI * l as f64 / per_ring as f64;
                pts.push(Point::new(self.chart, self.center + Complex64::from_polar(rad, th)));
            }
        }
        pts
    }

    /// Chart-coordinate gap between two discs of the same chart.
    pub fn gap(&self, other: &Support) -> Result<f64> {
        if self.chart != other.chart {
            return Err(Error::Precondition("supports must lie in one chart".into()));
        }
        Ok((self.center - other.center).norm() - self.radius - other.radius)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub ks: Vec<u32>,
    /// `s_k = sup |P_{k,s,s₁}(x, y)|` over the sampled pairs.
    pub sup: Vec<f64>,
    /// Fitted `s_k ≈ A e^{−αk}`.
    pub alpha: f64,
    pub log_a: f64,
    pub residual: f64,
    pub separation: f64,
    /// `s_{k_max} / s_{k_min}`.
    pub ratio: f64,
}

impl DecayReport {
    /// Whether `s_k` strictly decreases over the `k > k_min` part of the sweep.
    pub fn decreasing_beyond(&self, k_min: u32) -> bool {
        let tail: Vec<f64> =
            self.ks.iter().zip(&self.sup).filter(|(k, _)| **k >= k_min).map(|(_, s)| *s).collect();
        tail.windows(2).all(|w| w[1] < w[0])
    }
}

/// Sup of the kernel between two disjoint supports, swept over `k`.
pub fn offdiagonal_decay(family: &FrameFamily, chi: &Support, chi1: &Support, delta: f64) -> Result<DecayReport> {
    let separation = chi.gap(chi1)?;
    if !(separation >= delta) || !(delta > 0.0) {
        return Err(Error::Precondition(format!("supports are {separation} apart, need at least {delta} > 0")));
    }
    let xs = chi1.samples(4, 16);
    let ys = chi.samples(4, 16);
    let mut sup = Vec::with_capacity(family.frames.len());
    for f in &family.frames {
        let fx: Vec<Vec<Complex64>> = xs.iter().map(|p| f.eval(p)).collect::<Result<_>>()?;
        let fy: Vec<Vec<Complex64>> = ys.iter().map(|p| f.eval(p)).collect::<Result<_>>()?;
        let mut s = 0.0f64;
        for a in &fx {
            for b in &fy {
                let v: Complex64 = a.iter().zip(b).map(|(u, w)| u * w.conj()).sum();
                s = s.max(v.norm());
            }
        }
        sup.push(s);
    }
    let ks = family.ks();
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let logs: Vec<f64> = sup.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = linear_fit(&kf, &logs)?;
    let ratio = sup.last().copied().unwrap_or(0.0) / sup.first().copied().unwrap_or(1.0);
    Ok(DecayReport { ks, sup, alpha: -fit.slope, log_a: fit.intercept, residual: fit.residual, separation, ratio })
}
