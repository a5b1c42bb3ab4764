use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expansion::fit_power_law;
use super::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::{Point, QuadratureRule};
use crate::hilbert::{dbar_norm, dbar_weighted, weighted_norm_sq};

/// Disc `|z − c| < radius` in one chart, or the annulus
/// `inner < |z − c| < radius` when `inner > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRegion {
    pub chart: usize,
    pub center: Complex64,
    pub radius: f64,
    #[serde(default)]
    pub inner: f64,
}

impl GapRegion {
    pub fn disc(chart: usize, center: Complex64, radius: f64) -> Self {
        Self { chart, center, radius, inner: 0.0 }
    }

    pub fn annulus(chart: usize, center: Complex64, inner: f64, radius: f64) -> Self {
        Self { chart, center, radius, inner }
    }

    pub fn rule(&self) -> QuadratureRule {
        if self.inner > 0.0 {
            QuadratureRule::annulus(self.chart, self.center, self.inner, self.radius, 48, 192)
        } else {
            QuadratureRule::disc(self.chart, self.center, self.radius, 48, 96)
        }
    }
}

/// Weighted representative `v(z) = p(z − c, conj(z − c)) · β(|z − c|² / r²)`
/// with `β(s) = e^{−1/(1−s)}` and `p` of degree at most two in `z, z̄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSection {
    pub center: Complex64,
    pub radius: f64,
    /// Coefficients of `1, z, z̄, z², z z̄, z̄²`.
    pub coeffs: [Complex64; 6],
}

impl TestSection {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let u = z - self.center;
        let s = u.norm_sqr() / (self.radius * self.radius);
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ub = u.conj();
        let c = &self.coeffs;
        let p = c[0] + c[1] * u + c[2] * ub + c[3] * u * u + c[4] * u * ub + c[5] * ub * ub;
        p * (-1.0 / (1.0 - s)).exp()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut t = self.clone();
        t.coeffs.iter_mut().for_each(|c| *c *= factor);
        t
    }

    /// Seeded random sections with supports inside `region`.
    pub fn generate(region: &GapRegion, count: usize, seed: u64) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let (offset, radius) = if region.inner > 0.0 {
                    let half = 0.5 * (region.radius - region.inner);
                    let mid = region.inner + half;
                    let c = Complex64::from_polar(mid, rng.gen_range(0.0..std::f64::consts::TAU));
                    let shift = Complex64::from_polar(half * rng.gen_range(0.0..0.3), rng.gen_range(0.0..std::f64::consts::TAU));
                    (c + shift, half * rng.gen_range(0.5..0.7))
                } else {
                    let offset = Complex64::from_polar(
                        region.radius * rng.gen_range(0.0..0.3),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    );
                    (offset, region.radius * rng.gen_range(0.5..0.7))
                };
                let mut coeffs = [Complex64::new(0.0, 0.0); 6];
                for c in coeffs.iter_mut() {
                    *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
                Self { center: region.center + offset, radius, coeffs }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub region: GapRegion,
    pub ks: Vec<u32>,
    /// `ρ_k = max ‖(I − P_k)u‖ / ‖∂̄_k u‖`.
    pub rho: Vec<f64>,
    pub exponent: f64,
    pub constant: f64,
    pub residual: f64,
    /// Sections skipped as numerically holomorphic.
    pub skipped: usize,
}

const DBAR_STEP: f64 = 1e-4;

/// Per-section `(‖(I − P_k)u‖, ‖∂̄_k u‖, ‖u‖)` on the rule covering `D`.
pub fn gap_ratio_parts(
    frame: &crate::hilbert::BergmanFrame,
    region: &GapRegion,
    rule: &QuadratureRule,
    section: &TestSection,
) -> Result<(f64, f64, f64)> {
    let geom = frame.geometry();
    let k = frame.k();
    let v = |p: &Point| section.eval(p.z);
    let norm_sq = weighted_norm_sq(geom, rule, v);
    let coeffs = frame.project(rule, v)?;
    let proj_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let perp = (norm_sq - proj_sq).max(0.0).sqrt();
    let dbar = dbar_norm(geom, rule, |p| dbar_weighted(geom, k, region.chart, |z| section.eval(z), p.z, DBAR_STEP))?;
    Ok((perp, dbar, norm_sq.sqrt()))
}

pub fn gap_estimate(family: &FrameFamily, region: &GapRegion, sections: &[TestSection]) -> Result<GapEstimate> {
    let rule = region.rule();
    let mut rho = Vec::new();
    let mut skipped = 0;
    for frame in &family.frames {
        let mut worst: Option<f64> = None;
        let mut skipped_here = 0;
        for s in sections {
            let (perp, dbar, norm) = gap_ratio_parts(frame, region, &rule, s)?;
            if dbar <= 1e-12 * norm {
                skipped_here += 1;
                continue;
            }
            let r = perp / dbar;
            worst = Some(worst.map_or(r, |w| w.max(r)));
        }
        skipped = skipped.max(skipped_here);
        rho.push(worst.ok_or(Error::Generator)?);
    }
    let ks = family.ks();
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let (constant, exponent, residual) = if ks.len() >= 2 {
        fit_power_law(&kf, &rho)?
    } else {
        (rho[0], 0.0, 0.0)
    };
    Ok(GapEstimate { region: *region, ks, rho, exponent, constant, residual, skipped })
}
