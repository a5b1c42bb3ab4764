use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::cutoff::CutoffProfile;
use super::section::{PeakContext, PeakKind, PeakSection};
use crate::asymptotics::{fit_power_law, FrameFamily};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Radius of the region `D` around the base point, in normal coordinates.
pub const REGION_RADIUS: f64 = 0.5;

/// One inequality family evaluated over all `(p, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityFamily {
    pub name: String,
    /// `(point index, k, measured, bound)`.
    pub rows: Vec<(usize, u32, f64, f64)>,
    /// `true` for `measured ≥ bound`, `false` for `measured ≤ bound`.
    pub lower: bool,
    pub skipped: bool,
}

impl InequalityFamily {
    fn holds(&self, row: &(usize, u32, f64, f64)) -> bool {
        if self.lower {
            row.2 >= row.3
        } else {
            row.2 <= row.3
        }
    }

    pub fn pass_from(&self, k0: u32) -> bool {
        self.skipped || self.rows.iter().filter(|r| r.1 >= k0).all(|r| self.holds(r))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakMeasurement {
    pub point: usize,
    pub plain: PeakSection,
    pub directional: PeakSection,
    /// `max |u_k(x)|²` over sampled `x ∉ D`.
    pub exterior_max: f64,
    /// Share of `‖u_k‖²` inside the normal ball of radius `2/√k`.
    pub concentration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub points: Vec<Point>,
    pub ks: Vec<u32>,
    pub c0: f64,
    pub c1: f64,
    pub families: Vec<InequalityFamily>,
    /// Smallest swept `k` from which every family holds.
    pub k0: Option<u32>,
    /// Fitted exponent of `max_{x∉D} |u_k(x)|²` in `k`.
    pub exterior_exponent: f64,
    pub measurements: Vec<PeakMeasurement>,
    pub pass: bool,
}

/// `ũ_k(p)` limit `½π^{−1}|det R^L_p| ∫ e^{−λ|v|²} χ(v_1)χ(v_2) dv`.
pub fn peak_limit(det_r: f64, lambda: f64, cutoff: &CutoffProfile) -> f64 {
    let g = cutoff.gaussian_integral(lambda);
    0.5 / PI * det_r.abs() * 2.0 * g * g
}

/// The same expression with the Gaussian factor dropped.
pub fn peak_limit_without_gaussian(det_r: f64, cutoff: &CutoffProfile) -> f64 {
    let g = cutoff.integral();
    0.5 / PI * det_r.abs() * 2.0 * g * g
}

fn exterior_samples(ctx: &PeakContext) -> Vec<Point> {
    let mut pts = Vec::with_capacity(100);
    for r in [0.5, 0.7, 1.0, 1.5, 2.5] {
        for l in 0..20 {
            let zp = Complex64::from_polar(r, 2.0 * PI * (l as f64 + 0.25) / 20.0);
            pts.push(ctx.normal.to_chart(zp));
        }
    }
    pts
}

pub fn measure_point(ctx: &PeakContext, index: usize, cutoff: &CutoffProfile) -> Result<PeakMeasurement> {
    let plain = ctx.build(cutoff, PeakKind::Plain)?;
    let directional = ctx.build(cutoff, PeakKind::Directional(1))?;
    let mut exterior_max = 0.0f64;
    for q in exterior_samples(ctx) {
        exterior_max = exterior_max.max(ctx.frame.reconstruct(&plain.coeffs, &q)?.norm_sqr());
    }
    let k = ctx.k as f64;
    let geom = ctx.frame.geometry();
    let radius = 2.0 / (k.sqrt() * ctx.normal.scale);
    let disc = crate::geometry::QuadratureRule::disc(ctx.normal.center.chart, ctx.normal.center.z, radius, 32, 64);
    let inside = crate::hilbert::weighted_norm_sq(geom, &disc, |p| ctx.frame.reconstruct(&plain.coeffs, p).unwrap_or_default());
    let concentration = inside / plain.norm_sq();
    Ok(PeakMeasurement { point: index, plain, directional, exterior_max, concentration })
}

/// Checks the peak-section inequalities over base points and powers `k`.
///
/// `c_0` is the smallest `|u_k(p)|²` and `c_1` the smallest
/// `|(1/√k)∂ũ^1_k/∂z(p)|`; the upper bounds are then checked against
/// `1/(c_0 k)` and `1/(c_1 k)`.
pub fn verify_peak_lemmas(family: &FrameFamily, points: &[Point], cutoff: &CutoffProfile) -> Result<LemmaReport> {
    if points.len() < 3 || family.frames.len() < 4 {
        return Err(Error::InsufficientData("peak lemmas need 3 base points and 4 values of k".into()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..family.frames.len()).flat_map(|f| (0..points.len()).map(move |p| (f, p))).collect();
    let measurements: Vec<PeakMeasurement> = jobs
        .par_iter()
        .map(|&(f, p)| {
            let ctx = PeakContext::new(&family.frames[f], &points[p])?;
            measure_point(&ctx, p, cutoff)
        })
        .collect::<Result<_>>()?;

    let c0 = measurements.iter().map(|m| m.plain.norm_sq_at_point()).fold(f64::INFINITY, f64::min);
    let c1 = measurements.iter().map(|m| m.directional.dz.norm()).fold(f64::INFINITY, f64::min);
    let row = |m: &PeakMeasurement, v: f64, bound: f64| (m.point, m.plain.k, v, bound);
    let upper0 = |m: &PeakMeasurement| 1.0 / (c0 * m.plain.k as f64);
    let upper1 = |m: &PeakMeasurement| 1.0 / (c1 * m.plain.k as f64);
    let mk = |name: &str, lower: bool, rows: Vec<(usize, u32, f64, f64)>| InequalityFamily {
        name: name.into(),
        rows,
        lower,
        skipped: false,
    };
    let mut families = vec![
        mk("peak-value-lower", true, measurements.iter().map(|m| row(m, m.plain.norm_sq_at_point(), c0)).collect()),
        mk("peak-exterior-upper", false, measurements.iter().map(|m| row(m, m.exterior_max, upper0(m))).collect()),
        mk(
            "peak-gradient-upper",
            false,
            measurements
                .iter()
                .map(|m| row(m, m.plain.partials[0].norm().max(m.plain.partials[1].norm()), upper0(m)))
                .collect(),
        ),
        mk("directional-value-upper", false, measurements.iter().map(|m| row(m, m.directional.value.norm(), upper1(m))).collect()),
        mk("directional-antiholomorphic-upper", false, measurements.iter().map(|m| row(m, m.directional.dzbar.norm(), upper1(m))).collect()),
        mk("directional-holomorphic-lower", true, measurements.iter().map(|m| row(m, m.directional.dz.norm(), c1)).collect()),
    ];
    families.push(InequalityFamily { name: "directional-cross-upper".into(), rows: vec![], lower: false, skipped: true });

    let ks = family.ks();
    let k0 = ks.iter().copied().find(|&k0| families.iter().all(|f| f.pass_from(k0)));
    let kmax = *ks.last().unwrap();
    let pass = c0 > 0.0 && c1 > 0.0 && families.iter().all(|f| f.pass_from(kmax));

    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let ext: Vec<f64> = ks
        .iter()
        .map(|&k| measurements.iter().filter(|m| m.plain.k == k).map(|m| m.exterior_max).fold(0.0, f64::max))
        .collect();
    let exterior_exponent = fit_power_law(&kf, &ext).map(|f| f.1).unwrap_or(f64::NAN);

    Ok(LemmaReport { points: points.to_vec(), ks, c0, c1, families, k0, exterior_exponent, measurements, pass })
}
