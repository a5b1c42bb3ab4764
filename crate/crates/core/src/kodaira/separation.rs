use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::projective::kodaira_map;
use crate::asymptotics::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, Point};
use crate::hilbert::BergmanFrame;

/// `f_k(t)` on a uniform grid of `[0, 1]` along `t x + (1 − t) y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationProbe {
    pub x: Point,
    pub y: Point,
    pub k: u32,
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// `1 − f_k(1)`.
    pub gap: f64,
    /// `f_k(0) = f_k(1) = 1` with `x ≠ y`.
    pub separation_failure: bool,
    /// Interior central differences of `f_k`.
    pub second_derivative: Vec<f64>,
    /// `max f_k'' / (k |x − y|²)` over the interior grid.
    pub scaled_max_second_derivative: f64,
}

fn correlation(frame: &BergmanFrame, z: &Point, y: &Point, fy: &[Complex64], py: f64) -> Result<f64> {
    let fz = frame.eval(z)?;
    let k: Complex64 = fz.iter().zip(fy).map(|(a, b)| a * b.conj()).sum();
    let pz: f64 = fz.iter().map(|c| c.norm_sqr()).sum();
    if z == y {
        return Ok(1.0);
    }
    Ok(k.norm_sqr() / (pz * py))
}

pub fn separation_probe(frame: &BergmanFrame, x: &Point, y: &Point, n: usize) -> Result<SeparationProbe> {
    if n < 3 {
        return Err(Error::Config("the t-grid needs at least 3 nodes".into()));
    }
    let geom = frame.geometry();
    let x = geom.to_chart(x, y.chart)?;
    let fy = frame.eval(y)?;
    let py: f64 = fy.iter().map(|c| c.norm_sqr()).sum();
    let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let f = t
        .iter()
        .map(|&s| {
            let z = if s == 0.0 { *y } else { Point::new(y.chart, x.z * s + y.z * (1.0 - s)) };
            correlation(frame, &z, y, &fy, py)
        })
        .collect::<Result<Vec<f64>>>()?;
    let dt = t[1];
    let second_derivative: Vec<f64> = f.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dt * dt)).collect();
    let d2 = (x.z - y.z).norm_sqr();
    let k = frame.k();
    let gap = 1.0 - f[n - 1];
    let separation_failure = d2 > 0.0 && (1.0 - f[0]).abs() < 1e-12 && gap.abs() < 1e-12;
    let scaled_max_second_derivative = if d2 > 0.0 {
        second_derivative.iter().copied().fold(f64::NEG_INFINITY, f64::max) / (k as f64 * d2)
    } else {
        0.0
    };
    Ok(SeparationProbe { x, y: *y, k, t, f, gap, separation_failure, second_derivative, scaled_max_second_derivative })
}

/// A pair of sample points and the stratum it was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub x: Point,
    pub y: Point,
    pub stratum: Stratum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stratum {
    Macroscopic,
    RootScale,
    InverseScale,
}

fn random_point(geom: &ModelGeometry, rng: &mut ChaCha8Rng) -> Point {
    match geom {
        ModelGeometry::Sphere(_) => {
            // Uniform for the round metric: t = |z|²/(1+|z|²) is uniform.
            let t: f64 = rng.gen_range(0.0..1.0);
            let r = (t / (1.0 - t)).sqrt();
            geom.canonical(&Point::new(0, Complex64::from_polar(r, rng.gen_range(0.0..TAU))))
        }
        ModelGeometry::Torus(_) => Point::chart0(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
    }
}

/// Seeded pairs in three equal strata: separation above 0.3, at scale
/// `1/√k`, and at scale `1/k`.
pub fn sample_pairs(geom: &ModelGeometry, k: u32, count: usize, seed: u64) -> Result<Vec<SamplePair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kf = k as f64;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let stratum = match i % 3 {
            0 => Stratum::Macroscopic,
            1 => Stratum::RootScale,
            _ => Stratum::InverseScale,
        };
        let x = random_point(geom, &mut rng);
        let y = match stratum {
            Stratum::Macroscopic => loop {
                let y = random_point(geom, &mut rng);
                if geom.separation(&x, &y)? > 0.3 {
                    break y;
                }
            },
            Stratum::RootScale | Stratum::InverseScale => {
                let scale = if stratum == Stratum::RootScale { kf.sqrt().recip() } else { kf.recip() };
                let r = scale * rng.gen_range(0.2..1.0);
                Point::new(x.chart, x.z + Complex64::from_polar(r, rng.gen_range(0.0..TAU)))
            }
        };
        out.push(SamplePair { x, y, stratum });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair: SamplePair,
    pub source_distance: f64,
    pub image_distance: f64,
    /// `1 − f_k(1)`; equals `sin²` of the image distance.
    pub gap: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub k: u32,
    pub results: Vec<PairResult>,
    pub violations: usize,
    /// Largest `|1 − f_k(1) − sin² d_FS|` over the pairs.
    pub consistency: f64,
}

/// Image distances below this count as a collision.
pub const COLLISION_TOLERANCE: f64 = 1e-7;

pub fn injectivity_scan(frame: &BergmanFrame, pairs: &[SamplePair]) -> Result<ScanReport> {
    let geom = frame.geometry();
    let results = pairs
        .par_iter()
        .map(|pair| {
            let (a, b) = (kodaira_map(frame, &pair.x)?, kodaira_map(frame, &pair.y)?);
            let image_distance = a.distance(&b);
            let gap = 1.0 - a.inner(&b).norm_sqr();
            let source_distance = geom.separation(&pair.x, &pair.y)?;
            let violation = source_distance > 0.0 && image_distance <= COLLISION_TOLERANCE;
            Ok(PairResult { pair: *pair, source_distance, image_distance, gap, violation })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = results.iter().filter(|r| r.violation).count();
    let consistency = results.iter().map(|r| (r.gap - r.image_distance.sin().powi(2)).abs()).fold(0.0, f64::max);
    Ok(ScanReport { k: frame.k(), results, violations, consistency })
}

/// Smallest swept `k` from which no scan reports a violation.
pub fn embedding_threshold(reports: &[ScanReport]) -> Option<u32> {
    let mut k0 = None;
    for r in reports.iter().rev() {
        if r.violations > 0 {
            break;
        }
        k0 = Some(r.k);
    }
    k0
}

/// Second-order behaviour of `f_k` for pairs at separation `c/k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub base: Point,
    pub ks: Vec<u32>,
    /// `max_t f_k''(t) / (k|x − y|²)` per `k`.
    pub scaled_second_derivative: Vec<f64>,
    /// `max_t (log f_k)''(t) / (k|x − y|²)`: the phase Hessian term.
    pub hessian_term: Vec<f64>,
    /// `|(log f_k)'(½)|`: the first-derivative term.
    pub first_derivative: Vec<f64>,
    /// `−max_k` of the scaled second derivative.
    pub negative_bound: f64,
    /// `4 φ_{z z̄}(y)`, the Gaussian prediction for the scaled `−f_k''`.
    pub predicted: f64,
}

pub fn curvature_diagnostic(family: &FrameFamily, y: &Point, direction: Complex64, c: f64, n: usize) -> Result<CurvatureReport> {
    let geom = family.geometry().ok_or_else(|| Error::InsufficientData("empty frame family".into()))?;
    if c == 0.0 || direction.norm() == 0.0 {
        return Err(Error::Precondition("zero separation".into()));
    }
    let dir = direction / direction.norm();
    let mut scaled = Vec::new();
    let mut hessian = Vec::new();
    let mut first = Vec::new();
    for frame in &family.frames {
        let kf = frame.k() as f64;
        let d = c / kf;
        if kf.sqrt() * d > 0.5 {
            return Err(Error::Precondition(format!("√k|x − y| = {} is not small", kf.sqrt() * d)));
        }
        let x = Point::new(y.chart, y.z + dir * d);
        let probe = separation_probe(frame, &x, y, n)?;
        let dt = probe.t[1];
        let logf: Vec<f64> = probe.f.iter().map(|v| v.ln()).collect();
        let h = logf
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dt * dt))
            .fold(f64::NEG_INFINITY, f64::max);
        let mid = (n - 1) / 2;
        let g1 = (logf[mid + 1] - logf[mid - 1]) / (2.0 * dt);
        scaled.push(probe.scaled_max_second_derivative);
        hessian.push(h / (kf * d * d));
        first.push(g1.abs());
    }
    let negative_bound = -scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let predicted = 4.0 * geom.weight_jet(y)?.dzzbar;
    Ok(CurvatureReport {
        base: *y,
        ks: family.ks(),
        scaled_second_derivative: scaled,
        hessian_term: hessian,
        first_derivative: first,
        negative_bound,
        predicted,
    })
}

/// `min_x P_k(x)/k^n` over seeded sample points.
pub fn base_point_sweep(frame: &BergmanFrame, count: usize, seed: u64) -> Result<f64> {
    let geom = frame.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..count).map(|_| random_point(geom, &mut rng)).collect();
    let n = geom.dimension() as i32;
    let kn = (frame.k() as f64).powi(n);
    let vals = pts.par_iter().map(|p| frame.bergman_function(p)).collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min) / kn)
}
