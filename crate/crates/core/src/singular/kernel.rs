use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::integrability::{classify_candidate, CandidateReport, GradedMesh, NODES_PER_SHELL, POLE_CUTOFF, REFINED_CUTOFF};
use super::weight::{admissible_orders, beta_exponents, SingularWeight};
use crate::asymptotics::{fit_expansion, fit_power_law, ExpansionFit, FrameFamily};
use crate::error::{Error, Result};
use crate::geometry::{gauss_legendre_on, Point};
use crate::hilbert::{assemble_gram, orthonormalize, BergmanFrame, GramMode, GramPath, WeightedSectionBasis};

/// Orthonormal frame of the sections of `L^k` that are square integrable
/// against the singular metric.
#[derive(Clone, Debug)]
pub struct MultiplierFrame {
    pub weight: SingularWeight,
    pub k: u32,
    pub orders: Vec<i64>,
    pub frame: BergmanFrame,
}

impl MultiplierFrame {
    /// Frame over the admissible vanishing orders with the closed-form Gram.
    pub fn build(weight: &SingularWeight, k: u32) -> Result<Self> {
        let orders = admissible_orders(k, weight.degree, weight.tau);
        let basis = WeightedSectionBasis::monomials(&weight.geometry(), k, orders.clone())?;
        let frame = BergmanFrame::from_basis(basis, GramMode::Auto, None)?;
        debug_assert_eq!(frame.path, GramPath::ClosedForm);
        Ok(Self { weight: weight.clone(), k, orders, frame })
    }

    /// `m_k`.
    pub fn dimension(&self) -> usize {
        self.orders.len()
    }

    /// `P_{k,𝓘}(x)`.
    pub fn kernel(&self, x: &Point) -> Result<f64> {
        let q = self.weight.to_model(x);
        if q.chart == 0 && q.z.norm() == 0.0 {
            return Err(Error::Pole(format!("{x:?}")));
        }
        if self.orders.is_empty() {
            return Ok(0.0);
        }
        self.frame.bergman_function(&q)
    }
}

pub fn multiplier_kernel(frame: &MultiplierFrame, x: &Point) -> Result<f64> {
    frame.kernel(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkodaReport {
    pub k: u32,
    pub tau: f64,
    pub candidates: Vec<CandidateReport>,
    /// Orders accepted by the integrability filter.
    pub accepted: Vec<i64>,
    /// Orders predicted by `v > kτ − 1`, `v ≤ km`.
    pub admissible: Vec<i64>,
    pub thresholds_match: bool,
    pub max_relative_discrepancy: f64,
    /// Set when a candidate at the edge of the enumeration window is not
    /// clearly rejected.
    pub truncation_warning: bool,
}

/// Smallest distance from the pole allowed for sample points.
pub const POLE_CLEARANCE: f64 = 0.05;

/// Bergman kernel of all square-integrable holomorphic sections over the
/// punctured sphere, enumerated from Laurent monomials `z^v`,
/// `−3 ≤ v ≤ km + 3`, and compared with the multiplier kernel.
pub fn skoda_check(weight: &SingularWeight, k: u32, points: &[Point]) -> Result<SkodaReport> {
    for p in points {
        if weight.distance_to_pole(p) < POLE_CLEARANCE {
            return Err(Error::Precondition(format!("{p:?} is closer than {POLE_CLEARANCE} to the pole")));
        }
    }
    let (m, tau) = (weight.degree, weight.tau);
    let km = (k * m) as i64;
    let mesh = GradedMesh::new(POLE_CUTOFF, NODES_PER_SHELL);
    let refined = GradedMesh::new(REFINED_CUTOFF, NODES_PER_SHELL);
    let candidates: Vec<CandidateReport> =
        (-3..=km + 3).map(|v| classify_candidate(k, m, tau, v, &mesh, &refined)).collect();
    let accepted: Vec<i64> = candidates.iter().filter(|c| c.integrable).map(|c| c.order).collect();
    let admissible = admissible_orders(k, m, tau);

    let max_accepted = candidates.iter().filter(|c| c.integrable).map(|c| c.log_norm_refined).fold(f64::NEG_INFINITY, f64::max);
    let edges = [candidates.first(), candidates.last()];
    let truncation_warning = edges
        .iter()
        .flatten()
        .any(|c| c.integrable || c.log_norm_refined - max_accepted < 1e3f64.ln());

    let multiplier = MultiplierFrame::build(weight, k)?;
    let max_relative_discrepancy = if accepted.is_empty() {
        points.iter().map(|p| multiplier.kernel(p)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max)
    } else {
        let geom = weight.geometry();
        let basis = WeightedSectionBasis::monomials(&geom, k, accepted.clone())?;
        let mut gram = assemble_gram(&basis, &mesh.rule(2 * (km as usize + 3) + 8))?;
        let ls = match &basis.kind {
            crate::hilbert::BasisKind::Monomials { log_scale, .. } => log_scale.clone(),
            _ => unreachable!(),
        };
        for (i, &v) in accepted.iter().enumerate() {
            let (a, b) = beta_exponents(k, m, tau, v);
            let tc = mesh.cutoff_t;
            let tail = 2.0 * PI * m as f64 * (tc.powf(a + 1.0) / (a + 1.0) + tc.powf(b + 1.0) / (b + 1.0));
            gram[(i, i)] += Complex64::new(tail * (2.0 * ls[i]).exp(), 0.0);
        }
        let (coeffs, condition) = orthonormalize(&gram)?;
        let frame = BergmanFrame { basis, coeffs, path: GramPath::Quadrature, rule_id: mesh.rule(1).id, condition };
        points
            .iter()
            .map(|p| {
                let q = weight.to_model(p);
                let a = frame.bergman_function(&q)?;
                let b = multiplier.kernel(p)?;
                Ok((a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max)
    };
    Ok(SkodaReport {
        k,
        tau,
        thresholds_match: accepted == admissible,
        candidates,
        accepted,
        admissible,
        max_relative_discrepancy,
        truncation_warning,
    })
}

/// Annulus `r0 ≤ |z| ≤ r1` around the pole in model coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleAnnulus {
    pub r0: f64,
    pub r1: f64,
}

impl PoleAnnulus {
    /// Model-coordinate sample points on a few circles.
    pub fn samples(&self, count: usize) -> Vec<Point> {
        (0..count)
            .map(|i| {
                let s = (i as f64 + 0.5) / count as f64;
                let r = self.r0 + (self.r1 - self.r0) * s;
                Point::new(0, Complex64::from_polar(r, 2.399963229728653 * i as f64))
            })
            .collect()
    }

    /// `∫_K f dv` for a rotation-invariant `f` of the model, by quadrature
    /// in `t` and the angle.
    pub fn integrate<F: Fn(&Point) -> Result<f64>>(&self, m: u32, f: F) -> Result<f64> {
        let t = |r: f64| r * r / (1.0 + r * r);
        let mut s = 0.0;
        let n_angles = 8;
        for (tt, w) in gauss_legendre_on(24, t(self.r0), t(self.r1)) {
            let r = (tt / (1.0 - tt)).sqrt();
            for l in 0..n_angles {
                let p = Point::new(0, Complex64::from_polar(r, 2.0 * PI * l as f64 / n_angles as f64));
                s += w * (2.0 * PI / n_angles as f64) * m as f64 * f(&p)?;
            }
        }
        Ok(s)
    }
}

/// Multiplier frames over a range of `k`, as a frame family.
pub fn multiplier_family(weight: &SingularWeight, ks: &[u32]) -> Result<(Vec<MultiplierFrame>, FrameFamily)> {
    let frames: Vec<MultiplierFrame> = ks.par_iter().map(|&k| MultiplierFrame::build(weight, k)).collect::<Result<_>>()?;
    let family = FrameFamily::from_frames(frames.iter().map(|f| f.frame.clone()).collect())?;
    Ok((frames, family))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularExpansionReport {
    pub fits: Vec<ExpansionFit>,
    /// `(2π)^{−1}(m − τ)/m`, the leading coefficient off the pole.
    pub reference: f64,
    pub max_relative_deviation: f64,
}

/// Expansion of `P_{k,𝓘}` at points of a compact set away from the pole.
pub fn singular_expansion_check(weight: &SingularWeight, ks: &[u32], points: &[Point]) -> Result<SingularExpansionReport> {
    let (frames, _) = multiplier_family(weight, ks)?;
    let reference = weight.regular_eigenvalue() / (2.0 * PI);
    let mut fits = Vec::new();
    for p in points {
        let samples = frames.iter().map(|f| Ok((f.k, f.kernel(p)?))).collect::<Result<Vec<_>>>()?;
        let mut fit = fit_expansion(&samples, 1, Some(reference))?;
        fit.point = Some(*p);
        fits.push(fit);
    }
    let max_relative_deviation = fits.iter().filter_map(|f| f.relative_deviation).fold(0.0, f64::max);
    Ok(SingularExpansionReport { fits, reference, max_relative_deviation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigBoundReport {
    pub ks: Vec<u32>,
    /// `∫_K P_{k,𝓘} dv`.
    pub integrals: Vec<f64>,
    pub multiplier_dimensions: Vec<usize>,
    /// `dim H^0(M, L^k) = km + 1`.
    pub dimensions: Vec<usize>,
    pub inequality_holds: bool,
    pub exponent: f64,
    pub constant: f64,
}

pub fn big_bound_check(weight: &SingularWeight, ks: &[u32], region: &PoleAnnulus) -> Result<BigBoundReport> {
    let (frames, _) = multiplier_family(weight, ks)?;
    let mut integrals = Vec::new();
    for f in &frames {
        integrals.push(region.integrate(weight.degree, |p| f.frame.bergman_function(p).map(|v| if f.orders.is_empty() { 0.0 } else { v }))?);
    }
    let dimensions: Vec<usize> = ks.iter().map(|&k| (k * weight.degree) as usize + 1).collect();
    let inequality_holds = integrals.iter().zip(&dimensions).all(|(i, &d)| *i <= d as f64);
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let (constant, exponent, _) = fit_power_law(&kf, &integrals)?;
    Ok(BigBoundReport {
        ks: ks.to_vec(),
        integrals,
        multiplier_dimensions: frames.iter().map(|f| f.dimension()).collect(),
        dimensions,
        inequality_holds,
        exponent,
        constant,
    })
}
