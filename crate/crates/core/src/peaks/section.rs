use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::geometry::{NormalFrame, Point, QuadNode, QuadratureRule};
use crate::hilbert::BergmanFrame;

/// Largest chart radius the cutoff support may occupy.
pub const MAX_SUPPORT_RADIUS: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakKind {
    Plain,
    /// Linear factor `√k z_j` inserted (1-based `j`).
    Directional(usize),
}

/// Projection of a cutoff at scale `1/√k` around `p`, with the quantities
/// the peak lemmas constrain. Derivatives are taken in normal coordinates at
/// `p` and scaled by `1/√k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSection {
    pub point: Point,
    pub k: u32,
    pub kind: PeakKind,
    pub coeffs: Vec<Complex64>,
    /// `ũ_k(p)` in the normal frame.
    pub value: Complex64,
    /// `(1/√k) ∂ũ_k/∂x_s(p)`, `s = 1, 2`.
    pub partials: [Complex64; 2],
    /// `(1/√k) ∂ũ_k/∂z(p)`.
    pub dz: Complex64,
    /// `(1/√k) ∂ũ_k/∂z̄(p)`.
    pub dzbar: Complex64,
}

/// Normal-frame context shared by the evaluators of one base point.
pub struct PeakContext<'a> {
    pub frame: &'a BergmanFrame,
    pub normal: NormalFrame,
    pub k: u32,
}

impl<'a> PeakContext<'a> {
    pub fn new(frame: &'a BergmanFrame, p: &Point) -> Result<Self> {
        let geom = frame.geometry();
        let p = geom.canonical(p);
        let normal = geom.normal_coordinates(&p)?;
        let k = frame.k();
        let radius = std::f64::consts::SQRT_2 / ((k as f64).sqrt() * normal.scale);
        if radius > MAX_SUPPORT_RADIUS {
            let min = (2.0 / (normal.scale * normal.scale * MAX_SUPPORT_RADIUS * MAX_SUPPORT_RADIUS)).ceil() as usize;
            return Err(Error::Resolution { got: k as usize, min });
        }
        Ok(Self { frame, normal, k })
    }

    fn sqrt_k(&self) -> f64 {
        (self.k as f64).sqrt()
    }

    /// Phase taking chart-gauge weighted values to the normal frame.
    fn to_normal_gauge(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, -(self.k as f64) * self.normal.gauge_at(z).im)
    }

    /// Rule over the support `|√k y_s| ≤ 1` mapped to chart coordinates.
    pub fn rule(&self, cutoff: &CutoffProfile, per_piece: usize) -> QuadratureRule {
        let nodes1 = cutoff.nodes(per_piece);
        let s = self.sqrt_k() * self.normal.scale;
        let mut nodes = Vec::with_capacity(nodes1.len() * nodes1.len());
        for &(t1, w1) in &nodes1 {
            for &(t2, w2) in &nodes1 {
                let z = self.normal.center.z + Complex64::new(t1, t2) / s;
                nodes.push(QuadNode { chart: self.normal.center.chart, z, weight: w1 * w2 / (s * s) });
            }
        }
        QuadratureRule { id: format!("peak-{}x{}", nodes1.len(), nodes1.len()), order: per_piece, nodes }
    }

    /// Chart-gauge weighted representative of the cutoff data.
    pub fn data(&self, cutoff: &CutoffProfile, kind: PeakKind, p: &Point) -> Complex64 {
        let t = self.normal.from_chart(p.z) * self.sqrt_k();
        let mut v = Complex64::new(cutoff.value(t.re) * cutoff.value(t.im), 0.0);
        if let PeakKind::Directional(_) = kind {
            v *= t;
        }
        v / self.to_normal_gauge(p.z)
    }

    /// `ũ(z')` in the normal frame at normal coordinate `zp`.
    pub fn eval_normal(&self, coeffs: &[Complex64], zp: Complex64) -> Result<Complex64> {
        let q = self.normal.to_chart(zp);
        Ok(self.frame.reconstruct(coeffs, &q)? * self.to_normal_gauge(q.z))
    }

    pub fn build(&self, cutoff: &CutoffProfile, kind: PeakKind) -> Result<PeakSection> {
        if let PeakKind::Directional(j) = kind {
            if j != 1 {
                return Err(Error::Config(format!("direction {j} does not exist in dimension 1")));
            }
        }
        let rule = self.rule(cutoff, 16);
        let coeffs = self.frame.project(&rule, |p| self.data(cutoff, kind, p))?;
        self.measure(coeffs, kind)
    }

    /// Records value and scaled derivatives at the base point.
    pub fn measure(&self, coeffs: Vec<Complex64>, kind: PeakKind) -> Result<PeakSection> {
        let h = 0.1 / self.sqrt_k();
        let zero = Complex64::new(0.0, 0.0);
        let value = self.eval_normal(&coeffs, zero)?;
        let dx = (self.eval_normal(&coeffs, Complex64::new(h, 0.0))? - self.eval_normal(&coeffs, Complex64::new(-h, 0.0))?)
            / (2.0 * h);
        let dy = (self.eval_normal(&coeffs, Complex64::new(0.0, h))? - self.eval_normal(&coeffs, Complex64::new(0.0, -h))?)
            / (2.0 * h);
        let scale = 1.0 / self.sqrt_k();
        let i = Complex64::i();
        Ok(PeakSection {
            point: self.normal.center,
            k: self.k,
            kind,
            coeffs,
            value,
            partials: [dx * scale, dy * scale],
            dz: (dx - i * dy) * 0.5 * scale,
            dzbar: (dx + i * dy) * 0.5 * scale,
        })
    }
}

pub fn peak_section(frame: &BergmanFrame, p: &Point, cutoff: &CutoffProfile) -> Result<PeakSection> {
    PeakContext::new(frame, p)?.build(cutoff, PeakKind::Plain)
}

pub fn directional_peak_section(frame: &BergmanFrame, p: &Point, j: usize, cutoff: &CutoffProfile) -> Result<PeakSection> {
    PeakContext::new(frame, p)?.build(cutoff, PeakKind::Directional(j))
}

impl PeakSection {
    /// `|u_k(p)|²_{h^{L^k}}`.
    pub fn norm_sq_at_point(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// `‖u_k‖²`, from the coefficients in the orthonormal frame.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}
