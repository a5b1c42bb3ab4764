//! Orthonormal frames of `H^0(L^k)` and the Bergman kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::WeightedSectionBasis;
use super::gram::{assemble_gram, orthonormalize};
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelSpec, Point, QuadratureRule};

/// How the Gram matrix of a frame was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramPath {
    ClosedForm,
    Quadrature,
}

/// Requested Gram strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GramMode {
    /// Closed form when the model admits one, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
}

/// An orthonormal frame `f_j = Σ_i C_ji b_i`.
#[derive(Clone, Debug)]
pub struct BergmanFrame {
    pub basis: WeightedSectionBasis,
    pub coeffs: DMatrix<Complex64>,
    pub path: GramPath,
    pub rule_id: String,
    pub condition: f64,
}

/// `P_{k,s,s₁}(x, y)`: the kernel in the frames of the charts of `x` and `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub charts: (usize, usize),
    pub k: u32,
}

impl BergmanFrame {
    pub fn build(geometry: &ModelGeometry, k: u32) -> Result<Self> {
        Self::build_with(geometry, k, GramMode::Auto, None)
    }

    /// Builds the frame. The closed-form path is cross-checked against
    /// quadrature; a disagreement above `1e-9` is a numerics error.
    pub fn build_with(geometry: &ModelGeometry, k: u32, mode: GramMode, resolution: Option<usize>) -> Result<Self> {
        let basis = WeightedSectionBasis::standard(geometry, k)?;
        Self::from_basis(basis, mode, resolution)
    }

    pub fn from_spec(spec: &ModelSpec, k: u32) -> Result<Self> {
        let g = ModelGeometry::from_spec(spec)?;
        Self::build_with(&g, k, GramMode::Auto, spec.resolution)
    }

    pub fn from_basis(basis: WeightedSectionBasis, mode: GramMode, resolution: Option<usize>) -> Result<Self> {
        let geometry = &basis.geometry;
        let k = basis.k;
        let rule = match resolution {
            Some(r) => geometry.build_quadrature(r, k)?,
            None => geometry.quadrature(k)?,
        };
        Self::from_basis_and_rule(basis, mode, &rule)
    }

    pub fn from_basis_and_rule(basis: WeightedSectionBasis, mode: GramMode, rule: &QuadratureRule) -> Result<Self> {
        let closed = match mode {
            GramMode::Auto => basis.closed_form_gram(),
            GramMode::Quadrature => None,
        };
        let (gram, path) = match closed {
            Some(g) => {
                // The singular weight is not integrable by the smooth rule.
                let smooth = !matches!(&basis.geometry, ModelGeometry::Sphere(s) if s.pole.is_some());
                if smooth {
                    let q = assemble_gram(&basis, rule)?;
                    let diff = (&q - &g).camax();
                    if diff > 1e-9 {
                        return Err(Error::Numerics(format!(
                            "closed-form Gram disagrees with quadrature by {diff:e}"
                        )));
                    }
                }
                (g, GramPath::ClosedForm)
            }
            None => (assemble_gram(&basis, rule)?, GramPath::Quadrature),
        };
        let (coeffs, condition) = orthonormalize(&gram)?;
        Ok(Self { basis, coeffs, path, rule_id: rule.id.clone(), condition })
    }

    pub fn k(&self) -> u32 {
        self.basis.k
    }

    pub fn geometry(&self) -> &ModelGeometry {
        &self.basis.geometry
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weighted representatives `f̃_j(p)` of the orthonormal frame.
    pub fn eval(&self, p: &Point) -> Result<Vec<Complex64>> {
        let b = self.basis.weighted(p)?;
        let n = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, o) in out.iter_mut().enumerate() {
            for i in 0..=j.min(b.len() - 1) {
                *o += self.coeffs[(j, i)] * b[i];
            }
        }
        Ok(out)
    }

    /// Weighted kernel `Σ_j f̃_j(x) conj(f̃_j(y))`.
    pub fn bergman_kernel(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        let fx = self.eval(x)?;
        let fy = self.eval(y)?;
        let value = fx.iter().zip(&fy).map(|(a, b)| a * b.conj()).sum();
        Ok(KernelValue { value, charts: (x.chart, y.chart), k: self.k() })
    }

    /// `P_k(x) = Σ_j |f_j(x)|²_h`.
    pub fn bergman_function(&self, x: &Point) -> Result<f64> {
        Ok(self.eval(x)?.iter().map(|c| c.norm_sqr()).sum())
    }

    /// Kernel as a function of two coordinates in fixed charts.
    pub fn localized_kernel(&self, chart_x: usize, chart_y: usize) -> LocalizedKernel<'_> {
        LocalizedKernel { frame: self, chart_x, chart_y }
    }

    /// Evaluates `Σ_j c_j f̃_j(p)`.
    pub fn reconstruct(&self, coeffs: &[Complex64], p: &Point) -> Result<Complex64> {
        Ok(self.eval(p)?.iter().zip(coeffs).map(|(f, c)| f * c).sum())
    }
}

#[derive(Clone, Copy)]
pub struct LocalizedKernel<'a> {
    frame: &'a BergmanFrame,
    pub chart_x: usize,
    pub chart_y: usize,
}

impl LocalizedKernel<'_> {
    pub fn eval(&self, zx: Complex64, zy: Complex64) -> Result<Complex64> {
        let x = Point::new(self.chart_x, zx);
        let y = Point::new(self.chart_y, zy);
        Ok(self.frame.bergman_kernel(&x, &y)?.value)
    }
}
