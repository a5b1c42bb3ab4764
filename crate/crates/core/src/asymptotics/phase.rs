use serde::{Deserialize, Serialize};

use super::expansion::linear_fit;
use super::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Smallest kernel modulus that is still trusted.
pub const UNDERFLOW_FLOOR: f64 = 1e-280;

/// Measured imaginary part of the phase between two points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseProbe {
    pub x: Point,
    pub y: Point,
    pub ks: Vec<u32>,
    /// Slope of `y_k` against `k`.
    pub imag_psi: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `λ|z' − w'|²` in third-order normal coordinates centred at `y`.
    pub taylor_reference: f64,
    /// `Im Ψ̂ / |z' − w'|²`.
    pub gaussian_constant: f64,
}

/// Fits `y_k = −½ log(|P_k(x,y)|² / (P_k(x) P_k(y)))` linearly in `k`.
///
/// Dividing by the diagonal removes the amplitude `b(x, y, k)` to leading
/// order, so the intercept only carries its `O(1)` ratio and `y_k` vanishes
/// identically on the diagonal.
pub fn extract_phase(family: &FrameFamily, x: &Point, y: &Point) -> Result<PhaseProbe> {
    let geom = family.geometry().ok_or_else(|| Error::InsufficientData("empty frame family".into()))?;
    let xc = geom.to_chart(x, y.chart)?;
    let mut ks = Vec::new();
    let mut ys = Vec::new();
    for f in &family.frames {
        let pxy = f.bergman_kernel(&xc, y)?.value.norm();
        if pxy < UNDERFLOW_FLOOR {
            return Err(Error::Underflow(pxy));
        }
        let px = f.bergman_function(&xc)?;
        let py = f.bergman_function(y)?;
        ks.push(f.k() as f64);
        ys.push(-0.5 * (pxy * pxy / (px * py)).ln());
    }
    let fit = linear_fit(&ks, &ys)?;
    let nf = geom.normal_coordinates_third_order(y)?;
    let d2 = nf.from_chart(xc.z).norm_sqr();
    let imag_psi = fit.slope;
    Ok(PhaseProbe {
        x: *x,
        y: *y,
        ks: family.ks(),
        imag_psi,
        intercept: fit.intercept,
        residual: fit.residual,
        taylor_reference: nf.lambda() * d2,
        gaussian_constant: if d2 > 0.0 { imag_psi / d2 } else { 0.0 },
    })
}
